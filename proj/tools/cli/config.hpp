#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "monster/calibration.hpp"
#include "monster/defocus.hpp"
#include "monster/fusion.hpp"
#include "monster/simulator.hpp"
#include "monster/stereo.hpp"

namespace monster::cli {

struct RunConfig {
  uint64_t seed = 0;
  std::string output = "out";
  int jobs = 0;  // 0: logical cores

  SceneSpec scene;
  double image_noise = 0.0;
  int count = 5;
  std::string decalib = "none";
  int pan_px = 0;

  double baseline = 0.1;
  double focal_px = 256.0;

  double coefficient = 9.0;
  double pupil_radius = 1.14e-3;
  double focal_length = 0.016;
  double left_focus = 1.5;
  double right_focus = 0.7;
  PsiRange psi;

  MatcherConfig matcher;
  CalibConfig calib;
  MonoSimSpec mono;

  FusionPolicy fusion;
  std::string fusion_policies = "hybrid";
  std::string mono_range = "auto";  // "auto" or "near,far" in meters
  int fusion_max_disp = 24;
  OutOfRangePolicy fusion_mono_out_of_range = OutOfRangePolicy::Saturate;
  int mape_bins = 12;

  std::string axis1 = "inplane:-10:10:21";
  std::string axis2 = "pitch:-3:3:11";
  int record = 0;

  DriftConfig drift;
  int baseline_frames = 5;
  int inject_at = -1;
  std::string inject = "inplane:5deg";

  RunConfig();

  StereoRig rig() const;
  DefocusModel defocus_left() const;
  DefocusModel defocus_right() const;
  /// Fusion policy with mono_range resolved ("auto" = right camera range).
  FusionPolicy fusion_policy(FusionMode mode) const;
  MatcherConfig fusion_matcher() const;
  /// Throws ConfigError on inconsistent values.
  void validate() const;
};

struct ConfigKey {
  std::string name;
  std::string help;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

const std::vector<ConfigKey>& config_keys();

/// Applies a YAML file; unknown keys and malformed values throw ConfigError,
/// unreadable files IoError.
void load_config_file(RunConfig& cfg, const std::filesystem::path& file);
/// Applies "key=value".
void apply_override(RunConfig& cfg, const std::string& assignment);
void set_key(RunConfig& cfg, const std::string& key, const std::string& value);

/// Every key with its current value, as a loadable YAML document.
std::string dump_config(const RunConfig& cfg);
/// Key table for --help.
std::string describe_keys();

}  // namespace monster::cli
