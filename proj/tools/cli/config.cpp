#include "cli/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

namespace monster::cli {

RunConfig::RunConfig() = default;

StereoRig RunConfig::rig() const {
  StereoRig r;
  r.baseline = baseline;
  r.focal_px = focal_px;
  r.intrinsics = {focal_px, focal_px, scene.width / 2.0, scene.height / 2.0};
  return r;
}

DefocusModel RunConfig::defocus_left() const {
  return DefocusModel::with_coefficient(coefficient, left_focus, focal_length, pupil_radius);
}

DefocusModel RunConfig::defocus_right() const {
  return DefocusModel::with_coefficient(coefficient, right_focus, focal_length, pupil_radius);
}

FusionPolicy RunConfig::fusion_policy(FusionMode mode) const {
  FusionPolicy p = fusion;
  p.mode = mode;
  if (mono_range == "auto") {
    p.mono_range = valid_depth_range(defocus_right(), psi);
  } else {
    const auto comma = mono_range.find(',');
    try {
      if (comma == std::string::npos) throw std::invalid_argument("no comma");
      p.mono_range = {std::stod(mono_range.substr(0, comma)), std::stod(mono_range.substr(comma + 1))};
    } catch (const std::exception&) {
      throw Error(ErrorCode::ConfigError, "fusion.mono_range must be auto or near,far");
    }
  }
  return p;
}

MatcherConfig RunConfig::fusion_matcher() const {
  MatcherConfig m = matcher;
  m.max_disp = fusion_max_disp;
  return m;
}

void RunConfig::validate() const {
  try {
    random_scene_spec(scene, 0).validate();
    rig().validate();
    defocus_left().validate();
    defocus_right().validate();
    matcher.validate();
    fusion_matcher().validate();
    calib.validate();
    mono.validate();
    if (!(psi.psi_min < psi.psi_max)) throw Error(ErrorCode::InvalidRange, "psi_min must be < psi_max");
    for (const FusionMode m : {FusionMode::Confidence, FusionMode::RangeGated, FusionMode::Hybrid}) {
      fusion_policy(m).validate();
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    throw Error(ErrorCode::ConfigError, e.what());
  }
  if (jobs < 0) throw Error(ErrorCode::ConfigError, "jobs must be >= 0");
  if (count < 1) throw Error(ErrorCode::ConfigError, "count must be >= 1");
  if (pan_px < 0) throw Error(ErrorCode::ConfigError, "scene.pan_px must be >= 0");
  if (mape_bins < 2) throw Error(ErrorCode::ConfigError, "fusion.mape_bins must be >= 2");
  if (drift.window < 1) throw Error(ErrorCode::ConfigError, "drift.window must be >= 1");
  if (baseline_frames < 1) throw Error(ErrorCode::ConfigError, "drift.baseline_frames must be >= 1");
}

namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw Error(ErrorCode::ConfigError, fmt::format("invalid value for {}: '{}'", key, value));
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const char* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end) bad_value(key, v);
  return out;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& v) {
  Int out = 0;
  const char* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end) bad_value(key, v);
  return out;
}

std::string num(double v) { return fmt::format("{}", v); }

template <typename E>
struct EnumNames {
  std::vector<std::pair<E, std::string>> names;

  std::string get(E e) const {
    for (const auto& [k, n] : names) {
      if (k == e) return n;
    }
    return "?";
  }
  E parse(const std::string& key, const std::string& v) const {
    for (const auto& [k, n] : names) {
      if (n == v) return k;
    }
    bad_value(key, v);
  }
  std::string choices() const {
    std::string s;
    for (const auto& [k, n] : names) s += (s.empty() ? "" : "|") + n;
    return s;
  }
};

const EnumNames<MatchCost> kCost{{{MatchCost::SAD, "sad"}, {MatchCost::ZNCC, "zncc"}}};
const EnumNames<WarpSide> kSide{
    {{WarpSide::Left, "warp_left"}, {WarpSide::Right, "warp_right"}, {WarpSide::Both, "warp_both"}}};
const EnumNames<ReferenceCamera> kRef{{{ReferenceCamera::Left, "left"}, {ReferenceCamera::Right, "right"}}};
const EnumNames<LossSpace> kSpace{{{LossSpace::Depth, "depth"}, {LossSpace::Disparity, "disparity"}}};
const EnumNames<LossKind> kKind{{{LossKind::L1, "l1"}, {LossKind::RelativeL1, "relative_l1"}}};
const EnumNames<OptimizerKind> kOpt{
    {{OptimizerKind::AdamLike, "adam_like"}, {OptimizerKind::NelderMead, "nelder_mead"}}};
const EnumNames<MonoMode> kMono{{{MonoMode::PhaseCoded, "phase_coded"}, {MonoMode::ImageBased, "image_based"}}};
const EnumNames<OutOfRangePolicy> kOor{
    {{OutOfRangePolicy::Invalidate, "invalidate"}, {OutOfRangePolicy::Saturate, "saturate"}}};

#define MONSTER_DOUBLE(key, field, help)                                       \
  ConfigKey {                                                                  \
    key, help, [](const RunConfig& c) { return num(c.field); },                \
        [](RunConfig& c, const std::string& v) { c.field = to_double(key, v); } \
  }
#define MONSTER_INT(key, field, help)                                                   \
  ConfigKey {                                                                           \
    key, help, [](const RunConfig& c) { return std::to_string(c.field); },              \
        [](RunConfig& c, const std::string& v) { c.field = to_int<decltype(c.field)>(key, v); } \
  }
#define MONSTER_STRING(key, field, help)                                   \
  ConfigKey {                                                              \
    key, help, [](const RunConfig& c) { return c.field; },                 \
        [](RunConfig& c, const std::string& v) { c.field = v; }            \
  }
#define MONSTER_ENUM(key, field, table, help)                                       \
  ConfigKey {                                                                       \
    key, help + (" (" + table.choices() + ")"),                                     \
        [](const RunConfig& c) { return table.get(c.field); },                      \
        [](RunConfig& c, const std::string& v) { c.field = table.parse(key, v); }   \
  }

std::vector<ConfigKey> build_keys() {
  using S = std::string;
  return {
      MONSTER_INT("seed", seed, S("global seed; every component derives its own stream from it")),
      MONSTER_STRING("output", output, S("output directory")),
      MONSTER_INT("jobs", jobs, S("worker threads; 0 = logical cores")),

      MONSTER_INT("scene.width", scene.width, S("image width, px")),
      MONSTER_INT("scene.height", scene.height, S("image height, px")),
      MONSTER_DOUBLE("scene.depth_min", scene.depth_min, S("nearest scene depth, m")),
      MONSTER_DOUBLE("scene.depth_max", scene.depth_max, S("farthest scene depth, m")),
      MONSTER_INT("scene.texture.octaves", scene.texture.octaves, S("value-noise octaves")),
      MONSTER_DOUBLE("scene.texture.base_period", scene.texture.base_period,
                     S("coarsest noise period, px")),
      MONSTER_DOUBLE("scene.texture.persistence", scene.texture.persistence,
                     S("amplitude ratio between octaves")),
      MONSTER_INT("scene.texture.checker_period", scene.texture.checker_period,
                  S("checker overlay period, px; 0 disables")),
      MONSTER_DOUBLE("scene.texture.checker_amplitude", scene.texture.checker_amplitude,
                     S("checker overlay amplitude")),
      MONSTER_DOUBLE("scene.image_noise", image_noise, S("additive Gaussian image noise sigma")),
      MONSTER_INT("scene.count", count, S("records written by simulate")),
      MONSTER_STRING("scene.decalib", decalib,
                     S("left-image decalibration: none | inplane:7deg | pitch:2deg | yaw:1deg | "
                       "inplane:uniform:7deg | params:a,b,c,d,e,f,g,h")),

      MONSTER_INT("scene.pan_px", pan_px,
                  S("0: independent scenes; > 0: records are frames of one wide scene panned by this "
                    "many px per frame")),

      MONSTER_DOUBLE("rig.baseline", baseline, S("stereo baseline, m")),
      MONSTER_DOUBLE("rig.focal_px", focal_px, S("focal length, px (principal point at image center)")),

      MONSTER_DOUBLE("defocus.coefficient", coefficient, S("defocus coefficient C = pi R^2 / lambda")),
      MONSTER_DOUBLE("defocus.pupil_radius", pupil_radius, S("exit pupil radius R, m")),
      MONSTER_DOUBLE("defocus.focal_length", focal_length, S("lens focal length f, m")),
      MONSTER_DOUBLE("defocus.left_focus", left_focus, S("left camera focus distance, m")),
      MONSTER_DOUBLE("defocus.right_focus", right_focus, S("right camera focus distance, m")),
      MONSTER_DOUBLE("defocus.psi_min", psi.psi_min, S("lower end of the usable psi range")),
      MONSTER_DOUBLE("defocus.psi_max", psi.psi_max, S("upper end of the usable psi range")),

      MONSTER_INT("matcher.block_radius", matcher.block_radius, S("window radius, px")),
      MONSTER_INT("matcher.max_disp", matcher.max_disp, S("largest disparity searched, px")),
      MONSTER_ENUM("matcher.cost", matcher.cost, kCost, S("matching cost")),
      MONSTER_DOUBLE("matcher.lr_threshold", matcher.lr_threshold,
                     S("left-right consistency tolerance, px")),
      MONSTER_DOUBLE("matcher.uniqueness_ratio", matcher.uniqueness_ratio,
                     S("required second-best / best cost ratio")),

      MONSTER_ENUM("calibration.side", calib.side, kSide, S("image(s) warped")),
      MONSTER_ENUM("calibration.reference", calib.reference, kRef, S("camera providing the mono reference")),
      MONSTER_ENUM("calibration.loss_space", calib.loss_space, kSpace, S("consistency loss units")),
      MONSTER_ENUM("calibration.loss_kind", calib.loss_kind, kKind, S("consistency loss")),
      MONSTER_INT("calibration.steps", calib.steps, S("optimizer iterations")),
      MONSTER_DOUBLE("calibration.step_size", calib.step_size,
                     S("initial learning rate on normalized parameters")),
      MONSTER_DOUBLE("calibration.fd_epsilon", calib.fd_epsilon,
                     S("finite-difference step on normalized parameters")),
      MONSTER_ENUM("calibration.optimizer", calib.optimizer, kOpt, S("optimizer")),
      MONSTER_INT("calibration.restarts", calib.restarts, S("optimizer restarts")),
      MONSTER_DOUBLE("calibration.restart_sigma", calib.restart_sigma,
                     S("restart perturbation sigma, normalized units")),
      MONSTER_DOUBLE("calibration.simplex_size", calib.simplex_size, S("initial simplex edge")),
      MONSTER_INT("calibration.patience", calib.patience,
                  S("steps without 1e-4 relative improvement before stopping")),

      MONSTER_ENUM("mono.mode", mono.mode, kMono, S("monocular engine")),
      MONSTER_DOUBLE("mono.noise_sigma_psi", mono.noise_sigma_psi, S("psi noise sigma (phase_coded)")),
      MONSTER_ENUM("mono.out_of_range", mono.out_of_range, kOor,
                   S("phase_coded output outside the psi range")),
      MONSTER_DOUBLE("mono.relative_scale", mono.relative_scale, S("hidden scale (image_based)")),
      MONSTER_DOUBLE("mono.relative_shift", mono.relative_shift, S("hidden shift, m (image_based)")),
      MONSTER_DOUBLE("mono.relative_noise", mono.relative_noise,
                     S("smooth multiplicative error amplitude (image_based)")),
      MONSTER_INT("mono.relative_noise_cells", mono.relative_noise_cells,
                  S("error lattice cells across the image (image_based)")),

      MONSTER_STRING("fusion.policies", fusion_policies,
                     S("comma-separated fusion modes to run (confidence|range_gated|hybrid)")),
      MONSTER_STRING("fusion.mono_range", mono_range,
                     S("range gate: auto (right camera psi range) or near,far in m")),
      MONSTER_DOUBLE("fusion.confidence_margin", fusion.confidence_margin,
                     S("mono must beat stereo confidence by this margin")),
      MONSTER_INT("fusion.max_disp", fusion_max_disp,
                  S("stereo search range when fusing, px (the mono camera covers the near field)")),
      MONSTER_ENUM("fusion.mono_out_of_range", fusion_mono_out_of_range, kOor,
                   S("mono output outside its psi range when fusing (a dense map by default)")),
      MONSTER_INT("fusion.mape_bins", mape_bins, S("inverse-depth bins of the MAPE curve")),

      MONSTER_STRING("landscape.axis1", axis1, S("first grid, axis:lo:hi:count in degrees")),
      MONSTER_STRING("landscape.axis2", axis2, S("second grid, axis:lo:hi:count in degrees")),
      MONSTER_INT("landscape.record", record, S("manifest record scanned")),

      MONSTER_INT("drift.window", drift.window, S("rolling-mean window, frames")),
      MONSTER_DOUBLE("drift.alpha", drift.alpha, S("alarm when rolling mean > alpha * baseline")),
      MONSTER_INT("drift.baseline_frames", baseline_frames,
                  S("leading frames whose mean loss is the baseline")),
      MONSTER_INT("drift.inject_at", inject_at, S("first decalibrated frame; -1 disables")),
      MONSTER_STRING("drift.inject", inject, S("decalibration injected from inject_at on")),
  };
}

#undef MONSTER_DOUBLE
#undef MONSTER_INT
#undef MONSTER_STRING
#undef MONSTER_ENUM

void flatten(const YAML::Node& node, const std::string& prefix,
             std::vector<std::pair<std::string, std::string>>& out) {
  if (node.IsMap()) {
    for (const auto& kv : node) {
      const std::string key = kv.first.as<std::string>();
      flatten(kv.second, prefix.empty() ? key : prefix + "." + key, out);
    }
  } else if (node.IsScalar()) {
    out.emplace_back(prefix, node.Scalar());
  } else if (node.IsNull()) {
    throw Error(ErrorCode::ConfigError, "missing value for " + prefix);
  } else {
    throw Error(ErrorCode::ConfigError, "expected a scalar for " + prefix);
  }
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = build_keys();
  return keys;
}

void set_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const ConfigKey& k : config_keys()) {
    if (k.name == key) {
      k.set(cfg, value);
      return;
    }
  }
  throw Error(ErrorCode::ConfigError, "unknown config key: " + key);
}

void load_config_file(RunConfig& cfg, const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::IoError, "cannot read config " + file.string());
  YAML::Node root;
  try {
    root = YAML::Load(in);
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::ConfigError, fmt::format("{}: {}", file.string(), e.what()));
  }
  if (root.IsNull()) return;
  if (!root.IsMap()) throw Error(ErrorCode::ConfigError, "config root must be a mapping");
  std::vector<std::pair<std::string, std::string>> entries;
  flatten(root, "", entries);
  for (const auto& [k, v] : entries) set_key(cfg, k, v);
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(ErrorCode::ConfigError, "override must be key=value: " + assignment);
  }
  set_key(cfg, assignment.substr(0, eq), assignment.substr(eq + 1));
}

std::string dump_config(const RunConfig& cfg) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  std::vector<std::string> open;  // currently open nested maps
  for (const ConfigKey& k : config_keys()) {
    std::vector<std::string> parts;
    std::stringstream ss(k.name);
    std::string p;
    while (std::getline(ss, p, '.')) parts.push_back(p);
    const std::vector<std::string> parents(parts.begin(), parts.end() - 1);
    size_t common = 0;
    while (common < open.size() && common < parents.size() && open[common] == parents[common]) {
      ++common;
    }
    while (open.size() > common) {
      out << YAML::EndMap;
      open.pop_back();
    }
    for (size_t i = common; i < parents.size(); ++i) {
      out << YAML::Key << parents[i] << YAML::Value << YAML::BeginMap;
      open.push_back(parents[i]);
    }
    out << YAML::Key << parts.back() << YAML::Value << k.get(cfg);
  }
  while (!open.empty()) {
    out << YAML::EndMap;
    open.pop_back();
  }
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string describe_keys() {
  const RunConfig defaults;
  std::string s = "Config keys (YAML nesting by '.'; default in brackets):\n";
  for (const ConfigKey& k : config_keys()) {
    s += fmt::format("  {:<34} [{}]\n      {}\n", k.name, k.get(defaults), k.help);
  }
  return s;
}

}  // namespace monster::cli
