#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "monster/defocus.hpp"
#include "monster/geometry.hpp"
#include "monster/image.hpp"
#include "monster/stereo.hpp"

namespace monster {

// Scene primitives, all depths in meters and extents in pixels.

/// Plane whose inverse depth is affine in pixel coordinates, through the given
/// depths at (0,0), (width-1,0) and (0,height-1) of its bounding rectangle.
struct PlanePrimitive {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // inclusive rectangle
  double z_top_left = 1.0;
  double z_top_right = 1.0;
  double z_bottom_left = 1.0;
};

struct SpherePrimitive {
  double cx = 0.0, cy = 0.0;  // center, pixels
  double radius_px = 1.0;
  double z_center = 1.0;  // depth of the sphere center
  double radius_m = 0.1;  // front surface sits at z_center - radius_m
};

using Primitive = std::variant<PlanePrimitive, SpherePrimitive>;

struct TextureSpec {
  int octaves = 5;
  double base_period = 32.0;  // pixels, coarsest octave
  double persistence = 0.6;   // amplitude ratio between octaves
  int checker_period = 0;     // 0 disables the checker overlay
  double checker_amplitude = 0.1;
};

struct SceneSpec {
  int width = 256;
  int height = 256;
  /// The first primitive must cover the frame (background).
  std::vector<Primitive> layout;
  double depth_min = 0.35;
  double depth_max = 6.0;
  TextureSpec texture;
  uint64_t rng_seed = 0;

  void validate() const;
};

/// A full-frame fronto-parallel background plane.
PlanePrimitive background_plane(int width, int height, double z);
PlanePrimitive rectangle(int x0, int y0, int x1, int y1, double z);

struct Scene {
  DepthMap depth;
  Image texture;
};

/// Z-buffered depth from the layout plus a multi-octave value-noise texture.
Scene generate_scene(const SceneSpec& spec);

/// Procedural layout: slanted background plus rectangles, slanted patches and
/// spheres spread over [depth_min, depth_max]. Deterministic in seed.
SceneSpec random_scene_spec(const SceneSpec& base, uint64_t seed);

struct StereoPair {
  Image left;
  Image right;
  DepthMap right_depth;  // ground truth in the right view, holes invalid
};

/// Forward-maps each left pixel to x - fB/z along its row with z-buffering.
/// Right pixels not reached by any surface are invalid.
StereoPair render_stereo_pair(const Image& texture, const DepthMap& depth, const StereoRig& rig);

/// Adds N(0, sigma^2) to every sample and clamps to [0,1].
Image add_image_noise(const Image& img, double sigma, uint64_t seed);

RotationAxis parse_axis(const std::string& name);

Image decalibrate(const Image& img, const Homography& h);

// Dataset -------------------------------------------------------------------

enum class DecalKind { None, Fixed, UniformInPlane };

/// Where decalibrations come from: none, one fixed homography, or an in-plane
/// rotation drawn uniformly from [-max_angle, +max_angle] per record.
struct DecalDistribution {
  DecalKind kind = DecalKind::None;
  Homography fixed;
  double max_angle_rad = 0.0;
};

/// Parses "inplane:7deg", "pitch:2deg", "yaw:-1.5deg", "inplane:uniform:7deg"
/// or "params:a,b,c,d,e,f,g,h". Angles may be given in deg or rad.
/// Throws ConfigError on malformed input.
DecalDistribution parse_decalibration(const std::string& text, const Intrinsics& k);

struct ManifestRecord {
  int id = 0;
  std::string left_path;   // relative to the manifest directory
  std::string right_path;
  std::string gt_depth_path;
  std::string right_gt_depth_path;
  std::string left_mask_path;
  std::string right_mask_path;
  uint64_t seed = 0;
  StereoRig rig;
  DefocusModel defocus_left;
  DefocusModel defocus_right;
  std::optional<Homography::Params> decalibration;
};

struct DatasetManifest {
  int version = 1;
  int width = 0;
  int height = 0;
  std::vector<ManifestRecord> records;
};

struct DatasetOptions {
  int count = 1;
  SceneSpec scene_template;
  StereoRig rig;
  DefocusModel defocus_left;
  DefocusModel defocus_right;
  DecalDistribution decalibration;
  double image_noise_sigma = 0.0;
  /// 0: independent scenes. Otherwise the records are consecutive frames of
  /// one wide scene, the window moving right by pan_px per frame.
  int pan_px = 0;
  uint64_t seed = 0;
};

/// Writes PNG images, PFM depths and manifest.yaml under `dir`.
DatasetManifest build_dataset(const DatasetOptions& opts, const std::filesystem::path& dir);

void write_manifest(const DatasetManifest& m, const std::filesystem::path& file);
/// Throws IoError when missing/unparsable, InvalidSpec when records disagree on the rig.
DatasetManifest read_manifest(const std::filesystem::path& file);

struct LoadedRecord {
  Image left;
  Image right;
  DepthMap gt_depth;
  DepthMap right_gt_depth;
};

LoadedRecord load_record(const ManifestRecord& r, const std::filesystem::path& base_dir);

}  // namespace monster
