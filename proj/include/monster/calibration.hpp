#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "monster/defocus.hpp"
#include "monster/geometry.hpp"
#include "monster/image.hpp"
#include "monster/simulator.hpp"
#include "monster/stereo.hpp"

namespace monster {

enum class WarpSide { Left, Right, Both };
enum class LossSpace { Depth, Disparity };
enum class LossKind { L1, RelativeL1 };
enum class OptimizerKind { AdamLike, NelderMead };
/// Camera whose monocular map serves as the reference.
enum class ReferenceCamera { Left, Right };

struct CalibConfig {
  WarpSide side = WarpSide::Left;
  LossSpace loss_space = LossSpace::Disparity;
  LossKind loss_kind = LossKind::L1;
  ReferenceCamera reference = ReferenceCamera::Left;
  int steps = 150;
  double step_size = 0.01;   // on normalized parameters
  double fd_epsilon = 2e-3;  // on normalized parameters
  OptimizerKind optimizer = OptimizerKind::AdamLike;
  int restarts = 1;
  double restart_sigma = 0.01;  // initial perturbation for restarts after the first
  double simplex_size = 0.02;   // initial Nelder-Mead edge
  int patience = 20;            // steps of < 1e-4 relative improvement before stopping
  uint64_t seed = 0;

  void validate() const;
};

// Consistency loss -----------------------------------------------------------

struct LossValue {
  double loss = 0.0;
  size_t n_valid = 0;
};

/// Joint-validity overlap below this fraction of the frame scores +infinity.
inline constexpr double kMinOverlapFraction = 0.01;

/// Mean of |m - s| (L1) or |m - s| / m (relative) over pixels valid in both.
/// Throws DimensionMismatch.
template <typename Tag>
LossValue consistency_loss(const MaskedMap<Tag>& mono, const MaskedMap<Tag>& stereo,
                           LossKind kind);

struct AlignResult {
  DepthMap aligned;
  double scale = 1.0;
  double shift = 0.0;
};

/// Least-squares s, t with s*relative + t ~ reference over jointly valid
/// pixels. Throws InsufficientOverlap (< 10 pixels) or NonInformativeReference
/// (s <= 0 or a degenerate fit).
AlignResult align_scale_shift(const DepthMap& relative, const DepthMap& reference);

// Objective --------------------------------------------------------------------

struct MonoReference {
  DepthMap depth;         // attached to the reference camera's observed image
  bool relative = false;  // true for scale/shift-ambiguous (image-based) maps
};

struct CalibrationProblem {
  Image left;
  Image right;
  MonoReference mono;
  StereoRig rig;
  MatcherConfig matcher;
};

struct WarpPair {
  Homography left;
  Homography right;
};

/// Maps normalized optimizer coordinates to pixel homographies. Coordinates
/// are centered on the image and scaled by half its larger side, so every
/// entry moves corners by a comparable amount; zero is the identity.
class ParamNormalizer {
 public:
  ParamNormalizer(int width, int height);

  Homography to_homography(std::span<const double> u) const;
  std::vector<double> from_homography(const Homography& h) const;

 private:
  Eigen::Matrix3d to_norm_;
  Eigen::Matrix3d from_norm_;
};

struct ObjectiveValue {
  double loss = 0.0;
  size_t n_valid = 0;
  double overlap_fraction = 0.0;
};

/// Warps the configured side(s), matches, and scores the reference-view stereo
/// depth against the reference mono map. A warped reference camera carries its
/// mono map along through the same homography.
class CalibrationObjective {
 public:
  CalibrationObjective(const CalibrationProblem& problem, const CalibConfig& cfg);

  /// 8 parameters per warped side.
  int dimension() const;
  /// Raw homography parameters (row-major, m22 = 1), 8 per warped side.
  WarpPair warps_from_params(std::span<const double> params) const;
  WarpPair warps_from_normalized(std::span<const double> u) const;

  ObjectiveValue evaluate(const WarpPair& warps) const;
  ObjectiveValue evaluate_normalized(std::span<const double> u) const;
  /// Stereo depth of the reference view under the given warps.
  DepthMap stereo_depth(const WarpPair& warps) const;

  const CalibrationProblem& problem() const { return problem_; }
  const ParamNormalizer& normalizer() const { return normalizer_; }

 private:
  const CalibrationProblem& problem_;
  CalibConfig cfg_;
  ParamNormalizer normalizer_;
};

/// Scalar objective at raw parameters (8 per warped side).
double calibration_objective(const CalibrationProblem& problem, std::span<const double> params,
                             const CalibConfig& cfg);

struct CalibResult {
  WarpPair warps;
  Homography homography;  // left warp for Left/Both, right warp for Right
  std::vector<double> loss_trace;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  double valid_overlap_fraction = 0.0;
  bool converged = false;
  int evaluations = 0;
};

/// Minimizes the objective starting from the identity. Never returns a point
/// worse than the identity. Throws InsufficientOverlap when the mono reference
/// covers < 5% of the frame and NoProgress when no evaluation yields a finite
/// loss.
CalibResult calibrate(const CalibrationProblem& problem, const CalibConfig& cfg);

// Landscape ------------------------------------------------------------------

struct AngleGrid {
  RotationAxis axis = RotationAxis::InPlane;
  std::vector<double> angles_rad;
};

/// Parses "axis:lo:hi:count" with angles in degrees. Throws ConfigError.
AngleGrid parse_angle_grid(const std::string& text);

/// Objective over rotation_homography(axis1, a) * rotation_homography(axis2, b)
/// applied to `side` (Left or Right). Result is [axis1 index][axis2 index].
/// Throws InvalidRange when a grid is empty or lacks 0.
std::vector<std::vector<double>> landscape_scan(const CalibrationProblem& problem,
                                                const CalibConfig& cfg, const AngleGrid& axis1,
                                                const AngleGrid& axis2,
                                                WarpSide side = WarpSide::Right);

/// Number of strict local minima under 4-neighborhood.
int count_local_minima(const std::vector<std::vector<double>>& grid);

// Frame selection and drift ---------------------------------------------------

struct FrameScore {
  size_t index = 0;
  double fraction = 0.0;
};

/// Ranks depth maps by the fraction of valid pixels inside the mono range;
/// returns the top k (all when k exceeds the count). Stable on ties.
std::vector<FrameScore> select_calibration_frames(std::span<const DepthMap> depths,
                                                  const DefocusModel& m, const PsiRange& r,
                                                  size_t k);
/// Same over a manifest's ground-truth depths. Throws EmptyManifest.
std::vector<FrameScore> select_calibration_frames(const DatasetManifest& manifest,
                                                  const std::filesystem::path& base_dir,
                                                  const PsiRange& r, size_t k);

struct DriftConfig {
  int window = 3;
  double alpha = 1.5;
};

struct DriftReport {
  std::vector<double> frame_loss;
  std::vector<double> rolling_mean;
  std::optional<size_t> alarm_frame;
};

/// Rolling mean of per-frame losses; alarm at the first frame whose rolling
/// mean exceeds alpha * baseline.
DriftReport drift_from_losses(std::span<const double> losses, double baseline,
                              const DriftConfig& cfg);

struct DepthPair {
  DepthMap mono;
  DepthMap stereo;
};

DriftReport drift_score(std::span<const DepthPair> stream, double baseline, const DriftConfig& cfg,
                        LossKind kind = LossKind::L1);

/// Incremental form of drift_score.
class DriftMonitor {
 public:
  DriftMonitor(double baseline, DriftConfig cfg);

  struct Update {
    double loss;
    double rolling_mean;
    bool alarm;
  };
  Update push(double frame_loss);

 private:
  double baseline_;
  DriftConfig cfg_;
  std::vector<double> recent_;
  size_t next_ = 0;
};

}  // namespace monster
