#pragma once

#include <vector>

#include "monster/geometry.hpp"
#include "monster/image.hpp"

namespace monster {

struct StereoRig {
  double baseline = 0.1;   // meters
  double focal_px = 256.0;
  Intrinsics intrinsics = Intrinsics::centered(256, 256);

  void validate() const;
};

enum class MatchCost { SAD, ZNCC };

struct MatcherConfig {
  int block_radius = 3;
  int max_disp = 32;
  MatchCost cost = MatchCost::SAD;
  double lr_threshold = 1.0;
  double uniqueness_ratio = 1.02;

  void validate() const;
};

/// Matching cost per (pixel, disparity), disparities 0..max_disp inclusive.
/// Stored as one plane per disparity.
class CostVolume {
 public:
  static constexpr double kLarge = 1e9;

  CostVolume() = default;
  CostVolume(int width, int height, int max_disp)
      : width_(width), height_(height), max_disp_(max_disp),
        costs_(static_cast<size_t>(width) * height * (max_disp + 1), kLarge) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int max_disp() const noexcept { return max_disp_; }

  double operator()(int x, int y, int d) const { return costs_[index(x, y, d)]; }
  double& operator()(int x, int y, int d) { return costs_[index(x, y, d)]; }

  const double* plane_row(int d, int y) const { return &costs_[index(0, y, d)]; }
  double* plane_row(int d, int y) { return &costs_[index(0, y, d)]; }

 private:
  size_t index(int x, int y, int d) const noexcept {
    return (static_cast<size_t>(d) * height_ + y) * width_ + x;
  }
  int width_ = 0;
  int height_ = 0;
  int max_disp_ = 0;
  std::vector<double> costs_;
};

/// cost(x,y,d) compares the left window at (x,y) with the right window at
/// (x-d,y). SAD sums absolute differences; ZNCC stores 1 - correlation.
/// Windows leaving the image or touching invalid pixels cost kLarge.
CostVolume compute_cost_volume(const Image& left, const Image& right, const MatcherConfig& cfg);

struct DisparityEstimate {
  DisparityMap disparity;
  ConfidenceMap confidence;
};

/// Winner-take-all for the left view with parabolic subpixel refinement.
DisparityEstimate disparity_wta(const CostVolume& cv, const MatcherConfig& cfg);
/// Winner-take-all for the right view: cost_R(x,d) = cost(x+d,d).
DisparityEstimate disparity_wta_right(const CostVolume& cv, const MatcherConfig& cfg);

/// Vertex of the parabola through (-1,c_minus), (0,c0), (+1,c_plus), as an
/// offset from the center sample. Zero when the parabola is not convex.
double parabola_offset(double c_minus, double c0, double c_plus);

/// Keeps a left pixel iff |dl(x,y) - dr(round(x - dl), y)| <= threshold.
DisparityMap lr_consistency(const DisparityMap& left, const DisparityMap& right, double threshold);
/// Mirror check for the right view: lookup at round(x + dr).
DisparityMap lr_consistency_right(const DisparityMap& right, const DisparityMap& left,
                                  double threshold);

inline constexpr double kMinValidDisparity = 0.25;

/// z = f B / d; disparities <= min_valid are invalidated.
DepthMap disparity_to_depth(const DisparityMap& d, const StereoRig& rig,
                            double min_valid = kMinValidDisparity);
/// d = f B / z. Throws NonPositiveDepth on a valid depth <= 0.
DisparityMap depth_to_disparity(const DepthMap& z, const StereoRig& rig);

struct StereoViews {
  DepthMap left_depth;
  ConfidenceMap left_confidence;
  DepthMap right_depth;
  ConfidenceMap right_confidence;
};

/// Cost volume, WTA in both directions, LR check, then depth, for both views.
StereoViews match_stereo_views(const Image& left, const Image& right, const StereoRig& rig,
                               const MatcherConfig& cfg);

struct StereoDepth {
  DepthMap depth;
  ConfidenceMap confidence;
};

/// Left-view depth of a rectified pair.
StereoDepth match_stereo(const Image& left, const Image& right, const StereoRig& rig,
                         const MatcherConfig& cfg);

}  // namespace monster
