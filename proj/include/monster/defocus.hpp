#pragma once

#include <cstdint>
#include <utility>

#include "monster/image.hpp"

namespace monster {

/// Thin-lens camera with a phase-coded aperture. All lengths in meters.
struct DefocusModel {
  double pupil_radius = 1.14e-3;
  double wavelength = 0.0;
  double focal_length = 0.016;
  double focus_distance = 1.5;

  /// Chooses the wavelength so that pi R^2 / lambda == coefficient.
  static DefocusModel with_coefficient(double coefficient, double focus_distance,
                                       double focal_length = 0.016,
                                       double pupil_radius = 1.14e-3);

  /// C = pi R^2 / lambda.
  double coefficient() const;
  /// Throws InvalidSpec unless R, lambda, f > 0 and z_n > f.
  void validate() const;
};

inline constexpr double kDefaultDefocusCoefficient = 9.0;

struct PsiRange {
  double psi_min = -4.0;
  double psi_max = 10.0;

  double mid() const { return 0.5 * (psi_min + psi_max); }
  double half_span() const { return 0.5 * (psi_max - psi_min); }
};

/// psi = C (1/z_o - 1/z_n). Positive in front of the focus plane.
double psi_from_depth(const DefocusModel& m, double depth);
/// Inverse of psi_from_depth. Throws PsiOutOfPhysicalRange when psi <= -C/z_n.
double depth_from_psi(const DefocusModel& m, double psi);

struct DepthRange {
  double z_near = 0.0;
  double z_far = 0.0;

  bool contains(double z) const { return z >= z_near && z <= z_far; }
};

/// Depth interval spanned by the psi range: (depth(psi_max), depth(psi_min)).
DepthRange valid_depth_range(const DefocusModel& m, const PsiRange& r);

/// 1/f = 1/z + 1/z_i solved for z_i. Throws ObjectInsideFocalLength when z <= f.
double thin_lens_image_distance(const DefocusModel& m, double depth);

/// Snaps psi to the nearest of `levels` evenly spaced values over the range.
/// Exact midpoints go to the lower level.
double psi_quantize(double psi, int levels, const PsiRange& r = {});

enum class MonoMode { PhaseCoded, ImageBased };

/// What the phase-coded engine reports for pixels whose psi is outside the range.
enum class OutOfRangePolicy {
  Invalidate,  // no output, confidence 0
  Saturate,    // depth at the nearest range end, confidence 0
};

struct MonoSimSpec {
  MonoMode mode = MonoMode::PhaseCoded;
  double noise_sigma_psi = 0.0;
  OutOfRangePolicy out_of_range = OutOfRangePolicy::Invalidate;
  // image-based mode; consumers must not read these
  double relative_scale = 1.0;
  double relative_shift = 0.0;
  double relative_noise = 0.05;  // amplitude of the smooth multiplicative error
  int relative_noise_cells = 4;  // lattice cells across the image for that error
  uint64_t rng_seed = 0;

  void validate() const;
};

struct MonoEstimate {
  DepthMap depth;
  ConfidenceMap confidence;
};

/// Emulates a monocular depth engine from ground truth. Deterministic in
/// rng_seed and independent of thread count.
MonoEstimate simulate_mono_depth(const DepthMap& gt, const DefocusModel& m, const PsiRange& r,
                                 const MonoSimSpec& spec);

/// Triangular confidence in psi: 1 at the range midpoint, floored at 0.05.
double psi_confidence(double psi, const PsiRange& r);

}  // namespace monster
