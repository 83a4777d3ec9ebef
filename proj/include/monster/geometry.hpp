#pragma once

#include <array>
#include <span>

#include <Eigen/Core>

#include "monster/image.hpp"

namespace monster {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Planar projective transform with the lower-right entry pinned to 1.
/// The 8 free parameters are the remaining matrix entries in row-major order.
class Homography {
 public:
  using Params = std::array<double, 8>;

  Homography() : m_(Eigen::Matrix3d::Identity()) {}

  static Homography identity() { return {}; }
  static Homography from_params(const Params& p);
  static Homography from_params(std::span<const double> p);
  /// Renormalizes so m(2,2) == 1. Throws SingularHomography when m(2,2) ~ 0.
  static Homography from_matrix(const Eigen::Matrix3d& m);
  static Homography translation(double tx, double ty);

  Params params() const;
  const Eigen::Matrix3d& matrix() const noexcept { return m_; }
  double operator()(int r, int c) const { return m_(r, c); }

  /// Throws SingularHomography when |det| <= 1e-12.
  Homography inverse() const;
  /// Throws DegeneratePoint when the homogeneous denominator vanishes.
  Point2 apply(Point2 p) const;

  bool is_invertible() const;

 private:
  explicit Homography(const Eigen::Matrix3d& m) : m_(m) {}
  Eigen::Matrix3d m_;
};

/// compose(a, b) maps x to a(b(x)).
Homography compose(const Homography& a, const Homography& b);

Point2 apply_homography(const Homography& h, Point2 p);

struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  /// f = max(width, height), principal point at (width/2, height/2).
  static Intrinsics centered(int width, int height);
  Eigen::Matrix3d matrix() const;
};

enum class RotationAxis { InPlane, Pitch, Yaw };

/// K * R * K^-1 for a camera rotation about z (in-plane), x (pitch) or y (yaw).
Homography rotation_homography(RotationAxis axis, double angle_rad, const Intrinsics& k);

enum class Interpolation { Bilinear, Nearest };

/// Inverse warp: out(p) = src(h^-1 p). Pixels whose source location leaves the
/// image or touches an invalid source sample are marked invalid (never clamped).
Image warp_image(const Image& src, const Homography& h,
                 Interpolation interp = Interpolation::Bilinear);

template <typename Tag>
MaskedMap<Tag> warp_map(const MaskedMap<Tag>& src, const Homography& h,
                        Interpolation interp = Interpolation::Bilinear);

/// Largest displacement between a(c) and b(c) over the four image corners.
double max_corner_distance(const Homography& a, const Homography& b, int width, int height);
double mean_corner_distance(const Homography& a, const Homography& b, int width, int height);

}  // namespace monster
