#include "monster/geometry.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "monster/parallel.hpp"

namespace monster {

Homography Homography::from_params(const Params& p) {
  return from_params(std::span<const double>(p));
}

Homography Homography::from_params(std::span<const double> p) {
  if (p.size() != 8) throw Error(ErrorCode::InvalidSpec, "homography needs 8 parameters");
  Eigen::Matrix3d m;
  m << p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7], 1.0;
  return Homography(m);
}

Homography Homography::from_matrix(const Eigen::Matrix3d& m) {
  if (std::abs(m(2, 2)) <= 1e-12) {
    throw Error(ErrorCode::SingularHomography, "m(2,2) is zero; cannot normalize");
  }
  return Homography(m / m(2, 2));
}

Homography Homography::translation(double tx, double ty) {
  return from_params(Params{1, 0, tx, 0, 1, ty, 0, 0});
}

Homography::Params Homography::params() const {
  return {m_(0, 0), m_(0, 1), m_(0, 2), m_(1, 0), m_(1, 1), m_(1, 2), m_(2, 0), m_(2, 1)};
}

bool Homography::is_invertible() const { return std::abs(m_.determinant()) > 1e-12; }

Homography Homography::inverse() const {
  if (!is_invertible()) throw Error(ErrorCode::SingularHomography, "determinant is zero");
  return from_matrix(m_.inverse());
}

Point2 Homography::apply(Point2 p) const {
  const double w = m_(2, 0) * p.x + m_(2, 1) * p.y + m_(2, 2);
  if (std::abs(w) <= 1e-12) {
    throw Error(ErrorCode::DegeneratePoint, "point maps to infinity");
  }
  return {(m_(0, 0) * p.x + m_(0, 1) * p.y + m_(0, 2)) / w,
          (m_(1, 0) * p.x + m_(1, 1) * p.y + m_(1, 2)) / w};
}

Homography compose(const Homography& a, const Homography& b) {
  return Homography::from_matrix(a.matrix() * b.matrix());
}

Point2 apply_homography(const Homography& h, Point2 p) { return h.apply(p); }

Intrinsics Intrinsics::centered(int width, int height) {
  const double f = std::max(width, height);
  return {f, f, width / 2.0, height / 2.0};
}

Eigen::Matrix3d Intrinsics::matrix() const {
  Eigen::Matrix3d k;
  k << fx, 0, cx, 0, fy, cy, 0, 0, 1;
  return k;
}

Homography rotation_homography(RotationAxis axis, double angle_rad, const Intrinsics& k) {
  const double c = std::cos(angle_rad);
  const double s = std::sin(angle_rad);
  Eigen::Matrix3d r;
  switch (axis) {
    case RotationAxis::InPlane: r << c, -s, 0, s, c, 0, 0, 0, 1; break;
    case RotationAxis::Pitch: r << 1, 0, 0, 0, c, -s, 0, s, c; break;
    case RotationAxis::Yaw: r << c, 0, s, 0, 1, 0, -s, 0, c; break;
  }
  const Eigen::Matrix3d km = k.matrix();
  return Homography::from_matrix(km * r * km.inverse());
}

namespace {

// Shared inverse-warp kernel over a planar view of samples + validity flags.
struct PlanarView {
  int width;
  int height;
  int channels;
  const double* samples;
  const uint8_t* valid;
};

struct PlanarOut {
  double* samples;
  uint8_t* valid;
};

void warp_planar(const PlanarView& src, PlanarOut dst, const Homography& h, Interpolation interp) {
  const Eigen::Matrix3d inv = h.inverse().matrix();
  const int w = src.width;
  const int hgt = src.height;
  const int ch = src.channels;

  parallel_for(0, hgt, [&](int y) {
    for (int x = 0; x < w; ++x) {
      const size_t o = static_cast<size_t>(y) * w + x;
      double* out = dst.samples + o * ch;
      dst.valid[o] = 0;
      for (int c = 0; c < ch; ++c) out[c] = 0.0;

      const double den = inv(2, 0) * x + inv(2, 1) * y + inv(2, 2);
      if (std::abs(den) <= 1e-12) continue;
      const double sx = (inv(0, 0) * x + inv(0, 1) * y + inv(0, 2)) / den;
      const double sy = (inv(1, 0) * x + inv(1, 1) * y + inv(1, 2)) / den;
      if (!std::isfinite(sx) || !std::isfinite(sy)) continue;

      if (interp == Interpolation::Nearest) {
        const long ix = std::lround(sx);
        const long iy = std::lround(sy);
        if (ix < 0 || iy < 0 || ix >= w || iy >= hgt) continue;
        const size_t si = static_cast<size_t>(iy) * w + ix;
        if (!src.valid[si]) continue;
        for (int c = 0; c < ch; ++c) out[c] = src.samples[si * ch + c];
        dst.valid[o] = 1;
        continue;
      }

      const double fx0 = std::floor(sx);
      const double fy0 = std::floor(sy);
      const double fx = sx - fx0;
      const double fy = sy - fy0;
      const long x0 = static_cast<long>(fx0);
      const long y0 = static_cast<long>(fy0);
      const double wts[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
      const long tx[4] = {x0, x0 + 1, x0, x0 + 1};
      const long ty[4] = {y0, y0, y0 + 1, y0 + 1};

      bool ok = true;
      for (int t = 0; t < 4 && ok; ++t) {
        if (wts[t] == 0.0) continue;
        if (tx[t] < 0 || ty[t] < 0 || tx[t] >= w || ty[t] >= hgt) {
          ok = false;
        } else if (!src.valid[static_cast<size_t>(ty[t]) * w + tx[t]]) {
          ok = false;
        }
      }
      if (!ok) continue;
      for (int t = 0; t < 4; ++t) {
        if (wts[t] == 0.0) continue;
        const size_t si = static_cast<size_t>(ty[t]) * w + tx[t];
        for (int c = 0; c < ch; ++c) out[c] += wts[t] * src.samples[si * ch + c];
      }
      dst.valid[o] = 1;
    }
  });
}

}  // namespace

Image warp_image(const Image& src, const Homography& h, Interpolation interp) {
  Image out(src.width, src.height, src.channels);
  warp_planar({src.width, src.height, src.channels, src.samples.data(), src.valid.data()},
              {out.samples.data(), out.valid.data()}, h, interp);
  return out;
}

template <typename Tag>
MaskedMap<Tag> warp_map(const MaskedMap<Tag>& src, const Homography& h, Interpolation interp) {
  MaskedMap<Tag> out(src.width(), src.height());
  warp_planar({src.width(), src.height(), 1, src.values().data().data(), src.mask().data().data()},
              {out.values().data().data(), out.mask().data().data()}, h, interp);
  return out;
}

template MaskedMap<DepthTag> warp_map(const MaskedMap<DepthTag>&, const Homography&,
                                      Interpolation);
template MaskedMap<DisparityTag> warp_map(const MaskedMap<DisparityTag>&, const Homography&,
                                          Interpolation);

namespace {

std::array<Point2, 4> corners(int width, int height) {
  const double xm = width - 1.0;
  const double ym = height - 1.0;
  return {Point2{0, 0}, Point2{xm, 0}, Point2{0, ym}, Point2{xm, ym}};
}

}  // namespace

double max_corner_distance(const Homography& a, const Homography& b, int width, int height) {
  double worst = 0.0;
  for (const Point2& c : corners(width, height)) {
    const Point2 pa = a.apply(c);
    const Point2 pb = b.apply(c);
    worst = std::max(worst, std::hypot(pa.x - pb.x, pa.y - pb.y));
  }
  return worst;
}

double mean_corner_distance(const Homography& a, const Homography& b, int width, int height) {
  double sum = 0.0;
  for (const Point2& c : corners(width, height)) {
    const Point2 pa = a.apply(c);
    const Point2 pb = b.apply(c);
    sum += std::hypot(pa.x - pb.x, pa.y - pb.y);
  }
  return sum / 4.0;
}

}  // namespace monster
