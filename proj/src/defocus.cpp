#include "monster/defocus.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "monster/parallel.hpp"
#include "monster/random.hpp"

namespace monster {

DefocusModel DefocusModel::with_coefficient(double coefficient, double focus_distance,
                                            double focal_length, double pupil_radius) {
  if (coefficient <= 0.0) throw Error(ErrorCode::InvalidSpec, "defocus coefficient must be > 0");
  DefocusModel m;
  m.pupil_radius = pupil_radius;
  m.wavelength = std::numbers::pi * pupil_radius * pupil_radius / coefficient;
  m.focal_length = focal_length;
  m.focus_distance = focus_distance;
  m.validate();
  return m;
}

double DefocusModel::coefficient() const {
  return std::numbers::pi * pupil_radius * pupil_radius / wavelength;
}

void DefocusModel::validate() const {
  if (!(pupil_radius > 0.0) || !(wavelength > 0.0) || !(focal_length > 0.0)) {
    throw Error(ErrorCode::InvalidSpec, "pupil radius, wavelength and focal length must be > 0");
  }
  if (!(focus_distance > focal_length)) {
    throw Error(ErrorCode::InvalidSpec, "focus distance must exceed the focal length");
  }
}

double psi_from_depth(const DefocusModel& m, double depth) {
  if (!(depth > 0.0)) throw Error(ErrorCode::NonPositiveDepth, "psi_from_depth");
  if (depth == m.focus_distance) return 0.0;
  return m.coefficient() * (1.0 / depth - 1.0 / m.focus_distance);
}

double depth_from_psi(const DefocusModel& m, double psi) {
  const double c = m.coefficient();
  const double inv = psi / c + 1.0 / m.focus_distance;
  if (!(inv > 0.0)) {
    throw Error(ErrorCode::PsiOutOfPhysicalRange, "psi implies a depth beyond infinity");
  }
  if (psi == 0.0) return m.focus_distance;
  return 1.0 / inv;
}

DepthRange valid_depth_range(const DefocusModel& m, const PsiRange& r) {
  if (!(r.psi_min < r.psi_max)) throw Error(ErrorCode::InvalidRange, "psi_min must be < psi_max");
  return {depth_from_psi(m, r.psi_max), depth_from_psi(m, r.psi_min)};
}

double thin_lens_image_distance(const DefocusModel& m, double depth) {
  if (!(depth > m.focal_length)) {
    throw Error(ErrorCode::ObjectInsideFocalLength, "object must lie beyond the focal length");
  }
  return 1.0 / (1.0 / m.focal_length - 1.0 / depth);
}

double psi_quantize(double psi, int levels, const PsiRange& r) {
  if (levels < 2) throw Error(ErrorCode::InvalidSpec, "psi_quantize needs at least 2 levels");
  const double step = (r.psi_max - r.psi_min) / (levels - 1);
  const double t = (psi - r.psi_min) / step;
  double k = std::floor(t);
  if (t - k > 0.5) k += 1.0;
  k = std::clamp(k, 0.0, static_cast<double>(levels - 1));
  return r.psi_min + k * step;
}

double psi_confidence(double psi, const PsiRange& r) {
  const double c = 1.0 - std::abs(psi - r.mid()) / r.half_span();
  return std::max(c, 0.05);
}

void MonoSimSpec::validate() const {
  if (!(noise_sigma_psi >= 0.0)) throw Error(ErrorCode::InvalidSpec, "noise_sigma_psi < 0");
  if (!(relative_scale > 0.0)) throw Error(ErrorCode::InvalidSpec, "relative_scale <= 0");
  if (!(relative_noise >= 0.0)) throw Error(ErrorCode::InvalidSpec, "relative_noise < 0");
  if (relative_noise_cells < 1) throw Error(ErrorCode::InvalidSpec, "relative_noise_cells < 1");
}

namespace {

// Smooth field in [-1,1]: random lattice values, bilinearly upsampled.
double lattice_noise(uint64_t seed, int cells, int width, int height, int x, int y) {
  const double gx = (x + 0.5) / width * cells;
  const double gy = (y + 0.5) / height * cells;
  const int ix = std::min(static_cast<int>(gx), cells - 1);
  const int iy = std::min(static_cast<int>(gy), cells - 1);
  const double fx = gx - ix;
  const double fy = gy - iy;
  auto node = [&](int i, int j) {
    return 2.0 * counter_uniform(seed, static_cast<uint64_t>(j) * (cells + 2) + i) - 1.0;
  };
  const double top = (1 - fx) * node(ix, iy) + fx * node(ix + 1, iy);
  const double bot = (1 - fx) * node(ix, iy + 1) + fx * node(ix + 1, iy + 1);
  return (1 - fy) * top + fy * bot;
}

}  // namespace

MonoEstimate simulate_mono_depth(const DepthMap& gt, const DefocusModel& m, const PsiRange& r,
                                 const MonoSimSpec& spec) {
  spec.validate();
  m.validate();
  if (!(r.psi_min < r.psi_max)) throw Error(ErrorCode::InvalidRange, "psi_min must be < psi_max");

  const int w = gt.width();
  const int h = gt.height();
  MonoEstimate out{DepthMap(w, h, 0.0, false), ConfidenceMap(w, h, 0.0)};

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (gt.valid(x, y) && !(gt.value(x, y) > 0.0)) {
        throw Error(ErrorCode::NonPositiveDepth, "ground truth depth must be > 0");
      }
    }
  }

  const uint64_t noise_seed = derive_seed(spec.rng_seed, "mono.noise");
  if (spec.mode == MonoMode::PhaseCoded) {
    parallel_for(0, h, [&](int y) {
      for (int x = 0; x < w; ++x) {
        if (!gt.valid(x, y)) continue;
        const double psi = psi_from_depth(m, gt.value(x, y));
        if (psi < r.psi_min || psi > r.psi_max) {
          if (spec.out_of_range == OutOfRangePolicy::Saturate) {
            out.depth.set(x, y, depth_from_psi(m, std::clamp(psi, r.psi_min, r.psi_max)));
          }
          continue;
        }
        double noisy = psi;
        if (spec.noise_sigma_psi > 0.0) {
          const uint64_t counter = static_cast<uint64_t>(y) * w + x;
          noisy += spec.noise_sigma_psi * counter_normal(noise_seed, counter);
        }
        if (noisy / m.coefficient() + 1.0 / m.focus_distance <= 0.0) continue;
        out.depth.set(x, y, spec.noise_sigma_psi > 0.0 ? depth_from_psi(m, noisy) : gt.value(x, y));
        out.confidence(x, y) = psi_confidence(psi, r);
      }
    });
  } else {
    parallel_for(0, h, [&](int y) {
      for (int x = 0; x < w; ++x) {
        if (!gt.valid(x, y)) continue;
        double v = spec.relative_scale * gt.value(x, y) + spec.relative_shift;
        if (spec.relative_noise > 0.0) {
          v *= 1.0 + spec.relative_noise *
                         lattice_noise(noise_seed, spec.relative_noise_cells, w, h, x, y);
        }
        out.depth.set(x, y, v);
        out.confidence(x, y) = 0.5;
      }
    });
  }
  return out;
}

}  // namespace monster
