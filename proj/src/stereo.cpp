#include "monster/stereo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "monster/parallel.hpp"

namespace monster {

void StereoRig::validate() const {
  if (!(baseline > 0.0)) throw Error(ErrorCode::InvalidSpec, "baseline must be > 0");
  if (!(focal_px > 0.0)) throw Error(ErrorCode::InvalidSpec, "focal_px must be > 0");
}

void MatcherConfig::validate() const {
  if (block_radius < 1) throw Error(ErrorCode::InvalidSpec, "block_radius must be >= 1");
  if (max_disp < 1) throw Error(ErrorCode::InvalidSpec, "max_disp must be >= 1");
  if (!(lr_threshold >= 0.0)) throw Error(ErrorCode::InvalidSpec, "lr_threshold must be >= 0");
  if (!(uniqueness_ratio >= 1.0)) {
    throw Error(ErrorCode::InvalidSpec, "uniqueness_ratio must be >= 1");
  }
}

namespace {

// Streaming (2r+1)^2 window sums: rows are pushed top to bottom and each push
// from row 2r on yields the sums of the window centered r rows above.
// Entries exist for x in [r, w-r).
template <typename T>
class WindowSums {
 public:
  WindowSums(int w, int r)
      : w_(w), r_(r), k_(2 * r + 1), ring_(static_cast<size_t>(k_) * w), col_(w), h_(w) {}

  void reset() { std::fill(col_.begin(), col_.end(), T{}); }

  const T* push(int y, const T* v) {
    if (w_ < k_) return nullptr;
    T acc{};
    for (int i = 0; i < k_; ++i) acc += v[i];
    h_[r_] = acc;
    for (int x = r_ + 1; x < w_ - r_; ++x) {
      acc += v[x + r_] - v[x - r_ - 1];
      h_[x] = acc;
    }
    T* slot = &ring_[static_cast<size_t>(y % k_) * w_];
    if (y >= k_) {
      for (int x = r_; x < w_ - r_; ++x) col_[x] += h_[x] - slot[x];
    } else {
      for (int x = r_; x < w_ - r_; ++x) col_[x] += h_[x];
    }
    std::copy(h_.begin() + r_, h_.begin() + (w_ - r_), slot + r_);
    return y >= k_ - 1 ? col_.data() : nullptr;
  }

 private:
  int w_, r_, k_;
  std::vector<T> ring_;
  std::vector<T> col_;
  std::vector<T> h_;
};

}  // namespace

CostVolume compute_cost_volume(const Image& left_in, const Image& right_in,
                               const MatcherConfig& cfg) {
  cfg.validate();
  if (left_in.width != right_in.width || left_in.height != right_in.height) {
    throw Error(ErrorCode::DimensionMismatch, "stereo images differ in size");
  }
  const int w = left_in.width;
  const int h = left_in.height;
  const int r = cfg.block_radius;
  const int dmax = cfg.max_disp;
  const double n = static_cast<double>((2 * r + 1) * (2 * r + 1));
  CostVolume cv(w, h, dmax);
  if (w < 2 * r + 1 || h < 2 * r + 1) return cv;

  const std::vector<double> left = to_gray(left_in).samples;
  const std::vector<double> right = to_gray(right_in).samples;
  const std::vector<uint8_t>& lv = left_in.valid;
  const std::vector<uint8_t>& rv = right_in.valid;
  const bool any_invalid = std::find(lv.begin(), lv.end(), 0) != lv.end() ||
                           std::find(rv.begin(), rv.end(), 0) != rv.end();
  const bool sad = cfg.cost == MatchCost::SAD;

  // Left window statistics do not depend on d.
  std::vector<double> left_sum, left_sq;
  if (!sad) {
    left_sum.assign(static_cast<size_t>(w) * h, 0.0);
    left_sq.assign(static_cast<size_t>(w) * h, 0.0);
    WindowSums<double> s1(w, r), s2(w, r);
    std::vector<double> sq(w);
    for (int y = 0; y < h; ++y) {
      const double* row = &left[static_cast<size_t>(y) * w];
      for (int x = 0; x < w; ++x) sq[x] = row[x] * row[x];
      const double* a = s1.push(y, row);
      const double* b = s2.push(y, sq.data());
      if (!a) continue;
      const size_t base = static_cast<size_t>(y - r) * w;
      std::copy(a + r, a + (w - r), left_sum.begin() + base + r);
      std::copy(b + r, b + (w - r), left_sq.begin() + base + r);
    }
  }

  parallel_chunks(0, dmax + 1, [&](int, int lo, int hi) {
    WindowSums<double> diff(w, r), rq(w, r), cross(w, r);
    WindowSums<int> bad(w, r);
    std::vector<double> a(w), b(w), c(w);
    std::vector<int> flags(w);
    for (int d = lo; d < hi; ++d) {
      diff.reset();
      rq.reset();
      cross.reset();
      bad.reset();
      for (int y = 0; y < h; ++y) {
        const size_t base = static_cast<size_t>(y) * w;
        const double* l = &left[base];
        const double* rr = &right[base];
        // Columns x < d have no partner; windows touching them are skipped
        // below, so their values are irrelevant.
        for (int x = 0; x < d && x < w; ++x) a[x] = b[x] = c[x] = 0.0, flags[x] = 0;
        if (sad) {
          for (int x = d; x < w; ++x) a[x] = std::abs(l[x] - rr[x - d]);
        } else {
          for (int x = d; x < w; ++x) {
            const double v = rr[x - d];
            a[x] = v;
            b[x] = v * v;
            c[x] = l[x] * v;
          }
        }
        if (any_invalid) {
          for (int x = d; x < w; ++x) flags[x] = (lv[base + x] == 0) + (rv[base + x - d] == 0);
        }
        const double* sa = diff.push(y, a.data());
        const double* sb = sad ? nullptr : rq.push(y, b.data());
        const double* sc = sad ? nullptr : cross.push(y, c.data());
        const double* sr = sad ? nullptr : sa;
        const int* sf = any_invalid ? bad.push(y, flags.data()) : nullptr;
        if (!sa) continue;
        const int yc = y - r;
        double* out = cv.plane_row(d, yc);
        const size_t cbase = static_cast<size_t>(yc) * w;
        for (int x = r + d; x < w - r; ++x) {
          if (sf && sf[x] > 0) continue;
          if (sad) {
            out[x] = std::max(0.0, sa[x]);
            continue;
          }
          const double sl = left_sum[cbase + x];
          const double vl = left_sq[cbase + x] - sl * sl / n;
          const double vr = sb[x] - sr[x] * sr[x] / n;
          const double cov = sc[x] - sl * sr[x] / n;
          if (vl <= 1e-12 * n || vr <= 1e-12 * n) {
            out[x] = 1.0;
          } else {
            out[x] = std::clamp(1.0 - cov / std::sqrt(vl * vr), 0.0, 2.0);
          }
        }
      }
    }
  });
  return cv;
}

double parabola_offset(double c_minus, double c0, double c_plus) {
  const double denom = c_minus - 2.0 * c0 + c_plus;
  if (!(denom > 0.0)) return 0.0;
  return std::clamp((c_minus - c_plus) / (2.0 * denom), -0.5, 0.5);
}

namespace {

// Shared WTA kernel. `row(d, y)` points at the costs of disparity d for
// x = 0..limit(d)-1 of the view being solved; x beyond the limit costs kLarge.
template <typename Row, typename Limit>
DisparityEstimate wta(int w, int h, int dmax, const MatcherConfig& cfg, Row&& row, Limit&& limit) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  DisparityEstimate out{DisparityMap(w, h, 0.0, false), ConfidenceMap(w, h, 0.0)};
  auto fetch = [&](int d, int y, int x) { return x < limit(d) ? row(d, y)[x] : CostVolume::kLarge; };
  parallel_chunks(0, h, [&](int, int lo, int hi) {
    std::vector<double> best(w), second(w);
    std::vector<int> best_d(w);
    for (int y = lo; y < hi; ++y) {
      std::fill(best.begin(), best.end(), kInf);
      std::fill(second.begin(), second.end(), kInf);
      std::fill(best_d.begin(), best_d.end(), 0);
      for (int d = 0; d <= dmax; ++d) {
        const double* c = row(d, y);
        const int n = limit(d);
        for (int x = 0; x < n; ++x) {
          if (c[x] < best[x]) {
            best[x] = c[x];
            best_d[x] = d;
          }
        }
        for (int x = n; x < w; ++x) {
          if (CostVolume::kLarge < best[x]) {
            best[x] = CostVolume::kLarge;
            best_d[x] = d;
          }
        }
      }
      for (int d = 0; d <= dmax; ++d) {
        const double* c = row(d, y);
        const int n = limit(d);
        for (int x = 0; x < w; ++x) {
          if (std::abs(d - best_d[x]) < 2) continue;
          second[x] = std::min(second[x], x < n ? c[x] : CostVolume::kLarge);
        }
      }
      for (int x = 0; x < w; ++x) {
        const double c0 = best[x];
        if (!(c0 < CostVolume::kLarge)) continue;
        const double c2 = second[x];
        if (c2 != kInf && !(c2 > c0 && c2 >= cfg.uniqueness_ratio * c0)) continue;
        const int d = best_d[x];
        double disp = d;
        if (d > 0 && d < dmax) {
          const double cm = fetch(d - 1, y, x);
          const double cp = fetch(d + 1, y, x);
          if (cm < CostVolume::kLarge && cp < CostVolume::kLarge) {
            disp += parabola_offset(cm, c0, cp);
          }
        }
        out.disparity.set(x, y, disp);
        out.confidence(x, y) = c2 == kInf ? 1.0 : std::clamp(1.0 - c0 / c2, 0.0, 1.0);
      }
    }
  });
  return out;
}

}  // namespace

DisparityEstimate disparity_wta(const CostVolume& cv, const MatcherConfig& cfg) {
  const int w = cv.width();
  return wta(
      w, cv.height(), cv.max_disp(), cfg, [&](int d, int y) { return cv.plane_row(d, y); },
      [w](int) { return w; });
}

DisparityEstimate disparity_wta_right(const CostVolume& cv, const MatcherConfig& cfg) {
  const int w = cv.width();
  return wta(
      w, cv.height(), cv.max_disp(), cfg, [&](int d, int y) { return cv.plane_row(d, y) + d; },
      [w](int d) { return std::max(0, w - d); });
}

namespace {

DisparityMap lr_check(const DisparityMap& primary, const DisparityMap& other, double threshold,
                      double direction) {
  require_same_shape(primary, other, "lr_consistency: maps differ in size");
  const int w = primary.width();
  const int h = primary.height();
  DisparityMap out = primary;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!primary.valid(x, y)) continue;
      const double d = primary.value(x, y);
      const long xo = std::lround(x + direction * d);
      if (xo < 0 || xo >= w || !other.valid(static_cast<int>(xo), y) ||
          std::abs(d - other.value(static_cast<int>(xo), y)) > threshold) {
        out.invalidate(x, y);
      }
    }
  }
  return out;
}

}  // namespace

DisparityMap lr_consistency(const DisparityMap& left, const DisparityMap& right, double threshold) {
  return lr_check(left, right, threshold, -1.0);
}

DisparityMap lr_consistency_right(const DisparityMap& right, const DisparityMap& left,
                                  double threshold) {
  return lr_check(right, left, threshold, +1.0);
}

DepthMap disparity_to_depth(const DisparityMap& d, const StereoRig& rig, double min_valid) {
  const double fb = rig.focal_px * rig.baseline;
  DepthMap z(d.width(), d.height(), 0.0, false);
  for (int y = 0; y < d.height(); ++y) {
    for (int x = 0; x < d.width(); ++x) {
      if (d.valid(x, y) && d.value(x, y) > min_valid) z.set(x, y, fb / d.value(x, y));
    }
  }
  return z;
}

DisparityMap depth_to_disparity(const DepthMap& z, const StereoRig& rig) {
  const double fb = rig.focal_px * rig.baseline;
  DisparityMap d(z.width(), z.height(), 0.0, false);
  for (int y = 0; y < z.height(); ++y) {
    for (int x = 0; x < z.width(); ++x) {
      if (!z.valid(x, y)) continue;
      if (!(z.value(x, y) > 0.0)) throw Error(ErrorCode::NonPositiveDepth, "depth_to_disparity");
      d.set(x, y, fb / z.value(x, y));
    }
  }
  return d;
}

StereoViews match_stereo_views(const Image& left, const Image& right, const StereoRig& rig,
                               const MatcherConfig& cfg) {
  rig.validate();
  const CostVolume cv = compute_cost_volume(left, right, cfg);
  DisparityEstimate l = disparity_wta(cv, cfg);
  DisparityEstimate r = disparity_wta_right(cv, cfg);
  const DisparityMap l_checked = lr_consistency(l.disparity, r.disparity, cfg.lr_threshold);
  const DisparityMap r_checked = lr_consistency_right(r.disparity, l.disparity, cfg.lr_threshold);
  StereoViews out{disparity_to_depth(l_checked, rig), std::move(l.confidence),
                  disparity_to_depth(r_checked, rig), std::move(r.confidence)};
  for (int y = 0; y < out.left_depth.height(); ++y) {
    for (int x = 0; x < out.left_depth.width(); ++x) {
      if (!out.left_depth.valid(x, y)) out.left_confidence(x, y) = 0.0;
      if (!out.right_depth.valid(x, y)) out.right_confidence(x, y) = 0.0;
    }
  }
  return out;
}

StereoDepth match_stereo(const Image& left, const Image& right, const StereoRig& rig,
                         const MatcherConfig& cfg) {
  StereoViews v = match_stereo_views(left, right, rig, cfg);
  return {std::move(v.left_depth), std::move(v.left_confidence)};
}

}  // namespace monster
