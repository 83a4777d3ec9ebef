#include "monster/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

namespace monster {

void FusionPolicy::validate() const {
  if (!(confidence_margin >= 0.0)) {
    throw Error(ErrorCode::InvalidSpec, "confidence_margin must be >= 0");
  }
  if (mode != FusionMode::Confidence && !(mono_range.z_near < mono_range.z_far)) {
    throw Error(ErrorCode::InvalidRange, "mono_range needs z_near < z_far");
  }
}

FusionResult fuse(SourceMaps stereo, SourceMaps mono, const FusionPolicy& policy) {
  policy.validate();
  const int w = stereo.depth.width();
  const int h = stereo.depth.height();
  require_same_shape(stereo.depth, mono.depth, "fuse: depth maps differ in size");
  require_same_shape(stereo.depth, stereo.confidence, "fuse: stereo confidence differs in size");
  require_same_shape(stereo.depth, mono.confidence, "fuse: mono confidence differs in size");

  FusionResult out{DepthMap(w, h, 0.0, false),
                   Grid<uint8_t>(w, h, static_cast<uint8_t>(Source::Invalid))};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const bool sv = stereo.depth.valid(x, y);
      const bool mv = mono.depth.valid(x, y);
      if (!sv && !mv) continue;
      bool take_mono;
      if (sv != mv) {
        take_mono = mv;
      } else {
        const double zm = mono.depth.value(x, y);
        const bool confident =
            mono.confidence(x, y) > stereo.confidence(x, y) + policy.confidence_margin;
        const bool gated = zm >= policy.mono_range.z_near && zm <= policy.mono_range.z_far;
        switch (policy.mode) {
          case FusionMode::Confidence: take_mono = confident; break;
          case FusionMode::RangeGated: take_mono = gated; break;
          case FusionMode::Hybrid: take_mono = gated && confident; break;
          default: take_mono = false;
        }
      }
      const DepthMap& src = take_mono ? mono.depth : stereo.depth;
      out.depth.set(x, y, src.value(x, y));
      out.source_mask(x, y) = static_cast<uint8_t>(take_mono ? Source::Mono : Source::Stereo);
    }
  }
  return out;
}

namespace {

void check_bins(const std::vector<DepthBin>& bins) {
  for (size_t i = 0; i < bins.size(); ++i) {
    if (!(bins[i].lo < bins[i].hi)) throw Error(ErrorCode::InvalidRange, "empty depth bin");
    for (size_t j = 0; j < i; ++j) {
      if (bins[i].lo < bins[j].hi && bins[j].lo < bins[i].hi) {
        throw Error(ErrorCode::InvalidRange, "depth bins overlap");
      }
    }
  }
}

}  // namespace

EvalAccumulator::EvalAccumulator(std::vector<DepthBin> bins)
    : bins_(std::move(bins)), bin_rel_(bins_.size(), 0.0), bin_n_(bins_.size(), 0) {
  check_bins(bins_);
}

void EvalAccumulator::add(const DepthMap& pred, const DepthMap& gt) {
  require_same_shape(pred, gt, "evaluate: maps differ in size");
  const auto& pv = pred.values().data();
  const auto& gv = gt.values().data();
  const auto& pm = pred.mask().data();
  const auto& gm = gt.mask().data();
  for (size_t i = 0; i < pv.size(); ++i) {
    if (!pm[i] || !gm[i]) continue;
    const double err = std::abs(pv[i] - gv[i]);
    const double rel = err / gv[i];
    abs_sum_ += err;
    rel_sum_ += rel;
    ++n_;
    for (size_t b = 0; b < bins_.size(); ++b) {
      if (gv[i] >= bins_[b].lo && gv[i] < bins_[b].hi) {
        bin_rel_[b] += rel;
        ++bin_n_[b];
        break;
      }
    }
  }
}

void EvalAccumulator::merge(const EvalAccumulator& other) {
  if (other.bins_.size() != bins_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "merging accumulators with different bins");
  }
  abs_sum_ += other.abs_sum_;
  rel_sum_ += other.rel_sum_;
  n_ += other.n_;
  for (size_t b = 0; b < bins_.size(); ++b) {
    bin_rel_[b] += other.bin_rel_[b];
    bin_n_[b] += other.bin_n_[b];
  }
}

EvalReport EvalAccumulator::report() const {
  EvalReport r;
  r.n_valid = n_;
  if (n_ > 0) {
    r.l1 = abs_sum_ / static_cast<double>(n_);
    r.rel_l1 = rel_sum_ / static_cast<double>(n_);
  }
  for (size_t b = 0; b < bins_.size(); ++b) {
    BinStats s{bins_[b], 0.0, bin_n_[b]};
    if (s.count > 0) s.mape = 100.0 * bin_rel_[b] / static_cast<double>(s.count);
    r.bins.push_back(s);
  }
  return r;
}

EvalReport evaluate(const DepthMap& pred, const DepthMap& gt, const std::vector<DepthBin>& bins) {
  EvalAccumulator acc(bins);
  acc.add(pred, gt);
  return acc.report();
}

std::vector<DepthBin> inverse_depth_bins(const DepthRange& range, int n_bins) {
  if (n_bins < 1) throw Error(ErrorCode::InvalidSpec, "need at least one bin");
  if (!(range.z_near > 0.0 && range.z_near < range.z_far)) {
    throw Error(ErrorCode::InvalidRange, "bins need 0 < z_near < z_far");
  }
  const double inv_hi = 1.0 / range.z_near;
  const double step = (inv_hi - 1.0 / range.z_far) / n_bins;
  std::vector<DepthBin> bins;
  for (int b = 0; b < n_bins; ++b) {
    const double lo = b == 0 ? range.z_near : 1.0 / (inv_hi - b * step);
    const double hi = b + 1 == n_bins ? std::nextafter(range.z_far, HUGE_VAL)
                                      : 1.0 / (inv_hi - (b + 1) * step);
    bins.push_back({lo, hi});
  }
  return bins;
}

BinStats masked_rel_l1(const DepthMap& pred, const DepthMap& gt, const DepthRange& range) {
  require_same_shape(pred, gt, "masked_rel_l1: maps differ in size");
  BinStats s{{range.z_near, range.z_far}, 0.0, 0};
  double sum = 0.0;
  for (int y = 0; y < gt.height(); ++y) {
    for (int x = 0; x < gt.width(); ++x) {
      if (!pred.valid(x, y) || !gt.valid(x, y)) continue;
      const double g = gt.value(x, y);
      if (g < range.z_near || g > range.z_far) continue;
      sum += std::abs(pred.value(x, y) - g) / g;
      ++s.count;
    }
  }
  if (s.count > 0) s.mape = 100.0 * sum / static_cast<double>(s.count);
  return s;
}

std::vector<CurvePoint> mape_by_depth(const DepthMap& pred, const DepthMap& gt, int n_bins,
                                      const DepthRange& range) {
  if (n_bins < 2) throw Error(ErrorCode::InvalidSpec, "mape_by_depth needs n_bins >= 2");
  if (!(range.z_near > 0.0 && range.z_near < range.z_far)) {
    throw Error(ErrorCode::InvalidRange, "mape_by_depth needs 0 < z_near < z_far");
  }
  require_same_shape(pred, gt, "mape_by_depth: maps differ in size");
  const double inv_hi = 1.0 / range.z_near;
  const double inv_lo = 1.0 / range.z_far;
  const double step = (inv_hi - inv_lo) / n_bins;

  std::vector<CurvePoint> curve(n_bins);
  std::vector<double> sums(n_bins, 0.0);
  for (int b = 0; b < n_bins; ++b) {
    // Bin 0 is nearest.
    const double a = inv_hi - b * step;
    const double c = inv_hi - (b + 1) * step;
    curve[b].lo = 1.0 / a;
    curve[b].hi = 1.0 / c;
    curve[b].center = 1.0 / (0.5 * (a + c));
  }
  for (int y = 0; y < gt.height(); ++y) {
    for (int x = 0; x < gt.width(); ++x) {
      if (!pred.valid(x, y) || !gt.valid(x, y)) continue;
      const double g = gt.value(x, y);
      if (g < range.z_near || g > range.z_far) continue;
      const int b = std::clamp(static_cast<int>((inv_hi - 1.0 / g) / step), 0, n_bins - 1);
      sums[b] += std::abs(pred.value(x, y) - g) / g;
      ++curve[b].count;
    }
  }
  for (int b = 0; b < n_bins; ++b) {
    if (curve[b].count > 0) curve[b].mape = 100.0 * sums[b] / static_cast<double>(curve[b].count);
  }
  return curve;
}

void write_eval_csv(const std::filesystem::path& path, const std::vector<std::string>& names,
                    const std::vector<EvalReport>& reports) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << "method,bin_lo,bin_hi,count,mape_pct,l1,rel_l1\n";
  for (size_t i = 0; i < reports.size(); ++i) {
    const EvalReport& r = reports[i];
    for (const BinStats& b : r.bins) {
      out << fmt::format("{},{:.6g},{:.6g},{},{:.9g},,\n", names[i], b.bin.lo, b.bin.hi, b.count,
                         b.mape);
    }
    out << fmt::format("{},all,all,{},{:.9g},{:.9g},{:.9g}\n", names[i], r.n_valid,
                       100.0 * r.rel_l1, r.l1, r.rel_l1);
  }
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

std::string format_report(const std::string& name, const EvalReport& r) {
  std::string s = fmt::format("{:<10} L1 {:.4f} m  rel-L1 {:.4f}  ({} px)\n", name, r.l1, r.rel_l1,
                              r.n_valid);
  for (const BinStats& b : r.bins) {
    s += fmt::format("  [{:.3f}, {:.3f}) m  MAPE {:7.2f}%  n={}\n", b.bin.lo, b.bin.hi, b.mape,
                     b.count);
  }
  return s;
}

std::string to_string(FusionMode m) {
  switch (m) {
    case FusionMode::Confidence: return "confidence";
    case FusionMode::RangeGated: return "range_gated";
    case FusionMode::Hybrid: return "hybrid";
  }
  return "?";
}

FusionMode parse_fusion_mode(const std::string& s) {
  if (s == "confidence") return FusionMode::Confidence;
  if (s == "range_gated") return FusionMode::RangeGated;
  if (s == "hybrid") return FusionMode::Hybrid;
  throw Error(ErrorCode::ConfigError, "unknown fusion mode: " + s);
}

}  // namespace monster
