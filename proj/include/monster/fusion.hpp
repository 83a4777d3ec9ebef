#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "monster/defocus.hpp"
#include "monster/image.hpp"

namespace monster {

enum class FusionMode { Confidence, RangeGated, Hybrid };

struct FusionPolicy {
  FusionMode mode = FusionMode::Hybrid;
  DepthRange mono_range{0.39375, 1.0161290322580645};
  double confidence_margin = 0.0;

  void validate() const;
};

enum class Source : uint8_t { Stereo = 0, Mono = 1, Invalid = 2 };

struct FusionResult {
  DepthMap depth;
  Grid<uint8_t> source_mask;  // Source values
};

struct SourceMaps {
  const DepthMap& depth;
  const ConfidenceMap& confidence;
};

/// Per-pixel selection between two sources. A pixel valid in only one source
/// always takes that source. Throws DimensionMismatch.
FusionResult fuse(SourceMaps stereo, SourceMaps mono, const FusionPolicy& policy);

/// Half-open depth interval [lo, hi).
struct DepthBin {
  double lo = 0.0;
  double hi = 0.0;
};

struct BinStats {
  DepthBin bin;
  double mape = 0.0;  // percent
  size_t count = 0;
};

struct EvalReport {
  double l1 = 0.0;
  double rel_l1 = 0.0;
  std::vector<BinStats> bins;
  size_t n_valid = 0;
};

/// Metrics over pixels valid in both maps; bins are selected by gt.
/// Throws DimensionMismatch, InvalidRange for overlapping or empty bins.
EvalReport evaluate(const DepthMap& pred, const DepthMap& gt, const std::vector<DepthBin>& bins);

/// Bins with edges uniform in 1/z over range, nearest first; the last bin is
/// closed at range.z_far.
std::vector<DepthBin> inverse_depth_bins(const DepthRange& range, int n_bins);

/// Relative L1 (as a percentage) restricted to gt inside [range.z_near, range.z_far].
BinStats masked_rel_l1(const DepthMap& pred, const DepthMap& gt, const DepthRange& range);

struct CurvePoint {
  double center = 0.0;  // depth at the middle of the inverse-depth bin
  double lo = 0.0;
  double hi = 0.0;
  double mape = 0.0;
  size_t count = 0;
};

/// MAPE over n_bins bins uniform in 1/z across range, nearest bin first.
/// Throws InvalidSpec when n_bins < 2.
std::vector<CurvePoint> mape_by_depth(const DepthMap& pred, const DepthMap& gt, int n_bins,
                                      const DepthRange& range);

/// Accumulating form of evaluate, for corpus-level metrics.
class EvalAccumulator {
 public:
  explicit EvalAccumulator(std::vector<DepthBin> bins);
  void add(const DepthMap& pred, const DepthMap& gt);
  /// Folds in another accumulator over the same bins.
  void merge(const EvalAccumulator& other);
  EvalReport report() const;

 private:
  std::vector<DepthBin> bins_;
  double abs_sum_ = 0.0;
  double rel_sum_ = 0.0;
  size_t n_ = 0;
  std::vector<double> bin_rel_;
  std::vector<size_t> bin_n_;
};

void write_eval_csv(const std::filesystem::path& path, const std::vector<std::string>& names,
                    const std::vector<EvalReport>& reports);
std::string format_report(const std::string& name, const EvalReport& r);

std::string to_string(FusionMode m);
FusionMode parse_fusion_mode(const std::string& s);

}  // namespace monster
