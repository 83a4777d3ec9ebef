#pragma once

#include <cstdint>
#include <vector>

#include "monster/calibration.hpp"
#include "monster/fusion.hpp"
#include "monster/stereo.hpp"

// Scalar brute-force reference implementations used to check the optimized
// kernels. They deliberately share no code with the library.

namespace oracle {

/// Matching cost at one (x, y, d) by direct double loops over the window.
double window_cost(const monster::Image& left, const monster::Image& right,
                   const monster::MatcherConfig& cfg, int x, int y, int d);

/// Vertex of the quadratic through (-1,a), (0,b), (1,c), found by solving the
/// 3x3 interpolation system. Returns 0 for non-convex fits; clamps to +-0.5.
double parabola_vertex(double a, double b, double c);

struct Loss {
  double loss;
  size_t n;
};
template <typename Tag>
Loss masked_mean(const monster::MaskedMap<Tag>& mono, const monster::MaskedMap<Tag>& stereo,
                 monster::LossKind kind);

monster::EvalReport evaluate(const monster::DepthMap& pred, const monster::DepthMap& gt,
                             const std::vector<monster::DepthBin>& bins);

// Random small instances.
struct Rng {
  uint64_t state;
  double uniform();  // [0,1)
  int integer(int lo, int hi);  // inclusive
};

monster::Image random_image(Rng& rng, int w, int h, double invalid_fraction);
monster::DepthMap random_depth(Rng& rng, int w, int h, double lo, double hi,
                               double invalid_fraction);

}  // namespace oracle
