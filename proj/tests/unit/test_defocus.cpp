#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "monster/defocus.hpp"

using namespace monster;

namespace {

DefocusModel camera(double focus) { return DefocusModel::with_coefficient(9.0, focus); }

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no exception";
  return ErrorCode::ConfigError;
}

}  // namespace

TEST(Defocus, CoefficientFromWavelength) {
  const DefocusModel m = camera(1.5);
  EXPECT_NEAR(m.coefficient(), 9.0, 1e-12);
  EXPECT_NEAR(m.wavelength, std::numbers::pi * 1.14e-3 * 1.14e-3 / 9.0, 1e-18);
}

TEST(Defocus, PsiAtRangeEnds) {
  const DefocusModel m = camera(1.5);
  EXPECT_NEAR(psi_from_depth(m, 0.5625), 10.0, 1e-12);
  EXPECT_NEAR(psi_from_depth(m, 4.5), -4.0, 1e-12);
  EXPECT_EQ(psi_from_depth(m, 1.5), 0.0);
  EXPECT_GT(psi_from_depth(m, 1.0), 0.0);  // in front of the focus plane
}

TEST(Defocus, DepthFromPsi) {
  EXPECT_NEAR(depth_from_psi(camera(0.7), 10.0), 0.39375, 1e-12);
  EXPECT_EQ(depth_from_psi(camera(0.7), 0.0), 0.7);
  const DefocusModel m = camera(1.5);
  for (double z : {0.4, 0.9, 1.7, 3.3, 20.0}) {
    EXPECT_NEAR(depth_from_psi(m, psi_from_depth(m, z)), z, 1e-12 * z);
  }
}

TEST(Defocus, Errors) {
  const DefocusModel m = camera(1.5);
  EXPECT_EQ(code_of([&] { psi_from_depth(m, 0.0); }), ErrorCode::NonPositiveDepth);
  EXPECT_EQ(code_of([&] { depth_from_psi(m, -6.0); }), ErrorCode::PsiOutOfPhysicalRange);
  EXPECT_EQ(code_of([&] { thin_lens_image_distance(m, 0.01); }),
            ErrorCode::ObjectInsideFocalLength);
  EXPECT_EQ(code_of([&] { valid_depth_range(m, PsiRange{3, 3}); }), ErrorCode::InvalidRange);
  EXPECT_EQ(code_of([&] { DefocusModel::with_coefficient(0.0, 1.5); }), ErrorCode::InvalidSpec);
  EXPECT_EQ(code_of([&] { camera(0.01); }), ErrorCode::InvalidSpec);
}

TEST(Defocus, ValidDepthRanges) {
  const DepthRange far = valid_depth_range(camera(1.5), {});
  EXPECT_NEAR(far.z_near, 0.5625, 1e-12);
  EXPECT_NEAR(far.z_far, 4.5, 1e-12);
  const DepthRange near = valid_depth_range(camera(0.7), {});
  EXPECT_NEAR(near.z_near, 0.39375, 1e-12);
  EXPECT_NEAR(near.z_far, 1.0161290322580645, 1e-12);
}

TEST(Defocus, ThinLens) {
  EXPECT_NEAR(thin_lens_image_distance(camera(1.5), 1.5), 0.016172506738544475, 1e-15);
}

TEST(Defocus, Quantize) {
  EXPECT_EQ(psi_quantize(0.0, 15), 0.0);
  EXPECT_EQ(psi_quantize(0.4, 15), 0.0);
  EXPECT_EQ(psi_quantize(0.5, 15), 0.0);  // midpoint goes down
  EXPECT_EQ(psi_quantize(0.6, 15), 1.0);
  EXPECT_EQ(psi_quantize(-9.0, 15), -4.0);
  EXPECT_EQ(psi_quantize(42.0, 15), 10.0);
  EXPECT_THROW(psi_quantize(0.0, 1), Error);
}

TEST(Defocus, ConfidenceIsTriangular) {
  const PsiRange r;
  EXPECT_DOUBLE_EQ(psi_confidence(3.0, r), 1.0);
  EXPECT_DOUBLE_EQ(psi_confidence(6.5, r), 0.5);
  EXPECT_DOUBLE_EQ(psi_confidence(-0.5, r), 0.5);
  EXPECT_DOUBLE_EQ(psi_confidence(10.0, r), 0.05);
  EXPECT_LT(psi_confidence(8.0, r), psi_confidence(5.0, r));
}

TEST(MonoSim, NoiselessPhaseCodedIsExactInRange) {
  DepthMap gt(4, 1);
  gt.set(0, 0, 0.5);
  gt.set(1, 0, 0.9);
  gt.set(2, 0, 6.0);  // psi < -4 at z_n = 0.7
  gt.invalidate(3, 0);
  const MonoEstimate e = simulate_mono_depth(gt, camera(0.7), {}, {});
  EXPECT_EQ(e.depth.value(0, 0), 0.5);
  EXPECT_EQ(e.depth.value(1, 0), 0.9);
  EXPECT_FALSE(e.depth.valid(2, 0));
  EXPECT_FALSE(e.depth.valid(3, 0));
  EXPECT_EQ(e.confidence(2, 0), 0.0);
  EXPECT_GT(e.confidence(0, 0), 0.0);
}

TEST(MonoSim, FarPlaneEntirelyInvalidNearCamera) {
  const DepthMap gt(16, 16, 6.0);
  EXPECT_EQ(simulate_mono_depth(gt, camera(0.7), {}, {}).depth.count_valid(), 0u);
}

TEST(MonoSim, SaturateClampsToRangeEnd) {
  DepthMap gt(2, 1);
  gt.set(0, 0, 6.0);
  gt.set(1, 0, 0.36);
  MonoSimSpec spec;
  spec.out_of_range = OutOfRangePolicy::Saturate;
  const MonoEstimate e = simulate_mono_depth(gt, camera(0.7), {}, spec);
  EXPECT_NEAR(e.depth.value(0, 0), 1.0161290322580645, 1e-12);
  EXPECT_NEAR(e.depth.value(1, 0), 0.39375, 1e-12);
  EXPECT_EQ(e.confidence(0, 0), 0.0);
  EXPECT_EQ(e.confidence(1, 0), 0.0);
}

TEST(MonoSim, NoiseIsSeededAndUnbiasedInPsi) {
  const DepthMap gt(64, 64, 0.8);
  MonoSimSpec spec;
  spec.noise_sigma_psi = 0.5;
  spec.rng_seed = 3;
  const DefocusModel m = camera(0.7);
  const MonoEstimate a = simulate_mono_depth(gt, m, {}, spec);
  EXPECT_EQ(a.depth, simulate_mono_depth(gt, m, {}, spec).depth);
  spec.rng_seed = 4;
  EXPECT_NE(a.depth, simulate_mono_depth(gt, m, {}, spec).depth);

  double sum = 0.0;
  double sq = 0.0;
  const double psi0 = psi_from_depth(m, 0.8);
  for (double z : a.depth.values().data()) {
    const double d = psi_from_depth(m, z) - psi0;
    sum += d;
    sq += d * d;
  }
  const double n = 64.0 * 64.0;
  EXPECT_NEAR(sum / n, 0.0, 0.05);
  EXPECT_NEAR(std::sqrt(sq / n), 0.5, 0.03);
}

TEST(MonoSim, ImageBasedIsAffineWithSmoothError) {
  const DepthMap gt(32, 32, 5.0);
  MonoSimSpec spec;
  spec.mode = MonoMode::ImageBased;
  spec.relative_scale = 0.5;
  spec.relative_shift = 1.0;
  spec.relative_noise = 0.0;
  const MonoEstimate e = simulate_mono_depth(gt, camera(1.5), {}, spec);
  EXPECT_EQ(e.depth.count_valid(), 32u * 32u);  // no range restriction
  EXPECT_DOUBLE_EQ(e.depth.value(5, 5), 3.5);

  spec.relative_noise = 0.05;
  const MonoEstimate n = simulate_mono_depth(gt, camera(1.5), {}, spec);
  for (double v : n.depth.values().data()) EXPECT_NEAR(v, 3.5, 3.5 * 0.05 + 1e-12);
}

TEST(MonoSim, RejectsBadSpecs) {
  const DepthMap gt(2, 2, 1.0);
  MonoSimSpec spec;
  spec.noise_sigma_psi = -1;
  EXPECT_THROW(simulate_mono_depth(gt, camera(1.5), {}, spec), Error);
  DepthMap bad(2, 2, 1.0);
  bad.set(0, 0, -1.0);
  try {
    simulate_mono_depth(bad, camera(1.5), {}, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonPositiveDepth);
  }
}
