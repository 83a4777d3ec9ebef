#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "monster/calibration.hpp"
#include "monster/parallel.hpp"
#include "oracles.hpp"

using namespace monster;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct Fixture {
  Scene scene;
  StereoPair pair;
  StereoRig rig;
};

Fixture make_fixture(int size, uint64_t seed) {
  SceneSpec base;
  base.width = base.height = size;
  base.depth_min = 0.8;
  base.depth_max = 4.5;
  Fixture f;
  f.rig.intrinsics = Intrinsics::centered(size, size);
  f.scene = generate_scene(random_scene_spec(base, seed));
  f.pair = render_stereo_pair(f.scene.texture, f.scene.depth, f.rig);
  return f;
}

// Left image decalibrated by `decal`; noiseless phase-coded reference seen by
// the decalibrated left camera.
CalibrationProblem make_problem(const Fixture& f, const Homography& decal) {
  CalibrationProblem p;
  p.left = decalibrate(f.pair.left, decal);
  p.right = f.pair.right;
  p.mono.depth = simulate_mono_depth(warp_map(f.scene.depth, decal),
                                     DefocusModel::with_coefficient(9.0, 1.5), {}, {})
                     .depth;
  p.rig = f.rig;
  return p;
}

}  // namespace

TEST(ConsistencyLoss, MatchesMaskedMeanOracle) {
  oracle::Rng rng{5};
  for (int i = 0; i < 100; ++i) {
    const int w = rng.integer(3, 30), h = rng.integer(3, 30);
    const DepthMap a = oracle::random_depth(rng, w, h, 0.3, 6.0, rng.uniform() * 0.6);
    const DepthMap b = oracle::random_depth(rng, w, h, 0.3, 6.0, rng.uniform() * 0.6);
    for (LossKind kind : {LossKind::L1, LossKind::RelativeL1}) {
      const LossValue got = consistency_loss(a, b, kind);
      const oracle::Loss want = oracle::masked_mean(a, b, kind);
      ASSERT_EQ(got.n_valid, want.n);
      if (std::isinf(want.loss)) {
        EXPECT_TRUE(std::isinf(got.loss));
      } else {
        EXPECT_NEAR(got.loss, want.loss, 1e-12);
      }
    }
  }
}

TEST(ConsistencyLoss, HalfMaskedAndDegenerateCases) {
  DepthMap mono(4, 1), stereo(4, 1);
  for (int x = 0; x < 4; ++x) {
    mono.set(x, 0, 1.0 + x);
    stereo.set(x, 0, 2.0 * (1.0 + x));
  }
  mono.invalidate(0, 0);
  mono.invalidate(1, 0);
  const LossValue l1 = consistency_loss(mono, stereo, LossKind::L1);
  EXPECT_EQ(l1.n_valid, 2u);
  EXPECT_DOUBLE_EQ(l1.loss, 3.5);
  EXPECT_DOUBLE_EQ(consistency_loss(mono, stereo, LossKind::RelativeL1).loss, 1.0);

  const DepthMap empty(4, 1, 0.0, false);
  EXPECT_TRUE(std::isinf(consistency_loss(empty, stereo, LossKind::L1).loss));
  DepthMap sparse(20, 20, 1.0, false);
  sparse.set(3, 3, 1.0);  // 1 of 400 pixels < 1%
  EXPECT_TRUE(std::isinf(consistency_loss(sparse, DepthMap(20, 20, 2.0), LossKind::L1).loss));
  EXPECT_THROW(consistency_loss(DepthMap(3, 3), DepthMap(3, 4), LossKind::L1), Error);
}

TEST(AlignScaleShift, RecoversAffineMap) {
  oracle::Rng rng{8};
  const DepthMap ref = oracle::random_depth(rng, 16, 16, 0.5, 5.0, 0.1);
  DepthMap rel(16, 16, 0.0, false);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x)
      if (ref.valid(x, y)) rel.set(x, y, (ref.value(x, y) - 0.3) / 2.5);
  const AlignResult a = align_scale_shift(rel, ref);
  EXPECT_NEAR(a.scale, 2.5, 1e-12);
  EXPECT_NEAR(a.shift, 0.3, 1e-12);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x)
      if (ref.valid(x, y)) { EXPECT_NEAR(a.aligned.value(x, y), ref.value(x, y), 1e-12); }
}

TEST(AlignScaleShift, Errors) {
  auto code = [](const DepthMap& rel, const DepthMap& ref) {
    try {
      align_scale_shift(rel, ref);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::ConfigError;
  };
  DepthMap few(3, 3), ramp(3, 3);
  for (int i = 0; i < 9; ++i) ramp.set(i % 3, i / 3, i + 1.0);
  EXPECT_EQ(code(few, ramp), ErrorCode::InsufficientOverlap);
  DepthMap flat(8, 8, 2.0), grad(8, 8), inverted(8, 8);
  for (int i = 0; i < 64; ++i) {
    grad.set(i % 8, i / 8, 1.0 + i);
    inverted.set(i % 8, i / 8, 100.0 - i);
  }
  EXPECT_EQ(code(flat, grad), ErrorCode::NonInformativeReference);
  EXPECT_EQ(code(grad, flat), ErrorCode::NonInformativeReference);
  EXPECT_EQ(code(inverted, grad), ErrorCode::NonInformativeReference);
}

TEST(ParamNormalizer, ZeroIsIdentityAndRoundTrips) {
  const ParamNormalizer n(256, 192);
  const std::vector<double> zero(8, 0.0);
  EXPECT_LT(max_corner_distance(n.to_homography(zero), Homography::identity(), 256, 192), 1e-12);
  const Homography h = rotation_homography(RotationAxis::InPlane, 7 * kDeg,
                                           Intrinsics::centered(256, 192));
  const std::vector<double> u = n.from_homography(h);
  EXPECT_LT(max_corner_distance(n.to_homography(u), h, 256, 192), 1e-9);
  // a unit step in the translation entry moves every point by half the larger side
  std::vector<double> t(8, 0.0);
  t[2] = 1.0;
  EXPECT_NEAR(n.to_homography(t).apply({10, 10}).x, 138.0, 1e-12);
}

TEST(Objective, MinimalWhenRectified) {
  const Fixture f = make_fixture(128, 3);
  const CalibConfig cfg;
  const CalibrationProblem calibrated = make_problem(f, Homography::identity());
  const auto id = Homography::identity().params();
  const double rectified = calibration_objective(calibrated, id, cfg);
  EXPECT_EQ(rectified, CalibrationObjective(calibrated, cfg).evaluate(WarpPair{}).loss);
  EXPECT_TRUE(std::isfinite(rectified));

  const Homography decal = rotation_homography(RotationAxis::InPlane, 7 * kDeg, f.rig.intrinsics);
  const CalibrationProblem broken = make_problem(f, decal);
  const CalibrationObjective obj(broken, cfg);
  const double at_identity = obj.evaluate(WarpPair{}).loss;
  const double at_truth = obj.evaluate(WarpPair{decal.inverse(), {}}).loss;
  EXPECT_GT(at_identity, rectified);
  EXPECT_LE(at_truth, 1.1 * rectified);
  EXPECT_THROW(calibration_objective(calibrated, std::vector<double>(7, 0.0), cfg), Error);
}

TEST(Objective, DimensionsAndSingularWarps) {
  const Fixture f = make_fixture(64, 4);
  const CalibrationProblem p = make_problem(f, Homography::identity());
  CalibConfig cfg;
  EXPECT_EQ(CalibrationObjective(p, cfg).dimension(), 8);
  cfg.side = WarpSide::Both;
  const CalibrationObjective both(p, cfg);
  EXPECT_EQ(both.dimension(), 16);
  std::vector<double> u(16, 0.0);
  u[0] = -1.0;  // collapses the x axis
  u[1] = 0.0;
  EXPECT_TRUE(std::isinf(both.evaluate_normalized(u).loss));

  CalibrationProblem wrong = p;
  wrong.mono.depth = DepthMap(10, 10);
  EXPECT_THROW(CalibrationObjective(wrong, cfg), Error);
}

TEST(Calibrate, RecoversSmallRotation) {
  const Fixture f = make_fixture(128, 6);
  const Homography decal = rotation_homography(RotationAxis::InPlane, 3 * kDeg, f.rig.intrinsics);
  const CalibrationProblem p = make_problem(f, decal);
  CalibConfig cfg;
  cfg.steps = 60;
  const CalibResult r = calibrate(p, cfg);
  EXPECT_LT(r.final_loss, r.initial_loss);
  EXPECT_EQ(r.loss_trace.front(), r.initial_loss);
  EXPECT_EQ(r.final_loss, *std::min_element(r.loss_trace.begin(), r.loss_trace.end()));
  EXPECT_LT(mean_corner_distance(r.homography, decal.inverse(), 128, 128),
            0.5 * mean_corner_distance(Homography::identity(), decal.inverse(), 128, 128));
  EXPECT_GT(r.valid_overlap_fraction, 0.1);
  EXPECT_GT(r.evaluations, 60);
}

TEST(Calibrate, CalibratedInputStaysPut) {
  const Fixture f = make_fixture(256, 7);
  const CalibrationProblem p = make_problem(f, Homography::identity());
  CalibConfig cfg;
  cfg.steps = 40;
  const CalibResult r = calibrate(p, cfg);
  EXPECT_LT(max_corner_distance(r.homography, Homography::identity(), 256, 256), 0.5);
  EXPECT_LE(r.final_loss, r.initial_loss);
}

TEST(Calibrate, NelderMeadTraceIsMonotone) {
  const Fixture f = make_fixture(96, 8);
  const Homography decal = rotation_homography(RotationAxis::InPlane, 2 * kDeg, f.rig.intrinsics);
  const CalibrationProblem p = make_problem(f, decal);
  CalibConfig cfg;
  cfg.optimizer = OptimizerKind::NelderMead;
  cfg.steps = 40;
  const CalibResult r = calibrate(p, cfg);
  for (size_t i = 1; i < r.loss_trace.size(); ++i) EXPECT_LE(r.loss_trace[i], r.loss_trace[i - 1]);
  EXPECT_LT(r.final_loss, r.initial_loss);
}

TEST(Calibrate, DeterministicAcrossThreadCounts) {
  const Fixture f = make_fixture(96, 9);
  const Homography decal = rotation_homography(RotationAxis::InPlane, 2 * kDeg, f.rig.intrinsics);
  const CalibrationProblem p = make_problem(f, decal);
  CalibConfig cfg;
  cfg.steps = 8;
  cfg.restarts = 2;
  cfg.seed = 4;
  const int before = num_threads();
  set_num_threads(1);
  const CalibResult a = calibrate(p, cfg);
  set_num_threads(3);
  const CalibResult b = calibrate(p, cfg);
  set_num_threads(before);
  EXPECT_EQ(a.loss_trace, b.loss_trace);
  EXPECT_EQ(a.homography.params(), b.homography.params());
  EXPECT_GT(a.loss_trace.size(), 10u);  // both restarts recorded
}

TEST(Calibrate, Errors) {
  const Fixture f = make_fixture(64, 10);
  CalibrationProblem p = make_problem(f, Homography::identity());
  CalibConfig cfg;
  cfg.steps = 0;
  EXPECT_THROW(calibrate(p, cfg), Error);

  cfg = {};
  CalibrationProblem sparse = p;
  sparse.mono.depth = DepthMap(64, 64, 1.0, false);
  for (int x = 0; x < 64; ++x) sparse.mono.depth.set(x, 0, 1.0);  // 1.6%
  try {
    calibrate(sparse, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientOverlap);
  }

  CalibrationProblem blank = p;  // textureless: stereo never matches
  blank.left = Image(64, 64, 1, 0.5);
  blank.right = Image(64, 64, 1, 0.5);
  cfg.steps = 2;
  try {
    calibrate(blank, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoProgress);
  }
}

TEST(Landscape, GridParsing) {
  const AngleGrid g = parse_angle_grid("inplane:-10:10:21");
  EXPECT_EQ(g.axis, RotationAxis::InPlane);
  ASSERT_EQ(g.angles_rad.size(), 21u);
  EXPECT_NEAR(g.angles_rad[10], 0.0, 1e-15);
  EXPECT_NEAR(g.angles_rad[0], -10 * kDeg, 1e-15);
  EXPECT_EQ(parse_angle_grid("pitch:0:0:1").angles_rad.size(), 1u);
  for (const char* bad : {"inplane:-1:1", "roll:-1:1:3", "pitch:a:1:3", "pitch:1:-1:3", "yaw:0:1:0"}) {
    EXPECT_THROW(parse_angle_grid(bad), Error) << bad;
  }
}

TEST(Landscape, MinimumAtOriginForRectifiedPair) {
  const Fixture f = make_fixture(128, 11);
  const CalibrationProblem p = make_problem(f, Homography::identity());
  const AngleGrid a1 = parse_angle_grid("inplane:-4:4:5");
  const AngleGrid a2 = parse_angle_grid("pitch:-2:2:3");
  const auto grid = landscape_scan(p, CalibConfig{}, a1, a2, WarpSide::Right);
  ASSERT_EQ(grid.size(), 5u);
  ASSERT_EQ(grid[0].size(), 3u);
  for (size_t i = 0; i < 5; ++i)
    for (size_t j = 0; j < 3; ++j)
      if (i != 2 || j != 1) { EXPECT_GT(grid[i][j], grid[2][1]) << i << "," << j; }

  try {
    landscape_scan(p, CalibConfig{}, parse_angle_grid("inplane:1:3:3"), a2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidRange);
  }
  EXPECT_THROW(landscape_scan(p, CalibConfig{}, AngleGrid{}, a2), Error);
}

TEST(Landscape, LocalMinimaCount) {
  EXPECT_EQ(count_local_minima({{3, 2, 3}, {2, 1, 2}, {3, 2, 3}}), 1);
  EXPECT_EQ(count_local_minima({{1, 2, 1}, {2, 3, 2}, {1, 2, 1}}), 4);
  EXPECT_EQ(count_local_minima({{1, 1}, {1, 1}}), 0);  // strict
}

TEST(FrameSelection, RanksByInRangeFraction) {
  const DefocusModel m = DefocusModel::with_coefficient(9.0, 1.5);
  std::vector<DepthMap> depths;
  depths.emplace_back(8, 8, 6.0);  // psi < -4 everywhere
  depths.emplace_back(8, 8, 1.0);
  DepthMap half(8, 8, 1.0);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 8; ++x) half.set(x, y, 6.0);
  depths.push_back(half);
  depths.emplace_back(8, 8, 2.0);
  const auto top = select_calibration_frames(depths, m, {}, 10);
  ASSERT_EQ(top.size(), 4u);
  EXPECT_EQ(top[0].index, 1u);  // ties keep input order
  EXPECT_EQ(top[1].index, 3u);
  EXPECT_EQ(top[2].index, 2u);
  EXPECT_DOUBLE_EQ(top[2].fraction, 0.5);
  EXPECT_EQ(top[3].index, 0u);
  EXPECT_EQ(top[3].fraction, 0.0);
  EXPECT_EQ(select_calibration_frames(depths, m, {}, 2).size(), 2u);

  try {
    select_calibration_frames(DatasetManifest{}, ".", {}, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyManifest);
  }
}

TEST(Drift, RollingMeanAndAlarm) {
  const std::vector<double> losses{1, 1, 1, 1, 4, 4, 4};
  const DriftReport r = drift_from_losses(losses, 1.0, {3, 1.5});
  ASSERT_EQ(r.rolling_mean.size(), 7u);
  EXPECT_DOUBLE_EQ(r.rolling_mean[4], 2.0);
  EXPECT_DOUBLE_EQ(r.rolling_mean[5], 3.0);
  ASSERT_TRUE(r.alarm_frame.has_value());
  EXPECT_EQ(*r.alarm_frame, 4u);  // 2.0 > 1.5

  const DriftReport quiet = drift_from_losses(std::vector<double>(50, 1.4), 1.0, {3, 1.5});
  EXPECT_FALSE(quiet.alarm_frame.has_value());

  DriftMonitor mon(1.0, {2, 1.5});
  EXPECT_FALSE(mon.push(1.0).alarm);
  EXPECT_DOUBLE_EQ(mon.push(3.0).rolling_mean, 2.0);
  EXPECT_DOUBLE_EQ(mon.push(1.0).rolling_mean, 2.0);
  EXPECT_DOUBLE_EQ(mon.push(1.0).rolling_mean, 1.0);
  EXPECT_THROW(DriftMonitor(1.0, {0, 1.5}), Error);
}

TEST(Drift, ScoreFromDepthPairs) {
  std::vector<DepthPair> stream;
  for (double offset : {0.1, 0.1, 0.5}) {
    stream.push_back({DepthMap(4, 4, 1.0), DepthMap(4, 4, 1.0 + offset)});
  }
  const DriftReport r = drift_score(stream, 0.1, {1, 1.5});
  EXPECT_NEAR(r.frame_loss[0], 0.1, 1e-12);
  ASSERT_TRUE(r.alarm_frame.has_value());
  EXPECT_EQ(*r.alarm_frame, 2u);
}
