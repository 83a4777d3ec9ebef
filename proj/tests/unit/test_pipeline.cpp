#include <cmath>
#include <filesystem>
#include <numbers>

#include <gtest/gtest.h>

#include "monster/pipeline.hpp"

using namespace monster;
namespace fs = std::filesystem;

namespace {

struct Dataset {
  fs::path dir;
  DatasetManifest manifest;
  LoadedRecord rec;
};

Dataset build(const std::string& name, const std::string& decal) {
  DatasetOptions o;
  o.count = 1;
  o.scene_template.width = 128;
  o.scene_template.height = 128;
  o.scene_template.depth_min = 0.8;
  o.scene_template.depth_max = 4.5;
  o.rig.intrinsics = {256, 256, 64, 64};
  o.defocus_left = DefocusModel::with_coefficient(9.0, 1.5);
  o.defocus_right = DefocusModel::with_coefficient(9.0, 0.7);
  o.decalibration = parse_decalibration(decal, o.rig.intrinsics);
  o.seed = 3;
  Dataset d;
  d.dir = fs::temp_directory_path() / ("monster_pipeline_" + name);
  fs::remove_all(d.dir);
  d.manifest = build_dataset(o, d.dir);
  d.rec = load_record(d.manifest.records[0], d.dir);
  return d;
}

class Pipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    clean_ = new Dataset(build("clean", "none"));
    tilted_ = new Dataset(build("tilted", "inplane:5deg"));
  }
  static void TearDownTestSuite() {
    fs::remove_all(clean_->dir);
    fs::remove_all(tilted_->dir);
    delete clean_;
    delete tilted_;
  }
  static Dataset* clean_;
  static Dataset* tilted_;
};

Dataset* Pipeline::clean_ = nullptr;
Dataset* Pipeline::tilted_ = nullptr;

}  // namespace

TEST(MonoReference, DropsZeroConfidencePixels) {
  DepthMap gt(4, 1, 1.0);
  gt.set(3, 0, 5.9);  // beyond the far end for z_n = 0.7
  const MonoEstimate est = simulate_mono_depth(gt, DefocusModel::with_coefficient(9.0, 0.7), {}, {});
  const MonoReference ref = mono_reference(est, MonoMode::PhaseCoded);
  EXPECT_FALSE(ref.relative);
  EXPECT_EQ(ref.depth.count_valid(), 3u);
  EXPECT_FALSE(ref.depth.valid(3, 0));
  EXPECT_TRUE(mono_reference(est, MonoMode::ImageBased).relative);
}

TEST_F(Pipeline, LeftReferenceFollowsTheObservedImage) {
  const ManifestRecord& meta = tilted_->manifest.records[0];
  const CalibrationCase c =
      make_calibration_case(tilted_->rec, meta, {}, {}, ReferenceCamera::Left);
  ASSERT_TRUE(meta.decalibration.has_value());
  EXPECT_EQ(c.decalibration.params(), *meta.decalibration);
  // noiseless phase-coded reference is the decalibrated ground truth
  const DepthMap carried = warp_map(tilted_->rec.gt_depth, c.decalibration, Interpolation::Bilinear);
  size_t n = 0;
  for (int y = 0; y < 128; ++y)
    for (int x = 0; x < 128; ++x)
      if (c.problem.mono.depth.valid(x, y)) {
        ++n;
        EXPECT_NEAR(c.problem.mono.depth.value(x, y), carried.value(x, y), 1e-9);
      }
  EXPECT_GT(n, 128u * 128u / 2);

  const CalibrationCase r =
      make_calibration_case(tilted_->rec, meta, {}, {}, ReferenceCamera::Right);
  for (int y = 0; y < 128; ++y)
    for (int x = 0; x < 128; ++x)
      if (r.problem.mono.depth.valid(x, y)) {
        EXPECT_NEAR(r.problem.mono.depth.value(x, y), tilted_->rec.right_gt_depth.value(x, y), 1e-9);
      }
}

TEST_F(Pipeline, TrueWarpBeatsIdentityAgainstGroundTruth) {
  const ManifestRecord& meta = tilted_->manifest.records[0];
  const CalibrationCase c = make_calibration_case(tilted_->rec, meta, {}, {}, ReferenceCamera::Left);
  const CalibConfig cfg;
  const LossValue ident = stereo_error_vs_gt(c, cfg, {}, LossKind::L1);
  const LossValue truth =
      stereo_error_vs_gt(c, cfg, {c.decalibration.inverse(), Homography{}}, LossKind::L1);
  EXPECT_LT(truth.loss, 0.5 * ident.loss);
  EXPECT_GT(truth.n_valid, ident.n_valid);
}

TEST_F(Pipeline, CornerErrorAgainstTheTrueRectifier) {
  const ManifestRecord& meta = tilted_->manifest.records[0];
  const CalibrationCase c = make_calibration_case(tilted_->rec, meta, {}, {}, ReferenceCamera::Left);
  CalibConfig cfg;
  CalibResult identity;
  const CalibrationReport a = evaluate_calibration(c, cfg, identity);
  // a rotation by 5 degrees about (64, 64) moves a corner r by 2 r sin(2.5 deg)
  const double r = (64 * std::sqrt(2.0) + 2 * std::hypot(63.0, 64.0) + 63 * std::sqrt(2.0)) / 4;
  EXPECT_NEAR(a.corner_err_px, 2 * r * std::sin(2.5 * std::numbers::pi / 180), 1e-6);

  CalibResult exact;
  exact.warps.left = c.decalibration.inverse();
  EXPECT_NEAR(evaluate_calibration(c, cfg, exact).corner_err_px, 0.0, 1e-9);

  cfg.side = WarpSide::Right;
  exact.warps.right = Homography::translation(3, 4);
  EXPECT_NEAR(evaluate_calibration(c, cfg, exact).corner_err_px, 5.0, 1e-9);
}

TEST_F(Pipeline, FusionInputsLiveInTheRightView) {
  const ManifestRecord& meta = clean_->manifest.records[0];
  const FusionInputs in = make_fusion_inputs(clean_->rec, meta, {}, {});
  EXPECT_EQ(in.gt, clean_->rec.right_gt_depth);
  EXPECT_EQ(in.stereo.depth.width(), 128);
  // right-view stereo on a rectified pair agrees with the right ground truth
  size_t n = 0, ok = 0;
  for (int y = 0; y < 128; ++y)
    for (int x = 0; x < 128; ++x)
      if (in.stereo.depth.valid(x, y) && in.gt.valid(x, y)) {
        ++n;
        ok += std::abs(in.stereo.depth.value(x, y) - in.gt.value(x, y)) < 0.1 * in.gt.value(x, y);
      }
  EXPECT_GT(n, 128u * 128u / 3);
  EXPECT_GE(static_cast<double>(ok) / n, 0.8);
  for (int y = 0; y < 128; ++y)
    for (int x = 0; x < 128; ++x)
      if (in.mono.depth.valid(x, y)) {
        EXPECT_NEAR(in.mono.depth.value(x, y), in.gt.value(x, y), 1e-9);
      }
}

TEST_F(Pipeline, FrameConsistencyRisesWithDecalibration) {
  const ManifestRecord& meta = clean_->manifest.records[0];
  const CalibConfig cfg;
  const CalibrationCase c = make_calibration_case(clean_->rec, meta, {}, {}, ReferenceCamera::Left);
  const double calibrated = frame_consistency(c.problem, cfg);

  LoadedRecord rec = clean_->rec;
  ManifestRecord moved = meta;
  const Homography h = rotation_homography(RotationAxis::InPlane, 5 * std::numbers::pi / 180, meta.rig.intrinsics);
  rec.left = decalibrate(rec.left, h);
  moved.decalibration = h.params();
  const CalibrationCase d = make_calibration_case(rec, moved, {}, {}, ReferenceCamera::Left);
  EXPECT_GT(frame_consistency(d.problem, cfg), 3 * calibrated);
}
