#include "monster/pipeline.hpp"

namespace monster {

MonoReference mono_reference(const MonoEstimate& est, MonoMode mode) {
  MonoReference ref{est.depth, mode == MonoMode::ImageBased};
  for (int y = 0; y < ref.depth.height(); ++y) {
    for (int x = 0; x < ref.depth.width(); ++x) {
      if (!(est.confidence(x, y) > 0.0)) ref.depth.invalidate(x, y);
    }
  }
  return ref;
}

namespace {

Homography decal_of(const ManifestRecord& meta) {
  return meta.decalibration ? Homography::from_params(*meta.decalibration) : Homography{};
}

bool is_identity(const Homography& h) { return h.matrix() == Eigen::Matrix3d::Identity(); }

DepthMap carry(const DepthMap& gt, const Homography& h, Interpolation interp) {
  return is_identity(h) ? gt : warp_map(gt, h, interp);
}

}  // namespace

CalibrationCase make_calibration_case(const LoadedRecord& rec, const ManifestRecord& meta,
                                      const MonoSimSpec& mono, const MatcherConfig& matcher,
                                      ReferenceCamera reference, const PsiRange& psi) {
  CalibrationCase c;
  c.decalibration = decal_of(meta);
  c.gt_left = rec.gt_depth;
  c.gt_right = rec.right_gt_depth;
  c.problem.left = rec.left;
  c.problem.right = rec.right;
  c.problem.rig = meta.rig;
  c.problem.matcher = matcher;
  const MonoEstimate est =
      reference == ReferenceCamera::Left
          ? simulate_mono_depth(carry(rec.gt_depth, c.decalibration, Interpolation::Bilinear),
                                meta.defocus_left, psi, mono)
          : simulate_mono_depth(rec.right_gt_depth, meta.defocus_right, psi, mono);
  c.problem.mono = mono_reference(est, mono.mode);
  return c;
}

LossValue stereo_error_vs_gt(const CalibrationCase& c, const CalibConfig& cfg,
                             const WarpPair& warps, LossKind kind) {
  const CalibrationObjective obj(c.problem, cfg);
  const DepthMap stereo = obj.stereo_depth(warps);
  const DepthMap gt =
      cfg.reference == ReferenceCamera::Left
          ? carry(c.gt_left, compose(warps.left, c.decalibration), Interpolation::Nearest)
          : carry(c.gt_right, warps.right, Interpolation::Nearest);
  LossValue v = consistency_loss(gt, stereo, kind);
  return v;
}

CalibrationReport evaluate_calibration(const CalibrationCase& c, const CalibConfig& cfg,
                                       CalibResult result) {
  CalibrationReport rep;
  const int w = c.problem.left.width;
  const int h = c.problem.left.height;
  rep.l1_vs_gt = stereo_error_vs_gt(c, cfg, result.warps, LossKind::L1).loss;
  rep.rel_l1_vs_gt = stereo_error_vs_gt(c, cfg, result.warps, LossKind::RelativeL1).loss;
  const Homography left_truth = c.decalibration.inverse();
  switch (cfg.side) {
    case WarpSide::Left:
      rep.corner_err_px = mean_corner_distance(result.warps.left, left_truth, w, h);
      break;
    case WarpSide::Right:
      rep.corner_err_px = mean_corner_distance(result.warps.right, Homography{}, w, h);
      break;
    case WarpSide::Both:
      rep.corner_err_px = 0.5 * (mean_corner_distance(result.warps.left, left_truth, w, h) +
                                 mean_corner_distance(result.warps.right, Homography{}, w, h));
      break;
  }
  rep.result = std::move(result);
  return rep;
}

CalibrationReport run_calibration(const CalibrationCase& c, const CalibConfig& cfg) {
  return evaluate_calibration(c, cfg, calibrate(c.problem, cfg));
}

FusionInputs make_fusion_inputs(const LoadedRecord& rec, const ManifestRecord& meta,
                                const MonoSimSpec& mono, const MatcherConfig& matcher,
                                const PsiRange& psi) {
  FusionInputs in;
  in.gt = rec.right_gt_depth;
  in.mono = simulate_mono_depth(rec.right_gt_depth, meta.defocus_right, psi, mono);
  StereoViews v = match_stereo_views(rec.left, rec.right, meta.rig, matcher);
  in.stereo = {std::move(v.right_depth), std::move(v.right_confidence)};
  return in;
}

double frame_consistency(const CalibrationProblem& p, const CalibConfig& cfg) {
  const CalibrationObjective obj(p, cfg);
  return obj.evaluate(WarpPair{}).loss;
}

}  // namespace monster
