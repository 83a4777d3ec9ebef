#pragma once

#include <optional>

#include "monster/calibration.hpp"
#include "monster/defocus.hpp"
#include "monster/fusion.hpp"
#include "monster/simulator.hpp"
#include "monster/stereo.hpp"

// Glue shared by the command-line tool and the end-to-end tests: turning a
// dataset record into calibration, fusion and drift inputs.

namespace monster {

/// Calibration reference from a monocular estimate: pixels the engine reports
/// with zero confidence (out of its range) are dropped.
MonoReference mono_reference(const MonoEstimate& est, MonoMode mode);

struct CalibrationCase {
  CalibrationProblem problem;
  DepthMap gt_left;   // rectified frame
  DepthMap gt_right;
  Homography decalibration;  // applied to the observed left image
};

/// Builds the problem for one record. The monocular engine of the reference
/// camera sees that camera's observed image, so a decalibrated left view
/// yields a decalibrated left map.
CalibrationCase make_calibration_case(const LoadedRecord& rec, const ManifestRecord& meta,
                                      const MonoSimSpec& mono, const MatcherConfig& matcher,
                                      ReferenceCamera reference, const PsiRange& psi = {});

struct CalibrationReport {
  CalibResult result;
  double l1_vs_gt = 0.0;
  double rel_l1_vs_gt = 0.0;
  double corner_err_px = 0.0;  // mean corner distance to the true rectifier, warped sides
};

/// Stereo depth of the reference view under `warps`, compared with ground
/// truth carried into the same frame.
LossValue stereo_error_vs_gt(const CalibrationCase& c, const CalibConfig& cfg,
                             const WarpPair& warps, LossKind kind);

CalibrationReport evaluate_calibration(const CalibrationCase& c, const CalibConfig& cfg,
                                       CalibResult result);

CalibrationReport run_calibration(const CalibrationCase& c, const CalibConfig& cfg);

struct FusionInputs {
  DepthMap gt;
  MonoEstimate mono;
  StereoDepth stereo;
};

/// Right-view inputs: the right camera's monocular estimate and the
/// right-view stereo depth.
FusionInputs make_fusion_inputs(const LoadedRecord& rec, const ManifestRecord& meta,
                                const MonoSimSpec& mono, const MatcherConfig& matcher,
                                const PsiRange& psi = {});

/// Per-frame consistency for drift monitoring: the calibration objective at
/// the identity warp.
double frame_consistency(const CalibrationProblem& p, const CalibConfig& cfg);

}  // namespace monster
