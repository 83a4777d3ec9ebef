#include "monster/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <spdlog/spdlog.h>

#include "monster/io.hpp"
#include "monster/random.hpp"

namespace monster {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void CalibConfig::validate() const {
  if (steps < 1) throw Error(ErrorCode::InvalidSpec, "steps must be >= 1");
  if (!(fd_epsilon > 0.0)) throw Error(ErrorCode::InvalidSpec, "fd_epsilon must be > 0");
  if (restarts < 1) throw Error(ErrorCode::InvalidSpec, "restarts must be >= 1");
  if (!(step_size > 0.0)) throw Error(ErrorCode::InvalidSpec, "step_size must be > 0");
  if (patience < 1) throw Error(ErrorCode::InvalidSpec, "patience must be >= 1");
}

template <typename Tag>
LossValue consistency_loss(const MaskedMap<Tag>& mono, const MaskedMap<Tag>& stereo,
                           LossKind kind) {
  require_same_shape(mono, stereo, "consistency_loss: maps differ in size");
  const auto& mv = mono.values().data();
  const auto& sv = stereo.values().data();
  const auto& mm = mono.mask().data();
  const auto& sm = stereo.mask().data();
  double sum = 0.0;
  size_t n = 0;
  for (size_t i = 0; i < mv.size(); ++i) {
    if (!mm[i] || !sm[i]) continue;
    const double diff = std::abs(mv[i] - sv[i]);
    sum += kind == LossKind::L1 ? diff : diff / mv[i];
    ++n;
  }
  if (n == 0 || static_cast<double>(n) < kMinOverlapFraction * static_cast<double>(mv.size())) {
    return {kInf, n};
  }
  return {sum / static_cast<double>(n), n};
}

template LossValue consistency_loss(const DepthMap&, const DepthMap&, LossKind);
template LossValue consistency_loss(const DisparityMap&, const DisparityMap&, LossKind);

AlignResult align_scale_shift(const DepthMap& relative, const DepthMap& reference) {
  require_same_shape(relative, reference, "align_scale_shift: maps differ in size");
  const auto& rv = relative.values().data();
  const auto& fv = reference.values().data();
  const auto& rm = relative.mask().data();
  const auto& fm = reference.mask().data();
  size_t n = 0;
  double mr = 0.0, mf = 0.0;
  for (size_t i = 0; i < rv.size(); ++i) {
    if (!rm[i] || !fm[i]) continue;
    mr += rv[i];
    mf += fv[i];
    ++n;
  }
  if (n < 10) throw Error(ErrorCode::InsufficientOverlap, "fewer than 10 jointly valid pixels");
  mr /= static_cast<double>(n);
  mf /= static_cast<double>(n);
  double cov = 0.0, var = 0.0, var_f = 0.0;
  for (size_t i = 0; i < rv.size(); ++i) {
    if (!rm[i] || !fm[i]) continue;
    cov += (rv[i] - mr) * (fv[i] - mf);
    var += (rv[i] - mr) * (rv[i] - mr);
    var_f += (fv[i] - mf) * (fv[i] - mf);
  }
  const double tiny = 1e-18 * static_cast<double>(n);
  if (!(var > tiny) || !(var_f > tiny)) {
    throw Error(ErrorCode::NonInformativeReference, "zero variance in the fit");
  }
  const double s = cov / var;
  if (!(s > 0.0)) throw Error(ErrorCode::NonInformativeReference, "fitted scale is not positive");
  AlignResult out{DepthMap(relative.width(), relative.height(), 0.0, false), s, mf - s * mr};
  for (int y = 0; y < relative.height(); ++y) {
    for (int x = 0; x < relative.width(); ++x) {
      if (relative.valid(x, y)) out.aligned.set(x, y, s * relative.value(x, y) + out.shift);
    }
  }
  return out;
}

// ParamNormalizer -------------------------------------------------------------

ParamNormalizer::ParamNormalizer(int width, int height) {
  const double s = std::max(width, height) / 2.0;
  const double cx = width / 2.0;
  const double cy = height / 2.0;
  to_norm_ << 1.0 / s, 0, -cx / s, 0, 1.0 / s, -cy / s, 0, 0, 1;
  from_norm_ << s, 0, cx, 0, s, cy, 0, 0, 1;
}

Homography ParamNormalizer::to_homography(std::span<const double> u) const {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(0, 0) += u[0];
  m(0, 1) += u[1];
  m(0, 2) += u[2];
  m(1, 0) += u[3];
  m(1, 1) += u[4];
  m(1, 2) += u[5];
  m(2, 0) += u[6];
  m(2, 1) += u[7];
  return Homography::from_matrix(from_norm_ * m * to_norm_);
}

std::vector<double> ParamNormalizer::from_homography(const Homography& h) const {
  Eigen::Matrix3d m = to_norm_ * h.matrix() * from_norm_;
  m /= m(2, 2);
  return {m(0, 0) - 1, m(0, 1), m(0, 2), m(1, 0), m(1, 1) - 1, m(1, 2), m(2, 0), m(2, 1)};
}

// Objective -------------------------------------------------------------------

CalibrationObjective::CalibrationObjective(const CalibrationProblem& problem,
                                           const CalibConfig& cfg)
    : problem_(problem), cfg_(cfg), normalizer_(problem.left.width, problem.left.height) {
  if (problem.left.width != problem.right.width || problem.left.height != problem.right.height) {
    throw Error(ErrorCode::DimensionMismatch, "stereo images differ in size");
  }
  if (!problem.mono.depth.same_shape(problem.left.width, problem.left.height)) {
    throw Error(ErrorCode::DimensionMismatch, "mono reference differs in size from the images");
  }
}

int CalibrationObjective::dimension() const { return cfg_.side == WarpSide::Both ? 16 : 8; }

WarpPair CalibrationObjective::warps_from_params(std::span<const double> params) const {
  if (static_cast<int>(params.size()) != dimension()) {
    throw Error(ErrorCode::InvalidSpec, "wrong number of homography parameters");
  }
  WarpPair w;
  switch (cfg_.side) {
    case WarpSide::Left: w.left = Homography::from_params(params.subspan(0, 8)); break;
    case WarpSide::Right: w.right = Homography::from_params(params.subspan(0, 8)); break;
    case WarpSide::Both:
      w.left = Homography::from_params(params.subspan(0, 8));
      w.right = Homography::from_params(params.subspan(8, 8));
      break;
  }
  return w;
}

WarpPair CalibrationObjective::warps_from_normalized(std::span<const double> u) const {
  WarpPair w;
  switch (cfg_.side) {
    case WarpSide::Left: w.left = normalizer_.to_homography(u.subspan(0, 8)); break;
    case WarpSide::Right: w.right = normalizer_.to_homography(u.subspan(0, 8)); break;
    case WarpSide::Both:
      w.left = normalizer_.to_homography(u.subspan(0, 8));
      w.right = normalizer_.to_homography(u.subspan(8, 8));
      break;
  }
  return w;
}

namespace {

bool is_identity(const Homography& h) { return h.matrix() == Eigen::Matrix3d::Identity(); }

}  // namespace

DepthMap CalibrationObjective::stereo_depth(const WarpPair& warps) const {
  const Image left = is_identity(warps.left) ? problem_.left : warp_image(problem_.left, warps.left);
  const Image right =
      is_identity(warps.right) ? problem_.right : warp_image(problem_.right, warps.right);
  StereoViews views = match_stereo_views(left, right, problem_.rig, problem_.matcher);
  return cfg_.reference == ReferenceCamera::Left ? std::move(views.left_depth)
                                                 : std::move(views.right_depth);
}

ObjectiveValue CalibrationObjective::evaluate(const WarpPair& warps) const {
  if (!warps.left.is_invertible() || !warps.right.is_invertible()) {
    return {kInf, 0, 0.0};
  }
  const DepthMap stereo = stereo_depth(warps);
  const Homography& ref_warp =
      cfg_.reference == ReferenceCamera::Left ? warps.left : warps.right;
  DepthMap ref = is_identity(ref_warp) ? problem_.mono.depth : warp_map(problem_.mono.depth, ref_warp);

  if (problem_.mono.relative) {
    try {
      ref = align_scale_shift(ref, stereo).aligned;
    } catch (const Error&) {
      return {kInf, 0, 0.0};
    }
  }

  // Nearer than the disparity search reaches, stereo cannot be right; such
  // pixels would only measure the matcher's failure mode.
  const double z_reach = problem_.rig.focal_px * problem_.rig.baseline / problem_.matcher.max_disp;
  for (int y = 0; y < ref.height(); ++y) {
    for (int x = 0; x < ref.width(); ++x) {
      if (ref.valid(x, y) && ref.value(x, y) < z_reach) ref.invalidate(x, y);
    }
  }

  LossValue lv;
  if (cfg_.loss_space == LossSpace::Depth) {
    lv = consistency_loss(ref, stereo, cfg_.loss_kind);
  } else {
    for (auto& v : ref.values().data()) {
      if (!(v > 0.0)) v = std::numeric_limits<double>::min();
    }
    lv = consistency_loss(depth_to_disparity(ref, problem_.rig),
                          depth_to_disparity(stereo, problem_.rig), cfg_.loss_kind);
  }
  return {lv.loss, lv.n_valid, static_cast<double>(lv.n_valid) / static_cast<double>(stereo.size())};
}

ObjectiveValue CalibrationObjective::evaluate_normalized(std::span<const double> u) const {
  try {
    return evaluate(warps_from_normalized(u));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SingularHomography) return {kInf, 0, 0.0};
    throw;
  }
}

double calibration_objective(const CalibrationProblem& problem, std::span<const double> params,
                             const CalibConfig& cfg) {
  const CalibrationObjective obj(problem, cfg);
  return obj.evaluate(obj.warps_from_params(params)).loss;
}

// Optimizers -----------------------------------------------------------------

namespace {

struct Trajectory {
  std::vector<double> best_u;
  double best_loss = kInf;
  double best_overlap = 0.0;
  std::vector<double> trace;
  bool converged = false;
  int evaluations = 0;
};

class Counted {
 public:
  explicit Counted(const CalibrationObjective& obj) : obj_(obj) {}
  ObjectiveValue operator()(std::span<const double> u) {
    ++count;
    return obj_.evaluate_normalized(u);
  }
  int count = 0;

 private:
  const CalibrationObjective& obj_;
};

// Relative improvement of the best loss over the last `patience` steps.
bool stalled(const std::vector<double>& best_history, int patience) {
  const size_t n = best_history.size();
  if (n <= static_cast<size_t>(patience)) return false;
  const double before = best_history[n - 1 - patience];
  const double now = best_history.back();
  if (!std::isfinite(before) || !std::isfinite(now)) return false;
  return (before - now) <= 1e-4 * std::abs(before);
}

Trajectory run_adam(Counted& f, std::vector<double> u, const CalibConfig& cfg) {
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  const size_t dim = u.size();
  std::vector<double> m(dim, 0.0), v(dim, 0.0), g(dim, 0.0), probe(dim);

  Trajectory t;
  const ObjectiveValue start = f(u);
  t.best_u = u;
  t.best_loss = start.loss;
  t.best_overlap = start.overlap_fraction;
  t.trace.push_back(start.loss);
  std::vector<double> best_history{t.best_loss};

  for (int step = 1; step <= cfg.steps; ++step) {
    for (size_t i = 0; i < dim; ++i) {
      probe = u;
      probe[i] = u[i] + cfg.fd_epsilon;
      const double fp = f(probe).loss;
      probe[i] = u[i] - cfg.fd_epsilon;
      const double fm = f(probe).loss;
      if (std::isfinite(fp) && std::isfinite(fm)) {
        g[i] = (fp - fm) / (2.0 * cfg.fd_epsilon);
      } else {
        g[i] = 0.0;
      }
    }
    const double c1 = 1.0 - std::pow(kBeta1, step);
    const double c2 = 1.0 - std::pow(kBeta2, step);
    // Cosine decay lets late steps settle instead of oscillating.
    const double lr = cfg.step_size * 0.5 *
                      (1.0 + std::cos(std::numbers::pi * (step - 1) / std::max(1, cfg.steps)));
    for (size_t i = 0; i < dim; ++i) {
      m[i] = kBeta1 * m[i] + (1 - kBeta1) * g[i];
      v[i] = kBeta2 * v[i] + (1 - kBeta2) * g[i] * g[i];
      u[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + kEps);
    }
    const ObjectiveValue cur = f(u);
    t.trace.push_back(cur.loss);
    if (cur.loss < t.best_loss) {
      t.best_loss = cur.loss;
      t.best_u = u;
      t.best_overlap = cur.overlap_fraction;
    }
    best_history.push_back(t.best_loss);
    if (stalled(best_history, cfg.patience)) {
      t.converged = true;
      break;
    }
  }
  return t;
}

Trajectory run_nelder_mead(Counted& f, const std::vector<double>& u0, const CalibConfig& cfg) {
  const size_t dim = u0.size();
  struct Vertex {
    std::vector<double> u;
    double loss;
    double overlap;
  };
  auto eval = [&](std::vector<double> u) {
    const ObjectiveValue v = f(u);
    return Vertex{std::move(u), v.loss, v.overlap_fraction};
  };
  std::vector<Vertex> simplex;
  simplex.push_back(eval(u0));
  for (size_t i = 0; i < dim; ++i) {
    std::vector<double> u = u0;
    u[i] += cfg.simplex_size;
    simplex.push_back(eval(std::move(u)));
  }
  auto order = [&] {
    std::stable_sort(simplex.begin(), simplex.end(),
                     [](const Vertex& a, const Vertex& b) { return a.loss < b.loss; });
  };
  order();

  Trajectory t;
  t.trace.push_back(simplex.front().loss);
  std::vector<double> best_history{simplex.front().loss};
  auto along = [&](const std::vector<double>& c, const std::vector<double>& x, double coef) {
    std::vector<double> out(dim);
    for (size_t i = 0; i < dim; ++i) out[i] = c[i] + coef * (x[i] - c[i]);
    return out;
  };

  for (int it = 0; it < cfg.steps; ++it) {
    std::vector<double> centroid(dim, 0.0);
    for (size_t k = 0; k < dim; ++k) {
      for (size_t i = 0; i < dim; ++i) centroid[i] += simplex[k].u[i] / static_cast<double>(dim);
    }
    Vertex& worst = simplex.back();
    Vertex refl = eval(along(centroid, worst.u, -1.0));
    if (refl.loss < simplex.front().loss) {
      Vertex exp = eval(along(centroid, worst.u, -2.0));
      worst = exp.loss < refl.loss ? std::move(exp) : std::move(refl);
    } else if (refl.loss < simplex[dim - 1].loss) {
      worst = std::move(refl);
    } else {
      const bool outside = refl.loss < worst.loss;
      Vertex con = eval(along(centroid, outside ? refl.u : worst.u, 0.5));
      if (con.loss < std::min(refl.loss, worst.loss)) {
        worst = std::move(con);
      } else {
        for (size_t k = 1; k <= dim; ++k) {
          simplex[k] = eval(along(simplex.front().u, simplex[k].u, 0.5));
        }
      }
    }
    order();
    t.trace.push_back(simplex.front().loss);
    best_history.push_back(simplex.front().loss);
    if (stalled(best_history, cfg.patience)) {
      t.converged = true;
      break;
    }
  }
  t.best_u = simplex.front().u;
  t.best_loss = simplex.front().loss;
  t.best_overlap = simplex.front().overlap;
  return t;
}

}  // namespace

CalibResult calibrate(const CalibrationProblem& problem, const CalibConfig& cfg) {
  cfg.validate();
  problem.matcher.validate();
  const CalibrationObjective objective(problem, cfg);
  const double coverage = static_cast<double>(problem.mono.depth.count_valid()) /
                          static_cast<double>(problem.mono.depth.size());
  if (coverage < 0.05) {
    throw Error(ErrorCode::InsufficientOverlap, "mono reference covers less than 5% of the frame");
  }

  const int dim = objective.dimension();
  const uint64_t restart_seed = derive_seed(cfg.seed, "calibrate.restart");
  Counted f(objective);
  Trajectory best;
  double initial_loss = kInf;
  for (int r = 0; r < cfg.restarts; ++r) {
    std::vector<double> u0(dim, 0.0);
    if (r > 0) {
      for (int i = 0; i < dim; ++i) {
        u0[i] = cfg.restart_sigma *
                counter_normal(restart_seed, static_cast<uint64_t>(r) * dim + i);
      }
    }
    Trajectory t = cfg.optimizer == OptimizerKind::AdamLike ? run_adam(f, u0, cfg)
                                                             : run_nelder_mead(f, u0, cfg);
    if (r == 0) initial_loss = t.trace.front();
    spdlog::debug("calibrate restart {}: {} -> {} ({} steps)", r, t.trace.front(), t.best_loss,
                  t.trace.size() - 1);
    if (r == 0 || t.best_loss < best.best_loss) {
      std::vector<double> trace = std::move(best.trace);
      best = std::move(t);
      if (r > 0) {
        trace.insert(trace.end(), best.trace.begin(), best.trace.end());
        best.trace = std::move(trace);
      }
    } else {
      best.trace.insert(best.trace.end(), t.trace.begin(), t.trace.end());
    }
  }
  if (!std::isfinite(best.best_loss)) {
    throw Error(ErrorCode::NoProgress, "no evaluated homography produced a finite loss");
  }

  CalibResult out;
  out.warps = objective.warps_from_normalized(best.best_u);
  out.homography = cfg.side == WarpSide::Right ? out.warps.right : out.warps.left;
  out.loss_trace = std::move(best.trace);
  out.initial_loss = initial_loss;
  out.final_loss = best.best_loss;
  out.valid_overlap_fraction = best.best_overlap;
  out.converged = best.converged;
  out.evaluations = f.count;
  return out;
}

// Landscape ------------------------------------------------------------------

AngleGrid parse_angle_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 4) throw Error(ErrorCode::ConfigError, "grid must be axis:lo:hi:count");
  AngleGrid g;
  g.axis = parse_axis(parts[0]);
  double lo = 0.0, hi = 0.0;
  int count = 0;
  try {
    lo = std::stod(parts[1]);
    hi = std::stod(parts[2]);
    count = std::stoi(parts[3]);
  } catch (const std::exception&) {
    throw Error(ErrorCode::ConfigError, "bad grid: " + text);
  }
  if (count < 1 || (count > 1 && !(hi > lo))) {
    throw Error(ErrorCode::ConfigError, "grid needs count >= 1 and lo < hi: " + text);
  }
  for (int i = 0; i < count; ++i) {
    const double deg = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
    g.angles_rad.push_back(deg * std::numbers::pi / 180.0);
  }
  return g;
}

namespace {

bool contains_zero(const AngleGrid& g) {
  return std::any_of(g.angles_rad.begin(), g.angles_rad.end(),
                     [](double a) { return std::abs(a) < 1e-12; });
}

}  // namespace

std::vector<std::vector<double>> landscape_scan(const CalibrationProblem& problem,
                                                const CalibConfig& cfg, const AngleGrid& axis1,
                                                const AngleGrid& axis2, WarpSide side) {
  if (axis1.angles_rad.empty() || axis2.angles_rad.empty()) {
    throw Error(ErrorCode::InvalidRange, "landscape grids must be non-empty");
  }
  if (!contains_zero(axis1) || !contains_zero(axis2)) {
    throw Error(ErrorCode::InvalidRange, "landscape grids must contain 0");
  }
  if (side == WarpSide::Both) throw Error(ErrorCode::InvalidSpec, "landscape rotates one side");
  CalibConfig c = cfg;
  c.side = side;
  const CalibrationObjective objective(problem, c);
  const Intrinsics& k = problem.rig.intrinsics;

  std::vector<std::vector<double>> out(axis1.angles_rad.size(),
                                       std::vector<double>(axis2.angles_rad.size(), 0.0));
  for (size_t i = 0; i < axis1.angles_rad.size(); ++i) {
    for (size_t j = 0; j < axis2.angles_rad.size(); ++j) {
      const Homography h = compose(rotation_homography(axis1.axis, axis1.angles_rad[i], k),
                                   rotation_homography(axis2.axis, axis2.angles_rad[j], k));
      WarpPair w;
      (side == WarpSide::Left ? w.left : w.right) = h;
      out[i][j] = objective.evaluate(w).loss;
    }
  }
  return out;
}

int count_local_minima(const std::vector<std::vector<double>>& grid) {
  int count = 0;
  const int n1 = static_cast<int>(grid.size());
  for (int i = 0; i < n1; ++i) {
    const int n2 = static_cast<int>(grid[i].size());
    for (int j = 0; j < n2; ++j) {
      const double v = grid[i][j];
      bool minimum = true;
      const int di[4] = {-1, 1, 0, 0};
      const int dj[4] = {0, 0, -1, 1};
      for (int k = 0; k < 4 && minimum; ++k) {
        const int a = i + di[k];
        const int b = j + dj[k];
        if (a < 0 || a >= n1 || b < 0 || b >= static_cast<int>(grid[a].size())) continue;
        if (!(v < grid[a][b])) minimum = false;
      }
      count += minimum;
    }
  }
  return count;
}

// Frame selection ------------------------------------------------------------

std::vector<FrameScore> select_calibration_frames(std::span<const DepthMap> depths,
                                                  const DefocusModel& m, const PsiRange& r,
                                                  size_t k) {
  const DepthRange range = valid_depth_range(m, r);
  std::vector<FrameScore> scores;
  scores.reserve(depths.size());
  for (size_t i = 0; i < depths.size(); ++i) {
    const DepthMap& d = depths[i];
    size_t valid = 0, inside = 0;
    for (int y = 0; y < d.height(); ++y) {
      for (int x = 0; x < d.width(); ++x) {
        if (!d.valid(x, y)) continue;
        ++valid;
        inside += range.contains(d.value(x, y));
      }
    }
    scores.push_back({i, valid ? static_cast<double>(inside) / static_cast<double>(valid) : 0.0});
  }
  std::stable_sort(scores.begin(), scores.end(),
                   [](const FrameScore& a, const FrameScore& b) { return a.fraction > b.fraction; });
  if (scores.size() > k) scores.resize(k);
  return scores;
}

std::vector<FrameScore> select_calibration_frames(const DatasetManifest& manifest,
                                                  const std::filesystem::path& base_dir,
                                                  const PsiRange& r, size_t k) {
  if (manifest.records.empty()) throw Error(ErrorCode::EmptyManifest, "manifest has no records");
  std::vector<DepthMap> depths;
  depths.reserve(manifest.records.size());
  for (const ManifestRecord& rec : manifest.records) {
    depths.push_back(read_pfm<DepthTag>(base_dir / rec.gt_depth_path));
  }
  return select_calibration_frames(depths, manifest.records.front().defocus_left, r, k);
}

// Drift ----------------------------------------------------------------------

DriftMonitor::DriftMonitor(double baseline, DriftConfig cfg) : baseline_(baseline), cfg_(cfg) {
  if (cfg_.window < 1) throw Error(ErrorCode::InvalidSpec, "drift window must be >= 1");
}

DriftMonitor::Update DriftMonitor::push(double frame_loss) {
  if (recent_.size() < static_cast<size_t>(cfg_.window)) {
    recent_.push_back(frame_loss);
  } else {
    recent_[next_] = frame_loss;
    next_ = (next_ + 1) % recent_.size();
  }
  double sum = 0.0;
  for (double v : recent_) sum += v;
  const double mean = sum / static_cast<double>(recent_.size());
  return {frame_loss, mean, mean > cfg_.alpha * baseline_};
}

DriftReport drift_from_losses(std::span<const double> losses, double baseline,
                              const DriftConfig& cfg) {
  DriftMonitor monitor(baseline, cfg);
  DriftReport report;
  for (size_t i = 0; i < losses.size(); ++i) {
    const DriftMonitor::Update u = monitor.push(losses[i]);
    report.frame_loss.push_back(u.loss);
    report.rolling_mean.push_back(u.rolling_mean);
    if (u.alarm && !report.alarm_frame) report.alarm_frame = i;
  }
  return report;
}

DriftReport drift_score(std::span<const DepthPair> stream, double baseline, const DriftConfig& cfg,
                        LossKind kind) {
  std::vector<double> losses;
  losses.reserve(stream.size());
  for (const DepthPair& p : stream) losses.push_back(consistency_loss(p.mono, p.stereo, kind).loss);
  return drift_from_losses(losses, baseline, cfg);
}

}  // namespace monster
