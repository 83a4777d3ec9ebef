#include "cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <numbers>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "cli/config.hpp"
#include "monster/io.hpp"
#include "monster/parallel.hpp"
#include "monster/pipeline.hpp"
#include "monster/random.hpp"

namespace monster::cli {

namespace fs = std::filesystem;

namespace {

void setup_logging() {
  static std::once_flag once;
  std::call_once(once, [] {
    auto logger = spdlog::stderr_color_mt("monster");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
  });
  spdlog::level::level_enum level = spdlog::level::info;
  if (const char* env = std::getenv("MONSTER_LOG")) {
    const std::string v = env;
    if (v == "error") level = spdlog::level::err;
    else if (v == "warn") level = spdlog::level::warn;
    else if (v == "info") level = spdlog::level::info;
    else if (v == "debug") level = spdlog::level::debug;
  }
  spdlog::set_level(level);
}

int resolve_jobs(int jobs) {
  if (jobs > 0) return jobs;
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs fn(i) for every record. Records run concurrently when there are enough
// of them; otherwise the kernels inside a record get the threads. Either way
// each record's outputs depend only on its inputs.
void for_each_record(int n, int jobs, const std::function<void(int)>& fn) {
  if (jobs <= 1 || n <= 1) {
    set_num_threads(jobs);
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  set_num_threads(1);
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (int t = 0; t < std::min(jobs, n); ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string());
}

std::ofstream open_out(const fs::path& file) {
  std::ofstream out(file);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + file.string());
  return out;
}

std::string g17(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", v);
}

struct LoadedManifest {
  DatasetManifest manifest;
  fs::path base;
};

LoadedManifest load_manifest(const std::string& path) {
  if (path.empty()) throw Error(ErrorCode::ConfigError, "--manifest is required");
  const fs::path p(path);
  return {read_manifest(p), p.parent_path()};
}

MonoSimSpec mono_for(const RunConfig& cfg, const ManifestRecord& rec) {
  MonoSimSpec m = cfg.mono;
  m.rng_seed = hash_combine(derive_seed(cfg.seed, "mono"), rec.seed);
  return m;
}

CalibConfig calib_for(const RunConfig& cfg, const ManifestRecord& rec) {
  CalibConfig c = cfg.calib;
  c.seed = hash_combine(derive_seed(cfg.seed, "calibrate"), rec.seed);
  return c;
}

std::string key_value(const RunConfig& cfg, const std::string& name) {
  for (const ConfigKey& k : config_keys()) {
    if (k.name == name) return k.get(cfg);
  }
  return {};
}

// simulate ------------------------------------------------------------------

int cmd_simulate(const RunConfig& cfg) {
  DatasetOptions o;
  o.count = cfg.count;
  o.scene_template = cfg.scene;
  o.rig = cfg.rig();
  o.defocus_left = cfg.defocus_left();
  o.defocus_right = cfg.defocus_right();
  o.decalibration = parse_decalibration(cfg.decalib, o.rig.intrinsics);
  o.image_noise_sigma = cfg.image_noise;
  o.pan_px = cfg.pan_px;
  o.seed = cfg.seed;
  set_num_threads(resolve_jobs(cfg.jobs));
  const DatasetManifest m = build_dataset(o, cfg.output);
  spdlog::info("wrote {} records to {}", m.records.size(), (fs::path(cfg.output) / "manifest.yaml").string());
  return kOk;
}

// calibrate -----------------------------------------------------------------

void write_calib_result(const fs::path& dir, const ManifestRecord& rec,
                        const CalibrationReport& rep) {
  const std::string stem = fmt::format("record_{:04d}", rec.id);
  {
    std::ofstream out = open_out(dir / (stem + "_calib.yaml"));
    const auto write_h = [&](const char* name, const Homography& h) {
      out << name << ": [";
      const auto p = h.params();
      for (size_t i = 0; i < p.size(); ++i) out << (i ? ", " : "") << g17(p[i]);
      out << "]\n";
    };
    out << "record: " << rec.id << "\n";
    write_h("homography", rep.result.homography);
    write_h("left_warp", rep.result.warps.left);
    write_h("right_warp", rep.result.warps.right);
    out << "initial_loss: " << g17(rep.result.initial_loss) << "\n";
    out << "final_loss: " << g17(rep.result.final_loss) << "\n";
    out << "valid_overlap_fraction: " << g17(rep.result.valid_overlap_fraction) << "\n";
    out << "converged: " << (rep.result.converged ? "true" : "false") << "\n";
    out << "evaluations: " << rep.result.evaluations << "\n";
    out << "l1_vs_gt: " << g17(rep.l1_vs_gt) << "\n";
    out << "rel_l1_vs_gt: " << g17(rep.rel_l1_vs_gt) << "\n";
    out << "corner_err_px: " << g17(rep.corner_err_px) << "\n";
  }
  std::ofstream trace = open_out(dir / (stem + "_trace.csv"));
  trace << "step,loss\n";
  for (size_t i = 0; i < rep.result.loss_trace.size(); ++i) {
    trace << i << "," << g17(rep.result.loss_trace[i]) << "\n";
  }
}

int cmd_calibrate(const RunConfig& cfg, const std::string& manifest_path) {
  const LoadedManifest lm = load_manifest(manifest_path);
  const fs::path out_dir = cfg.output;
  ensure_dir(out_dir);
  const auto& records = lm.manifest.records;
  const int n = static_cast<int>(records.size());
  std::vector<std::optional<CalibrationReport>> reports(n);
  std::vector<std::string> failures(n);

  for_each_record(n, resolve_jobs(cfg.jobs), [&](int i) {
    const ManifestRecord& meta = records[i];
    const LoadedRecord rec = load_record(meta, lm.base);
    const CalibConfig cc = calib_for(cfg, meta);
    const CalibrationCase c =
        make_calibration_case(rec, meta, mono_for(cfg, meta), cfg.matcher, cc.reference, cfg.psi);
    try {
      reports[i] = run_calibration(c, cc);
      write_calib_result(out_dir, meta, *reports[i]);
      spdlog::info("record {}: loss {:.5g} -> {:.5g}, corner error {:.3f} px", meta.id,
                   reports[i]->result.initial_loss, reports[i]->result.final_loss,
                   reports[i]->corner_err_px);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoProgress) throw;
      failures[i] = e.what();
      spdlog::warn("record {}: {}", meta.id, e.what());
    }
  });

  std::ofstream summary = open_out(out_dir / "calibration_summary.csv");
  summary << "record,init_loss,final_loss,L1_vs_gt,relL1_vs_gt,corner_err_px\n";
  double l1 = 0.0, rel = 0.0;
  int ok = 0;
  for (int i = 0; i < n; ++i) {
    if (!reports[i]) {
      summary << records[i].id << ",nan,nan,nan,nan,nan\n";
      continue;
    }
    const CalibrationReport& r = *reports[i];
    summary << records[i].id << "," << g17(r.result.initial_loss) << "," << g17(r.result.final_loss)
            << "," << g17(r.l1_vs_gt) << "," << g17(r.rel_l1_vs_gt) << "," << g17(r.corner_err_px)
            << "\n";
    l1 += r.l1_vs_gt;
    rel += r.rel_l1_vs_gt;
    ++ok;
  }
  std::ofstream table = open_out(out_dir / "calibration_table.csv");
  const std::string side = key_value(cfg, "calibration.side");
  const std::string mono = key_value(cfg, "mono.mode");
  table << "method,records,L1,relL1\n";
  table << side << "+" << mono << "," << ok << "," << (ok ? g17(l1 / ok) : "nan") << ","
        << (ok ? g17(rel / ok) : "nan") << "\n";
  const bool partial = std::any_of(failures.begin(), failures.end(),
                                   [](const std::string& s) { return !s.empty(); });
  return partial ? kPartialFailure : kOk;
}

// landscape -----------------------------------------------------------------

// Maps t in [0,1] onto a dark-blue -> teal -> yellow ramp.
std::array<double, 3> ramp(double t) {
  static const std::array<std::array<double, 3>, 5> stops{{{0.27, 0.00, 0.33},
                                                           {0.23, 0.32, 0.55},
                                                           {0.13, 0.57, 0.55},
                                                           {0.37, 0.79, 0.38},
                                                           {0.99, 0.91, 0.14}}};
  t = std::clamp(t, 0.0, 1.0) * (stops.size() - 1);
  const size_t i = std::min(static_cast<size_t>(t), stops.size() - 2);
  const double f = t - i;
  return {stops[i][0] * (1 - f) + stops[i + 1][0] * f, stops[i][1] * (1 - f) + stops[i + 1][1] * f,
          stops[i][2] * (1 - f) + stops[i + 1][2] * f};
}

void write_heatmap(const fs::path& file, const std::vector<std::vector<double>>& grid) {
  constexpr int kCell = 12;
  const int rows = static_cast<int>(grid.size());
  const int cols = static_cast<int>(grid.front().size());
  double lo = HUGE_VAL, hi = -HUGE_VAL;
  for (const auto& row : grid) {
    for (double v : row) {
      if (!std::isfinite(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  // axis1 runs left to right, axis2 bottom to top
  Image img(rows * kCell, cols * kCell, 3, 0.0);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const double v = grid[i][j];
      const double t = std::isfinite(v) && hi > lo ? (v - lo) / (hi - lo) : 1.0;
      const auto c = std::isfinite(v) ? ramp(t) : std::array<double, 3>{1.0, 1.0, 1.0};
      for (int y = 0; y < kCell; ++y) {
        for (int x = 0; x < kCell; ++x) {
          for (int ch = 0; ch < 3; ++ch) img.at(i * kCell + x, (cols - 1 - j) * kCell + y, ch) = c[ch];
        }
      }
    }
  }
  write_png(file, img, PngDepth::Bits8);
}

int cmd_landscape(const RunConfig& cfg, const std::string& manifest_path) {
  const AngleGrid a1 = parse_angle_grid(cfg.axis1);
  const AngleGrid a2 = parse_angle_grid(cfg.axis2);
  const auto has_zero = [](const AngleGrid& g) {
    return std::any_of(g.angles_rad.begin(), g.angles_rad.end(),
                       [](double a) { return std::abs(a) < 1e-12; });
  };
  if (!has_zero(a1) || !has_zero(a2)) {
    throw Error(ErrorCode::ConfigError, "landscape grids must contain 0");
  }
  const LoadedManifest lm = load_manifest(manifest_path);
  const auto& records = lm.manifest.records;
  const auto it = std::find_if(records.begin(), records.end(),
                               [&](const ManifestRecord& r) { return r.id == cfg.record; });
  if (it == records.end()) {
    throw Error(ErrorCode::ConfigError, fmt::format("record {} not in manifest", cfg.record));
  }
  set_num_threads(resolve_jobs(cfg.jobs));
  const LoadedRecord rec = load_record(*it, lm.base);
  const CalibConfig cc = calib_for(cfg, *it);
  const CalibrationCase c =
      make_calibration_case(rec, *it, mono_for(cfg, *it), cfg.matcher, cc.reference, cfg.psi);
  const auto grid = landscape_scan(c.problem, cc, a1, a2, WarpSide::Right);

  const fs::path out_dir = cfg.output;
  ensure_dir(out_dir);
  std::ofstream csv = open_out(out_dir / "landscape.csv");
  csv << "axis1_deg,axis2_deg,loss\n";
  size_t bi = 0, bj = 0;
  for (size_t i = 0; i < grid.size(); ++i) {
    for (size_t j = 0; j < grid[i].size(); ++j) {
      csv << g17(a1.angles_rad[i] * 180.0 / std::numbers::pi) << ","
          << g17(a2.angles_rad[j] * 180.0 / std::numbers::pi) << "," << g17(grid[i][j]) << "\n";
      if (grid[i][j] < grid[bi][bj]) bi = i, bj = j;
    }
  }
  write_heatmap(out_dir / "landscape.png", grid);
  std::cout << fmt::format("minimum at ({:.3f} deg, {:.3f} deg), loss {:.6g}; local minima {}\n",
                           a1.angles_rad[bi] * 180.0 / std::numbers::pi,
                           a2.angles_rad[bj] * 180.0 / std::numbers::pi, grid[bi][bj],
                           count_local_minima(grid));
  return kOk;
}

// fuse ----------------------------------------------------------------------

std::vector<FusionMode> parse_policies(const std::string& list) {
  std::vector<FusionMode> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_fusion_mode(item));
  }
  if (out.empty()) throw Error(ErrorCode::ConfigError, "fusion.policies is empty");
  return out;
}

int cmd_fuse(const RunConfig& cfg, const std::string& manifest_path) {
  const std::vector<FusionMode> modes = parse_policies(cfg.fusion_policies);
  const LoadedManifest lm = load_manifest(manifest_path);
  const auto& records = lm.manifest.records;
  const int n = static_cast<int>(records.size());
  const fs::path out_dir = cfg.output;
  ensure_dir(out_dir);

  const DepthRange range{cfg.scene.depth_min, cfg.scene.depth_max};
  const std::vector<DepthBin> bins = inverse_depth_bins(range, cfg.mape_bins);
  const FusionPolicy gate = cfg.fusion_policy(FusionMode::RangeGated);

  // Per record: stereo, mono, then one per policy.
  const size_t methods = 2 + modes.size();
  std::vector<std::vector<EvalAccumulator>> acc(n);
  std::vector<std::vector<std::pair<double, size_t>>> masked(n);  // (sum of rel error, count)

  for_each_record(n, resolve_jobs(cfg.jobs), [&](int i) {
    const ManifestRecord& meta = records[i];
    const LoadedRecord rec = load_record(meta, lm.base);
    MonoSimSpec mono = mono_for(cfg, meta);
    mono.out_of_range = cfg.fusion_mono_out_of_range;
    const FusionInputs in = make_fusion_inputs(rec, meta, mono, cfg.fusion_matcher(), cfg.psi);
    std::vector<const DepthMap*> preds{&in.stereo.depth, &in.mono.depth};
    std::vector<FusionResult> fused;
    fused.reserve(modes.size());
    for (FusionMode m : modes) {
      fused.push_back(fuse({in.stereo.depth, in.stereo.confidence},
                           {in.mono.depth, in.mono.confidence}, cfg.fusion_policy(m)));
      const std::string stem = fmt::format("record_{:04d}_{}", meta.id, to_string(m));
      write_pfm(out_dir / (stem + "_depth.pfm"), fused.back().depth);
      write_label_png(out_dir / (stem + "_source.png"), fused.back().source_mask);
    }
    for (const FusionResult& f : fused) preds.push_back(&f.depth);
    acc[i].assign(methods, EvalAccumulator(bins));
    for (size_t k = 0; k < methods; ++k) {
      acc[i][k].add(*preds[k], in.gt);
      const BinStats s = masked_rel_l1(*preds[k], in.gt, gate.mono_range);
      masked[i].push_back({s.mape / 100.0 * static_cast<double>(s.count), s.count});
    }
  });

  std::vector<std::string> names{"stereo", "mono"};
  for (FusionMode m : modes) names.push_back("fused_" + to_string(m));
  std::vector<EvalReport> reports;
  std::vector<std::pair<double, size_t>> masked_total(methods, {0.0, 0});
  for (size_t k = 0; k < methods; ++k) {
    EvalAccumulator total(bins);
    for (int i = 0; i < n; ++i) {
      total.merge(acc[i][k]);
      masked_total[k].first += masked[i][k].first;
      masked_total[k].second += masked[i][k].second;
    }
    reports.push_back(total.report());
  }
  write_eval_csv(out_dir / "fusion_report.csv", names, reports);

  std::ofstream txt = open_out(out_dir / "fusion_report.txt");
  txt << fmt::format("{} records; MAPE bins uniform in 1/z over [{}, {}] m\n\n", n, range.z_near,
                     range.z_far);
  for (size_t k = 0; k < methods; ++k) txt << format_report(names[k], reports[k]) << "\n";
  txt << fmt::format("Masked rel-L1: gt in [{:.4f}, {:.4f}] m (both bounds applied)\n",
                     gate.mono_range.z_near, gate.mono_range.z_far);
  for (size_t k = 0; k < methods; ++k) {
    const auto& [sum, cnt] = masked_total[k];
    txt << fmt::format("  {:<22} {:.6f}  (n={})\n", names[k],
                       cnt ? sum / static_cast<double>(cnt) : std::nan(""), cnt);
  }
  std::cout << fmt::format("rel-L1  stereo {:.4f}  mono {:.4f}", reports[0].rel_l1, reports[1].rel_l1);
  for (size_t k = 2; k < methods; ++k) std::cout << fmt::format("  {} {:.4f}", names[k], reports[k].rel_l1);
  std::cout << "\n";
  return kOk;
}

// drift ---------------------------------------------------------------------

int cmd_drift(const RunConfig& cfg, const std::string& manifest_path) {
  const LoadedManifest lm = load_manifest(manifest_path);
  const auto& records = lm.manifest.records;
  const int n = static_cast<int>(records.size());
  if (cfg.baseline_frames > n) {
    throw Error(ErrorCode::ConfigError, "drift.baseline_frames exceeds the number of frames");
  }
  if (cfg.inject_at >= 0 && cfg.inject_at < cfg.baseline_frames) {
    throw Error(ErrorCode::ConfigError, "drift.inject_at must come after the baseline frames");
  }
  const DecalDistribution inj = parse_decalibration(cfg.inject, cfg.rig().intrinsics);
  if (cfg.inject_at >= 0 && inj.kind != DecalKind::Fixed) {
    throw Error(ErrorCode::ConfigError, "drift.inject must be a fixed decalibration");
  }

  std::vector<double> losses(n);
  for_each_record(n, resolve_jobs(cfg.jobs), [&](int i) {
    ManifestRecord meta = records[i];
    LoadedRecord rec = load_record(meta, lm.base);
    if (cfg.inject_at >= 0 && i >= cfg.inject_at) {
      const Homography prior =
          meta.decalibration ? Homography::from_params(*meta.decalibration) : Homography{};
      rec.left = decalibrate(rec.left, inj.fixed);
      meta.decalibration = compose(inj.fixed, prior).params();
    }
    const CalibConfig cc = calib_for(cfg, meta);
    const CalibrationCase c =
        make_calibration_case(rec, meta, mono_for(cfg, meta), cfg.matcher, cc.reference, cfg.psi);
    losses[i] = frame_consistency(c.problem, cc);
  });

  double baseline = 0.0;
  for (int i = 0; i < cfg.baseline_frames; ++i) baseline += losses[i];
  baseline /= cfg.baseline_frames;
  const DriftReport rep = drift_from_losses(losses, baseline, cfg.drift);

  const fs::path out_dir = cfg.output;
  ensure_dir(out_dir);
  std::ofstream csv = open_out(out_dir / "drift.csv");
  csv << "frame,loss,rolling_mean,alarm\n";
  for (int i = 0; i < n; ++i) {
    csv << i << "," << g17(rep.frame_loss[i]) << "," << g17(rep.rolling_mean[i]) << ","
        << (rep.rolling_mean[i] > cfg.drift.alpha * baseline ? 1 : 0) << "\n";
  }
  std::ofstream summary = open_out(out_dir / "drift_summary.yaml");
  const std::string alarm = rep.alarm_frame ? std::to_string(*rep.alarm_frame) : "none";
  summary << "baseline: " << g17(baseline) << "\n";
  summary << "alpha: " << g17(cfg.drift.alpha) << "\n";
  summary << "window: " << cfg.drift.window << "\n";
  summary << "inject_at: " << (cfg.inject_at >= 0 ? std::to_string(cfg.inject_at) : "none") << "\n";
  summary << "alarm_frame: " << alarm << "\n";
  std::cout << "alarm_frame: " << alarm << "\n";
  return kOk;
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidSpec:
    case ErrorCode::InvalidRange:
      return kConfigError;
    case ErrorCode::IoError:
    case ErrorCode::EmptyManifest:
      return kIoError;
    default:
      return kPartialFailure;
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  setup_logging();
  CLI::App app{"Stereo self-calibration and mono/stereo depth fusion toolkit.", "monster"};
  app.require_subcommand(1);
  app.footer("\n" + describe_keys() +
             "\nExit codes: 0 success, 2 config/usage error, 3 I/O error, 4 partial algorithmic "
             "failure.\nLogging: MONSTER_LOG=error|warn|info|debug.");

  std::string config_file;
  std::vector<std::string> overrides;
  std::string output;
  std::optional<int> jobs;
  std::optional<uint64_t> seed;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_file, "YAML config file");
    sub->add_option("--set", overrides, "override a config key: key=value (repeatable)");
    sub->add_option("-o,--out", output, "output directory (config key: output)");
    sub->add_option("-j,--jobs", jobs, "worker threads (config key: jobs)");
    sub->add_option("--seed", seed, "global seed (config key: seed)");
  };

  std::optional<int> count;
  std::string decalib;
  auto* sim = app.add_subcommand("simulate", "build a synthetic dataset and manifest");
  add_common(sim);
  sim->add_option("--count", count, "number of records (scene.count)");
  sim->add_option("--decalib", decalib, "left-image decalibration (scene.decalib)");

  std::string manifest;
  std::string mono_mode;
  auto* cal = app.add_subcommand("calibrate", "recover rectifying homographies per record");
  add_common(cal);
  cal->add_option("--manifest", manifest, "dataset manifest")->required();
  cal->add_option("--mono", mono_mode, "phase_coded | image_based (mono.mode)");

  std::optional<int> record;
  std::string axis1, axis2;
  auto* land = app.add_subcommand("landscape", "scan the consistency loss over two rotation axes");
  add_common(land);
  land->add_option("--manifest", manifest, "dataset manifest")->required();
  land->add_option("--record", record, "record id (landscape.record)");
  land->add_option("--axis1", axis1, "axis:lo:hi:count in degrees (landscape.axis1)");
  land->add_option("--axis2", axis2, "axis:lo:hi:count in degrees (landscape.axis2)");

  std::string policies;
  auto* fu = app.add_subcommand("fuse", "fuse mono and stereo depth and report errors");
  add_common(fu);
  fu->add_option("--manifest", manifest, "dataset manifest")->required();
  fu->add_option("--policy", policies, "comma-separated fusion modes (fusion.policies)");

  std::optional<int> inject_at;
  std::string inject;
  std::optional<int> window;
  std::optional<double> alpha;
  auto* dr = app.add_subcommand("drift", "monitor consistency over a frame stream");
  add_common(dr);
  dr->add_option("--manifest", manifest, "dataset manifest (records in frame order)")->required();
  dr->add_option("--inject-at", inject_at, "first decalibrated frame (drift.inject_at)");
  dr->add_option("--inject", inject, "injected decalibration (drift.inject)");
  dr->add_option("--window", window, "rolling window (drift.window)");
  dr->add_option("--alpha", alpha, "alarm factor (drift.alpha)");

  auto* show = app.add_subcommand("config", "print the resolved configuration as YAML");
  add_common(show);

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    RunConfig cfg;
    if (!config_file.empty()) load_config_file(cfg, config_file);
    for (const std::string& o : overrides) apply_override(cfg, o);
    if (!output.empty()) cfg.output = output;
    if (jobs) cfg.jobs = *jobs;
    if (seed) cfg.seed = *seed;
    if (count) cfg.count = *count;
    if (!decalib.empty()) cfg.decalib = decalib;
    if (!mono_mode.empty()) set_key(cfg, "mono.mode", mono_mode);
    if (record) cfg.record = *record;
    if (!axis1.empty()) cfg.axis1 = axis1;
    if (!axis2.empty()) cfg.axis2 = axis2;
    if (!policies.empty()) cfg.fusion_policies = policies;
    if (inject_at) cfg.inject_at = *inject_at;
    if (!inject.empty()) cfg.inject = inject;
    if (window) cfg.drift.window = *window;
    if (alpha) cfg.drift.alpha = *alpha;
    cfg.validate();

    if (*show) {
      std::cout << dump_config(cfg);
      return kOk;
    }
    if (*sim) return cmd_simulate(cfg);
    if (*cal) return cmd_calibrate(cfg, manifest);
    if (*land) return cmd_landscape(cfg, manifest);
    if (*fu) return cmd_fuse(cfg, manifest);
    if (*dr) return cmd_drift(cfg, manifest);
    return kConfigError;
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return exit_code_for(e);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kFailure;
  }
}

}  // namespace monster::cli
