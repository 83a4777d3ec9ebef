#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "monster/io.hpp"
#include "monster/simulator.hpp"

using namespace monster;
using monster::cli::run_cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int lines(const fs::path& p) {
  std::ifstream in(p);
  int n = 0;
  for (std::string s; std::getline(in, s);) ++n;
  return n;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("monster_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::vector<std::string> small_scene() {
  return {"--set", "scene.width=64",       "--set", "scene.height=64",
          "--set", "scene.depth_min=0.8",  "--set", "scene.depth_max=4.5",
          "--set", "calibration.steps=4",  "-j",    "1"};
}

std::vector<std::string> operator+(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

class Workflow : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    setenv("MONSTER_LOG", "error", 1);
    root_ = new fs::path(scratch("workflow"));
    ASSERT_EQ(run_cli(std::vector<std::string>{"simulate", "-o", (*root_ / "data").string(),
                                               "--count", "4", "--seed", "5"} +
                      small_scene()),
              0);
  }
  static void TearDownTestSuite() {
    fs::remove_all(*root_);
    delete root_;
  }
  static std::string manifest() { return (*root_ / "data" / "manifest.yaml").string(); }
  static fs::path* root_;
};

fs::path* Workflow::root_ = nullptr;

}  // namespace

TEST(Cli, UsageErrorsExitWithTwo) {
  setenv("MONSTER_LOG", "error", 1);
  EXPECT_EQ(run_cli({}), 2);
  EXPECT_EQ(run_cli({"frobnicate"}), 2);
  EXPECT_EQ(run_cli({"config", "--set", "no.such.key=1"}), 2);
  EXPECT_EQ(run_cli({"config", "--set", "matcher.max_disp"}), 2);
  EXPECT_EQ(run_cli({"config", "--set", "matcher.max_disp=12px"}), 2);
  EXPECT_EQ(run_cli({"config", "--set", "matcher.cost=ssd"}), 2);
  EXPECT_EQ(run_cli({"config", "--set", "matcher.block_radius=0"}), 2);
  EXPECT_EQ(run_cli({"config", "--set", "scene.count=0"}), 2);
  EXPECT_EQ(run_cli({"simulate", "--decalib", "roll:3deg", "-o", scratch("roll").string()}), 2);
  EXPECT_EQ(run_cli({"calibrate"}), 2);  // --manifest is required
}

TEST(Cli, MissingFilesExitWithThree) {
  setenv("MONSTER_LOG", "error", 1);
  EXPECT_EQ(run_cli({"calibrate", "--manifest", "/nonexistent/manifest.yaml"}), 3);
  EXPECT_EQ(run_cli({"config", "-c", "/nonexistent/run.yaml"}), 3);
}

TEST(Cli, ConfigFileIsStrict) {
  setenv("MONSTER_LOG", "error", 1);
  const fs::path dir = scratch("config");
  fs::create_directories(dir);
  std::ofstream(dir / "typo.yaml") << "matcher:\n  max_dsp: 12\n";
  EXPECT_EQ(run_cli({"config", "-c", (dir / "typo.yaml").string()}), 2);
  std::ofstream(dir / "broken.yaml") << "matcher: [\n";
  EXPECT_EQ(run_cli({"config", "-c", (dir / "broken.yaml").string()}), 2);
  std::ofstream(dir / "empty.yaml") << "";
  testing::internal::CaptureStdout();
  EXPECT_EQ(run_cli({"config", "-c", (dir / "empty.yaml").string()}), 0);
  testing::internal::GetCapturedStdout();
  fs::remove_all(dir);
}

TEST(Cli, ConfigDumpRoundTrips) {
  const fs::path dir = scratch("dump");
  fs::create_directories(dir);
  testing::internal::CaptureStdout();
  ASSERT_EQ(run_cli({"config", "--set", "matcher.max_disp=40", "--seed", "9", "--set",
                     "calibration.step_size=0.125"}),
            0);
  const std::string first = testing::internal::GetCapturedStdout();
  EXPECT_NE(first.find("max_disp: 40"), std::string::npos);
  EXPECT_NE(first.find("seed: 9"), std::string::npos);
  std::ofstream(dir / "dumped.yaml") << first;

  testing::internal::CaptureStdout();
  ASSERT_EQ(run_cli({"config", "-c", (dir / "dumped.yaml").string()}), 0);
  EXPECT_EQ(testing::internal::GetCapturedStdout(), first);

  // later sources win: file < --set < dedicated flags
  cli::RunConfig cfg;
  cli::load_config_file(cfg, dir / "dumped.yaml");
  cli::apply_override(cfg, "seed=3");
  EXPECT_EQ(cfg.seed, 3u);
  EXPECT_EQ(cfg.matcher.max_disp, 40);
  EXPECT_DOUBLE_EQ(cfg.calib.step_size, 0.125);
  fs::remove_all(dir);
}

TEST(Cli, DefaultsValidate) {
  const cli::RunConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.fusion_policies, "hybrid");
  const FusionPolicy p = cfg.fusion_policy(FusionMode::RangeGated);
  EXPECT_NEAR(p.mono_range.z_near, 0.39375, 1e-12);
  EXPECT_NEAR(p.mono_range.z_far, 1.0161290322580645, 1e-12);
}

TEST_F(Workflow, SimulateWritesAManifest) {
  const DatasetManifest m = read_manifest(manifest());
  ASSERT_EQ(m.records.size(), 4u);
  EXPECT_EQ(m.width, 64);
  for (const ManifestRecord& r : m.records) {
    EXPECT_TRUE(fs::exists(*root_ / "data" / r.left_path));
    EXPECT_TRUE(fs::exists(*root_ / "data" / r.gt_depth_path));
  }
  // same seed, same bytes
  const fs::path again = *root_ / "again";
  ASSERT_EQ(run_cli(std::vector<std::string>{"simulate", "-o", again.string(), "--count", "4",
                                             "--seed", "5"} +
                    small_scene()),
            0);
  EXPECT_EQ(slurp(again / "manifest.yaml"), slurp(*root_ / "data" / "manifest.yaml"));
}

TEST_F(Workflow, Calibrate) {
  const fs::path out = *root_ / "calib";
  ASSERT_EQ(run_cli(std::vector<std::string>{"calibrate", "--manifest", manifest(), "-o",
                                             out.string()} +
                    small_scene()),
            0);
  EXPECT_EQ(lines(out / "calibration_summary.csv"), 5);
  EXPECT_EQ(lines(out / "record_0002_trace.csv"), 6);  // header, initial, 4 steps
  const std::string table = slurp(out / "calibration_table.csv");
  EXPECT_NE(table.find("warp_left+phase_coded,4,"), std::string::npos);
  const std::string res = slurp(out / "record_0000_calib.yaml");
  EXPECT_NE(res.find("corner_err_px:"), std::string::npos);
  EXPECT_NE(res.find("homography: ["), std::string::npos);
}

TEST_F(Workflow, FuseReportsEveryPolicy) {
  const fs::path out = *root_ / "fuse";
  testing::internal::CaptureStdout();
  ASSERT_EQ(run_cli(std::vector<std::string>{"fuse", "--manifest", manifest(), "-o", out.string(),
                                             "--policy", "confidence,range_gated,hybrid"} +
                    small_scene()),
            0);
  const std::string said = testing::internal::GetCapturedStdout();
  EXPECT_NE(said.find("fused_hybrid"), std::string::npos);
  const std::string csv = slurp(out / "fusion_report.csv");
  for (const char* name : {"stereo,", "mono,", "fused_confidence,", "fused_range_gated,", "fused_hybrid,"})
    EXPECT_NE(csv.find(name), std::string::npos) << name;
  EXPECT_TRUE(fs::exists(out / "record_0003_hybrid_depth.pfm"));
  EXPECT_TRUE(fs::exists(out / "record_0003_hybrid_source.png"));
  EXPECT_TRUE(fs::exists(out / "fusion_report.txt"));
  EXPECT_EQ(run_cli({"fuse", "--manifest", manifest(), "--policy", "best"}), 2);
}

TEST_F(Workflow, Landscape) {
  const fs::path out = *root_ / "land";
  testing::internal::CaptureStdout();
  ASSERT_EQ(run_cli(std::vector<std::string>{"landscape", "--manifest", manifest(), "-o",
                                             out.string(), "--axis1", "inplane:-2:2:3", "--axis2",
                                             "pitch:-1:1:3", "--record", "1"} +
                    small_scene()),
            0);
  EXPECT_NE(testing::internal::GetCapturedStdout().find("minimum at"), std::string::npos);
  EXPECT_EQ(lines(out / "landscape.csv"), 10);
  const Image png = read_png(out / "landscape.png");
  EXPECT_EQ(png.channels, 3);
  EXPECT_EQ(run_cli({"landscape", "--manifest", manifest(), "--axis1", "inplane:1:2:2"}), 2);
  EXPECT_EQ(run_cli({"landscape", "--manifest", manifest(), "--record", "99"}), 2);
}

TEST_F(Workflow, DriftFlagsInjectedDecalibration) {
  const fs::path out = *root_ / "drift";
  testing::internal::CaptureStdout();
  ASSERT_EQ(run_cli(std::vector<std::string>{"drift", "--manifest", manifest(), "-o", out.string(),
                                             "--inject-at", "2", "--window", "1", "--set",
                                             "drift.baseline_frames=2"} +
                    small_scene()),
            0);
  EXPECT_EQ(testing::internal::GetCapturedStdout(), "alarm_frame: 2\n");
  EXPECT_EQ(lines(out / "drift.csv"), 5);
  EXPECT_NE(slurp(out / "drift_summary.yaml").find("inject_at: 2"), std::string::npos);
  // baseline may not overlap the injection
  EXPECT_EQ(run_cli({"drift", "--manifest", manifest(), "--inject-at", "1", "--set",
                     "drift.baseline_frames=2"}),
            2);
  EXPECT_EQ(run_cli({"drift", "--manifest", manifest()}), 2);  // 5 baseline frames, 4 records
}
