#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "legvio/pipeline.hpp"

using namespace legvio;
namespace fs = std::filesystem;

namespace {

const char* kShort = R"(
[run]
name = "short"
seeds = [2]
[[gait]]
kind = "stand"
duration = 1
[[gait]]
kind = "trot"
vx = 0.3
duration = 2
)";

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("legvio_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(LEGVIO_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Pipeline, FileStems) {
  EXPECT_EQ(variant_file_stem(Variant::ekf_vio_plus), "ekf_vio_plus");
  EXPECT_EQ(variant_file_stem(Variant::vio_plus), "vio_plus");
  EXPECT_EQ(variant_file_stem(Variant::ekf_leg), "ekf_leg");
}

TEST(Pipeline, WriteLoadEstimateEvaluate) {
  const fs::path dir = fresh_dir("pipeline");
  const RunConfig cfg = parse_config(kShort);
  const SimRun run = simulate(cfg.scenario, 2);
  write_run(dir, run, cfg, 2);
  for (const char* f : {"imu.csv", "joints.csv", "vio.csv", "vicon.csv", "truth.csv", "config.toml", "manifest.txt"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  const LoadedRun loaded = load_run(dir);
  EXPECT_EQ(loaded.log.imu.size(), run.log.imu.size());
  EXPECT_EQ(loaded.log.vio.size(), run.log.vio.size());
  EXPECT_EQ(loaded.truth.size(), run.truth.size());
  EXPECT_EQ(loaded.config.seeds, (std::vector<std::uint64_t>{2}));
  EXPECT_EQ(config_hash(loaded.config), config_hash(cfg));

  for (Variant v : kAllVariants) estimate_to_dir(dir, loaded, v);
  const auto reports = evaluate_dir(dir, loaded, std::vector<Variant>(kAllVariants.begin(), kAllVariants.end()));
  EXPECT_EQ(reports.size(), kAllVariants.size());
  EXPECT_TRUE(fs::exists(dir / "rpe.csv"));
  EXPECT_TRUE(fs::exists(dir / "comparison.txt"));
  EXPECT_TRUE(fs::exists(dir / "diagnostics_ekf_vio_plus.csv"));
  fs::remove_all(dir);
}

TEST(Pipeline, EvaluateNeedsEstimates) {
  const fs::path dir = fresh_dir("pipeline_missing");
  const RunConfig cfg = parse_config(kShort);
  write_run(dir, simulate(cfg.scenario, 2), cfg, 2);
  EXPECT_THROW(evaluate_dir(dir, load_run(dir), {Variant::ekf_leg}), ConfigError);
  EXPECT_THROW(load_run(dir / "nope"), ConfigError);
  fs::remove_all(dir);
}

TEST(Pipeline, GridAxisParsing) {
  const GridAxis a = parse_grid_axis("contact.n_contact+contact.n_standing=3,20");
  EXPECT_EQ(a.keys, (std::vector<std::string>{"contact.n_contact", "contact.n_standing"}));
  EXPECT_EQ(a.values, (std::vector<std::string>{"3", "20"}));
  EXPECT_THROW(parse_grid_axis("contact.n_contact"), ConfigError);
  EXPECT_THROW(parse_grid_axis("contact.bogus=1,2"), ConfigError);
  EXPECT_THROW(parse_grid_axis("=1"), ConfigError);
}

TEST(Pipeline, SweepShape) {
  RunConfig cfg = parse_config(kShort);
  cfg.variants = {Variant::ekf_vio_plus, Variant::vio_plus};
  cfg.seeds = {1, 2};
  const SweepResult r = run_sweep(cfg, {parse_grid_axis("contact.n_contact+contact.n_standing=3,20")});
  ASSERT_EQ(r.rows.size(), 4u);
  for (const SweepRow& row : r.rows) {
    EXPECT_EQ(row.per_seed.size(), 2u);
    EXPECT_EQ(row.false_flight_height.size(), 2u);
  }
  EXPECT_NE(r.rows[0].point, r.rows[2].point);
  EXPECT_NE(sweep_table(r).find("ekf_vio+"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = fresh_dir("cli");
  {
    std::ofstream(dir / "short.toml") << kShort;
    std::ofstream(dir / "bad.toml") << "[contact]\nbogus = 1\n";
  }
  const std::string run = (dir / "run").string();
  EXPECT_EQ(run_cli("simulate --scenario " + (dir / "short.toml").string() + " --out " + run), 0);
  EXPECT_EQ(run_cli("estimate --run " + run + " --variant ekf_vio+ --variant vio+"), 0);
  EXPECT_EQ(run_cli("evaluate --run " + run + " --variant ekf_vio+ --variant vio+"), 0);
  EXPECT_EQ(run_cli("evaluate --run " + run + " --variant ekf_leg"), 2);  // no estimate yet
  EXPECT_EQ(run_cli("estimate --run " + run + " --variant warp"), 2);
  EXPECT_EQ(run_cli("simulate --scenario " + (dir / "bad.toml").string() + " --out " + run), 2);
  EXPECT_EQ(run_cli("simulate --scenario /nonexistent.toml --out " + run), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  EXPECT_EQ(run_cli(""), 2);
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_TRUE(fs::exists(dir / "run" / "rpe.csv"));
  fs::remove_all(dir);
}

TEST(Cli, DeterministicOutputs) {
  const fs::path dir = fresh_dir("cli_det");
  std::ofstream(dir / "short.toml") << kShort;
  for (const char* name : {"a", "b"}) {
    const std::string run = (dir / name).string();
    ASSERT_EQ(run_cli("simulate --scenario " + (dir / "short.toml").string() + " --out " + run), 0);
    ASSERT_EQ(run_cli("estimate --run " + run), 0);
    ASSERT_EQ(run_cli("evaluate --run " + run), 0);
  }
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    if (!entry.is_regular_file()) continue;
    const fs::path other = dir / "b" / entry.path().filename();
    ASSERT_TRUE(fs::exists(other)) << other;
    EXPECT_EQ(slurp(entry.path()), slurp(other)) << entry.path().filename();
  }
  fs::remove_all(dir);
}
