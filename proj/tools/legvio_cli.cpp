// legvio: simulate / estimate / evaluate / sweep
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "legvio/pipeline.hpp"

namespace fs = std::filesystem;
using namespace legvio;

namespace {

constexpr int kOk = 0;
constexpr int kRuntime = 1;
constexpr int kUsage = 2;

std::vector<Variant> variants_from(const std::vector<std::string>& names, const std::vector<Variant>& fallback) {
  if (names.empty()) return fallback;
  std::vector<Variant> out;
  for (const auto& n : names) {
    const auto v = parse_variant(n);
    if (!v) {
      throw ConfigError("unknown variant '" + n + "' (expected ekf_leg, ekf_vicon, ekf_vio+, ekf_vio, vio+, vio)",
                        {"--variant"});
    }
    out.push_back(*v);
  }
  return out;
}

int cmd_simulate(const std::string& scenario, std::uint64_t seed, bool seed_given, const std::string& out) {
  RunConfig cfg = load_config(scenario);
  validate_config(cfg);
  if (!seed_given) seed = cfg.seeds.front();
  const SimRun run = simulate(cfg.scenario, seed);
  write_run(out, run, cfg, seed);
  std::printf("wrote %s (seed %llu, %zu IMU samples, %zu VIO estimates)\n", out.c_str(),
              static_cast<unsigned long long>(seed), run.log.imu.size(), run.log.vio.size());
  return kOk;
}

int cmd_estimate(const std::string& dir, const std::vector<std::string>& names) {
  const LoadedRun run = load_run(dir);
  for (Variant v : variants_from(names, run.config.variants)) {
    const EstimateResult est = estimate_to_dir(dir, run, v);
    std::printf("%-9s %zu samples, %zu gate rejections\n", variant_name(v), est.trajectory.size(),
                est.counters.rejections());
  }
  return kOk;
}

int cmd_evaluate(const std::string& dir, const std::vector<std::string>& names) {
  const LoadedRun run = load_run(dir);
  const auto reports = evaluate_dir(dir, run, variants_from(names, run.config.variants));
  std::cout << comparison_table(reports);
  return kOk;
}

int cmd_sweep(const std::string& scenario, const std::vector<std::string>& grid_specs,
              const std::vector<std::uint64_t>& seeds, const std::vector<std::string>& names, const std::string& out) {
  RunConfig cfg = load_config(scenario);
  if (!seeds.empty()) cfg.seeds = seeds;
  cfg.variants = variants_from(names, cfg.variants);
  validate_config(cfg);
  std::vector<GridAxis> grid;
  for (const auto& g : grid_specs) grid.push_back(parse_grid_axis(g));
  const SweepResult result = run_sweep(cfg, grid);
  std::cout << sweep_table(result);
  if (!out.empty()) {
    fs::create_directories(out);
    write_sweep_csv(fs::path(out) / "sweep.csv", result);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Leg odometry + VIO fusion: simulate, estimate, evaluate, sweep"};
  app.require_subcommand(1);

  std::string scenario, out, run_dir;
  std::uint64_t seed = 1;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> variants, grid;

  auto* sim = app.add_subcommand("simulate", "generate truth and sensor streams");
  sim->add_option("--scenario", scenario, "scenario file (TOML)")->required();
  auto* seed_opt = sim->add_option("--seed", seed, "random seed (default: first of run.seeds)");
  sim->add_option("--out", out, "output run directory")->required();

  auto* est = app.add_subcommand("estimate", "run estimator variants on a run directory");
  est->add_option("--run,--out", run_dir, "run directory")->required();
  est->add_option("--variant", variants, "variant (repeatable; default: all)");

  auto* ev = app.add_subcommand("evaluate", "RPE evaluation of estimates against truth");
  ev->add_option("--run,--out", run_dir, "run directory")->required();
  ev->add_option("--variant", variants, "variant (repeatable; default: all)");

  auto* sw = app.add_subcommand("sweep", "parameter grid over the full pipeline");
  sw->add_option("--scenario", scenario, "scenario file (TOML)")->required();
  sw->add_option("--grid", grid, "axis key=v1,v2; tie keys with '+'")->required();
  sw->add_option("--seed", seeds, "seeds (repeatable; default: run.seeds)");
  sw->add_option("--variant", variants, "variant (repeatable; default: run.variants)");
  sw->add_option("--out", out, "directory for sweep.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (sim->parsed()) return cmd_simulate(scenario, seed, seed_opt->count() > 0, out);
    if (est->parsed()) return cmd_estimate(run_dir, variants);
    if (ev->parsed()) return cmd_evaluate(run_dir, variants);
    if (sw->parsed()) return cmd_sweep(scenario, grid, seeds, variants, out);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "legvio: configuration error: %s\n", e.what());
    if (!e.keys().empty()) {
      std::fprintf(stderr, "offending keys:");
      for (const auto& k : e.keys()) std::fprintf(stderr, " %s", k.c_str());
      std::fprintf(stderr, "\n");
    }
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "legvio: invalid input: %s\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "legvio: %s\n", e.what());
    return kRuntime;
  }
  return kUsage;
}
