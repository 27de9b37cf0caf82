#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "legvio/config.hpp"
#include "legvio/estimator.hpp"
#include "legvio/eval.hpp"
#include "legvio/sim.hpp"

namespace legvio {

/// File stem for a variant ("ekf_vio+" -> "ekf_vio_plus").
std::string variant_file_stem(Variant v);

/// simulate: imu.csv, joints.csv, vio.csv, vicon.csv, truth.csv, manifest.txt
/// and the canonical config next to them (config.toml).
void write_run(const std::filesystem::path& dir, const SimRun& run, const RunConfig& config, std::uint64_t seed);

struct LoadedRun {
  SensorLog log;
  Trajectory truth;  // empty for external logs without truth.csv
  RunConfig config;  // from config.toml when present, else defaults
};

/// Reads a run directory. Missing stream files are left empty.
LoadedRun load_run(const std::filesystem::path& dir);

/// First truth sample, else the first motion-capture pose at rest, else identity.
TrajectorySample initial_sample(const SensorLog& log, const Trajectory& truth);

/// estimate: writes estimate_<variant>.csv and diagnostics_<variant>.csv.
EstimateResult estimate_to_dir(const std::filesystem::path& dir, const LoadedRun& run, Variant variant);

/// evaluate: rpe.csv, comparison.txt, plots/. Uses estimate files in `dir`.
std::vector<NamedReport> evaluate_dir(const std::filesystem::path& dir, const LoadedRun& run,
                                      const std::vector<Variant>& variants);

/// Sweep axis; several keys joined by '+' take the same value.
struct GridAxis {
  std::vector<std::string> keys;
  std::vector<std::string> values;
};

/// "contact.n_contact+contact.n_standing=3,20"
GridAxis parse_grid_axis(const std::string& spec);

/// Number of truth-flight samples with a height-bias measurement.
std::size_t false_flight_height_measurements(const EstimateResult& est,
                                             const std::vector<std::array<bool, kNumLegs>>& truth_contact);

struct SweepRow {
  std::string point;  // "key=value, ..."
  Variant variant = Variant::ekf_leg;
  std::array<double, kNumComponents> mean{};                 // mean over seeds of the all-interval mean
  std::vector<std::array<double, kNumComponents>> per_seed;  // same order as seeds
  std::vector<std::size_t> false_flight_height;              // per seed
};

struct SweepResult {
  std::vector<std::uint64_t> seeds;
  std::vector<SweepRow> rows;
};

SweepResult run_sweep(const RunConfig& base, const std::vector<GridAxis>& grid);
void write_sweep_csv(const std::filesystem::path& path, const SweepResult& result);
std::string sweep_table(const SweepResult& result);

}  // namespace legvio
