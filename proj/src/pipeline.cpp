#include "legvio/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "csv_writer.hpp"

namespace legvio {

namespace {

namespace fs = std::filesystem;

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string join_values(const std::vector<std::string>& v, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
  return out;
}

}  // namespace

std::string variant_file_stem(Variant v) {
  std::string s = variant_name(v);
  if (!s.empty() && s.back() == '+') {
    s.pop_back();
    s += "_plus";
  }
  return s;
}

void write_run(const fs::path& dir, const SimRun& run, const RunConfig& config, std::uint64_t seed) {
  fs::create_directories(dir);
  write_imu_csv(dir / "imu.csv", run.log.imu);
  write_joints_csv(dir / "joints.csv", run.log.joints);
  write_vio_csv(dir / "vio.csv", run.log.vio);
  write_vicon_csv(dir / "vicon.csv", run.log.vicon);
  write_trajectory_csv(dir / "truth.csv", run.truth);

  RunConfig stored = config;
  stored.seeds = {seed};
  {
    std::ofstream cfg(dir / "config.toml");
    if (!cfg) throw std::runtime_error("cannot open for writing: " + (dir / "config.toml").string());
    cfg << dump_config(stored);
  }
  std::ofstream m(dir / "manifest.txt");
  if (!m) throw std::runtime_error("cannot open for writing: " + (dir / "manifest.txt").string());
  m << "name = " << config.name << "\n"
    << "seed = " << seed << "\n"
    << "config_hash = " << config_hash(stored) << "\n"
    << "duration_s = " << fmt("%.6f", run.truth.empty() ? 0.0 : run.truth.back().t.seconds()) << "\n"
    << "imu_samples = " << run.log.imu.size() << "\n"
    << "joint_samples = " << run.log.joints.size() << "\n"
    << "vio_estimates = " << run.log.vio.size() << "\n"
    << "vio_frames = " << run.vio_frames << "\n"
    << "vio_dropped_frames = " << run.vio_dropped_frames << "\n"
    << "vicon_samples = " << run.log.vicon.size() << "\n";
}

LoadedRun load_run(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("run directory not found: " + dir.string(), {"--run"});
  LoadedRun r;
  r.config = fs::exists(dir / "config.toml") ? load_config(dir / "config.toml") : default_config();
  if (fs::exists(dir / "imu.csv")) r.log.imu = read_imu_csv(dir / "imu.csv");
  if (fs::exists(dir / "joints.csv")) r.log.joints = read_joints_csv(dir / "joints.csv");
  if (fs::exists(dir / "vio.csv")) r.log.vio = read_vio_csv(dir / "vio.csv");
  if (fs::exists(dir / "vicon.csv")) r.log.vicon = read_vicon_csv(dir / "vicon.csv");
  if (fs::exists(dir / "truth.csv")) r.truth = read_trajectory_csv(dir / "truth.csv");
  return r;
}

TrajectorySample initial_sample(const SensorLog& log, const Trajectory& truth) {
  if (!truth.empty()) return truth.front();
  TrajectorySample s;
  if (!log.vicon.empty()) {
    s.t = log.vicon.front().t;
    s.pose = log.vicon.front().pose;
  } else if (!log.imu.empty()) {
    s.t = log.imu.front().t;
  }
  return s;
}

EstimateResult estimate_to_dir(const fs::path& dir, const LoadedRun& run, Variant variant) {
  const EstimateResult est = run_estimator(run.log, run.config.scenario.robot, run.config.estimator, variant,
                                           initial_sample(run.log, run.truth));
  const std::string stem = variant_file_stem(variant);
  write_trajectory_csv(dir / ("estimate_" + stem + ".csv"), est.trajectory);
  if (!est.diagnostics.empty()) write_diagnostics_csv(dir / ("diagnostics_" + stem + ".csv"), est.diagnostics);
  return est;
}

std::vector<NamedReport> evaluate_dir(const fs::path& dir, const LoadedRun& run,
                                      const std::vector<Variant>& variants) {
  if (run.truth.empty()) throw ConfigError("evaluation needs truth.csv in " + dir.string(), {"truth.csv"});
  RpeOptions opt = run.config.rpe;
  opt.keep_samples = true;
  std::vector<NamedReport> reports;
  for (Variant v : kAllVariants) {
    if (std::find(variants.begin(), variants.end(), v) == variants.end()) continue;
    const fs::path file = dir / ("estimate_" + variant_file_stem(v) + ".csv");
    if (!fs::exists(file)) {
      throw ConfigError("missing estimate for variant " + std::string(variant_name(v)) + ": " + file.string(),
                        {variant_name(v)});
    }
    reports.emplace_back(variant_name(v), rpe(read_trajectory_csv(file), run.truth, opt));
  }
  write_rpe_csv(dir / "rpe.csv", reports);
  std::ofstream table(dir / "comparison.txt");
  table << comparison_table(reports);
  write_plot_data(dir / "plots", reports);
  return reports;
}

GridAxis parse_grid_axis(const std::string& spec) {
  const std::size_t eq = spec.find('=');
  if (spec.empty() || eq == std::string::npos) throw ConfigError("grid axis must look like key=v1,v2: '" + spec + "'");
  GridAxis axis;
  std::stringstream keys(spec.substr(0, eq));
  for (std::string k; std::getline(keys, k, '+');) {
    if (!k.empty()) axis.keys.push_back(k);
  }
  std::stringstream values(spec.substr(eq + 1));
  for (std::string v; std::getline(values, v, ',');) {
    if (!v.empty()) axis.values.push_back(v);
  }
  if (axis.keys.empty() || axis.values.empty()) throw ConfigError("empty grid axis: '" + spec + "'");
  const std::vector<std::string> known = config_keys();
  for (const auto& k : axis.keys) {
    if (std::find(known.begin(), known.end(), k) == known.end()) {
      throw ConfigError("unknown grid key '" + k + "'", {k});
    }
  }
  return axis;
}

std::size_t false_flight_height_measurements(const EstimateResult& est,
                                             const std::vector<std::array<bool, kNumLegs>>& truth_contact) {
  std::size_t n = 0;
  const std::size_t m = std::min(est.diagnostics.size(), truth_contact.size());
  for (std::size_t i = 0; i < m; ++i) {
    if (!est.diagnostics[i].height_measured) continue;
    const auto& c = truth_contact[i];
    if (!(c[0] && c[1] && c[2] && c[3])) ++n;
  }
  return n;
}

SweepResult run_sweep(const RunConfig& base, const std::vector<GridAxis>& grid) {
  if (grid.empty()) throw ConfigError("empty grid: pass at least one --grid key=v1,v2");
  SweepResult result;
  result.seeds = base.seeds;

  std::vector<std::size_t> idx(grid.size(), 0);
  while (true) {
    RunConfig cfg = base;
    std::vector<std::string> desc;
    for (std::size_t a = 0; a < grid.size(); ++a) {
      const std::string& value = grid[a].values[idx[a]];
      for (const auto& key : grid[a].keys) apply_override(cfg, key, value);
      desc.push_back(join_values(grid[a].keys, "+") + "=" + value);
    }
    validate_config(cfg);

    std::vector<SweepRow> rows;
    for (Variant v : cfg.variants) {
      SweepRow r;
      r.point = join_values(desc, " ");
      r.variant = v;
      rows.push_back(r);
    }
    for (std::uint64_t seed : cfg.seeds) {
      const SimRun run = simulate(cfg.scenario, seed);
      for (SweepRow& r : rows) {
        const EstimateResult est = run_estimator(run.log, cfg.scenario.robot, cfg.estimator, r.variant,
                                                 initial_sample(run.log, run.truth));
        const RpeReport rep = rpe(est.trajectory, run.truth, cfg.rpe);
        std::array<double, kNumComponents> m{};
        for (int c = 0; c < kNumComponents; ++c) m[c] = rep.all[c].mean;
        r.per_seed.push_back(m);
        r.false_flight_height.push_back(false_flight_height_measurements(est, run.truth_contact));
      }
    }
    for (SweepRow& r : rows) {
      for (int c = 0; c < kNumComponents; ++c) {
        double s = 0.0;
        for (const auto& m : r.per_seed) s += m[c];
        r.mean[c] = s / static_cast<double>(r.per_seed.size());
      }
      result.rows.push_back(std::move(r));
    }

    std::size_t a = 0;
    for (; a < grid.size(); ++a) {
      if (++idx[a] < grid[a].values.size()) break;
      idx[a] = 0;
    }
    if (a == grid.size()) break;
  }
  return result;
}

void write_sweep_csv(const fs::path& path, const SweepResult& result) {
  std::vector<std::string> cols{"point", "variant", "component", "mean"};
  for (std::uint64_t s : result.seeds) cols.push_back("seed_" + std::to_string(s));
  detail::CsvWriter w(path);
  w.header(cols);
  for (const SweepRow& r : result.rows) {
    for (int c = 0; c < kNumComponents; ++c) {
      w.text(r.point).text(variant_name(r.variant)).text(kComponentNames[c]).real(r.mean[c]);
      for (const auto& m : r.per_seed) w.real(m[c]);
      w.end_row();
    }
    w.text(r.point).text(variant_name(r.variant)).text("false_flight_height");
    double total = 0.0;
    for (std::size_t n : r.false_flight_height) total += static_cast<double>(n);
    w.real(total / static_cast<double>(std::max<std::size_t>(1, r.false_flight_height.size())));
    for (std::size_t n : r.false_flight_height) w.integer(static_cast<std::int64_t>(n));
    w.end_row();
  }
}

std::string sweep_table(const SweepResult& result) {
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"point", "variant", "xy [m]", "z [m]", "yaw [deg]", "gravity [deg]", "false flight h"});
  for (std::uint64_t s : result.seeds) cells.front().push_back("z seed " + std::to_string(s));
  for (const SweepRow& r : result.rows) {
    std::size_t ff = 0;
    for (std::size_t n : r.false_flight_height) ff += n;
    std::vector<std::string> row{r.point,
                                 variant_name(r.variant),
                                 fmt("%.4f", r.mean[kRpeXy]),
                                 fmt("%.4f", r.mean[kRpeZ]),
                                 fmt("%.3f", r.mean[kRpeYaw]),
                                 fmt("%.3f", r.mean[kRpeGravity]),
                                 std::to_string(ff)};
    for (const auto& m : r.per_seed) row.push_back(fmt("%.4f", m[kRpeZ]));
    cells.push_back(row);
  }
  std::vector<std::size_t> width(cells.front().size(), 0);
  for (const auto& row : cells) {
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  std::string out;
  for (const auto& row : cells) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      const std::string pad(width[i] - row[i].size(), ' ');
      out += i < 2 ? row[i] + pad + "  " : pad + row[i] + "  ";
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += '\n';
  }
  return out;
}

}  // namespace legvio
