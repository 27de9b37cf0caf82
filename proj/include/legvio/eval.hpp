#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "legvio/streams.hpp"

namespace legvio {

inline const std::vector<double> kRpeIntervals{0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0};

enum RpeComponent : int { kRpeXy = 0, kRpeZ = 1, kRpeYaw = 2, kRpeGravity = 3 };
constexpr int kNumComponents = 4;
constexpr std::array<const char*, kNumComponents> kComponentNames{"xy", "z", "yaw", "gravity"};
constexpr std::array<const char*, kNumComponents> kComponentUnits{"m", "m", "deg", "deg"};

struct RpeStats {
  double mean = 0.0;
  double max = 0.0;
  double rmse = 0.0;
  std::size_t count = 0;
};

struct RpeInterval {
  double interval_s = 0.0;
  std::array<RpeStats, kNumComponents> stats{};
  std::array<std::vector<double>, kNumComponents> samples;  // only with keep_samples
};

struct RpeReport {
  std::vector<RpeInterval> intervals;
  /// Mean over the intervals that have samples (max: largest max, count: total).
  std::array<RpeStats, kNumComponents> all{};

  const RpeInterval* find(double interval_s) const;
};

struct RpeOptions {
  std::vector<double> intervals = kRpeIntervals;
  std::size_t stride = 1;  // start-index step
  bool keep_samples = false;
};

/// Relative pose errors of `est` against `gt` (same uniform time grid).
/// Position errors are rotated into the gravity-aligned ground-truth frame
/// at the interval start; xy is horizontal, z vertical. Throws
/// std::invalid_argument when the grids differ.
RpeReport rpe(const Trajectory& est, const Trajectory& gt, const RpeOptions& options = {});

struct YawGravity {
  double yaw_deg = 0.0;
  double gravity_deg = 0.0;
};

/// gravity = angle between R e_z and e_z; yaw = angle of the residual left
/// after undoing the minimal tilt taking e_z to R e_z.
YawGravity yaw_gravity_decompose(const Rotation& R_err);

using NamedReport = std::pair<std::string, RpeReport>;

void write_rpe_csv(const std::filesystem::path& path, const std::vector<NamedReport>& reports);
/// Mean/max per component (all-interval values), one column per variant.
std::string comparison_table(const std::vector<NamedReport>& reports);
/// Box statistics per interval for each component plus a gnuplot script.
void write_plot_data(const std::filesystem::path& dir, const std::vector<NamedReport>& reports);

}  // namespace legvio
