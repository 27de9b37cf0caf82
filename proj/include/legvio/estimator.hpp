#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "legvio/contact.hpp"
#include "legvio/ekf.hpp"
#include "legvio/kinematics.hpp"
#include "legvio/streams.hpp"

namespace legvio {

enum class Variant { ekf_leg, ekf_vicon, ekf_vio_plus, ekf_vio, vio_plus, vio };

/// Table column order.
constexpr std::array<Variant, 6> kAllVariants{Variant::ekf_leg, Variant::ekf_vicon, Variant::ekf_vio_plus,
                                              Variant::ekf_vio,  Variant::vio_plus,  Variant::vio};

const char* variant_name(Variant v);
std::optional<Variant> parse_variant(std::string_view name);

struct EstimatorConfig {
  NoiseConfig noise;                 // ekf_vio+, ekf_vio, ekf_vicon
  NoiseConfig noise_leg;             // ekf_leg
  ContactOptions contact = ContactOptions::for_mass(2.5);
  double init_duration_s = 2.0;      // biases estimated, then frozen
  bool freeze_biases = true;
  double vio_max_age_s = 0.050;      // freshness for height-bias measurements
  bool rotate_feet = false;          // world-frame kinematic height
  double max_substep_s = 0.010;

  const NoiseConfig& noise_for(Variant v) const { return v == Variant::ekf_leg ? noise_leg : noise; }
  void validate() const;
};

/// One row per output sample.
struct DiagnosticRow {
  Timestamp t;
  double legvel_innovation = 0.0;  // largest leg innovation norm since the previous row
  double vio_innovation = 0.0;
  double height_innovation = 0.0;
  std::size_t gate_rejections = 0; // cumulative
  std::array<bool, kNumLegs> contact{};
  bool height_ready = false;
  bool height_measured = false;    // a height-bias measurement was formed
  double b_dz = 0.0;
};

struct EstimateResult {
  Trajectory trajectory;
  std::vector<DiagnosticRow> diagnostics;
  EkfDiagnostics counters;
  std::size_t stale_height_skips = 0;
};

/// Called after every output sample with the live filter (EKF variants).
using StepObserver = std::function<void(const Ekf&)>;

/// Runs one variant over a recorded log. EKF variants emit one sample per
/// robot IMU sample; VIO passthroughs hold the latest available estimate on
/// the same grid. `initial` seeds the filter (pose and velocity).
EstimateResult run_estimator(const SensorLog& log, const RobotModel& model, const EstimatorConfig& config,
                             Variant variant, const TrajectorySample& initial, const StepObserver& observer = {});

void write_diagnostics_csv(const std::filesystem::path& path, const std::vector<DiagnosticRow>& rows);

}  // namespace legvio
