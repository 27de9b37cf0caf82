#include "legvio/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "csv_writer.hpp"
#include "legvio/preint.hpp"

namespace legvio {

namespace {

bool is_ekf(Variant v) { return v != Variant::vio_plus && v != Variant::vio; }

bool uses_height(Variant v) { return v == Variant::ekf_vio_plus || v == Variant::ekf_vio; }

std::optional<VioKind> vio_kind(Variant v) {
  switch (v) {
    case Variant::ekf_vio_plus:
    case Variant::vio_plus: return VioKind::predicted;
    case Variant::ekf_vio:
    case Variant::vio: return VioKind::frame;
    default: return std::nullopt;
  }
}

void require_streams(const SensorLog& log, Variant v) {
  const std::string name = variant_name(v);
  if (is_ekf(v)) {
    if (log.imu.empty()) throw std::invalid_argument("variant " + name + " requires the robot IMU stream (imu.csv)");
    if (log.joints.empty()) throw std::invalid_argument("variant " + name + " requires joint samples (joints.csv)");
  }
  if (v == Variant::ekf_vicon && log.vicon.empty()) {
    throw std::invalid_argument("variant ekf_vicon requires motion-capture poses (vicon.csv)");
  }
  if (const auto kind = vio_kind(v)) {
    const bool found = std::any_of(log.vio.begin(), log.vio.end(),
                                   [&](const VioEstimate& e) { return e.kind == *kind; });
    if (!found) {
      throw std::invalid_argument("variant " + name + " requires " +
                                  (*kind == VioKind::frame ? "frame" : "predicted") +
                                  " VIO estimates (vio.csv)");
    }
  }
}

TrajectorySample sample_of(Timestamp t, const EkfState& s) {
  return {t, Pose{s.p, s.q}, s.velocity_world()};
}

EstimateResult run_passthrough(const SensorLog& log, Variant variant, const TrajectorySample& initial) {
  const VioKind kind = *vio_kind(variant);
  std::vector<Timestamp> grid;
  if (!log.imu.empty()) {
    for (const auto& s : log.imu) grid.push_back(s.t);
  } else {
    const Timestamp last = log.vio.back().t_available;
    for (Timestamp t = initial.t; t <= last; t = t + 1'000'000) grid.push_back(t);
  }
  EstimateResult out;
  TrajectorySample held = initial;
  std::size_t i = 0;
  for (const Timestamp& t : grid) {
    while (i < log.vio.size() && log.vio[i].t_available <= t) {
      const VioEstimate& e = log.vio[i++];
      if (e.kind == kind) held = {t, e.pose, e.vel_world};
    }
    held.t = t;
    out.trajectory.push_back(held);
  }
  return out;
}

}  // namespace

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::ekf_leg: return "ekf_leg";
    case Variant::ekf_vicon: return "ekf_vicon";
    case Variant::ekf_vio_plus: return "ekf_vio+";
    case Variant::ekf_vio: return "ekf_vio";
    case Variant::vio_plus: return "vio+";
    case Variant::vio: return "vio";
  }
  return "?";
}

std::optional<Variant> parse_variant(std::string_view name) {
  for (Variant v : kAllVariants) {
    if (name == variant_name(v)) return v;
  }
  return std::nullopt;
}

void EstimatorConfig::validate() const {
  noise.validate();
  noise_leg.validate();
  contact.validate();
  if (!(init_duration_s >= 0.0)) throw std::invalid_argument("estimator.init_duration must be >= 0");
  if (!(vio_max_age_s > 0.0)) throw std::invalid_argument("estimator.vio_max_age must be positive");
  if (!(max_substep_s > 0.0 && max_substep_s <= 0.010)) {
    throw std::invalid_argument("estimator.max_substep must lie in (0, 0.01] s");
  }
}

EstimateResult run_estimator(const SensorLog& log, const RobotModel& model, const EstimatorConfig& config,
                             Variant variant, const TrajectorySample& initial, const StepObserver& observer) {
  config.validate();
  require_streams(log, variant);
  if (!is_ekf(variant)) return run_passthrough(log, variant, initial);

  EkfState init;
  init.p = initial.pose.position;
  init.q = initial.pose.orientation;
  init.v_body = initial.pose.orientation.inverse() * initial.vel_world;
  Ekf ekf(config.noise_for(variant), init);
  ContactTracker tracker(config.contact);
  ImuToBase to_base(model.imu);
  const std::optional<VioKind> kind = vio_kind(variant);
  const auto max_age = static_cast<std::int64_t>(std::llround(config.vio_max_age_s * 1e9));

  EstimateResult out;
  out.trajectory.reserve(log.imu.size());
  out.diagnostics.reserve(log.imu.size());
  std::optional<ImuSample> last_imu;
  std::optional<Timestamp> start;
  std::optional<Timestamp> pending;  // output time awaiting same-time events
  std::optional<VioEstimate> latest_vio;
  DiagnosticRow row;
  GatedContacts gated;

  auto flush = [&]() {
    if (!pending) return;
    const EkfState& s = ekf.state();
    out.trajectory.push_back(sample_of(*pending, s));
    row.t = *pending;
    row.gate_rejections = ekf.diagnostics().rejections();
    row.contact = gated.leg_odometry;
    row.height_ready = uses_height(variant) && gated.height_ready;
    row.b_dz = s.b_dz;
    out.diagnostics.push_back(row);
    row = DiagnosticRow{};
    if (observer) observer(ekf);
    pending.reset();
  };

  for (const EventRef& ev : merge_log(log)) {
    if (pending && ev.available > *pending) flush();
    switch (static_cast<StreamId>(ev.stream)) {
      case StreamId::imu: {
        const ImuSample s = to_base(log.imu[ev.index]);
        if (!start) start = s.t;
        if (last_imu) {
          const double gap = seconds_between(last_imu->t, s.t);
          if (gap > 0.0) {
            const int n = static_cast<int>(std::ceil(gap / config.max_substep_s - 1e-9));
            for (int k = 0; k < n; ++k) ekf.propagate(s, gap / n);
          }
        }
        last_imu = s;
        if (config.freeze_biases && !ekf.biases_frozen() &&
            seconds_between(*start, s.t) >= config.init_duration_s) {
          ekf.freeze_biases(true);
        }
        pending = s.t;
        break;
      }
      case StreamId::joints: {
        const JointSample& js = log.joints[ev.index];
        std::array<std::optional<double>, kNumLegs> forces;
        for (int k = 0; k < kNumLegs; ++k) {
          if (const auto f = foot_force(model.legs[k], js.q[k], js.tau[k])) forces[k] = f->norm();
        }
        gated = tracker.step(forces);
        if (!last_imu) break;
        const Vec3 omega = last_imu->gyro - ekf.state().b_w;
        for (int k = 0; k < kNumLegs; ++k) {
          if (!gated.leg_odometry[k]) continue;
          const Vec3 v = base_velocity_from_leg(model.legs[k], js.q[k], js.dq[k], omega);
          const UpdateResult r = ekf.update_leg_velocity(v);
          row.legvel_innovation = std::max(row.legvel_innovation, r.innovation_norm);
        }
        if (uses_height(variant) && gated.height_ready) {
          if (latest_vio && js.t - latest_vio->t_capture <= max_age) {
            std::optional<Rotation> att;
            if (config.rotate_feet) att = ekf.state().q;
            constexpr std::array<bool, kNumLegs> all{true, true, true, true};
            const auto h = ground_height(model, js.q, all, att);
            if (h) {
              const UpdateResult r = ekf.update_height_bias(latest_vio->pose.position.z() - *h);
              row.height_innovation = std::max(row.height_innovation, r.innovation_norm);
              row.height_measured = true;
            }
          } else {
            ++out.stale_height_skips;
          }
        }
        break;
      }
      case StreamId::vio: {
        const VioEstimate& e = log.vio[ev.index];
        if (!kind || e.kind != *kind || !last_imu) break;
        const UpdateResult r = ekf.update_vio(e);
        row.vio_innovation = std::max(row.vio_innovation, r.innovation_norm);
        latest_vio = e;
        break;
      }
      case StreamId::vicon: {
        if (variant != Variant::ekf_vicon || !last_imu) break;
        ekf.update_vicon(log.vicon[ev.index].pose);
        break;
      }
    }
  }
  flush();
  out.counters = ekf.diagnostics();
  return out;
}

void write_diagnostics_csv(const std::filesystem::path& path, const std::vector<DiagnosticRow>& rows) {
  detail::CsvWriter w(path);
  w.header({"t_ns", "legvel_innov", "vio_innov", "height_innov", "gate_rejections", "contact_FL", "contact_FR",
            "contact_HL", "contact_HR", "height_ready", "height_measured", "b_dz"});
  for (const DiagnosticRow& r : rows) {
    w.integer(r.t.ns()).real(r.legvel_innovation).real(r.vio_innovation).real(r.height_innovation);
    w.integer(static_cast<std::int64_t>(r.gate_rejections));
    for (bool c : r.contact) w.integer(c ? 1 : 0);
    w.integer(r.height_ready ? 1 : 0).integer(r.height_measured ? 1 : 0).real(r.b_dz).end_row();
  }
}

}  // namespace legvio
