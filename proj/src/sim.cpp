#include "legvio/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "legvio/preint.hpp"

namespace legvio {

namespace {

// Value with first and second time derivative.
struct Wave {
  double f = 0.0;
  double d = 0.0;
  double dd = 0.0;
};

Wave operator*(const Wave& a, const Wave& b) {
  return {a.f * b.f, a.d * b.f + a.f * b.d, a.dd * b.f + 2.0 * a.d * b.d + a.f * b.dd};
}

Wave sine(double amp, double w, double tau) {
  return {amp * std::sin(w * tau), amp * w * std::cos(w * tau), -amp * w * w * std::sin(w * tau)};
}

Wave one_minus_cos(double w, double tau) {
  return {1.0 - std::cos(w * tau), w * std::sin(w * tau), w * w * std::cos(w * tau)};
}

// Smooth 0 -> 1 -> 0 over [0, D] with ramps of length T at both ends.
Wave envelope(double tau, double D, double T) {
  T = std::min(T, 0.5 * D);
  auto rise = [T](double u) {
    const double a = kPi * u / T;
    return Wave{0.5 * (1.0 - std::cos(a)), 0.5 * kPi / T * std::sin(a), 0.5 * kPi * kPi / (T * T) * std::cos(a)};
  };
  if (tau < T) return rise(tau);
  if (tau > D - T) {
    Wave w = rise(D - tau);
    w.d = -w.d;
    return w;
  }
  return {1.0, 0.0, 0.0};
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), 0x6c76u};
  return std::mt19937_64(seq);
}

enum RngStream : std::uint64_t {
  kRobotImu = 1,
  kJoints = 2,
  kVioAccel = 3,
  kVioGyro = 4,
  kVioFrames = 5,
  kVicon = 6,
  kBiasDraw = 7,
  kRobotImpact = 8,
  kVioImpact = 9,
};

Vec3 gaussian3(std::mt19937_64& rng, double std) {
  if (std <= 0.0) return Vec3::Zero();
  std::normal_distribution<double> n(0.0, std);
  const double x = n(rng);
  const double y = n(rng);
  const double z = n(rng);
  return Vec3(x, y, z);
}

double gaussian(std::mt19937_64& rng, double std) {
  if (std <= 0.0) return 0.0;
  std::normal_distribution<double> n(0.0, std);
  return n(rng);
}

std::vector<Timestamp> grid(double duration, double rate) {
  std::vector<Timestamp> out;
  const auto n = static_cast<std::int64_t>(std::floor(duration * rate + 1e-9));
  out.reserve(static_cast<std::size_t>(n + 1));
  for (std::int64_t k = 0; k <= n; ++k) {
    out.emplace_back(std::llround(static_cast<double>(k) * 1e9 / rate));
  }
  return out;
}

bool whole_cycles(double duration, double period) {
  const double n = duration / period;
  return std::abs(n - std::round(n)) < 1e-9 * std::max(1.0, n) && std::round(n) >= 1.0;
}

struct JumpTiming {
  double t_half;   // half stance (pushoff or landing)
  double t_flight;
  double v_liftoff;
  double rise;     // trough to liftoff
};

JumpTiming jump_timing(const GaitSpec& g) {
  JumpTiming j;
  j.t_flight = g.flight_fraction * g.period;
  j.t_half = 0.5 * (g.period - j.t_flight);
  j.v_liftoff = 0.5 * kGravity * j.t_flight;
  j.rise = g.jump_height - kGravity * j.t_flight * j.t_flight / 8.0;
  return j;
}

// Cubic Hermite from (z0, 0) at s=0 to (z1, m1) at s=1 over duration T.
Wave hermite_push(double z0, double z1, double v1, double T, double tau) {
  const double s = tau / T;
  const double d = z1 - z0;
  const double m1 = v1 * T;
  const double s2 = s * s;
  const double s3 = s2 * s;
  Wave w;
  w.f = z0 + d * (-2.0 * s3 + 3.0 * s2) + m1 * (s3 - s2);
  w.d = (d * (-6.0 * s2 + 6.0 * s) + m1 * (3.0 * s2 - 2.0 * s)) / T;
  w.dd = (d * (-12.0 * s + 6.0) + m1 * (6.0 * s - 2.0)) / (T * T);
  return w;
}

}  // namespace

const char* gait_name(GaitKind kind) {
  switch (kind) {
    case GaitKind::stand: return "stand";
    case GaitKind::trot: return "trot";
    case GaitKind::jump: return "jump";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Noise defaults

SensorNoiseSpec SensorNoiseSpec::realistic() {
  SensorNoiseSpec s;
  s.robot_imu.accel_noise = 4e-3;
  s.robot_imu.gyro_noise = 2e-4;
  s.robot_imu.accel_bias_rw = 2e-4;
  s.robot_imu.gyro_bias_rw = 2e-6;
  s.robot_imu.accel_bias = Vec3(0.02, -0.02, 0.03);
  s.robot_imu.gyro_bias = Vec3(2e-4, -2e-4, 1e-3);
  s.robot_imu.accel_bias_std = 0.01;
  s.robot_imu.gyro_bias_std = 2e-4;

  s.vio_imu.accel_noise = 1.5e-2;
  s.vio_imu.gyro_noise = 1e-3;
  s.vio_imu.accel_bias_rw = 1e-4;
  s.vio_imu.gyro_bias_rw = 1e-6;
  s.vio_imu.accel_bias_std = 0.05;
  s.vio_imu.gyro_bias_std = 1e-3;

  s.encoder_noise = 1e-4;
  s.encoder_vel_noise = 0.02;
  s.torque_noise = 0.02;
  s.leg_length_error = 0.02;

  s.vio.pos_walk = 0.001;
  s.vio.z_walk = 0.002;
  s.vio.z_walk_dynamic = 0.05;
  s.vio.yaw_walk = deg2rad(0.03);
  s.vio.roll_pitch_std = deg2rad(0.3);
  s.vio.roll_pitch_tau = 2.0;
  s.vio.pos_noise = 5e-4;
  s.vio.rot_noise = deg2rad(0.1);
  s.vio.vel_noise = 0.005;
  s.vio.z_offset = 0.03;
  s.vio.latency_mean_ms = 5.8;
  s.vio.latency_std_ms = 3.1;
  s.vio.frame_delay_ms = 1000.0 / 30.0;
  s.vio.comm_delay_ms = 1.0;
  s.vio.dropout_prob = 0.01;
  s.vio.bias_error_accel = 0.01;
  s.vio.bias_error_gyro = 2e-4;

  s.vicon_pos_noise = 2e-4;
  s.vicon_rot_noise = deg2rad(0.05);
  return s;
}

void SensorNoiseSpec::validate() const {
  std::vector<std::string> bad;
  auto check = [&bad](const char* name, double v) {
    if (!(v >= 0.0) || !std::isfinite(v)) bad.emplace_back(name);
  };
  for (const auto* imu : {&robot_imu, &vio_imu}) {
    check("accel_noise", imu->accel_noise);
    check("gyro_noise", imu->gyro_noise);
    check("accel_bias_rw", imu->accel_bias_rw);
    check("gyro_bias_rw", imu->gyro_bias_rw);
    check("accel_bias_std", imu->accel_bias_std);
    check("gyro_bias_std", imu->gyro_bias_std);
    check("impact_accel_std", imu->impact_accel_std);
    check("impact_duration", imu->impact_duration);
  }
  check("encoder_noise", encoder_noise);
  check("encoder_vel_noise", encoder_vel_noise);
  check("torque_noise", torque_noise);
  check("spikes.force", spikes.force);
  check("spikes.delay", spikes.delay);
  check("spikes.duration", spikes.duration);
  check("vio.pos_walk", vio.pos_walk);
  check("vio.z_walk", vio.z_walk);
  check("vio.z_walk_dynamic", vio.z_walk_dynamic);
  check("vio.yaw_walk", vio.yaw_walk);
  check("vio.roll_pitch_std", vio.roll_pitch_std);
  check("vio.pos_noise", vio.pos_noise);
  check("vio.rot_noise", vio.rot_noise);
  check("vio.vel_noise", vio.vel_noise);
  check("vio.latency_mean_ms", vio.latency_mean_ms);
  check("vio.latency_std_ms", vio.latency_std_ms);
  check("vio.frame_delay_ms", vio.frame_delay_ms);
  check("vio.comm_delay_ms", vio.comm_delay_ms);
  check("vio.bias_error_accel", vio.bias_error_accel);
  check("vio.bias_error_gyro", vio.bias_error_gyro);
  check("vicon_pos_noise", vicon_pos_noise);
  check("vicon_rot_noise", vicon_rot_noise);
  if (!(vio.roll_pitch_tau > 0.0)) bad.emplace_back("vio.roll_pitch_tau");
  if (!(vio.dropout_prob >= 0.0 && vio.dropout_prob < 1.0)) bad.emplace_back("vio.dropout_prob");
  if (!(leg_length_error > -0.5 && leg_length_error < 0.5)) bad.emplace_back("leg_length_error");
  if (!bad.empty()) {
    std::string msg = "invalid sensor noise terms:";
    for (const auto& b : bad) msg += " " + b;
    throw std::invalid_argument(msg);
  }
}

// ---------------------------------------------------------------------------
// Gait generator

GaitGenerator::GaitGenerator(std::vector<GaitSpec> gaits, const RobotModel& robot, const MotionOptions& motion)
    : robot_(robot), motion_(motion) {
  if (gaits.empty()) throw std::invalid_argument("gait sequence is empty");
  double t = 0.0;
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  for (const GaitSpec& g : gaits) {
    Segment s;
    s.spec = g;
    s.t0 = t;
    s.p0 = p;
    s.v_prev = v;
    s.v_cmd = g.kind == GaitKind::stand ? Vec3::Zero() : Vec3(g.vx, g.vy, 0.0);
    segments_.push_back(s);
    Vec3 pe, ve, ae;
    horizontal(segments_.back(), g.duration, pe, ve, ae);
    p = pe;
    v = ve;
    t += g.duration;
  }
  total_duration_ = t;
  build_schedule();
}

const GaitGenerator::Segment& GaitGenerator::segment_at(double t) const {
  auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                             [](double x, const Segment& s) { return x < s.t0; });
  if (it == segments_.begin()) return segments_.front();
  return *(it - 1);
}

const GaitSpec& GaitGenerator::gait_at(double t) const { return segment_at(t).spec; }

void GaitGenerator::horizontal(const Segment& s, double tau, Vec3& p, Vec3& v, Vec3& a) const {
  const double Tr = std::min(motion_.ramp_time, s.spec.duration);
  const Vec3 dv = s.v_cmd - s.v_prev;
  double r, ri, rd;
  if (Tr <= 0.0 || tau >= Tr) {
    r = 1.0;
    rd = 0.0;
    ri = Tr > 0.0 ? 0.5 * Tr + (tau - Tr) : tau;
  } else {
    const double w = kPi / Tr;
    r = 0.5 * (1.0 - std::cos(w * tau));
    rd = 0.5 * w * std::sin(w * tau);
    ri = 0.5 * tau - 0.5 * std::sin(w * tau) / w;
  }
  p = s.p0 + s.v_prev * tau + dv * ri;
  v = s.v_prev + dv * r;
  a = dv * rd;
}

void GaitGenerator::vertical(const Segment& s, double tau, double& z, double& dz, double& ddz) const {
  const double h0 = motion_.stand_height;
  const GaitSpec& g = s.spec;
  Wave w{h0, 0.0, 0.0};
  if (g.kind == GaitKind::trot) {
    const Wave bounce = envelope(tau, g.duration, g.period) * one_minus_cos(2.0 * kPi / g.period, tau);
    w.f = h0 - 0.5 * g.vertical_amplitude * bounce.f;
    w.d = -0.5 * g.vertical_amplitude * bounce.d;
    w.dd = -0.5 * g.vertical_amplitude * bounce.dd;
  } else if (g.kind == GaitKind::jump) {
    const JumpTiming j = jump_timing(g);
    const double tc = std::fmod(std::clamp(tau, 0.0, g.duration), g.period);
    const double z_lo = h0 + j.rise;
    if (tc < j.t_half) {
      w = hermite_push(h0, z_lo, j.v_liftoff, j.t_half, tc);
    } else if (tc < j.t_half + j.t_flight) {
      const double u = tc - j.t_half;
      w = {z_lo + j.v_liftoff * u - 0.5 * kGravity * u * u, j.v_liftoff - kGravity * u, -kGravity};
    } else {
      // Landing mirrors the pushoff in time.
      w = hermite_push(h0, z_lo, j.v_liftoff, j.t_half, g.period - tc);
      w.d = -w.d;
    }
  }
  z = w.f;
  dz = w.d;
  ddz = w.dd;
}

void GaitGenerator::attitude(const Segment& s, double tau, Vec3& rpy, Vec3& rate, Vec3& accel) const {
  rpy = Vec3(0.0, 0.0, motion_.yaw);
  rate.setZero();
  accel.setZero();
  const GaitSpec& g = s.spec;
  if (g.kind != GaitKind::trot || g.attitude_amplitude == 0.0) return;
  const Wave env = envelope(tau, g.duration, g.period);
  const double w = 2.0 * kPi / g.period;
  const Wave roll = env * sine(g.attitude_amplitude, w, tau);
  const Wave pitch = env * sine(0.5 * g.attitude_amplitude, 2.0 * w, tau);
  rpy.x() = roll.f;
  rpy.y() = pitch.f;
  rate = Vec3(roll.d, pitch.d, 0.0);
  accel = Vec3(roll.dd, pitch.dd, 0.0);
}

BaseState GaitGenerator::base(double t) const {
  t = std::clamp(t, 0.0, total_duration_);
  const Segment& s = segment_at(t);
  const double tau = t - s.t0;
  BaseState b;
  Vec3 p, v, a;
  horizontal(s, tau, p, v, a);
  if (s.spec.kind == GaitKind::trot && s.spec.sway_amplitude != 0.0) {
    const Wave sway = envelope(tau, s.spec.duration, s.spec.period) *
                      sine(s.spec.sway_amplitude, 2.0 * kPi / s.spec.period, tau);
    const Vec3 lateral(-std::sin(motion_.yaw), std::cos(motion_.yaw), 0.0);
    p += lateral * sway.f;
    v += lateral * sway.d;
    a += lateral * sway.dd;
  }
  vertical(s, tau, p.z(), v.z(), a.z());
  b.position = p;
  b.velocity = v;
  b.acceleration = a;

  Vec3 rpy, rate, acc;
  attitude(s, tau, rpy, rate, acc);
  b.orientation = Rotation::from_rpy(rpy.x(), rpy.y(), rpy.z());
  // Body rates for Z-Y-X angles at constant yaw.
  const double cr = std::cos(rpy.x());
  const double sr = std::sin(rpy.x());
  b.omega = Vec3(rate.x(), rate.y() * cr, -rate.y() * sr);
  b.omega_dot = Vec3(acc.x(), acc.y() * cr - rate.y() * rate.x() * sr, -acc.y() * sr - rate.y() * rate.x() * cr);
  return b;
}

Vec3 GaitGenerator::neutral_foot(int leg, double t) const {
  const BaseState b = base(t);
  const Vec3 hip = Rotation::about_z(motion_.yaw) * robot_.legs[leg].hip_offset;
  return Vec3(b.position.x() + hip.x(), b.position.y() + hip.y(), 0.0);
}

void GaitGenerator::build_schedule() {
  struct Swing {
    double lo, td, stance;
    bool jump;
  };
  std::array<std::vector<Swing>, kNumLegs> swings;
  for (const Segment& s : segments_) {
    const GaitSpec& g = s.spec;
    if (g.kind == GaitKind::stand) continue;
    const int cycles = static_cast<int>(std::lround(g.duration / g.period));
    for (int c = 0; c < cycles; ++c) {
      const double tc = s.t0 + c * g.period;
      if (g.kind == GaitKind::trot) {
        const double beta = g.duty_factor;
        const double stance = beta * g.period;
        for (int leg : {FL, HR}) swings[leg].push_back({tc + beta * g.period, tc + g.period, stance, false});
        for (int leg : {FR, HL}) {
          swings[leg].push_back({tc + (beta - 0.5) * g.period, tc + 0.5 * g.period, stance, false});
        }
      } else {
        const JumpTiming j = jump_timing(g);
        for (int leg = 0; leg < kNumLegs; ++leg) {
          swings[leg].push_back({tc + j.t_half, tc + j.t_half + j.t_flight, 2.0 * j.t_half, true});
        }
      }
    }
  }
  for (int leg = 0; leg < kNumLegs; ++leg) {
    auto& sw = swings[leg];
    std::sort(sw.begin(), sw.end(), [](const Swing& a, const Swing& b) { return a.lo < b.lo; });
    auto& st = stances_[leg];
    st.clear();
    Stance first;
    first.t_begin = 0.0;
    first.foot = neutral_foot(leg, 0.0);
    st.push_back(first);
    for (const Swing& s : sw) {
      st.back().t_end = s.lo;
      st.back().ends_in_jump = s.jump;
      Stance next;
      next.t_begin = s.td;
      next.foot = neutral_foot(leg, s.td + 0.5 * s.stance);
      st.push_back(next);
    }
    st.back().t_end = total_duration_ + 1.0;
  }
}

std::array<FootState, kNumLegs> GaitGenerator::feet(double t) const {
  std::array<FootState, kNumLegs> out;
  for (int leg = 0; leg < kNumLegs; ++leg) {
    const auto& st = stances_[leg];
    auto it = std::upper_bound(st.begin(), st.end(), t,
                               [](double x, const Stance& s) { return x < s.t_begin; });
    const std::size_t i = it == st.begin() ? 0 : static_cast<std::size_t>(it - st.begin()) - 1;
    FootState& f = out[leg];
    if (t <= st[i].t_end || i + 1 >= st.size()) {
      f.position = st[i].foot;
      f.velocity.setZero();
      f.stance = true;
      f.time_since_touchdown = i == 0 ? std::numeric_limits<double>::infinity() : t - st[i].t_begin;
      continue;
    }
    const Stance& a = st[i];
    const Stance& b = st[i + 1];
    const double T = b.t_begin - a.t_end;
    const double u = (t - a.t_end) / T;
    const double w = 2.0 * kPi;
    const double h = gait_at(a.t_end).step_height;
    const Vec3 d = b.foot - a.foot;
    f.position = a.foot + d * (u - std::sin(w * u) / w);
    f.position.z() = h * 0.5 * (1.0 - std::cos(w * u));
    f.velocity = d * ((1.0 - std::cos(w * u)) / T);
    f.velocity.z() = h * 0.5 * w * std::sin(w * u) / T;
    f.stance = false;
    f.time_since_liftoff = t - a.t_end;
    f.in_jump_flight = a.ends_in_jump;
  }
  return out;
}

void validate_gaits(const std::vector<GaitSpec>& gaits, const RobotModel& robot, const MotionOptions& motion) {
  if (gaits.empty()) throw std::invalid_argument("gait sequence is empty");
  if (!(motion.stand_height > 0.0)) throw std::invalid_argument("motion.stand_height must be positive");
  if (!(motion.ramp_time >= 0.0)) throw std::invalid_argument("motion.ramp_time must be >= 0");
  for (std::size_t i = 0; i < gaits.size(); ++i) {
    const GaitSpec& g = gaits[i];
    std::vector<std::string> bad;
    if (!(g.duration > 0.0)) bad.emplace_back("duration");
    if (!(g.period > 0.0)) bad.emplace_back("period");
    if (!(g.vertical_amplitude >= 0.0)) bad.emplace_back("vertical_amplitude");
    if (!(g.jump_height >= 0.0)) bad.emplace_back("jump_height");
    if (!(g.step_height >= 0.0)) bad.emplace_back("step_height");
    if (!(g.attitude_amplitude >= 0.0)) bad.emplace_back("attitude_amplitude");
    if (!(g.sway_amplitude >= 0.0)) bad.emplace_back("sway_amplitude");
    if (g.kind != GaitKind::stand && bad.empty() && !whole_cycles(g.duration, g.period)) {
      bad.emplace_back("duration (not a whole number of periods)");
    }
    if (g.kind == GaitKind::trot && !(g.duty_factor >= 0.5 && g.duty_factor < 1.0)) bad.emplace_back("duty_factor");
    if (g.kind == GaitKind::jump) {
      if (!(g.flight_fraction > 0.0 && g.flight_fraction < 1.0)) {
        bad.emplace_back("flight_fraction");
      } else if (g.period > 0.0 && !(jump_timing(g).rise > 0.0)) {
        bad.emplace_back("jump_height (below ballistic apex for this flight time)");
      }
    }
    if (!bad.empty()) {
      std::string msg = "gait[" + std::to_string(i) + "] (" + gait_name(g.kind) + ") invalid:";
      for (const auto& b : bad) msg += " " + b;
      throw std::invalid_argument(msg);
    }
  }

  // Workspace check on a 1 ms grid.
  const GaitGenerator gen(gaits, robot, motion);
  for (const Timestamp& ts : grid(gen.duration(), 1000.0)) {
    const double t = ts.seconds();
    const BaseState b = gen.base(t);
    const auto feet = gen.feet(t);
    for (int leg = 0; leg < kNumLegs; ++leg) {
      const Vec3 p_bk = b.orientation.inverse() * (feet[leg].position - b.position);
      if (!ik_foot(robot.legs[leg], p_bk, 1e-3)) {
        std::ostringstream os;
        os << "foot out of leg workspace: leg " << kLegNames[leg] << " at t=" << t << " s";
        throw std::invalid_argument(os.str());
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Sensors

Trajectory generate_truth(const GaitGenerator& gen, double rate) {
  Trajectory out;
  for (const Timestamp& t : grid(gen.duration(), rate)) {
    const BaseState b = gen.base(t.seconds());
    out.push_back({t, Pose{b.position, b.orientation}, b.velocity});
  }
  return out;
}

std::vector<ImuSample> synthesize_imu(const GaitGenerator& gen, const ImuNoise& noise, const Extrinsics& extrinsics,
                                      double rate, std::uint64_t seed, ImuSource source) {
  std::mt19937_64 rng = make_rng(seed, source == ImuSource::robot_imu ? kRobotImu : kVioAccel);
  Vec3 ba = noise.accel_bias + gaussian3(rng, noise.accel_bias_std);
  Vec3 bg = noise.gyro_bias + gaussian3(rng, noise.gyro_bias_std);
  const double sa = noise.accel_noise * std::sqrt(rate);
  const double sg = noise.gyro_noise * std::sqrt(rate);
  const double dt = 1.0 / rate;
  const Vec3 g = gravity_vector();
  const Vec3& r = extrinsics.translation;
  const Rotation Rsb = extrinsics.rotation.inverse();

  std::mt19937_64 impact_rng = make_rng(seed, source == ImuSource::robot_imu ? kRobotImpact : kVioImpact);

  std::vector<ImuSample> out;
  for (const Timestamp& t : grid(gen.duration(), rate)) {
    const BaseState b = gen.base(t.seconds());
    const Vec3 a_body = b.orientation.inverse() * (b.acceleration - g) + b.omega_dot.cross(r) +
                        b.omega.cross(b.omega.cross(r));
    ImuSample s;
    s.t = t;
    s.source = source;
    s.accel = Rsb * a_body + ba + gaussian3(rng, sa);
    s.gyro = Rsb * b.omega + bg + gaussian3(rng, sg);
    if (noise.impact_accel_std > 0.0) {
      double since = std::numeric_limits<double>::infinity();
      for (const FootState& f : gen.feet(t.seconds())) {
        if (f.stance) since = std::min(since, f.time_since_touchdown);
      }
      if (since < noise.impact_duration) s.accel += gaussian3(impact_rng, noise.impact_accel_std);
    }
    out.push_back(s);
    ba += gaussian3(rng, noise.accel_bias_rw * std::sqrt(dt));
    bg += gaussian3(rng, noise.gyro_bias_rw * std::sqrt(dt));
  }
  return out;
}

std::vector<JointSample> synthesize_joints(const GaitGenerator& gen, const RobotModel& true_robot,
                                           const SensorNoiseSpec& noise, double rate, std::uint64_t seed) {
  std::mt19937_64 rng = make_rng(seed, kJoints);
  std::uniform_real_distribution<double> jitter(0.8, 1.2);
  const Vec3 g = gravity_vector();
  std::vector<JointSample> out;
  // One spike magnitude per leg and flight phase.
  std::array<double, kNumLegs> spike_gain{};
  std::array<bool, kNumLegs> was_swing{};

  for (const Timestamp& t : grid(gen.duration(), rate)) {
    const BaseState b = gen.base(t.seconds());
    const auto feet = gen.feet(t.seconds());
    const Rotation Rinv = b.orientation.inverse();
    int n_stance = 0;
    for (const FootState& f : feet) n_stance += f.stance ? 1 : 0;
    const double load = n_stance > 0 ? true_robot.mass * (b.acceleration.z() - g.z()) / n_stance : 0.0;

    JointSample js;
    js.t = t;
    for (int leg = 0; leg < kNumLegs; ++leg) {
      const LegModel& model = true_robot.legs[leg];
      const FootState& f = feet[leg];
      const Vec3 p_bk = Rinv * (f.position - b.position);
      const auto q = ik_foot(model, p_bk);
      if (!q) {
        std::ostringstream os;
        os << "inverse kinematics failed: leg " << kLegNames[leg] << " at t=" << t.seconds() << " s";
        throw std::runtime_error(os.str());
      }
      const Mat3 J = jac_foot(model, *q);
      const Vec3 v_bk = Rinv * (f.velocity - b.velocity) - b.omega.cross(p_bk);
      const Vec3 dq = J.partialPivLu().solve(v_bk);

      Vec3 force = Vec3::Zero();
      if (f.stance) force = Rinv * Vec3(0.0, 0.0, -load);
      if (!f.stance && !was_swing[leg]) spike_gain[leg] = jitter(rng);
      was_swing[leg] = !f.stance;
      if (noise.spikes.enabled && f.in_jump_flight && f.time_since_liftoff >= noise.spikes.delay &&
          f.time_since_liftoff < noise.spikes.delay + noise.spikes.duration) {
        force += Vec3(0.0, 0.0, -noise.spikes.force * spike_gain[leg]);
      }
      js.q[leg] = *q + gaussian3(rng, noise.encoder_noise);
      js.dq[leg] = dq + gaussian3(rng, noise.encoder_vel_noise);
      js.tau[leg] = J.transpose() * force + gaussian3(rng, noise.torque_noise);
    }
    out.push_back(js);
  }
  return out;
}

VioStreams synthesize_vio(const GaitGenerator& gen, const SensorNoiseSpec& noise, const Extrinsics& vio_extrinsics,
                          const SensorRates& rates, std::uint64_t seed) {
  VioStreams out;
  const VioNoise& vn = noise.vio;

  // VIO IMU: one bias draw shared by the accel and gyro streams.
  std::mt19937_64 bias_rng = make_rng(seed, kBiasDraw);
  ImuNoise imu = noise.vio_imu;
  imu.accel_bias += gaussian3(bias_rng, imu.accel_bias_std);
  imu.gyro_bias += gaussian3(bias_rng, imu.gyro_bias_std);
  imu.accel_bias_std = 0.0;
  imu.gyro_bias_std = 0.0;
  const auto accel = synthesize_imu(gen, imu, vio_extrinsics, rates.vio_accel, seed, ImuSource::vio_imu);
  const auto gyro = synthesize_imu(gen, imu, vio_extrinsics, rates.vio_gyro, seed ^ 0x9e3779b97f4a7c15ULL,
                                   ImuSource::vio_imu);
  std::size_t ia = 0;
  for (const ImuSample& s : gyro) {
    while (ia + 1 < accel.size() && accel[ia + 1].t <= s.t) ++ia;
    ImuSample m = s;
    m.accel = accel[ia].accel;
    out.vio_imu.push_back(m);
  }

  // Frames.
  std::mt19937_64 rng = make_rng(seed, kVioFrames);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Vec3 drift = Vec3::Zero();
  double yaw_drift = 0.0;
  double roll_err = gaussian(rng, vn.roll_pitch_std);
  double pitch_err = gaussian(rng, vn.roll_pitch_std);
  double t_prev = 0.0;
  const auto comm = static_cast<std::int64_t>(std::llround(vn.comm_delay_ms * 1e6));
  for (const Timestamp& tc : grid(gen.duration(), rates.vio_frame)) {
    const double t = tc.seconds();
    const double dt = t - t_prev;
    if (dt > 0.0) {
      const bool jumping = gen.gait_at(0.5 * (t + t_prev)).kind == GaitKind::jump;
      const double zw = jumping ? vn.z_walk_dynamic : vn.z_walk;
      drift.x() += gaussian(rng, vn.pos_walk * std::sqrt(dt));
      drift.y() += gaussian(rng, vn.pos_walk * std::sqrt(dt));
      drift.z() += gaussian(rng, zw * std::sqrt(dt));
      yaw_drift += gaussian(rng, vn.yaw_walk * std::sqrt(dt));
      const double phi = std::exp(-dt / vn.roll_pitch_tau);
      const double s_gm = vn.roll_pitch_std * std::sqrt(1.0 - phi * phi);
      roll_err = phi * roll_err + gaussian(rng, s_gm);
      pitch_err = phi * pitch_err + gaussian(rng, s_gm);
    }
    t_prev = t;

    const BaseState b = gen.base(t);
    VioEstimate f;
    f.kind = VioKind::frame;
    f.t_capture = tc;
    f.pose.position = b.position + drift + Vec3(0.0, 0.0, vn.z_offset) + gaussian3(rng, vn.pos_noise);
    f.pose.orientation =
        so3_exp(Vec3(roll_err, pitch_err, yaw_drift) + gaussian3(rng, vn.rot_noise)) * b.orientation;
    f.vel_world = Rotation::about_z(yaw_drift) * b.velocity + gaussian3(rng, vn.vel_noise);
    const double latency_ms = std::max(0.0, vn.latency_mean_ms + gaussian(rng, vn.latency_std_ms));
    f.t_available = tc + std::llround((latency_ms + vn.frame_delay_ms) * 1e6) + comm;
    const bool dropped = vn.dropout_prob > 0.0 && uniform(rng) < vn.dropout_prob;
    if (dropped) {
      ++out.dropped_frames;
      continue;
    }
    out.frames.push_back(f);
  }

  // Predictions from the real predictor on the VIO IMU.
  VioPredictor::Options opt;
  opt.output_delay_ns = comm;
  opt.imu_extrinsics = vio_extrinsics;
  VioPredictor predictor(opt);
  predictor.set_biases(imu.accel_bias + gaussian3(bias_rng, vn.bias_error_accel),
                       imu.gyro_bias + gaussian3(bias_rng, vn.bias_error_gyro));
  std::vector<VioEstimate> by_arrival = out.frames;
  std::stable_sort(by_arrival.begin(), by_arrival.end(),
                   [](const VioEstimate& a, const VioEstimate& b) { return a.t_available < b.t_available; });
  std::vector<VioEstimate> predictions;
  std::size_t next = 0;
  for (const ImuSample& s : out.vio_imu) {
    while (next < by_arrival.size() && by_arrival[next].t_available <= s.t) predictor.on_frame(by_arrival[next++]);
    if (auto p = predictor.on_imu(s)) predictions.push_back(*p);
  }

  out.combined = by_arrival;
  out.combined.insert(out.combined.end(), predictions.begin(), predictions.end());
  std::stable_sort(out.combined.begin(), out.combined.end(),
                   [](const VioEstimate& a, const VioEstimate& b) { return a.t_available < b.t_available; });
  return out;
}

std::vector<PoseSample> synthesize_vicon(const GaitGenerator& gen, const SensorNoiseSpec& noise, double rate,
                                         std::uint64_t seed) {
  std::mt19937_64 rng = make_rng(seed, kVicon);
  std::vector<PoseSample> out;
  for (const Timestamp& t : grid(gen.duration(), rate)) {
    const BaseState b = gen.base(t.seconds());
    PoseSample p;
    p.t = t;
    p.pose.position = b.position + gaussian3(rng, noise.vicon_pos_noise);
    p.pose.orientation = b.orientation * so3_exp(gaussian3(rng, noise.vicon_rot_noise));
    out.push_back(p);
  }
  return out;
}

SimRun simulate(const Scenario& scenario, std::uint64_t seed) {
  scenario.robot.validate();
  scenario.noise.validate();
  for (double r : {scenario.rates.imu, scenario.rates.joints, scenario.rates.vicon, scenario.rates.truth,
                   scenario.rates.vio_frame, scenario.rates.vio_gyro, scenario.rates.vio_accel}) {
    if (!(r > 0.0)) throw std::invalid_argument("sensor rates must be positive");
  }
  if (scenario.rates.truth != scenario.rates.imu) {
    throw std::invalid_argument("truth rate must equal the robot IMU rate (shared evaluation grid)");
  }
  RobotModel true_robot = scenario.robot;
  for (LegModel& leg : true_robot.legs) {
    leg.upper_length *= 1.0 + scenario.noise.leg_length_error;
    leg.lower_length *= 1.0 + scenario.noise.leg_length_error;
  }
  // Feet are planned with the true robot; it is the one walking.
  validate_gaits(scenario.gaits, true_robot, scenario.motion);
  const GaitGenerator gen(scenario.gaits, true_robot, scenario.motion);

  SimRun run;
  run.truth = generate_truth(gen, scenario.rates.truth);
  for (const TrajectorySample& s : run.truth) {
    const auto feet = gen.feet(s.t.seconds());
    std::array<bool, kNumLegs> c{};
    for (int k = 0; k < kNumLegs; ++k) c[k] = feet[k].stance;
    run.truth_contact.push_back(c);
  }
  run.log.imu = synthesize_imu(gen, scenario.noise.robot_imu, scenario.robot.imu, scenario.rates.imu, seed);
  run.log.joints = synthesize_joints(gen, true_robot, scenario.noise, scenario.rates.joints, seed);
  VioStreams vio = synthesize_vio(gen, scenario.noise, scenario.robot.vio, scenario.rates, seed);
  run.log.vio = std::move(vio.combined);
  run.vio_imu = std::move(vio.vio_imu);
  run.vio_frames = vio.frames.size();
  run.vio_dropped_frames = vio.dropped_frames;
  run.log.vicon = synthesize_vicon(gen, scenario.noise, scenario.rates.vicon, seed);
  return run;
}

}  // namespace legvio
