#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "legvio/kinematics.hpp"
#include "legvio/streams.hpp"

namespace legvio {

enum class GaitKind { stand, trot, jump };

const char* gait_name(GaitKind kind);

struct GaitSpec {
  GaitKind kind = GaitKind::stand;
  double vx = 0.0;                  // commanded, m/s (world x)
  double vy = 0.0;                  // commanded, m/s (world y)
  double period = 0.4;              // gait cycle, s
  double vertical_amplitude = 0.02; // trot: base z peak-to-peak, one bounce per cycle, m
  double jump_height = 0.12;        // jump: base peak-to-trough, m
  double flight_fraction = 0.5;     // jump: share of the cycle airborne
  double duty_factor = 0.6;         // trot: stance share per leg
  double step_height = 0.05;        // swing foot apex above ground, m
  double attitude_amplitude = 0.0;  // trot: roll/pitch oscillation, rad
  double sway_amplitude = 0.0;      // trot: lateral base oscillation, m
  double duration = 10.0;           // s; trot/jump need whole cycles
};

/// Gait-independent geometry of the generated motion.
struct MotionOptions {
  double stand_height = 0.20;  // base height when standing, m
  double ramp_time = 0.5;      // horizontal velocity transitions, s
  double yaw = 0.0;            // constant heading, rad
};

struct ImuNoise {
  double accel_noise = 0.0;  // m/s^2/sqrt(Hz)
  double gyro_noise = 0.0;   // rad/s/sqrt(Hz)
  double accel_bias_rw = 0.0;
  double gyro_bias_rw = 0.0;
  Vec3 accel_bias = Vec3::Zero();  // initial value
  Vec3 gyro_bias = Vec3::Zero();
  double accel_bias_std = 0.0;     // per-seed spread of the initial value
  double gyro_bias_std = 0.0;
  /// Extra accelerometer noise for a short window after any foot touchdown.
  double impact_accel_std = 0.0;  // m/s^2 per sample
  double impact_duration = 0.03;  // s
};

struct VioNoise {
  double pos_walk = 0.0;         // x, y drift, m/sqrt(s)
  double z_walk = 0.0;           // z drift outside jumping, m/sqrt(s)
  double z_walk_dynamic = 0.0;   // z drift while jumping, m/sqrt(s)
  double yaw_walk = 0.0;         // rad/sqrt(s)
  double roll_pitch_std = 0.0;   // bounded first-order Gauss-Markov, rad
  double roll_pitch_tau = 1.0;   // s
  double pos_noise = 0.0;        // per-frame white, m
  double rot_noise = 0.0;        // per-frame white, rad
  double vel_noise = 0.0;        // per-frame white, m/s
  double z_offset = 0.0;         // constant height offset, m
  double latency_mean_ms = 0.0;  // optimisation time
  double latency_std_ms = 0.0;
  double frame_delay_ms = 0.0;   // frame pipeline delay on top of optimisation
  double comm_delay_ms = 0.0;    // added to frames and predictions
  double dropout_prob = 0.0;
  double bias_error_accel = 0.0; // VIO's bias estimate error, 1-sigma
  double bias_error_gyro = 0.0;
};

struct RetractionSpikes {
  bool enabled = false;
  double force = 12.0;     // N at the foot
  double delay = 0.050;    // s after liftoff
  double duration = 0.010; // s
};

struct SensorNoiseSpec {
  ImuNoise robot_imu;
  ImuNoise vio_imu;
  double encoder_noise = 0.0;      // rad
  double encoder_vel_noise = 0.0;  // rad/s
  double torque_noise = 0.0;       // N m
  double leg_length_error = 0.0;   // true = (1 + e) * model lengths
  RetractionSpikes spikes;
  VioNoise vio;
  double vicon_pos_noise = 0.0;
  double vicon_rot_noise = 0.0;

  static SensorNoiseSpec noiseless() { return {}; }
  /// Defaults used by the shipped scenarios.
  static SensorNoiseSpec realistic();
  void validate() const;
};

struct SensorRates {
  double imu = 1000.0;
  double joints = 1000.0;
  double vicon = 1000.0;
  double truth = 1000.0;
  double vio_frame = 30.0;
  double vio_gyro = 200.0;
  double vio_accel = 62.5;
};

/// Full kinematic truth at one instant.
struct BaseState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();      // world
  Vec3 acceleration = Vec3::Zero();  // world
  Rotation orientation;
  Vec3 omega = Vec3::Zero();         // body
  Vec3 omega_dot = Vec3::Zero();     // body
};

struct FootState {
  Vec3 position = Vec3::Zero();  // world
  Vec3 velocity = Vec3::Zero();  // world
  bool stance = true;
  double time_since_liftoff = -1.0;   // s, < 0 in stance
  double time_since_touchdown = -1.0;  // s, < 0 in swing, +inf in the initial stance
  bool in_jump_flight = false;
};

/// Deterministic base motion and footstep schedule for a gait sequence.
class GaitGenerator {
 public:
  GaitGenerator(std::vector<GaitSpec> gaits, const RobotModel& robot, const MotionOptions& motion = {});

  double duration() const { return total_duration_; }
  BaseState base(double t) const;
  std::array<FootState, kNumLegs> feet(double t) const;
  /// Gait active at t (the last one past the end).
  const GaitSpec& gait_at(double t) const;
  const RobotModel& robot() const { return robot_; }

 private:
  struct Segment {
    GaitSpec spec;
    double t0 = 0.0;
    Vec3 p0 = Vec3::Zero();   // horizontal position at t0
    Vec3 v_prev = Vec3::Zero();
    Vec3 v_cmd = Vec3::Zero();
  };
  struct Stance {
    double t_begin = 0.0;
    double t_end = 0.0;  // liftoff
    Vec3 foot = Vec3::Zero();
    bool ends_in_jump = false;
  };

  const Segment& segment_at(double t) const;
  void horizontal(const Segment& s, double tau, Vec3& p, Vec3& v, Vec3& a) const;
  void vertical(const Segment& s, double tau, double& z, double& dz, double& ddz) const;
  void attitude(const Segment& s, double tau, Vec3& rpy, Vec3& rate, Vec3& accel) const;
  void build_schedule();
  Vec3 neutral_foot(int leg, double t) const;

  std::vector<Segment> segments_;
  RobotModel robot_;
  MotionOptions motion_;
  double total_duration_ = 0.0;
  std::array<std::vector<Stance>, kNumLegs> stances_;
};

/// Checks every gait spec and the leg workspace along the whole run.
void validate_gaits(const std::vector<GaitSpec>& gaits, const RobotModel& robot,
                    const MotionOptions& motion = {});

Trajectory generate_truth(const GaitGenerator& gen, double rate);

std::vector<ImuSample> synthesize_imu(const GaitGenerator& gen, const ImuNoise& noise,
                                      const Extrinsics& extrinsics, double rate, std::uint64_t seed,
                                      ImuSource source = ImuSource::robot_imu);

/// Joint encoders and torques of the true robot (`true_robot` may differ
/// from the estimator's model by the leg length error).
std::vector<JointSample> synthesize_joints(const GaitGenerator& gen, const RobotModel& true_robot,
                                           const SensorNoiseSpec& noise, double rate, std::uint64_t seed);

struct VioStreams {
  std::vector<ImuSample> vio_imu;     // 200 Hz, accel held from 62.5 Hz
  std::vector<VioEstimate> frames;    // kind = frame, ordered by capture
  std::vector<VioEstimate> combined;  // frames + predictions, ordered by availability
  std::size_t dropped_frames = 0;
};

VioStreams synthesize_vio(const GaitGenerator& gen, const SensorNoiseSpec& noise, const Extrinsics& vio_extrinsics,
                          const SensorRates& rates, std::uint64_t seed);

std::vector<PoseSample> synthesize_vicon(const GaitGenerator& gen, const SensorNoiseSpec& noise, double rate,
                                         std::uint64_t seed);

struct SimRun {
  SensorLog log;
  Trajectory truth;
  std::vector<std::array<bool, kNumLegs>> truth_contact;  // aligned with truth
  std::vector<ImuSample> vio_imu;
  std::size_t vio_frames = 0;
  std::size_t vio_dropped_frames = 0;
};

struct Scenario {
  std::vector<GaitSpec> gaits;
  MotionOptions motion;
  SensorNoiseSpec noise;
  SensorRates rates;
  RobotModel robot = RobotModel::solo12();
};

/// Generates truth and every sensor stream. Deterministic in (scenario, seed).
SimRun simulate(const Scenario& scenario, std::uint64_t seed);

}  // namespace legvio
