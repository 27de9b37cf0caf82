#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>

#include "legvio/mathcore.hpp"
#include "legvio/streams.hpp"

namespace legvio {

/// Error-state layout: (dp, dtheta, dv, db_a, db_w, db_dz).
namespace idx {
constexpr int p = 0;
constexpr int theta = 3;
constexpr int v = 6;
constexpr int ba = 9;
constexpr int bw = 12;
constexpr int bdz = 15;
constexpr int dim = 16;
}  // namespace idx

using ErrorVec = Eigen::Matrix<double, idx::dim, 1>;
using ErrorCov = Eigen::Matrix<double, idx::dim, idx::dim>;

struct EkfState {
  Vec3 p = Vec3::Zero();       // ^W p_WB
  Rotation q;                  // ^W q_WB
  Vec3 v_body = Vec3::Zero();  // ^B v_WB
  Vec3 b_a = Vec3::Zero();
  Vec3 b_w = Vec3::Zero();
  double b_dz = 0.0;           // VIO height minus kinematic height

  Vec3 velocity_world() const { return q * v_body; }
};

struct NoiseConfig {
  // Continuous-time densities.
  double accel_noise = 2e-3;     // m/s^2/sqrt(Hz)
  double gyro_noise = 1e-4;      // rad/s/sqrt(Hz)
  double accel_bias_rw = 1e-4;   // m/s^3/sqrt(Hz)
  double gyro_bias_rw = 1e-5;    // rad/s^2/sqrt(Hz)
  double height_bias_rw = 1e-3;  // m/sqrt(s)

  // Measurement standard deviations.
  double legvel_std = 0.05;                           // m/s
  double vio_pos_std = 0.005;                         // m
  Vec3 vio_rot_std = Vec3::Constant(deg2rad(1.0));    // rad, body axes
  double vio_vel_std = 0.05;                          // m/s
  double height_std = 0.01;                           // m
  double vicon_pos_std = 1e-3;                        // m
  double vicon_rot_std = deg2rad(0.2);                // rad

  /// Mahalanobis gate: chi-square quantile per measurement dimension.
  double gate_probability = 0.997;
  bool gate_enabled = true;

  // Initial covariance diagonal (SI units squared).
  double init_pos_var = 1e-4;
  double init_rot_var = 1e-4;
  double init_vel_var = 1e-2;
  double init_accel_bias_var = 1e-2;
  double init_gyro_bias_var = 1e-6;
  double init_bdz_var = 1e-2;

  void validate() const;
};

/// chi-square quantile for `dof` degrees of freedom.
double chi2_quantile(double probability, int dof);

struct UpdateResult {
  bool accepted = false;
  double mahalanobis2 = 0.0;
  double innovation_norm = 0.0;
};

struct EkfDiagnostics {
  std::size_t legvel_updates = 0;
  std::size_t legvel_rejections = 0;
  std::size_t vio_updates = 0;
  std::size_t vio_rejections = 0;
  std::size_t height_updates = 0;
  std::size_t height_rejections = 0;
  std::size_t vicon_updates = 0;
  std::size_t vicon_rejections = 0;

  std::size_t rejections() const {
    return legvel_rejections + vio_rejections + height_rejections + vicon_rejections;
  }
};

/// Error-state EKF over base pose, body velocity, IMU biases and the VIO
/// height bias. Rotation errors are right (body-frame) perturbations:
/// R_true = R exp(dtheta).
///
/// Single owner; consumes one event at a time.
class Ekf {
 public:
  Ekf(const NoiseConfig& noise, const EkfState& initial, const Vec3& gravity = gravity_vector());

  /// IMU propagation, dt in (0, 10 ms].
  void propagate(const ImuSample& imu, double dt);

  /// Leg-odometry body velocity (one leg).
  UpdateResult update_leg_velocity(const Vec3& v_body_measured);
  /// VIO pose and world velocity, position coupled to the height bias.
  UpdateResult update_vio(const VioEstimate& vio);
  /// Height-bias observation dz = [p_vio]_z - kinematic height.
  UpdateResult update_height_bias(double delta_z);
  /// Motion-capture pose (no height bias, no velocity).
  UpdateResult update_vicon(const Pose& pose);

  /// Frozen biases keep their value: no process noise, zero gain rows.
  void freeze_biases(bool frozen) { biases_frozen_ = frozen; }
  bool biases_frozen() const { return biases_frozen_; }

  const EkfState& state() const { return state_; }
  const ErrorCov& covariance() const { return P_; }
  const NoiseConfig& noise() const { return noise_; }
  const EkfDiagnostics& diagnostics() const { return diag_; }
  void set_state(const EkfState& s) { state_ = s; }
  void set_covariance(const ErrorCov& P) { P_ = P; }

 private:
  template <int M>
  UpdateResult update(const Eigen::Matrix<double, M, 1>& residual,
                      const Eigen::Matrix<double, M, idx::dim>& H,
                      const Eigen::Matrix<double, M, M>& R);
  void inject(const ErrorVec& dx);
  double gate_threshold(int dof) const;

  NoiseConfig noise_;
  Vec3 gravity_;
  EkfState state_;
  ErrorCov P_;
  bool biases_frozen_ = false;
  EkfDiagnostics diag_;
  std::array<double, 10> gate_{};  // chi2 threshold by dof, 0 = unused
};

}  // namespace legvio
