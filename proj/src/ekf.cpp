#include "legvio/ekf.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <stdexcept>

namespace legvio {

namespace {

constexpr double kMaxDt = 0.010;

using Mat16 = ErrorCov;
using Mat16x13 = Eigen::Matrix<double, idx::dim, 13>;
using Mat13 = Eigen::Matrix<double, 13, 13>;

}  // namespace

void NoiseConfig::validate() const {
  const double all[] = {accel_noise,    gyro_noise,         accel_bias_rw,      gyro_bias_rw,    height_bias_rw,
                        legvel_std,     vio_pos_std,        vio_vel_std,        height_std,      vicon_pos_std,
                        vicon_rot_std,  init_pos_var,       init_rot_var,       init_vel_var,    init_accel_bias_var,
                        init_gyro_bias_var, init_bdz_var,   vio_rot_std.x(),    vio_rot_std.y(), vio_rot_std.z()};
  for (double v : all) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("noise terms must be positive");
  }
  if (!(gate_probability > 0.0 && gate_probability < 1.0)) {
    throw std::invalid_argument("gate probability must lie in (0, 1)");
  }
}

double chi2_quantile(double probability, int dof) {
  boost::math::chi_squared dist(dof);
  return boost::math::quantile(dist, probability);
}

Ekf::Ekf(const NoiseConfig& noise, const EkfState& initial, const Vec3& gravity)
    : noise_(noise), gravity_(gravity), state_(initial) {
  noise_.validate();
  P_.setZero();
  P_.block<3, 3>(idx::p, idx::p).diagonal().setConstant(noise_.init_pos_var);
  P_.block<3, 3>(idx::theta, idx::theta).diagonal().setConstant(noise_.init_rot_var);
  P_.block<3, 3>(idx::v, idx::v).diagonal().setConstant(noise_.init_vel_var);
  P_.block<3, 3>(idx::ba, idx::ba).diagonal().setConstant(noise_.init_accel_bias_var);
  P_.block<3, 3>(idx::bw, idx::bw).diagonal().setConstant(noise_.init_gyro_bias_var);
  P_(idx::bdz, idx::bdz) = noise_.init_bdz_var;
  for (int dof : {1, 3, 6, 9}) gate_[dof] = chi2_quantile(noise_.gate_probability, dof);
}

double Ekf::gate_threshold(int dof) const {
  if (gate_[dof] > 0.0) return gate_[dof];
  return chi2_quantile(noise_.gate_probability, dof);
}

void Ekf::propagate(const ImuSample& imu, double dt) {
  if (!(dt > 0.0) || dt > kMaxDt + 1e-12) throw std::invalid_argument("propagate: dt out of (0, 10 ms]");

  const Vec3 omega = imu.gyro - state_.b_w;
  const Vec3 acc = imu.accel - state_.b_a;
  const Mat3 R = state_.q.matrix();
  const Vec3 v = state_.v_body;

  // Linearised error dynamics about the pre-step nominal state.
  Mat16 F = Mat16::Zero();
  F.block<3, 3>(idx::p, idx::theta) = -R * skew(v);
  F.block<3, 3>(idx::p, idx::v) = R;
  F.block<3, 3>(idx::theta, idx::theta) = -skew(omega);
  F.block<3, 3>(idx::theta, idx::bw) = -Mat3::Identity();
  F.block<3, 3>(idx::v, idx::theta) = skew(R.transpose() * gravity_);
  F.block<3, 3>(idx::v, idx::v) = -skew(omega);
  F.block<3, 3>(idx::v, idx::ba) = -Mat3::Identity();
  F.block<3, 3>(idx::v, idx::bw) = -skew(v);

  // Noise input: (n_a, n_g, n_ba, n_bw, n_dz).
  Mat16x13 G = Mat16x13::Zero();
  G.block<3, 3>(idx::theta, 3) = -Mat3::Identity();
  G.block<3, 3>(idx::v, 0) = -Mat3::Identity();
  G.block<3, 3>(idx::v, 3) = -skew(v);
  G.block<3, 3>(idx::ba, 6) = Mat3::Identity();
  G.block<3, 3>(idx::bw, 9) = Mat3::Identity();
  G(idx::bdz, 12) = 1.0;

  Mat13 Qc = Mat13::Zero();
  Qc.block<3, 3>(0, 0).diagonal().setConstant(noise_.accel_noise * noise_.accel_noise);
  Qc.block<3, 3>(3, 3).diagonal().setConstant(noise_.gyro_noise * noise_.gyro_noise);
  if (!biases_frozen_) {
    Qc.block<3, 3>(6, 6).diagonal().setConstant(noise_.accel_bias_rw * noise_.accel_bias_rw);
    Qc.block<3, 3>(9, 9).diagonal().setConstant(noise_.gyro_bias_rw * noise_.gyro_bias_rw);
  }
  Qc(12, 12) = noise_.height_bias_rw * noise_.height_bias_rw;

  const Mat16 Phi = Mat16::Identity() + F * dt;
  P_ = Phi * P_ * Phi.transpose() + G * Qc * G.transpose() * dt;
  P_ = 0.5 * (P_ + P_.transpose()).eval();

  // Nominal state.
  Vec3 v_world = R * v;
  v_world += (R * acc + gravity_) * dt;
  state_.q = state_.q * so3_exp(omega * dt);
  state_.v_body = state_.q.inverse() * v_world;
  state_.p += v_world * dt;
}

template <int M>
UpdateResult Ekf::update(const Eigen::Matrix<double, M, 1>& residual,
                         const Eigen::Matrix<double, M, idx::dim>& H,
                         const Eigen::Matrix<double, M, M>& R) {
  using MatM = Eigen::Matrix<double, M, M>;
  using MatK = Eigen::Matrix<double, idx::dim, M>;

  UpdateResult result;
  result.innovation_norm = residual.norm();
  const MatK PHt = P_ * H.transpose();
  const MatM S = H * PHt + R;
  const auto S_ldlt = S.ldlt();
  result.mahalanobis2 = residual.dot(S_ldlt.solve(residual));
  if (noise_.gate_enabled && !(result.mahalanobis2 <= gate_threshold(M))) return result;

  MatK K = S_ldlt.solve(PHt.transpose()).transpose();
  if (biases_frozen_) K.template middleRows<6>(idx::ba).setZero();

  // Joseph form: valid for the masked (suboptimal) gain as well.
  const Mat16 IKH = Mat16::Identity() - K * H;
  P_ = IKH * P_ * IKH.transpose() + K * R * K.transpose();
  P_ = 0.5 * (P_ + P_.transpose()).eval();

  inject(K * residual);
  result.accepted = true;
  return result;
}

void Ekf::inject(const ErrorVec& dx) {
  state_.p += dx.segment<3>(idx::p);
  state_.q = state_.q * so3_exp(dx.segment<3>(idx::theta));
  state_.v_body += dx.segment<3>(idx::v);
  state_.b_a += dx.segment<3>(idx::ba);
  state_.b_w += dx.segment<3>(idx::bw);
  state_.b_dz += dx(idx::bdz);
}

UpdateResult Ekf::update_leg_velocity(const Vec3& v_body_measured) {
  Eigen::Matrix<double, 3, idx::dim> H = Eigen::Matrix<double, 3, idx::dim>::Zero();
  H.block<3, 3>(0, idx::v) = Mat3::Identity();
  const Mat3 R = Mat3::Identity() * (noise_.legvel_std * noise_.legvel_std);
  const Vec3 r = v_body_measured - state_.v_body;
  const UpdateResult res = update<3>(r, H, R);
  res.accepted ? ++diag_.legvel_updates : ++diag_.legvel_rejections;
  return res;
}

UpdateResult Ekf::update_vio(const VioEstimate& vio) {
  using Vec9 = Eigen::Matrix<double, 9, 1>;
  using Mat9 = Eigen::Matrix<double, 9, 9>;
  const Mat3 Rm = state_.q.matrix();
  const Vec3 v = state_.v_body;

  Vec9 r;
  r.segment<3>(0) = vio.pose.position - (state_.p + Vec3(0.0, 0.0, state_.b_dz));
  r.segment<3>(3) = so3_log(state_.q.inverse() * vio.pose.orientation);
  r.segment<3>(6) = vio.vel_world - Rm * v;

  Eigen::Matrix<double, 9, idx::dim> H = Eigen::Matrix<double, 9, idx::dim>::Zero();
  H.block<3, 3>(0, idx::p) = Mat3::Identity();
  H(2, idx::bdz) = 1.0;
  H.block<3, 3>(3, idx::theta) = Mat3::Identity();
  H.block<3, 3>(6, idx::v) = Rm;
  H.block<3, 3>(6, idx::theta) = -Rm * skew(v);

  Mat9 R = Mat9::Zero();
  R.block<3, 3>(0, 0).diagonal().setConstant(noise_.vio_pos_std * noise_.vio_pos_std);
  R.block<3, 3>(3, 3).diagonal() = noise_.vio_rot_std.cwiseProduct(noise_.vio_rot_std);
  R.block<3, 3>(6, 6).diagonal().setConstant(noise_.vio_vel_std * noise_.vio_vel_std);

  const UpdateResult res = update<9>(r, H, R);
  res.accepted ? ++diag_.vio_updates : ++diag_.vio_rejections;
  return res;
}

UpdateResult Ekf::update_height_bias(double delta_z) {
  Eigen::Matrix<double, 1, idx::dim> H = Eigen::Matrix<double, 1, idx::dim>::Zero();
  H(0, idx::bdz) = 1.0;
  Eigen::Matrix<double, 1, 1> R;
  R(0, 0) = noise_.height_std * noise_.height_std;
  Eigen::Matrix<double, 1, 1> r;
  r(0) = delta_z - state_.b_dz;
  const UpdateResult res = update<1>(r, H, R);
  res.accepted ? ++diag_.height_updates : ++diag_.height_rejections;
  return res;
}

UpdateResult Ekf::update_vicon(const Pose& pose) {
  using Vec6 = Eigen::Matrix<double, 6, 1>;
  using Mat6 = Eigen::Matrix<double, 6, 6>;
  Vec6 r;
  r.segment<3>(0) = pose.position - state_.p;
  r.segment<3>(3) = so3_log(state_.q.inverse() * pose.orientation);
  Eigen::Matrix<double, 6, idx::dim> H = Eigen::Matrix<double, 6, idx::dim>::Zero();
  H.block<3, 3>(0, idx::p) = Mat3::Identity();
  H.block<3, 3>(3, idx::theta) = Mat3::Identity();
  Mat6 R = Mat6::Zero();
  R.block<3, 3>(0, 0).diagonal().setConstant(noise_.vicon_pos_std * noise_.vicon_pos_std);
  R.block<3, 3>(3, 3).diagonal().setConstant(noise_.vicon_rot_std * noise_.vicon_rot_std);
  const UpdateResult res = update<6>(r, H, R);
  res.accepted ? ++diag_.vicon_updates : ++diag_.vicon_rejections;
  return res;
}

}  // namespace legvio
