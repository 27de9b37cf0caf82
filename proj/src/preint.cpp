#include "legvio/preint.hpp"

#include <stdexcept>

namespace legvio {

PreintegratedDelta preint_step(const PreintegratedDelta& delta, const ImuSample& sample, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("preint_step: dt must be positive");
  const Vec3 a = sample.accel - delta.bias_a;
  const Vec3 w = sample.gyro - delta.bias_g;
  PreintegratedDelta next = delta;
  next.dR = delta.dR * so3_exp(w * dt);
  next.dv = delta.dv + (delta.dR * a) * dt;
  next.dp = delta.dp + delta.dv * dt;
  next.duration = delta.duration + dt;
  return next;
}

PredictedState predict_from_anchor(const AnchorState& anchor, const PreintegratedDelta& delta,
                                   const Vec3& gravity) {
  const double T = delta.duration;
  const Rotation& Ra = anchor.pose.orientation;
  PredictedState out;
  out.pose.orientation = Ra * delta.dR;
  out.vel_world = anchor.vel_world + gravity * T + Ra * delta.dv;
  out.pose.position = anchor.pose.position + anchor.vel_world * T + 0.5 * gravity * T * T + Ra * delta.dp;
  return out;
}

ImuSample ImuToBase::operator()(const ImuSample& s) {
  ImuSample b = s;
  const Rotation& R = extrinsics_.rotation;
  const Vec3& r = extrinsics_.translation;
  b.gyro = R * s.gyro;
  Vec3 alpha = Vec3::Zero();
  if (last_ && s.t > last_->t) alpha = (b.gyro - last_->gyro) / seconds_between(last_->t, s.t);
  b.accel = R * s.accel - alpha.cross(r) - b.gyro.cross(b.gyro.cross(r));
  last_ = b;
  return b;
}

VioPredictor::VioPredictor(const Options& options)
    : options_(options), to_base_(options.imu_extrinsics) {}

void VioPredictor::set_biases(const Vec3& bias_a, const Vec3& bias_g) {
  bias_a_ = bias_a;
  bias_g_ = bias_g;
}

void VioPredictor::trim_buffer(Timestamp newest) {
  const auto horizon = static_cast<std::int64_t>(options_.buffer_horizon_s * 1e9);
  while (!buffer_.empty() && newest - buffer_.front().t > horizon) buffer_.pop_front();
}

std::optional<VioEstimate> VioPredictor::on_imu(const ImuSample& sample) {
  const ImuSample b = to_base_(sample);
  if (!buffer_.empty() && b.t <= buffer_.back().t) {
    throw std::invalid_argument("VioPredictor::on_imu: samples must be strictly increasing in time");
  }
  buffer_.push_back(b);
  trim_buffer(b.t);
  if (!anchor_) return std::nullopt;

  if (b.t > last_integrated_) {
    delta_ = preint_step(delta_, b, seconds_between(last_integrated_, b.t));
    last_integrated_ = b.t;
  }
  const PredictedState p = predict_from_anchor(*anchor_, delta_, options_.gravity);
  VioEstimate out;
  out.t_capture = b.t;
  out.t_available = b.t + options_.output_delay_ns;
  out.pose = p.pose;
  out.vel_world = p.vel_world;
  out.kind = VioKind::predicted;
  return out;
}

bool VioPredictor::on_frame(const VioEstimate& frame) {
  const auto horizon = static_cast<std::int64_t>(options_.buffer_horizon_s * 1e9);
  const bool too_old = !buffer_.empty() && buffer_.back().t - frame.t_capture > horizon;
  const bool stale = anchor_ && frame.t_capture <= anchor_->t;
  if (too_old || stale) {
    ++dropped_frames_;
    return false;
  }
  anchor_ = AnchorState{frame.t_capture, frame.pose, frame.vel_world, bias_a_, bias_g_};
  delta_ = PreintegratedDelta::with_biases(bias_a_, bias_g_);
  last_integrated_ = frame.t_capture;
  for (const ImuSample& s : buffer_) {
    if (s.t <= frame.t_capture) continue;
    delta_ = preint_step(delta_, s, seconds_between(last_integrated_, s.t));
    last_integrated_ = s.t;
  }
  return true;
}

}  // namespace legvio
