#pragma once

#include <deque>
#include <optional>

#include "legvio/kinematics.hpp"
#include "legvio/mathcore.hpp"
#include "legvio/streams.hpp"

namespace legvio {

/// Accumulated rotation, velocity and position increments since an anchor.
/// Increments are gravity-free and expressed in the anchor body frame.
struct PreintegratedDelta {
  Rotation dR;
  Vec3 dv = Vec3::Zero();
  Vec3 dp = Vec3::Zero();
  double duration = 0.0;  // s
  Vec3 bias_a = Vec3::Zero();
  Vec3 bias_g = Vec3::Zero();

  static PreintegratedDelta with_biases(const Vec3& bias_a, const Vec3& bias_g) {
    PreintegratedDelta d;
    d.bias_a = bias_a;
    d.bias_g = bias_g;
    return d;
  }
};

/// One preintegration step using the sample at the end of the interval:
///   dR' = dR exp(w dt),  dv' = dv + dR a dt,  dp' = dp + dv dt
/// with a, w bias corrected. Throws std::invalid_argument for dt <= 0.
PreintegratedDelta preint_step(const PreintegratedDelta& delta, const ImuSample& sample, double dt);

struct AnchorState {
  Timestamp t;
  Pose pose;
  Vec3 vel_world = Vec3::Zero();
  Vec3 bias_a = Vec3::Zero();
  Vec3 bias_g = Vec3::Zero();
};

struct PredictedState {
  Pose pose;
  Vec3 vel_world = Vec3::Zero();
};

PredictedState predict_from_anchor(const AnchorState& anchor, const PreintegratedDelta& delta,
                                   const Vec3& gravity);

/// Re-expresses IMU samples measured at a sensor mounted with `extrinsics`
/// (sensor pose in the base frame) as base-frame specific force and rate.
/// Angular acceleration for the lever-arm term is differenced from the
/// previous sample.
class ImuToBase {
 public:
  explicit ImuToBase(const Extrinsics& extrinsics) : extrinsics_(extrinsics) {}
  ImuSample operator()(const ImuSample& sensor_sample);

 private:
  Extrinsics extrinsics_;
  std::optional<ImuSample> last_;  // previous base-frame sample
};

/// Low-latency VIO output: integrates VIO-IMU samples on top of the latest
/// optimised frame and re-integrates the buffer whenever a new frame lands.
///
/// Single owner; on_imu/on_frame calls must be serialised by the caller.
class VioPredictor {
 public:
  struct Options {
    Vec3 gravity = gravity_vector();
    double buffer_horizon_s = 1.0;
    /// Delay between an IMU sample and the prediction being delivered.
    std::int64_t output_delay_ns = 0;
    Extrinsics imu_extrinsics;
  };

  VioPredictor() : VioPredictor(Options{}) {}
  explicit VioPredictor(const Options& options);

  /// Biases used for every subsequent anchor (VIO's current estimate).
  void set_biases(const Vec3& bias_a, const Vec3& bias_g);

  /// Buffers the sample and, once anchored, emits a prediction valid at `sample.t`.
  std::optional<VioEstimate> on_imu(const ImuSample& sample);

  /// Re-anchors on an optimised frame. Returns false (and keeps the previous
  /// anchor) when the frame is older than the buffer horizon.
  bool on_frame(const VioEstimate& frame);

  bool anchored() const { return anchor_.has_value(); }
  const std::optional<AnchorState>& anchor() const { return anchor_; }
  const PreintegratedDelta& delta() const { return delta_; }
  std::size_t dropped_frames() const { return dropped_frames_; }

 private:
  void trim_buffer(Timestamp newest);

  Options options_;
  ImuToBase to_base_;
  Vec3 bias_a_ = Vec3::Zero();
  Vec3 bias_g_ = Vec3::Zero();
  std::deque<ImuSample> buffer_;  // base-frame samples
  std::optional<AnchorState> anchor_;
  PreintegratedDelta delta_;
  Timestamp last_integrated_;
  std::size_t dropped_frames_ = 0;
};

}  // namespace legvio
