#pragma once

#include <array>
#include <optional>

#include "legvio/mathcore.hpp"
#include "legvio/streams.hpp"

namespace legvio {

/// Sensor pose in the base frame.
struct Extrinsics {
  Vec3 translation = Vec3::Zero();
  Rotation rotation;
};

/// 3-DOF leg: abduction (HAA) about the base x axis at the hip, then hip
/// flexion (HFE) and knee (KFE) about the rotated y axis. At q = 0 the leg
/// points straight down; positive KFE swings the shank towards -x.
struct LegModel {
  Vec3 hip_offset = Vec3::Zero();  // ^B p_hip, m
  double upper_length = 0.16;      // L1, m
  double lower_length = 0.16;      // L2, m
};

struct RobotModel {
  std::array<LegModel, kNumLegs> legs;
  double mass = 2.5;  // kg
  Extrinsics imu;     // robot IMU
  Extrinsics vio;     // VIO sensor (its IMU)

  /// Solo12-like defaults: hips at (+-0.196, +-0.105, 0), L1 = L2 = 0.16 m.
  static RobotModel solo12();
  void validate() const;
};

using LegJoints = Vec3;  // (HAA, HFE, KFE)

/// Foot position in the base frame, ^B p_BK.
Vec3 fk_foot(const LegModel& leg, const LegJoints& q);

/// d fk / d q.
Mat3 jac_foot(const LegModel& leg, const LegJoints& q);

/// Joint angles placing the foot at `foot_base` (base frame). KFE >= 0 branch.
/// Returns nullopt when the point is out of reach (or within `margin` of full
/// extension).
std::optional<LegJoints> ik_foot(const LegModel& leg, const Vec3& foot_base, double margin = 1e-6);

/// Base velocity in the base frame from one stance leg:
///   -J(q) dq - omega x fk(q).
Vec3 base_velocity_from_leg(const LegModel& leg, const LegJoints& q, const LegJoints& dq,
                            const Vec3& omega_unbiased);

/// Kinematic base height: mean over legs of -[fk(q_i)]_z. Only defined when
/// every leg is in contact; otherwise nullopt (no measurement).
///
/// Foot positions are not rotated into the world frame, i.e. the base is
/// assumed flat. Pass `attitude` to use the rotated variant instead.
std::optional<double> ground_height(const RobotModel& model, const std::array<LegJoints, kNumLegs>& q,
                                    const std::array<bool, kNumLegs>& contact,
                                    const std::optional<Rotation>& attitude = std::nullopt);

}  // namespace legvio
