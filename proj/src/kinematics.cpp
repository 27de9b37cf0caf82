#include "legvio/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace legvio {

RobotModel RobotModel::solo12() {
  RobotModel m;
  const double hx = 0.196;
  const double hy = 0.105;
  m.legs[FL].hip_offset = Vec3(hx, hy, 0.0);
  m.legs[FR].hip_offset = Vec3(hx, -hy, 0.0);
  m.legs[HL].hip_offset = Vec3(-hx, hy, 0.0);
  m.legs[HR].hip_offset = Vec3(-hx, -hy, 0.0);
  return m;
}

void RobotModel::validate() const {
  if (!(mass > 0.0)) throw std::invalid_argument("robot mass must be positive");
  for (const auto& leg : legs) {
    if (!(leg.upper_length > 0.0) || !(leg.lower_length > 0.0)) {
      throw std::invalid_argument("leg segment lengths must be positive");
    }
  }
}

Vec3 fk_foot(const LegModel& leg, const LegJoints& q) {
  const double L1 = leg.upper_length;
  const double L2 = leg.lower_length;
  const double s1 = std::sin(q.y()), c1 = std::cos(q.y());
  const double s12 = std::sin(q.y() + q.z()), c12 = std::cos(q.y() + q.z());
  // Sagittal-plane foot position before abduction.
  const double xp = -L1 * s1 - L2 * s12;
  const double zp = -L1 * c1 - L2 * c12;
  const double sa = std::sin(q.x()), ca = std::cos(q.x());
  return leg.hip_offset + Vec3(xp, -zp * sa, zp * ca);
}

Mat3 jac_foot(const LegModel& leg, const LegJoints& q) {
  const double L1 = leg.upper_length;
  const double L2 = leg.lower_length;
  const double s1 = std::sin(q.y()), c1 = std::cos(q.y());
  const double s12 = std::sin(q.y() + q.z()), c12 = std::cos(q.y() + q.z());
  const double zp = -L1 * c1 - L2 * c12;
  const double dxp_d1 = -L1 * c1 - L2 * c12;
  const double dxp_d2 = -L2 * c12;
  const double dzp_d1 = L1 * s1 + L2 * s12;
  const double dzp_d2 = L2 * s12;
  const double sa = std::sin(q.x()), ca = std::cos(q.x());
  Mat3 J;
  J << 0.0, dxp_d1, dxp_d2,
       -zp * ca, -dzp_d1 * sa, -dzp_d2 * sa,
       -zp * sa, dzp_d1 * ca, dzp_d2 * ca;
  return J;
}

std::optional<LegJoints> ik_foot(const LegModel& leg, const Vec3& foot_base, double margin) {
  const double L1 = leg.upper_length;
  const double L2 = leg.lower_length;
  const Vec3 r = foot_base - leg.hip_offset;
  const double rho = std::hypot(r.y(), r.z());
  const double haa = std::atan2(r.y(), -r.z());
  const double xp = r.x();
  const double zp = -rho;
  const double d2 = xp * xp + zp * zp;
  const double reach = L1 + L2 - margin;
  if (d2 > reach * reach || d2 < (L1 - L2) * (L1 - L2)) return std::nullopt;
  const double ck = std::clamp((d2 - L1 * L1 - L2 * L2) / (2.0 * L1 * L2), -1.0, 1.0);
  const double kfe = std::acos(ck);
  // Foot direction (-sin(phi), -cos(phi)) with phi = hfe + atan-offset.
  const double phi = std::atan2(-xp, -zp);
  const double hfe = phi - std::atan2(L2 * std::sin(kfe), L1 + L2 * std::cos(kfe));
  return LegJoints(haa, hfe, kfe);
}

Vec3 base_velocity_from_leg(const LegModel& leg, const LegJoints& q, const LegJoints& dq,
                            const Vec3& omega_unbiased) {
  return -jac_foot(leg, q) * dq - omega_unbiased.cross(fk_foot(leg, q));
}

std::optional<double> ground_height(const RobotModel& model, const std::array<LegJoints, kNumLegs>& q,
                                    const std::array<bool, kNumLegs>& contact,
                                    const std::optional<Rotation>& attitude) {
  double sum = 0.0;
  for (int k = 0; k < kNumLegs; ++k) {
    if (!contact[k]) return std::nullopt;
    Vec3 foot = fk_foot(model.legs[k], q[k]);
    if (attitude) foot = *attitude * foot;
    sum += -foot.z();
  }
  return sum / kNumLegs;
}

}  // namespace legvio
