#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace legvio {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

constexpr double kPi = 3.14159265358979323846;
constexpr double kGravity = 9.81;

inline Vec3 gravity_vector() { return Vec3(0.0, 0.0, -kGravity); }

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Unit quaternion rotation stored w-first.
///
/// Every constructor and composition renormalises and picks the w >= 0
/// representative of the double cover. When w == 0 the first non-zero
/// vector component is made positive, so a rotation by pi about +z and
/// about -z share one representation (0, 0, 0, 1).
class Rotation {
 public:
  Rotation() = default;
  Rotation(double w, double x, double y, double z);
  explicit Rotation(const Eigen::Quaterniond& q);
  explicit Rotation(const Mat3& m);

  static Rotation identity() { return Rotation(); }
  static Rotation about_x(double angle);
  static Rotation about_y(double angle);
  static Rotation about_z(double angle);
  /// Z-Y-X (yaw, pitch, roll) composition: Rz(yaw) * Ry(pitch) * Rx(roll).
  static Rotation from_rpy(double roll, double pitch, double yaw);

  double w() const { return q_.w(); }
  double x() const { return q_.x(); }
  double y() const { return q_.y(); }
  double z() const { return q_.z(); }

  const Eigen::Quaterniond& quaternion() const { return q_; }
  Mat3 matrix() const { return q_.toRotationMatrix(); }
  Rotation inverse() const { return Rotation(q_.conjugate()); }

  /// Yaw angle of the Z-Y-X decomposition.
  double yaw() const;

  Rotation operator*(const Rotation& other) const { return Rotation(q_ * other.q_); }
  Vec3 operator*(const Vec3& v) const { return q_ * v; }

 private:
  void canonicalize();

  Eigen::Quaterniond q_{1.0, 0.0, 0.0, 0.0};
};

/// Exponential map so(3) -> SO(3); second-order Taylor below 1e-8 rad.
Rotation so3_exp(const Vec3& phi);

/// Logarithm SO(3) -> so(3). The returned angle lies in [0, pi]; at exactly
/// pi the axis follows the canonical quaternion sign (see Rotation).
Vec3 so3_log(const Rotation& r);

/// skew(v) * u == v.cross(u)
Mat3 skew(const Vec3& v);

/// Rigid transform (translation in parent frame, orientation parent <- child).
struct Pose {
  Vec3 position = Vec3::Zero();
  Rotation orientation;

  Pose inverse() const;
  Pose operator*(const Pose& other) const;
  Vec3 operator*(const Vec3& point) const { return orientation * point + position; }
};

}  // namespace legvio
