#include "legvio/mathcore.hpp"

#include <cmath>

namespace legvio {

namespace {
constexpr double kSmallAngle = 1e-8;
}

Rotation::Rotation(double w, double x, double y, double z) : q_(w, x, y, z) { canonicalize(); }

Rotation::Rotation(const Eigen::Quaterniond& q) : q_(q) { canonicalize(); }

Rotation::Rotation(const Mat3& m) : q_(m) { canonicalize(); }

Rotation Rotation::about_x(double angle) { return so3_exp(Vec3(angle, 0.0, 0.0)); }
Rotation Rotation::about_y(double angle) { return so3_exp(Vec3(0.0, angle, 0.0)); }
Rotation Rotation::about_z(double angle) { return so3_exp(Vec3(0.0, 0.0, angle)); }

Rotation Rotation::from_rpy(double roll, double pitch, double yaw) {
  return about_z(yaw) * about_y(pitch) * about_x(roll);
}

double Rotation::yaw() const {
  const Mat3 m = matrix();
  return std::atan2(m(1, 0), m(0, 0));
}

void Rotation::canonicalize() {
  q_.normalize();
  bool flip = q_.w() < 0.0;
  if (q_.w() == 0.0) {
    const double first = q_.x() != 0.0 ? q_.x() : (q_.y() != 0.0 ? q_.y() : q_.z());
    flip = first < 0.0;
  }
  if (flip) q_.coeffs() = -q_.coeffs();
}

Rotation so3_exp(const Vec3& phi) {
  const double theta2 = phi.squaredNorm();
  const double theta = std::sqrt(theta2);
  if (theta < kSmallAngle) {
    const double w = 1.0 - theta2 / 8.0;
    const double s = 0.5 * (1.0 - theta2 / 24.0);
    return Rotation(w, s * phi.x(), s * phi.y(), s * phi.z());
  }
  const double half = 0.5 * theta;
  const double s = std::sin(half) / theta;
  return Rotation(std::cos(half), s * phi.x(), s * phi.y(), s * phi.z());
}

Vec3 so3_log(const Rotation& r) {
  const Vec3 v(r.x(), r.y(), r.z());
  const double n = v.norm();
  const double w = r.w();
  if (n < kSmallAngle) {
    // w is ~1 here; series of 2*atan(n/w)/n.
    return (2.0 / w) * (1.0 - n * n / (3.0 * w * w)) * v;
  }
  const double theta = 2.0 * std::atan2(n, w);
  return (theta / n) * v;
}

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Pose Pose::inverse() const {
  const Rotation inv = orientation.inverse();
  return Pose{-(inv * position), inv};
}

Pose Pose::operator*(const Pose& other) const {
  return Pose{orientation * other.position + position, orientation * other.orientation};
}

}  // namespace legvio
