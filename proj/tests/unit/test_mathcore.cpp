#include <gtest/gtest.h>

#include <random>

#include "legvio/mathcore.hpp"

using namespace legvio;

namespace {

// Truncated power series of the matrix exponential.
Mat3 expm_series(const Mat3& A) {
  Mat3 out = Mat3::Identity();
  Mat3 term = Mat3::Identity();
  for (int k = 1; k < 40; ++k) {
    term = term * A / static_cast<double>(k);
    out += term;
  }
  return out;
}

Vec3 random_vec(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return Vec3(u(rng), u(rng), u(rng));
}

}  // namespace

TEST(Mathcore, SkewIsCrossProduct) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const Vec3 a = random_vec(rng, 2.0), b = random_vec(rng, 2.0);
    EXPECT_LT((skew(a) * b - a.cross(b)).norm(), 1e-14);
  }
}

TEST(Mathcore, ExpMatchesMatrixSeries) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const Vec3 phi = random_vec(rng, 1.7);
    const Mat3 hat{{0.0, -phi.z(), phi.y()}, {phi.z(), 0.0, -phi.x()}, {-phi.y(), phi.x(), 0.0}};
    EXPECT_LT((so3_exp(phi).matrix() - expm_series(hat)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Mathcore, ExpSmallAngle) {
  const Vec3 phi(1e-10, -2e-10, 3e-10);
  const Mat3 hat{{0.0, -phi.z(), phi.y()}, {phi.z(), 0.0, -phi.x()}, {-phi.y(), phi.x(), 0.0}};
  EXPECT_LT((so3_exp(phi).matrix() - (Mat3::Identity() + hat)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((so3_log(so3_exp(phi)) - phi).norm(), 1e-18);
}

TEST(Mathcore, LogInvertsExp) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    Vec3 phi = random_vec(rng, 1.0);
    phi *= std::uniform_real_distribution<double>(0.0, 3.1)(rng) / phi.norm();
    EXPECT_LT((so3_log(so3_exp(phi)) - phi).norm(), 1e-12);
  }
}

TEST(Mathcore, LogAtPiUsesCanonicalAxis) {
  const Vec3 a = so3_log(Rotation(0.0, 0.0, 0.0, 1.0));
  const Vec3 b = so3_log(Rotation(0.0, 0.0, 0.0, -1.0));
  EXPECT_LT((a - b).norm(), 1e-12);
  EXPECT_NEAR(a.norm(), kPi, 1e-12);
}

TEST(Mathcore, ExpOfSubdividedStepsComposes) {
  // exp(phi) == exp(phi / n)^n for a fixed axis.
  const Vec3 phi(0.4, -1.1, 0.7);
  Rotation r;
  const int n = 1000;
  for (int i = 0; i < n; ++i) r = r * so3_exp(phi / n);
  EXPECT_LT((r.matrix() - so3_exp(phi).matrix()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Mathcore, CanonicalSign) {
  const Rotation r(-0.5, 0.5, -0.5, 0.5);
  EXPECT_GE(r.w(), 0.0);
  EXPECT_NEAR(r.quaternion().norm(), 1.0, 1e-15);
  const Rotation half(0.0, 0.0, 0.0, -1.0);
  EXPECT_DOUBLE_EQ(half.z(), 1.0);
}

TEST(Mathcore, RpyAndYaw) {
  const Rotation r = Rotation::from_rpy(0.1, -0.2, 0.3);
  const Mat3 expected = (Rotation::about_z(0.3) * Rotation::about_y(-0.2) * Rotation::about_x(0.1)).matrix();
  EXPECT_LT((r.matrix() - expected).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(r.yaw(), 0.3, 1e-14);
  EXPECT_NEAR(Rotation::about_x(0.1).matrix()(2, 1), std::sin(0.1), 1e-15);
}

TEST(Mathcore, MatrixRoundTrip) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 50; ++i) {
    const Rotation r = so3_exp(random_vec(rng, 2.0));
    const Rotation back(r.matrix());
    EXPECT_LT((back.matrix() - r.matrix()).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(Mathcore, PoseComposeAndInverse) {
  Pose a;
  a.position = Vec3(1.0, -2.0, 0.5);
  a.orientation = Rotation::from_rpy(0.2, 0.1, -0.4);
  Pose b;
  b.position = Vec3(0.3, 0.2, -0.1);
  b.orientation = Rotation::about_y(0.5);
  const Pose ab = a * b;
  EXPECT_LT((ab.position - (a.position + a.orientation * b.position)).norm(), 1e-15);
  const Pose id = a.inverse() * a;
  EXPECT_LT(id.position.norm(), 1e-15);
  EXPECT_LT(so3_log(id.orientation).norm(), 1e-15);
}
