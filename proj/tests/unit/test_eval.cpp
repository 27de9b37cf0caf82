#include <gtest/gtest.h>

#include <Eigen/Geometry>

#include <filesystem>
#include <random>

#include "legvio/eval.hpp"

using namespace legvio;

namespace {

Trajectory wavy_truth(double duration, double rate) {
  Trajectory t;
  const int n = static_cast<int>(std::llround(duration * rate));
  for (int i = 0; i <= n; ++i) {
    const double s = i / rate;
    TrajectorySample x;
    x.t = Timestamp::from_seconds(s);
    x.pose.position = Vec3(0.3 * s, 0.1 * std::sin(0.5 * s), 0.25 + 0.02 * std::sin(3.0 * s));
    x.pose.orientation = Rotation::from_rpy(0.05 * std::sin(2.0 * s), 0.03 * std::cos(1.5 * s), 0.2 * s);
    t.push_back(x);
  }
  return t;
}

using Iso = Eigen::Isometry3d;

Iso iso(const Pose& p) {
  Iso T = Iso::Identity();
  T.linear() = p.orientation.matrix();
  T.translation() = p.position;
  return T;
}

// Homogeneous-matrix form of the per-pair errors.
std::array<double, kNumComponents> pair_error(const Pose& ti, const Pose& tj, const Pose& gi, const Pose& gj) {
  const Iso dT = iso(ti).inverse() * iso(tj);
  const Iso dG = iso(gi).inverse() * iso(gj);
  const Vec3 ep = iso(gi).linear() * (dT.translation() - dG.translation());
  const Mat3 E = iso(gi).linear() * dT.linear() * dG.linear().transpose() * iso(gi).linear().transpose();
  const Vec3 ez = E.col(2);
  const double grav = std::acos(std::clamp(ez.z(), -1.0, 1.0));
  const Mat3 tilt = Eigen::Quaterniond::FromTwoVectors(Vec3::UnitZ(), ez).toRotationMatrix();
  const Eigen::AngleAxisd yaw(Mat3(tilt.transpose() * E));
  return {ep.head<2>().norm(), std::abs(ep.z()), rad2deg(yaw.angle()), rad2deg(grav)};
}

}  // namespace

TEST(Rpe, ConstantOffsetInvariance) {
  const Trajectory gt = wavy_truth(30.0, 100.0);
  Pose offset;
  offset.position = Vec3(5.0, -3.0, 1.0);
  offset.orientation = Rotation::from_rpy(0.0, 0.0, 1.3);
  Trajectory est = gt;
  for (auto& s : est) s.pose = offset * s.pose;
  const RpeReport r = rpe(est, gt);
  for (const RpeInterval& row : r.intervals) {
    if (row.stats[0].count == 0) continue;
    for (int c = 0; c < kNumComponents; ++c) EXPECT_LT(row.stats[c].max, c < 2 ? 1e-12 : 1e-9) << row.interval_s;
  }
}

TEST(Rpe, LinearDriftClosedForm) {
  const Trajectory gt = wavy_truth(60.0, 100.0);
  const Vec3 d(0.003, -0.004, 0.002);  // m/s
  Trajectory est = gt;
  for (auto& s : est) s.pose.position += d * s.t.seconds();
  const RpeReport r = rpe(est, gt);
  for (const RpeInterval& row : r.intervals) {
    ASSERT_GT(row.stats[kRpeXy].count, 0u);
    EXPECT_NEAR(row.stats[kRpeXy].mean, 0.005 * row.interval_s, 1e-9);
    EXPECT_NEAR(row.stats[kRpeXy].max, 0.005 * row.interval_s, 1e-9);
    EXPECT_NEAR(row.stats[kRpeZ].mean, 0.002 * row.interval_s, 1e-9);
    EXPECT_LT(row.stats[kRpeYaw].max, 1e-9);
  }
}

TEST(Rpe, MatchesMatrixOracle) {
  std::mt19937_64 rng(91);
  std::normal_distribution<double> n(0.0, 1.0);
  const Trajectory gt = wavy_truth(12.0, 50.0);
  Trajectory est = gt;
  Vec3 walk = Vec3::Zero(), rwalk = Vec3::Zero();
  for (auto& s : est) {
    walk += 0.002 * Vec3(n(rng), n(rng), n(rng));
    rwalk += 0.002 * Vec3(n(rng), n(rng), n(rng));
    s.pose.position += walk;
    s.pose.orientation = s.pose.orientation * so3_exp(rwalk);
  }
  RpeOptions opt;
  opt.intervals = {0.1, 1.0, 5.0};
  opt.stride = 3;
  const RpeReport r = rpe(est, gt, opt);
  ASSERT_EQ(r.intervals.size(), 3u);
  for (const RpeInterval& row : r.intervals) {
    const auto steps = static_cast<std::size_t>(std::llround(row.interval_s * 50.0));
    std::array<double, kNumComponents> sum{}, mx{};
    std::size_t count = 0;
    for (std::size_t i = 0; i + steps < gt.size(); i += 3) {
      const auto e = pair_error(est[i].pose, est[i + steps].pose, gt[i].pose, gt[i + steps].pose);
      for (int c = 0; c < kNumComponents; ++c) {
        sum[c] += e[c];
        mx[c] = std::max(mx[c], e[c]);
      }
      ++count;
    }
    EXPECT_EQ(row.stats[0].count, count);
    for (int c = 0; c < kNumComponents; ++c) {
      EXPECT_NEAR(row.stats[c].mean, sum[c] / count, 1e-9) << kComponentNames[c];
      EXPECT_NEAR(row.stats[c].max, mx[c], 1e-9) << kComponentNames[c];
    }
  }
}

TEST(Rpe, NineIntervalsOnLongRun) {
  const Trajectory gt = wavy_truth(120.0, 200.0);
  const RpeReport r = rpe(gt, gt);
  ASSERT_EQ(r.intervals.size(), 9u);
  for (std::size_t k = 0; k < 9; ++k) {
    EXPECT_DOUBLE_EQ(r.intervals[k].interval_s, kRpeIntervals[k]);
    EXPECT_EQ(r.intervals[k].stats[0].count, gt.size() - static_cast<std::size_t>(kRpeIntervals[k] * 200.0 + 0.5));
  }
  ASSERT_NE(r.find(50.0), nullptr);
  EXPECT_EQ(r.find(3.0), nullptr);
}

TEST(Rpe, ShortRunLeavesLongIntervalsEmpty) {
  const Trajectory gt = wavy_truth(3.0, 100.0);
  const RpeReport r = rpe(gt, gt);
  EXPECT_GT(r.find(2.0)->stats[0].count, 0u);
  EXPECT_EQ(r.find(5.0)->stats[0].count, 0u);
}

TEST(Rpe, MismatchedGridsThrow) {
  const Trajectory gt = wavy_truth(2.0, 100.0);
  Trajectory est = gt;
  est.pop_back();
  EXPECT_THROW(rpe(est, gt), std::invalid_argument);
  est = gt;
  est[5].t = est[5].t + 1;
  EXPECT_THROW(rpe(est, gt), std::invalid_argument);
}

TEST(YawGravity, SeparatesTiltAndHeading) {
  std::mt19937_64 rng(97);
  std::uniform_real_distribution<double> ang(0.0, 1.2), dir(-kPi, kPi);
  for (int i = 0; i < 200; ++i) {
    const double a = ang(rng), b = ang(rng), phi = dir(rng);
    const Vec3 axis(std::cos(phi), std::sin(phi), 0.0);
    const Rotation E = so3_exp(axis * b) * Rotation::about_z(a);
    const YawGravity yg = yaw_gravity_decompose(E);
    EXPECT_NEAR(yg.gravity_deg, rad2deg(b), 1e-9);
    EXPECT_NEAR(yg.yaw_deg, rad2deg(a), 1e-9);
  }
  const YawGravity yaw_only = yaw_gravity_decompose(Rotation::about_z(0.1));
  EXPECT_NEAR(yaw_only.gravity_deg, 0.0, 1e-12);
  EXPECT_NEAR(yaw_only.yaw_deg, rad2deg(0.1), 1e-12);
}

TEST(Rpe, WritersProduceFiles) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "legvio_test_eval";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const Trajectory gt = wavy_truth(12.0, 50.0);
  RpeOptions opt;
  opt.keep_samples = true;
  std::vector<NamedReport> reps{{"a", rpe(gt, gt, opt)}, {"b", rpe(gt, gt, opt)}};
  write_rpe_csv(dir / "rpe.csv", reps);
  write_plot_data(dir / "plots", reps);
  EXPECT_TRUE(fs::exists(dir / "rpe.csv"));
  EXPECT_FALSE(fs::is_empty(dir / "plots"));
  const std::string table = comparison_table(reps);
  EXPECT_NE(table.find("xy"), std::string::npos);
  EXPECT_NE(table.find("b"), std::string::npos);
  fs::remove_all(dir);
}
