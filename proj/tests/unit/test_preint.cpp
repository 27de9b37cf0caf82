#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "legvio/preint.hpp"

using namespace legvio;

namespace {

// Rodrigues formula, kept separate from so3_exp.
Mat3 rodrigues(const Vec3& phi) {
  const double th = phi.norm();
  Mat3 K;
  K << 0.0, -phi.z(), phi.y(), phi.z(), 0.0, -phi.x(), -phi.y(), phi.x(), 0.0;
  if (th < 1e-12) return Mat3::Identity() + K;
  return Mat3::Identity() + std::sin(th) / th * K + (1.0 - std::cos(th)) / (th * th) * K * K;
}

struct OracleDelta {
  Mat3 R = Mat3::Identity();
  Vec3 v = Vec3::Zero();
  Vec3 p = Vec3::Zero();
};

// Discrete sums: R_k = prod exp(w_i dt_i), v_k = sum R_{i-1} a_i dt_i, p_k = sum v_{i-1} dt_i.
OracleDelta oracle(const std::vector<ImuSample>& s, const std::vector<double>& dt, const Vec3& ba, const Vec3& bg) {
  std::vector<Mat3> R{Mat3::Identity()};
  std::vector<Vec3> v{Vec3::Zero()};
  for (std::size_t i = 0; i < s.size(); ++i) {
    R.push_back(R.back() * rodrigues((s[i].gyro - bg) * dt[i]));
    v.push_back(v.back() + R[i] * (s[i].accel - ba) * dt[i]);
  }
  OracleDelta o;
  o.R = R.back();
  o.v = v.back();
  for (std::size_t i = 0; i < s.size(); ++i) o.p += v[i] * dt[i];
  return o;
}

std::vector<ImuSample> random_imu(std::mt19937_64& rng, int n, std::int64_t period_ns) {
  std::normal_distribution<double> a(0.0, 3.0), w(0.0, 1.5);
  std::vector<ImuSample> out;
  for (int i = 1; i <= n; ++i) {
    ImuSample s;
    s.t = Timestamp(i * period_ns);
    s.accel = Vec3(a(rng), a(rng), 9.81 + a(rng));
    s.gyro = Vec3(w(rng), w(rng), w(rng));
    out.push_back(s);
  }
  return out;
}

}  // namespace

TEST(Preint, MatchesDiscreteSumOracle) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> jitter(0.5e-3, 1.5e-3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto samples = random_imu(rng, 500, 1'000'000);
    std::vector<double> dt;
    for (std::size_t i = 0; i < samples.size(); ++i) dt.push_back(jitter(rng));
    const Vec3 ba(0.05, -0.02, 0.1), bg(0.01, 0.0, -0.02);

    PreintegratedDelta d = PreintegratedDelta::with_biases(ba, bg);
    for (std::size_t i = 0; i < samples.size(); ++i) d = preint_step(d, samples[i], dt[i]);
    const OracleDelta o = oracle(samples, dt, ba, bg);

    EXPECT_LT((d.dR.matrix() - o.R).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((d.dv - o.v).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((d.dp - o.p).cwiseAbs().maxCoeff(), 1e-12);
    double total = 0.0;
    for (double x : dt) total += x;
    EXPECT_NEAR(d.duration, total, 1e-12);
  }
}

TEST(Preint, ConstantRateMatchesClosedForm) {
  const Vec3 w(0.3, -0.8, 1.2);
  PreintegratedDelta d;
  ImuSample s;
  s.gyro = w;
  for (int i = 0; i < 1000; ++i) d = preint_step(d, s, 1e-3);
  EXPECT_LT((d.dR.matrix() - so3_exp(w * 1.0).matrix()).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Preint, ConstantAccelerationNoRotation) {
  const Vec3 a(0.5, -1.0, 2.0);
  const int n = 100;
  const double dt = 0.01;
  PreintegratedDelta d;
  ImuSample s;
  s.accel = a;
  for (int i = 0; i < n; ++i) d = preint_step(d, s, dt);
  EXPECT_LT((d.dv - a * n * dt).norm(), 1e-13);
  // dp uses the velocity before each step.
  EXPECT_LT((d.dp - a * dt * dt * n * (n - 1) / 2.0).norm(), 1e-13);
}

TEST(Preint, RejectsNonPositiveDt) {
  EXPECT_THROW(preint_step({}, {}, 0.0), std::invalid_argument);
  EXPECT_THROW(preint_step({}, {}, -1e-3), std::invalid_argument);
}

TEST(Preint, PredictFromAnchorFreeFall) {
  // Zero specific force: the body follows gravity from the anchor.
  AnchorState anchor;
  anchor.pose.position = Vec3(1.0, 2.0, 3.0);
  anchor.pose.orientation = Rotation::from_rpy(0.3, 0.2, 0.1);
  anchor.vel_world = Vec3(0.5, 0.0, 1.0);
  PreintegratedDelta d;
  for (int i = 0; i < 200; ++i) d = preint_step(d, {}, 5e-3);
  const Vec3 g = gravity_vector();
  const PredictedState p = predict_from_anchor(anchor, d, g);
  EXPECT_LT((p.pose.position - (anchor.pose.position + anchor.vel_world + 0.5 * g)).norm(), 1e-12);
  EXPECT_LT((p.vel_world - (anchor.vel_world + g)).norm(), 1e-12);
}

TEST(Preint, PredictStationaryBody) {
  AnchorState anchor;
  anchor.pose.orientation = Rotation::from_rpy(0.2, -0.1, 0.7);
  PreintegratedDelta d;
  ImuSample s;
  s.accel = anchor.pose.orientation.inverse() * Vec3(0.0, 0.0, kGravity);
  const int n = 100;
  const double dt = 1e-2;
  for (int i = 0; i < n; ++i) d = preint_step(d, s, dt);
  const PredictedState p = predict_from_anchor(anchor, d, gravity_vector());
  EXPECT_LT(p.vel_world.norm(), 1e-12);
  // Left-Riemann position sum lags the exact 1/2 g T^2 by 1/2 g T dt.
  const double T = n * dt;
  EXPECT_LT((p.pose.position - Vec3(0.0, 0.0, -0.5 * kGravity * T * dt)).norm(), 1e-12);
}

TEST(Preint, ImuToBaseLeverArm) {
  // Sensor offset r on a body spinning at constant w about z: the sensor sees
  // the extra centripetal term a_s = a_b + w x (w x r).
  Extrinsics ex;
  ex.translation = Vec3(0.1, 0.0, 0.0);
  ImuToBase to_base(ex);
  const Vec3 w(0.0, 0.0, 2.0);
  const Vec3 a_base(0.0, 0.0, kGravity);
  for (int i = 0; i < 3; ++i) {
    ImuSample s;
    s.t = Timestamp(i * 1'000'000);
    s.gyro = w;
    s.accel = a_base + w.cross(w.cross(ex.translation));
    const ImuSample b = to_base(s);
    EXPECT_LT((b.accel - a_base).norm(), 1e-12);
  }
}

TEST(VioPredictor, RebuildFromBufferEqualsSinglePass) {
  std::mt19937_64 rng(23);
  const std::int64_t period = 5'000'000;  // 200 Hz
  const auto samples = random_imu(rng, 400, period);
  std::uniform_int_distribution<int> split(0, 300), lag(0, 90);

  for (int trial = 0; trial < 100; ++trial) {
    const int k = split(rng);
    const int late = k + lag(rng);

    VioEstimate frame;
    frame.t_capture = samples[k].t;
    frame.t_available = frame.t_capture;
    frame.pose.position = Vec3(0.1 * trial, -0.2, 0.3);
    frame.pose.orientation = Rotation::from_rpy(0.01 * trial, 0.2, -0.3);
    frame.vel_world = Vec3(0.3, 0.1, -0.05);
    const Vec3 ba(0.02, 0.01, -0.03), bg(0.001, -0.002, 0.003);

    // Frame arrives after `late`: the buffer is re-integrated.
    VioPredictor rebuilt;
    rebuilt.set_biases(ba, bg);
    std::optional<VioEstimate> out_a;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (static_cast<int>(i) == late + 1) {
        ASSERT_TRUE(rebuilt.on_frame(frame));
      }
      out_a = rebuilt.on_imu(samples[i]);
    }

    // Frame arrives on time: single forward pass.
    VioPredictor single;
    single.set_biases(ba, bg);
    std::optional<VioEstimate> out_b;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      out_b = single.on_imu(samples[i]);
      if (static_cast<int>(i) == k) {
        ASSERT_TRUE(single.on_frame(frame));
      }
    }

    ASSERT_TRUE(out_a && out_b);
    EXPECT_LT((rebuilt.delta().dR.matrix() - single.delta().dR.matrix()).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((rebuilt.delta().dv - single.delta().dv).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((rebuilt.delta().dp - single.delta().dp).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((out_a->pose.position - out_b->pose.position).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT(so3_log(out_a->pose.orientation.inverse() * out_b->pose.orientation).norm(), 1e-9);
    EXPECT_LT((out_a->vel_world - out_b->vel_world).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(VioPredictor, PredictionMatchesAnchorPlusOracle) {
  std::mt19937_64 rng(29);
  const auto samples = random_imu(rng, 100, 5'000'000);
  VioPredictor pred;
  VioEstimate frame;
  frame.t_capture = samples[9].t;
  frame.t_available = frame.t_capture;
  frame.pose.orientation = Rotation::about_z(0.4);
  frame.vel_world = Vec3(0.2, 0.0, 0.0);
  std::optional<VioEstimate> out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (i == 50) {
      ASSERT_TRUE(pred.on_frame(frame));
    }
    out = pred.on_imu(samples[i]);
  }
  std::vector<ImuSample> tail(samples.begin() + 10, samples.end());
  std::vector<double> dt(tail.size(), 5e-3);
  const OracleDelta o = oracle(tail, dt, Vec3::Zero(), Vec3::Zero());
  const double T = 0.45;
  const Vec3 g = gravity_vector();
  const Mat3 Ra = frame.pose.orientation.matrix();
  const Vec3 p = frame.pose.position + frame.vel_world * T + 0.5 * g * T * T + Ra * o.p;
  ASSERT_TRUE(out);
  EXPECT_EQ(out->kind, VioKind::predicted);
  EXPECT_LT((out->pose.position - p).norm(), 1e-9);
  EXPECT_LT((out->vel_world - (frame.vel_world + g * T + Ra * o.v)).norm(), 1e-9);
}

TEST(VioPredictor, DropsStaleAndTooOldFrames) {
  std::mt19937_64 rng(31);
  const auto samples = random_imu(rng, 400, 5'000'000);
  VioPredictor::Options opt;
  opt.buffer_horizon_s = 0.5;
  VioPredictor pred(opt);
  for (const auto& s : samples) pred.on_imu(s);
  VioEstimate old;
  old.t_capture = samples[10].t;
  EXPECT_FALSE(pred.on_frame(old));
  VioEstimate fresh;
  fresh.t_capture = samples[390].t;
  EXPECT_TRUE(pred.on_frame(fresh));
  VioEstimate stale;
  stale.t_capture = samples[380].t;
  EXPECT_FALSE(pred.on_frame(stale));
  EXPECT_EQ(pred.dropped_frames(), 2u);
  EXPECT_THROW(pred.on_imu(samples[0]), std::invalid_argument);
}
