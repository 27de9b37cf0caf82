#include <gtest/gtest.h>

#include "legvio/estimator.hpp"
#include "legvio/pipeline.hpp"
#include "legvio/sim.hpp"

using namespace legvio;

namespace {

Scenario short_trot(const SensorNoiseSpec& noise) {
  Scenario sc;
  GaitSpec stand;
  stand.duration = 2.0;
  GaitSpec trot;
  trot.kind = GaitKind::trot;
  trot.vx = 0.3;
  trot.duration = 6.0;
  sc.gaits = {stand, trot};
  sc.noise = noise;
  return sc;
}

double max_position_error(const Trajectory& est, const Trajectory& truth) {
  double e = 0.0;
  for (std::size_t i = 0; i < std::min(est.size(), truth.size()); ++i) {
    e = std::max(e, (est[i].pose.position - truth[i].pose.position).norm());
  }
  return e;
}

}  // namespace

TEST(Estimator, VariantNames) {
  for (Variant v : kAllVariants) EXPECT_EQ(parse_variant(variant_name(v)), v);
  EXPECT_EQ(std::string(variant_name(Variant::ekf_vio_plus)), "ekf_vio+");
  EXPECT_FALSE(parse_variant("ekf_gps"));
}

TEST(Estimator, NoiselessVariantsTrackTruth) {
  const Scenario sc = short_trot(SensorNoiseSpec::noiseless());
  const SimRun run = simulate(sc, 1);
  const EstimatorConfig cfg;
  for (Variant v : {Variant::ekf_leg, Variant::ekf_vicon, Variant::ekf_vio_plus, Variant::ekf_vio}) {
    const EstimateResult r = run_estimator(run.log, sc.robot, cfg, v, initial_sample(run.log, run.truth));
    ASSERT_EQ(r.trajectory.size(), run.truth.size()) << variant_name(v);
    EXPECT_EQ(r.trajectory.front().t, run.truth.front().t);
    EXPECT_LT(max_position_error(r.trajectory, run.truth), 5e-3) << variant_name(v);
    EXPECT_EQ(r.counters.rejections(), 0u) << variant_name(v);
  }
}

TEST(Estimator, PassthroughHoldsLatestAvailable) {
  SensorNoiseSpec noise = SensorNoiseSpec::noiseless();
  noise.vio.latency_mean_ms = 5.0;
  noise.vio.frame_delay_ms = 1000.0 / 30.0;
  const Scenario sc = short_trot(noise);
  const SimRun run = simulate(sc, 1);
  const EstimateResult r = run_estimator(run.log, sc.robot, EstimatorConfig{}, Variant::vio,
                                         initial_sample(run.log, run.truth));
  ASSERT_EQ(r.trajectory.size(), run.truth.size());
  // After the first frame arrives, each sample equals the newest frame available by then.
  std::size_t f = 0;
  std::vector<VioEstimate> frames;
  for (const auto& v : run.log.vio) {
    if (v.kind == VioKind::frame) frames.push_back(v);
  }
  ASSERT_FALSE(frames.empty());
  for (std::size_t i = 0; i < r.trajectory.size(); i += 7) {
    const Timestamp t = r.trajectory[i].t;
    while (f + 1 < frames.size() && frames[f + 1].t_available <= t) ++f;
    if (frames[f].t_available > t) continue;
    EXPECT_LT((r.trajectory[i].pose.position - frames[f].pose.position).norm(), 1e-12) << i;
  }
}

TEST(Estimator, HeightBiasFollowsOffset) {
  SensorNoiseSpec noise = SensorNoiseSpec::noiseless();
  noise.vio.z_offset = 0.03;
  const Scenario sc = short_trot(noise);
  const SimRun run = simulate(sc, 1);
  const EstimateResult r = run_estimator(run.log, sc.robot, EstimatorConfig{}, Variant::ekf_vio_plus,
                                         initial_sample(run.log, run.truth));
  ASSERT_FALSE(r.diagnostics.empty());
  EXPECT_NEAR(r.diagnostics.back().b_dz, 0.03, 2e-3);
  EXPECT_GT(r.counters.height_updates, 0u);
  EXPECT_LT(max_position_error(r.trajectory, run.truth), 5e-3);
}

TEST(Estimator, ObserverSeesEveryStep) {
  const Scenario sc = short_trot(SensorNoiseSpec::noiseless());
  const SimRun run = simulate(sc, 1);
  std::size_t calls = 0;
  const EstimateResult r = run_estimator(run.log, sc.robot, EstimatorConfig{}, Variant::ekf_vio_plus,
                                         initial_sample(run.log, run.truth), [&](const Ekf&) { ++calls; });
  EXPECT_EQ(calls, r.trajectory.size());
}

TEST(Estimator, ConfigValidation) {
  EstimatorConfig c;
  EXPECT_NO_THROW(c.validate());
  c.max_substep_s = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}
