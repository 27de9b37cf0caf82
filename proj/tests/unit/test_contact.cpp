#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <random>

#include "legvio/contact.hpp"

using namespace legvio;

namespace {

ContactOptions options(int n_contact, int n_standing) {
  ContactOptions o;
  o.f_hi = 10.0;
  o.f_lo = 4.0;
  o.n_contact = n_contact;
  o.n_standing = n_standing;
  return o;
}

std::array<std::optional<double>, kNumLegs> all(double f) { return {f, f, f, f}; }

}  // namespace

TEST(Contact, FootForceInvertsJacobianTranspose) {
  // tau = J^T f
  const RobotModel m = RobotModel::solo12();
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const LegJoints q(0.3 * u(rng), u(rng), 1.2 + 0.5 * u(rng));
    const Vec3 f(u(rng), u(rng), 10.0 + u(rng));
    const LegModel& leg = m.legs[i % kNumLegs];
    const Vec3 tau = jac_foot(leg, q).transpose() * f;
    const auto est = foot_force(leg, q, tau);
    ASSERT_TRUE(est);
    EXPECT_LT((*est - f).norm(), 1e-9);
  }
  // Fully extended leg: singular.
  EXPECT_FALSE(foot_force(m.legs[0], LegJoints::Zero(), Vec3(1.0, 1.0, 1.0)));
}

TEST(Contact, SchmittHysteresis) {
  ContactTracker t(options(1, 1));
  const std::vector<double> forces{0, 5, 9.9, 10.1, 8, 5, 4.1, 3.9, 6, 9, 11};
  const std::vector<bool> expected{false, false, false, true, true, true, true, false, false, false, true};
  for (std::size_t i = 0; i < forces.size(); ++i) EXPECT_EQ(t.schmitt_update(0, forces[i]), expected[i]) << i;
  EXPECT_THROW(t.schmitt_update(0, -1.0), std::invalid_argument);
}

TEST(Contact, StandingGateNeedsThreeSteps) {
  ContactTracker t(options(1, 3));
  EXPECT_FALSE(t.step(all(20.0)).height_ready);
  EXPECT_FALSE(t.step(all(20.0)).height_ready);
  const GatedContacts g = t.step(all(20.0));
  EXPECT_TRUE(g.height_ready);
  for (bool c : g.leg_odometry) EXPECT_TRUE(c);
  EXPECT_EQ(t.all_standing_steps(), 3);

  // One leg lifts: reset.
  auto f = all(20.0);
  f[2] = 1.0;
  EXPECT_FALSE(t.step(f).height_ready);
  EXPECT_EQ(t.all_standing_steps(), 0);
}

TEST(Contact, LegGateNeedsConsecutiveSteps) {
  ContactTracker t(options(3, 1));
  auto f = all(0.0);
  f[FR] = 20.0;
  EXPECT_FALSE(t.step(f).leg_odometry[FR]);
  EXPECT_FALSE(t.step(f).leg_odometry[FR]);
  EXPECT_TRUE(t.step(f).leg_odometry[FR]);
  EXPECT_EQ(t.consecutive_contact_steps(FR), 3);
  EXPECT_FALSE(t.gated().leg_odometry[FL]);
}

TEST(Contact, UnavailableResetsCountersNotSchmitt) {
  ContactTracker t(options(1, 2));
  t.step(all(20.0));
  auto f = all(20.0);
  f[HL] = std::nullopt;
  const GatedContacts g = t.step(f);
  EXPECT_FALSE(g.leg_odometry[HL]);
  EXPECT_FALSE(g.height_ready);
  EXPECT_TRUE(t.schmitt_state(HL));
  EXPECT_EQ(t.consecutive_contact_steps(HL), 0);
}

TEST(Contact, SpikeRejectedByLongGate) {
  // A two-step torque spike in flight passes N = 1 but not N = 20.
  ContactTracker shortg(options(1, 3)), longg(options(20, 20));
  int short_ready = 0, long_ready = 0;
  for (int i = 0; i < 50; ++i) {
    const double f = (i == 10 || i == 11) ? 30.0 : 0.0;
    short_ready += shortg.step(all(f)).leg_odometry[0];
    long_ready += longg.step(all(f)).leg_odometry[0];
  }
  EXPECT_EQ(short_ready, 2);
  EXPECT_EQ(long_ready, 0);
}

TEST(Contact, OptionPresets) {
  const ContactOptions d = ContactOptions::for_mass(2.5);
  EXPECT_GT(d.f_hi, d.f_lo);
  EXPECT_GT(d.f_lo, 0.0);
  EXPECT_LT(d.f_hi, 2.5 * kGravity / 4.0);
  const ContactOptions c = ContactOptions::conservative(2.5);
  EXPECT_EQ(c.n_contact, 20);
  EXPECT_EQ(c.n_standing, 20);
  ContactOptions bad = d;
  bad.f_lo = bad.f_hi + 1.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}
