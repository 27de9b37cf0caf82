#include "legvio/contact.hpp"

#include <cmath>
#include <stdexcept>

namespace legvio {

namespace {
constexpr double kSingularDet = 1e-8;
}

std::optional<Vec3> foot_force(const LegModel& leg, const LegJoints& q, const Vec3& tau) {
  const Mat3 Jt = jac_foot(leg, q).transpose();
  if (std::abs(Jt.determinant()) <= kSingularDet) return std::nullopt;
  return Vec3(Jt.partialPivLu().solve(tau));
}

ContactOptions ContactOptions::for_mass(double mass, double gravity) {
  const double static_load = mass * gravity / kNumLegs;
  ContactOptions o;
  o.f_hi = 0.6 * static_load;
  o.f_lo = 0.25 * static_load;
  return o;
}

ContactOptions ContactOptions::conservative(double mass, double gravity) {
  ContactOptions o = for_mass(mass, gravity);
  o.n_contact = 20;
  o.n_standing = 20;
  return o;
}

void ContactOptions::validate() const {
  if (!(f_lo > 0.0) || !(f_hi > f_lo)) {
    throw std::invalid_argument("contact thresholds must satisfy f_hi > f_lo > 0");
  }
  if (n_contact < 1 || n_standing < 1) {
    throw std::invalid_argument("contact step counts must be >= 1");
  }
}

ContactTracker::ContactTracker(const ContactOptions& options) : options_(options) {
  options_.validate();
}

bool ContactTracker::schmitt_update(int leg, double force_norm) {
  if (force_norm < 0.0) throw std::invalid_argument("force norm must be non-negative");
  bool& on = schmitt_[leg];
  if (!on && force_norm > options_.f_hi) {
    on = true;
  } else if (on && force_norm < options_.f_lo) {
    on = false;
  }
  step_contact_[leg] = on;
  consecutive_[leg] = on ? consecutive_[leg] + 1 : 0;
  return on;
}

void ContactTracker::mark_unavailable(int leg) {
  step_contact_[leg] = false;
  consecutive_[leg] = 0;
}

void ContactTracker::end_step() {
  bool all = true;
  for (bool c : step_contact_) all = all && c;
  all_standing_ = all ? all_standing_ + 1 : 0;
}

GatedContacts ContactTracker::step(const std::array<std::optional<double>, kNumLegs>& force_norms) {
  for (int k = 0; k < kNumLegs; ++k) {
    if (force_norms[k]) {
      schmitt_update(k, *force_norms[k]);
    } else {
      mark_unavailable(k);
    }
  }
  end_step();
  return gated();
}

GatedContacts ContactTracker::gated() const {
  GatedContacts g;
  for (int k = 0; k < kNumLegs; ++k) {
    g.leg_odometry[k] = step_contact_[k] && consecutive_[k] >= options_.n_contact;
  }
  g.height_ready = all_standing_ >= options_.n_standing;
  return g;
}

}  // namespace legvio
