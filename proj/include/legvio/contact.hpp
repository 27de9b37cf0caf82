#pragma once

#include <array>
#include <optional>

#include "legvio/kinematics.hpp"

namespace legvio {

/// Endeffector force from joint torques, F = (J^T)^-1 tau, with the sign
/// convention tau = J^T F (F is what the foot exerts on the environment).
/// Returns nullopt when |det J| <= 1e-8 (knee near full extension).
std::optional<Vec3> foot_force(const LegModel& leg, const LegJoints& q, const Vec3& tau);

struct ContactOptions {
  double f_hi = 0.0;  // N, switch on above
  double f_lo = 0.0;  // N, switch off below
  int n_contact = 1;
  int n_standing = 3;

  /// Thresholds scaled from the static per-leg load m g / 4.
  static ContactOptions for_mass(double mass, double gravity = kGravity);
  /// Long contact-duration thresholds (N_contact = N_standing = 20).
  static ContactOptions conservative(double mass, double gravity = kGravity);

  void validate() const;
};

struct GatedContacts {
  std::array<bool, kNumLegs> leg_odometry{};  // eligible for velocity updates
  bool height_ready = false;
};

/// Per-leg Schmitt trigger with consecutive-step gating.
class ContactTracker {
 public:
  explicit ContactTracker(const ContactOptions& options);

  /// Hysteresis update: off -> on iff force_norm > f_hi, on -> off iff
  /// force_norm < f_lo. Returns the new contact state.
  bool schmitt_update(int leg, double force_norm);

  /// Marks the leg as not in contact for this step without touching its
  /// Schmitt state (used for singular force estimates).
  void mark_unavailable(int leg);

  /// Closes the step: advances the standing counter. Call after every leg
  /// has been updated for the step.
  void end_step();

  /// Convenience: updates all legs then closes the step.
  GatedContacts step(const std::array<std::optional<double>, kNumLegs>& force_norms);

  GatedContacts gated() const;

  bool in_contact(int leg) const { return step_contact_[leg]; }
  bool schmitt_state(int leg) const { return schmitt_[leg]; }
  int consecutive_contact_steps(int leg) const { return consecutive_[leg]; }
  int all_standing_steps() const { return all_standing_; }
  const ContactOptions& options() const { return options_; }

 private:
  ContactOptions options_;
  std::array<bool, kNumLegs> schmitt_{};
  std::array<bool, kNumLegs> step_contact_{};
  std::array<int, kNumLegs> consecutive_{};
  int all_standing_ = 0;
};

}  // namespace legvio
