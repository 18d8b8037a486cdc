#pragma once

#include "ftatt/quaternion.hpp"

namespace ftatt {

/// Binary logic variable h in {-1, +1}.
class LogicVar {
 public:
  constexpr LogicVar() = default;
  explicit LogicVar(int value);

  constexpr int value() const { return value_; }
  constexpr double sign() const { return static_cast<double>(value_); }

  friend constexpr bool operator==(LogicVar a, LogicVar b) { return a.value_ == b.value_; }

 private:
  int value_{1};
};

/// Outer-semicontinuous sign selection; sgn(0) resolves to +1.
LogicVar sgn_bar(double x);

/// h Q, i.e. Q with its sign set by the logic variable.
inline UnitQuaternion signed_quat(LogicVar h, const UnitQuaternion& q) {
  return q.signed_by(h.value());
}

/// Jump condition h * scalar <= -delta. The boundary belongs to the jump set.
bool in_jump_set(LogicVar h, double scalar_part, double delta);

struct HysteresisResult {
  LogicVar h;
  bool jumped{false};
};

/// Applies the hysteresis jump map once: if h * scalar <= -delta the logic
/// variable becomes sgn_bar(scalar), otherwise it is unchanged.
HysteresisResult hysteresis_update(LogicVar h, double scalar_part, double delta);

/// Full-state gains. alpha2 = 2 alpha1 / (1 + alpha1) is derived, never set.
/// alpha1 = 1 is accepted and gives the asymptotic (non finite-time) law.
class FullStateGains {
 public:
  FullStateGains(double k1, double k2, double alpha1, double delta);

  double k1() const { return k1_; }
  double k2() const { return k2_; }
  double alpha1() const { return alpha1_; }
  double alpha2() const { return 2.0 * alpha1_ / (1.0 + alpha1_); }
  double delta() const { return delta_; }

 private:
  double k1_, k2_, alpha1_, delta_;
};

/// Bias observer gains. beta2 = 2 beta1 - 1 is derived; beta1 in (0.5, 1].
class ObserverGains {
 public:
  ObserverGains(double mu1, double mu2, double beta1, double delta);

  double mu1() const { return mu1_; }
  double mu2() const { return mu2_; }
  double beta1() const { return beta1_; }
  double beta2() const { return 2.0 * beta1_ - 1.0; }
  double delta() const { return delta_; }

 private:
  double mu1_, mu2_, beta1_, delta_;
};

/// Attitude-only gains. alpha1 = 2 alpha3 - 1 is derived; alpha3 in (0.5, 1].
class OutputFeedbackGains {
 public:
  OutputFeedbackGains(double k1, double k2, double k3, double alpha3, double delta);

  double k1() const { return k1_; }
  double k2() const { return k2_; }
  double k3() const { return k3_; }
  double alpha3() const { return alpha3_; }
  double alpha1() const { return 2.0 * alpha3_ - 1.0; }
  double delta() const { return delta_; }

 private:
  double k1_, k2_, k3_, alpha3_, delta_;
};

/// u = u_d - k1 kappa1(h Q_e, 1 - alpha1) - k2 sat_alpha2(omega_e).
Vec3 full_state_torque(const UnitQuaternion& q_e, const Vec3& omega_e, LogicVar h,
                       const FullStateGains& gains, const Vec3& u_d);

/// The full-state law fed with the estimated velocity error
/// omega_hat_e = omega_m - b_hat - R(Q_e) omega_d.
Vec3 certainty_equivalence_torque(const UnitQuaternion& q_e, const Vec3& omega_hat_e, LogicVar h,
                                  const FullStateGains& gains, const Vec3& u_d);

struct ObserverState {
  UnitQuaternion q_ei;  // estimate frame relative to F_I
  Vec3 b_hat{Vec3::Zero()};
  LogicVar h_tilde;
};

/// Q_tilde = Q_EI* (x) Q_meas: attitude of the body relative to the estimate frame.
UnitQuaternion observer_error(const ObserverState& obs, const UnitQuaternion& q_meas);

struct ObserverRates {
  Quaternion q_ei_dot;
  Vec3 b_hat_dot;
};

/// Flow of the hybrid bias observer:
///   Q_EI_dot = 1/2 Q_EI (x) R'(Q~)(omega_m - b_hat + mu1 kappa1(h~ Q~, 1 - beta1))
///   b_hat_dot = -mu2 kappa1(h~ Q~, 1 - beta2)
ObserverRates observer_flow_rate(const ObserverState& obs, const UnitQuaternion& q_meas,
                                 const Vec3& omega_m, const ObserverGains& gains);

/// Observer jump: only h~ changes, to sgn_bar(q~0). Throws std::logic_error
/// when the state is not in the observer jump set.
ObserverState observer_jump(const ObserverState& obs, const UnitQuaternion& q_meas, double delta);

struct FilterState {
  UnitQuaternion q_ed;  // filter frame relative to F_D
  LogicVar h_tilde;
};

/// Q_tilde = Q_ED* (x) Q_e.
UnitQuaternion filter_error(const FilterState& filter, const UnitQuaternion& q_e_meas);

/// Q_ED_dot = 1/2 Q_ED (x) [k3 R'(Q~) kappa1(h~ Q~, 1 - alpha3)].
Quaternion filter_flow_rate(const FilterState& filter, const UnitQuaternion& q_e_meas, double k3,
                            double alpha3);

/// Velocity-free law u = u_d - k1 kappa1(h Q_e, 1 - alpha1) - k2 kappa1(h~ Q~, 1 - alpha1).
Vec3 output_feedback_torque(const UnitQuaternion& q_e, const UnitQuaternion& q_tilde, LogicVar h,
                            LogicVar h_tilde, const OutputFeedbackGains& gains, const Vec3& u_d);

struct JointLogic {
  LogicVar h;
  LogicVar h_tilde;
};

/// Joint jump of the attitude-only closed loop: both logic variables are
/// reset to the signs of their scalar parts in one event. Throws
/// std::logic_error unless h q_e0 <= -delta or h~ q~0 <= -delta.
JointLogic joint_jump(const UnitQuaternion& q_e, const UnitQuaternion& q_tilde, LogicVar h,
                      LogicVar h_tilde, double delta);

}  // namespace ftatt
