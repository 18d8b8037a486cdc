#include "ftatt/hybrid_controllers.hpp"

#include "ftatt/rigid_body.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ftatt {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) {
    throw std::invalid_argument(what);
  }
}

void require_delta(double delta) {
  require(delta > 0.0 && delta < 1.0, "hysteresis gap delta must lie in (0, 1)");
}

}  // namespace

LogicVar::LogicVar(int value) : value_(value) {
  if (value != 1 && value != -1) {
    throw std::invalid_argument("logic variable must be -1 or +1, got " + std::to_string(value));
  }
}

LogicVar sgn_bar(double x) { return LogicVar(x < 0.0 ? -1 : 1); }

bool in_jump_set(LogicVar h, double scalar_part, double delta) {
  return h.sign() * scalar_part <= -delta;
}

HysteresisResult hysteresis_update(LogicVar h, double scalar_part, double delta) {
  if (!(std::abs(scalar_part) <= 1.0 + 1e-9)) {
    throw std::domain_error("hysteresis_update: scalar part outside [-1, 1]");
  }
  if (in_jump_set(h, scalar_part, delta)) {
    return {sgn_bar(scalar_part), true};
  }
  return {h, false};
}

FullStateGains::FullStateGains(double k1, double k2, double alpha1, double delta)
    : k1_(k1), k2_(k2), alpha1_(alpha1), delta_(delta) {
  require(k1 > 0.0 && k2 > 0.0, "full-state gains k1, k2 must be positive");
  require(alpha1 > 0.0 && alpha1 <= 1.0, "alpha1 must lie in (0, 1]");
  require_delta(delta);
}

ObserverGains::ObserverGains(double mu1, double mu2, double beta1, double delta)
    : mu1_(mu1), mu2_(mu2), beta1_(beta1), delta_(delta) {
  require(mu1 > 0.0 && mu2 > 0.0, "observer gains mu1, mu2 must be positive");
  require(beta1 > 0.5 && beta1 <= 1.0, "beta1 must lie in (0.5, 1]");
  require_delta(delta);
}

OutputFeedbackGains::OutputFeedbackGains(double k1, double k2, double k3, double alpha3,
                                         double delta)
    : k1_(k1), k2_(k2), k3_(k3), alpha3_(alpha3), delta_(delta) {
  require(k1 > 0.0 && k2 > 0.0 && k3 > 0.0, "output-feedback gains k1, k2, k3 must be positive");
  require(alpha3 > 0.5 && alpha3 <= 1.0, "alpha3 must lie in (0.5, 1]");
  require_delta(delta);
}

Vec3 full_state_torque(const UnitQuaternion& q_e, const Vec3& omega_e, LogicVar h,
                       const FullStateGains& gains, const Vec3& u_d) {
  return u_d - gains.k1() * kappa1(signed_quat(h, q_e), 1.0 - gains.alpha1()) -
         gains.k2() * sat_pow(omega_e, gains.alpha2());
}

Vec3 certainty_equivalence_torque(const UnitQuaternion& q_e, const Vec3& omega_hat_e, LogicVar h,
                                  const FullStateGains& gains, const Vec3& u_d) {
  return full_state_torque(q_e, omega_hat_e, h, gains, u_d);
}

UnitQuaternion observer_error(const ObserverState& obs, const UnitQuaternion& q_meas) {
  return conjugate(obs.q_ei) * q_meas;
}

ObserverRates observer_flow_rate(const ObserverState& obs, const UnitQuaternion& q_meas,
                                 const Vec3& omega_m, const ObserverGains& gains) {
  const UnitQuaternion q_tilde = observer_error(obs, q_meas);
  const UnitQuaternion hq = signed_quat(obs.h_tilde, q_tilde);
  const Vec3 w = rotation_matrix(q_tilde).transpose() *
                 (omega_m - obs.b_hat + gains.mu1() * kappa1(hq, 1.0 - gains.beta1()));
  return {kinematics_rate(obs.q_ei, w), -gains.mu2() * kappa1(hq, 1.0 - gains.beta2())};
}

ObserverState observer_jump(const ObserverState& obs, const UnitQuaternion& q_meas, double delta) {
  const double q0 = observer_error(obs, q_meas).scalar();
  if (!in_jump_set(obs.h_tilde, q0, delta)) {
    throw std::logic_error("observer_jump: state is not in the observer jump set");
  }
  ObserverState next = obs;
  next.h_tilde = sgn_bar(q0);
  return next;
}

UnitQuaternion filter_error(const FilterState& filter, const UnitQuaternion& q_e_meas) {
  return conjugate(filter.q_ed) * q_e_meas;
}

Quaternion filter_flow_rate(const FilterState& filter, const UnitQuaternion& q_e_meas, double k3,
                            double alpha3) {
  const UnitQuaternion q_tilde = filter_error(filter, q_e_meas);
  const Vec3 w = k3 * (rotation_matrix(q_tilde).transpose() *
                       kappa1(signed_quat(filter.h_tilde, q_tilde), 1.0 - alpha3));
  return kinematics_rate(filter.q_ed, w);
}

Vec3 output_feedback_torque(const UnitQuaternion& q_e, const UnitQuaternion& q_tilde, LogicVar h,
                            LogicVar h_tilde, const OutputFeedbackGains& gains, const Vec3& u_d) {
  const double a = 1.0 - gains.alpha1();
  return u_d - gains.k1() * kappa1(signed_quat(h, q_e), a) -
         gains.k2() * kappa1(signed_quat(h_tilde, q_tilde), a);
}

JointLogic joint_jump(const UnitQuaternion& q_e, const UnitQuaternion& q_tilde, LogicVar h,
                      LogicVar h_tilde, double delta) {
  if (!in_jump_set(h, q_e.scalar(), delta) && !in_jump_set(h_tilde, q_tilde.scalar(), delta)) {
    throw std::logic_error("joint_jump: state is not in the attitude-only jump set");
  }
  return {sgn_bar(q_e.scalar()), sgn_bar(q_tilde.scalar())};
}

}  // namespace ftatt
