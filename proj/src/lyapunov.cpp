#include "ftatt/lyapunov.hpp"

namespace ftatt {

double lyapunov_v1(const UnitQuaternion& q_e, const Vec3& omega_e, LogicVar h,
                   const InertiaMatrix& j, double k1, double alpha1) {
  const double kinetic = 0.5 * omega_e.dot(j.matrix() * omega_e);
  return kinetic + 2.0 * k1 / (1.0 + alpha1) * phi(signed_quat(h, q_e), 1.0 + alpha1);
}

double lyapunov_v2(const UnitQuaternion& q_tilde, const Vec3& b_tilde, LogicVar h_tilde,
                   double mu2, double power) {
  return 0.5 * b_tilde.squaredNorm() +
         2.0 * mu2 / (1.0 + power) * phi(signed_quat(h_tilde, q_tilde), 1.0 + power);
}

double lyapunov_v3(const UnitQuaternion& q_e, const Vec3& omega_e, LogicVar h,
                   const UnitQuaternion& q_tilde, LogicVar h_tilde, const InertiaMatrix& j,
                   const OutputFeedbackGains& gains, double power) {
  return lyapunov_v1(q_e, omega_e, h, j, gains.k1(), gains.alpha1()) +
         2.0 * gains.k2() / (1.0 + power) * phi(signed_quat(h_tilde, q_tilde), 1.0 + power);
}

double v2_power(const ObserverGains& gains, PotentialForm form) {
  return form == PotentialForm::Stated ? gains.beta1() : gains.beta2();
}

double v3_power(const OutputFeedbackGains& gains, PotentialForm form) {
  return form == PotentialForm::Stated ? gains.alpha3() : gains.alpha1();
}

double jump_margin(double gain, double power, double delta) {
  return -2.0 * gain * rho(-delta, 1.0 + power) / (1.0 + power);
}

double v1_rate(const Vec3& omega_e, const FullStateGains& gains) {
  return -gains.k2() * omega_e.dot(sat_pow(omega_e, gains.alpha2()));
}

double v2_rate_claimed(const UnitQuaternion& q_tilde, LogicVar h_tilde, const ObserverGains& g) {
  return -g.mu1() * g.mu2() * kappa1(signed_quat(h_tilde, q_tilde), 1.0 - g.beta1()).squaredNorm();
}

double v2_rate_consistent(const UnitQuaternion& q_tilde, LogicVar h_tilde,
                          const ObserverGains& g) {
  const UnitQuaternion hq = signed_quat(h_tilde, q_tilde);
  return -g.mu1() * g.mu2() * kappa1(hq, 1.0 - g.beta1()).dot(kappa1(hq, 1.0 - g.beta2()));
}

double v3_rate_claimed(const UnitQuaternion& q_tilde, LogicVar h_tilde,
                       const OutputFeedbackGains& g) {
  return -g.k1() * g.k2() * g.k3() *
         kappa1(signed_quat(h_tilde, q_tilde), 1.0 - g.alpha3()).squaredNorm();
}

double v3_rate_consistent(const UnitQuaternion& q_tilde, LogicVar h_tilde,
                          const OutputFeedbackGains& g) {
  const UnitQuaternion hq = signed_quat(h_tilde, q_tilde);
  return -g.k2() * g.k3() * kappa1(hq, 1.0 - g.alpha3()).dot(kappa1(hq, 1.0 - g.alpha1()));
}

}  // namespace ftatt
