#pragma once

#include "ftatt/hybrid_controllers.hpp"
#include "ftatt/rigid_body.hpp"

namespace ftatt {

/// Which exponent the attitude-potential term of V2/V3 uses.
///
/// `Stated` is the textbook form: 1 + beta1 for V2 and 1 + alpha3 for V3.
/// `Consistent` uses 1 + beta2 and 1 + alpha1 instead. Only the consistent
/// exponent makes the cross terms cancel in the derivative along flows, so
/// it is the one whose derivative is sign-definite. Both are kept so the
/// difference can be measured.
enum class PotentialForm { Stated, Consistent };

/// V1 = 1/2 w_e' J w_e + 2 k1/(1 + alpha1) phi(h q_e0, 1 + alpha1).
double lyapunov_v1(const UnitQuaternion& q_e, const Vec3& omega_e, LogicVar h,
                   const InertiaMatrix& j, double k1, double alpha1);

/// V2 = 1/2 |b~|^2 + 2 mu2/(1 + p) phi(h~ q~0, 1 + p).
double lyapunov_v2(const UnitQuaternion& q_tilde, const Vec3& b_tilde, LogicVar h_tilde,
                   double mu2, double power);

/// V3 = V1 + 2 k2/(1 + p) phi(h~ q~0, 1 + p), with V1 built on alpha1 = 2 alpha3 - 1.
double lyapunov_v3(const UnitQuaternion& q_e, const Vec3& omega_e, LogicVar h,
                   const UnitQuaternion& q_tilde, LogicVar h_tilde, const InertiaMatrix& j,
                   const OutputFeedbackGains& gains, double power);

/// The exponent p for V2: beta1 (stated) or beta2 (consistent).
double v2_power(const ObserverGains& gains, PotentialForm form);
/// The exponent p for V3: alpha3 (stated) or alpha1 (consistent).
double v3_power(const OutputFeedbackGains& gains, PotentialForm form);

/// Guaranteed decrease of 2 gain/(1 + p) phi(h x, 1 + p) across a hysteresis
/// jump: sigma = -2 gain rho(-delta, 1 + p)/(1 + p) > 0.
double jump_margin(double gain, double power, double delta);

/// -k2 w_e' sat_alpha2(w_e): derivative of V1 under the full-state law.
double v1_rate(const Vec3& omega_e, const FullStateGains& gains);

/// -mu1 mu2 |kappa1(h~Q~, 1 - beta1)|^2, the derivative claimed for the
/// stated V2.
double v2_rate_claimed(const UnitQuaternion& q_tilde, LogicVar h_tilde, const ObserverGains& g);
/// -mu1 mu2 kappa1(h~Q~, 1 - beta1)' kappa1(h~Q~, 1 - beta2), the derivative
/// of the consistent V2.
double v2_rate_consistent(const UnitQuaternion& q_tilde, LogicVar h_tilde,
                          const ObserverGains& g);

/// -k1 k2 k3 |kappa1(h~Q~, 1 - alpha3)|^2, the derivative claimed for the
/// stated V3.
double v3_rate_claimed(const UnitQuaternion& q_tilde, LogicVar h_tilde,
                       const OutputFeedbackGains& g);
/// -k2 k3 kappa1(h~Q~, 1 - alpha3)' kappa1(h~Q~, 1 - alpha1), the derivative
/// of the consistent V3.
double v3_rate_consistent(const UnitQuaternion& q_tilde, LogicVar h_tilde,
                          const OutputFeedbackGains& g);

}  // namespace ftatt
