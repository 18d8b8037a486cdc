#pragma once
// Independent reference computations for tests and the acceptance binary.
// Quaternion arithmetic, rigid-body equations and the integrator here are
// written from scratch on plain Eigen vectors so they share no code path
// with the library routines they check. Control laws and kappa functions are
// taken from the library (they are covered by their own unit tests).

#include <algorithm>
#include <cmath>
#include <functional>

#include <Eigen/Dense>

#include "ftatt/hybrid_controllers.hpp"
#include "ftatt/quaternion.hpp"
#include "ftatt/rigid_body.hpp"

namespace oracle {

using V3 = Eigen::Vector3d;
using V4 = Eigen::Vector4d;
using VX = Eigen::VectorXd;
using M3 = Eigen::Matrix3d;

inline V4 qmul(const V4& a, const V4& b) {
  const double a0 = a(0), b0 = b(0);
  const V3 av = a.tail<3>(), bv = b.tail<3>();
  V4 r;
  r(0) = a0 * b0 - av.dot(bv);
  r.tail<3>() = a0 * bv + b0 * av + av.cross(bv);
  return r;
}

inline V4 qconj(const V4& a) { return V4(a(0), -a(1), -a(2), -a(3)); }

inline V4 pure(const V3& v) { return V4(0.0, v(0), v(1), v(2)); }

/// Vector part of Q* (x) [0, x] (x) Q: x expressed in the frame Q describes.
inline V3 rotate_into(const V4& q, const V3& x) {
  return qmul(qmul(qconj(q), pure(x)), q).tail<3>();
}

inline V4 as_v4(const ftatt::UnitQuaternion& q) { return q.quat().coeffs(); }

inline ftatt::UnitQuaternion as_unit(const V4& v) {
  return ftatt::normalize(ftatt::Quaternion(v(0), v(1), v(2), v(3)));
}

/// Sign-insensitive distance between two quaternions.
inline double qdist(const V4& a, const V4& b) { return std::min((a - b).norm(), (a + b).norm()); }

/// Textbook formula q / (sqrt(2(1 - q0)))^alpha, evaluated naively.
inline V3 naive_kappa1(const V4& q, double alpha) {
  if (q(0) >= 1.0) return V3::Zero();
  return q.tail<3>() / std::pow(std::sqrt(2.0 * (1.0 - q(0))), alpha);
}

using Field = std::function<VX(double, const VX&)>;

inline VX rk4(const Field& f, double t, const VX& x, double dt) {
  const VX k1 = f(t, x);
  const VX k2 = f(t + dt / 2, x + dt / 2 * k1);
  const VX k3 = f(t + dt / 2, x + dt / 2 * k2);
  const VX k4 = f(t + dt, x + dt * k3);
  return x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
}

/// Sinusoidal desired rate a sin(f t) and its derivative.
struct Sinusoid {
  V3 amplitude{V3::Zero()};
  double frequency{0.0};
  V3 omega(double t) const { return amplitude * std::sin(frequency * t); }
  V3 omega_dot(double t) const { return amplitude * frequency * std::cos(frequency * t); }
};

/// Relative-motion equations written out directly:
///   J w_e' = Xi w_e - wd^ J wd - J R(Q_e) wd_dot + u
inline V3 error_omega_rate(const M3& j, const V4& q_e, const V3& w_e, const V3& wd_inertial,
                           const V3& wd_dot_inertial, const V3& u) {
  const V4 qn = q_e / q_e.norm();
  const V3 wd = rotate_into(qn, wd_inertial);
  const V3 jw = j * (w_e + wd);
  // Xi w_e = (J(w_e + wd)) x w_e - wd x J w_e - J (wd x w_e)
  const V3 xi_w = jw.cross(w_e) - wd.cross(j * w_e) - j * wd.cross(w_e);
  const V3 rhs = xi_w - wd.cross(j * wd) - j * rotate_into(qn, wd_dot_inertial) + u;
  return j.ldlt().solve(rhs);
}

/// Feedforward torque wd^ J wd + J R(Q_e) wd_dot.
inline V3 feedforward(const M3& j, const V4& q_e, const V3& wd_inertial, const V3& wd_dot_inertial) {
  const V4 qn = q_e / q_e.norm();
  const V3 wd = rotate_into(qn, wd_inertial);
  return wd.cross(j * wd) + j * rotate_into(qn, wd_dot_inertial);
}

struct DualResult {
  double max_quat_diff{0.0};
  double max_vec_diff{0.0};
  double max() const { return std::max(max_quat_diff, max_vec_diff); }
};

/// Full-state closed loop propagated two ways over [0, t_end] with fixed h:
/// (a) absolute attitude and rate plus the desired frame, errors recomputed;
/// (b) the library's error dynamics. Returns the largest disagreement in
/// (Q_e, w_e).
inline DualResult absolute_vs_error_dynamics(const M3& j, const V4& q0, const V3& w0,
                                             const Sinusoid& traj, const ftatt::FullStateGains& g,
                                             int h, double t_end, double dt) {
  const ftatt::LogicVar hv(h);
  const ftatt::InertiaMatrix jm(j);

  // (a) x = [Q, w, Q_d]
  auto torque_abs = [&](double t, const V4& q, const V3& w, const V4& qd) {
    const V4 qe = qmul(qconj(qd), q);
    const V3 we = w - rotate_into(qe / qe.norm(), traj.omega(t));
    return V3(ftatt::full_state_torque(as_unit(qe), we, hv, g,
                                       feedforward(j, qe, traj.omega(t), traj.omega_dot(t))));
  };
  Field fa = [&](double t, const VX& x) {
    const V4 q = x.segment<4>(0);
    const V3 w = x.segment<3>(4);
    const V4 qd = x.segment<4>(7);
    VX r(11);
    r.segment<4>(0) = 0.5 * qmul(q, pure(w));
    r.segment<3>(4) = j.ldlt().solve(-w.cross(j * w) + torque_abs(t, q, w, qd));
    r.segment<4>(7) = 0.5 * qmul(qd, pure(traj.omega(t)));
    return r;
  };
  // (b) x = [Q_e, w_e] through library routines
  Field fb = [&](double t, const VX& x) {
    const ftatt::Quaternion raw(x(0), x(1), x(2), x(3));
    const ftatt::UnitQuaternion qe = ftatt::normalize(raw);
    const V3 we = x.segment<3>(4);
    ftatt::ErrorState es{qe, we, ftatt::rotation_matrix(qe) * traj.omega(t)};
    const V3 ud = ftatt::feedforward_torque(jm, qe, traj.omega(t), traj.omega_dot(t));
    const V3 u = ftatt::full_state_torque(qe, we, hv, g, ud);
    const ftatt::ErrorRates er = ftatt::error_dynamics_rate(jm, es, traj.omega_dot(t), u);
    VX r(7);
    r.segment<4>(0) = raw.norm() * er.q_e_dot.coeffs();
    r.segment<3>(4) = er.omega_e_dot;
    return r;
  };

  VX xa(11);
  xa << q0, w0, V4(1, 0, 0, 0);
  VX xb(7);
  xb << q0, w0;  // Q_d(0) = 1, w_d(0) = 0 so the errors start at the absolute values
  DualResult res;
  const int n = static_cast<int>(std::llround(t_end / dt));
  for (int i = 0; i < n; ++i) {
    const double t = i * dt;
    xa = rk4(fa, t, xa, dt);
    xb = rk4(fb, t, xb, dt);
    const double tn = (i + 1) * dt;
    const V4 qe_a = qmul(qconj(xa.segment<4>(7)), xa.segment<4>(0));
    const V3 we_a = xa.segment<3>(4) - rotate_into(qe_a / qe_a.norm(), traj.omega(tn));
    res.max_quat_diff = std::max(res.max_quat_diff, (qe_a - xb.segment<4>(0)).norm());
    res.max_vec_diff = std::max(res.max_vec_diff, (we_a - xb.segment<3>(4)).norm());
  }
  return res;
}

/// Bias observer propagated two ways with fixed h~ and a prescribed body
/// rate w(t) under a constant bias b:
/// (a) truth attitude plus the library observer (Q_EI, b_hat);
/// (b) the estimation-error system Q~' = 1/2 Q~ (x) [-b~ - mu1 kappa1],
///     b~' = mu2 kappa1. Returns the disagreement in (Q~, b~).
inline DualResult observer_vs_error_system(const V4& q0, const V4& q_ei0, const V3& b,
                                           const V3& b_hat0,
                                           const std::function<V3(double)>& omega,
                                           const ftatt::ObserverGains& g, int h_tilde,
                                           double t_end, double dt) {
  const ftatt::LogicVar ht(h_tilde);
  Field fa = [&](double t, const VX& x) {
    const V4 q = x.segment<4>(0);
    ftatt::ObserverState obs{as_unit(x.segment<4>(4)), x.segment<3>(8), ht};
    const V3 wm = omega(t) + b;
    const ftatt::ObserverRates r = ftatt::observer_flow_rate(obs, as_unit(q), wm, g);
    const double scale = x.segment<4>(4).norm();
    VX out(11);
    out.segment<4>(0) = 0.5 * qmul(q, pure(omega(t)));
    out.segment<4>(4) = scale * r.q_ei_dot.coeffs();
    out.segment<3>(8) = r.b_hat_dot;
    return out;
  };
  Field fb = [&](double, const VX& x) {
    const V4 qt = x.segment<4>(0);
    const V3 bt = x.segment<3>(4);
    const ftatt::UnitQuaternion qtu = as_unit(qt);
    const ftatt::UnitQuaternion hq = ftatt::signed_quat(ht, qtu);
    const V3 k_b1 = ftatt::kappa1(hq, 1.0 - g.beta1());
    const V3 k_b2 = ftatt::kappa1(hq, 1.0 - g.beta2());
    VX out(7);
    out.segment<4>(0) = 0.5 * qmul(qt, pure(-bt - g.mu1() * k_b1));
    out.segment<3>(4) = g.mu2() * k_b2;
    return out;
  };
  VX xa(11);
  xa << q0, q_ei0, b_hat0;
  VX xb(7);
  xb << qmul(qconj(q_ei0), q0), b - b_hat0;
  DualResult res;
  const int n = static_cast<int>(std::llround(t_end / dt));
  for (int i = 0; i < n; ++i) {
    const double t = i * dt;
    xa = rk4(fa, t, xa, dt);
    xb = rk4(fb, t, xb, dt);
    const V4 qt_a = qmul(qconj(xa.segment<4>(4) / xa.segment<4>(4).norm()),
                         xa.segment<4>(0) / xa.segment<4>(0).norm());
    res.max_quat_diff =
        std::max(res.max_quat_diff, (qt_a - xb.segment<4>(0) / xb.segment<4>(0).norm()).norm());
    res.max_vec_diff = std::max(res.max_vec_diff, ((b - xa.segment<3>(8)) - xb.segment<3>(4)).norm());
  }
  return res;
}

/// Attitude-only closed loop propagated two ways with fixed (h, h~):
/// (a) error dynamics plus the library filter Q_ED;
/// (b) error dynamics plus Q~' = 1/2 Q~ (x) [w_e - k3 kappa1(h~Q~, 1 - alpha3)].
/// Returns the disagreement in (Q~, Q_e) and w_e.
inline DualResult filter_vs_error_system(const M3& j, const V4& q_e0, const V3& w_e0,
                                         const V4& q_ed0, const Sinusoid& traj,
                                         const ftatt::OutputFeedbackGains& g, int h, int h_tilde,
                                         double t_end, double dt) {
  const ftatt::LogicVar hv(h), ht(h_tilde);
  auto torque = [&](double t, const V4& qe, const V4& qt) {
    const V3 ud = feedforward(j, qe, traj.omega(t), traj.omega_dot(t));
    return V3(ftatt::output_feedback_torque(as_unit(qe), as_unit(qt), hv, ht, g, ud));
  };
  Field fa = [&](double t, const VX& x) {
    const V4 qe = x.segment<4>(0);
    const V3 we = x.segment<3>(4);
    const V4 qed = x.segment<4>(7);
    const V4 qt = qmul(qconj(qed / qed.norm()), qe / qe.norm());
    ftatt::FilterState fs{as_unit(qed), ht};
    const ftatt::Quaternion qed_dot = ftatt::filter_flow_rate(fs, as_unit(qe), g.k3(), g.alpha3());
    VX out(11);
    out.segment<4>(0) = 0.5 * qmul(qe, pure(we));
    out.segment<3>(4) =
        error_omega_rate(j, qe, we, traj.omega(t), traj.omega_dot(t), torque(t, qe, qt));
    out.segment<4>(7) = qed.norm() * qed_dot.coeffs();
    return out;
  };
  Field fb = [&](double t, const VX& x) {
    const V4 qe = x.segment<4>(0);
    const V3 we = x.segment<3>(4);
    const V4 qt = x.segment<4>(7);
    const ftatt::UnitQuaternion hq = ftatt::signed_quat(ht, as_unit(qt));
    VX out(11);
    out.segment<4>(0) = 0.5 * qmul(qe, pure(we));
    out.segment<3>(4) =
        error_omega_rate(j, qe, we, traj.omega(t), traj.omega_dot(t), torque(t, qe, qt));
    out.segment<4>(7) = 0.5 * qmul(qt, pure(we - g.k3() * ftatt::kappa1(hq, 1.0 - g.alpha3())));
    return out;
  };
  VX xa(11);
  xa << q_e0, w_e0, q_ed0;
  VX xb(11);
  xb << q_e0, w_e0, qmul(qconj(q_ed0), q_e0);
  DualResult res;
  const int n = static_cast<int>(std::llround(t_end / dt));
  for (int i = 0; i < n; ++i) {
    const double t = i * dt;
    xa = rk4(fa, t, xa, dt);
    xb = rk4(fb, t, xb, dt);
    const V4 qed = xa.segment<4>(7) / xa.segment<4>(7).norm();
    const V4 qt_a = qmul(qconj(qed), xa.segment<4>(0) / xa.segment<4>(0).norm());
    const V4 qt_b = xb.segment<4>(7) / xb.segment<4>(7).norm();
    res.max_quat_diff = std::max({res.max_quat_diff, (qt_a - qt_b).norm(),
                                  (xa.segment<4>(0) - xb.segment<4>(0)).norm()});
    res.max_vec_diff = std::max(res.max_vec_diff, (xa.segment<3>(4) - xb.segment<3>(4)).norm());
  }
  return res;
}

}  // namespace oracle
