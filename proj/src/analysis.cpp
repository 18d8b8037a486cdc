#include "ftatt/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>

namespace ftatt {

namespace {

Vec3 block(const StateVector& x, int i) { return x.segment<3>(3 * i); }

void set_block(StateVector& x, int i, const Vec3& v) { x.segment<3>(3 * i) = v; }

/// Unit quaternion with vector part q and scalar part h sqrt(1 - |q|^2).
UnitQuaternion from_vector_part(const Vec3& q, LogicVar h) {
  const double n2 = q.squaredNorm();
  const double q0 = h.sign() * std::sqrt(std::max(0.0, 1.0 - n2));
  return normalize(Quaternion(q0, q));
}

/// q0 - h for the quaternion above, without cancellation.
double scalar_gap(const Vec3& q, LogicVar h) {
  const double n2 = q.squaredNorm();
  return -h.sign() * n2 / (1.0 + std::sqrt(std::max(0.0, 1.0 - n2)));
}

/// q / |q|^a on plain vectors (zero at q = 0).
Vec3 kappa0_vec(const Vec3& q, double a) {
  const double n = q.norm();
  if (n < kKappaSingularTolerance) {
    return Vec3::Zero();
  }
  return q / std::pow(n, a);
}

/// 0.5 [E(q) - h I] w with q0 - h evaluated stably.
Vec3 e_minus_h(const Vec3& q, LogicVar h, const Vec3& w) {
  return 0.5 * (q.cross(w) + scalar_gap(q, h) * w);
}

Vec3 vec_part_of_rate(const UnitQuaternion& q, const Vec3& w) {
  return kinematics_rate(q, w).vec;
}

}  // namespace

// ---------------------------------------------------------------------------

void DilationWeights::validate() const {
  if (r.empty()) {
    throw std::invalid_argument("dilation weights: empty weight vector");
  }
  for (double ri : r) {
    if (!(ri > 0.0)) {
      throw std::invalid_argument("dilation weights must be positive");
    }
  }
  if (!(k < 0.0)) {
    throw std::invalid_argument("homogeneity degree k must be negative");
  }
}

StateVector DilationWeights::dilate(const StateVector& x, double eps) const {
  if (x.size() != static_cast<Eigen::Index>(3 * r.size())) {
    throw std::invalid_argument("dilate: state dimension does not match the weights");
  }
  StateVector y = x;
  for (std::size_t i = 0; i < r.size(); ++i) {
    y.segment<3>(3 * static_cast<Eigen::Index>(i)) *= std::pow(eps, r[i]);
  }
  return y;
}

DecomposedSystem full_state_system(const FullStateGains& g, const InertiaMatrix& j, LogicVar h,
                                   const DesiredTrajectory& traj, double k) {
  const double a1 = g.alpha1();
  const double a2 = g.alpha2();
  DecomposedSystem s;
  s.name = "full-state";
  s.blocks = {"q_e", "w_e"};
  s.weights = {{-2.0 * k / (1.0 - a1), -(1.0 + a1) * k / (1.0 - a1)}, k};
  s.stated_weights = {{-2.0 * k / (1.0 - a2), -(1.0 + a2) * k / (1.0 - a2)}, k};

  s.reduced = [=](const StateVector& x, double) {
    const Vec3 q = block(x, 0);
    const Vec3 w = block(x, 1);
    StateVector f(6);
    set_block(f, 0, 0.5 * h.sign() * w);
    set_block(f, 1,
              -(j.inverse() * (g.k1() * h.sign() * kappa0_vec(q, 1.0 - a1) + g.k2() * sgn_pow(w, a2))));
    return f;
  };
  s.perturbation = [=](const StateVector& x, double t) {
    const Vec3 q = block(x, 0);
    const Vec3 w = block(x, 1);
    const UnitQuaternion qe = from_vector_part(q, h);
    const Vec3 wd = rotation_matrix(qe) * traj.omega(t);
    StateVector f(6);
    set_block(f, 0, e_minus_h(q, h, w));
    set_block(f, 1,
              j.inverse() * (xi_matrix(j, w, wd) * w -
                             g.k1() * kappa_bar(signed_quat(h, qe), 1.0 - a1)));
    return f;
  };
  s.full = [=](const StateVector& x, double t) {
    const Vec3 w = block(x, 1);
    const UnitQuaternion qe = from_vector_part(block(x, 0), h);
    const Vec3 wd = rotation_matrix(qe) * traj.omega(t);
    StateVector f(6);
    set_block(f, 0, vec_part_of_rate(qe, w));
    set_block(f, 1,
              j.inverse() * (xi_matrix(j, w, wd) * w -
                             g.k1() * kappa1(signed_quat(h, qe), 1.0 - a1) -
                             g.k2() * sat_pow(w, a2)));
    return f;
  };
  return s;
}

DecomposedSystem observer_system(const ObserverGains& g, LogicVar ht, double k) {
  const double b1 = g.beta1();
  const double b2 = g.beta2();
  DecomposedSystem s;
  s.name = "bias observer";
  s.blocks = {"q~", "b~"};
  s.weights = {{-k / (1.0 - b1), -b1 * k / (1.0 - b1)}, k};
  s.stated_weights = s.weights;

  s.reduced = [=](const StateVector& x, double) {
    const Vec3 q = block(x, 0);
    const Vec3 b = block(x, 1);
    StateVector f(6);
    set_block(f, 0, -0.5 * ht.sign() * b - 0.5 * g.mu1() * kappa0_vec(q, 1.0 - b1));
    set_block(f, 1, g.mu2() * ht.sign() * kappa0_vec(q, 1.0 - b2));
    return f;
  };
  s.perturbation = [=](const StateVector& x, double) {
    const Vec3 q = block(x, 0);
    const Vec3 b = block(x, 1);
    const UnitQuaternion hq = signed_quat(ht, from_vector_part(q, ht));
    StateVector f(6);
    set_block(f, 0,
              -e_minus_h(q, ht, b) -
                  0.5 * g.mu1() *
                      (scalar_gap(q, ht) * kappa1(hq, 1.0 - b1) +
                       ht.sign() * kappa_bar(hq, 1.0 - b1)));
    set_block(f, 1, g.mu2() * kappa_bar(hq, 1.0 - b2));
    return f;
  };
  s.full = [=](const StateVector& x, double) {
    const UnitQuaternion qt = from_vector_part(block(x, 0), ht);
    const Vec3 b = block(x, 1);
    const UnitQuaternion hq = signed_quat(ht, qt);
    StateVector f(6);
    set_block(f, 0, vec_part_of_rate(qt, -b - g.mu1() * kappa1(hq, 1.0 - b1)));
    set_block(f, 1, g.mu2() * kappa1(hq, 1.0 - b2));
    return f;
  };
  return s;
}

DecomposedSystem output_feedback_system(const OutputFeedbackGains& g, const InertiaMatrix& j,
                                        LogicVar h, LogicVar ht, const DesiredTrajectory& traj,
                                        double k) {
  const double a1 = g.alpha1();
  const double a3 = g.alpha3();
  DecomposedSystem s;
  s.name = "attitude-only";
  s.blocks = {"q~", "q_e", "w_e"};
  const double rq = -k / (1.0 - a3);
  const double rw = -a3 * k / (1.0 - a3);
  s.weights = {{rq, rq, rw}, k};
  s.stated_weights = {{rw, rq, rq}, k};

  s.reduced = [=](const StateVector& x, double) {
    const Vec3 qt = block(x, 0);
    const Vec3 qe = block(x, 1);
    const Vec3 w = block(x, 2);
    StateVector f(9);
    set_block(f, 0, 0.5 * ht.sign() * w - 0.5 * g.k3() * kappa0_vec(qt, 1.0 - a3));
    set_block(f, 1, 0.5 * h.sign() * w);
    set_block(f, 2,
              -(j.inverse() * (g.k1() * h.sign() * kappa0_vec(qe, 1.0 - a1) +
                               g.k2() * ht.sign() * kappa0_vec(qt, 1.0 - a1))));
    return f;
  };
  s.perturbation = [=](const StateVector& x, double t) {
    const Vec3 qt = block(x, 0);
    const Vec3 qe = block(x, 1);
    const Vec3 w = block(x, 2);
    const UnitQuaternion hqt = signed_quat(ht, from_vector_part(qt, ht));
    const UnitQuaternion qe_u = from_vector_part(qe, h);
    const Vec3 wd = rotation_matrix(qe_u) * traj.omega(t);
    StateVector f(9);
    set_block(f, 0,
              e_minus_h(qt, ht, w) -
                  0.5 * g.k3() *
                      (scalar_gap(qt, ht) * kappa1(hqt, 1.0 - a3) +
                       ht.sign() * kappa_bar(hqt, 1.0 - a3)));
    set_block(f, 1, e_minus_h(qe, h, w));
    set_block(f, 2,
              j.inverse() * (xi_matrix(j, w, wd) * w -
                             (g.k1() * kappa_bar(signed_quat(h, qe_u), 1.0 - a1) +
                              g.k2() * kappa_bar(hqt, 1.0 - a1))));
    return f;
  };
  s.full = [=](const StateVector& x, double t) {
    const UnitQuaternion qt = from_vector_part(block(x, 0), ht);
    const UnitQuaternion qe = from_vector_part(block(x, 1), h);
    const Vec3 w = block(x, 2);
    const Vec3 wd = rotation_matrix(qe) * traj.omega(t);
    const UnitQuaternion hqt = signed_quat(ht, qt);
    StateVector f(9);
    set_block(f, 0, vec_part_of_rate(qt, w - g.k3() * kappa1(hqt, 1.0 - a3)));
    set_block(f, 1, vec_part_of_rate(qe, w));
    set_block(f, 2,
              j.inverse() * (xi_matrix(j, w, wd) * w -
                             g.k1() * kappa1(signed_quat(h, qe), 1.0 - a1) -
                             g.k2() * kappa1(hqt, 1.0 - a1)));
    return f;
  };
  return s;
}

double homogeneity_check(const VectorField& field, const DilationWeights& weights,
                         const std::vector<StateVector>& samples,
                         const std::vector<double>& eps_list, double t) {
  weights.validate();
  double worst = 0.0;
  for (const StateVector& x : samples) {
    const StateVector fx = field(x, t);
    for (double eps : eps_list) {
      const StateVector fd = field(weights.dilate(x, eps), t);
      for (std::size_t i = 0; i < weights.r.size(); ++i) {
        const auto ii = static_cast<int>(i);
        const Vec3 scaled = std::pow(eps, weights.r[i] + weights.k) * block(fx, ii);
        const double dev = (block(fd, ii) - scaled).norm() / (scaled.norm() + 1e-300);
        worst = std::max(worst, dev);
      }
    }
  }
  return worst;
}

bool PerturbationTable::monotone(std::size_t b) const {
  for (const auto& seq : ratios.at(b)) {
    for (std::size_t e = 1; e < seq.size(); ++e) {
      const bool both_zero = seq[e] == 0.0 && seq[e - 1] == 0.0;
      if (!both_zero && !(seq[e] < seq[e - 1])) {
        return false;
      }
    }
  }
  return true;
}

double PerturbationTable::min_decrease_factor(std::size_t b) const {
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& seq : ratios.at(b)) {
    for (std::size_t e = 1; e < seq.size(); ++e) {
      if (seq[e] == 0.0 && seq[e - 1] == 0.0) {
        continue;
      }
      worst = std::min(worst, seq[e - 1] / seq[e]);
    }
  }
  return worst;
}

double PerturbationTable::final_max(std::size_t b) const {
  double m = 0.0;
  for (const auto& seq : ratios.at(b)) {
    m = std::max(m, seq.back());
  }
  return m;
}

PerturbationTable perturbation_vanishing_check(const VectorField& fhat,
                                               const DilationWeights& weights,
                                               const std::vector<StateVector>& samples,
                                               const std::vector<double>& eps_list,
                                               const std::vector<double>& t_grid) {
  weights.validate();
  if (t_grid.empty()) {
    throw std::invalid_argument("perturbation check needs at least one time sample");
  }
  PerturbationTable table;
  table.eps = eps_list;
  const std::size_t nb = weights.r.size();
  table.ratios.assign(nb, std::vector<std::vector<double>>(
                              samples.size(), std::vector<double>(eps_list.size(), 0.0)));
  for (std::size_t s = 0; s < samples.size(); ++s) {
    for (std::size_t e = 0; e < eps_list.size(); ++e) {
      const StateVector xd = weights.dilate(samples[s], eps_list[e]);
      for (double t : t_grid) {
        const StateVector f = fhat(xd, t);
        for (std::size_t i = 0; i < nb; ++i) {
          const double r =
              block(f, static_cast<int>(i)).norm() / std::pow(eps_list[e], weights.r[i] + weights.k);
          table.ratios[i][s][e] = std::max(table.ratios[i][s][e], r);
        }
      }
    }
  }
  return table;
}

std::vector<double> trajectory_time_grid(const DesiredTrajectory& traj, std::size_t n) {
  if (traj.frequency() == 0.0 || traj.amplitude().isZero() || n == 0) {
    return {0.0};
  }
  const double period = 2.0 * std::acos(-1.0) / std::abs(traj.frequency());
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) {
    grid[i] = period * static_cast<double>(i) / static_cast<double>(n);
  }
  return grid;
}

std::vector<StateVector> sphere_samples(int dim, std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<StateVector> out;
  out.reserve(n);
  while (out.size() < n) {
    StateVector x(dim);
    for (int i = 0; i < dim; ++i) {
      x[i] = g(rng);
    }
    const double norm = x.norm();
    if (norm > 1e-8) {
      out.push_back(x / norm);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

double tracking_error(const TraceRow& row) {
  return std::max(row.q_e.vec().norm(), row.omega_e.norm());
}

ConvergenceReport convergence_metrics(const SimTrace& trace, double err_threshold) {
  if (trace.rows.empty()) {
    throw std::invalid_argument("convergence_metrics: empty trace");
  }
  ConvergenceReport rep;
  rep.threshold = err_threshold;
  rep.jump_count = trace.events.size();
  std::ptrdiff_t last_above = -1;
  for (std::size_t i = 0; i < trace.rows.size(); ++i) {
    if (tracking_error(trace.rows[i]) > err_threshold) {
      last_above = static_cast<std::ptrdiff_t>(i);
    }
    rep.max_torque_inf_norm =
        std::max(rep.max_torque_inf_norm, trace.rows[i].u_cmd.cwiseAbs().maxCoeff());
  }
  const auto n = static_cast<std::ptrdiff_t>(trace.rows.size());
  rep.converged = last_above < n - 1;
  rep.settling_time = rep.converged ? trace.rows[static_cast<std::size_t>(last_above + 1)].t
                                    : std::numeric_limits<double>::quiet_NaN();

  const double t_end = trace.rows.back().t;
  const double t_start = trace.rows.front().t;
  const double window_start = t_end - 0.2 * (t_end - t_start);
  double sum = 0.0;
  std::size_t count = 0;
  for (const TraceRow& r : trace.rows) {
    if (r.t >= window_start - 1e-9) {
      const double e = tracking_error(r);
      sum += e * e;
      ++count;
    }
  }
  rep.steady_state_error = std::sqrt(sum / static_cast<double>(count));
  return rep;
}

std::string to_string(LyapunovChannel c) {
  switch (c) {
    case LyapunovChannel::V1:
      return "V1";
    case LyapunovChannel::V2Stated:
      return "V2 (stated)";
    case LyapunovChannel::V2Consistent:
      return "V2 (consistent)";
    case LyapunovChannel::V3Stated:
      return "V3 (stated)";
    case LyapunovChannel::V3Consistent:
      return "V3 (consistent)";
  }
  return "?";
}

double lyapunov_value(const LyapunovValues& v, LyapunovChannel c) {
  switch (c) {
    case LyapunovChannel::V1:
      return v.v1;
    case LyapunovChannel::V2Stated:
      return v.v2_stated;
    case LyapunovChannel::V2Consistent:
      return v.v2_consistent;
    case LyapunovChannel::V3Stated:
      return v.v3_stated;
    case LyapunovChannel::V3Consistent:
      return v.v3_consistent;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

LyapunovChannel primary_channel(ScenarioKind kind, PotentialForm form) {
  const bool stated = form == PotentialForm::Stated;
  switch (kind) {
    case ScenarioKind::FullState:
      return LyapunovChannel::V1;
    case ScenarioKind::BiasedGyro:
      return stated ? LyapunovChannel::V2Stated : LyapunovChannel::V2Consistent;
    case ScenarioKind::AttitudeOnly:
      return stated ? LyapunovChannel::V3Stated : LyapunovChannel::V3Consistent;
  }
  return LyapunovChannel::V1;
}

double closed_form_rate(const TraceRow& row, const ScenarioConfig& cfg, LyapunovChannel c) {
  const LogicVar ht(row.h_tilde);
  switch (c) {
    case LyapunovChannel::V1:
      if (cfg.sim.kind == ScenarioKind::AttitudeOnly) {
        const OutputFeedbackGains g = cfg.output_gains();
        return -g.k2() * row.omega_e.dot(kappa1(signed_quat(ht, row.q_tilde), 1.0 - g.alpha1()));
      }
      return v1_rate(row.omega_e, cfg.full_state_gains());
    case LyapunovChannel::V2Stated:
      return v2_rate_claimed(row.q_tilde, ht, cfg.observer_gains());
    case LyapunovChannel::V2Consistent:
      return v2_rate_consistent(row.q_tilde, ht, cfg.observer_gains());
    case LyapunovChannel::V3Stated:
      return v3_rate_claimed(row.q_tilde, ht, cfg.output_gains());
    case LyapunovChannel::V3Consistent:
      return v3_rate_consistent(row.q_tilde, ht, cfg.output_gains());
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double jump_decrease_margin(const ScenarioConfig& cfg, LyapunovChannel c) {
  const double delta = cfg.controller.delta;
  switch (c) {
    case LyapunovChannel::V1:
      if (cfg.sim.kind == ScenarioKind::AttitudeOnly) {
        const OutputFeedbackGains g = cfg.output_gains();
        return jump_margin(g.k1(), g.alpha1(), delta);
      }
      return jump_margin(cfg.controller.k1, cfg.controller.alpha1, delta);
    case LyapunovChannel::V2Stated:
    case LyapunovChannel::V2Consistent: {
      const ObserverGains g = cfg.observer_gains();
      const auto form =
          c == LyapunovChannel::V2Stated ? PotentialForm::Stated : PotentialForm::Consistent;
      return jump_margin(g.mu2(), v2_power(g, form), delta);
    }
    case LyapunovChannel::V3Stated:
    case LyapunovChannel::V3Consistent: {
      const OutputFeedbackGains g = cfg.output_gains();
      const auto form =
          c == LyapunovChannel::V3Stated ? PotentialForm::Stated : PotentialForm::Consistent;
      return std::min(jump_margin(g.k1(), g.alpha1(), delta),
                      jump_margin(g.k2(), v3_power(g, form), delta));
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

namespace {

std::set<std::size_t> event_steps(const SimTrace& trace) {
  std::set<std::size_t> s;
  for (const JumpEvent& e : trace.events) {
    s.insert(e.step);
  }
  return s;
}

bool relevant(const JumpEvent& e, LyapunovChannel c) {
  switch (c) {
    case LyapunovChannel::V1:
      return e.h_pre != e.h_post;
    case LyapunovChannel::V2Stated:
    case LyapunovChannel::V2Consistent:
      return e.which == JumpVariable::HTilde;
    case LyapunovChannel::V3Stated:
    case LyapunovChannel::V3Consistent:
      return e.which == JumpVariable::Joint;
  }
  return false;
}

}  // namespace

FlowAudit audit_flow(const SimTrace& trace, LyapunovChannel c, std::size_t skip_steps) {
  FlowAudit a;
  const std::set<std::size_t> jumps = event_steps(trace);
  for (std::size_t i = 1 + skip_steps; i < trace.rows.size(); ++i) {
    if (jumps.count(i) != 0) {
      continue;
    }
    const double v0 = lyapunov_value(trace.rows[i - 1].lyap, c);
    const double v1 = lyapunov_value(trace.rows[i].lyap, c);
    if (std::isnan(v0) || std::isnan(v1)) {
      throw std::invalid_argument("audit_flow: " + to_string(c) +
                                  " is not defined for this scenario kind");
    }
    const double rel = (v1 - v0) / (1.0 + v0);
    ++a.steps_checked;
    if (rel > a.worst_relative_increase) {
      a.worst_relative_increase = rel;
      a.t_worst = trace.rows[i].t;
    }
  }
  return a;
}

JumpAudit audit_jumps(const SimTrace& trace, const ScenarioConfig& cfg, LyapunovChannel c) {
  JumpAudit a;
  a.sigma = jump_decrease_margin(cfg, c);
  for (const JumpEvent& e : trace.events) {
    if (!relevant(e, c)) {
      continue;
    }
    ++a.jumps;
    const double dv = lyapunov_value(e.v_post, c) - lyapunov_value(e.v_pre, c);
    a.worst_margin = std::max(a.worst_margin, dv + a.sigma);
  }
  return a;
}

DerivativeAudit audit_derivative(const SimTrace& trace, const ScenarioConfig& cfg,
                                 LyapunovChannel c) {
  DerivativeAudit a;
  const std::set<std::size_t> jumps = event_steps(trace);
  const double dt = trace.dt;
  const auto& rows = trace.rows;
  for (std::size_t i = 2; i + 2 < rows.size(); ++i) {
    // a jump at step s changes V between rows s-1 and s
    const auto it = jumps.lower_bound(i - 1);
    if (it != jumps.end() && *it <= i + 2) {
      continue;
    }
    const auto v = [&](std::size_t n) { return lyapunov_value(rows[n].lyap, c); };
    const double fd = (v(i - 2) - 8.0 * v(i - 1) + 8.0 * v(i + 1) - v(i + 2)) / (12.0 * dt);
    const double cf = closed_form_rate(rows[i], cfg, c);
    const double err = std::abs(fd - cf);
    ++a.points;
    if (err > a.max_abs_error) {
      a.max_abs_error = err;
      a.t_worst = rows[i].t;
    }
    a.max_abs_rate = std::max(a.max_abs_rate, std::abs(cf));
  }
  return a;
}

double full_state_torque_bound(const ScenarioConfig& cfg) {
  const DesiredTrajectory traj = cfg.trajectory();
  const double w1 = traj.omega_bound();
  return cfg.controller.k1 + cfg.controller.k2 +
         (w1 * w1 + traj.omega_dot_bound()) * cfg.inertia_matrix().norm();
}

bool BoundReport::pass() const {
  for (const TorqueBound& t : torque) {
    if (!t.pass()) return false;
  }
  for (const JumpBound& j : jumps) {
    if (j.proven && !j.pass()) return false;
  }
  return !gronwall_checked || gronwall_margin <= 1e-9;
}

BoundReport bound_checks(const SimTrace& trace, const ScenarioConfig& cfg) {
  if (trace.rows.empty()) {
    throw std::invalid_argument("bound_checks: empty trace");
  }
  BoundReport rep;
  const DesiredTrajectory traj = cfg.trajectory();
  const double w1 = traj.omega_bound();
  const double w2 = traj.omega_dot_bound();
  const double jn = cfg.inertia_matrix().norm();
  const double k1 = cfg.controller.k1;
  const double k2 = cfg.controller.k2;

  double max_comp = 0.0;
  double max_norm = 0.0;
  for (const TraceRow& r : trace.rows) {
    max_comp = std::max(max_comp, r.u_cmd.cwiseAbs().maxCoeff());
    max_norm = std::max(max_norm, r.u_cmd.norm());
  }
  if (cfg.sim.kind == ScenarioKind::AttitudeOnly) {
    rep.torque.push_back({"|u| < k1 + k2 + (wbar1 + wbar2)|J| (as stated)",
                          k1 + k2 + (w1 + w2) * jn, max_norm});
    rep.torque.push_back({"|u| < k1 + k2 + (wbar1^2 + wbar2)|J|",
                          k1 + k2 + (w1 * w1 + w2) * jn, max_norm});
  } else {
    rep.torque.push_back({"|u_i| < k1 + k2 + (wbar1^2 + wbar2)|J|",
                          full_state_torque_bound(cfg), max_comp});
  }
  if (cfg.saturate) {
    rep.torque.push_back({"|u_i| <= u_max (saturation limit)", cfg.u_max + 1e-12, max_comp});
  }

  // Lyapunov values before any jump at t = 0.
  const bool jump_at_start = !trace.events.empty() && trace.events.front().step == 0;
  const LyapunovValues v0 = jump_at_start ? trace.events.front().v_pre : trace.rows.front().lyap;
  auto add_jump_bound = [&](const std::string& name, LyapunovChannel c, bool proven) {
    JumpBound b;
    b.name = name;
    b.proven = proven;
    b.v0 = lyapunov_value(v0, c);
    b.sigma = jump_decrease_margin(cfg, c);
    b.observed = static_cast<std::size_t>(std::count_if(
        trace.events.begin(), trace.events.end(),
        [&](const JumpEvent& e) { return relevant(e, c); }));
    rep.jumps.push_back(b);
  };
  switch (cfg.sim.kind) {
    case ScenarioKind::FullState:
      add_jump_bound("h jumps <= V1(0)/sigma1", LyapunovChannel::V1, true);
      break;
    case ScenarioKind::BiasedGyro:
      add_jump_bound("h~ jumps <= V2(0)/sigma2 (stated V2)", LyapunovChannel::V2Stated, false);
      add_jump_bound("h~ jumps <= V2(0)/sigma2 (consistent V2)", LyapunovChannel::V2Consistent,
                     true);
      add_jump_bound("h jumps <= V1(0)/sigma1 (certainty equivalence)", LyapunovChannel::V1,
                     false);
      break;
    case ScenarioKind::AttitudeOnly:
      add_jump_bound("joint jumps <= V3(0)/sigma3 (stated V3)", LyapunovChannel::V3Stated, false);
      add_jump_bound("joint jumps <= V3(0)/sigma3 (consistent V3)",
                     LyapunovChannel::V3Consistent, true);
      break;
  }

  if (cfg.sim.kind != ScenarioKind::AttitudeOnly) {
    const double c0 = 2.0 * k2 / cfg.inertia_matrix().min_eigenvalue();
    const double c1 = v0.v1 + 3.0 * k2 / c0;
    const double t0 = trace.rows.front().t;
    rep.gronwall_checked = true;
    rep.gronwall_margin = -std::numeric_limits<double>::infinity();
    for (const TraceRow& r : trace.rows) {
      const double bound = c1 * std::exp(c0 * (r.t - t0)) - 3.0 * k2 / c0;
      rep.gronwall_margin = std::max(rep.gronwall_margin, r.lyap.v1 - bound);
    }
  }
  return rep;
}

Eigen::Matrix<double, 7, 1> terminal_error_state(const SimTrace& trace) {
  if (trace.rows.empty()) {
    throw std::invalid_argument("terminal_error_state: empty trace");
  }
  const TraceRow& r = trace.rows.back();
  const UnitQuaternion q = r.q_e.scalar() < 0.0 ? r.q_e.negated() : r.q_e;
  Eigen::Matrix<double, 7, 1> x;
  x << q.quat().coeffs(), r.omega_e;
  return x;
}

OrderStudy step_halving_study(const ScenarioConfig& cfg, const std::vector<double>& dts) {
  if (dts.size() < 2) {
    throw std::invalid_argument("step_halving_study: need at least two step sizes");
  }
  for (std::size_t i = 1; i < dts.size(); ++i) {
    if (std::abs(dts[i - 1] / dts[i] - 2.0) > 1e-12) {
      throw std::invalid_argument("step_halving_study: step sizes must halve");
    }
  }
  std::vector<double> all = dts;
  all.push_back(dts.back() / 2.0);
  std::vector<Eigen::Matrix<double, 7, 1>> terminal;
  for (double dt : all) {
    ScenarioConfig c = cfg;
    c.sim.dt = dt;
    const double n = c.sim.t_final / dt;
    if (std::abs(n - std::round(n)) > 1e-9) {
      throw std::invalid_argument("step_halving_study: t_final must be a multiple of every dt");
    }
    terminal.push_back(terminal_error_state(run_scenario(c)));
  }
  OrderStudy s;
  s.dts = dts;
  for (std::size_t i = 0; i < dts.size(); ++i) {
    s.differences.push_back((terminal[i] - terminal[i + 1]).norm());
  }
  for (std::size_t i = 0; i + 1 < s.differences.size(); ++i) {
    s.orders.push_back(std::log2(s.differences[i] / s.differences[i + 1]));
  }
  return s;
}

}  // namespace ftatt
