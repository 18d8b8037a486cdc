#include "ftatt/hybrid_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ftatt/lyapunov.hpp"

namespace ftatt {

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::FullState:
      return "full_state";
    case ScenarioKind::BiasedGyro:
      return "biased_gyro";
    case ScenarioKind::AttitudeOnly:
      return "attitude_only";
  }
  return "?";
}

ScenarioKind parse_scenario_kind(const std::string& name) {
  if (name == "full_state") return ScenarioKind::FullState;
  if (name == "biased_gyro") return ScenarioKind::BiasedGyro;
  if (name == "attitude_only") return ScenarioKind::AttitudeOnly;
  throw std::invalid_argument("unknown scenario kind '" + name +
                              "' (expected full_state, biased_gyro or attitude_only)");
}

std::string to_string(FeedbackMode mode) {
  return mode == FeedbackMode::Sampled ? "sampled" : "continuous";
}

FeedbackMode parse_feedback_mode(const std::string& name) {
  if (name == "sampled") return FeedbackMode::Sampled;
  if (name == "continuous") return FeedbackMode::Continuous;
  throw std::invalid_argument("unknown feedback mode '" + name +
                              "' (expected sampled or continuous)");
}

std::string to_string(JumpVariable v) {
  switch (v) {
    case JumpVariable::H:
      return "h";
    case JumpVariable::HTilde:
      return "h_tilde";
    case JumpVariable::Joint:
      return "joint";
  }
  return "?";
}

JumpVariable parse_jump_variable(const std::string& name) {
  if (name == "h") return JumpVariable::H;
  if (name == "h_tilde") return JumpVariable::HTilde;
  if (name == "joint") return JumpVariable::Joint;
  throw std::invalid_argument("unknown jump variable '" + name + "'");
}

void SimConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("sim.dt_s must be positive");
  }
  if (!(t_final > 0.0) || !std::isfinite(t_final)) {
    throw std::invalid_argument("sim.t_final_s must be positive");
  }
  if (max_consecutive_jumps < 1) {
    throw std::invalid_argument("sim.max_consecutive_jumps must be at least 1");
  }
}

std::size_t SimConfig::steps() const {
  return static_cast<std::size_t>(std::llround(t_final / dt));
}

FullStateGains ScenarioConfig::full_state_gains() const {
  return {controller.k1, controller.k2, controller.alpha1, controller.delta};
}

ObserverGains ScenarioConfig::observer_gains() const {
  return {observer.mu1, observer.mu2, observer.beta1, controller.delta};
}

OutputFeedbackGains ScenarioConfig::output_gains() const {
  return {controller.k1, controller.k2, controller.k3, controller.alpha3, controller.delta};
}

UnitQuaternion ScenarioConfig::initial_q_ed() const {
  return q_ed0.value_or(error_quaternion(q_d0, q0));
}

void ScenarioConfig::validate() const {
  sim.validate();
  InertiaMatrix j(inertia);
  (void)j;
  if (!omega0.allFinite() || !bias0.allFinite() || !observer.b_hat0.allFinite()) {
    throw std::invalid_argument("initial vectors must be finite");
  }
  DesiredTrajectory traj = trajectory();
  (void)traj;
  LogicVar h(controller.h0);
  LogicVar ht(controller.h_tilde0);
  (void)h;
  (void)ht;
  switch (sim.kind) {
    case ScenarioKind::FullState:
      (void)full_state_gains();
      break;
    case ScenarioKind::BiasedGyro:
      (void)full_state_gains();
      (void)observer_gains();
      break;
    case ScenarioKind::AttitudeOnly:
      (void)output_gains();
      break;
  }
  noise.validate();
  if (saturate && !(u_max > 0.0)) {
    throw std::invalid_argument("u_max_n_m must be positive when saturation is enabled");
  }
  if (!std::isfinite(disturbance.amplitude_n_m) || !std::isfinite(disturbance.frequency_rad_s)) {
    throw std::invalid_argument("disturbance parameters must be finite");
  }
}

std::size_t SimTrace::jump_count(std::optional<JumpVariable> which) const {
  if (!which) {
    return events.size();
  }
  return static_cast<std::size_t>(std::count_if(
      events.begin(), events.end(), [&](const JumpEvent& e) { return e.which == *which; }));
}

JumpResolution resolve_jumps(ScenarioKind kind, const LogicState& logic, const UnitQuaternion& q_e,
                             const UnitQuaternion& q_tilde, double delta, int max_jumps,
                             std::size_t step, double t) {
  JumpResolution out{logic, {}};
  auto record = [&](JumpVariable which, const LogicState& pre, const LogicState& post) {
    JumpEvent e;
    e.t = t;
    e.step = step;
    e.which = which;
    e.h_pre = pre.h.value();
    e.h_post = post.h.value();
    e.h_tilde_pre = pre.h_tilde.value();
    e.h_tilde_post = post.h_tilde.value();
    out.events.push_back(e);
  };
  for (;;) {
    LogicState& s = out.logic;
    const bool h_in = in_jump_set(s.h, q_e.scalar(), delta);
    const bool ht_in =
        kind != ScenarioKind::FullState && in_jump_set(s.h_tilde, q_tilde.scalar(), delta);
    if (!h_in && !ht_in) {
      break;
    }
    if (static_cast<int>(out.events.size()) >= max_jumps) {
      throw SimulationError("more than " + std::to_string(max_jumps) +
                                " consecutive jumps (Zeno-like behaviour; check delta)",
                            step);
    }
    const LogicState pre = s;
    if (kind == ScenarioKind::AttitudeOnly) {
      const JointLogic j = joint_jump(q_e, q_tilde, s.h, s.h_tilde, delta);
      s = {j.h, j.h_tilde};
      record(JumpVariable::Joint, pre, s);
    } else if (h_in) {
      s.h = hysteresis_update(s.h, q_e.scalar(), delta).h;
      record(JumpVariable::H, pre, s);
    } else {
      s.h_tilde = hysteresis_update(s.h_tilde, q_tilde.scalar(), delta).h;
      record(JumpVariable::HTilde, pre, s);
    }
  }
  return out;
}

namespace {

/// Integrated continuous state. Quaternions are carried raw (not
/// renormalized inside a step); `aux` is Q_EI or Q_ED depending on the kind.
struct FlowVec {
  Quaternion q;
  Vec3 omega{Vec3::Zero()};
  Quaternion aux;
  Vec3 b_hat{Vec3::Zero()};

  friend FlowVec operator+(const FlowVec& a, const FlowVec& b) {
    return {a.q + b.q, a.omega + b.omega, a.aux + b.aux, a.b_hat + b.b_hat};
  }
  friend FlowVec operator*(double s, const FlowVec& a) {
    return {s * a.q, s * a.omega, s * a.aux, s * a.b_hat};
  }
  bool finite() const {
    return std::isfinite(q.scalar) && q.vec.allFinite() && omega.allFinite() &&
           std::isfinite(aux.scalar) && aux.vec.allFinite() && b_hat.allFinite();
  }
};

// Rate of a raw quaternion from the rate computed at its normalized value.
// Kinematics are linear in Q, so scaling by |Q| gives the raw-state rate.
Quaternion rescale(const Quaternion& unit_rate, const Quaternion& raw) {
  return raw.norm() * unit_rate;
}

class Simulator {
 public:
  explicit Simulator(const ScenarioConfig& cfg)
      : cfg_(cfg),
        j_(cfg.inertia_matrix()),
        traj_(cfg.trajectory()),
        noise_(cfg.noise),
        kind_(cfg.sim.kind),
        full_(kind_ == ScenarioKind::AttitudeOnly ? std::nullopt
                                                  : std::optional(cfg.full_state_gains())),
        obs_(kind_ == ScenarioKind::BiasedGyro ? std::optional(cfg.observer_gains())
                                               : std::nullopt),
        out_(kind_ == ScenarioKind::AttitudeOnly ? std::optional(cfg.output_gains())
                                                 : std::nullopt) {}

  SimTrace run();

 private:
  double delta() const { return cfg_.controller.delta; }

  Measurements measure(const UnitQuaternion& q, const Vec3& omega, const StepNoise& n) const {
    return {apply_attitude_noise(q, n.attitude), omega + bias_ + n.gyro};
  }

  /// Measured auxiliary error quaternion: observer Q~ or filter Q~.
  UnitQuaternion measured_q_tilde(double t, const Measurements& m,
                                  const UnitQuaternion& aux) const {
    switch (kind_) {
      case ScenarioKind::BiasedGyro:
        return conjugate(aux) * m.q;
      case ScenarioKind::AttitudeOnly:
        return conjugate(aux) * error_quaternion(traj_.attitude(t), m.q);
      case ScenarioKind::FullState:
        break;
    }
    return UnitQuaternion::identity();
  }

  Vec3 control(double t, const Measurements& m, const UnitQuaternion& aux, const Vec3& b_hat,
               const LogicState& logic) const {
    const UnitQuaternion q_e = error_quaternion(traj_.attitude(t), m.q);
    const Vec3 wd = traj_.omega(t);
    const Vec3 u_d = feedforward_torque(j_, q_e, wd, traj_.omega_dot(t));
    switch (kind_) {
      case ScenarioKind::FullState:
        return full_state_torque(q_e, m.omega - rotation_matrix(q_e) * wd, logic.h, *full_, u_d);
      case ScenarioKind::BiasedGyro:
        return certainty_equivalence_torque(q_e, m.omega - b_hat - rotation_matrix(q_e) * wd,
                                            logic.h, *full_, u_d);
      case ScenarioKind::AttitudeOnly: {
        const UnitQuaternion q_tilde = filter_error({aux, logic.h_tilde}, q_e);
        return output_feedback_torque(q_e, q_tilde, logic.h, logic.h_tilde, *out_, u_d);
      }
    }
    return Vec3::Zero();
  }

  Vec3 apply_limits(const Vec3& u) const {
    return cfg_.saturate ? saturate_torque(u, cfg_.u_max) : u;
  }

  LyapunovValues lyapunov(double t, const UnitQuaternion& q, const Vec3& omega,
                          const UnitQuaternion& aux, const Vec3& b_hat,
                          const LogicState& logic) const;

  FlowVec flow(double t, const FlowVec& x, const StepNoise& n, const LogicState& logic,
               const Vec3& held_u) const;

  const ScenarioConfig& cfg_;
  InertiaMatrix j_;
  DesiredTrajectory traj_;
  NoiseSource noise_;
  ScenarioKind kind_;
  std::optional<FullStateGains> full_;
  std::optional<ObserverGains> obs_;
  std::optional<OutputFeedbackGains> out_;
  Vec3 bias_{Vec3::Zero()};
};

LyapunovValues Simulator::lyapunov(double t, const UnitQuaternion& q, const Vec3& omega,
                                   const UnitQuaternion& aux, const Vec3& b_hat,
                                   const LogicState& logic) const {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  LyapunovValues v{nan, nan, nan, nan, nan};
  const UnitQuaternion q_e = error_quaternion(traj_.attitude(t), q);
  const Vec3 omega_e = error_velocity(omega, q_e, traj_.omega(t)).omega_e;
  if (kind_ == ScenarioKind::AttitudeOnly) {
    const OutputFeedbackGains& g = *out_;
    const UnitQuaternion q_tilde = conjugate(aux) * q_e;
    v.v1 = lyapunov_v1(q_e, omega_e, logic.h, j_, g.k1(), g.alpha1());
    v.v3_stated = lyapunov_v3(q_e, omega_e, logic.h, q_tilde, logic.h_tilde, j_, g,
                              v3_power(g, PotentialForm::Stated));
    v.v3_consistent = lyapunov_v3(q_e, omega_e, logic.h, q_tilde, logic.h_tilde, j_, g,
                                  v3_power(g, PotentialForm::Consistent));
    return v;
  }
  v.v1 = lyapunov_v1(q_e, omega_e, logic.h, j_, full_->k1(), full_->alpha1());
  if (kind_ == ScenarioKind::BiasedGyro) {
    const ObserverGains& g = *obs_;
    const UnitQuaternion q_tilde = conjugate(aux) * q;
    const Vec3 b_tilde = bias_ - b_hat;
    v.v2_stated =
        lyapunov_v2(q_tilde, b_tilde, logic.h_tilde, g.mu2(), v2_power(g, PotentialForm::Stated));
    v.v2_consistent = lyapunov_v2(q_tilde, b_tilde, logic.h_tilde, g.mu2(),
                                  v2_power(g, PotentialForm::Consistent));
  }
  return v;
}

FlowVec Simulator::flow(double t, const FlowVec& x, const StepNoise& n, const LogicState& logic,
                        const Vec3& held_u) const {
  const UnitQuaternion q = normalize(x.q);
  const UnitQuaternion aux = normalize(x.aux);
  const Measurements m = measure(q, x.omega, n);

  Vec3 u = held_u;
  if (cfg_.sim.feedback == FeedbackMode::Continuous) {
    u = apply_limits(control(t, m, aux, x.b_hat, logic));
  }

  FlowVec rate;
  rate.q = kinematics_rate(x.q, x.omega);
  rate.omega = dynamics_rate(j_, x.omega, u + disturbance(t, cfg_.disturbance));
  rate.aux = Quaternion(0.0, Vec3::Zero());
  if (kind_ == ScenarioKind::BiasedGyro) {
    const ObserverRates r = observer_flow_rate({aux, x.b_hat, logic.h_tilde}, m.q, m.omega, *obs_);
    rate.aux = rescale(r.q_ei_dot, x.aux);
    rate.b_hat = r.b_hat_dot;
  } else if (kind_ == ScenarioKind::AttitudeOnly) {
    const UnitQuaternion q_e = error_quaternion(traj_.attitude(t), m.q);
    rate.aux = rescale(filter_flow_rate({aux, logic.h_tilde}, q_e, out_->k3(), out_->alpha3()),
                       x.aux);
  }
  return rate;
}

SimTrace Simulator::run() {
  const SimConfig& sc = cfg_.sim;
  const std::size_t n_steps = sc.steps();
  const double dt = sc.dt;

  SimTrace trace;
  trace.kind = kind_;
  trace.dt = dt;
  trace.rows.reserve(n_steps + 1);

  FlowVec x;
  x.q = cfg_.q0;
  x.omega = cfg_.omega0;
  x.aux = kind_ == ScenarioKind::BiasedGyro     ? cfg_.initial_q_ei().quat()
          : kind_ == ScenarioKind::AttitudeOnly ? cfg_.initial_q_ed().quat()
                                                : Quaternion::identity();
  x.b_hat = kind_ == ScenarioKind::BiasedGyro ? cfg_.observer.b_hat0 : Vec3::Zero();
  bias_ = cfg_.bias0;
  LogicState logic{LogicVar(cfg_.controller.h0), LogicVar(cfg_.controller.h_tilde0)};
  double norm_dev = 0.0;

  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * dt;
    const UnitQuaternion q = normalize(x.q);
    const UnitQuaternion aux = normalize(x.aux);
    const StepNoise noise = noise_.draw(k);
    const Measurements m = measure(q, x.omega, noise);

    const UnitQuaternion q_e_meas = error_quaternion(traj_.attitude(t), m.q);
    JumpResolution jr = resolve_jumps(kind_, logic, q_e_meas, measured_q_tilde(t, m, aux), delta(),
                                      sc.max_consecutive_jumps, k, t);
    for (JumpEvent& e : jr.events) {
      e.v_pre = lyapunov(t, q, x.omega, aux, x.b_hat,
                         {LogicVar(e.h_pre), LogicVar(e.h_tilde_pre)});
      e.v_post = lyapunov(t, q, x.omega, aux, x.b_hat,
                          {LogicVar(e.h_post), LogicVar(e.h_tilde_post)});
      trace.events.push_back(e);
    }
    logic = jr.logic;

    const Vec3 u_cmd = control(t, m, aux, x.b_hat, logic);
    const Vec3 u = apply_limits(u_cmd);

    TraceRow row;
    row.t = t;
    row.q = q;
    row.omega = x.omega;
    row.q_d = traj_.attitude(t);
    row.omega_d = traj_.omega(t);
    row.omega_d_dot = traj_.omega_dot(t);
    row.q_e = error_quaternion(row.q_d, q);
    row.omega_e = error_velocity(x.omega, row.q_e, row.omega_d).omega_e;
    row.h = logic.h.value();
    row.h_tilde = logic.h_tilde.value();
    row.bias = bias_;
    row.b_hat = x.b_hat;
    row.q_aux = aux;
    row.q_tilde = kind_ == ScenarioKind::BiasedGyro     ? conjugate(aux) * q
                  : kind_ == ScenarioKind::AttitudeOnly ? conjugate(aux) * row.q_e
                                                        : UnitQuaternion::identity();
    row.u_cmd = u_cmd;
    row.u_applied = u;
    row.disturbance = disturbance(t, cfg_.disturbance);
    row.lyap = lyapunov(t, q, x.omega, aux, x.b_hat, logic);
    row.norm_deviation = norm_dev;
    trace.rows.push_back(row);

    if (k == n_steps) {
      break;
    }

    auto field = [&](double ts, const FlowVec& xs) { return flow(ts, xs, noise, logic, u); };
    FlowVec next = rk4_step<FlowVec, FlowVec>(x, t, dt, field);
    if (!next.finite()) {
      throw SimulationError("integrator produced a non-finite state", k);
    }
    norm_dev = std::abs(next.q.norm() - 1.0);
    if (kind_ != ScenarioKind::FullState) {
      norm_dev = std::max(norm_dev, std::abs(next.aux.norm() - 1.0));
    }
    if (sc.renormalize_every_step) {
      next.q = normalize(next.q).quat();
      next.aux = normalize(next.aux).quat();
    }
    x = next;
    bias_ += noise.bias_rate * dt;
  }
  return trace;
}

}  // namespace

SimTrace run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  return Simulator(cfg).run();
}

}  // namespace ftatt
