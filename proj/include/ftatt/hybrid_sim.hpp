#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ftatt/hybrid_controllers.hpp"
#include "ftatt/rigid_body.hpp"
#include "ftatt/sensors.hpp"

namespace ftatt {

enum class ScenarioKind { FullState, BiasedGyro, AttitudeOnly };

/// How the control torque is evaluated inside an integration step.
///
/// Sampled: computed once from the measurements at the start of the step and
/// held through the RK4 stages (sampled-data controller).
/// Continuous: recomputed at every RK4 stage from that stage's state, which
/// integrates the ideal closed-loop flow. Used for derivative and order checks.
enum class FeedbackMode { Sampled, Continuous };

std::string to_string(ScenarioKind kind);
ScenarioKind parse_scenario_kind(const std::string& name);
std::string to_string(FeedbackMode mode);
FeedbackMode parse_feedback_mode(const std::string& name);

struct SimConfig {
  double dt{0.01};
  double t_final{100.0};
  int max_consecutive_jumps{4};
  ScenarioKind kind{ScenarioKind::FullState};
  bool renormalize_every_step{true};
  FeedbackMode feedback{FeedbackMode::Sampled};

  void validate() const;
  /// Number of integration steps, round(t_final / dt).
  std::size_t steps() const;
};

/// Controller gains and initial logic values. Derived exponents (alpha2,
/// beta2, and alpha1 in the attitude-only case) are never stored.
struct ControllerParams {
  double k1{1.1};
  double k2{4.0};
  double k3{1.1};
  double alpha1{0.6};
  double alpha3{0.75};
  double delta{0.3};
  int h0{1};
  int h_tilde0{1};
};

struct ObserverParams {
  double mu1{0.33};
  double mu2{0.12};
  double beta1{0.75};
  Vec3 b_hat0{Vec3::Zero()};
  /// Defaults to the initial body attitude when absent.
  std::optional<UnitQuaternion> q_ei0;
};

struct ScenarioConfig {
  std::string name{"custom"};

  Mat3 inertia{Vec3(15.0, 20.0, 10.0).asDiagonal()};
  UnitQuaternion q0{};
  Vec3 omega0{Vec3::Zero()};

  UnitQuaternion q_d0{};
  Vec3 omega_d_amplitude{Vec3::Zero()};
  double omega_d_frequency{0.0};

  ControllerParams controller;
  ObserverParams observer;
  /// Filter initial attitude; defaults to the initial error quaternion.
  std::optional<UnitQuaternion> q_ed0;

  Vec3 bias0{Vec3::Zero()};
  NoiseConfig noise;
  DisturbanceConfig disturbance;
  double u_max{5.0};
  bool saturate{true};

  SimConfig sim;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  InertiaMatrix inertia_matrix() const { return InertiaMatrix(inertia); }
  DesiredTrajectory trajectory() const {
    return {q_d0, omega_d_amplitude, omega_d_frequency};
  }
  FullStateGains full_state_gains() const;
  ObserverGains observer_gains() const;
  OutputFeedbackGains output_gains() const;
  UnitQuaternion initial_q_ei() const { return observer.q_ei0.value_or(q0); }
  UnitQuaternion initial_q_ed() const;
};

/// Lyapunov values of one state. Entries that do not apply to the scenario
/// kind are NaN.
struct LyapunovValues {
  double v1{0.0};
  double v2_stated{0.0};
  double v2_consistent{0.0};
  double v3_stated{0.0};
  double v3_consistent{0.0};
};

/// One sample at a step boundary, after jump resolution. Error and Lyapunov
/// quantities are built from the true state; the controller itself only ever
/// sees measurements.
struct TraceRow {
  double t{0.0};
  UnitQuaternion q;
  Vec3 omega{Vec3::Zero()};
  UnitQuaternion q_d;
  Vec3 omega_d{Vec3::Zero()};
  Vec3 omega_d_dot{Vec3::Zero()};
  UnitQuaternion q_e;
  Vec3 omega_e{Vec3::Zero()};
  int h{1};
  int h_tilde{1};
  Vec3 bias{Vec3::Zero()};
  Vec3 b_hat{Vec3::Zero()};
  /// Q_EI for the observer scenario, Q_ED for the attitude-only scenario,
  /// identity otherwise.
  UnitQuaternion q_aux;
  /// Q_EI* Q in the observer scenario, Q_ED* Q_e in the attitude-only one.
  UnitQuaternion q_tilde;
  Vec3 u_cmd{Vec3::Zero()};
  Vec3 u_applied{Vec3::Zero()};
  Vec3 disturbance{Vec3::Zero()};
  LyapunovValues lyap;
  /// Largest | |Q| - 1 | over the integrated quaternions at the end of the
  /// step that produced this row, before renormalization. Zero at t = 0.
  double norm_deviation{0.0};
};

enum class JumpVariable { H, HTilde, Joint };
std::string to_string(JumpVariable v);
JumpVariable parse_jump_variable(const std::string& name);

struct JumpEvent {
  double t{0.0};
  std::size_t step{0};
  JumpVariable which{JumpVariable::H};
  int h_pre{1}, h_post{1};
  int h_tilde_pre{1}, h_tilde_post{1};
  LyapunovValues v_pre;
  LyapunovValues v_post;
};

struct SimTrace {
  ScenarioKind kind{ScenarioKind::FullState};
  double dt{0.01};
  std::vector<TraceRow> rows;
  std::vector<JumpEvent> events;

  std::size_t jump_count(std::optional<JumpVariable> which = std::nullopt) const;
};

/// Integrator blowup or Zeno-like jumping. Carries the offending step.
class SimulationError : public std::runtime_error {
 public:
  SimulationError(const std::string& what, std::size_t step)
      : std::runtime_error(what + " at step " + std::to_string(step)), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

/// Generic classical RK4 step for any state type supporting
/// `state + scalar * rate`.
template <class State, class Rate, class Field>
State rk4_step(const State& x, double t, double dt, const Field& f) {
  const Rate k1 = f(t, x);
  const Rate k2 = f(t + 0.5 * dt, x + (0.5 * dt) * k1);
  const Rate k3 = f(t + 0.5 * dt, x + (0.5 * dt) * k2);
  const Rate k4 = f(t + dt, x + dt * k3);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Measurements the controller sees at one instant.
struct Measurements {
  UnitQuaternion q;
  Vec3 omega{Vec3::Zero()};
};

/// Logic variables of the closed loop.
struct LogicState {
  LogicVar h;
  LogicVar h_tilde;
};

/// Applies the scenario's jump maps while the measured state lies in the
/// jump set. Only logic variables change. `q_e` and `q_tilde` are the
/// measured error quaternions; `q_tilde` is ignored for the full-state kind.
/// Returns the number of jumps applied and appends one event per jump
/// (Lyapunov fields are left for the caller). Throws SimulationError after
/// more than `max_jumps` consecutive jumps.
struct JumpResolution {
  LogicState logic;
  std::vector<JumpEvent> events;
};
JumpResolution resolve_jumps(ScenarioKind kind, const LogicState& logic, const UnitQuaternion& q_e,
                             const UnitQuaternion& q_tilde, double delta, int max_jumps,
                             std::size_t step, double t);

/// Runs the configured scenario over [0, t_final]. Deterministic given the
/// configuration (including the noise seed).
SimTrace run_scenario(const ScenarioConfig& cfg);

}  // namespace ftatt
