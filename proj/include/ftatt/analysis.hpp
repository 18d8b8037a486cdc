#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ftatt/hybrid_sim.hpp"
#include "ftatt/lyapunov.hpp"

namespace ftatt {

// ---------------------------------------------------------------------------
// Homogeneity and perturbation analysis
// ---------------------------------------------------------------------------

using StateVector = Eigen::VectorXd;
/// f(x, t) on R^(3m); the state is a stack of m three-vectors ("blocks").
using VectorField = std::function<StateVector(const StateVector&, double)>;

/// Dilation x_i -> eps^r_i x_i applied blockwise, and homogeneity degree k.
struct DilationWeights {
  std::vector<double> r;
  double k{-0.2};

  /// Throws std::invalid_argument unless every r_i > 0 and k < 0.
  void validate() const;
  StateVector dilate(const StateVector& x, double eps) const;
};

/// A closed-loop flow written as reduced (homogeneous) part plus
/// perturbation, in vector-part coordinates near the target set where the
/// scalar parts are recovered as q0 = h sqrt(1 - |q|^2).
struct DecomposedSystem {
  std::string name;
  std::vector<std::string> blocks;
  VectorField reduced;
  VectorField perturbation;
  /// The full flow in the same coordinates, built independently from the
  /// quaternion dynamics; reduced + perturbation must reproduce it.
  VectorField full;
  /// Weights that make `reduced` homogeneous of degree k.
  DilationWeights weights;
  /// Weights in their commonly quoted form. They differ from
  /// `weights` for the full-state and attitude-only systems.
  DilationWeights stated_weights;
};

/// x = (q_e, w_e), logic h, valid where |w_ei| <= 1 and h q_e0 > 0.
DecomposedSystem full_state_system(const FullStateGains& gains, const InertiaMatrix& j, LogicVar h,
                                   const DesiredTrajectory& traj, double k = -0.2);
/// x = (q~, b~), logic h~.
DecomposedSystem observer_system(const ObserverGains& gains, LogicVar h_tilde, double k = -0.2);
/// x = (q~, q_e, w_e), logic h and h~.
DecomposedSystem output_feedback_system(const OutputFeedbackGains& gains, const InertiaMatrix& j,
                                        LogicVar h, LogicVar h_tilde,
                                        const DesiredTrajectory& traj, double k = -0.2);

/// Max over samples, eps and blocks of
/// |f_i(D_eps x, t) - eps^(r_i + k) f_i(x, t)| / (|eps^(r_i + k) f_i(x, t)| + 1e-300)
/// with block Euclidean norms.
double homogeneity_check(const VectorField& field, const DilationWeights& weights,
                         const std::vector<StateVector>& samples,
                         const std::vector<double>& eps_list, double t = 0.0);

/// ratios[block][sample][eps] = max over t of |fhat_i(D_eps x, t)| / eps^(r_i + k).
struct PerturbationTable {
  std::vector<double> eps;
  std::vector<std::vector<std::vector<double>>> ratios;

  /// Every sample's ratio sequence strictly decreases with eps (pairs of
  /// exact zeros count as non-increasing).
  bool monotone(std::size_t block) const;
  /// Smallest ratio(eps_j) / ratio(eps_j+1) over samples and consecutive eps
  /// (eps listed in decreasing order). Zero-ratio pairs are skipped.
  double min_decrease_factor(std::size_t block) const;
  /// Largest ratio at the smallest eps.
  double final_max(std::size_t block) const;
};

PerturbationTable perturbation_vanishing_check(const VectorField& fhat,
                                               const DilationWeights& weights,
                                               const std::vector<StateVector>& samples,
                                               const std::vector<double>& eps_list,
                                               const std::vector<double>& t_grid);

/// `n` times evenly covering one period of omega_d(t), so that a maximum
/// over the grid approximates the supremum over all t. A constant desired
/// rate needs only {0}.
std::vector<double> trajectory_time_grid(const DesiredTrajectory& traj, std::size_t n = 32);

/// `n` points uniformly distributed on the unit sphere of R^dim.
std::vector<StateVector> sphere_samples(int dim, std::size_t n, unsigned seed);

// ---------------------------------------------------------------------------
// Trace metrics and audits
// ---------------------------------------------------------------------------

struct ConvergenceReport {
  double threshold{1e-3};
  /// First sample time after which max(|q_e|, |w_e|) stays <= threshold.
  /// Meaningful only when `converged`.
  double settling_time{0.0};
  bool converged{false};
  /// RMS of max(|q_e|, |w_e|) over the final 20% of the horizon.
  double steady_state_error{0.0};
  std::size_t jump_count{0};
  double max_torque_inf_norm{0.0};
};

/// Tracking error used for convergence: max(|q_e|, |w_e|).
double tracking_error(const TraceRow& row);

ConvergenceReport convergence_metrics(const SimTrace& trace, double err_threshold = 1e-3);

enum class LyapunovChannel { V1, V2Stated, V2Consistent, V3Stated, V3Consistent };
std::string to_string(LyapunovChannel c);
double lyapunov_value(const LyapunovValues& v, LyapunovChannel c);

/// The channel a scenario kind is analysed with; stated or consistent form.
LyapunovChannel primary_channel(ScenarioKind kind, PotentialForm form);

/// Closed-form derivative along flows paired with each channel: the
/// derivative quoted alongside stated channels, the exact one for
/// consistent channels. Noise-free, disturbance-free, unsaturated flows only.
double closed_form_rate(const TraceRow& row, const ScenarioConfig& cfg, LyapunovChannel c);

/// Guaranteed decrease across one jump for the channel.
double jump_decrease_margin(const ScenarioConfig& cfg, LyapunovChannel c);

struct FlowAudit {
  std::size_t steps_checked{0};
  /// max over flow steps of (V_{n+1} - V_n) / (1 + V_n)
  double worst_relative_increase{-1e300};
  double t_worst{0.0};
  bool pass(double tol = 1e-8) const { return worst_relative_increase <= tol; }
};
/// Per-step change of V between consecutive samples not separated by a jump.
/// `skip_steps` leading steps are left out.
FlowAudit audit_flow(const SimTrace& trace, LyapunovChannel c, std::size_t skip_steps = 0);

struct JumpAudit {
  std::size_t jumps{0};
  double sigma{0.0};
  /// max over jumps of (V+ - V-) + sigma; nonpositive when every jump
  /// decreases V by at least sigma.
  double worst_margin{-1e300};
  bool pass(double tol = 1e-9) const { return jumps == 0 || worst_margin <= tol; }
};
JumpAudit audit_jumps(const SimTrace& trace, const ScenarioConfig& cfg, LyapunovChannel c);

struct DerivativeAudit {
  std::size_t points{0};
  double max_abs_error{0.0};
  double max_abs_rate{0.0};
  double t_worst{0.0};
  /// Sup-norm relative error max|FD - closed form| / max|closed form|.
  double relative() const { return max_abs_rate > 0.0 ? max_abs_error / max_abs_rate : 0.0; }
};
/// Compares a fourth-order central difference of V with the closed-form
/// derivative at every interior sample whose stencil contains no jump.
DerivativeAudit audit_derivative(const SimTrace& trace, const ScenarioConfig& cfg,
                                 LyapunovChannel c);

struct JumpBound {
  std::string name;
  std::size_t observed{0};
  double v0{0.0};
  double sigma{0.0};
  /// True when the bound follows from a Lyapunov function that is
  /// nonincreasing along flows, false when it is only checked empirically.
  bool proven{true};
  double bound() const { return v0 / sigma; }
  bool pass() const { return static_cast<double>(observed) <= bound() + 1e-12; }
};

struct TorqueBound {
  std::string name;
  double bound{0.0};
  double observed{0.0};
  bool pass() const { return observed < bound; }
};

struct BoundReport {
  std::vector<TorqueBound> torque;
  std::vector<JumpBound> jumps;
  /// max over samples of V1(t) - (c1 exp(c0 t) - 3 k2 / c0); <= 0 passes.
  double gronwall_margin{0.0};
  bool gronwall_checked{false};
  bool pass() const;
};

/// k1 + k2 + (wbar1^2 + wbar2) |J|, the componentwise torque bound of the
/// full-state law.
double full_state_torque_bound(const ScenarioConfig& cfg);

BoundReport bound_checks(const SimTrace& trace, const ScenarioConfig& cfg);

/// Terminal error state (h-independent sign convention: q_e taken with
/// q_e0 >= 0) as a 7-vector [q_e; w_e].
Eigen::Matrix<double, 7, 1> terminal_error_state(const SimTrace& trace);

struct OrderStudy {
  std::vector<double> dts;
  /// |x(dt_i) - x(dt_i / 2)| for each dt_i.
  std::vector<double> differences;
  /// log2(differences[i] / differences[i + 1]).
  std::vector<double> orders;
};
/// Runs `cfg` at each dt and at half the smallest one, and estimates the
/// convergence order of the terminal error state. dts must be decreasing
/// by factors of 2.
OrderStudy step_halving_study(const ScenarioConfig& cfg, const std::vector<double>& dts);

}  // namespace ftatt
