#include <doctest.h>

#include <cmath>

#include "ftatt/analysis.hpp"
#include "ftatt/scenario_io.hpp"

using namespace ftatt;

namespace {

const InertiaMatrix kJ = InertiaMatrix::diagonal(15.0, 20.0, 10.0);
const DesiredTrajectory kTraj(UnitQuaternion::identity(), Vec3(0.01, 0.01, 0.01), 0.01);

std::vector<DecomposedSystem> all_systems() {
  return {full_state_system(FullStateGains(1.1, 4.0, 0.6, 0.3), kJ, LogicVar(1), kTraj),
          observer_system(ObserverGains(0.33, 0.12, 0.75, 0.3), LogicVar(1)),
          output_feedback_system(OutputFeedbackGains(1.2, 2.4, 1.1, 0.75, 0.3), kJ, LogicVar(1),
                                 LogicVar(1), kTraj)};
}

ScenarioConfig quiet(const std::string& name) {
  ScenarioConfig cfg = without_uncertainties(preset(name));
  cfg.saturate = false;
  cfg.sim.feedback = FeedbackMode::Continuous;
  return cfg;
}

SimTrace synthetic(const std::vector<double>& err, double dt) {
  SimTrace tr;
  tr.dt = dt;
  for (std::size_t i = 0; i < err.size(); ++i) {
    TraceRow r;
    r.t = static_cast<double>(i) * dt;
    r.q_e = UnitQuaternion::from_axis_angle(Vec3::UnitX(), 2.0 * std::asin(err[i]));
    tr.rows.push_back(r);
  }
  return tr;
}

}  // namespace

TEST_CASE("dilation weights") {
  DilationWeights w{{1.0, 0.8}, -0.2};
  CHECK_NOTHROW(w.validate());
  StateVector x(6);
  x << 1, 2, 3, 4, 5, 6;
  const StateVector d = w.dilate(x, 0.5);
  CHECK(d(0) == 0.5);
  CHECK(d(3) == doctest::Approx(4.0 * std::pow(0.5, 0.8)));
  CHECK_THROWS_AS((DilationWeights{{1.0, 0.0}, -0.2}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((DilationWeights{{1.0, 0.8}, 0.1}.validate()), std::invalid_argument);
}

TEST_CASE("sphere samples and time grid") {
  const auto s = sphere_samples(9, 500, 3u);
  REQUIRE(s.size() == 500);
  for (const StateVector& x : s) CHECK(x.norm() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(sphere_samples(9, 5, 3u)[4] == sphere_samples(9, 5, 3u)[4]);

  const auto g = trajectory_time_grid(kTraj);
  REQUIRE(g.size() == 32);
  CHECK(g.front() == 0.0);
  CHECK(g.back() < 2.0 * 3.14159265358979323846 / 0.01);
  CHECK(trajectory_time_grid(DesiredTrajectory::regulation()) == std::vector<double>{0.0});
}

TEST_CASE("reduced plus perturbation reproduces the full flow") {
  const auto samples = sphere_samples(9, 200, 5u);
  for (const DecomposedSystem& sys : all_systems()) {
    const int dim = 3 * static_cast<int>(sys.blocks.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const StateVector x = 0.1 * samples[i].head(dim);
      const double t = 7.0 * static_cast<double>(i);
      const StateVector split = sys.reduced(x, t) + sys.perturbation(x, t);
      worst = std::max(worst, (split - sys.full(x, t)).norm() / (1.0 + sys.full(x, t).norm()));
    }
    INFO(sys.name);
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("reduced fields are homogeneous with the corrected weights") {
  const std::vector<double> eps = {0.5, 1e-1, 1e-2, 1e-3, 1e-4, 3.0};
  for (const DecomposedSystem& sys : all_systems()) {
    const int dim = 3 * static_cast<int>(sys.blocks.size());
    const auto samples = sphere_samples(dim, 2000, 7u);
    INFO(sys.name);
    CHECK(homogeneity_check(sys.reduced, sys.weights, samples, eps) < 1e-9);
    CHECK(homogeneity_check(sys.reduced, sys.weights, samples, {1.0}) == 0.0);

    DilationWeights wrong = sys.weights;
    wrong.r[1] *= 1.1;
    CHECK(homogeneity_check(sys.reduced, wrong, samples, eps) > 1e-3);
  }
}

TEST_CASE("weights as printed are not homogeneous for the full-state and output-feedback fields") {
  const auto systems = all_systems();
  const std::vector<double> eps = {1e-1, 1e-2};
  for (std::size_t i : {std::size_t{0}, std::size_t{2}}) {
    const DecomposedSystem& sys = systems[i];
    const auto samples = sphere_samples(3 * static_cast<int>(sys.blocks.size()), 200, 7u);
    INFO(sys.name);
    CHECK(homogeneity_check(sys.reduced, sys.stated_weights, samples, eps) > 1e-3);
  }
  // The observer's printed weights are already consistent.
  const DecomposedSystem& obs = systems[1];
  CHECK(homogeneity_check(obs.reduced, obs.stated_weights, sphere_samples(6, 200, 7u), eps) < 1e-9);
}

TEST_CASE("perturbations vanish under dilation") {
  const std::vector<double> eps = {1e-1, 1e-2, 1e-3, 1e-4};
  const auto grid = trajectory_time_grid(kTraj);
  for (const DecomposedSystem& sys : all_systems()) {
    const int dim = 3 * static_cast<int>(sys.blocks.size());
    const auto samples = sphere_samples(dim, 300, 11u);
    const PerturbationTable tab = perturbation_vanishing_check(sys.perturbation, sys.weights,
                                                               samples, eps, grid);
    for (std::size_t b = 0; b < sys.blocks.size(); ++b) {
      INFO(sys.name << " block " << sys.blocks[b]);
      CHECK(tab.monotone(b));
    }
    // Zero state gives zero ratios.
    const PerturbationTable zero = perturbation_vanishing_check(
        sys.perturbation, sys.weights, {StateVector::Zero(dim)}, eps, grid);
    for (std::size_t b = 0; b < sys.blocks.size(); ++b) CHECK(zero.final_max(b) == 0.0);
  }
  // First block of the full-state system: at least a factor 2 per decade.
  const DecomposedSystem fs = all_systems()[0];
  const PerturbationTable tab =
      perturbation_vanishing_check(fs.perturbation, fs.weights, sphere_samples(6, 300, 11u), eps, grid);
  CHECK(tab.min_decrease_factor(0) >= 2.0);
}

TEST_CASE("convergence metrics on synthetic traces") {
  SUBCASE("all-zero error settles at 0") {
    const ConvergenceReport r = convergence_metrics(synthetic(std::vector<double>(101, 0.0), 0.1));
    CHECK(r.converged);
    CHECK(r.settling_time == 0.0);
    CHECK(r.steady_state_error == 0.0);
  }
  SUBCASE("last crossing defines settling") {
    std::vector<double> e(101, 1e-4);
    e[10] = 0.5;
    e[40] = 2e-3;
    const ConvergenceReport r = convergence_metrics(synthetic(e, 0.1));
    CHECK(r.converged);
    CHECK(r.settling_time == doctest::Approx(4.1));
    CHECK(r.steady_state_error == doctest::Approx(1e-4).epsilon(1e-9));
  }
  SUBCASE("never below threshold") {
    const ConvergenceReport r = convergence_metrics(synthetic(std::vector<double>(50, 0.01), 0.1));
    CHECK_FALSE(r.converged);
    CHECK(r.steady_state_error == doctest::Approx(0.01).epsilon(1e-9));
  }
}

TEST_CASE("Example 1 audits and bounds") {
  const ScenarioConfig cfg = quiet("example1");
  const SimTrace tr = run_scenario(cfg);
  const FlowAudit fa = audit_flow(tr, LyapunovChannel::V1);
  CHECK(fa.pass());
  const JumpAudit ja = audit_jumps(tr, cfg, LyapunovChannel::V1);
  CHECK(ja.jumps == 1);
  CHECK(ja.pass());
  CHECK(jump_decrease_margin(cfg, LyapunovChannel::V1) > 0.0);
  CHECK(audit_derivative(tr, cfg, LyapunovChannel::V1).relative() < 1e-4);

  const BoundReport b = bound_checks(run_scenario(preset("example1")), preset("example1"));
  CHECK(b.pass());
  CHECK(b.gronwall_checked);
  CHECK(full_state_torque_bound(cfg) ==
        doctest::Approx(5.1 + (3e-4 + std::sqrt(3e-4) * 0.01) * 20.0));
}

TEST_CASE("printed observer potential increases along flows") {
  const ScenarioConfig cfg = quiet("example2");
  const SimTrace tr = run_scenario(cfg);
  CHECK_FALSE(audit_flow(tr, LyapunovChannel::V2Stated).pass());
  CHECK(audit_jumps(tr, cfg, LyapunovChannel::V2Consistent).pass());
}

TEST_CASE("jump bound with V1(0) below sigma predicts no jumps") {
  ScenarioConfig cfg = quiet("example1");
  cfg.q0 = UnitQuaternion::from_axis_angle(Vec3::UnitZ(), 0.05);
  cfg.omega0 = cfg.trajectory().omega(0.0);
  cfg.sim.t_final = 20.0;
  const BoundReport b = bound_checks(run_scenario(cfg), cfg);
  REQUIRE_FALSE(b.jumps.empty());
  CHECK(b.jumps[0].bound() < 1.0);
  CHECK(b.jumps[0].observed == 0);
  CHECK(b.pass());
}

TEST_CASE("zero gain configuration is rejected") {
  ScenarioConfig cfg = preset("example1");
  cfg.controller.k1 = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("RK4 terminal state converges at fourth order") {
  ScenarioConfig cfg = quiet("fig3");
  cfg.controller.alpha1 = 1.0;
  cfg.sim.t_final = 10.0;
  const OrderStudy st = step_halving_study(cfg, {0.08, 0.04, 0.02});
  REQUIRE(st.orders.size() == 2);
  for (double p : st.orders) CHECK(p == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("smaller alpha1 gives smaller steady-state error on noisy Example 1") {
  double prev = 0.0;
  for (double a : {0.6, 0.8, 1.0}) {
    ScenarioConfig cfg = preset("example1");
    cfg.controller.alpha1 = a;
    const double e = convergence_metrics(run_scenario(cfg)).steady_state_error;
    CHECK(e > prev);
    prev = e;
  }
}
