#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <unistd.h>

#include <json.hpp>

#include "ftatt/runner.hpp"
#include "ftatt/scenario_io.hpp"

using namespace ftatt;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("ftatt_test_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string error_field(const json& j) {
  try {
    config_from_json(j);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST_CASE("presets carry the published constants") {
  const ScenarioConfig e1 = preset("example1");
  CHECK(e1.inertia == Mat3(Vec3(15, 20, 10).asDiagonal()));
  CHECK(e1.controller.k1 == 1.1);
  CHECK(e1.controller.k2 == 4.0);
  CHECK(e1.controller.delta == 0.3);
  CHECK(e1.controller.h0 == 1);
  CHECK(e1.q0.vec() == Vec3(0.6, -0.8, 0.0));
  CHECK(e1.omega0 == Vec3(0.3, -0.4, 0.0));

  const ScenarioConfig e2 = preset("example2");
  CHECK(e2.sim.kind == ScenarioKind::BiasedGyro);
  CHECK(e2.observer.mu1 == 0.33);
  CHECK(e2.observer.mu2 == 0.12);
  CHECK(e2.observer.beta1 == 0.75);
  CHECK(e2.observer.b_hat0 == Vec3::Zero());
  CHECK(e2.initial_q_ei().quat().coeffs() == e2.q0.quat().coeffs());

  const ScenarioConfig e3 = preset("example3");
  CHECK(e3.sim.kind == ScenarioKind::AttitudeOnly);
  CHECK(e3.controller.k1 == 1.2);
  CHECK(e3.controller.k2 == 2.4);
  CHECK(e3.controller.k3 == 1.1);
  CHECK(e3.initial_q_ed().quat().coeffs() ==
        error_quaternion(e3.q_d0, e3.q0).quat().coeffs());

  CHECK(preset("fig3").q0.vec() == Vec3(1, 0, 0));
  CHECK_THROWS_AS(preset("example4"), ConfigError);
  CHECK(preset_names().size() == 4);
}

TEST_CASE("configuration round trip") {
  TempDir dir;
  for (const std::string& name : preset_names()) {
    const json emitted = config_to_json(preset(name));
    save_config(preset(name), dir / (name + ".json"));
    std::vector<std::string> warnings;
    const ScenarioConfig back = load_config(dir / (name + ".json"), &warnings);
    INFO(name);
    CHECK(warnings.empty());
    CHECK(config_to_json(back) == emitted);
  }
}

TEST_CASE("configuration errors name the field") {
  const json base = config_to_json(preset("example1"));

  json j = base;
  j["controller"]["gain_typo"] = 1.0;
  CHECK(error_field(j) == "controller.gain_typo");

  j = base;
  j["controller"]["alpha2_nd"] = 0.9;
  CHECK(error_field(j) == "controller.alpha2_nd");

  j = config_to_json(preset("example3"));
  j["controller"]["alpha1_nd"] = 0.6;
  CHECK(error_field(j) == "controller.alpha1_nd");

  j = base;
  j["controller"]["delta_nd"] = 1.0;
  CHECK(error_field(j) == "controller.delta_nd");

  j = base;
  j["observer"] = config_to_json(preset("example2"))["observer"];
  CHECK(error_field(j) == "observer");

  j = base;
  j.erase("scenario_kind");
  CHECK(error_field(j) == "scenario_kind");

  j = base;
  j["plant"]["initial_omega_rad_s"] = "fast";
  CHECK(error_field(j).rfind("plant.initial_omega_rad_s", 0) == 0);

  TempDir dir;
  CHECK_THROWS_AS(load_config(dir / "missing.json"), ConfigError);
  std::ofstream(dir / "broken.json") << "{ not json";
  CHECK_THROWS_AS(load_config(dir / "broken.json"), ConfigError);
}

TEST_CASE("non-unit quaternions are normalized with a warning") {
  json j = config_to_json(preset("example1"));
  j["plant"]["initial_attitude_quat"] = {0.0, 1.2, -1.6, 0.0};
  std::vector<std::string> warnings;
  const ScenarioConfig cfg = config_from_json(j, &warnings);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("plant.initial_attitude_quat") != std::string::npos);
  CHECK((cfg.q0.vec() - Vec3(0.6, -0.8, 0.0)).norm() < 1e-15);
  j["plant"]["initial_attitude_quat"] = {0.0, 0.0, 0.0, 0.0};
  CHECK(error_field(j) == "plant.initial_attitude_quat");
}

TEST_CASE("with_parameter edits one field") {
  const ScenarioConfig cfg = preset("example1");
  CHECK(with_parameter(cfg, "controller.alpha1_nd", 0.8).controller.alpha1 == 0.8);
  CHECK(with_parameter(cfg, "plant.initial_omega_rad_s.2", 0.1).omega0.z() == 0.1);
  CHECK(with_parameter(cfg, "sensors.seed", 9).noise.seed == 9);
  CHECK_THROWS_AS(with_parameter(cfg, "sensors.seed", 9.5), ConfigError);
  CHECK_THROWS_AS(with_parameter(cfg, "observer.mu1_rad_s", 1.0), ConfigError);
  CHECK_THROWS_AS(with_parameter(cfg, "name", 1.0), ConfigError);
  CHECK_THROWS_AS(with_parameter(cfg, "controller.alpha1_nd", 1.5), ConfigError);
}

TEST_CASE("run writes files and same seed gives the same digest") {
  TempDir dir;
  ScenarioConfig cfg = preset("example2");
  cfg.sim.t_final = 15.0;
  const RunSummary a = run(cfg, dir / "a");
  const RunSummary b = run(cfg, dir / "b");
  for (const std::string& p : {a.config_path, a.trace_path, a.events_path, a.summary_path}) {
    CHECK(fs::exists(p));
  }
  CHECK(a.digest.size() == 16);
  CHECK(a.digest == b.digest);
  cfg.noise.seed = 77;
  CHECK(run(cfg, dir / "c").digest != a.digest);

  std::ifstream in(a.summary_path);
  const json s = json::parse(in);
  CHECK(s["digest"] == a.digest);
  CHECK(s["scenario_kind"] == "biased_gyro");
}

TEST_CASE("analysis of the written trace equals analysis of the in-memory trace") {
  TempDir dir;
  for (const std::string& name : {"example1", "example2", "example3"}) {
    ScenarioConfig cfg = preset(name);
    cfg.sim.t_final = 30.0;
    const RunSummary s = run(cfg, dir / name);
    const SimTrace mem = run_scenario(cfg);
    const SimTrace disk = load_trace(s);
    REQUIRE(disk.rows.size() == mem.rows.size());
    REQUIRE(disk.events.size() == mem.events.size());
    const TraceAnalysis x = analyze_trace(mem, cfg);
    const TraceAnalysis y = analyze_trace(disk, load_config(s.config_path));
    INFO(name);
    CHECK(x.convergence.steady_state_error == y.convergence.steady_state_error);
    CHECK(x.convergence.converged == y.convergence.converged);
    if (x.convergence.converged) {
      CHECK(x.convergence.settling_time == y.convergence.settling_time);
    }
    CHECK(x.convergence.jump_count == y.convergence.jump_count);
    CHECK(x.convergence.max_torque_inf_norm == y.convergence.max_torque_inf_norm);
    CHECK(x.bounds.gronwall_margin == y.bounds.gronwall_margin);
    REQUIRE(x.bounds.torque.size() == y.bounds.torque.size());
    for (std::size_t i = 0; i < x.bounds.torque.size(); ++i) {
      CHECK(x.bounds.torque[i].observed == y.bounds.torque[i].observed);
    }
    for (std::size_t i = 0; i < mem.rows.size(); i += 97) {
      CHECK(mem.rows[i].lyap.v1 == disk.rows[i].lyap.v1);
      CHECK(mem.rows[i].q.quat().coeffs() == disk.rows[i].q.quat().coeffs());
    }
  }
}

TEST_CASE("sweep") {
  TempDir dir;
  const ScenarioConfig cfg = without_uncertainties(preset("example1"));
  CHECK_THROWS_AS(sweep(cfg, "controller.alpha1_nd", {}, dir / "empty"), std::invalid_argument);
  CHECK_THROWS_AS(sweep(cfg, "controller.nope", {1.0}, dir / "bad"), ConfigError);

  // Smaller alpha1 converges sooner.
  const auto runs = sweep(cfg, "controller.alpha1_nd", {0.6, 0.8, 1.0}, dir / "alpha", 3);
  REQUIRE(runs.size() == 3);
  for (const RunSummary& r : runs) REQUIRE(r.convergence.converged);
  CHECK(runs[0].convergence.settling_time < runs[2].convergence.settling_time);
  CHECK(runs[1].convergence.settling_time < runs[2].convergence.settling_time);
  CHECK(fs::exists(dir / "alpha/run_2/trace.csv"));
}

TEST_CASE("verify reports the analysis suite") {
  const json r = verify(preset("example1"), 200);
  CHECK(r["pass"] == true);
  CHECK(r["failed"].empty());
  CHECK(r["checks"].size() >= 5);
  const json o = verify(preset("example2"), 200);
  CHECK(o["pass"] == false);
}

TEST_CASE("trace header names every column with a unit") {
  const auto cols = trace_columns();
  CHECK(cols.front() == "t_s");
  for (const std::string& c : cols) {
    const bool has_unit = c.find('_') != std::string::npos;
    CHECK(has_unit);
  }
}

TEST_CASE("fnv1a64 reference values") {
  CHECK(fnv1a64_hex("") == "cbf29ce484222325");
  CHECK(fnv1a64_hex("a") == "af63dc4c8601ec8c");
}
