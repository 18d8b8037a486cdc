#include "ftatt/scenario_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace ftatt {

using nlohmann::json;

namespace {

constexpr double kCouplingTolerance = 1e-12;

/// A JSON object whose keys are consumed one by one; finish() rejects the
/// leftovers.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) {
      throw ConfigError(path_, "expected an object");
    }
  }

  std::string path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    auto it = j_.find(key);
    if (it == j_.end()) {
      return nullptr;
    }
    used_.insert(key);
    return &*it;
  }

  const json& require(const std::string& key) {
    const json* v = find(key);
    if (v == nullptr) {
      throw ConfigError(path(key), "missing required field");
    }
    return *v;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (used_.count(it.key()) == 0) {
        throw ConfigError(path(it.key()), "unknown field");
      }
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

double as_number(const json& v, const std::string& field) {
  if (!v.is_number()) {
    throw ConfigError(field, "expected a number");
  }
  const double x = v.get<double>();
  if (!std::isfinite(x)) {
    throw ConfigError(field, "must be finite");
  }
  return x;
}

double read_number(Section& s, const std::string& key, double fallback) {
  const json* v = s.find(key);
  return v ? as_number(*v, s.path(key)) : fallback;
}

bool read_bool(Section& s, const std::string& key, bool fallback) {
  const json* v = s.find(key);
  if (v == nullptr) {
    return fallback;
  }
  if (!v->is_boolean()) {
    throw ConfigError(s.path(key), "expected true or false");
  }
  return v->get<bool>();
}

int read_sign(Section& s, const std::string& key, int fallback) {
  const json* v = s.find(key);
  if (v == nullptr) {
    return fallback;
  }
  if (!v->is_number_integer() || (v->get<int>() != 1 && v->get<int>() != -1)) {
    throw ConfigError(s.path(key), "must be 1 or -1");
  }
  return v->get<int>();
}

Eigen::VectorXd as_vector(const json& v, const std::string& field, int n) {
  if (!v.is_array() || static_cast<int>(v.size()) != n) {
    throw ConfigError(field, "expected an array of " + std::to_string(n) + " numbers");
  }
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) {
    out(i) = as_number(v[static_cast<std::size_t>(i)], field + "[" + std::to_string(i) + "]");
  }
  return out;
}

Vec3 read_vec3(Section& s, const std::string& key, const Vec3& fallback) {
  const json* v = s.find(key);
  return v ? Vec3(as_vector(*v, s.path(key), 3)) : fallback;
}

UnitQuaternion parse_quat(const json& v, const std::string& field,
                          std::vector<std::string>* warnings) {
  const Eigen::VectorXd c = as_vector(v, field, 4);
  const Quaternion q(c(0), c(1), c(2), c(3));
  const double n = q.norm();
  if (!(n > 1e-12)) {
    throw ConfigError(field, "quaternion has zero norm");
  }
  if (std::abs(n - 1.0) <= UnitQuaternion::kUnitTolerance) {
    return UnitQuaternion(q);
  }
  if (warnings != nullptr) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s: quaternion norm %.12g normalized to 1", field.c_str(), n);
    warnings->emplace_back(buf);
  }
  return normalize(q);
}

std::optional<UnitQuaternion> read_quat(Section& s, const std::string& key,
                                        std::vector<std::string>* warnings) {
  const json* v = s.find(key);
  if (v == nullptr) {
    return std::nullopt;
  }
  return parse_quat(*v, s.path(key), warnings);
}

Mat3 read_inertia(Section& s, const std::string& key, const Mat3& fallback) {
  const json* v = s.find(key);
  if (v == nullptr) {
    return fallback;
  }
  const std::string field = s.path(key);
  if (!v->is_array() || v->size() != 3) {
    throw ConfigError(field, "expected a 3x3 array");
  }
  Mat3 m;
  for (int r = 0; r < 3; ++r) {
    const Eigen::VectorXd row = as_vector((*v)[static_cast<std::size_t>(r)],
                                          field + "[" + std::to_string(r) + "]", 3);
    m.row(r) = row.transpose();
  }
  return m;
}

void check_derived(Section& s, const std::string& key, double expected, const std::string& rule) {
  const json* v = s.find(key);
  if (v == nullptr) {
    return;
  }
  const double given = as_number(*v, s.path(key));
  if (std::abs(given - expected) > kCouplingTolerance) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "violates %s (given %.17g, required %.17g)", rule.c_str(),
                  given, expected);
    throw ConfigError(s.path(key), buf);
  }
}

json quat_json(const UnitQuaternion& q) {
  return json::array({q.scalar(), q.vec().x(), q.vec().y(), q.vec().z()});
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json mat_json(const Mat3& m) {
  json out = json::array();
  for (int r = 0; r < 3; ++r) {
    out.push_back(json::array({m(r, 0), m(r, 1), m(r, 2)}));
  }
  return out;
}

bool uses_observer(ScenarioKind k) { return k == ScenarioKind::BiasedGyro; }
bool uses_filter(ScenarioKind k) { return k == ScenarioKind::AttitudeOnly; }

}  // namespace

json config_to_json(const ScenarioConfig& cfg) {
  const ScenarioKind kind = cfg.sim.kind;
  json j;
  j["name"] = cfg.name;
  j["scenario_kind"] = to_string(kind);
  j["plant"] = {{"inertia_kg_m2", mat_json(cfg.inertia)},
                {"initial_attitude_quat", quat_json(cfg.q0)},
                {"initial_omega_rad_s", vec_json(cfg.omega0)}};
  j["trajectory"] = {{"initial_attitude_quat", quat_json(cfg.q_d0)},
                     {"omega_amplitude_rad_s", vec_json(cfg.omega_d_amplitude)},
                     {"omega_frequency_rad_s", cfg.omega_d_frequency}};

  const ControllerParams& c = cfg.controller;
  json ctl = {{"k1_n_m", c.k1}, {"k2_n_m", c.k2}, {"delta_nd", c.delta}, {"h0_nd", c.h0}};
  if (kind == ScenarioKind::AttitudeOnly) {
    ctl["k3_rad_s"] = c.k3;
    ctl["alpha3_nd"] = c.alpha3;
    ctl["h_tilde0_nd"] = c.h_tilde0;
  } else {
    ctl["alpha1_nd"] = c.alpha1;
    if (kind == ScenarioKind::BiasedGyro) {
      ctl["h_tilde0_nd"] = c.h_tilde0;
    }
  }
  j["controller"] = ctl;

  if (uses_observer(kind)) {
    const ObserverParams& o = cfg.observer;
    json obs = {{"mu1_rad_s", o.mu1},
                {"mu2_rad_s2", o.mu2},
                {"beta1_nd", o.beta1},
                {"b_hat0_rad_s", vec_json(o.b_hat0)}};
    if (o.q_ei0) {
      obs["q_ei0_quat"] = quat_json(*o.q_ei0);
    }
    j["observer"] = obs;
  }
  if (uses_filter(kind) && cfg.q_ed0) {
    j["filter"] = {{"q_ed0_quat", quat_json(*cfg.q_ed0)}};
  }

  j["sensors"] = {{"bias0_rad_s", vec_json(cfg.bias0)},
                  {"attitude_cone_half_angle_deg", cfg.noise.attitude_cone_half_angle_deg},
                  {"gyro_sigma_deg_s", cfg.noise.gyro_sigma_deg_s},
                  {"bias_walk_sigma_deg_s2", cfg.noise.bias_walk_sigma_deg_s2},
                  {"seed", cfg.noise.seed}};
  j["disturbance"] = {{"enabled", cfg.disturbance.enabled},
                      {"amplitude_n_m", cfg.disturbance.amplitude_n_m},
                      {"frequency_rad_s", cfg.disturbance.frequency_rad_s}};
  j["actuator"] = {{"saturate", cfg.saturate}, {"u_max_n_m", cfg.u_max}};
  j["sim"] = {{"dt_s", cfg.sim.dt},
              {"t_final_s", cfg.sim.t_final},
              {"max_consecutive_jumps", cfg.sim.max_consecutive_jumps},
              {"renormalize_every_step", cfg.sim.renormalize_every_step},
              {"feedback", to_string(cfg.sim.feedback)}};
  return j;
}

ScenarioConfig config_from_json(const json& j, std::vector<std::string>* warnings) {
  ScenarioConfig cfg;
  Section top(j, "");

  if (const json* v = top.find("name")) {
    if (!v->is_string()) {
      throw ConfigError("name", "expected a string");
    }
    cfg.name = v->get<std::string>();
  }
  {
    const json& v = top.require("scenario_kind");
    if (!v.is_string()) {
      throw ConfigError("scenario_kind", "expected a string");
    }
    try {
      cfg.sim.kind = parse_scenario_kind(v.get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError("scenario_kind", e.what());
    }
  }
  const ScenarioKind kind = cfg.sim.kind;

  if (const json* v = top.find("plant")) {
    Section s(*v, "plant");
    cfg.inertia = read_inertia(s, "inertia_kg_m2", cfg.inertia);
    cfg.q0 = read_quat(s, "initial_attitude_quat", warnings).value_or(cfg.q0);
    cfg.omega0 = read_vec3(s, "initial_omega_rad_s", cfg.omega0);
    s.finish();
  }
  if (const json* v = top.find("trajectory")) {
    Section s(*v, "trajectory");
    cfg.q_d0 = read_quat(s, "initial_attitude_quat", warnings).value_or(cfg.q_d0);
    cfg.omega_d_amplitude = read_vec3(s, "omega_amplitude_rad_s", cfg.omega_d_amplitude);
    cfg.omega_d_frequency = read_number(s, "omega_frequency_rad_s", cfg.omega_d_frequency);
    s.finish();
  }
  if (const json* v = top.find("controller")) {
    Section s(*v, "controller");
    ControllerParams& c = cfg.controller;
    c.k1 = read_number(s, "k1_n_m", c.k1);
    c.k2 = read_number(s, "k2_n_m", c.k2);
    c.delta = read_number(s, "delta_nd", c.delta);
    c.h0 = read_sign(s, "h0_nd", c.h0);
    if (kind == ScenarioKind::AttitudeOnly) {
      c.k3 = read_number(s, "k3_rad_s", c.k3);
      c.alpha3 = read_number(s, "alpha3_nd", c.alpha3);
      c.h_tilde0 = read_sign(s, "h_tilde0_nd", c.h_tilde0);
      check_derived(s, "alpha1_nd", 2.0 * c.alpha3 - 1.0, "alpha1 = 2 alpha3 - 1");
    } else {
      c.alpha1 = read_number(s, "alpha1_nd", c.alpha1);
      check_derived(s, "alpha2_nd", 2.0 * c.alpha1 / (1.0 + c.alpha1),
                    "alpha2 = 2 alpha1 / (1 + alpha1)");
      if (kind == ScenarioKind::BiasedGyro) {
        c.h_tilde0 = read_sign(s, "h_tilde0_nd", c.h_tilde0);
      }
    }
    s.finish();
    if (!(c.delta > 0.0 && c.delta < 1.0)) {
      throw ConfigError("controller.delta_nd", "must lie in (0, 1)");
    }
  }
  if (const json* v = top.find("observer")) {
    if (!uses_observer(kind)) {
      throw ConfigError("observer", "not used by scenario kind " + to_string(kind));
    }
    Section s(*v, "observer");
    ObserverParams& o = cfg.observer;
    o.mu1 = read_number(s, "mu1_rad_s", o.mu1);
    o.mu2 = read_number(s, "mu2_rad_s2", o.mu2);
    o.beta1 = read_number(s, "beta1_nd", o.beta1);
    check_derived(s, "beta2_nd", 2.0 * o.beta1 - 1.0, "beta2 = 2 beta1 - 1");
    o.b_hat0 = read_vec3(s, "b_hat0_rad_s", o.b_hat0);
    o.q_ei0 = read_quat(s, "q_ei0_quat", warnings);
    s.finish();
  }
  if (const json* v = top.find("filter")) {
    if (!uses_filter(kind)) {
      throw ConfigError("filter", "not used by scenario kind " + to_string(kind));
    }
    Section s(*v, "filter");
    cfg.q_ed0 = read_quat(s, "q_ed0_quat", warnings);
    s.finish();
  }
  if (const json* v = top.find("sensors")) {
    Section s(*v, "sensors");
    cfg.bias0 = read_vec3(s, "bias0_rad_s", cfg.bias0);
    cfg.noise.attitude_cone_half_angle_deg =
        read_number(s, "attitude_cone_half_angle_deg", cfg.noise.attitude_cone_half_angle_deg);
    cfg.noise.gyro_sigma_deg_s = read_number(s, "gyro_sigma_deg_s", cfg.noise.gyro_sigma_deg_s);
    cfg.noise.bias_walk_sigma_deg_s2 =
        read_number(s, "bias_walk_sigma_deg_s2", cfg.noise.bias_walk_sigma_deg_s2);
    if (const json* seed = s.find("seed")) {
      if (!seed->is_number_unsigned() && !(seed->is_number_integer() && seed->get<long long>() >= 0)) {
        throw ConfigError("sensors.seed", "expected a nonnegative integer");
      }
      cfg.noise.seed = seed->get<std::uint64_t>();
    }
    s.finish();
  }
  if (const json* v = top.find("disturbance")) {
    Section s(*v, "disturbance");
    cfg.disturbance.enabled = read_bool(s, "enabled", cfg.disturbance.enabled);
    cfg.disturbance.amplitude_n_m = read_number(s, "amplitude_n_m", cfg.disturbance.amplitude_n_m);
    cfg.disturbance.frequency_rad_s =
        read_number(s, "frequency_rad_s", cfg.disturbance.frequency_rad_s);
    s.finish();
  }
  if (const json* v = top.find("actuator")) {
    Section s(*v, "actuator");
    cfg.saturate = read_bool(s, "saturate", cfg.saturate);
    cfg.u_max = read_number(s, "u_max_n_m", cfg.u_max);
    s.finish();
  }
  if (const json* v = top.find("sim")) {
    Section s(*v, "sim");
    cfg.sim.dt = read_number(s, "dt_s", cfg.sim.dt);
    cfg.sim.t_final = read_number(s, "t_final_s", cfg.sim.t_final);
    if (const json* m = s.find("max_consecutive_jumps")) {
      if (!m->is_number_integer()) {
        throw ConfigError("sim.max_consecutive_jumps", "expected an integer");
      }
      cfg.sim.max_consecutive_jumps = m->get<int>();
    }
    cfg.sim.renormalize_every_step =
        read_bool(s, "renormalize_every_step", cfg.sim.renormalize_every_step);
    if (const json* f = s.find("feedback")) {
      if (!f->is_string()) {
        throw ConfigError("sim.feedback", "expected a string");
      }
      try {
        cfg.sim.feedback = parse_feedback_mode(f->get<std::string>());
      } catch (const std::invalid_argument& e) {
        throw ConfigError("sim.feedback", e.what());
      }
    }
    s.finish();
  }
  top.finish();

  try {
    cfg.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError("", e.what());
  }
  return cfg;
}

ScenarioConfig load_config(const std::string& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("", "cannot open config file '" + path + "'");
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON in '") + path + "': " + e.what());
  }
  return config_from_json(j, warnings);
}

void save_config(const ScenarioConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write '" + path + "'");
  }
  out << config_to_json(cfg).dump(2) << '\n';
}

std::vector<std::string> preset_names() { return {"example1", "example2", "example3", "fig3"}; }

namespace {

ScenarioConfig example1_base() {
  ScenarioConfig c;
  c.inertia = Vec3(15.0, 20.0, 10.0).asDiagonal();
  c.q0 = UnitQuaternion(0.0, 0.6, -0.8, 0.0);
  c.omega0 = Vec3(0.3, -0.4, 0.0);
  c.q_d0 = UnitQuaternion::identity();
  c.omega_d_amplitude = Vec3(0.01, 0.01, 0.01);
  c.omega_d_frequency = 0.01;
  c.controller.k1 = 1.1;
  c.controller.k2 = 4.0;
  c.controller.alpha1 = 0.6;
  c.controller.delta = 0.3;
  c.controller.h0 = 1;
  c.controller.h_tilde0 = 1;
  c.noise.attitude_cone_half_angle_deg = 0.01;
  c.noise.gyro_sigma_deg_s = 0.01;
  c.noise.bias_walk_sigma_deg_s2 = 0.0;
  c.noise.seed = 1;
  c.disturbance = {0.02, 0.1, true};
  c.u_max = 5.0;
  c.saturate = true;
  c.sim.dt = 0.01;
  c.sim.t_final = 150.0;
  return c;
}

}  // namespace

ScenarioConfig preset(const std::string& name) {
  if (name == "example1") {
    ScenarioConfig c = example1_base();
    c.name = "example1";
    c.sim.kind = ScenarioKind::FullState;
    return c;
  }
  if (name == "example2") {
    ScenarioConfig c = example1_base();
    c.name = "example2";
    c.sim.kind = ScenarioKind::BiasedGyro;
    c.bias0 = Vec3(0.01, -0.05, 0.02);
    c.noise.bias_walk_sigma_deg_s2 = 0.01;
    c.observer.mu1 = 0.33;
    c.observer.mu2 = 0.12;
    c.observer.beta1 = 0.75;
    c.observer.b_hat0 = Vec3::Zero();
    c.observer.q_ei0 = c.q0;
    return c;
  }
  if (name == "example3") {
    ScenarioConfig c = example1_base();
    c.name = "example3";
    c.sim.kind = ScenarioKind::AttitudeOnly;
    c.controller.k1 = 1.2;
    c.controller.k2 = 2.4;
    c.controller.k3 = 1.1;
    c.controller.alpha3 = 0.75;
    c.q_ed0 = error_quaternion(c.q_d0, c.q0);
    c.sim.t_final = 200.0;
    return c;
  }
  if (name == "fig3") {
    ScenarioConfig c = example1_base();
    c.name = "fig3";
    c.sim.kind = ScenarioKind::FullState;
    c.q0 = UnitQuaternion(0.0, 1.0, 0.0, 0.0);
    c.omega0 = Vec3::Zero();
    c.omega_d_amplitude = Vec3::Zero();
    c.omega_d_frequency = 0.0;
    c.sim.t_final = 100.0;
    return c;
  }
  throw ConfigError("", "unknown preset '" + name + "' (expected example1, example2, example3 or fig3)");
}

ScenarioConfig without_uncertainties(ScenarioConfig cfg) {
  cfg.noise.attitude_cone_half_angle_deg = 0.0;
  cfg.noise.gyro_sigma_deg_s = 0.0;
  cfg.noise.bias_walk_sigma_deg_s2 = 0.0;
  cfg.disturbance.enabled = false;
  return cfg;
}

// ---------------------------------------------------------------------------
// Trace files
// ---------------------------------------------------------------------------

namespace {

void add_quat(std::vector<std::string>& c, const std::string& base) {
  for (const char* s : {"w", "x", "y", "z"}) {
    c.push_back(base + "_" + s + "_quat");
  }
}

void add_vec(std::vector<std::string>& c, const std::string& base, const std::string& unit) {
  for (const char* s : {"x", "y", "z"}) {
    c.push_back(base + "_" + s + "_" + unit);
  }
}

const char* const kLyapColumns[] = {"v1_j", "v2_stated_rad2_s2", "v2_consistent_rad2_s2",
                                    "v3_stated_j", "v3_consistent_j"};

void put(std::string& line, double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  if (!line.empty()) {
    line += ',';
  }
  line += buf;
}

void put_quat(std::string& line, const UnitQuaternion& q) {
  put(line, q.scalar());
  for (int i = 0; i < 3; ++i) {
    put(line, q.vec()(i));
  }
}

void put_vec(std::string& line, const Vec3& v) {
  for (int i = 0; i < 3; ++i) {
    put(line, v(i));
  }
}

void put_lyap(std::string& line, const LyapunovValues& v) {
  for (double x : {v.v1, v.v2_stated, v.v2_consistent, v.v3_stated, v.v3_consistent}) {
    put(line, x);
  }
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    out.push_back(cell);
  }
  return out;
}

/// Sequential reader over one CSV record.
class Cursor {
 public:
  Cursor(std::vector<std::string> cells, std::size_t line) : cells_(std::move(cells)), line_(line) {}

  const std::string& text() {
    if (pos_ >= cells_.size()) {
      throw std::runtime_error("trace line " + std::to_string(line_) + ": too few columns");
    }
    return cells_[pos_++];
  }
  double num() {
    const std::string& s = text();
    // strtod accepts "nan" and "inf" as written by %.17g.
    char* end = nullptr;
    const double x = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') {
      throw std::runtime_error("trace line " + std::to_string(line_) + ": bad number '" + s + "'");
    }
    return x;
  }
  int integer() { return static_cast<int>(num()); }
  UnitQuaternion quat() {
    const double w = num(), x = num(), y = num(), z = num();
    return UnitQuaternion(w, x, y, z);
  }
  Vec3 vec() {
    const double x = num(), y = num(), z = num();
    return {x, y, z};
  }
  LyapunovValues lyap() {
    LyapunovValues v;
    v.v1 = num();
    v.v2_stated = num();
    v.v2_consistent = num();
    v.v3_stated = num();
    v.v3_consistent = num();
    return v;
  }
  void done() const {
    if (pos_ != cells_.size()) {
      throw std::runtime_error("trace line " + std::to_string(line_) + ": too many columns");
    }
  }

 private:
  std::vector<std::string> cells_;
  std::size_t line_;
  std::size_t pos_{0};
};

std::vector<std::string> event_columns() {
  std::vector<std::string> c = {"t_s",        "step",      "variable",      "h_pre_nd",
                                "h_post_nd",  "h_tilde_pre_nd", "h_tilde_post_nd"};
  for (const char* l : kLyapColumns) {
    c.push_back(std::string(l).insert(2, "_pre"));
  }
  for (const char* l : kLyapColumns) {
    c.push_back(std::string(l).insert(2, "_post"));
  }
  return c;
}

std::string join(const std::vector<std::string>& cols) {
  std::string s;
  for (const auto& c : cols) {
    if (!s.empty()) {
      s += ',';
    }
    s += c;
  }
  return s;
}

}  // namespace

std::vector<std::string> trace_columns() {
  std::vector<std::string> c = {"t_s"};
  add_quat(c, "q");
  add_vec(c, "omega", "rad_s");
  add_quat(c, "q_d");
  add_vec(c, "omega_d", "rad_s");
  add_vec(c, "omega_d_dot", "rad_s2");
  add_quat(c, "q_e");
  add_vec(c, "omega_e", "rad_s");
  c.push_back("h_nd");
  c.push_back("h_tilde_nd");
  add_vec(c, "bias", "rad_s");
  add_vec(c, "b_hat", "rad_s");
  add_quat(c, "q_aux");
  add_quat(c, "q_tilde");
  add_vec(c, "u_cmd", "n_m");
  add_vec(c, "u_applied", "n_m");
  add_vec(c, "disturbance", "n_m");
  for (const char* l : kLyapColumns) {
    c.push_back(l);
  }
  c.push_back("norm_deviation_nd");
  return c;
}

void write_trace_csv(const SimTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write '" + path + "'");
  }
  out << join(trace_columns()) << '\n';
  std::string line;
  for (const TraceRow& r : trace.rows) {
    line.clear();
    put(line, r.t);
    put_quat(line, r.q);
    put_vec(line, r.omega);
    put_quat(line, r.q_d);
    put_vec(line, r.omega_d);
    put_vec(line, r.omega_d_dot);
    put_quat(line, r.q_e);
    put_vec(line, r.omega_e);
    put(line, r.h);
    put(line, r.h_tilde);
    put_vec(line, r.bias);
    put_vec(line, r.b_hat);
    put_quat(line, r.q_aux);
    put_quat(line, r.q_tilde);
    put_vec(line, r.u_cmd);
    put_vec(line, r.u_applied);
    put_vec(line, r.disturbance);
    put_lyap(line, r.lyap);
    put(line, r.norm_deviation);
    out << line << '\n';
  }
}

void write_events_csv(const SimTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write '" + path + "'");
  }
  out << join(event_columns()) << '\n';
  std::string line;
  for (const JumpEvent& e : trace.events) {
    line.clear();
    put(line, e.t);
    line += ',' + std::to_string(e.step) + ',' + to_string(e.which);
    put(line, e.h_pre);
    put(line, e.h_post);
    put(line, e.h_tilde_pre);
    put(line, e.h_tilde_post);
    put_lyap(line, e.v_pre);
    put_lyap(line, e.v_post);
    out << line << '\n';
  }
}

SimTrace read_trace_csv(const std::string& trace_path, const std::string& events_path,
                        ScenarioKind kind) {
  SimTrace trace;
  trace.kind = kind;

  std::ifstream in(trace_path);
  if (!in) {
    throw std::runtime_error("cannot open trace '" + trace_path + "'");
  }
  std::string line;
  if (!std::getline(in, line) || line != join(trace_columns())) {
    throw std::runtime_error("trace '" + trace_path + "' has an unexpected header");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    Cursor c(split(line), line_no);
    TraceRow r;
    r.t = c.num();
    r.q = c.quat();
    r.omega = c.vec();
    r.q_d = c.quat();
    r.omega_d = c.vec();
    r.omega_d_dot = c.vec();
    r.q_e = c.quat();
    r.omega_e = c.vec();
    r.h = c.integer();
    r.h_tilde = c.integer();
    r.bias = c.vec();
    r.b_hat = c.vec();
    r.q_aux = c.quat();
    r.q_tilde = c.quat();
    r.u_cmd = c.vec();
    r.u_applied = c.vec();
    r.disturbance = c.vec();
    r.lyap = c.lyap();
    r.norm_deviation = c.num();
    c.done();
    trace.rows.push_back(r);
  }
  if (trace.rows.size() >= 2) {
    trace.dt = trace.rows[1].t - trace.rows[0].t;
  }

  std::ifstream ev(events_path);
  if (!ev) {
    throw std::runtime_error("cannot open events '" + events_path + "'");
  }
  if (!std::getline(ev, line) || line != join(event_columns())) {
    throw std::runtime_error("events '" + events_path + "' has an unexpected header");
  }
  line_no = 1;
  while (std::getline(ev, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    Cursor c(split(line), line_no);
    JumpEvent e;
    e.t = c.num();
    e.step = static_cast<std::size_t>(std::stoull(c.text()));
    e.which = parse_jump_variable(c.text());
    e.h_pre = c.integer();
    e.h_post = c.integer();
    e.h_tilde_pre = c.integer();
    e.h_tilde_post = c.integer();
    e.v_pre = c.lyap();
    e.v_post = c.lyap();
    c.done();
    trace.events.push_back(e);
  }
  return trace;
}

}  // namespace ftatt
