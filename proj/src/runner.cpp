#include "ftatt/runner.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "ftatt/scenario_io.hpp"

namespace ftatt {

using nlohmann::json;
namespace fs = std::filesystem;

std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json convergence_json(const ConvergenceReport& c) {
  return {{"threshold_nd", c.threshold},
          {"converged", c.converged},
          {"settling_time_s", c.converged ? json(c.settling_time) : json(nullptr)},
          {"steady_state_error_nd", c.steady_state_error},
          {"jump_count", c.jump_count},
          {"max_torque_inf_norm_n_m", c.max_torque_inf_norm}};
}

json bounds_json(const BoundReport& b) {
  json torque = json::array();
  for (const TorqueBound& t : b.torque) {
    torque.push_back(
        {{"name", t.name}, {"bound_n_m", t.bound}, {"observed_n_m", t.observed}, {"pass", t.pass()}});
  }
  json jumps = json::array();
  for (const JumpBound& j : b.jumps) {
    jumps.push_back({{"name", j.name},
                     {"observed", j.observed},
                     {"v0", j.v0},
                     {"sigma", j.sigma},
                     {"bound", number_or_null(j.bound())},
                     {"proven", j.proven},
                     {"pass", j.pass()}});
  }
  return {{"pass", b.pass()},
          {"torque", torque},
          {"jumps", jumps},
          {"gronwall", {{"checked", b.gronwall_checked},
                        {"margin", b.gronwall_checked ? number_or_null(b.gronwall_margin)
                                                      : json(nullptr)}}}};
}

}  // namespace

json RunSummary::to_json() const {
  return {{"name", name},
          {"scenario_kind", to_string(kind)},
          {"seed", seed},
          {"convergence", convergence_json(convergence)},
          {"bounds", bounds_json(bounds)},
          {"files",
           {{"config", config_path},
            {"trace", trace_path},
            {"events", events_path},
            {"summary", summary_path}}},
          {"digest", digest}};
}

TraceAnalysis analyze_trace(const SimTrace& trace, const ScenarioConfig& cfg) {
  return {convergence_metrics(trace), bound_checks(trace, cfg)};
}

RunSummary run(const ScenarioConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  const SimTrace trace = run_scenario(cfg);

  fs::create_directories(out_dir);
  RunSummary s;
  s.name = cfg.name;
  s.kind = cfg.sim.kind;
  s.seed = cfg.noise.seed;
  s.config_path = (fs::path(out_dir) / "config.json").string();
  s.trace_path = (fs::path(out_dir) / "trace.csv").string();
  s.events_path = (fs::path(out_dir) / "events.csv").string();
  s.summary_path = (fs::path(out_dir) / "summary.json").string();

  save_config(cfg, s.config_path);
  write_trace_csv(trace, s.trace_path);
  write_events_csv(trace, s.events_path);
  s.digest = fnv1a64_hex(slurp(s.trace_path) + slurp(s.events_path));

  const TraceAnalysis a = analyze_trace(trace, cfg);
  s.convergence = a.convergence;
  s.bounds = a.bounds;

  std::ofstream out(s.summary_path);
  if (!out) {
    throw std::runtime_error("cannot write '" + s.summary_path + "'");
  }
  out << s.to_json().dump(2) << '\n';
  return s;
}

SimTrace load_trace(const RunSummary& summary) {
  return read_trace_csv(summary.trace_path, summary.events_path, summary.kind);
}

ScenarioConfig with_parameter(const ScenarioConfig& cfg, const std::string& path, double value) {
  json j = config_to_json(cfg);
  json* node = &j;
  std::stringstream ss(path);
  std::string key;
  std::vector<std::string> keys;
  while (std::getline(ss, key, '.')) {
    keys.push_back(key);
  }
  if (keys.empty()) {
    throw ConfigError(path, "empty parameter path");
  }
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const std::string& k = keys[i];
    const bool last = i + 1 == keys.size();
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        std::size_t used = 0;
        idx = std::stoul(k, &used);
        if (used != k.size()) throw std::invalid_argument(k);
      } catch (const std::exception&) {
        throw ConfigError(path, "expected an array index, got '" + k + "'");
      }
      if (idx >= node->size()) {
        throw ConfigError(path, "array index out of range");
      }
      node = &(*node)[idx];
    } else if (node->is_object()) {
      if (!node->contains(k)) {
        throw ConfigError(path, "no such parameter for scenario kind " + to_string(cfg.sim.kind));
      }
      node = &(*node)[k];
    } else {
      throw ConfigError(path, "path descends into a scalar");
    }
    if (last && !node->is_number()) {
      throw ConfigError(path, "parameter is not numeric");
    }
  }
  if (node->is_number_integer()) {
    if (value != std::floor(value)) {
      throw ConfigError(path, "parameter takes integer values");
    }
    *node = static_cast<long long>(value);
  } else {
    *node = value;
  }
  return config_from_json(j);
}

std::vector<RunSummary> sweep(const ScenarioConfig& cfg, const std::string& path,
                              const std::vector<double>& values, const std::string& out_dir,
                              unsigned threads) {
  if (values.empty()) {
    throw std::invalid_argument("sweep: empty value list");
  }
  // Build every configuration up front so bad paths fail before any work.
  std::vector<ScenarioConfig> cfgs;
  cfgs.reserve(values.size());
  for (double v : values) {
    cfgs.push_back(with_parameter(cfg, path, v));
  }

  if (threads == 0) {
    threads = std::max(1u, std::thread::hardware_concurrency());
  }
  threads = std::min<unsigned>(threads, static_cast<unsigned>(values.size()));

  std::vector<RunSummary> results(values.size());
  std::vector<std::exception_ptr> errors(values.size());
  std::mutex next_mutex;
  std::size_t next = 0;
  auto worker = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard<std::mutex> lock(next_mutex);
        if (next >= cfgs.size()) return;
        i = next++;
      }
      try {
        results[i] = run(cfgs[i], (fs::path(out_dir) / ("run_" + std::to_string(i))).string());
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back(worker);
  }
  for (std::thread& t : pool) {
    t.join();
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

json verify(const ScenarioConfig& cfg_in, std::size_t homogeneity_samples) {
  ScenarioConfig cfg = without_uncertainties(cfg_in);
  cfg.saturate = false;
  cfg.sim.feedback = FeedbackMode::Continuous;
  cfg.validate();

  const SimTrace trace = run_scenario(cfg);
  json checks = json::array();
  std::vector<std::string> failed;
  auto record = [&](const std::string& name, bool pass, json detail) {
    detail["name"] = name;
    detail["pass"] = pass;
    checks.push_back(detail);
    if (!pass) failed.push_back(name);
  };

  for (PotentialForm form : {PotentialForm::Stated, PotentialForm::Consistent}) {
    const LyapunovChannel c = primary_channel(cfg.sim.kind, form);
    if (form == PotentialForm::Stated && c == primary_channel(cfg.sim.kind, PotentialForm::Consistent)) {
      continue;
    }
    const std::string tag = to_string(c);
    const FlowAudit fa = audit_flow(trace, c);
    record(tag + " nonincreasing along flows", fa.pass(),
           {{"worst_relative_increase", fa.worst_relative_increase}, {"t_worst_s", fa.t_worst}});
    const JumpAudit ja = audit_jumps(trace, cfg, c);
    record(tag + " decreases by sigma across jumps", ja.pass(),
           {{"jumps", ja.jumps}, {"sigma", ja.sigma}, {"worst_margin", ja.jumps ? json(ja.worst_margin) : json(nullptr)}});
    const DerivativeAudit da = audit_derivative(trace, cfg, c);
    record(tag + " finite-difference rate matches closed form", da.relative() <= 1e-4,
           {{"relative_error", da.relative()}, {"t_worst_s", da.t_worst}});
  }

  const BoundReport b = bound_checks(trace, cfg);
  record("bound checks", b.pass(), bounds_json(b));

  const LogicVar h(cfg.controller.h0);
  const LogicVar ht(cfg.controller.h_tilde0);
  DecomposedSystem sys;
  switch (cfg.sim.kind) {
    case ScenarioKind::FullState:
      sys = full_state_system(cfg.full_state_gains(), cfg.inertia_matrix(), h, cfg.trajectory());
      break;
    case ScenarioKind::BiasedGyro:
      sys = observer_system(cfg.observer_gains(), ht);
      break;
    case ScenarioKind::AttitudeOnly:
      sys = output_feedback_system(cfg.output_gains(), cfg.inertia_matrix(), h, ht,
                                   cfg.trajectory());
      break;
  }
  const int dim = 3 * static_cast<int>(sys.blocks.size());
  const auto samples = sphere_samples(dim, homogeneity_samples, 7u);
  const std::vector<double> eps = {0.5, 1e-1, 1e-2, 1e-3, 1e-4, 3.0};
  const double dev = homogeneity_check(sys.reduced, sys.weights, samples, eps);
  const double dev_stated = homogeneity_check(sys.reduced, sys.stated_weights, samples, eps);
  record(sys.name + " reduced field homogeneous", dev < 1e-9,
         {{"deviation", dev}, {"deviation_with_stated_weights", dev_stated}});

  const auto table = perturbation_vanishing_check(sys.perturbation, sys.weights, samples,
                                                  {1e-1, 1e-2, 1e-3, 1e-4},
                                                  trajectory_time_grid(cfg.trajectory()));
  for (std::size_t i = 0; i < sys.blocks.size(); ++i) {
    record(sys.name + " perturbation " + sys.blocks[i] + " vanishes", table.monotone(i),
           {{"final_max_ratio", table.final_max(i)}});
  }

  return {{"name", cfg.name},
          {"scenario_kind", to_string(cfg.sim.kind)},
          {"pass", failed.empty()},
          {"failed", failed},
          {"convergence", convergence_json(convergence_metrics(trace))},
          {"checks", checks}};
}

}  // namespace ftatt
