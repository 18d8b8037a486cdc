#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ftatt/analysis.hpp"
#include "ftatt/hybrid_sim.hpp"

namespace ftatt {

/// Outcome of one scenario run and where its files live.
struct RunSummary {
  std::string name;
  ScenarioKind kind{ScenarioKind::FullState};
  std::uint64_t seed{0};
  ConvergenceReport convergence;
  BoundReport bounds;
  std::string config_path;
  std::string trace_path;
  std::string events_path;
  std::string summary_path;
  /// FNV-1a 64 of the trace and event files, as 16 hex digits.
  std::string digest;

  nlohmann::json to_json() const;
};

/// Reports computed from a trace; identical whether the trace comes from
/// memory or from its files.
struct TraceAnalysis {
  ConvergenceReport convergence;
  BoundReport bounds;
};
TraceAnalysis analyze_trace(const SimTrace& trace, const ScenarioConfig& cfg);

/// Simulates `cfg`, writes config.json, trace.csv, events.csv and
/// summary.json into `out_dir` (created if missing) and returns the summary.
/// SimulationError propagates with its step index.
RunSummary run(const ScenarioConfig& cfg, const std::string& out_dir);

/// Reads back the trace files of a finished run.
SimTrace load_trace(const RunSummary& summary);

/// Sets one numeric field addressed by its dotted JSON path, for example
/// "controller.alpha1_nd" or "sim.dt_s". Array entries use an index
/// suffix: "sensors.bias0_rad_s.1". Throws ConfigError for unknown paths.
ScenarioConfig with_parameter(const ScenarioConfig& cfg, const std::string& path, double value);

/// One run per value, spread over worker threads (0 = hardware
/// concurrency). Run i writes into `out_dir/run_<i>`. Results come back in
/// input order. An empty value list throws std::invalid_argument.
std::vector<RunSummary> sweep(const ScenarioConfig& cfg, const std::string& path,
                              const std::vector<double>& values, const std::string& out_dir,
                              unsigned threads = 0);

/// Noise-free analysis suite for one configuration: Lyapunov audits,
/// bound checks and homogeneity of the matching reduced system. The
/// returned record has a boolean "pass" and a list "failed" of check names.
nlohmann::json verify(const ScenarioConfig& cfg, std::size_t homogeneity_samples = 1000);

std::string fnv1a64_hex(const std::string& bytes);

}  // namespace ftatt
