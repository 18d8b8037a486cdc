#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ftatt/hybrid_sim.hpp"

namespace ftatt {

/// Invalid configuration content. `field()` is the dotted path of the
/// offending entry (empty when the problem is not tied to one field).
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::invalid_argument(field.empty() ? what : field + ": " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Scenario configuration as JSON. Every physical quantity carries its unit
/// in the key (`_s`, `_rad_s`, `_n_m`, `_deg`, ...); dimensionless numbers
/// end in `_nd` and quaternions (scalar first) in `_quat`.
nlohmann::json config_to_json(const ScenarioConfig& cfg);

/// Parses and validates. Unknown keys, wrong types, violated gain couplings
/// and out-of-range values throw ConfigError. Quaternions whose norm is off
/// by more than 1e-9 are normalized and reported through `warnings`.
ScenarioConfig config_from_json(const nlohmann::json& j,
                                std::vector<std::string>* warnings = nullptr);

ScenarioConfig load_config(const std::string& path, std::vector<std::string>* warnings = nullptr);
void save_config(const ScenarioConfig& cfg, const std::string& path);

/// Built-in scenarios: example1, example2, example3, fig3.
std::vector<std::string> preset_names();
ScenarioConfig preset(const std::string& name);

/// Same scenario with attitude/gyro noise, bias walk and disturbance
/// switched off. A constant initial bias is kept.
ScenarioConfig without_uncertainties(ScenarioConfig cfg);

/// Trace as delimited text: one header row naming every column with its
/// unit, then one row per sample at full double precision.
void write_trace_csv(const SimTrace& trace, const std::string& path);
/// Reads a trace written by write_trace_csv together with its events file.
SimTrace read_trace_csv(const std::string& trace_path, const std::string& events_path,
                        ScenarioKind kind);

void write_events_csv(const SimTrace& trace, const std::string& path);

std::vector<std::string> trace_columns();

}  // namespace ftatt
