// Command-line front end: run, sweep, verify and presets.
//
// Results go to stdout as JSON. Failures print a JSON object with
// "status": "error" to stderr and exit nonzero:
//   1  usage or configuration error
//   2  simulation aborted (the record carries the step index)
//   3  verify completed but at least one check failed
//   4  I/O or other runtime error

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ftatt/runner.hpp"
#include "ftatt/scenario_io.hpp"

using nlohmann::json;

namespace {

int fail(int code, const std::string& kind, const std::string& reason, json extra = json::object()) {
  json j = {{"status", "error"}, {"error", kind}, {"reason", reason}};
  j.update(extra);
  std::cerr << j.dump() << '\n';
  return code;
}

ftatt::ScenarioConfig load_with_warnings(const std::string& path) {
  std::vector<std::string> warnings;
  ftatt::ScenarioConfig cfg = ftatt::load_config(path, &warnings);
  for (const std::string& w : warnings) {
    std::cerr << json({{"status", "warning"}, {"reason", w}}).dump() << '\n';
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid finite-time attitude control simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "ftatt_out";
  std::int64_t seed = -1;
  auto* run_cmd = app.add_subcommand("run", "Simulate one scenario and write trace and summary");
  run_cmd->add_option("config", config_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", out_dir, "Output directory");
  run_cmd->add_option("--seed", seed, "Override the noise seed")->check(CLI::NonNegativeNumber);

  std::string param;
  std::vector<double> values;
  unsigned threads = 0;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run one scenario per parameter value");
  sweep_cmd->add_option("config", config_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--param", param, "Dotted parameter path, e.g. controller.alpha1_nd")
      ->required();
  sweep_cmd->add_option("--values", values, "Comma-separated values")->required()->delimiter(',');
  sweep_cmd->add_option("--out", out_dir, "Output directory");
  sweep_cmd->add_option("--threads", threads, "Worker threads (0 = all cores)");

  std::size_t samples = 1000;
  auto* verify_cmd = app.add_subcommand("verify", "Run the noise-free analysis suite");
  verify_cmd->add_option("config", config_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  verify_cmd->add_option("--samples", samples, "Homogeneity sample count");

  std::string preset_name;
  std::string preset_out;
  auto* presets_cmd = app.add_subcommand("presets", "Print or write a built-in scenario");
  presets_cmd->add_option("name", preset_name, "example1, example2, example3 or fig3")->required();
  presets_cmd->add_option("--out", preset_out, "Write to this file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(1, "usage", e.what());
  }

  try {
    if (*run_cmd) {
      ftatt::ScenarioConfig cfg = load_with_warnings(config_path);
      if (seed >= 0) cfg.noise.seed = static_cast<std::uint64_t>(seed);
      const ftatt::RunSummary s = ftatt::run(cfg, out_dir);
      json j = s.to_json();
      j["status"] = "ok";
      std::cout << j.dump(2) << '\n';
    } else if (*sweep_cmd) {
      const ftatt::ScenarioConfig cfg = load_with_warnings(config_path);
      const auto results = ftatt::sweep(cfg, param, values, out_dir, threads);
      json runs = json::array();
      for (std::size_t i = 0; i < results.size(); ++i) {
        json r = results[i].to_json();
        r["value"] = values[i];
        runs.push_back(r);
      }
      std::cout << json({{"status", "ok"}, {"param", param}, {"runs", runs}}).dump(2) << '\n';
    } else if (*verify_cmd) {
      const ftatt::ScenarioConfig cfg = load_with_warnings(config_path);
      json report = ftatt::verify(cfg, samples);
      const bool pass = report["pass"].get<bool>();
      report["status"] = pass ? "ok" : "fail";
      std::cout << report.dump(2) << '\n';
      if (!pass) {
        return fail(3, "verification", "failed checks", {{"failed", report["failed"]}});
      }
    } else if (*presets_cmd) {
      const json j = ftatt::config_to_json(ftatt::preset(preset_name));
      if (preset_out.empty()) {
        std::cout << j.dump(2) << '\n';
      } else {
        ftatt::save_config(ftatt::preset(preset_name), preset_out);
      }
    }
  } catch (const ftatt::ConfigError& e) {
    return fail(1, "config", e.what(), {{"field", e.field()}});
  } catch (const ftatt::SimulationError& e) {
    return fail(2, "simulation", e.what(), {{"step", e.step()}});
  } catch (const std::invalid_argument& e) {
    return fail(1, "invalid_argument", e.what());
  } catch (const std::exception& e) {
    return fail(4, "runtime", e.what());
  }
  return 0;
}
