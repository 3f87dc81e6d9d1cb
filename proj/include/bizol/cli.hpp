#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bizol/scenario.hpp"

namespace bizol {

struct OracleSettings {
  std::int64_t cell_cap = 1000000;
  double grid_resolution = 0.0;  // 0 disables the grid cross-check
  double smoothing_c = 1.0;
};

// One experiment: a scenario source (exactly one of file/generate), the run
// parameters, oracle settings, and output location. Loadable from JSON with
// flag overrides applied by the CLI front end.
struct ExperimentConfig {
  std::optional<std::filesystem::path> scenario_file;
  std::optional<GenerateParams> generate;
  RunConfig run;
  OracleSettings oracle;
  std::filesystem::path out_dir = ".";
  std::vector<std::uint64_t> seeds;  // optional sweep for optimize
  double report_band = 0.10;
  std::vector<std::string> verify_checks;  // empty = all
};

ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Materializes the configured scenario (loads or generates). Throws when
// zero or two sources are configured.
Scenario resolve_scenario(const ExperimentConfig& cfg);

// Exit codes: 0 success, 1 check failure, 2 usage/config error (the latter
// raised as exceptions and mapped by the caller).
int cmd_generate(const ExperimentConfig& cfg, std::ostream& out);
int cmd_optimize(const ExperimentConfig& cfg, std::ostream& out);
int cmd_oracle(const ExperimentConfig& cfg, std::ostream& out);
int cmd_report(const ExperimentConfig& cfg, const std::filesystem::path& trajectory_csv,
               const std::filesystem::path& oracle_json, std::ostream& out);
int cmd_verify(const ExperimentConfig& cfg, std::ostream& out);

}  // namespace bizol
