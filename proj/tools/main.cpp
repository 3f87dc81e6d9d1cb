#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bizol/cli.hpp"

namespace {

// Pre-scan for --config so the flag defaults below come from the file and
// explicit flags win over it.
std::optional<std::string> find_config_arg(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) return std::string(argv[i + 1]);
    if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
  }
  return std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
  bizol::ExperimentConfig cfg;
  try {
    if (const auto config_path = find_config_arg(argc, argv)) {
      cfg = bizol::load_experiment_config(*config_path);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  CLI::App app{"Incentive-based load curtailment: scenario generation, Bi-ZOL optimization,"
               " exact oracle, and numeric verification"};
  app.require_subcommand(1);
  std::string config_placeholder;
  app.add_option("--config", config_placeholder, "experiment config JSON (flags override it)");

  bizol::GenerateParams gen = cfg.generate.value_or(bizol::GenerateParams{});
  std::string out_dir = cfg.out_dir.string();
  std::string scenario_file =
      cfg.scenario_file ? cfg.scenario_file->string() : std::string();

  auto* cmd_gen = app.add_subcommand("generate", "draw a scenario and write scenario.json");
  cmd_gen->add_option("--seed", gen.seed, "generation seed");
  cmd_gen->add_option("--nodes", gen.n_nodes, "number of nodes");
  cmd_gen->add_option("--users", gen.n_users, "number of users");
  cmd_gen->add_option("--devices", gen.devices_per_user, "devices per user");
  cmd_gen->add_option("--alpha-min", gen.alpha_range.lo, "sensitivity range lower bound");
  cmd_gen->add_option("--alpha-max", gen.alpha_range.hi, "sensitivity range upper bound");
  cmd_gen->add_option("--capacity-min", gen.capacity_range.lo, "capacity range lower bound");
  cmd_gen->add_option("--capacity-max", gen.capacity_range.hi, "capacity range upper bound");
  cmd_gen->add_option("--lambda-min", gen.lambda_box.lo, "incentive box lower bound");
  cmd_gen->add_option("--lambda-max", gen.lambda_box.hi, "incentive box upper bound");
  cmd_gen->add_option("--rho", gen.rho, "mismatch penalty");
  cmd_gen->add_option("--target-fraction", gen.target_fraction,
                      "target as a fraction of total baseline");
  cmd_gen->add_option("--out", out_dir, "output directory");

  std::vector<std::uint64_t> seeds = cfg.seeds;
  auto* cmd_opt = app.add_subcommand("optimize", "run Bi-ZOL, write trajectory.csv + summary.json");
  cmd_opt->add_option("--scenario", scenario_file, "scenario JSON path");
  cmd_opt->add_option("--gamma", cfg.run.gamma, "FW stepsize");
  cmd_opt->add_option("--delta", cfg.run.delta, "smoothing radius");
  cmd_opt->add_option("--iterations", cfg.run.iterations, "iteration count");
  cmd_opt->add_option("--seed", cfg.run.seed, "run seed");
  cmd_opt->add_option("--seeds", seeds, "seed sweep (parallel runs)");
  cmd_opt->add_option("--nonsmooth-tol", cfg.run.nonsmooth_tol, "kink proximity tolerance");
  cmd_opt->add_option("--gap-interval", cfg.run.gap_check_interval,
                      "exact-gap checkpoint cadence (0 disables)");
  cmd_opt->add_option("--out", out_dir, "output directory");

  auto* cmd_orc = app.add_subcommand("oracle", "exact global optimum, write oracle.json");
  cmd_orc->add_option("--scenario", scenario_file, "scenario JSON path");
  cmd_orc->add_option("--cell-cap", cfg.oracle.cell_cap, "max number of affine cells");
  cmd_orc->add_option("--grid-resolution", cfg.oracle.grid_resolution,
                      "grid cross-check resolution (0 disables)");
  cmd_orc->add_option("--smoothing-c", cfg.oracle.smoothing_c, "universal smoothing constant");
  cmd_orc->add_option("--delta", cfg.run.delta, "smoothing radius for the bound");
  cmd_orc->add_option("--gamma", cfg.run.gamma, "stepsize for the bound");
  cmd_orc->add_option("--iterations", cfg.run.iterations, "iteration count for the bound");
  cmd_orc->add_option("--out", out_dir, "output directory");

  std::string trajectory_path = "trajectory.csv";
  std::string oracle_path = "oracle.json";
  auto* cmd_rep = app.add_subcommand("report", "compare a run against the oracle");
  cmd_rep->add_option("--trajectory", trajectory_path, "trajectory CSV path");
  cmd_rep->add_option("--oracle", oracle_path, "oracle JSON path");
  cmd_rep->add_option("--band", cfg.report_band, "relative gap pass band");
  cmd_rep->add_option("--out", out_dir, "output directory");

  auto* cmd_ver = app.add_subcommand("verify", "run the numeric check suite, write verify.json");
  cmd_ver->add_option("--scenario", scenario_file, "scenario JSON path");
  cmd_ver->add_option("--checks", cfg.verify_checks, "run only checks matching these names");
  cmd_ver->add_option("--delta", cfg.run.delta, "smoothing radius");
  cmd_ver->add_option("--seed", cfg.run.seed, "suite seed");
  cmd_ver->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  cfg.out_dir = out_dir;
  cfg.seeds = seeds;
  if (!scenario_file.empty()) {
    cfg.scenario_file = scenario_file;
    cfg.generate.reset();
  }

  try {
    if (cmd_gen->parsed()) {
      cfg.generate = gen;
      cfg.scenario_file.reset();
      return bizol::cmd_generate(cfg, std::cout);
    }
    if (cmd_opt->parsed()) return bizol::cmd_optimize(cfg, std::cout);
    if (cmd_orc->parsed()) return bizol::cmd_oracle(cfg, std::cout);
    if (cmd_rep->parsed()) return bizol::cmd_report(cfg, trajectory_path, oracle_path, std::cout);
    if (cmd_ver->parsed()) return bizol::cmd_verify(cfg, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
