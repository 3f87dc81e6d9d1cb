#include "bizol/cli.hpp"

#include <fstream>
#include <future>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "bizol/diagnostics.hpp"
#include "bizol/objective.hpp"
#include "bizol/optimizer.hpp"
#include "bizol/oracle.hpp"
#include "bizol/response.hpp"

namespace bizol {

namespace {

constexpr int kSchemaVersion = 1;

std::string hex_u64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Interval interval_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) {
    throw std::runtime_error("config: " + where + " must be [lo, hi]");
  }
  return Interval{j[0].get<double>(), j[1].get<double>()};
}

GenerateParams generate_params_from_json(const nlohmann::json& j) {
  GenerateParams p;
  p.seed = j.value("seed", p.seed);
  p.n_nodes = j.value("n_nodes", p.n_nodes);
  p.n_users = j.value("n_users", p.n_users);
  p.devices_per_user = j.value("devices_per_user", p.devices_per_user);
  if (j.contains("alpha_range")) p.alpha_range = interval_from_json(j["alpha_range"], "alpha_range");
  if (j.contains("capacity_range")) {
    p.capacity_range = interval_from_json(j["capacity_range"], "capacity_range");
  }
  if (j.contains("lambda_box")) p.lambda_box = interval_from_json(j["lambda_box"], "lambda_box");
  p.rho = j.value("rho", p.rho);
  p.target_fraction = j.value("target_fraction", p.target_fraction);
  return p;
}

// One optimizer run written as trajectory CSV + summary JSON.
void write_run_artifacts(const Scenario& s, const RunConfig& run,
                         const std::filesystem::path& csv_path,
                         const std::filesystem::path& summary_path) {
  const Trajectory traj = run_bizol(s, run);
  std::ostringstream csv;
  write_trajectory_csv(traj, csv);
  write_text(csv_path, csv.str());

  const auto& last = traj.records.back();
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["seed"] = run.seed;
  j["iterations"] = run.iterations;
  j["final_objective"] = last.objective;
  j["final_lambda"] = to_std(last.lambda);
  j["final_mismatch"] = last.mismatch;
  j["total_nonsmooth"] = traj.total_nonsmooth;
  j["response_evaluations"] = traj.response_evaluations;
  j["scenario_hash"] = hex_u64(traj.scenario_hash);
  nlohmann::json last_gap;  // null unless a checkpoint ran
  for (const auto& rec : traj.records) {
    if (rec.exact_gap) last_gap = *rec.exact_gap;
  }
  j["last_exact_gap"] = last_gap;
  write_text(summary_path, j.dump(2) + "\n");
}

}  // namespace

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed config " + path.string() + ": " + e.what());
  }
  ExperimentConfig cfg;
  if (j.contains("scenario")) {
    const auto& js = j["scenario"];
    if (js.contains("file")) cfg.scenario_file = std::filesystem::path(js["file"].get<std::string>());
    if (js.contains("generate")) cfg.generate = generate_params_from_json(js["generate"]);
  }
  if (j.contains("run")) {
    const auto& jr = j["run"];
    cfg.run.gamma = jr.value("gamma", cfg.run.gamma);
    cfg.run.delta = jr.value("delta", cfg.run.delta);
    cfg.run.iterations = jr.value("iterations", cfg.run.iterations);
    cfg.run.seed = jr.value("seed", cfg.run.seed);
    cfg.run.nonsmooth_tol = jr.value("nonsmooth_tol", cfg.run.nonsmooth_tol);
    cfg.run.gap_check_interval = jr.value("gap_check_interval", cfg.run.gap_check_interval);
    cfg.run.quad_nodes = jr.value("quad_nodes", cfg.run.quad_nodes);
  }
  if (j.contains("oracle")) {
    const auto& jo = j["oracle"];
    cfg.oracle.cell_cap = jo.value("cell_cap", cfg.oracle.cell_cap);
    cfg.oracle.grid_resolution = jo.value("grid_resolution", cfg.oracle.grid_resolution);
    cfg.oracle.smoothing_c = jo.value("smoothing_c", cfg.oracle.smoothing_c);
  }
  cfg.out_dir = std::filesystem::path(j.value("out_dir", cfg.out_dir.string()));
  if (j.contains("seeds")) cfg.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
  cfg.report_band = j.value("report_band", cfg.report_band);
  if (j.contains("verify_checks")) {
    cfg.verify_checks = j["verify_checks"].get<std::vector<std::string>>();
  }
  return cfg;
}

Scenario resolve_scenario(const ExperimentConfig& cfg) {
  if (cfg.scenario_file && cfg.generate) {
    throw std::runtime_error("config: scenario file and generate params are both set");
  }
  if (cfg.scenario_file) return load_scenario(*cfg.scenario_file);
  if (cfg.generate) return generate_scenario(*cfg.generate);
  throw std::runtime_error("config: no scenario source (set scenario.file or scenario.generate)");
}

int cmd_generate(const ExperimentConfig& cfg, std::ostream& out) {
  if (!cfg.generate) {
    throw std::runtime_error("generate: needs scenario.generate parameters");
  }
  const Scenario s = generate_scenario(*cfg.generate);
  std::filesystem::create_directories(cfg.out_dir);
  const auto path = cfg.out_dir / "scenario.json";
  save_scenario(s, path);

  const auto rc = compute_constants(s);
  const auto oc = objective_constants(s);
  out << "wrote " << path.string() << "\n";
  out << "L_R = " << rc.global_lipschitz << ", R_max = " << rc.response_bound
      << ", D = " << oc.box_diameter << "\n";
  return 0;
}

int cmd_optimize(const ExperimentConfig& cfg, std::ostream& out) {
  const Scenario s = resolve_scenario(cfg);
  std::filesystem::create_directories(cfg.out_dir);

  if (cfg.seeds.empty()) {
    write_run_artifacts(s, cfg.run, cfg.out_dir / "trajectory.csv",
                        cfg.out_dir / "summary.json");
    out << "wrote " << (cfg.out_dir / "trajectory.csv").string() << " and summary.json\n";
    return 0;
  }

  // Seed sweep: independent runs, one worker each, disjoint output files.
  std::vector<std::future<void>> workers;
  workers.reserve(cfg.seeds.size());
  for (const std::uint64_t seed : cfg.seeds) {
    RunConfig run = cfg.run;
    run.seed = seed;
    const auto csv = cfg.out_dir / ("trajectory_seed" + std::to_string(seed) + ".csv");
    const auto summary = cfg.out_dir / ("summary_seed" + std::to_string(seed) + ".json");
    workers.push_back(std::async(std::launch::async, [&s, run, csv, summary] {
      write_run_artifacts(s, run, csv, summary);
    }));
  }
  for (auto& w : workers) w.get();
  out << "wrote " << cfg.seeds.size() << " runs to " << cfg.out_dir.string() << "\n";
  return 0;
}

int cmd_oracle(const ExperimentConfig& cfg, std::ostream& out) {
  const Scenario s = resolve_scenario(cfg);
  std::filesystem::create_directories(cfg.out_dir);

  const GlobalOptimum opt = global_optimum(s, cfg.oracle.cell_cap);
  const TheoryConstants tc = theory_constants(s, cfg.run.delta, cfg.oracle.smoothing_c);
  const Eigen::VectorXd lambda0 = 0.5 * (s.lambda_lower + s.lambda_upper);
  const double delta0 =
      ancillary_value(s, lambda0, cfg.run.delta, cfg.run.quad_nodes) - opt.value;
  const GapBound bound = gap_bound(tc, cfg.run.gamma, cfg.run.iterations, delta0);

  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["lambda_star"] = to_std(opt.lambda_star);
  j["phi_star"] = opt.value;
  j["cells_evaluated"] = opt.cells_evaluated;
  if (cfg.oracle.grid_resolution > 0.0) {
    const GridResult grid = grid_search(s, cfg.oracle.grid_resolution);
    j["grid_value"] = grid.value;
    j["grid_resolution"] = cfg.oracle.grid_resolution;
  } else {
    j["grid_value"] = nullptr;
    j["grid_resolution"] = nullptr;
  }
  j["theory_constants"] = {{"L_R", tc.L_R},
                           {"R_max", tc.R_max},
                           {"D", tc.D},
                           {"Lambda_max", tc.Lambda_max},
                           {"c0", tc.c0},
                           {"M_phi2", tc.M_phi2},
                           {"C_bias", tc.C_bias},
                           {"C_noise", tc.C_noise},
                           {"L_grad_ancillary", tc.L_grad_ancillary},
                           {"c", tc.c},
                           {"delta", tc.delta}};
  j["gap_bound"] = {{"delta0_estimate", bound.delta0_estimate},
                    {"terms", bound.terms},
                    {"total", bound.total}};

  const auto path = cfg.out_dir / "oracle.json";
  write_text(path, j.dump(2) + "\n");
  out << "wrote " << path.string() << " (phi_star = " << opt.value << ")\n";
  return 0;
}

int cmd_report(const ExperimentConfig& cfg, const std::filesystem::path& trajectory_csv,
               const std::filesystem::path& oracle_json, std::ostream& out) {
  // Final objective from the last CSV row.
  const std::string csv = read_text(trajectory_csv);
  std::istringstream lines(csv);
  std::string line;
  std::string header;
  std::string last;
  if (!std::getline(lines, header)) {
    throw std::runtime_error("report: empty trajectory " + trajectory_csv.string());
  }
  while (std::getline(lines, line)) {
    if (!line.empty()) last = line;
  }
  if (last.empty()) throw std::runtime_error("report: no records in " + trajectory_csv.string());

  int objective_column = -1;
  {
    std::istringstream hs(header);
    std::string name;
    for (int col = 0; std::getline(hs, name, ','); ++col) {
      if (name == "objective") objective_column = col;
    }
    if (objective_column < 0) {
      throw std::runtime_error("report: trajectory has no objective column");
    }
  }
  double final_objective = 0.0;
  {
    std::istringstream rs(last);
    std::string item;
    for (int col = 0; std::getline(rs, item, ','); ++col) {
      if (col == objective_column) final_objective = std::stod(item);
    }
  }

  nlohmann::json jo;
  try {
    jo = nlohmann::json::parse(read_text(oracle_json));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("report: malformed oracle file: " + std::string(e.what()));
  }
  if (!jo.contains("phi_star")) throw std::runtime_error("report: oracle file lacks phi_star");
  const double phi_star = jo["phi_star"].get<double>();

  const double relative_gap = (final_objective - phi_star) / phi_star;
  const bool passed = relative_gap <= cfg.report_band;

  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["final_objective"] = final_objective;
  j["phi_star"] = phi_star;
  j["relative_gap"] = relative_gap;
  j["band"] = cfg.report_band;
  j["passed"] = passed;
  std::filesystem::create_directories(cfg.out_dir);
  const auto path = cfg.out_dir / "report.json";
  write_text(path, j.dump(2) + "\n");
  out << "relative gap = " << relative_gap << " (band " << cfg.report_band << ", "
      << (passed ? "pass" : "fail") << ")\n";
  return passed ? 0 : 1;
}

int cmd_verify(const ExperimentConfig& cfg, std::ostream& out) {
  const Scenario s = resolve_scenario(cfg);
  std::filesystem::create_directories(cfg.out_dir);

  const auto reports = run_suite(s, cfg.run.delta, cfg.run.seed, cfg.verify_checks);
  if (reports.empty()) {
    throw std::runtime_error("verify: no check matches the requested names");
  }

  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["checks"] = nlohmann::json::parse(reports_to_json(reports));
  const auto path = cfg.out_dir / "verify.json";
  write_text(path, j.dump(2) + "\n");
  bool all_passed = true;
  for (const auto& r : reports) {
    out << (r.passed ? "[pass] " : "[FAIL] ") << r.check_name << " (samples " << r.samples
        << ", max violation " << r.max_violation << ")\n";
    all_passed = all_passed && r.passed;
  }
  return all_passed ? 0 : 1;
}

}  // namespace bizol
