// Acceptance suite: one self-contained check per release criterion, each
// printed as a single PASS/FAIL line. Exits with the number of failures.

#include <chrono>
#include <cmath>
#include <limits>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "bizol/cli.hpp"
#include "bizol/diagnostics.hpp"
#include "bizol/objective.hpp"
#include "bizol/optimizer.hpp"
#include "bizol/oracle.hpp"
#include "bizol/response.hpp"
#include "bizol/rng.hpp"
#include "bizol/scenario.hpp"
#include "bizol/smoothing.hpp"

using namespace bizol;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int id, const std::string& label, bool passed, const std::string& detail) {
  std::printf("[%s] criterion %d: %s (%s)\n", passed ? "PASS" : "FAIL", id, label.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!passed) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Scenario experiment_scale(std::uint64_t seed) {
  GenerateParams p;
  p.seed = seed;
  return generate_scenario(p);
}

// The fixed desk-scale experiment instance: all generation defaults.
Scenario reference_instance() { return generate_scenario(GenerateParams{}); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------------------

void criterion_1_closed_form() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(1001);
  double worst = 0.0;
  std::int64_t compared = 0;
  for (int sc = 0; sc < 10; ++sc) {
    const Scenario s = experiment_scale(100 + static_cast<std::uint64_t>(sc));
    std::vector<const UserSpec*> users;
    for (const auto& node : s.nodes) {
      for (const auto& user : node.users) users.push_back(&user);
    }
    for (int t = 0; t < 1000; ++t) {
      const UserSpec& user = *users[rng.next_below(users.size())];
      const double lambda = rng.uniform(-2.0, 8.0);
      const auto oracle = solve_user_problem_oracle(user, lambda);
      for (std::size_t k = 0; k < oracle.size(); ++k) {
        worst = std::max(worst,
                         std::abs(device_response(user.devices[k], lambda) - oracle[k]));
        ++compared;
      }
    }
  }
  const double elapsed = seconds_since(start);
  report(1, "closed-form response equals the KKT oracle", worst <= 1e-12 && elapsed < 5.0,
         "max |diff| = " + fmt(worst) + " over " + std::to_string(compared) + " devices, " +
             fmt(elapsed) + " s");
}

void criterion_2_lipschitz() {
  Rng rng(2002);
  int violations = 0;
  for (int sc = 0; sc < 10; ++sc) {
    const Scenario s = experiment_scale(100 + static_cast<std::uint64_t>(sc));
    const auto constants = compute_constants(s);
    for (int t = 0; t < 1000; ++t) {
      Eigen::VectorXd l1(s.num_nodes());
      Eigen::VectorXd l2(s.num_nodes());
      for (Eigen::Index i = 0; i < l1.size(); ++i) {
        l1[i] = rng.uniform(-2.0, 8.0);
        l2[i] = rng.uniform(-2.0, 8.0);
      }
      const Eigen::VectorXd r1 = aggregate_response(s, l1);
      const Eigen::VectorXd r2 = aggregate_response(s, l2);
      // allow measurement roundoff: the bound is tight on one-segment pairs
      const double ulp = 32.0 * std::numeric_limits<double>::epsilon();
      for (Eigen::Index i = 0; i < l1.size(); ++i) {
        const double bound = constants.per_node_lipschitz[static_cast<std::size_t>(i)] *
                             std::abs(l1[i] - l2[i]);
        if (std::abs(r1[i] - r2[i]) >
            bound + ulp * (std::abs(r1[i]) + std::abs(r2[i]) + bound)) {
          ++violations;
        }
      }
      const double vec_bound = constants.global_lipschitz * (l1 - l2).norm();
      if ((r1 - r2).norm() > vec_bound + ulp * (r1.norm() + r2.norm() + vec_bound)) {
        ++violations;
      }
    }
  }
  report(2, "Lipschitz bounds hold without violation", violations == 0,
         std::to_string(violations) + " violations over 10^4 pairs");
}

void criterion_3_estimator() {
  const auto start = std::chrono::steady_clock::now();
  const Scenario s = reference_instance();
  const Eigen::Index n = s.num_nodes();
  const double l_r = compute_constants(s).global_lipschitz;
  const std::int64_t m = 100000;
  const double band = 4.0 * static_cast<double>(n) * l_r / std::sqrt(static_cast<double>(m));
  const double second_moment_bound =
      16.0 * std::sqrt(2.0 * std::numbers::pi) * static_cast<double>(n * n) * l_r * l_r;

  Rng rng(3003);
  double worst_entry = 0.0;
  double worst_second_moment = 0.0;
  for (int point = 0; point < 10; ++point) {
    Eigen::VectorXd lambda(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      lambda[i] = rng.uniform(s.lambda_lower[i], s.lambda_upper[i]);
    }
    const auto quad = smoothed_response_quadrature(s, lambda, 1e-3);
    Eigen::MatrixXd exact = Eigen::MatrixXd::Zero(n, n);
    exact.diagonal() = quad.jacobian_diag;

    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
    double frob_sq = 0.0;
    for (std::int64_t k = 0; k < m; ++k) {
      const auto est = two_point_jacobian(s, lambda, 1e-3, sample_sphere(rng, static_cast<int>(n)));
      sum.noalias() += est.scaled_delta * est.direction.transpose();
      frob_sq += est.scaled_delta.squaredNorm();
    }
    worst_entry = std::max(
        worst_entry, ((sum / static_cast<double>(m)) - exact).cwiseAbs().maxCoeff() -
                         quad.quad_tolerance);
    worst_second_moment = std::max(worst_second_moment, frob_sq / static_cast<double>(m));
  }
  const double elapsed = seconds_since(start);
  const bool passed =
      worst_entry <= band && worst_second_moment <= second_moment_bound && elapsed < 60.0;
  report(3, "two-point estimator is unbiased with bounded second moment", passed,
         "max entry deviation " + fmt(worst_entry) + " vs band " + fmt(band) +
             ", E||J||_F^2 " + fmt(worst_second_moment) + " vs " + fmt(second_moment_bound) +
             ", " + fmt(elapsed) + " s");
}

void criterion_4_bias() {
  const Scenario s = reference_instance();
  Rng rng(4004);
  const auto r = check_bias(s, 1e-3, rng, 100);
  report(4, "ancillary-vs-approximate gradient bias bound", r.passed,
         "max violation " + fmt(r.max_violation) + " against bound " + fmt(r.threshold));
}

void criterion_5_gradient_fidelity() {
  const Scenario s = reference_instance();
  Rng rng(5005);
  const auto r = check_fd_gradient(s, 1e-3, rng, 100);
  report(5, "hypergradient matches central differences off the kinks",
         r.passed && r.samples == 100,
         "max violation " + fmt(r.max_violation) + " over " + std::to_string(r.samples) +
             " points");
}

void criterion_6_oracle_agreement() {
  bool passed = true;
  std::string detail;

  const Scenario worked = [] {
    Scenario s;
    NodeSpec node;
    node.node_id = "n0";
    node.baseline_load = 2.0;
    UserSpec user;
    user.user_id = "u0";
    user.devices.push_back(DeviceParams{1.0, 1.0, 0.0});
    node.users.push_back(user);
    s.nodes.push_back(node);
    s.p_target = 1.0;
    s.rho = 1.0;
    s.lambda_lower = Eigen::VectorXd::Constant(1, 0.0);
    s.lambda_upper = Eigen::VectorXd::Constant(1, 5.0);
    return s;
  }();
  const auto worked_opt = global_optimum(worked);
  if (std::abs(worked_opt.value - 0.5) > 1e-9 ||
      std::abs(worked_opt.lambda_star[0] - 0.5) > 1e-6) {
    passed = false;
    detail += "worked instance off: phi* = " + fmt(worked_opt.value) + "; ";
  }

  double worst_ratio = 0.0;
  for (int k = 0; k < 20; ++k) {
    GenerateParams p;
    p.seed = 600 + static_cast<std::uint64_t>(k);
    p.n_nodes = k < 10 ? 1 : 2;
    p.n_users = k < 10 ? 2 : 3;
    p.devices_per_user = 2;
    const Scenario s = generate_scenario(p);
    const auto opt = global_optimum(s);
    const auto grid = grid_search(s, 1e-3);
    const auto tc = theory_constants(s, 1e-3);
    const double lipschitz = tc.R_max + tc.L_R * tc.M_phi2;
    const double band = lipschitz * 1e-3 * std::sqrt(static_cast<double>(s.num_nodes()));
    const double diff = std::abs(opt.value - grid.value);
    worst_ratio = std::max(worst_ratio, diff / band);
    if (diff > band || grid.value < opt.value - 1e-9) passed = false;
  }
  detail += "worst |cell - grid| at " + fmt(100.0 * worst_ratio) + "% of the Lipschitz band";
  report(6, "cell enumeration agrees with grid search", passed, detail);
}

// One fixed scenario, ten optimizer seeds varying the direction-sampling
// randomness.
struct EndToEnd {
  Scenario scenario;
  std::vector<Trajectory> trajectories;
  double optimum = 0.0;
};

void criterion_7_end_to_end(const EndToEnd& runs, double slowest_seed_seconds) {
  int within_band = 0;
  bool stabilized = true;
  bool kinks_everywhere = true;
  double worst_gap = 0.0;
  double worst_range = 0.0;
  for (std::size_t k = 0; k < runs.trajectories.size(); ++k) {
    const auto& records = runs.trajectories[k].records;
    const double final_objective = records.back().objective;
    const double gap = (final_objective - runs.optimum) / runs.optimum;
    worst_gap = std::max(worst_gap, gap);
    if (gap <= 0.10) ++within_band;

    double lo = records.back().objective;
    double hi = lo;
    for (std::size_t i = records.size() - 1000; i < records.size(); ++i) {
      lo = std::min(lo, records[i].objective);
      hi = std::max(hi, records[i].objective);
    }
    const double range = (hi - lo) / std::abs(final_objective);
    worst_range = std::max(worst_range, range);
    if (range >= 0.01) stabilized = false;

    if (runs.trajectories[k].total_nonsmooth <= 0) kinks_everywhere = false;
  }
  const bool passed =
      within_band >= 8 && stabilized && kinks_everywhere && slowest_seed_seconds < 120.0;
  report(7, "end-to-end convergence on the reference experiment", passed,
         std::to_string(within_band) + "/10 seeds within 10% (worst gap " + fmt(worst_gap) +
             "), worst last-1000 range " + fmt(100.0 * worst_range) +
             "%, kinks encountered on every seed = " + (kinks_everywhere ? "yes" : "no") +
             ", slowest seed " + fmt(slowest_seed_seconds) + " s");
}

void criterion_8_theorem_bound(const EndToEnd& runs) {
  const Scenario& s = runs.scenario;
  const Trajectory& traj = runs.trajectories.front();

  double gap_sum = 0.0;
  int gap_count = 0;
  for (const auto& rec : traj.records) {
    if (rec.exact_gap) {
      gap_sum += *rec.exact_gap;
      ++gap_count;
    }
  }
  const double averaged_gap = gap_sum / gap_count;

  const auto tc = theory_constants(s, traj.config.delta, 1.0);
  const Eigen::VectorXd lambda0 = 0.5 * (s.lambda_lower + s.lambda_upper);
  const double delta0 = ancillary_value(s, lambda0, traj.config.delta) - runs.optimum;
  const auto bound = gap_bound(tc, traj.config.gamma, traj.config.iterations, delta0);

  report(8, "averaged exact FW gap sits under the theory bound", averaged_gap <= bound.total,
         "time-averaged gap " + fmt(averaged_gap) + " vs bound " + fmt(bound.total) +
             " (loose by construction)");
}

void criterion_9_determinism() {
  const fs::path base = fs::temp_directory_path() / "bizol_acceptance_determinism";
  fs::remove_all(base);
  fs::create_directories(base);
  bool passed = true;
  std::string detail = "byte-identical scenario/trajectory/summary/oracle artifacts";
  std::ostringstream sink;

  try {
    ExperimentConfig gen;
    gen.generate = GenerateParams{};
    gen.generate->seed = 5;
    for (const char* tag : {"g1", "g2"}) {
      gen.out_dir = base / tag;
      cmd_generate(gen, sink);
    }
    if (slurp(base / "g1" / "scenario.json") != slurp(base / "g2" / "scenario.json")) {
      passed = false;
      detail = "scenario.json differs between identical generate runs";
    }

    ExperimentConfig opt;
    opt.scenario_file = base / "g1" / "scenario.json";
    opt.run.iterations = 500;
    opt.run.seed = 3;
    for (const char* tag : {"o1", "o2"}) {
      opt.out_dir = base / tag;
      cmd_optimize(opt, sink);
    }
    if (slurp(base / "o1" / "trajectory.csv") != slurp(base / "o2" / "trajectory.csv") ||
        slurp(base / "o1" / "summary.json") != slurp(base / "o2" / "summary.json")) {
      passed = false;
      detail = "optimize artifacts differ between identical runs";
    }

    ExperimentConfig orc;
    orc.scenario_file = base / "g1" / "scenario.json";
    for (const char* tag : {"r1", "r2"}) {
      orc.out_dir = base / tag;
      cmd_oracle(orc, sink);
    }
    if (slurp(base / "r1" / "oracle.json") != slurp(base / "r2" / "oracle.json")) {
      passed = false;
      detail = "oracle.json differs between identical runs";
    }

    ExperimentConfig rep;
    for (const char* tag : {"p1", "p2"}) {
      rep.out_dir = base / tag;
      cmd_report(rep, base / "o1" / "trajectory.csv", base / "r1" / "oracle.json", sink);
    }
    if (slurp(base / "p1" / "report.json") != slurp(base / "p2" / "report.json")) {
      passed = false;
      detail = "report.json differs between identical runs";
    }

    ExperimentConfig ver;
    ver.scenario_file = base / "g1" / "scenario.json";
    ver.verify_checks = {"prop1", "bias"};
    for (const char* tag : {"v1", "v2"}) {
      ver.out_dir = base / tag;
      cmd_verify(ver, sink);
    }
    if (slurp(base / "v1" / "verify.json") != slurp(base / "v2" / "verify.json")) {
      passed = false;
      detail = "verify.json differs between identical runs";
    }
  } catch (const std::exception& e) {
    passed = false;
    detail = std::string("exception: ") + e.what();
  }
  fs::remove_all(base);
  report(9, "identical configs and seeds give identical bytes", passed, detail);
}

}  // namespace

int main() {
  criterion_1_closed_form();
  criterion_2_lipschitz();
  criterion_3_estimator();
  criterion_4_bias();
  criterion_5_gradient_fidelity();
  criterion_6_oracle_agreement();

  // Criteria 7 and 8 share the ten end-to-end runs on the fixed instance.
  double slowest = 0.0;
  EndToEnd runs;
  runs.scenario = reference_instance();
  runs.optimum = global_optimum(runs.scenario).value;
  for (int k = 0; k < 10; ++k) {
    const auto tk = std::chrono::steady_clock::now();
    RunConfig cfg;
    cfg.gamma = 1e-3;
    cfg.delta = 1e-3;
    cfg.iterations = 20000;
    cfg.seed = static_cast<std::uint64_t>(k);
    runs.trajectories.push_back(run_bizol(runs.scenario, cfg));
    slowest = std::max(slowest, seconds_since(tk));
  }
  criterion_7_end_to_end(runs, slowest);
  criterion_8_theorem_bound(runs);
  criterion_9_determinism();

  std::printf("%d of 9 criteria passed\n", 9 - g_failures);
  return g_failures;
}
