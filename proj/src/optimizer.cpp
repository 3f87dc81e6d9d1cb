#include "bizol/optimizer.hpp"

#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "bizol/objective.hpp"
#include "bizol/rng.hpp"
#include "bizol/smoothing.hpp"

namespace bizol {

namespace {

void append_double(std::string& row, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  row += buf;
}

void validate_config(const RunConfig& cfg) {
  if (!(cfg.gamma > 0.0 && cfg.gamma <= 1.0)) {
    throw std::invalid_argument("run config: gamma must be in (0, 1]");
  }
  if (!(cfg.delta > 0.0)) throw std::invalid_argument("run config: delta must be > 0");
  if (cfg.iterations < 1) throw std::invalid_argument("run config: iterations must be >= 1");
  if (!(cfg.nonsmooth_tol >= 0.0)) {
    throw std::invalid_argument("run config: nonsmooth_tol must be >= 0");
  }
  if (cfg.gap_check_interval < 0) {
    throw std::invalid_argument("run config: gap_check_interval must be >= 0");
  }
  if (cfg.quad_nodes < 64) throw std::invalid_argument("run config: quad_nodes must be >= 64");
}

}  // namespace

Eigen::VectorXd fw_linear_oracle(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                 const Eigen::VectorXd& g) {
  Eigen::VectorXd z(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    // maximize (z_i)(-g_i): lower when g > 0, upper when g < 0, lower on ties
    z[i] = g[i] < 0.0 ? upper[i] : lower[i];
  }
  return z;
}

Eigen::VectorXd fw_step(const Eigen::VectorXd& lambda, const Eigen::VectorXd& z, double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("fw_step: gamma not in (0, 1]");
  return lambda + gamma * (z - lambda);
}

int count_nonsmooth(const std::vector<ResponseProfile>& profiles,
                    const std::vector<Eigen::VectorXd>& points, double tol) {
  int hits = 0;
  for (const auto& point : points) {
    for (Eigen::Index i = 0; i < point.size(); ++i) {
      if (profiles[static_cast<std::size_t>(i)].breakpoint_distance(point[i]) <= tol) ++hits;
    }
  }
  return hits;
}

int count_nonsmooth(const Scenario& s, const std::vector<Eigen::VectorXd>& points, double tol) {
  return count_nonsmooth(build_profiles(s), points, tol);
}

Trajectory run_bizol(const Scenario& s, const RunConfig& cfg) {
  validate_config(cfg);
  {
    const auto violations = validate_scenario(s);
    if (!violations.empty()) {
      throw std::invalid_argument("run_bizol: invalid scenario: " + violations.front());
    }
  }

  const Eigen::Index n = s.num_nodes();
  const double dim = static_cast<double>(n);
  const auto profiles = build_profiles(s);
  Rng rng(cfg.seed);

  Trajectory traj;
  traj.config = cfg;
  traj.scenario_hash = scenario_hash(s);
  traj.records.reserve(static_cast<std::size_t>(cfg.iterations));

  std::int64_t evals = 0;
  const auto observe = [&](const Eigen::VectorXd& price) {
    ++evals;
    return aggregate_response(s, price);
  };

  Eigen::VectorXd lambda = 0.5 * (s.lambda_lower + s.lambda_upper);
  for (std::int64_t k = 0; k < cfg.iterations; ++k) {
    const Eigen::VectorXd response = observe(lambda);
    const double e = mismatch(s, response);
    const double objective = upper_objective(s, lambda, response);
    const auto parts = partial_gradients(s, lambda, response);

    const Eigen::VectorXd w = sample_sphere(rng, static_cast<int>(n));
    const Eigen::VectorXd probe_plus = lambda + cfg.delta * w;
    const Eigen::VectorXd probe_minus = lambda - cfg.delta * w;
    JacobianEstimate jac;
    jac.scaled_delta =
        (dim / (2.0 * cfg.delta)) * (observe(probe_plus) - observe(probe_minus));
    jac.direction = w;

    const Eigen::VectorXd g = assemble_hypergradient(parts, jac);
    const Eigen::VectorXd z = fw_linear_oracle(s.lambda_lower, s.lambda_upper, g);

    IterationRecord rec;
    rec.iter = k;
    rec.lambda = lambda;
    rec.response = response;
    rec.objective = objective;
    rec.mismatch = e;
    rec.est_gap = (z - lambda).dot(-g);
    if (cfg.gap_check_interval > 0 && k % cfg.gap_check_interval == 0) {
      const auto info =
          smoothed_hypergradient_info(s, profiles, lambda, response, cfg.delta, cfg.quad_nodes);
      rec.exact_gap = fw_gap(s, lambda, info.gradient);
    }
    rec.nonsmooth_hits =
        count_nonsmooth(profiles, {lambda, probe_plus, probe_minus}, cfg.nonsmooth_tol);
    traj.total_nonsmooth += rec.nonsmooth_hits;
    traj.records.push_back(std::move(rec));

    lambda = fw_step(lambda, z, cfg.gamma);
  }
  traj.response_evaluations = evals;
  return traj;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  const Eigen::Index n = traj.records.empty() ? 0 : traj.records.front().lambda.size();
  std::string header = "iter";
  for (Eigen::Index i = 0; i < n; ++i) header += ",lambda_" + std::to_string(i);
  for (Eigen::Index i = 0; i < n; ++i) header += ",R_" + std::to_string(i);
  header += ",objective,mismatch,est_gap,exact_gap,nonsmooth_cum";
  out << header << '\n';

  std::int64_t cumulative = 0;
  std::string row;
  for (const auto& rec : traj.records) {
    row.clear();
    row += std::to_string(rec.iter);
    for (Eigen::Index i = 0; i < n; ++i) {
      row += ',';
      append_double(row, rec.lambda[i]);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      row += ',';
      append_double(row, rec.response[i]);
    }
    row += ',';
    append_double(row, rec.objective);
    row += ',';
    append_double(row, rec.mismatch);
    row += ',';
    append_double(row, rec.est_gap);
    row += ',';
    if (rec.exact_gap) append_double(row, *rec.exact_gap);
    cumulative += rec.nonsmooth_hits;
    row += ',';
    row += std::to_string(cumulative);
    out << row << '\n';
  }
}

}  // namespace bizol
