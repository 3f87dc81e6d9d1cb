#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "bizol/response.hpp"
#include "bizol/scenario.hpp"

namespace bizol {

struct IterationRecord {
  std::int64_t iter = 0;
  Eigen::VectorXd lambda;    // iterate before the update
  Eigen::VectorXd response;  // observed R(lambda)
  double objective = 0.0;    // phi(lambda, R)
  double mismatch = 0.0;
  double est_gap = 0.0;                // <z - lambda, -g_hat>, g_hat stochastic
  std::optional<double> exact_gap;     // quadrature FW gap at checkpoints
  int nonsmooth_hits = 0;              // probe components near a breakpoint
};

struct Trajectory {
  std::vector<IterationRecord> records;
  RunConfig config;
  std::uint64_t scenario_hash = 0;
  std::int64_t total_nonsmooth = 0;
  std::int64_t response_evaluations = 0;  // exactly 3 per iteration
};

// argmax_{z in box} <z, -g> component-wise: lower when g > 0, upper when
// g < 0, lower on ties.
Eigen::VectorXd fw_linear_oracle(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                 const Eigen::VectorXd& g);

// lambda + gamma (z - lambda); stays in the box without projection.
Eigen::VectorXd fw_step(const Eigen::VectorXd& lambda, const Eigen::VectorXd& z, double gamma);

// Number of (point, component) pairs within tol of a breakpoint of the
// component's node. Proximity rule: straddling a kink does not count.
int count_nonsmooth(const std::vector<ResponseProfile>& profiles,
                    const std::vector<Eigen::VectorXd>& points, double tol);
int count_nonsmooth(const Scenario& s, const std::vector<Eigen::VectorXd>& points, double tol);

// The Bi-ZOL loop: observe R(lambda_k), take exact partials, probe
// lambda_k +- delta w with one random direction, assemble the hypergradient
// estimate, and take a Frank-Wolfe step. Three response evaluations per
// iteration; deterministic given (scenario, config).
Trajectory run_bizol(const Scenario& s, const RunConfig& cfg);

// CSV schema: iter, lambda_0.., R_0.., objective, mismatch, est_gap,
// exact_gap (empty between checkpoints), nonsmooth_cum. 17 significant
// digits throughout.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);

}  // namespace bizol
