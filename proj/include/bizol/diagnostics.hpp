#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bizol/rng.hpp"
#include "bizol/scenario.hpp"

namespace bizol {

// Result of one numeric check. Violations are measured-minus-allowed, so
// passed is equivalent to max_violation <= 0 and a negative value is the
// margin. threshold records the dominant allowed bound for context.
struct CheckReport {
  std::string check_name;
  std::int64_t samples = 0;
  double max_violation = 0.0;
  double threshold = 0.0;
  bool passed = false;
  std::string note;
};

// Closed form vs KKT enumeration, profile consistency, and the per-node
// Lipschitz property, over random and breakpoint-straddling prices.
CheckReport check_prop1(const Scenario& s, Rng& rng, int n_trials);

// Mean of m two-point estimates vs the quadrature Jacobian (4 sigma band
// per entry) and the second-moment bound 16 sqrt(2 pi) N^2 L_R^2. m >= 1e4.
CheckReport check_estimator(const Scenario& s, const Eigen::VectorXd& lambda, double delta,
                            Rng& rng, std::int64_t m);

// ||grad of ancillary - approximate hypergradient|| against the bias bound
// (1 + 2 rho N L_R) L_R delta at random box points.
CheckReport check_bias(const Scenario& s, double delta, Rng& rng, int n_points);

// Lipschitz bounds of the smoothed response (L_R) and of its Jacobian
// diagonal (c N L_R / delta) over random and cross-kink pairs.
CheckReport check_smoothed_lipschitz(const Scenario& s, double delta, Rng& rng, int n_pairs,
                                     double c = 1.0);

// Central finite differences of the true objective vs the smoothed
// hypergradient at points far enough from every breakpoint.
CheckReport check_fd_gradient(const Scenario& s, double delta, Rng& rng, int n_points);

// All checks with fixed sample counts and per-check seeded rngs. A nonempty
// filter selects checks whose name contains one of the given substrings;
// per-check seeds do not depend on the selection.
std::vector<CheckReport> run_default_suite(const Scenario& s, double delta, std::uint64_t seed);
std::vector<CheckReport> run_suite(const Scenario& s, double delta, std::uint64_t seed,
                                   const std::vector<std::string>& filter);

std::string reports_to_json(const std::vector<CheckReport>& reports);

}  // namespace bizol
