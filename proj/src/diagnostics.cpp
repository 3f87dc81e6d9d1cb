#include "bizol/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "bizol/objective.hpp"
#include "bizol/response.hpp"
#include "bizol/smoothing.hpp"

namespace bizol {

namespace {

constexpr double kVacuousMargin = std::numeric_limits<double>::lowest();

struct DeviceRef {
  std::size_t node = 0;
  const UserSpec* user = nullptr;
};

std::vector<DeviceRef> all_users(const Scenario& s) {
  std::vector<DeviceRef> refs;
  for (std::size_t i = 0; i < s.nodes.size(); ++i) {
    for (const auto& user : s.nodes[i].users) refs.push_back({i, &user});
  }
  return refs;
}

// Price range covering the box and every kink, with slack on both sides.
std::pair<double, double> price_range(const Scenario& s,
                                      const std::vector<ResponseProfile>& profiles) {
  double lo = s.lambda_lower.size() > 0 ? s.lambda_lower.minCoeff() : 0.0;
  double hi = s.lambda_upper.size() > 0 ? s.lambda_upper.maxCoeff() : 1.0;
  for (const auto& p : profiles) {
    if (!p.breakpoints.empty()) {
      lo = std::min(lo, p.breakpoints.front());
      hi = std::max(hi, p.breakpoints.back());
    }
  }
  return {lo - 1.0, hi + 1.0};
}

Eigen::VectorXd random_box_point(const Scenario& s, Rng& rng) {
  Eigen::VectorXd lambda(s.num_nodes());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    lambda[i] = rng.uniform(s.lambda_lower[i], s.lambda_upper[i]);
  }
  return lambda;
}

// The Lipschitz inequality is tight on single-segment pairs, so the rounded
// measurement can land a few ulps on either side; allow roundoff at the
// operands' scale without masking real violations.
double roundoff_allowance(double magnitude) {
  return 32.0 * std::numeric_limits<double>::epsilon() * magnitude;
}

}  // namespace

CheckReport check_prop1(const Scenario& s, Rng& rng, int n_trials) {
  CheckReport report;
  report.check_name = "prop1_response";
  report.threshold = 1e-12;

  const auto users = all_users(s);
  const auto profiles = build_profiles(s);
  const auto constants = compute_constants(s);
  std::vector<std::size_t> nodes_with_devices;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    if (!profiles[i].breakpoints.empty()) nodes_with_devices.push_back(i);
  }
  if (users.empty() || nodes_with_devices.empty()) {
    report.samples = 0;
    report.max_violation = kVacuousMargin;
    report.passed = true;
    report.note = "no devices; vacuously true";
    return report;
  }

  const auto [lo, hi] = price_range(s, profiles);
  double max_violation = kVacuousMargin;
  std::int64_t samples = 0;

  for (int trial = 0; trial < n_trials; ++trial) {
    // Closed form vs the KKT-candidate enumeration on a random user.
    {
      const auto& ref = users[rng.next_below(users.size())];
      const double lambda = rng.uniform(lo, hi);
      const auto oracle = solve_user_problem_oracle(*ref.user, lambda);
      for (std::size_t k = 0; k < oracle.size(); ++k) {
        const double closed = device_response(ref.user->devices[k], lambda);
        max_violation = std::max(max_violation, std::abs(closed - oracle[k]) - 1e-12);
        ++samples;
      }
    }
    // Per-node Lipschitz on a random pair.
    {
      const std::size_t i = nodes_with_devices[rng.next_below(nodes_with_devices.size())];
      const double l1 = rng.uniform(lo, hi);
      const double l2 = rng.uniform(lo, hi);
      const double r1 = nodal_response(s.nodes[i], l1);
      const double r2 = nodal_response(s.nodes[i], l2);
      const double bound = constants.per_node_lipschitz[i] * std::abs(l1 - l2);
      max_violation =
          std::max(max_violation, std::abs(r1 - r2) - bound -
                                      roundoff_allowance(std::abs(r1) + std::abs(r2) + bound));
      ++samples;
    }
    // Same bound on a pair straddling a random breakpoint.
    {
      const std::size_t i = nodes_with_devices[rng.next_below(nodes_with_devices.size())];
      const auto& bps = profiles[i].breakpoints;
      const double b = bps[rng.next_below(bps.size())];
      const double h = 1e-9 + 0.1 * rng.uniform();
      const double r1 = nodal_response(s.nodes[i], b - h);
      const double r2 = nodal_response(s.nodes[i], b + h);
      const double bound = constants.per_node_lipschitz[i] * 2.0 * h;
      max_violation =
          std::max(max_violation, std::abs(r1 - r2) - bound -
                                      roundoff_allowance(std::abs(r1) + std::abs(r2) + bound));
      ++samples;
    }
    // Profile evaluation agrees with the direct sum.
    {
      const std::size_t i = nodes_with_devices[rng.next_below(nodes_with_devices.size())];
      const double lambda = rng.uniform(lo, hi);
      const double diff = std::abs(profiles[i](lambda) - nodal_response(s.nodes[i], lambda));
      max_violation = std::max(max_violation, diff - 1e-12);
      ++samples;
    }
  }

  report.samples = samples;
  report.max_violation = max_violation;
  report.passed = max_violation <= 0.0;
  return report;
}

CheckReport check_estimator(const Scenario& s, const Eigen::VectorXd& lambda, double delta,
                            Rng& rng, std::int64_t m) {
  if (m < 10000) throw std::invalid_argument("check_estimator: m must be >= 1e4");
  CheckReport report;
  report.check_name = "estimator_moments";
  report.samples = m;

  const Eigen::Index n = s.num_nodes();
  const double dim = static_cast<double>(n);
  const double l_r = compute_constants(s).global_lipschitz;
  const auto smoothed = smoothed_response_quadrature(s, lambda, delta);
  Eigen::MatrixXd exact = Eigen::MatrixXd::Zero(n, n);
  exact.diagonal() = smoothed.jacobian_diag;

  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
  double frob_sq_sum = 0.0;
  for (std::int64_t k = 0; k < m; ++k) {
    const Eigen::VectorXd w = sample_sphere(rng, static_cast<int>(n));
    const auto est = two_point_jacobian(s, lambda, delta, w);
    sum.noalias() += est.scaled_delta * est.direction.transpose();
    frob_sq_sum += est.scaled_delta.squaredNorm() * est.direction.squaredNorm();
  }
  const Eigen::MatrixXd mean = sum / static_cast<double>(m);

  const double band = 4.0 * dim * l_r / std::sqrt(static_cast<double>(m));
  report.threshold = band;
  const double mean_violation =
      (mean - exact).cwiseAbs().maxCoeff() - band - smoothed.quad_tolerance;

  const double second_moment_bound =
      16.0 * std::sqrt(2.0 * std::numbers::pi) * dim * dim * l_r * l_r;
  const double variance_violation = frob_sq_sum / static_cast<double>(m) - second_moment_bound;

  report.max_violation = std::max(mean_violation, variance_violation);
  report.passed = report.max_violation <= 0.0;
  report.note = "second moment margin " + std::to_string(-variance_violation);
  return report;
}

CheckReport check_bias(const Scenario& s, double delta, Rng& rng, int n_points) {
  CheckReport report;
  report.check_name = "bias_bound";
  report.samples = n_points;

  const auto profiles = build_profiles(s);
  const double l_r = compute_constants(s).global_lipschitz;
  const double n = static_cast<double>(s.num_nodes());
  const double bound = (1.0 + 2.0 * s.rho * n * l_r) * l_r * delta;
  report.threshold = bound;

  double max_violation = kVacuousMargin;
  for (int k = 0; k < n_points; ++k) {
    const Eigen::VectorXd lambda = random_box_point(s, rng);
    const auto smoothed_info = smoothed_hypergradient_info(
        s, profiles, lambda, aggregate_response(s, lambda), delta);
    const auto ancillary_info = ancillary_gradient_info(s, profiles, lambda, delta);
    const double qtol = std::max(smoothed_info.quad_tolerance, ancillary_info.quad_tolerance);
    const double diff = (ancillary_info.gradient - smoothed_info.gradient).norm();
    max_violation = std::max(max_violation, diff - bound - 10.0 * qtol);
  }
  report.max_violation = max_violation;
  report.passed = max_violation <= 0.0;
  return report;
}

CheckReport check_smoothed_lipschitz(const Scenario& s, double delta, Rng& rng, int n_pairs,
                                     double c) {
  CheckReport report;
  report.check_name = "smoothed_lipschitz";
  report.samples = n_pairs;

  const auto profiles = build_profiles(s);
  const double l_r = compute_constants(s).global_lipschitz;
  const double n = static_cast<double>(s.num_nodes());
  const double jac_constant = c * n * l_r / delta;
  report.threshold = jac_constant;
  report.note = "jacobian bound evaluated with c=" + std::to_string(c) +
                " (universal constant, reported not asserted tight)";

  std::vector<std::size_t> kinked;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    if (!profiles[i].breakpoints.empty()) kinked.push_back(i);
  }

  double max_violation = kVacuousMargin;
  for (int k = 0; k < n_pairs; ++k) {
    Eigen::VectorXd l1 = random_box_point(s, rng);
    Eigen::VectorXd l2;
    if (k % 4 == 3 && !kinked.empty()) {
      // Tight pair straddling a kink in one coordinate.
      const std::size_t i = kinked[rng.next_below(kinked.size())];
      const auto& bps = profiles[i].breakpoints;
      const double b = bps[rng.next_below(bps.size())];
      const double h = delta * (0.001 + 2.0 * rng.uniform());
      l2 = l1;
      l1[static_cast<Eigen::Index>(i)] = b - h;
      l2[static_cast<Eigen::Index>(i)] = b + h;
    } else {
      l2 = random_box_point(s, rng);
    }
    const auto s1 = smoothed_response_quadrature(profiles, l1, delta);
    const auto s2 = smoothed_response_quadrature(profiles, l2, delta);
    const double slack = 2.0 * (s1.quad_tolerance + s2.quad_tolerance);
    const double dist = (l1 - l2).norm();
    const double value_violation = (s1.values - s2.values).norm() - l_r * dist - slack;
    const double jac_violation =
        (s1.jacobian_diag - s2.jacobian_diag).norm() - jac_constant * dist - slack;
    max_violation = std::max({max_violation, value_violation, jac_violation});
  }
  report.max_violation = max_violation;
  report.passed = max_violation <= 0.0;
  return report;
}

CheckReport check_fd_gradient(const Scenario& s, double delta, Rng& rng, int n_points) {
  CheckReport report;
  report.check_name = "fd_gradient";
  report.threshold = 1e-5;

  const auto profiles = build_profiles(s);
  const double margin = 2.0 * delta + 1e-4;
  constexpr double kStep = 1e-7;

  double max_violation = kVacuousMargin;
  std::int64_t accepted = 0;
  for (int k = 0; k < n_points; ++k) {
    Eigen::VectorXd lambda(s.num_nodes());
    bool ok = true;
    for (Eigen::Index i = 0; i < lambda.size() && ok; ++i) {
      bool found = false;
      for (int attempt = 0; attempt < 10000; ++attempt) {
        const double x = rng.uniform(s.lambda_lower[i], s.lambda_upper[i]);
        if (profiles[static_cast<std::size_t>(i)].breakpoint_distance(x) >= margin) {
          lambda[i] = x;
          found = true;
          break;
        }
      }
      ok = found;
    }
    if (!ok) continue;  // breakpoints too dense along some coordinate
    ++accepted;

    const auto info = smoothed_hypergradient_info(s, profiles, lambda,
                                                  aggregate_response(s, lambda), delta);
    Eigen::VectorXd fd(lambda.size());
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
      Eigen::VectorXd plus = lambda;
      Eigen::VectorXd minus = lambda;
      plus[i] += kStep;
      minus[i] -= kStep;
      fd[i] = (true_objective(s, plus) - true_objective(s, minus)) / (2.0 * kStep);
    }
    const double violation =
        (fd - info.gradient).norm() - 1e-5 * (1.0 + info.gradient.norm());
    max_violation = std::max(max_violation, violation);
  }
  report.samples = accepted;
  report.max_violation = max_violation;
  report.passed = max_violation <= 0.0;
  if (accepted < n_points) {
    report.note = "skipped " + std::to_string(n_points - accepted) +
                  " points (no coordinate far enough from breakpoints)";
  }
  return report;
}

std::vector<CheckReport> run_suite(const Scenario& s, double delta, std::uint64_t seed,
                                   const std::vector<std::string>& filter) {
  const auto enabled = [&](const std::string& name) {
    if (filter.empty()) return true;
    for (const auto& wanted : filter) {
      if (name.find(wanted) != std::string::npos) return true;
    }
    return false;
  };

  std::vector<CheckReport> reports;
  if (enabled("prop1_response")) {
    Rng rng(seed + 1);
    reports.push_back(check_prop1(s, rng, 1000));
  }
  if (enabled("estimator_moments")) {
    Rng rng(seed + 2);
    const Eigen::VectorXd lambda = random_box_point(s, rng);
    reports.push_back(check_estimator(s, lambda, delta, rng, 100000));
  }
  if (enabled("bias_bound")) {
    Rng rng(seed + 3);
    reports.push_back(check_bias(s, delta, rng, 100));
  }
  if (enabled("smoothed_lipschitz")) {
    Rng rng(seed + 4);
    reports.push_back(check_smoothed_lipschitz(s, delta, rng, 100));
  }
  if (enabled("fd_gradient")) {
    Rng rng(seed + 5);
    reports.push_back(check_fd_gradient(s, delta, rng, 100));
  }
  return reports;
}

std::vector<CheckReport> run_default_suite(const Scenario& s, double delta, std::uint64_t seed) {
  return run_suite(s, delta, seed, {});
}

std::string reports_to_json(const std::vector<CheckReport>& reports) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : reports) {
    nlohmann::json jr;
    jr["check_name"] = r.check_name;
    jr["samples"] = r.samples;
    jr["max_violation"] = r.max_violation;
    jr["threshold"] = r.threshold;
    jr["passed"] = r.passed;
    if (!r.note.empty()) jr["note"] = r.note;
    j.push_back(std::move(jr));
  }
  return j.dump(2) + "\n";
}

}  // namespace bizol
