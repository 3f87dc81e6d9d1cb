#include "bizol/objective.hpp"

#include <cmath>
#include <stdexcept>

namespace bizol {

namespace {

double total_baseline(const Scenario& s) {
  double total = 0.0;
  for (const auto& node : s.nodes) total += node.baseline_load;
  return total;
}

void check_length(const Scenario& s, const Eigen::VectorXd& v, const char* what) {
  if (v.size() != s.num_nodes()) {
    throw std::invalid_argument(std::string(what) + ": expected length " +
                                std::to_string(s.num_nodes()) + ", got " +
                                std::to_string(v.size()));
  }
}

}  // namespace

ObjectiveConstants objective_constants(const Scenario& s) {
  ObjectiveConstants c;
  c.c0 = total_baseline(s) - s.p_target;
  c.rho = s.rho;
  double sup_sq = 0.0;
  for (Eigen::Index i = 0; i < s.lambda_lower.size(); ++i) {
    sup_sq += std::max(s.lambda_lower[i] * s.lambda_lower[i],
                       s.lambda_upper[i] * s.lambda_upper[i]);
  }
  c.lambda_max = std::sqrt(sup_sq);
  c.box_diameter = (s.lambda_upper - s.lambda_lower).norm();
  return c;
}

double mismatch(const Scenario& s, const Eigen::VectorXd& response) {
  check_length(s, response, "mismatch");
  return total_baseline(s) - response.sum() - s.p_target;
}

double upper_objective(const Scenario& s, const Eigen::VectorXd& lambda,
                       const Eigen::VectorXd& response) {
  check_length(s, lambda, "upper_objective");
  check_length(s, response, "upper_objective");
  const double e = mismatch(s, response);
  return lambda.dot(response) + s.rho * e * e;
}

double true_objective(const Scenario& s, const Eigen::VectorXd& lambda) {
  return upper_objective(s, lambda, aggregate_response(s, lambda));
}

PartialGradients partial_gradients(const Scenario& s, const Eigen::VectorXd& lambda,
                                   const Eigen::VectorXd& response) {
  check_length(s, lambda, "partial_gradients");
  check_length(s, response, "partial_gradients");
  PartialGradients parts;
  parts.d_lambda = response;
  const double e = mismatch(s, response);
  parts.d_response =
      lambda - Eigen::VectorXd::Constant(lambda.size(), 2.0 * s.rho * e);
  return parts;
}

Eigen::VectorXd assemble_hypergradient(const PartialGradients& parts,
                                       const JacobianEstimate& jacobian) {
  // (d w^T)^T v = w (d . v): the rank-1 structure avoids the matrix.
  return parts.d_lambda +
         jacobian.direction * jacobian.scaled_delta.dot(parts.d_response);
}

Eigen::VectorXd assemble_hypergradient(const PartialGradients& parts,
                                       const Eigen::VectorXd& jacobian_diag) {
  return parts.d_lambda + jacobian_diag.cwiseProduct(parts.d_response);
}

HypergradientEstimate estimate_hypergradient(const PartialGradients& parts,
                                             const JacobianEstimate& jacobian) {
  HypergradientEstimate est;
  est.partial_lambda = parts.d_lambda;
  est.partial_response = parts.d_response;
  est.jacobian = jacobian;
  est.assembled = assemble_hypergradient(parts, jacobian);
  return est;
}

GradientInfo smoothed_hypergradient_info(const Scenario& s,
                                         const std::vector<ResponseProfile>& profiles,
                                         const Eigen::VectorXd& lambda,
                                         const Eigen::VectorXd& response, double delta,
                                         int quad_nodes) {
  const auto smoothed = smoothed_response_quadrature(profiles, lambda, delta, quad_nodes);
  const auto parts = partial_gradients(s, lambda, response);
  return {assemble_hypergradient(parts, smoothed.jacobian_diag), smoothed.quad_tolerance};
}

Eigen::VectorXd smoothed_hypergradient(const Scenario& s, const Eigen::VectorXd& lambda,
                                       double delta, int quad_nodes) {
  return smoothed_hypergradient_info(s, build_profiles(s), lambda, aggregate_response(s, lambda),
                                     delta, quad_nodes)
      .gradient;
}

GradientInfo ancillary_gradient_info(const Scenario& s,
                                     const std::vector<ResponseProfile>& profiles,
                                     const Eigen::VectorXd& lambda, double delta,
                                     int quad_nodes) {
  const auto smoothed = smoothed_response_quadrature(profiles, lambda, delta, quad_nodes);
  const double e_delta = total_baseline(s) - smoothed.values.sum() - s.p_target;
  const Eigen::VectorXd v =
      lambda - Eigen::VectorXd::Constant(lambda.size(), 2.0 * s.rho * e_delta);
  return {smoothed.values + smoothed.jacobian_diag.cwiseProduct(v), smoothed.quad_tolerance};
}

Eigen::VectorXd ancillary_gradient(const Scenario& s, const Eigen::VectorXd& lambda, double delta,
                                   int quad_nodes) {
  return ancillary_gradient_info(s, build_profiles(s), lambda, delta, quad_nodes).gradient;
}

double ancillary_value(const Scenario& s, const Eigen::VectorXd& lambda, double delta,
                       int quad_nodes) {
  const auto smoothed = smoothed_response_quadrature(s, lambda, delta, quad_nodes);
  const double e_delta = total_baseline(s) - smoothed.values.sum() - s.p_target;
  return lambda.dot(smoothed.values) + s.rho * e_delta * e_delta;
}

double fw_gap(const Scenario& s, const Eigen::VectorXd& lambda, const Eigen::VectorXd& grad) {
  check_length(s, lambda, "fw_gap");
  check_length(s, grad, "fw_gap");
  constexpr double kFeasTol = 1e-9;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda[i] < s.lambda_lower[i] - kFeasTol || lambda[i] > s.lambda_upper[i] + kFeasTol) {
      throw std::invalid_argument("fw_gap: lambda outside the incentive box at component " +
                                  std::to_string(i));
    }
  }
  double gap = 0.0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    const double lo = (s.lambda_lower[i] - lambda[i]) * -grad[i];
    const double hi = (s.lambda_upper[i] - lambda[i]) * -grad[i];
    gap += std::max(lo, hi);
  }
  return gap;
}

}  // namespace bizol
