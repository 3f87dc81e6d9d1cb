#pragma once

#include <vector>

#include <Eigen/Core>

#include "bizol/response.hpp"
#include "bizol/scenario.hpp"
#include "bizol/smoothing.hpp"

namespace bizol {

struct ObjectiveConstants {
  double c0 = 0.0;            // total baseline minus target
  double rho = 0.0;
  double lambda_max = 0.0;    // sup of ||lambda||_2 over the box
  double box_diameter = 0.0;  // ||upper - lower||_2
};

ObjectiveConstants objective_constants(const Scenario& s);

// E = sum_i (P^b_i - R_i) - P^target.
double mismatch(const Scenario& s, const Eigen::VectorXd& response);

// phi(lambda, R) = lambda . R + rho * E^2.
double upper_objective(const Scenario& s, const Eigen::VectorXd& lambda,
                       const Eigen::VectorXd& response);

// phi composed with the actual response map.
double true_objective(const Scenario& s, const Eigen::VectorXd& lambda);

struct PartialGradients {
  Eigen::VectorXd d_lambda;    // = R
  Eigen::VectorXd d_response;  // = lambda - 2 rho E * 1
};

PartialGradients partial_gradients(const Scenario& s, const Eigen::VectorXd& lambda,
                                   const Eigen::VectorXd& response);

// g = d_lambda + J^T d_response. The rank-1 overload never materializes the
// matrix; the diagonal overload takes the quadrature Jacobian diagonal.
Eigen::VectorXd assemble_hypergradient(const PartialGradients& parts,
                                       const JacobianEstimate& jacobian);
Eigen::VectorXd assemble_hypergradient(const PartialGradients& parts,
                                       const Eigen::VectorXd& jacobian_diag);

// Per-iteration hypergradient bundle kept for logging/inspection.
struct HypergradientEstimate {
  Eigen::VectorXd partial_lambda;
  Eigen::VectorXd partial_response;
  JacobianEstimate jacobian;
  Eigen::VectorXd assembled;
};

HypergradientEstimate estimate_hypergradient(const PartialGradients& parts,
                                             const JacobianEstimate& jacobian);

struct GradientInfo {
  Eigen::VectorXd gradient;
  double quad_tolerance = 0.0;
};

// Hypergradient with exact partials at (lambda, R(lambda)) and the smoothed
// Jacobian from quadrature.
Eigen::VectorXd smoothed_hypergradient(const Scenario& s, const Eigen::VectorXd& lambda,
                                       double delta, int quad_nodes = 128);
GradientInfo smoothed_hypergradient_info(const Scenario& s,
                                         const std::vector<ResponseProfile>& profiles,
                                         const Eigen::VectorXd& lambda,
                                         const Eigen::VectorXd& response, double delta,
                                         int quad_nodes = 128);

// Gradient of the ancillary objective phi(lambda, R_delta(lambda)):
// R_delta + JR_delta^T (lambda - 2 rho E_delta * 1).
Eigen::VectorXd ancillary_gradient(const Scenario& s, const Eigen::VectorXd& lambda, double delta,
                                   int quad_nodes = 128);
GradientInfo ancillary_gradient_info(const Scenario& s,
                                     const std::vector<ResponseProfile>& profiles,
                                     const Eigen::VectorXd& lambda, double delta,
                                     int quad_nodes = 128);

// Value of the ancillary objective (used for the Delta_0 estimate).
double ancillary_value(const Scenario& s, const Eigen::VectorXd& lambda, double delta,
                       int quad_nodes = 128);

// Frank-Wolfe gap max_{z in box} <z - lambda, -grad>, in closed form over
// the box. Requires lambda inside the box within 1e-9.
double fw_gap(const Scenario& s, const Eigen::VectorXd& lambda, const Eigen::VectorXd& grad);

}  // namespace bizol
