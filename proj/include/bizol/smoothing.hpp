#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "bizol/response.hpp"
#include "bizol/rng.hpp"
#include "bizol/scenario.hpp"

namespace bizol {

// Uniform draw from the unit sphere S^{dim-1} (normalized standard normals).
Eigen::VectorXd sample_sphere(Rng& rng, int dim);

// Uniform draw from the closed unit ball (sphere sample scaled by U^{1/dim}).
Eigen::VectorXd sample_ball(Rng& rng, int dim);

// Rank-1 two-point estimate (N/2delta)(R(l+delta w) - R(l-delta w)) w^T of
// the smoothed response Jacobian, stored without materializing the matrix.
struct JacobianEstimate {
  Eigen::VectorXd scaled_delta;  // (N/2delta)(R+ - R-)
  Eigen::VectorXd direction;     // w, unit norm

  Eigen::MatrixXd materialize() const {
    return scaled_delta * direction.transpose();
  }
};

// Probes exactly two responses at lambda +- delta*w. The probe points are
// deliberately not projected into the incentive box: responses are defined
// on all of R^N and the estimator needs the unprojected values.
JacobianEstimate two_point_jacobian(const Scenario& s, const Eigen::VectorXd& lambda,
                                    double delta, const Eigen::VectorXd& w);

// Ball-smoothed response and the (diagonal) Jacobian of the smoothing,
// computed by breakpoint-aware Gauss-Legendre panels. quad_tolerance is an
// a-posteriori error estimate (full rule vs half-order rule plus roundoff).
struct SmoothedResponse {
  Eigen::VectorXd values;
  Eigen::VectorXd jacobian_diag;
  double quad_tolerance = 0.0;
};

SmoothedResponse smoothed_response_quadrature(const Scenario& s, const Eigen::VectorXd& lambda,
                                              double delta, int quad_nodes = 128);
SmoothedResponse smoothed_response_quadrature(const std::vector<ResponseProfile>& profiles,
                                              const Eigen::VectorXd& lambda, double delta,
                                              int quad_nodes = 128);

// Monte Carlo oracle for the quadrature: sample mean of R(lambda + delta u),
// u uniform in the ball, with per-component standard errors.
struct McResponse {
  Eigen::VectorXd values;
  Eigen::VectorXd standard_errors;
};

McResponse smoothed_response_mc(const Scenario& s, const Eigen::VectorXd& lambda, double delta,
                                std::int64_t n_samples, Rng& rng);

}  // namespace bizol
