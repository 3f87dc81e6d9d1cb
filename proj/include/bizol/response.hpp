#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "bizol/scenario.hpp"

namespace bizol {

// Closed-form minimizer of the device's cost r^2/(2*alpha) + beta*r - lambda*r
// over [0, capacity].
double device_response(const DeviceParams& d, double lambda);

// Independent check of the closed form: enumerates the KKT candidates
// {0, C, alpha*(lambda-beta)} per device and returns the feasible point of
// least cost. Kept brute-force on purpose.
std::vector<double> solve_user_problem_oracle(const UserSpec& u, double lambda);

double nodal_response(const NodeSpec& n, double lambda);

// Component i is nodal_response(nodes[i], lambda[i]). Throws on length
// mismatch.
Eigen::VectorXd aggregate_response(const Scenario& s, const Eigen::VectorXd& lambda);

// Piecewise-affine description of one node's response. Breakpoints are the
// sorted unique activation/saturation prices {beta} u {beta + C/alpha};
// segment_slopes has one more entry than breakpoints, first and last are 0.
struct ResponseProfile {
  std::string node_id;
  std::vector<double> breakpoints;           // strictly increasing
  std::vector<double> segment_slopes;        // size breakpoints.size() + 1
  std::vector<double> value_at_breakpoint;   // response at each breakpoint
  double saturation_value = 0.0;             // sum of capacities

  double operator()(double lambda) const;

  // Slope of the segment containing lambda (right side at a breakpoint).
  double slope_at(double lambda) const;

  // Segment index in [0, breakpoints.size()]; index j covers
  // (breakpoints[j-1], breakpoints[j]].. 0 is the flat left tail.
  int segment_index(double lambda) const;

  // Distance to the nearest breakpoint, +inf when there are none.
  double breakpoint_distance(double lambda) const;
};

ResponseProfile build_profile(const NodeSpec& n);
std::vector<ResponseProfile> build_profiles(const Scenario& s);

struct ResponseConstants {
  std::vector<double> per_node_lipschitz;  // L_i = sum of alphas at node i
  double global_lipschitz = 0.0;           // L_R = max_i L_i
  double response_bound = 0.0;             // R_max = sqrt(sum_i (sum C)^2)
};

ResponseConstants compute_constants(const Scenario& s);

}  // namespace bizol
