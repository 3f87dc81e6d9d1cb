#pragma once

#include <initializer_list>

#include <Eigen/Core>

#include "bizol/scenario.hpp"

namespace bizol::testing {

inline Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

// Single node, one device (alpha=1, C=1, beta=0), baseline 2, target 1,
// rho 1, box [0,5]. The response is clamp(lambda, 0, 1); on [0,1] the
// objective is 2 lambda^2 - 2 lambda + 1, so the global optimum is
// lambda* = 0.5 with value 0.5.
inline Scenario worked_instance() {
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
}

// 3 nodes / 8 users / 4 devices each, alpha in [0.5, 3], box [0, 5]^3.
inline Scenario experiment_scale(std::uint64_t seed) {
  GenerateParams p;
  p.seed = seed;
  return generate_scenario(p);
}

// The reference experiment instance (all defaults).
inline Scenario reference_instance() { return generate_scenario(GenerateParams{}); }

inline Scenario small_scenario(std::uint64_t seed, int n_nodes, int n_users,
                               int devices_per_user) {
  GenerateParams p;
  p.seed = seed;
  p.n_nodes = n_nodes;
  p.n_users = n_users;
  p.devices_per_user = devices_per_user;
  return generate_scenario(p);
}

}  // namespace bizol::testing
