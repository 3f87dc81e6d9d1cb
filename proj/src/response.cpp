#include "bizol/response.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bizol {

double device_response(const DeviceParams& d, double lambda) {
  return std::min(d.capacity, std::max(0.0, d.alpha * (lambda - d.activation_cost)));
}

std::vector<double> solve_user_problem_oracle(const UserSpec& u, double lambda) {
  // The user's cost is separable, so each device is minimized on its own:
  // f(r) = r^2 / (2 alpha) + beta r - lambda r over [0, C].
  std::vector<double> result;
  result.reserve(u.devices.size());
  for (const auto& d : u.devices) {
    const auto cost = [&](double r) {
      return r * r / (2.0 * d.alpha) + (d.activation_cost - lambda) * r;
    };
    double best_r = 0.0;
    double best_cost = cost(0.0);
    const double stationary = d.alpha * (lambda - d.activation_cost);
    for (double cand : {d.capacity, stationary}) {
      if (cand < 0.0 || cand > d.capacity) continue;
      const double c = cost(cand);
      if (c < best_cost || (c == best_cost && cand < best_r)) {
        best_cost = c;
        best_r = cand;
      }
    }
    result.push_back(best_r);
  }
  return result;
}

double nodal_response(const NodeSpec& n, double lambda) {
  double total = 0.0;
  for (const auto& user : n.users) {
    for (const auto& dev : user.devices) total += device_response(dev, lambda);
  }
  return total;
}

Eigen::VectorXd aggregate_response(const Scenario& s, const Eigen::VectorXd& lambda) {
  if (lambda.size() != s.num_nodes()) {
    throw std::invalid_argument("aggregate_response: lambda has length " +
                                std::to_string(lambda.size()) + ", expected " +
                                std::to_string(s.num_nodes()));
  }
  Eigen::VectorXd r(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    r[i] = nodal_response(s.nodes[static_cast<std::size_t>(i)], lambda[i]);
  }
  return r;
}

int ResponseProfile::segment_index(double lambda) const {
  const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), lambda);
  return static_cast<int>(it - breakpoints.begin());
}

double ResponseProfile::operator()(double lambda) const {
  if (breakpoints.empty()) return 0.0;
  const int j = segment_index(lambda);
  // Anchor at the nearest breakpoint on the left (or the first one for the
  // flat left tail) so each evaluation is a single affine expression.
  const int anchor = std::max(j - 1, 0);
  return value_at_breakpoint[static_cast<std::size_t>(anchor)] +
         segment_slopes[static_cast<std::size_t>(j)] *
             (lambda - breakpoints[static_cast<std::size_t>(anchor)]);
}

double ResponseProfile::slope_at(double lambda) const {
  return segment_slopes[static_cast<std::size_t>(segment_index(lambda))];
}

double ResponseProfile::breakpoint_distance(double lambda) const {
  if (breakpoints.empty()) return std::numeric_limits<double>::infinity();
  const auto it = std::lower_bound(breakpoints.begin(), breakpoints.end(), lambda);
  double best = std::numeric_limits<double>::infinity();
  if (it != breakpoints.end()) best = std::min(best, std::abs(*it - lambda));
  if (it != breakpoints.begin()) best = std::min(best, std::abs(*(it - 1) - lambda));
  return best;
}

ResponseProfile build_profile(const NodeSpec& n) {
  ResponseProfile p;
  p.node_id = n.node_id;

  std::vector<const DeviceParams*> devices;
  for (const auto& user : n.users) {
    for (const auto& dev : user.devices) devices.push_back(&dev);
  }
  for (const auto* dev : devices) p.saturation_value += dev->capacity;

  for (const auto* dev : devices) {
    p.breakpoints.push_back(dev->activation_cost);
    p.breakpoints.push_back(dev->activation_cost + dev->capacity / dev->alpha);
  }
  std::sort(p.breakpoints.begin(), p.breakpoints.end());
  p.breakpoints.erase(std::unique(p.breakpoints.begin(), p.breakpoints.end()),
                      p.breakpoints.end());

  // A device ramps with slope alpha on (beta, beta + C/alpha); every segment
  // is either fully inside or fully outside that interval, so one interior
  // point decides.
  const std::size_t n_segments = p.breakpoints.size() + 1;
  p.segment_slopes.assign(n_segments, 0.0);
  for (std::size_t j = 0; j < n_segments; ++j) {
    double probe;
    if (p.breakpoints.empty()) {
      probe = 0.0;
    } else if (j == 0) {
      probe = p.breakpoints.front() - 1.0;
    } else if (j == p.breakpoints.size()) {
      probe = p.breakpoints.back() + 1.0;
    } else {
      probe = p.breakpoints[j - 1] + (p.breakpoints[j] - p.breakpoints[j - 1]) / 2.0;
    }
    double slope = 0.0;
    for (const auto* dev : devices) {
      const double ramp_lo = dev->activation_cost;
      const double ramp_hi = dev->activation_cost + dev->capacity / dev->alpha;
      if (probe > ramp_lo && probe < ramp_hi) slope += dev->alpha;
    }
    p.segment_slopes[j] = slope;
  }

  p.value_at_breakpoint.reserve(p.breakpoints.size());
  for (double b : p.breakpoints) p.value_at_breakpoint.push_back(nodal_response(n, b));
  return p;
}

std::vector<ResponseProfile> build_profiles(const Scenario& s) {
  std::vector<ResponseProfile> profiles;
  profiles.reserve(s.nodes.size());
  for (const auto& node : s.nodes) profiles.push_back(build_profile(node));
  return profiles;
}

ResponseConstants compute_constants(const Scenario& s) {
  ResponseConstants c;
  c.per_node_lipschitz.reserve(s.nodes.size());
  double sum_sq = 0.0;
  for (const auto& node : s.nodes) {
    double lipschitz = 0.0;
    double cap = 0.0;
    for (const auto& user : node.users) {
      for (const auto& dev : user.devices) {
        lipschitz += dev.alpha;
        cap += dev.capacity;
      }
    }
    c.per_node_lipschitz.push_back(lipschitz);
    c.global_lipschitz = std::max(c.global_lipschitz, lipschitz);
    sum_sq += cap * cap;
  }
  c.response_bound = std::sqrt(sum_sq);
  return c;
}

}  // namespace bizol
