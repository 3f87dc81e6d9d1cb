#include "bizol/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace bizol {

namespace {

struct GlRule {
  std::vector<double> x;  // nodes on [-1, 1], symmetric
  std::vector<double> w;
};

// Newton iteration on the Legendre polynomial; nodes are symmetrized so
// x[n-1-i] == -x[i] exactly.
GlRule make_gl_rule(int n) {
  GlRule rule;
  rule.x.resize(static_cast<std::size_t>(n));
  rule.w.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.x[static_cast<std::size_t>(n - 1 - i)] = x;
    rule.x[static_cast<std::size_t>(i)] = -x;
    rule.w[static_cast<std::size_t>(n - 1 - i)] = w;
    rule.w[static_cast<std::size_t>(i)] = w;
  }
  if (n % 2 == 1) rule.x[static_cast<std::size_t>(n / 2)] = 0.0;
  return rule;
}

const GlRule& gl_rule(int n) {
  static std::mutex mutex;
  static std::map<int, GlRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_gl_rule(n)).first;
  return it->second;
}

// Integral of f over [a, b] with the rule mapped onto the panel.
template <typename F>
double panel_integral(const GlRule& rule, double a, double b, F&& f) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum = 0.0;
  for (std::size_t q = 0; q < rule.x.size(); ++q) {
    sum += rule.w[q] * f(mid + half * rule.x[q]);
  }
  return sum * half;
}

double cos_pow(double u, int n) { return std::pow(std::cos(u), n); }

struct NodeQuadrature {
  double value = 0.0;
  double jacobian = 0.0;
};

// One node under one rule. The coordinate marginal of the uniform ball has
// density proportional to (1 - t^2)^((N-1)/2) on [-1, 1]; with t = sin(u)
// every factor is analytic in u, and splitting at breakpoint crossings makes
// the response factor affine per panel.
NodeQuadrature node_quadrature(const ResponseProfile& profile, double lambda_i, double delta,
                               int dim, const GlRule& rule, double normalization) {
  constexpr double half_pi = std::numbers::pi / 2.0;
  std::vector<double> bounds;
  bounds.push_back(-half_pi);
  for (double b : profile.breakpoints) {
    const double t = (b - lambda_i) / delta;
    if (t > -1.0 && t < 1.0) bounds.push_back(std::asin(t));
  }
  bounds.push_back(half_pi);
  std::sort(bounds.begin(), bounds.end());

  NodeQuadrature out;
  for (std::size_t p = 0; p + 1 < bounds.size(); ++p) {
    const double a = bounds[p];
    const double b = bounds[p + 1];
    if (!(b > a)) continue;
    out.value += panel_integral(rule, a, b, [&](double u) {
      return profile(lambda_i + delta * std::sin(u)) * cos_pow(u, dim);
    });
    const double t_mid = std::sin(0.5 * (a + b));
    out.jacobian += profile.slope_at(lambda_i + delta * t_mid) *
                    panel_integral(rule, a, b, [&](double u) { return cos_pow(u, dim); });
  }
  out.value /= normalization;
  out.jacobian /= normalization;
  return out;
}

}  // namespace

Eigen::VectorXd sample_sphere(Rng& rng, int dim) {
  if (dim < 1) throw std::invalid_argument("sample_sphere: dim must be >= 1");
  Eigen::VectorXd v(dim);
  double norm_sq = 0.0;
  do {
    for (int i = 0; i < dim; ++i) v[i] = rng.normal();
    norm_sq = v.squaredNorm();
  } while (norm_sq == 0.0);
  return v / std::sqrt(norm_sq);
}

Eigen::VectorXd sample_ball(Rng& rng, int dim) {
  Eigen::VectorXd v = sample_sphere(rng, dim);
  const double radius = std::pow(rng.uniform(), 1.0 / dim);
  return v * radius;
}

JacobianEstimate two_point_jacobian(const Scenario& s, const Eigen::VectorXd& lambda,
                                    double delta, const Eigen::VectorXd& w) {
  if (!(delta > 0.0)) throw std::invalid_argument("two_point_jacobian: delta must be > 0");
  if (w.size() != lambda.size() || lambda.size() != s.num_nodes()) {
    throw std::invalid_argument("two_point_jacobian: dimension mismatch");
  }
  const double n = static_cast<double>(s.num_nodes());
  const Eigen::VectorXd plus = aggregate_response(s, lambda + delta * w);
  const Eigen::VectorXd minus = aggregate_response(s, lambda - delta * w);
  JacobianEstimate est;
  est.scaled_delta = (n / (2.0 * delta)) * (plus - minus);
  est.direction = w;
  return est;
}

SmoothedResponse smoothed_response_quadrature(const Scenario& s, const Eigen::VectorXd& lambda,
                                              double delta, int quad_nodes) {
  return smoothed_response_quadrature(build_profiles(s), lambda, delta, quad_nodes);
}

SmoothedResponse smoothed_response_quadrature(const std::vector<ResponseProfile>& profiles,
                                              const Eigen::VectorXd& lambda, double delta,
                                              int quad_nodes) {
  if (!(delta > 0.0)) {
    throw std::invalid_argument("smoothed_response_quadrature: delta must be > 0");
  }
  if (quad_nodes < 64) {
    throw std::invalid_argument("smoothed_response_quadrature: quad_nodes must be >= 64");
  }
  const auto n = static_cast<Eigen::Index>(profiles.size());
  if (lambda.size() != n) {
    throw std::invalid_argument("smoothed_response_quadrature: dimension mismatch");
  }
  const int dim = static_cast<int>(n);
  constexpr double half_pi = std::numbers::pi / 2.0;

  SmoothedResponse out;
  out.values.resize(n);
  out.jacobian_diag.resize(n);
  Eigen::VectorXd coarse_values(n);
  Eigen::VectorXd coarse_jac(n);

  for (int pass = 0; pass < 2; ++pass) {
    const GlRule& rule = gl_rule(pass == 0 ? quad_nodes : quad_nodes / 2);
    // Normalizing constant of the marginal density under the same rule.
    const double z =
        panel_integral(rule, -half_pi, half_pi, [&](double u) { return cos_pow(u, dim); });
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto nq =
          node_quadrature(profiles[static_cast<std::size_t>(i)], lambda[i], delta, dim, rule, z);
      if (pass == 0) {
        out.values[i] = nq.value;
        out.jacobian_diag[i] = nq.jacobian;
      } else {
        coarse_values[i] = nq.value;
        coarse_jac[i] = nq.jacobian;
      }
    }
  }

  const double scale =
      1.0 + out.values.cwiseAbs().maxCoeff() + out.jacobian_diag.cwiseAbs().maxCoeff();
  const double floor = 128.0 * std::numeric_limits<double>::epsilon() * scale;
  const double measured = std::max((out.values - coarse_values).cwiseAbs().maxCoeff(),
                                   (out.jacobian_diag - coarse_jac).cwiseAbs().maxCoeff());
  out.quad_tolerance = measured + floor;
  return out;
}

McResponse smoothed_response_mc(const Scenario& s, const Eigen::VectorXd& lambda, double delta,
                                std::int64_t n_samples, Rng& rng) {
  if (n_samples < 1) throw std::invalid_argument("smoothed_response_mc: n_samples must be >= 1");
  const Eigen::Index n = lambda.size();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd m2 = Eigen::VectorXd::Zero(n);
  for (std::int64_t k = 1; k <= n_samples; ++k) {
    const Eigen::VectorXd u = sample_ball(rng, static_cast<int>(n));
    const Eigen::VectorXd r = aggregate_response(s, lambda + delta * u);
    const Eigen::VectorXd delta_old = r - mean;
    mean += delta_old / static_cast<double>(k);
    m2 += delta_old.cwiseProduct(r - mean);
  }
  McResponse out;
  out.values = mean;
  out.standard_errors = Eigen::VectorXd::Zero(n);
  if (n_samples > 1) {
    const double denom = static_cast<double>(n_samples - 1) * static_cast<double>(n_samples);
    out.standard_errors = (m2 / denom).cwiseMax(0.0).cwiseSqrt();
  }
  return out;
}

}  // namespace bizol
