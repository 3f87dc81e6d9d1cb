#include "bizol/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "bizol/objective.hpp"
#include "bizol/response.hpp"

namespace bizol {

namespace {

struct Axis {
  int segment = 0;
  double lo = 0.0;
  double hi = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
};

// Profile segments of one node clipped to the node's price interval.
std::vector<Axis> node_axes(const ResponseProfile& profile, double box_lo, double box_hi) {
  std::vector<Axis> axes;
  const auto& bps = profile.breakpoints;
  const int n_segments = static_cast<int>(bps.size()) + 1;
  for (int j = 0; j < n_segments; ++j) {
    const double seg_lo =
        j == 0 ? -std::numeric_limits<double>::infinity() : bps[static_cast<std::size_t>(j - 1)];
    const double seg_hi = j == static_cast<int>(bps.size())
                              ? std::numeric_limits<double>::infinity()
                              : bps[static_cast<std::size_t>(j)];
    const double lo = std::max(seg_lo, box_lo);
    const double hi = std::min(seg_hi, box_hi);
    if (!(lo < hi)) continue;  // zero-width: covered by the closed neighbor
    Axis axis;
    axis.segment = j;
    axis.lo = lo;
    axis.hi = hi;
    axis.slope = profile.segment_slopes[static_cast<std::size_t>(j)];
    const double mid = 0.5 * (lo + hi);
    axis.intercept = profile(mid) - axis.slope * mid;
    axes.push_back(axis);
  }
  if (axes.empty()) {
    // Degenerate box (a single price): keep the one segment containing it.
    Axis axis;
    axis.segment = profile.segment_index(box_lo);
    axis.lo = box_lo;
    axis.hi = box_hi;
    axis.slope = profile.segment_slopes[static_cast<std::size_t>(axis.segment)];
    axis.intercept = profile(box_lo) - axis.slope * box_lo;
    axes.push_back(axis);
  }
  return axes;
}

}  // namespace

std::vector<Cell> enumerate_cells(const Scenario& s, std::int64_t cell_cap) {
  const auto profiles = build_profiles(s);
  const Eigen::Index n = s.num_nodes();
  std::vector<std::vector<Axis>> axes(static_cast<std::size_t>(n));
  double count = 1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    axes[static_cast<std::size_t>(i)] = node_axes(profiles[static_cast<std::size_t>(i)],
                                                  s.lambda_lower[i], s.lambda_upper[i]);
    count *= static_cast<double>(axes[static_cast<std::size_t>(i)].size());
  }
  if (count > static_cast<double>(cell_cap)) {
    throw std::runtime_error("enumerate_cells: " + std::to_string(count) +
                             " cells exceed the cap of " + std::to_string(cell_cap) +
                             "; use grid_search or raise the cap");
  }

  std::vector<Cell> cells;
  cells.reserve(static_cast<std::size_t>(count));
  std::vector<std::size_t> index(static_cast<std::size_t>(n), 0);
  while (true) {
    Cell cell;
    cell.segment_index.resize(static_cast<std::size_t>(n));
    cell.lower.resize(n);
    cell.upper.resize(n);
    cell.slope.resize(n);
    cell.intercept.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Axis& axis = axes[static_cast<std::size_t>(i)][index[static_cast<std::size_t>(i)]];
      cell.segment_index[static_cast<std::size_t>(i)] = axis.segment;
      cell.lower[i] = axis.lo;
      cell.upper[i] = axis.hi;
      cell.slope[i] = axis.slope;
      cell.intercept[i] = axis.intercept;
    }
    cells.push_back(std::move(cell));
    // odometer, last node fastest
    Eigen::Index pos = n - 1;
    while (pos >= 0) {
      if (++index[static_cast<std::size_t>(pos)] < axes[static_cast<std::size_t>(pos)].size()) {
        break;
      }
      index[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return cells;
}

CellSolution minimize_cell(const Scenario& s, const Cell& cell) {
  const Eigen::Index n = cell.lower.size();
  const double c0 = objective_constants(s).c0;
  const double rho = s.rho;
  const Eigen::VectorXd& a = cell.slope;
  const Eigen::VectorXd& b = cell.intercept;

  // phi(l) = sum l_i (a_i l_i + b_i) + rho (c0 - sum (a_i l_i + b_i))^2,
  // convex since a >= 0. Hessian is 2 diag(a) + 2 rho a a^T.
  const auto gradient = [&](const Eigen::VectorXd& l) -> Eigen::VectorXd {
    const double shortfall = c0 - (a.cwiseProduct(l) + b).sum();
    return 2.0 * a.cwiseProduct(l) + b - (2.0 * rho * shortfall) * a;
  };
  const auto clamp = [&](Eigen::VectorXd l) -> Eigen::VectorXd {
    return l.cwiseMax(cell.lower).cwiseMin(cell.upper);
  };

  const double curvature_bound =
      std::max(2.0 * (n > 0 ? a.maxCoeff() : 0.0) + 2.0 * rho * a.squaredNorm(), 1e-12);

  Eigen::VectorXd l = 0.5 * (cell.lower + cell.upper);
  constexpr int kMaxIterations = 100000;
  constexpr double kTol = 1e-10;
  bool converged = false;
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    const Eigen::VectorXd g = gradient(l);
    if ((l - clamp(l - g)).norm() <= kTol) {
      converged = true;
      break;
    }
    const Eigen::VectorXd d = clamp(l - g / curvature_bound) - l;
    const double d_h_d =
        2.0 * a.dot(d.cwiseProduct(d)) + 2.0 * rho * std::pow(a.dot(d), 2);
    double step = 1.0;
    if (d_h_d > 0.0) step = std::clamp(-g.dot(d) / d_h_d, 0.0, 1.0);
    l = clamp(l + step * d);
  }
  if (!converged) {
    throw std::runtime_error("minimize_cell: projected gradient did not converge");
  }

  CellSolution sol;
  sol.cell = cell;
  sol.minimizer = l;
  sol.value = true_objective(s, l);
  return sol;
}

namespace {

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

}  // namespace

GlobalOptimum global_optimum(const Scenario& s, std::int64_t cell_cap) {
  const auto cells = enumerate_cells(s, cell_cap);
  GlobalOptimum best;
  best.value = std::numeric_limits<double>::infinity();
  best.cells_evaluated = static_cast<std::int64_t>(cells.size());
  for (const auto& cell : cells) {
    const auto sol = minimize_cell(s, cell);
    if (sol.value < best.value ||
        (sol.value == best.value && lex_less(sol.minimizer, best.lambda_star))) {
      best.value = sol.value;
      best.lambda_star = sol.minimizer;
    }
  }
  return best;
}

GridResult grid_search(const Scenario& s, double resolution) {
  if (!(resolution > 0.0)) throw std::invalid_argument("grid_search: resolution must be > 0");
  const Eigen::Index n = s.num_nodes();

  // Size the grid before allocating anything.
  double total = 1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double span = s.lambda_upper[i] - s.lambda_lower[i];
    total *= std::floor(span / resolution) + 2.0;
  }
  if (total > 1e8) {
    throw std::runtime_error("grid_search: about " + std::to_string(total) +
                             " grid points exceed the 1e8 cap; coarsen the resolution");
  }

  std::vector<std::vector<double>> points(static_cast<std::size_t>(n));
  total = 1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lo = s.lambda_lower[i];
    const double hi = s.lambda_upper[i];
    auto& pts = points[static_cast<std::size_t>(i)];
    for (std::int64_t j = 0; lo + static_cast<double>(j) * resolution < hi; ++j) {
      pts.push_back(lo + static_cast<double>(j) * resolution);
    }
    if (pts.empty() || pts.back() < hi) pts.push_back(hi);
    total *= static_cast<double>(pts.size());
  }

  // Responses depend on their own coordinate only, so tabulate each node's
  // values once and sweep the product grid with partial sums.
  std::vector<std::vector<double>> responses(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& node = s.nodes[static_cast<std::size_t>(i)];
    auto& table = responses[static_cast<std::size_t>(i)];
    table.reserve(points[static_cast<std::size_t>(i)].size());
    for (double x : points[static_cast<std::size_t>(i)]) {
      table.push_back(nodal_response(node, x));
    }
  }

  const double c0 = objective_constants(s).c0;
  GridResult best;
  best.value = std::numeric_limits<double>::infinity();
  best.lambda.resize(n);
  best.points_evaluated = static_cast<std::int64_t>(total);
  Eigen::VectorXd current(n);

  const auto sweep = [&](auto&& self, Eigen::Index depth, double payment,
                         double response_sum) -> void {
    const auto& pts = points[static_cast<std::size_t>(depth)];
    const auto& table = responses[static_cast<std::size_t>(depth)];
    for (std::size_t j = 0; j < pts.size(); ++j) {
      current[depth] = pts[j];
      const double pay = payment + pts[j] * table[j];
      const double sum = response_sum + table[j];
      if (depth + 1 < n) {
        self(self, depth + 1, pay, sum);
      } else {
        const double shortfall = c0 - sum;
        const double value = pay + s.rho * shortfall * shortfall;
        if (value < best.value) {
          best.value = value;
          best.lambda = current;
        }
      }
    }
  };
  sweep(sweep, 0, 0.0, 0.0);
  return best;
}

TheoryConstants theory_constants(const Scenario& s, double delta, double c) {
  if (!(delta > 0.0)) throw std::invalid_argument("theory_constants: delta must be > 0");
  if (!(c > 0.0)) throw std::invalid_argument("theory_constants: c must be > 0");
  const auto rc = compute_constants(s);
  const auto oc = objective_constants(s);
  const double n = static_cast<double>(s.num_nodes());
  const double root_n = std::sqrt(n);

  TheoryConstants tc;
  tc.L_R = rc.global_lipschitz;
  tc.R_max = rc.response_bound;
  tc.D = oc.box_diameter;
  tc.Lambda_max = oc.lambda_max;
  tc.c0 = oc.c0;
  tc.M_phi2 = tc.Lambda_max + 2.0 * s.rho * root_n * (std::abs(tc.c0) + root_n * tc.R_max);
  tc.C_bias = (1.0 + 2.0 * s.rho * n * tc.L_R) * tc.L_R;
  tc.C_noise = 4.0 * tc.M_phi2 * std::pow(2.0 * std::numbers::pi, 0.25) * n * tc.L_R;
  tc.L_grad_ancillary =
      tc.L_R * (2.0 + 2.0 * s.rho * n * tc.L_R) + (c * n * tc.L_R / delta) * tc.M_phi2;
  tc.c = c;
  tc.delta = delta;
  return tc;
}

GapBound gap_bound(const TheoryConstants& tc, double gamma, std::int64_t iterations,
                   double delta0) {
  if (!(gamma > 0.0)) throw std::invalid_argument("gap_bound: gamma must be > 0");
  if (iterations < 1) throw std::invalid_argument("gap_bound: iterations must be >= 1");
  GapBound out;
  out.delta0_estimate = delta0;
  out.terms[0] = delta0 / (gamma * static_cast<double>(iterations));
  out.terms[1] = tc.L_grad_ancillary * tc.D * tc.D * gamma / 2.0;
  out.terms[2] = tc.C_bias * tc.D * tc.delta;
  out.terms[3] = tc.C_noise * tc.D;
  out.total = out.terms[0] + out.terms[1] + out.terms[2] + out.terms[3];
  return out;
}

}  // namespace bizol
