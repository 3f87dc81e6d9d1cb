#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "bizol/scenario.hpp"

namespace bizol {

// One box region of incentive space on which every nodal response is affine:
// R_i(lambda_i) = slope_i * lambda_i + intercept_i on [lower_i, upper_i].
struct Cell {
  std::vector<int> segment_index;  // per-node profile segment
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  Eigen::VectorXd slope;
  Eigen::VectorXd intercept;
};

// Cartesian product of per-node profile segments intersected with the
// incentive box; zero-width intersections are dropped (covered by the
// closed neighbor). Throws when the cell count exceeds cell_cap, advising
// grid_search instead.
std::vector<Cell> enumerate_cells(const Scenario& s, std::int64_t cell_cap = 1000000);

struct CellSolution {
  Cell cell;
  Eigen::VectorXd minimizer;
  double value = 0.0;  // true_objective at the minimizer
};

// Minimizes the (convex quadratic) restriction of the objective to the cell
// by projected gradient descent with exact line search, to projected-gradient
// norm 1e-10.
CellSolution minimize_cell(const Scenario& s, const Cell& cell);

struct GlobalOptimum {
  Eigen::VectorXd lambda_star;
  double value = 0.0;
  std::int64_t cells_evaluated = 0;
};

// Exact global optimum over the box: best cell solution, ties broken by the
// lexicographically smallest minimizer.
GlobalOptimum global_optimum(const Scenario& s, std::int64_t cell_cap = 1000000);

struct GridResult {
  Eigen::VectorXd lambda;
  double value = 0.0;
  std::int64_t points_evaluated = 0;
};

// Independent brute-force cross-check: best objective over the uniform grid
// (both box corners included). Caps total grid points at 1e8.
GridResult grid_search(const Scenario& s, double resolution);

// Everything the convergence bound needs, evaluated from the instance.
struct TheoryConstants {
  double L_R = 0.0;         // response Lipschitz constant
  double R_max = 0.0;       // response norm bound
  double D = 0.0;           // box diameter
  double Lambda_max = 0.0;  // sup ||lambda|| over the box
  double c0 = 0.0;          // total baseline minus target
  double M_phi2 = 0.0;      // bound on the response partial
  double C_bias = 0.0;
  double C_noise = 0.0;
  double L_grad_ancillary = 0.0;
  double c = 1.0;           // universal smoothing constant (configurable)
  double delta = 0.0;
};

TheoryConstants theory_constants(const Scenario& s, double delta, double c = 1.0);

// Right-hand side of the averaged-gap bound: Delta0/(gamma T) +
// L D^2 gamma / 2 + C_bias D delta + C_noise D.
struct GapBound {
  double delta0_estimate = 0.0;
  std::array<double, 4> terms{};
  double total = 0.0;
};

GapBound gap_bound(const TheoryConstants& tc, double gamma, std::int64_t iterations,
                   double delta0);

}  // namespace bizol
