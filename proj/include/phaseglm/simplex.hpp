#pragma once

#include <Eigen/Core>
#include <limits>

namespace phaseglm {

enum class LpStatus { Optimal, Infeasible, IterationLimit, Unbounded };

struct LpOptions {
  double feas_tol = 1e-9;
  // 0 means the default cap of 50 * (rows + cols) pivots.
  int max_pivots = 0;
  // Early exits for callers that only need a threshold decision: the solve
  // stops once the objective passes the bound (see each solver's direction).
  double stop_above = std::numeric_limits<double>::infinity();
  double stop_below = -std::numeric_limits<double>::infinity();
  // Dual solver only: every few hundred pivots, recover the complementary
  // primal point from the reduced costs and stop early if it is exactly
  // feasible (A x >= 0 evaluated on the original data) with c'x at or above
  // this bound. Lets a caller that only needs "optimum exceeds threshold"
  // skip the degenerate endgame of a full optimality proof.
  double stop_primal_above = std::numeric_limits<double>::infinity();
};

struct LpResult {
  double value = 0.0;
  Eigen::VectorXd x;
  LpStatus status = LpStatus::Optimal;
  int pivots = 0;
  bool early_exit = false;
};

// maximize c'x  subject to  A x >= 0,  lo <= x <= hi.
// A may have zero rows (pure box problem). Dense two-phase simplex with
// Dantzig pricing, falling back to Bland's rule while the objective stalls.
// stop_above: return the current (feasible) iterate once its objective
// reaches the bound.
LpResult solve_box_lp(const Eigen::VectorXd& c, const Eigen::MatrixXd& A,
                      const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                      const LpOptions& opts = {});

// Same contract, solved through the LP dual min_{u>=0} sum_j max(g_j lo_j,
// g_j hi_j), g = c + A'u, whose tableau has dim(x) rows instead of n. The
// optimal x is recovered from the dual basis. stop_below: stop once the dual
// objective (an upper bound on the primal optimum) falls to the bound; the
// returned x is not meaningful in that case. stop_primal_above: stop once
// the recovered primal point is feasible with c'x past the bound; x is then
// that point and value = c'x (a lower bound on the optimum).
LpResult solve_box_lp_dual(const Eigen::VectorXd& c, const Eigen::MatrixXd& A,
                           const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                           const LpOptions& opts = {});

}  // namespace phaseglm
