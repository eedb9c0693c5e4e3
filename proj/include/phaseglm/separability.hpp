#pragma once

#include <Eigen/Dense>
#include <optional>

#include "phaseglm/glm.hpp"
#include "phaseglm/simplex.hpp"

namespace phaseglm {

// Mutually exclusive data configurations of a labelled sample:
//   Overlap        -- no hyperplane weakly separates; the logistic/probit/
//                     cloglog MLE exists and is unique.
//   QuasiComplete  -- a hyperplane separates with some points on it; the
//                     MLE diverges.
//   Complete       -- a hyperplane strictly separates; the MLE diverges.
enum class SeparationKind { Overlap, QuasiComplete, Complete };

// Tolerances for the separation decision. Constraint rows are normalised to
// unit length before solving, so both numbers are dimensionless:
//   feas_tol -- slack allowed on constraint satisfaction,
//   zero_tol -- an LP optimum below this counts as (numerically) zero.
struct LpTolerance {
  double feas_tol = 1e-9;
  double zero_tol = 1e-6;
};

struct SeparationStatus {
  SeparationKind kind = SeparationKind::Overlap;
  // Optimal value of the separation program: max over |b0|,|b_j| <= 1 of
  //   sum_i y_i (b0 + x_i^T b)   subject to   y_i (b0 + x_i^T b) >= 0.
  // Zero (up to tolerance) exactly when the sample overlaps. Rows of the
  // constraint matrix are normalised to unit Euclidean length internally, so
  // tolerances are dimensionless; the value reported here is on the
  // normalised scale.
  double lp_objective = 0.0;
  // Separating direction (b0, b_1..b_p), empty for Overlap. For Complete
  // every normalised margin is strictly positive (verified on the input rows
  // before returning); for QuasiComplete margins are nonnegative up to
  // feasibility slack with at least one (numerically) zero.
  Eigen::VectorXd certificate;
};

SeparationStatus detect_separation(const Eigen::MatrixXd& X,
                                   const Eigen::VectorXi& y,
                                   const LpTolerance& tol = {});

inline SeparationStatus detect_separation(const Dataset& ds,
                                          const LpTolerance& tol = {}) {
  return detect_separation(ds.X, ds.y, tol);
}

// True iff the sample overlaps (equivalently detect_separation(...).kind ==
// SeparationKind::Overlap). Cheaper than detect_separation for separated
// samples: it skips the margin refinement stage and allows the solver to
// stop as soon as the objective is certified nonzero.
bool mle_exists(const Eigen::MatrixXd& X, const Eigen::VectorXi& y,
                const LpTolerance& tol = {});

inline bool mle_exists(const Dataset& ds, const LpTolerance& tol = {}) {
  return mle_exists(ds.X, ds.y, tol);
}

// One-dimensional special case, solved by a sorted scan instead of an LP.
// A sample is separable iff some threshold t splits the labels monotonely;
// points exactly at t may carry either label (they sit on the hyperplane).
struct UnivariateSeparation {
  bool separable = false;
  // A witness threshold: +1 orientation means labels above `threshold` are
  // +1 and below are -1, orientation -1 the reverse. Unset when inseparable.
  std::optional<double> threshold;
  int orientation = 0;
};

UnivariateSeparation univariate_separation(const Eigen::VectorXd& x,
                                           const Eigen::VectorXi& y);

}  // namespace phaseglm
