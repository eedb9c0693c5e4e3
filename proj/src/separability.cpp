#include "phaseglm/separability.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace phaseglm {

namespace {

// Signed design matrix with unit-length rows: row i is y_i * (1, x_i) scaled
// by 1/|(1, x_i)|. The norm is >= 1, so the scaling is always defined.
Eigen::MatrixXd signed_rows(const Eigen::MatrixXd& X, const Eigen::VectorXi& y) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  Eigen::MatrixXd M(n, p + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    M(i, 0) = 1.0;
    M.row(i).tail(p) = X.row(i);
    M.row(i) *= static_cast<double>(y(i)) / M.row(i).norm();
  }
  return M;
}

void check_inputs(const Eigen::MatrixXd& X, const Eigen::VectorXi& y) {
  if (X.rows() != y.size())
    throw std::invalid_argument("separability: X and y row counts differ");
  if (X.rows() == 0) throw std::invalid_argument("separability: empty sample");
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (y(i) != 1 && y(i) != -1)
      throw std::invalid_argument("separability: labels must be +1 or -1");
  if (!X.allFinite())
    throw std::invalid_argument("separability: non-finite covariate");
}

void require_solved(const LpResult& r, const char* stage) {
  if (r.status == LpStatus::Optimal || r.early_exit) return;
  throw std::runtime_error(std::string("separation LP failed in ") + stage +
                           " stage (status " +
                           std::to_string(static_cast<int>(r.status)) + ")");
}

// The dual path recovers x from reduced costs; guard against a numerically
// sour basis (or an exhausted pivot budget) by re-solving with the primal
// when the claimed certificate does not reproduce the objective / satisfy
// the constraints.
LpResult robust_max(const Eigen::VectorXd& c, const Eigen::MatrixXd& A,
                    const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                    const LpOptions& opts) {
  LpResult r = solve_box_lp_dual(c, A, lo, hi, opts);
  if (r.early_exit) return r;
  if (r.status == LpStatus::Optimal) {
    const double slack = (A * r.x).minCoeff();
    const double gap = std::abs(c.dot(r.x) - r.value);
    const double scale = 1.0 + std::abs(r.value);
    if (slack >= -1e2 * opts.feas_tol && gap <= 1e3 * opts.feas_tol * scale)
      return r;
  }
  LpResult pr = solve_box_lp(c, A, lo, hi, opts);
  require_solved(pr, "primal");
  return pr;
}

// Cheap search for a strict separator by single-sample perceptron sweeps over
// the unit-normalised signed rows. When a pass finds no violated row, b has
// strictly positive margin on every row; rescaled to the unit box it is an
// exact feasibility certificate for the margin LP, so a positive optimum is
// proven without running the LP at all. Returns false when inconclusive
// (overlap, quasi-complete ties, or slow convergence near the boundary).
bool perceptron_certifies_separation(const Eigen::MatrixXd& M,
                                     double zero_tol) {
  const Eigen::Index n = M.rows();
  Eigen::VectorXd b = M.colwise().mean();
  // In the overlapped case roughly half of each pass violates, so the update
  // budget bails out after a handful of passes; separable samples away from
  // the boundary converge well within it.
  int updates_left = 8 * static_cast<int>(n) + 4000;
  for (int pass = 0; pass < 40; ++pass) {
    bool clean = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (M.row(i).dot(b) <= 0.0) {
        b += M.row(i);
        clean = false;
        if (--updates_left == 0) return false;
      }
    }
    if (!clean) continue;
    const double scale = b.cwiseAbs().maxCoeff();
    if (!(scale > 0.0)) return false;
    // Margin sum of the box-feasible rescaling b/scale, recomputed from
    // scratch so the certificate never inherits iteration error.
    const Eigen::VectorXd margins = M * (b / scale);
    return margins.minCoeff() > 0.0 && margins.sum() > zero_tol;
  }
  return false;
}

}  // namespace

// Worst-margin fall-back classifier for the complete/quasi-complete split:
// maximise the worst normalised margin m over the box with m <= 1. Exact but
// heavily degenerate at its optimum, so it is only used when the facial
// reduction below cannot verify its certificate.
SeparationKind max_margin_classify(const Eigen::MatrixXd& M,
                                   const LpTolerance& tol,
                                   Eigen::VectorXd* certificate) {
  const Eigen::Index n = M.rows();
  const Eigen::Index d = M.cols();
  Eigen::VectorXd c2 = Eigen::VectorXd::Zero(d + 1);
  c2(d) = 1.0;
  Eigen::MatrixXd A2(n, d + 1);
  A2.leftCols(d) = M;
  A2.col(d).setConstant(-1.0);
  Eigen::VectorXd lo2(d + 1), hi2(d + 1);
  lo2.head(d).setConstant(-1.0);
  hi2.head(d).setConstant(1.0);
  lo2(d) = 0.0;
  hi2(d) = 1.0;
  LpOptions o2;
  o2.stop_below = 0.25 * tol.zero_tol;
  o2.stop_above = 4.0 * tol.zero_tol;
  o2.stop_primal_above = 4.0 * tol.zero_tol;
  o2.max_pivots = 400 * static_cast<int>(n + d);
  LpResult s2 = robust_max(c2, A2, lo2, hi2, o2);
  const bool complete = s2.value > tol.zero_tol &&
                        (s2.status == LpStatus::Optimal || s2.early_exit);
  if (complete && certificate) *certificate = s2.x.head(d);
  return complete ? SeparationKind::Complete : SeparationKind::QuasiComplete;
}

SeparationStatus detect_separation(const Eigen::MatrixXd& X,
                                   const Eigen::VectorXi& y,
                                   const LpTolerance& tol) {
  check_inputs(X, y);
  const Eigen::Index p = X.cols();
  const Eigen::MatrixXd M = signed_rows(X, y);

  // Stage 1: maximise the total signed margin sum_i y_i(b0 + x_i'b) subject
  // to every margin being nonnegative and the unit box. Zero optimum (only
  // the trivial solution) means overlap. The solver may stop early once the
  // upper bound on the optimum certifies a value below zero_tol.
  Eigen::VectorXd c1 = M.colwise().sum();
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(p + 1, -1.0);
  Eigen::VectorXd hi = Eigen::VectorXd::Constant(p + 1, 1.0);
  LpOptions o1;
  o1.stop_below = 0.25 * tol.zero_tol;
  LpResult s1 = robust_max(c1, M, lo, hi, o1);

  SeparationStatus out;
  if (s1.early_exit || s1.value <= tol.zero_tol) {
    out.kind = SeparationKind::Overlap;
    out.lp_objective = std::max(s1.value, 0.0);
    return out;
  }
  out.lp_objective = s1.value;

  // Stage 2, complete vs quasi-complete, by facial reduction of the margin
  // cone. Z holds the rows still pinned to zero margin; each round solves the
  // margin-sum LP restricted to Z. A restricted optimum of ~0 proves that
  // every admissible direction leaves all of Z exactly on the hyperplane
  // (all margins nonnegative and their sum nonpositive), i.e. quasi-complete.
  // Otherwise the rows attaining a clearly positive share of the restricted
  // optimum leave Z, and the restricted solution joins the list of directions
  // blended into the final strict separator.
  std::vector<int> Z;
  const Eigen::VectorXd m1 = M * s1.x;
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    if (m1(i) <= tol.zero_tol) Z.push_back(static_cast<int>(i));

  std::vector<Eigen::VectorXd> dirs{s1.x};
  bool quasi = false;
  while (!Z.empty()) {
    Eigen::MatrixXd MZ(static_cast<Eigen::Index>(Z.size()), p + 1);
    for (std::size_t r = 0; r < Z.size(); ++r) MZ.row(r) = M.row(Z[r]);
    Eigen::VectorXd cZ = MZ.colwise().sum();
    LpOptions oz;
    oz.stop_below = 0.25 * tol.zero_tol;
    oz.stop_primal_above = 4.0 * tol.zero_tol;
    LpResult rz = robust_max(cZ, MZ, lo, hi, oz);
    if (rz.value <= tol.zero_tol) {
      quasi = true;
      break;
    }
    // At least one row carries >= value / |Z| of the sum; half of that is a
    // safe lift threshold. rz.x is feasible for the restricted rows, so the
    // lifted rows provably admit a positive margin.
    const Eigen::VectorXd mz = MZ * rz.x;
    const double lift = 0.5 * rz.value / static_cast<double>(Z.size());
    std::vector<int> rest;
    for (std::size_t r = 0; r < Z.size(); ++r)
      if (!(mz(static_cast<Eigen::Index>(r)) > lift))
        rest.push_back(Z[r]);
    if (rest.size() == Z.size()) {
      quasi = false;  // numerically stuck; decide via the fall-back LP
      Z.clear();
      dirs.clear();
      break;
    }
    dirs.push_back(rz.x);
    Z.swap(rest);
  }

  if (quasi) {
    out.kind = SeparationKind::QuasiComplete;
    out.certificate = s1.x;
    return out;
  }

  // Blend the collected directions into one strict separator: each new
  // direction enters with a step small enough to keep every already-positive
  // margin at half its value, which lifts its own rows without losing any
  // earlier ones. Verify on the original rows; fall back to the max-margin
  // LP if the blend cannot be verified.
  if (!dirs.empty()) {
    Eigen::VectorXd b = dirs[0];
    for (std::size_t j = 1; j < dirs.size(); ++j) {
      const Eigen::VectorXd mb = M * b;
      const Eigen::VectorXd mj = M * dirs[j];
      double eps = 1.0;
      for (Eigen::Index i = 0; i < M.rows(); ++i)
        if (mb(i) > 0.0 && mj(i) < 0.0)
          eps = std::min(eps, mb(i) / (-2.0 * mj(i)));
      b += eps * dirs[j];
      const double scale = b.cwiseAbs().maxCoeff();
      if (scale > 1.0) b /= scale;
    }
    if ((M * b).minCoeff() > 0.0) {
      out.kind = SeparationKind::Complete;
      out.certificate = b;
      return out;
    }
  }

  out.kind = max_margin_classify(M, tol, &out.certificate);
  if (out.kind == SeparationKind::QuasiComplete) out.certificate = s1.x;
  return out;
}

bool mle_exists(const Eigen::MatrixXd& X, const Eigen::VectorXi& y,
                const LpTolerance& tol) {
  check_inputs(X, y);
  const Eigen::Index p = X.cols();
  const Eigen::MatrixXd M = signed_rows(X, y);

  // Fast path for clearly separated samples: a verified strict separator
  // proves the margin-sum optimum positive, so the MLE cannot exist.
  if (perceptron_certifies_separation(M, tol.zero_tol)) return false;

  Eigen::VectorXd c = M.colwise().sum();
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(p + 1, -1.0);
  Eigen::VectorXd hi = Eigen::VectorXd::Constant(p + 1, 1.0);
  // The dual objective upper-bounds the optimum throughout, so the solve can
  // stop as soon as the bound falls below zero_tol (overlap proven); it also
  // stops once a recovered feasible point pushes the optimum clearly above
  // the threshold (separation proven). Either exit decides the question.
  LpOptions o;
  o.stop_below = 0.25 * tol.zero_tol;
  o.stop_primal_above = 4.0 * tol.zero_tol;
  LpResult r = solve_box_lp_dual(c, M, lo, hi, o);
  if (r.early_exit) return r.value <= tol.zero_tol;
  if (r.status == LpStatus::Optimal) return r.value <= tol.zero_tol;
  // Pivot budget exhausted on the dual: the primal keeps feasible iterates,
  // so an objective already past the threshold is conclusive even mid-solve.
  LpOptions po;
  po.stop_above = 4.0 * tol.zero_tol;
  LpResult pr = solve_box_lp(c, M, lo, hi, po);
  if (pr.early_exit) return false;
  require_solved(pr, "existence");
  return pr.value <= tol.zero_tol;
}

UnivariateSeparation univariate_separation(const Eigen::VectorXd& x,
                                           const Eigen::VectorXi& y) {
  if (x.size() != y.size())
    throw std::invalid_argument("univariate_separation: size mismatch");
  const Eigen::Index n = x.size();
  if (n == 0) throw std::invalid_argument("univariate_separation: empty");

  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](Eigen::Index a, Eigen::Index b) { return x(a) < x(b); });

  // Collapse ties into blocks of equal covariate value.
  struct Block {
    double value;
    bool any_plus = false, any_minus = false;
  };
  std::vector<Block> blocks;
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index i = idx[static_cast<std::size_t>(k)];
    if (blocks.empty() || x(i) != blocks.back().value)
      blocks.push_back({x(i), false, false});
    (y(i) == 1 ? blocks.back().any_plus : blocks.back().any_minus) = true;
  }
  const std::size_t B = blocks.size();

  // pure_minus_before[i]: blocks [0, i) carry only -1 labels; similarly the
  // other three prefix/suffix flags.
  std::vector<char> minus_before(B + 1), plus_before(B + 1);
  std::vector<char> minus_after(B + 1), plus_after(B + 1);
  minus_before[0] = plus_before[0] = 1;
  for (std::size_t i = 0; i < B; ++i) {
    minus_before[i + 1] = minus_before[i] && !blocks[i].any_plus;
    plus_before[i + 1] = plus_before[i] && !blocks[i].any_minus;
  }
  minus_after[B] = plus_after[B] = 1;
  for (std::size_t i = B; i-- > 0;) {
    minus_after[i] = minus_after[i + 1] && !blocks[i].any_plus;
    plus_after[i] = plus_after[i + 1] && !blocks[i].any_minus;
  }

  auto between = [&](std::size_t i) {
    if (i == 0) return blocks.front().value - 1.0;
    if (i == B) return blocks.back().value + 1.0;
    return 0.5 * (blocks[i - 1].value + blocks[i].value);
  };

  UnivariateSeparation out;
  // A threshold strictly between blocks i-1 and i (or beyond the range).
  for (std::size_t i = 0; i <= B; ++i) {
    if (minus_before[i] && plus_after[i]) {
      out = {true, between(i), +1};
      return out;
    }
    if (plus_before[i] && minus_after[i]) {
      out = {true, between(i), -1};
      return out;
    }
  }
  // A threshold sitting exactly on block i, whose labels are then free.
  // This needs a second block: with all points on the hyperplane no margin
  // is strictly positive, which is overlap, not separation.
  if (B > 1) {
    for (std::size_t i = 0; i < B; ++i) {
      if (minus_before[i] && plus_after[i + 1]) {
        out = {true, blocks[i].value, +1};
        return out;
      }
      if (plus_before[i] && minus_after[i + 1]) {
        out = {true, blocks[i].value, -1};
        return out;
      }
    }
  }
  return out;
}

}  // namespace phaseglm
