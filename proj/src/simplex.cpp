#include "phaseglm/simplex.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace phaseglm {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using RowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum : std::int8_t { kAtLower = 0, kAtUpper = 1, kBasic = 2 };

// Bounded-variable simplex on the computational form
//   minimize g'z   s.t.   W z = h,   0 <= z_j <= cap_j,
// started from a given basic feasible solution whose basis columns form the
// identity in W. The tableau W is overwritten with B^{-1} W as pivots occur.
struct Kernel {
  RowMat W;                         // m x N tableau
  Eigen::VectorXd cap;              // N variable caps (may be +inf)
  Eigen::VectorXd g;                // N costs
  Eigen::VectorXd xB;               // m basic values
  Eigen::VectorXd d;                // N reduced costs
  std::vector<int> basis;           // row -> variable
  std::vector<std::int8_t> status;  // variable -> kAtLower/kAtUpper/kBasic
  double obj = 0.0;
  LpStatus final_status = LpStatus::Optimal;
  int pivots = 0;
  bool early_exit = false;
  // Optional caller probe, run every kProbeStride pivots; returning true
  // stops the solve with early_exit set (used to detect that a satisfactory
  // primal point is already recoverable from a partially solved dual).
  std::function<bool()> probe;
  static constexpr int kProbeStride = 128;

  int rows() const { return static_cast<int>(W.rows()); }
  int cols() const { return static_cast<int>(W.cols()); }

  // Recomputes reduced costs and objective for the current basis (used when
  // entering phase 2 with a new cost vector).
  void reset_costs() {
    Eigen::VectorXd gB(rows());
    for (int i = 0; i < rows(); ++i) gB(i) = g(basis[i]);
    d = g - W.transpose() * gB;
    obj = 0.0;
    for (int i = 0; i < rows(); ++i) obj += g(basis[i]) * xB(i);
    for (int j = 0; j < cols(); ++j)
      if (status[j] == kAtUpper) obj += g(j) * cap(j);
  }

  // Runs the simplex; stops at optimality, pivot cap, unboundedness, or when
  // the objective falls to stop_below.
  void run(int max_pivots, double stop_below) {
    const double dtol = 1e-9;
    const double ptol = 1e-10;
    bool bland = false;
    int stalled = 0;
    double last_obj = obj;
    // Devex reference weights: pricing picks the best violation^2 / weight,
    // which avoids the tiny-step zigzag of plain Dantzig pricing on the
    // heavily degenerate margin LPs this kernel is used for.
    Eigen::VectorXd devex = Eigen::VectorXd::Ones(cols());

    for (;;) {
      if (obj <= stop_below) {
        early_exit = true;
        return;
      }
      if (probe && pivots > 0 && pivots % kProbeStride == 0 && probe()) {
        early_exit = true;
        return;
      }
      // Pricing.
      int enter = -1;
      double best = 0.0;
      for (int j = 0; j < cols(); ++j) {
        if (status[j] == kBasic) continue;
        const double viol = status[j] == kAtLower ? -d(j) : d(j);
        if (viol <= dtol) continue;
        if (bland) {
          enter = j;
          break;
        }
        const double score = viol * viol / devex(j);
        if (score > best) {
          best = score;
          enter = j;
        }
      }
      if (enter < 0) return;  // optimal

      if (pivots >= max_pivots) {
        final_status = LpStatus::IterationLimit;
        return;
      }
      ++pivots;

      const double dir = status[enter] == kAtLower ? 1.0 : -1.0;
      // Ratio test: basic i changes by -dir * W(i, enter) * t as the entering
      // variable moves by t >= 0 toward the other side of its range.
      double t = cap(enter);  // own-bound flip distance (may be +inf)
      int leave_row = -1;
      bool leave_to_upper = false;
      for (int i = 0; i < rows(); ++i) {
        const double w = dir * W(i, enter);
        double ti;
        bool to_upper;
        if (w > ptol) {
          ti = xB(i) / w;
          to_upper = false;
        } else if (w < -ptol && std::isfinite(cap(basis[i]))) {
          ti = (cap(basis[i]) - xB(i)) / (-w);
          to_upper = true;
        } else {
          continue;
        }
        bool better;
        if (ti < t - 1e-12) {
          better = true;
        } else if (ti < t + 1e-12 && leave_row >= 0) {
          // Tie: Bland takes the smallest leaving variable index, Dantzig the
          // largest pivot magnitude for stability.
          better = bland ? basis[i] < basis[leave_row]
                         : std::abs(w) > std::abs(dir * W(leave_row, enter));
        } else {
          better = false;
        }
        if (better) {
          t = ti;
          leave_row = i;
          leave_to_upper = to_upper;
        }
      }

      if (leave_row < 0) {
        // No basic variable blocks: either the entering variable flips across
        // its own range or the problem is unbounded.
        if (!std::isfinite(t)) {
          final_status = LpStatus::Unbounded;
          return;
        }
        obj += d(enter) * dir * t;
        for (int i = 0; i < rows(); ++i) xB(i) -= dir * W(i, enter) * t;
        status[enter] = status[enter] == kAtLower ? kAtUpper : kAtLower;
      } else {
        obj += d(enter) * dir * t;
        for (int i = 0; i < rows(); ++i) xB(i) -= dir * W(i, enter) * t;
        const double enter_val =
            status[enter] == kAtLower ? dir * t : cap(enter) + dir * t;
        const int leave_var = basis[leave_row];
        status[leave_var] = leave_to_upper ? kAtUpper : kAtLower;
        status[enter] = kBasic;
        basis[leave_row] = enter;
        xB(leave_row) = enter_val;
        // Gauss-Jordan elimination on the entering column.
        const double piv = W(leave_row, enter);
        W.row(leave_row) /= piv;
        for (int i = 0; i < rows(); ++i) {
          if (i == leave_row) continue;
          const double f = W(i, enter);
          if (f != 0.0) W.row(i) -= f * W.row(leave_row);
        }
        const double f = d(enter);
        if (f != 0.0) d -= f * W.row(leave_row).transpose();
        // Approximate devex update from the normalised pivot row; the weight
        // of the leaving variable (tableau entry 1/piv) is covered by the
        // same formula. Reset the reference weights if they blow up.
        const double wq = devex(enter);
        double wmax = 1.0;
        for (int j = 0; j < cols(); ++j) {
          if (status[j] == kBasic) continue;
          const double a = W(leave_row, j);
          if (a != 0.0) devex(j) = std::max(devex(j), a * a * wq);
          wmax = std::max(wmax, devex(j));
        }
        if (wmax > 1e12) devex.setOnes();
      }

      // Stall handling: degenerate plateaus switch pricing to Bland's rule
      // (which cannot cycle, so each plateau is resolved in finitely many
      // pivots), and any strict objective decrease hands control back to
      // Dantzig pricing for speed.
      if (obj < last_obj - 1e-12 * (1.0 + std::abs(last_obj))) {
        last_obj = obj;
        stalled = 0;
        bland = false;
      } else if (++stalled >= 64) {
        bland = true;
      }
    }
  }
};

double clamp0(double lo, double hi) { return std::min(std::max(0.0, lo), hi); }

}  // namespace

LpResult solve_box_lp(const Eigen::VectorXd& c, const Eigen::MatrixXd& A,
                      const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                      const LpOptions& opts) {
  const int dim = static_cast<int>(c.size());
  const int n = static_cast<int>(A.rows());
  if (A.size() != 0 && A.cols() != dim)
    throw std::invalid_argument("solve_box_lp: A column count mismatch");
  for (int j = 0; j < dim; ++j)
    if (!(lo(j) < hi(j)) || !std::isfinite(lo(j)) || !std::isfinite(hi(j)))
      throw std::invalid_argument("solve_box_lp: need finite lo < hi");

  // Computational form: x = m0 + x+ - x-, m0 the box point nearest 0, with
  // slack s = A x >= 0. Rows infeasible at x = m0 get phase-1 artificials.
  Eigen::VectorXd m0(dim);
  for (int j = 0; j < dim; ++j) m0(j) = clamp0(lo(j), hi(j));
  const Eigen::VectorXd h = A.size() ? Eigen::VectorXd(-A * m0)
                                     : Eigen::VectorXd::Zero(0);

  int n_art = 0;
  for (int i = 0; i < n; ++i)
    if (h(i) > 0.0) ++n_art;

  const int N = 2 * dim + n + n_art;
  Kernel k;
  k.W.setZero(n, N);
  k.cap.setConstant(N, kInf);
  k.g.setZero(N);
  k.xB.setZero(n);
  k.basis.resize(n);
  k.status.assign(N, kAtLower);

  for (int j = 0; j < dim; ++j) {
    k.cap(j) = hi(j) - m0(j);
    k.cap(dim + j) = m0(j) - lo(j);
  }
  int art = 2 * dim + n;
  for (int i = 0; i < n; ++i) {
    const double flip = h(i) > 0.0 ? 1.0 : -1.0;
    k.W.row(i).segment(0, dim) = flip * A.row(i);
    k.W.row(i).segment(dim, dim) = -flip * A.row(i);
    k.W(i, 2 * dim + i) = -flip;
    if (h(i) > 0.0) {
      k.W(i, art) = 1.0;
      k.g(art) = 1.0;
      k.basis[i] = art;
      k.xB(i) = h(i);
      k.status[art] = kBasic;
      ++art;
    } else {
      k.basis[i] = 2 * dim + i;
      k.xB(i) = -h(i);
      k.status[2 * dim + i] = kBasic;
    }
  }

  const int max_pivots =
      opts.max_pivots > 0 ? opts.max_pivots : 50 * (n + N);

  LpResult res;
  if (n_art > 0) {
    k.reset_costs();
    k.run(max_pivots, -kInf);
    // Pivot budget is shared across the two phases (absolute counter).
    if (k.final_status != LpStatus::Optimal) {
      res.status = k.final_status;
      res.pivots = k.pivots;
      return res;
    }
    if (k.obj > opts.feas_tol * (1.0 + h.cwiseAbs().maxCoeff())) {
      res.status = LpStatus::Infeasible;
      res.pivots = k.pivots;
      return res;
    }
    // Freeze artificials at zero for phase 2.
    for (int j = 2 * dim + n; j < N; ++j) k.cap(j) = 0.0;
  }

  // Phase 2: maximize c'x = c'm0 + c'x+ - c'x-.
  k.g.setZero();
  k.g.segment(0, dim) = -c;
  k.g.segment(dim, dim) = c;
  k.reset_costs();
  const double offset = c.dot(m0);
  k.run(max_pivots, offset - opts.stop_above);

  res.status = k.final_status;
  res.pivots = k.pivots;
  res.early_exit = k.early_exit;
  res.value = offset - k.obj;
  Eigen::VectorXd z = Eigen::VectorXd::Zero(N);
  for (int j = 0; j < N; ++j)
    if (k.status[j] == kAtUpper && std::isfinite(k.cap(j))) z(j) = k.cap(j);
  for (int i = 0; i < n; ++i) z(k.basis[i]) = k.xB(i);
  res.x = m0 + z.segment(0, dim) - z.segment(dim, dim);
  return res;
}

LpResult solve_box_lp_dual(const Eigen::VectorXd& c, const Eigen::MatrixXd& A,
                           const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                           const LpOptions& opts) {
  const int dim = static_cast<int>(c.size());
  const int n = static_cast<int>(A.rows());
  if (A.size() != 0 && A.cols() != dim)
    throw std::invalid_argument("solve_box_lp_dual: A column count mismatch");

  // Dual equalities: A'u - v + w = -c, u,v,w >= 0,
  // objective min hi'v - lo'w; rows are flipped so the starting basis
  // (v_j or w_j by sign of -c_j) sits on +1 columns.
  const int N = n + 2 * dim;
  Kernel k;
  k.W.setZero(dim, N);
  k.cap.setConstant(N, kInf);
  k.g.setZero(N);
  k.xB.setZero(dim);
  k.basis.resize(dim);
  k.status.assign(N, kAtLower);

  Eigen::VectorXd flip(dim);
  for (int j = 0; j < dim; ++j) flip(j) = -c(j) >= 0.0 ? 1.0 : -1.0;
  if (n > 0)
    k.W.block(0, 0, dim, n) = flip.asDiagonal() * A.transpose();
  for (int j = 0; j < dim; ++j) {
    k.W(j, n + j) = -flip(j);            // v_j
    k.W(j, n + dim + j) = flip(j);       // w_j
    k.g(n + j) = hi(j);
    k.g(n + dim + j) = -lo(j);
    if (flip(j) > 0.0) {
      k.basis[j] = n + dim + j;  // w_j basic
      k.xB(j) = -c(j);
      k.status[n + dim + j] = kBasic;
    } else {
      k.basis[j] = n + j;  // v_j basic
      k.xB(j) = c(j);
      k.status[n + j] = kBasic;
    }
  }

  const int max_pivots = opts.max_pivots > 0 ? opts.max_pivots : 50 * (dim + N);

  Eigen::VectorXd probe_x;
  if (std::isfinite(opts.stop_primal_above)) {
    k.probe = [&, x = Eigen::VectorXd(dim)]() mutable {
      for (int j = 0; j < dim; ++j)
        x(j) = std::min(hi(j), std::max(lo(j), hi(j) - k.d(n + j)));
      if (c.dot(x) < opts.stop_primal_above) return false;
      // Exact feasibility on the original rows makes the recovered point a
      // certificate rather than an estimate.
      if (n > 0 && (A * x).minCoeff() < 0.0) return false;
      probe_x = x;
      return true;
    };
  }

  k.reset_costs();
  k.run(max_pivots, opts.stop_below);

  LpResult res;
  res.status = k.final_status;
  res.pivots = k.pivots;
  res.early_exit = k.early_exit;
  if (probe_x.size() > 0) {
    res.value = c.dot(probe_x);
    res.x = probe_x;
    return res;
  }
  res.value = k.obj;
  // Primal solution from the dual reduced costs: x_j = hi_j - d(v_j)
  // (equivalently lo_j + d(w_j)).
  res.x.resize(dim);
  for (int j = 0; j < dim; ++j)
    res.x(j) = std::min(hi(j), std::max(lo(j), hi(j) - k.d(n + j)));
  return res;
}

}  // namespace phaseglm
