#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "phaseglm/glm.hpp"
#include "phaseglm/radial.hpp"
#include "phaseglm/rng.hpp"

namespace phaseglm {

// One Monte Carlo draw of the limiting objective
//   Q(l0, l1) = E ( l0 Y + l1 X - Z )_+^2,
// where (Y, X) is a signed one-dimensional projection of the covariate model
// and Z is independent standard normal. The empirical version averages over
// the stored triples.
struct SaaSample {
  Eigen::VectorXd y;  // labels as +/-1 doubles
  Eigen::VectorXd x;  // signed projections y * u
  Eigen::VectorXd z;  // independent standard normals
};

SaaSample draw_saa_sample(int n, int p, const ModelParams& params, Link link,
                          const RadialSpec& radial, Rng& rng);

struct ObjectiveEval {
  double value = 0.0;
  Eigen::Vector2d grad = Eigen::Vector2d::Zero();
  // Generalized second derivative: the hinge (r)_+^2 is C^1 with piecewise
  // linear gradient; the Hessian below uses the active set {r > 0}.
  Eigen::Matrix2d hess = Eigen::Matrix2d::Zero();
};

ObjectiveEval empirical_objective(const Eigen::Vector2d& lambda,
                                  const SaaSample& sample);

enum class SolveFlag { Converged, IterationLimit, UnboundedDirection };

struct SaaMinimum {
  double value = 0.0;
  Eigen::Vector2d lambda = Eigen::Vector2d::Zero();
  int iterations = 0;
  SolveFlag flag = SolveFlag::Converged;
};

struct NewtonOptions {
  double grad_tol = 1e-10;
  int max_iter = 500;
  double ridge = 1e-10;     // Hessian regularisation
  double armijo_c = 1e-4;   // sufficient-decrease constant
  // Divergence heuristic: after this many consecutive iterates with value
  // below value_floor and |lambda| above lambda_blowup, the minimum is
  // declared zero along an unbounded direction.
  double value_floor = 1e-12;
  double lambda_blowup = 1e6;
  int floor_patience = 30;
};

// Damped (Armijo-backtracked) Newton minimisation of the empirical objective
// from lambda = 0. The objective is convex, C^1, and piecewise quadratic, so
// Newton steps on the generalized Hessian converge fast away from
// degeneracies; when the sample admits directions of recession the solver
// reports value 0 with the UnboundedDirection flag.
SaaMinimum minimize_saa(const SaaSample& sample, const NewtonOptions& opts = {});

struct HmleEstimate {
  double value = 0.0;          // replicate mean of the SAA minima
  double spread = 0.0;         // replicate standard deviation
  Eigen::Vector2d minimizer;   // minimiser of the last replicate
  int p = 0;
  int n = 0;
  int replicates = 0;
  int unbounded_replicates = 0;
};

// Monte Carlo estimate of the phase-transition threshold at projection
// dimension p: replicate streams are derived from `seed`, each solves one
// SAA instance of size n, and the minima are averaged in replicate order
// (Kahan summation), independent of the thread count.
HmleEstimate estimate_hmle(const ModelParams& params, Link link,
                           RadialFamily family, double aux, int p, int n,
                           int replicates, std::uint64_t seed, int threads = 1);

struct ConvergenceProfile {
  std::vector<HmleEstimate> rows;
  // Average of the estimates with p/n >= 0.3, where the sequence has leveled
  // off; NaN when no p qualifies.
  double plateau = 0.0;
  bool plateau_defined = false;
};

// h_MLE is a limit in the projection dimension; this tabulates the estimate
// along increasing p (radial scale recalibrated at every p) and averages the
// settled tail.
ConvergenceProfile hmle_convergence_profile(const ModelParams& params,
                                            Link link, RadialFamily family,
                                            double aux,
                                            const std::vector<int>& p_list,
                                            int n, int replicates,
                                            std::uint64_t seed,
                                            int threads = 1);

}  // namespace phaseglm
