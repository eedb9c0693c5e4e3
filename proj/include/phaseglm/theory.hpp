#pragma once

#include <Eigen/Core>
#include <vector>

#include "phaseglm/glm.hpp"
#include "phaseglm/radial.hpp"
#include "phaseglm/rng.hpp"

namespace phaseglm {

// Label-weighted CDF estimates of the projected covariate U^(p):
//   G_+(x)    = E[ p_+(U) 1{U <= x} ]      Gbar_+(x) = E[ p_+(U) 1{U > x} ]
// and likewise with p_-. By construction G_s(x) + Gbar_s(x) = E p_s(U) for
// every x, and G_+ + G_- is the plain CDF of U.
struct GFunctionEstimate {
  Eigen::VectorXd x_grid;
  Eigen::VectorXd G_plus, G_minus, Gbar_plus, Gbar_minus;
  // Standard errors of the two one-sided mixture masses that govern
  // separation: se_minus_plus for G_- + Gbar_+, se_plus_minus for the mirror.
  Eigen::VectorXd se_minus_plus, se_plus_minus;
  double ep_plus = 0.0;   // E p_+(U)
  double ep_minus = 0.0;  // E p_-(U)
  int mc_samples = 0;
};

GFunctionEstimate estimate_g_functions(const ModelParams& params, Link link,
                                       const RadialSpec& radial, int p,
                                       const Eigen::VectorXd& x_grid,
                                       int mc_samples, Rng& rng);

// Sufficient condition for fast decay of the separation probability: the
// one-sided mixture mass max(G_- + Gbar_+, G_+ + Gbar_-) stays bounded away
// from 1 over the grid. `holds` requires sup < 1 - 3 * (MC standard error at
// the supremum).
struct PgSuffResult {
  double sup = 0.0;
  double x_at_sup = 0.0;
  double se_at_sup = 0.0;
  double epsilon = 0.0;  // 1 - sup
  bool holds = false;
};

PgSuffResult check_pgsuff(const GFunctionEstimate& gfun);

// Scaled one-sided separation masses
//   n * E[ p_+(U) (G_-(U) + Gbar_+(U))^{n-1} ]   (scaled_plus)
// and the mirrored quantity (scaled_minus), evaluated with empirical
// G-functions on one Monte Carlo sample. Their sum is the probability that n
// i.i.d. labelled points are monotonely separable by a threshold.
struct PgConditionRow {
  int n = 0;
  double scaled_plus = 0.0;
  double scaled_minus = 0.0;
  double se = 0.0;  // MC standard error of the sum
};

struct PgConditionResult {
  std::vector<PgConditionRow> rows;
  // True when the summed scaled mass strictly decreases along n_list,
  // consistent with the o(1/n) requirement.
  bool decreasing = false;
};

PgConditionResult check_pg_condition(const ModelParams& params, Link link,
                                     const RadialSpec& radial, int p,
                                     const std::vector<int>& n_list,
                                     int mc_samples, Rng& rng);

// Exact probability that a size-n univariate sample is separable, via the
// order-statistics identity
//   P = (E p_-)^n
//     + n E[ p_+ ((G_- + Gbar_+)^{n-1} - Gbar_+^{n-1}) ]
//     + n E[ p_- ((G_+ + Gbar_-)^{n-1} - Gbar_-^{n-1}) ]
//     + (E p_+)^n,
// i.e. the two pure labelings plus the mixed monotone patterns counted once
// each (the subtracted powers remove the pure patterns from the one-sided
// terms, since n E[p_+ Gbar_+^{n-1}] = (E p_+)^n).
struct SeparationProbability {
  double probability = 0.0;
  double terms[4] = {0.0, 0.0, 0.0, 0.0};
  double se = 0.0;
};

SeparationProbability univariate_separation_probability(
    const ModelParams& params, Link link, const RadialSpec& radial, int p,
    int n, int mc_samples, Rng& rng);

}  // namespace phaseglm
