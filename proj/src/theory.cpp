#include "phaseglm/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace phaseglm {

namespace {

// Sorted Monte Carlo draws of the projection with label weights and the
// empirical one-sided masses evaluated at each draw (ties share boundaries):
//   phi_plus(j)  = Ghat_-(u_j) + Gbarhat_+(u_j)   (inclusive <=, exclusive >)
//   phi_minus(j) = Ghat_+(u_j) + Gbarhat_-(u_j)
struct SortedDraws {
  Eigen::VectorXd u, pp, pm;
  Eigen::VectorXd phi_plus, phi_minus, gbar_plus, gbar_minus;
  double ep_plus = 0.0, ep_minus = 0.0;
};

SortedDraws draw_sorted(const ModelParams& params, Link link,
                        const RadialSpec& radial, int p, int mc_samples,
                        Rng& rng) {
  if (mc_samples <= 0)
    throw std::invalid_argument("theory: mc_samples must be positive");
  const int N = mc_samples;
  SortedDraws s;
  s.u.resize(N);
  for (int j = 0; j < N; ++j) s.u(j) = sample_projection(radial, p, rng);
  std::sort(s.u.data(), s.u.data() + N);

  s.pp.resize(N);
  s.pm.resize(N);
  for (int j = 0; j < N; ++j) {
    s.pp(j) = p_plus(link, params, s.u(j));
    s.pm(j) = p_minus(link, params, s.u(j));
  }
  const double inv = 1.0 / N;
  const double sum_pp = s.pp.sum();
  const double sum_pm = s.pm.sum();
  s.ep_plus = sum_pp * inv;
  s.ep_minus = sum_pm * inv;

  s.phi_plus.resize(N);
  s.phi_minus.resize(N);
  s.gbar_plus.resize(N);
  s.gbar_minus.resize(N);
  // Walk blocks of tied values so that "<= u_j" includes the whole block.
  double cum_pp = 0.0, cum_pm = 0.0;
  int j = 0;
  while (j < N) {
    int k = j;
    double blk_pp = 0.0, blk_pm = 0.0;
    while (k < N && s.u(k) == s.u(j)) {
      blk_pp += s.pp(k);
      blk_pm += s.pm(k);
      ++k;
    }
    const double g_minus = (cum_pm + blk_pm) * inv;        // G_-(u_j), incl.
    const double g_plus = (cum_pp + blk_pp) * inv;         // G_+(u_j), incl.
    const double gb_plus = (sum_pp - cum_pp - blk_pp) * inv;   // Gbar_+, excl.
    const double gb_minus = (sum_pm - cum_pm - blk_pm) * inv;  // Gbar_-, excl.
    for (int i = j; i < k; ++i) {
      s.phi_plus(i) = g_minus + gb_plus;
      s.phi_minus(i) = g_plus + gb_minus;
      s.gbar_plus(i) = gb_plus;
      s.gbar_minus(i) = gb_minus;
    }
    cum_pp += blk_pp;
    cum_pm += blk_pm;
    j = k;
  }
  return s;
}

double variance_of(const Eigen::VectorXd& v) {
  const double m = v.mean();
  return (v.array() - m).square().sum() / v.size();
}

}  // namespace

GFunctionEstimate estimate_g_functions(const ModelParams& params, Link link,
                                       const RadialSpec& radial, int p,
                                       const Eigen::VectorXd& x_grid,
                                       int mc_samples, Rng& rng) {
  if (x_grid.size() == 0)
    throw std::invalid_argument("estimate_g_functions: empty grid");
  SortedDraws s = draw_sorted(params, link, radial, p, mc_samples, rng);
  const int N = mc_samples;
  const double inv = 1.0 / N;

  // Prefix sums over the sorted draws; grid evaluation by binary search.
  Eigen::VectorXd cpp(N + 1), cpm(N + 1), cpp2(N + 1), cpm2(N + 1);
  cpp(0) = cpm(0) = cpp2(0) = cpm2(0) = 0.0;
  for (int j = 0; j < N; ++j) {
    cpp(j + 1) = cpp(j) + s.pp(j);
    cpm(j + 1) = cpm(j) + s.pm(j);
    cpp2(j + 1) = cpp2(j) + s.pp(j) * s.pp(j);
    cpm2(j + 1) = cpm2(j) + s.pm(j) * s.pm(j);
  }

  GFunctionEstimate g;
  g.x_grid = x_grid;
  const Eigen::Index G = x_grid.size();
  g.G_plus.resize(G);
  g.G_minus.resize(G);
  g.Gbar_plus.resize(G);
  g.Gbar_minus.resize(G);
  g.se_minus_plus.resize(G);
  g.se_plus_minus.resize(G);
  g.ep_plus = s.ep_plus;
  g.ep_minus = s.ep_minus;
  g.mc_samples = N;

  for (Eigen::Index t = 0; t < G; ++t) {
    const double x = x_grid(t);
    const int k = static_cast<int>(
        std::upper_bound(s.u.data(), s.u.data() + N, x) - s.u.data());
    g.G_plus(t) = cpp(k) * inv;
    g.G_minus(t) = cpm(k) * inv;
    g.Gbar_plus(t) = (cpp(N) - cpp(k)) * inv;
    g.Gbar_minus(t) = (cpm(N) - cpm(k)) * inv;
    // One-draw statistics psi = p_- 1{<=x} + p_+ 1{>x} and its mirror; the
    // indicator cross-terms vanish, so E psi^2 has the same prefix shape.
    const double m1 = g.G_minus(t) + g.Gbar_plus(t);
    const double q1 = (cpm2(k) + (cpp2(N) - cpp2(k))) * inv;
    g.se_minus_plus(t) = std::sqrt(std::max(0.0, q1 - m1 * m1) / N);
    const double m2 = g.G_plus(t) + g.Gbar_minus(t);
    const double q2 = (cpp2(k) + (cpm2(N) - cpm2(k))) * inv;
    g.se_plus_minus(t) = std::sqrt(std::max(0.0, q2 - m2 * m2) / N);
  }
  return g;
}

PgSuffResult check_pgsuff(const GFunctionEstimate& gfun) {
  PgSuffResult r;
  r.sup = -1.0;
  for (Eigen::Index t = 0; t < gfun.x_grid.size(); ++t) {
    const double a = gfun.G_minus(t) + gfun.Gbar_plus(t);
    const double b = gfun.G_plus(t) + gfun.Gbar_minus(t);
    const double v = std::max(a, b);
    if (v > r.sup) {
      r.sup = v;
      r.x_at_sup = gfun.x_grid(t);
      r.se_at_sup = a >= b ? gfun.se_minus_plus(t) : gfun.se_plus_minus(t);
    }
  }
  r.epsilon = 1.0 - r.sup;
  r.holds = r.sup < 1.0 - 3.0 * r.se_at_sup;
  return r;
}

PgConditionResult check_pg_condition(const ModelParams& params, Link link,
                                     const RadialSpec& radial, int p,
                                     const std::vector<int>& n_list,
                                     int mc_samples, Rng& rng) {
  if (n_list.empty())
    throw std::invalid_argument("check_pg_condition: empty n_list");
  for (int n : n_list)
    if (n < 1) throw std::invalid_argument("check_pg_condition: n < 1");
  SortedDraws s = draw_sorted(params, link, radial, p, mc_samples, rng);
  const int N = mc_samples;

  PgConditionResult out;
  out.rows.reserve(n_list.size());
  for (int n : n_list) {
    Eigen::VectorXd zeta(N);
    for (int j = 0; j < N; ++j) {
      const double a = s.pp(j) * std::pow(s.phi_plus(j), n - 1);
      const double b = s.pm(j) * std::pow(s.phi_minus(j), n - 1);
      zeta(j) = static_cast<double>(n) * (a + b);
    }
    PgConditionRow row;
    row.n = n;
    row.scaled_plus =
        n * (s.pp.array() *
             s.phi_plus.array().pow(static_cast<double>(n - 1)))
                .mean();
    row.scaled_minus =
        n * (s.pm.array() *
             s.phi_minus.array().pow(static_cast<double>(n - 1)))
                .mean();
    row.se = std::sqrt(variance_of(zeta) / N);
    out.rows.push_back(row);
  }

  out.decreasing = out.rows.size() >= 2;
  for (std::size_t i = 1; i < out.rows.size(); ++i) {
    const double prev = out.rows[i - 1].scaled_plus + out.rows[i - 1].scaled_minus;
    const double cur = out.rows[i].scaled_plus + out.rows[i].scaled_minus;
    if (!(cur < prev)) out.decreasing = false;
  }
  return out;
}

SeparationProbability univariate_separation_probability(
    const ModelParams& params, Link link, const RadialSpec& radial, int p,
    int n, int mc_samples, Rng& rng) {
  if (n < 1)
    throw std::invalid_argument("univariate_separation_probability: n < 1");
  SortedDraws s = draw_sorted(params, link, radial, p, mc_samples, rng);
  const int N = mc_samples;
  const double nn = static_cast<double>(n);

  SeparationProbability out;
  out.terms[0] = std::pow(s.ep_minus, n);
  out.terms[3] = std::pow(s.ep_plus, n);

  Eigen::VectorXd mixed_plus(N), mixed_minus(N);
  for (int j = 0; j < N; ++j) {
    mixed_plus(j) = s.pp(j) * (std::pow(s.phi_plus(j), n - 1) -
                               std::pow(s.gbar_plus(j), n - 1));
    mixed_minus(j) = s.pm(j) * (std::pow(s.phi_minus(j), n - 1) -
                                std::pow(s.gbar_minus(j), n - 1));
  }
  out.terms[1] = nn * mixed_plus.mean();
  out.terms[2] = nn * mixed_minus.mean();
  out.probability = out.terms[0] + out.terms[1] + out.terms[2] + out.terms[3];

  // First-order error: variance of the per-draw mixed statistic plus
  // delta-method terms for the pure-pattern powers.
  Eigen::VectorXd zeta = nn * (mixed_plus + mixed_minus);
  const double var_zeta = variance_of(zeta);
  const double dp = nn * std::pow(s.ep_plus, n - 1);
  const double dm = nn * std::pow(s.ep_minus, n - 1);
  const double var_pp = variance_of(s.pp);
  const double var_pm = variance_of(s.pm);
  out.se = std::sqrt((var_zeta + dp * dp * var_pp + dm * dm * var_pm) / N);
  return out;
}

}  // namespace phaseglm
