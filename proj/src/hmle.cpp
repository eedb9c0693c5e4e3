#include "phaseglm/hmle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "phaseglm/threading.hpp"

namespace phaseglm {

SaaSample draw_saa_sample(int n, int p, const ModelParams& params, Link link,
                          const RadialSpec& radial, Rng& rng) {
  if (n <= 0 || p <= 0)
    throw std::invalid_argument("draw_saa_sample: n and p must be positive");
  auto [labels, proj] = project_samples(n, p, params, link, radial, rng);
  SaaSample s;
  s.y = labels.cast<double>();
  s.x = proj;  // already the signed projection v * u
  s.z.resize(n);
  rng.fill_normal(s.z);
  return s;
}

ObjectiveEval empirical_objective(const Eigen::Vector2d& lambda,
                                  const SaaSample& sample) {
  const Eigen::Index n = sample.y.size();
  if (sample.x.size() != n || sample.z.size() != n)
    throw std::invalid_argument("empirical_objective: component size mismatch");
  const double inv = 1.0 / static_cast<double>(n);

  Eigen::ArrayXd r =
      (lambda(0) * sample.y + lambda(1) * sample.x - sample.z).array();
  Eigen::ArrayXd rp = r.max(0.0);

  ObjectiveEval out;
  out.value = inv * rp.square().sum();
  out.grad(0) = 2.0 * inv * (rp * sample.y.array()).sum();
  out.grad(1) = 2.0 * inv * (rp * sample.x.array()).sum();

  Eigen::ArrayXd active = (r > 0.0).cast<double>();
  out.hess(0, 0) = 2.0 * inv * active.sum();  // y_i^2 = 1
  out.hess(0, 1) = 2.0 * inv *
                   (active * sample.y.array() * sample.x.array()).sum();
  out.hess(1, 0) = out.hess(0, 1);
  out.hess(1, 1) = 2.0 * inv * (active * sample.x.array().square()).sum();
  return out;
}

namespace {

// The empirical objective vanishes along a ray iff all vectors (y_i, x_i)
// fit in a closed half-plane through the origin, i.e. iff the largest
// circular gap between their angles reaches pi.
bool has_recession_direction(const SaaSample& s) {
  const Eigen::Index n = s.y.size();
  std::vector<double> ang(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) ang[i] = std::atan2(s.x(i), s.y(i));
  std::sort(ang.begin(), ang.end());
  double gap = ang.front() + 2.0 * M_PI - ang.back();
  for (std::size_t i = 1; i < ang.size(); ++i)
    gap = std::max(gap, ang[i] - ang[i - 1]);
  return gap >= M_PI - 1e-12;
}

}  // namespace

SaaMinimum minimize_saa(const SaaSample& sample, const NewtonOptions& opts) {
  SaaMinimum out;
  Eigen::Vector2d lambda = Eigen::Vector2d::Zero();
  ObjectiveEval f = empirical_objective(lambda, sample);
  int floor_run = 0;

  for (int it = 0; it < opts.max_iter; ++it) {
    out.iterations = it;
    if (f.grad.norm() <= opts.grad_tol) {
      out.flag = SolveFlag::Converged;
      break;
    }

    Eigen::Matrix2d H = f.hess;
    H(0, 0) += opts.ridge;
    H(1, 1) += opts.ridge;
    Eigen::Vector2d step = -H.ldlt().solve(f.grad);
    double descent = f.grad.dot(step);
    if (!(descent < 0.0) || !step.allFinite()) {
      step = -f.grad;  // fall back to steepest descent
      descent = -f.grad.squaredNorm();
    }

    // Armijo backtracking with step halving.
    double t = 1.0;
    Eigen::Vector2d trial;
    ObjectiveEval ft;
    bool moved = false;
    for (int h = 0; h < 60; ++h) {
      trial = lambda + t * step;
      ft = empirical_objective(trial, sample);
      if (ft.value <= f.value + opts.armijo_c * t * descent) {
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) {
      out.flag = SolveFlag::Converged;  // no meaningful decrease left
      break;
    }
    lambda = trial;
    f = ft;

    // Recession detection: the value hugs zero while the iterate escapes.
    if (f.value < opts.value_floor && lambda.norm() > opts.lambda_blowup) {
      if (++floor_run >= opts.floor_patience) {
        out.flag = SolveFlag::UnboundedDirection;
        out.value = 0.0;
        out.lambda = lambda;
        out.iterations = it + 1;
        return out;
      }
    } else {
      floor_run = 0;
    }

    // An exact zero is a global minimum; classify it before returning.
    if (f.value == 0.0) {
      out.flag = has_recession_direction(sample)
                     ? SolveFlag::UnboundedDirection
                     : SolveFlag::Converged;
      out.value = 0.0;
      out.lambda = lambda;
      out.iterations = it + 1;
      return out;
    }

    if (it + 1 == opts.max_iter) out.flag = SolveFlag::IterationLimit;
  }

  out.value = f.value;
  out.lambda = lambda;
  // Converging on top of the zero plateau (but not exactly at zero) is the
  // same situation as hitting an exact zero: when a half-plane fit confirms
  // a recession ray, the minimum is zero, not a positive stationary value.
  if (out.flag == SolveFlag::Converged && out.value < opts.value_floor &&
      has_recession_direction(sample)) {
    out.flag = SolveFlag::UnboundedDirection;
    out.value = 0.0;
  }
  return out;
}

HmleEstimate estimate_hmle(const ModelParams& params, Link link,
                           RadialFamily family, double aux, int p, int n,
                           int replicates, std::uint64_t seed, int threads) {
  if (replicates <= 0)
    throw std::invalid_argument("estimate_hmle: replicates must be positive");
  const RadialSpec radial = calibrate_radial(family, p, params.alpha0, aux);

  std::vector<double> minima(static_cast<std::size_t>(replicates));
  std::vector<char> unbounded(static_cast<std::size_t>(replicates), 0);
  Eigen::Vector2d last_min = Eigen::Vector2d::Zero();

  parallel_for(static_cast<std::size_t>(replicates), threads,
               [&](std::size_t r) {
                 Rng rng(derive_seed(
                     seed, {kHmleStream, static_cast<std::uint64_t>(p),
                            static_cast<std::uint64_t>(r)}));
                 SaaSample s = draw_saa_sample(n, p, params, link, radial, rng);
                 SaaMinimum m = minimize_saa(s);
                 minima[r] = m.value;
                 unbounded[r] = m.flag == SolveFlag::UnboundedDirection;
                 if (r + 1 == static_cast<std::size_t>(replicates))
                   last_min = m.lambda;
               });

  // Kahan-compensated mean in replicate order (thread-count independent).
  double sum = 0.0, comp = 0.0;
  for (double v : minima) {
    const double t = v - comp;
    const double u = sum + t;
    comp = (u - sum) - t;
    sum = u;
  }
  const double mean = sum / replicates;
  double ss = 0.0;
  for (double v : minima) ss += (v - mean) * (v - mean);

  HmleEstimate est;
  est.value = mean;
  est.spread = replicates > 1 ? std::sqrt(ss / (replicates - 1)) : 0.0;
  est.minimizer = last_min;
  est.p = p;
  est.n = n;
  est.replicates = replicates;
  est.unbounded_replicates =
      static_cast<int>(std::count(unbounded.begin(), unbounded.end(), 1));
  return est;
}

ConvergenceProfile hmle_convergence_profile(
    const ModelParams& params, Link link, RadialFamily family, double aux,
    const std::vector<int>& p_list, int n, int replicates, std::uint64_t seed,
    int threads) {
  ConvergenceProfile prof;
  prof.rows.reserve(p_list.size());
  for (int p : p_list)
    prof.rows.push_back(estimate_hmle(params, link, family, aux, p, n,
                                      replicates, seed, threads));
  double sum = 0.0;
  int count = 0;
  for (const auto& row : prof.rows) {
    if (static_cast<double>(row.p) / n >= 0.3 - 1e-12) {
      sum += row.value;
      ++count;
    }
  }
  if (count > 0) {
    prof.plateau = sum / count;
    prof.plateau_defined = true;
  } else {
    prof.plateau = std::numeric_limits<double>::quiet_NaN();
  }
  return prof;
}

}  // namespace phaseglm
