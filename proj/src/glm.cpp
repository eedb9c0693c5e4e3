#include "phaseglm/glm.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace phaseglm {

double link_eval(Link link, double t) {
  switch (link) {
    case Link::Logit:
      // e^t/(1+e^t) without overflow on either tail.
      return t >= 0.0 ? 1.0 / (1.0 + std::exp(-t))
                      : std::exp(t) / (1.0 + std::exp(t));
    case Link::Probit:
      return 0.5 * std::erfc(-t / M_SQRT2);
    case Link::Cloglog:
      // 1 - exp(-e^t); exp(t) saturating to inf is fine (result -> 1).
      return -std::expm1(-std::exp(t));
  }
  return 0.0;  // unreachable
}

double p_plus(Link link, const ModelParams& params, double x) {
  return link_eval(link, params.beta0 + params.gamma0 / params.alpha0 * x);
}

double p_minus(Link link, const ModelParams& params, double x) {
  return 1.0 - p_plus(link, params, x);
}

Eigen::VectorXd make_beta(int p, const ModelParams& params, Rng& rng) {
  if (p < 1) throw InvalidParameter("make_beta: p must be >= 1");
  if (!(params.alpha0 > 0.0))
    throw InvalidParameter("make_beta: alpha0 must be > 0");
  Eigen::VectorXd w(p);
  rng.fill_normal(w);
  const double norm = w.norm();
  const double c = params.gamma0 / params.alpha0;
  return c * (w / norm).array() + c / static_cast<double>(p);
}

Dataset generate_dataset(int n, int p, const ModelParams& params, Link link,
                         const RadialSpec& radial, const Eigen::MatrixXd& mix,
                         Rng& rng, std::uint64_t seed) {
  if (n < 1 || p < 1)
    throw InvalidParameter("generate_dataset: n and p must be >= 1");
  const bool mixed = mix.size() != 0;

  Dataset ds;
  ds.params = params;
  ds.link = link;
  ds.seed = seed;

  const Eigen::VectorXd beta_cal = make_beta(p, params, rng);

  EllipticalSpec espec;
  espec.p = p;
  espec.radial = radial;
  // Draw the underlying spherical rows; mix is applied afterwards so the
  // label draws are identical across mixes with the same stream.
  const Eigen::MatrixXd Z = sample_elliptical(espec, n, rng);

  ds.y.resize(n);
  for (int i = 0; i < n; ++i) {
    const double prob = link_eval(link, params.beta0 + Z.row(i) * beta_cal);
    ds.y(i) = rng.uniform() < prob ? 1 : -1;
  }

  if (mixed) {
    if (mix.rows() != p || mix.cols() != p)
      throw InvalidParameter("generate_dataset: mix must be p x p");
    ds.X.noalias() = Z * mix.transpose();
    // beta in covariate coordinates: x_i' beta = z_i' beta_cal exactly.
    ds.beta = mix.transpose().partialPivLu().solve(beta_cal);
  } else {
    ds.X = Z;
    ds.beta = beta_cal;
  }
  return ds;
}

std::pair<Eigen::VectorXi, Eigen::VectorXd> project_samples(
    int n, int p, const ModelParams& params, Link link,
    const RadialSpec& radial, Rng& rng) {
  if (n < 1) throw InvalidParameter("project_samples: n must be >= 1");
  Eigen::VectorXi y(n);
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) {
    const double u = sample_projection(radial, p, rng);
    const int v = rng.uniform() < p_plus(link, params, u) ? 1 : -1;
    y(i) = v;
    x(i) = v * u;
  }
  return {y, x};
}

}  // namespace phaseglm
