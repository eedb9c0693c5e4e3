#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <utility>

#include "phaseglm/elliptical.hpp"

namespace phaseglm {

enum class Link { Logit, Probit, Cloglog };

// P(Y = +1 | linear predictor t). Stable for |t| up to ~700.
double link_eval(Link link, double t);

struct ModelParams {
  double alpha0 = 1.0;  // sqrt of limiting E R^2 / p
  double beta0 = 0.0;   // intercept
  double gamma0 = 1.0;  // limiting signal strength |Sigma^{1/2} beta| * alpha0
};

// sigma(beta0 + (gamma0/alpha0) * x) and its complement.
double p_plus(Link link, const ModelParams& params, double x);
double p_minus(Link link, const ModelParams& params, double x);

// Coefficient construction: (W/||W|| + 1/p per coordinate) * gamma0/alpha0
// with W standard Gaussian in dimension p.
Eigen::VectorXd make_beta(int p, const ModelParams& params, Rng& rng);

struct Dataset {
  Eigen::MatrixXd X;      // n x p covariates
  Eigen::VectorXi y;      // labels in {-1, +1}
  Eigen::VectorXd beta;   // coefficient in covariate coordinates
  ModelParams params;
  Link link = Link::Logit;
  std::uint64_t seed = 0;
};

// Synthetic dataset: covariates from the elliptical sampler (mu = 0),
// labels y_i = +1 with probability sigma(beta0 + x_i' beta).
// With a non-identity mix A the generator draws the underlying spherical
// z_i (x_i = A z_i) and stores beta = A^{-T} beta_cal, so the label law above
// holds verbatim while |Sigma^{1/2} beta| keeps the calibrated value and the
// draw-for-draw agreement with the identity-mix run is exact.
Dataset generate_dataset(int n, int p, const ModelParams& params, Link link,
                         const RadialSpec& radial, const Eigen::MatrixXd& mix,
                         Rng& rng, std::uint64_t seed = 0);

// n draws of (y, x) from the univariate limit family: u = sample_projection,
// v = +1 w.p. sigma(beta0 + gamma0 u / alpha0), pair = (v, v*u).
std::pair<Eigen::VectorXi, Eigen::VectorXd> project_samples(
    int n, int p, const ModelParams& params, Link link,
    const RadialSpec& radial, Rng& rng);

}  // namespace phaseglm
