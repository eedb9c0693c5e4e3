#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "phaseglm/radial.hpp"

namespace phaseglm {

// Elliptical covariates X = mu + R * A * U with U uniform on the sphere.
// Empty mu means 0; empty mix means the identity.
struct EllipticalSpec {
  int p = 1;
  RadialSpec radial;
  Eigen::VectorXd mu;   // size 0 or p
  Eigen::MatrixXd mix;  // size 0 or p x p, full rank
};

enum class CarlemanVerdict {
  DivergesLikely,
  ConvergesLikely,
  Inconclusive,
  Inapplicable,  // some required even moment diverges
};

// Even-moment diagnostics of the projection U^(p) = R * S1.
struct ProjectionMoments {
  int p = 0;
  std::vector<double> terms;         // t_k = m_{p,2k}^{-1/(2k)}, k = 1..K'
  std::vector<double> partial_sums;  // prefix sums of terms
  CarlemanVerdict verdict = CarlemanVerdict::Inconclusive;
};

// Uniform draw on the unit sphere in R^p (normalized standard Gaussian).
Eigen::VectorXd sample_sphere(int p, Rng& rng);

// n i.i.d. rows mu + R_i * A * U_i. Validates the spec (mix full rank to
// relative tolerance 1e-10 on singular values).
Eigen::MatrixXd sample_elliptical(const EllipticalSpec& spec, int n, Rng& rng);

// One draw of the scalar projection U^(p) = R * S1, S1 the first coordinate of
// a uniform sphere point (sampled via the full sphere draw).
double sample_projection(const RadialSpec& radial, int p, Rng& rng);

// m_{p,k} = E R^k * E S1^k; zero for odd k,
// E S1^{2j} = (2j-1)!! / (p(p+2)...(p+2j-2)). nullopt when E R^k diverges.
std::optional<double> projection_moment(const RadialSpec& radial, int p, int k);

// Partial sums of m_{p,2k}^{-1/(2k)} for k = 1..K with a divergence-heuristic
// verdict: diverges-likely when the last ratios decay slower than k^{-1},
// converges-likely when they decay geometrically (ratio < 0.9 sustained).
ProjectionMoments carleman_partial_sums(const RadialSpec& radial, int p, int K);

// Same heuristic applied to an explicit list of even moments m_{2}, m_4, ...
// (used internally and as a pure-math oracle hook).
ProjectionMoments carleman_from_moments(const std::vector<double>& even_moments,
                                        bool all_finite);

}  // namespace phaseglm
