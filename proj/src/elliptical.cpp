#include "phaseglm/elliptical.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace phaseglm {

Eigen::VectorXd sample_sphere(int p, Rng& rng) {
  if (p < 1) throw InvalidParameter("sample_sphere: p must be >= 1");
  Eigen::VectorXd g(p);
  double norm = 0.0;
  do {
    rng.fill_normal(g);
    norm = g.norm();
  } while (norm == 0.0);
  return g / norm;
}

static void validate_spec(const EllipticalSpec& spec) {
  if (spec.p < 1) throw InvalidParameter("sample_elliptical: p must be >= 1");
  if (spec.mu.size() != 0 && spec.mu.size() != spec.p)
    throw InvalidParameter("sample_elliptical: mu must have length p");
  if (spec.mix.size() != 0) {
    if (spec.mix.rows() != spec.p || spec.mix.cols() != spec.p)
      throw InvalidParameter("sample_elliptical: mix must be p x p");
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(spec.mix);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= 1e-10 * sv(0))
      throw InvalidParameter("sample_elliptical: mix is rank deficient");
  }
}

Eigen::MatrixXd sample_elliptical(const EllipticalSpec& spec, int n, Rng& rng) {
  if (n < 1) throw InvalidParameter("sample_elliptical: n must be >= 1");
  validate_spec(spec);
  const bool mixed = spec.mix.size() != 0;
  const bool shifted = spec.mu.size() != 0;
  Eigen::MatrixXd X(n, spec.p);
  Eigen::VectorXd u(spec.p);
  for (int i = 0; i < n; ++i) {
    u = sample_sphere(spec.p, rng);
    const double r = sample_radial(spec.radial, rng);
    if (mixed)
      X.row(i).noalias() = (r * (spec.mix * u)).transpose();
    else
      X.row(i) = (r * u).transpose();
    if (shifted) X.row(i) += spec.mu.transpose();
  }
  return X;
}

double sample_projection(const RadialSpec& radial, int p, Rng& rng) {
  const double s1 = sample_sphere(p, rng)(0);
  return sample_radial(radial, rng) * s1;
}

std::optional<double> projection_moment(const RadialSpec& radial, int p,
                                        int k) {
  if (p < 1) throw InvalidParameter("projection_moment: p must be >= 1");
  if (k < 0) throw InvalidParameter("projection_moment: k must be >= 0");
  if (k == 0) return 1.0;
  if (k % 2 == 1) return 0.0;
  const auto mr = radial_moment(radial, k);
  if (!mr) return std::nullopt;
  // E S1^{2j} = (2j-1)!! / (p(p+2)...(p+2j-2))
  const int j = k / 2;
  double s1m = 1.0;
  for (int i = 0; i < j; ++i)
    s1m *= static_cast<double>(2 * i + 1) / static_cast<double>(p + 2 * i);
  return *mr * s1m;
}

ProjectionMoments carleman_from_moments(const std::vector<double>& even_moments,
                                        bool all_finite) {
  ProjectionMoments out;
  double sum = 0.0;
  for (std::size_t k = 1; k <= even_moments.size(); ++k) {
    const double t =
        std::pow(even_moments[k - 1], -1.0 / (2.0 * static_cast<double>(k)));
    out.terms.push_back(t);
    sum += t;
    out.partial_sums.push_back(sum);
  }
  if (!all_finite) {
    out.verdict = CarlemanVerdict::Inapplicable;
    return out;
  }
  // Verdict from the trailing ratios t_{k+1}/t_k (up to the last 5).
  const std::size_t K = out.terms.size();
  if (K < 3) {
    out.verdict = CarlemanVerdict::Inconclusive;
    return out;
  }
  const std::size_t nratios = std::min<std::size_t>(5, K - 1);
  bool slower_than_harmonic = true;  // ratio >= k/(k+1): sum likely diverges
  bool geometric = true;             // ratio < 0.9 sustained: sum converges
  for (std::size_t k = K - nratios; k < K; ++k) {
    const double ratio = out.terms[k] / out.terms[k - 1];
    const double harmonic = static_cast<double>(k) / static_cast<double>(k + 1);
    if (ratio < harmonic * (1.0 - 1e-9)) slower_than_harmonic = false;
    if (ratio >= 0.9) geometric = false;
  }
  if (slower_than_harmonic)
    out.verdict = CarlemanVerdict::DivergesLikely;
  else if (geometric)
    out.verdict = CarlemanVerdict::ConvergesLikely;
  else
    out.verdict = CarlemanVerdict::Inconclusive;
  return out;
}

ProjectionMoments carleman_partial_sums(const RadialSpec& radial, int p,
                                        int K) {
  if (K < 1) throw InvalidParameter("carleman_partial_sums: K must be >= 1");
  std::vector<double> moments;
  bool all_finite = true;
  for (int k = 1; k <= K; ++k) {
    const auto m = projection_moment(radial, p, 2 * k);
    if (!m) {
      all_finite = false;
      break;
    }
    moments.push_back(*m);
  }
  ProjectionMoments out = carleman_from_moments(moments, all_finite);
  out.p = p;
  return out;
}

}  // namespace phaseglm
