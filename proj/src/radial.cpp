#include "phaseglm/radial.hpp"

#include <cmath>

namespace phaseglm {

RadialSpec calibrate_radial(RadialFamily family, int p, double alpha0,
                            double aux) {
  if (p < 1) throw InvalidParameter("calibrate_radial: p must be >= 1");
  if (!(alpha0 > 0.0))
    throw InvalidParameter("calibrate_radial: alpha0 must be > 0");
  const double target = static_cast<double>(p) * alpha0 * alpha0 + 1.0;

  RadialSpec spec;
  spec.family = family;
  switch (family) {
    case RadialFamily::ChiDF:
      spec.shape = static_cast<double>(p);
      spec.scale = std::sqrt(target / static_cast<double>(p));
      break;
    case RadialFamily::Gamma:
      if (!(aux > 0.0))
        throw InvalidParameter("calibrate_radial: Gamma shape must be > 0");
      spec.shape = aux;
      spec.scale = std::sqrt(target / (aux * aux + aux));
      break;
    case RadialFamily::ParetoI:
      if (!(aux > 0.0))
        throw InvalidParameter("calibrate_radial: Pareto alpha must be > 0");
      if (aux <= 2.0)
        throw NoSecondMoment(
            "calibrate_radial: ParetoI needs tail index alpha > 2");
      spec.shape = aux;
      spec.scale = std::sqrt((aux - 2.0) / aux * target);
      break;
    case RadialFamily::HalfNormal:
      spec.shape = 1.0;
      spec.scale = target;  // sigma^2 = E R^2
      break;
    case RadialFamily::LogNormal:
      spec.shape = 1.0;
      spec.scale = 0.5 * std::log(target);  // sigma^2; exp(2 sigma^2) = target
      break;
  }
  return spec;
}

double sample_radial(const RadialSpec& spec, Rng& rng) {
  switch (spec.family) {
    case RadialFamily::ChiDF: {
      const int df = static_cast<int>(spec.shape);
      double ss = 0.0;
      for (int i = 0; i < df; ++i) {
        const double g = rng.normal();
        ss += g * g;
      }
      return spec.scale * std::sqrt(ss);
    }
    case RadialFamily::Gamma:
      return spec.scale * rng.gamma(spec.shape);
    case RadialFamily::ParetoI:
      return spec.scale * std::pow(rng.uniform_pos(), -1.0 / spec.shape);
    case RadialFamily::HalfNormal:
      return std::sqrt(spec.scale) * std::abs(rng.normal());
    case RadialFamily::LogNormal:
      return std::exp(std::sqrt(spec.scale) * rng.normal());
  }
  return 0.0;  // unreachable
}

std::optional<double> radial_moment(const RadialSpec& spec, int k) {
  if (k < 0) throw InvalidParameter("radial_moment: k must be >= 0");
  if (k == 0) return 1.0;
  const double kk = static_cast<double>(k);
  switch (spec.family) {
    case RadialFamily::ChiDF: {
      // E chi_df^k = 2^{k/2} Gamma((df+k)/2) / Gamma(df/2)
      const double df = spec.shape;
      const double logm = 0.5 * kk * std::log(2.0) +
                          std::lgamma(0.5 * (df + kk)) -
                          std::lgamma(0.5 * df);
      return std::pow(spec.scale, kk) * std::exp(logm);
    }
    case RadialFamily::Gamma: {
      const double logm = kk * std::log(spec.scale) +
                          std::lgamma(spec.shape + kk) -
                          std::lgamma(spec.shape);
      return std::exp(logm);
    }
    case RadialFamily::ParetoI: {
      if (kk >= spec.shape) return std::nullopt;
      return spec.shape * std::pow(spec.scale, kk) / (spec.shape - kk);
    }
    case RadialFamily::HalfNormal: {
      // E |sigma N|^k = sigma^k 2^{k/2} Gamma((k+1)/2) / sqrt(pi)
      const double sigma = std::sqrt(spec.scale);
      const double logm = 0.5 * kk * std::log(2.0) +
                          std::lgamma(0.5 * (kk + 1.0)) -
                          0.5 * std::log(M_PI);
      return std::pow(sigma, kk) * std::exp(logm);
    }
    case RadialFamily::LogNormal:
      return std::exp(0.5 * kk * kk * spec.scale);
  }
  return std::nullopt;  // unreachable
}

}  // namespace phaseglm
