#pragma once

#include <optional>
#include <stdexcept>

#include "phaseglm/rng.hpp"

namespace phaseglm {

// Radial laws for the elliptical covariate model X = mu + R * A * U.
enum class RadialFamily { ChiDF, Gamma, ParetoI, HalfNormal, LogNormal };

// Family-specific parameter slots:
//   ChiDF:      shape = degrees of freedom, scale = multiplicative factor
//   Gamma:      shape = k,                  scale = theta
//   ParetoI:    shape = tail index alpha,   scale = x_m (lower endpoint)
//   HalfNormal: shape unused (1),           scale = sigma^2
//   LogNormal:  shape unused (1),           scale = sigma^2 (mu = 0)
struct RadialSpec {
  RadialFamily family = RadialFamily::ChiDF;
  double shape = 1.0;
  double scale = 1.0;
};

class InvalidParameter : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
class NoSecondMoment : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Calibrates the family so that E R^2 = p*alpha0^2 + 1.
// aux is the family's free parameter (Gamma: k, ParetoI: alpha); ignored
// otherwise. Throws NoSecondMoment for ParetoI alpha <= 2, InvalidParameter on
// nonpositive p/alpha0/aux.
RadialSpec calibrate_radial(RadialFamily family, int p, double alpha0,
                            double aux = 1.0);

// One draw of R >= 0.
double sample_radial(const RadialSpec& spec, Rng& rng);

// k-th raw moment E R^k in closed form; nullopt when the moment diverges
// (ParetoI with k >= alpha).
std::optional<double> radial_moment(const RadialSpec& spec, int k);

}  // namespace phaseglm
