#include "sqg/spectral/kernel.hpp"

#include <cmath>
#include <numbers>

#include "sqg/common/errors.hpp"

namespace sqg::spectral {

double kernel_S(double alpha) {
  // log(1 - cos a) = log 2 + 2 log|sin(a/2)|, evaluated on the representative
  // in [-pi, pi]: no cancellation or underflow next to the singularity.
  const double r = std::remainder(alpha, 2.0 * std::numbers::pi);
  const double half_sin = std::fabs(std::sin(0.5 * r));
  if (!(half_sin > 0.0)) {
    throw DomainError("kernel S is singular at alpha = 0 mod 2pi");
  }
  const double log_term = std::numbers::ln2 + 2.0 * std::log(half_sin);
  return -(1.0 / (8.0 * std::numbers::pi)) * (1.0 + 3.0 * std::cos(2.0 * alpha)) * log_term;
}

}  // namespace sqg::spectral
