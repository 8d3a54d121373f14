#include "sqg/spectral/multiplier.hpp"

#include <cmath>
#include <string>

#include "sqg/common/errors.hpp"

namespace sqg::spectral {

void require_admissible(long long n) {
  if (n >= -2 && n <= 2) {
    throw DomainError("mode " + std::to_string(n) +
                      " is outside the admissible set |n| >= 3");
  }
}

Rational lambda_exact(long long n) {
  require_admissible(n);
  const mpz_class n2 = mpz_class(static_cast<long>(n)) * static_cast<long>(n);
  Rational r(n2 - 1, n2 - 4);
  r.canonicalize();
  return n > 0 ? r : Rational(-r);
}

Rational sigma_exact(long long n) {
  Rational r = lambda_exact(n) / Rational(static_cast<long>(n));
  r.canonicalize();
  return r;
}

// n^2 - 1 and n^2 - 4 are exact doubles for |n| < 2^26, so one IEEE division
// gives the correctly rounded value of the exact rational.
double lambda(long long n) {
  require_admissible(n);
  const double n2 = static_cast<double>(n) * static_cast<double>(n);
  const double mag = (n2 - 1.0) / (n2 - 4.0);
  return n > 0 ? mag : -mag;
}

double sigma(long long n) {
  require_admissible(n);
  const double a = std::fabs(static_cast<double>(n));
  return (a * a - 1.0) / (a * (a * a - 4.0));
}

}  // namespace sqg::spectral
