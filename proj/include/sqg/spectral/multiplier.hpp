#pragma once

#include <gmpxx.h>

namespace sqg::spectral {

using Rational = mpq_class;

// Dispersion symbol: the multiplier of d/da S is i*lambda(n) with
//   lambda(n) = sgn(n) (n^2 - 1) / (n^2 - 4),   |n| >= 3.
// The symbol of S itself is sigma(n) = lambda(n) / n = (n^2 - 1) / (|n|^3 - 4|n|).
// Both are undefined for |n| <= 2 (DomainError); those modes never occur in
// the m-fold symmetric, mean-zero class with m >= 3.
Rational lambda_exact(long long n);
Rational sigma_exact(long long n);

// Correctly rounded double views of the exact symbols (|n| < 2^26).
double lambda(long long n);
double sigma(long long n);

// Throws DomainError unless |n| >= 3.
void require_admissible(long long n);

}  // namespace sqg::spectral
