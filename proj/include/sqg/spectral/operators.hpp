#pragma once

#include "sqg/spectral/field.hpp"

namespace sqg::spectral {

SpectralField apply_S(const SpectralField& f);
SpectralField d_alpha(const SpectralField& f);
// d/da S, multiplier i lambda(n).
SpectralField d_alpha_S(const SpectralField& f);

struct NonlinearTerm {
  SpectralField value;
  // Mode-0 coefficient of the untruncated product. Identically zero for
  // admissible input (sigma is even); kept so integrators can track the mean.
  cplx mean;
};

/// N(f) = 2 (Sf)(d_a f) - f (d_a S f), evaluated pseudo-spectrally on a
/// zero-padded grid of 3K + 1 points in b = m a (exact for quadratic products),
/// then truncated to |n| <= n_max.
NonlinearTerm nonlinearity_with_mean(const SpectralField& f);
SpectralField nonlinearity(const SpectralField& f);

// Dealiased pointwise product u v truncated to the field's modes; the mean of
// the product is discarded.
SpectralField product(const SpectralField& u, const SpectralField& v);

// sqrt(sum_n (1 + n^2)^s |f_n|^2), summing over both signs of n.
double hs_norm(const SpectralField& f, double s);
// E_s = hs_norm^2 / 2.
double energy(const SpectralField& f, double s);

// Real L^2 pairing int_0^{2pi} u v da.
double inner_product(const SpectralField& u, const SpectralField& v);

}  // namespace sqg::spectral
