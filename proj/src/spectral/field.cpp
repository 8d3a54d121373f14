#include "sqg/spectral/field.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sqg/common/errors.hpp"

namespace sqg::spectral {

namespace {

void check_shape(int m, int n_max) {
  if (m < 3) {
    throw SymmetryError("symmetry order m = " + std::to_string(m) + " must be >= 3");
  }
  if (n_max < m || n_max % m != 0) {
    throw SymmetryError("n_max = " + std::to_string(n_max) +
                        " must be a positive multiple of m = " + std::to_string(m));
  }
}

void check_same(const SpectralField& a, const SpectralField& b) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument("fields have different (m, n_max)");
  }
}

}  // namespace

SpectralField::SpectralField(int m, int n_max) : m_(m), n_max_(n_max) {
  check_shape(m, n_max);
  c_.assign(static_cast<std::size_t>(n_max / m), cplx{});
}

SpectralField::SpectralField(int m, int n_max, std::vector<cplx> packed)
    : m_(m), n_max_(n_max), c_(std::move(packed)) {
  check_shape(m, n_max);
  if (c_.size() != static_cast<std::size_t>(n_max / m)) {
    throw std::invalid_argument("packed coefficient count does not match n_max / m");
  }
}

cplx SpectralField::coeff(long long n) const {
  const long long a = n < 0 ? -n : n;
  if (a == 0 || a > n_max_ || a % m_ != 0) return {};
  const cplx c = c_[static_cast<std::size_t>(a / m_ - 1)];
  return n > 0 ? c : std::conj(c);
}

void SpectralField::set(long long n, cplx value) {
  if (n <= 0 || n > n_max_ || n % m_ != 0) {
    throw SymmetryError("mode " + std::to_string(n) + " is not a positive multiple of m = " +
                        std::to_string(m_) + " within n_max = " + std::to_string(n_max_));
  }
  c_[static_cast<std::size_t>(n / m_ - 1)] = value;
}

bool SpectralField::is_finite() const noexcept {
  return std::all_of(c_.begin(), c_.end(), [](cplx z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

double SpectralField::max_abs() const noexcept {
  double r = 0.0;
  for (cplx z : c_) r = std::max(r, std::abs(z));
  return r;
}

SpectralField& SpectralField::operator+=(const SpectralField& rhs) {
  check_same(*this, rhs);
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += rhs.c_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& rhs) {
  check_same(*this, rhs);
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= rhs.c_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(double a) {
  for (cplx& z : c_) z *= a;
  return *this;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double s, SpectralField a) { return a *= s; }

SpectralField reflect(SpectralField f) {
  for (cplx& z : f.packed()) z = std::conj(z);
  return f;
}

}  // namespace sqg::spectral
