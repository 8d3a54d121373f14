#pragma once

#include <complex>
#include <span>
#include <vector>

namespace sqg::spectral {

using cplx = std::complex<double>;

/// Truncated spectrum of a real, mean-zero, m-fold symmetric 2pi-periodic
/// function f(a) = sum_n f_n e^{ina}, f_n = (1/2pi) int f e^{-ina}.
///
/// Only the modes n = m, 2m, ..., n_max are stored; f_{-n} = conj(f_n) is
/// implied, so reality and m-fold symmetry hold by construction and modes
/// |n| <= 2 (including the mean) are absent. Packed index k = 1..K stands for
/// n = k m with K = n_max / m.
class SpectralField {
 public:
  SpectralField(int m, int n_max);
  SpectralField(int m, int n_max, std::vector<cplx> packed);

  int m() const noexcept { return m_; }
  int n_max() const noexcept { return n_max_; }
  int modes() const noexcept { return static_cast<int>(c_.size()); }
  int mode_number(int k) const noexcept { return k * m_; }

  // Coefficient of e^{ina} for any integer n (zero outside the class).
  cplx coeff(long long n) const;
  // n must be a positive multiple of m with n <= n_max.
  void set(long long n, cplx value);

  // c_k, k = 1..K, stored at index k - 1.
  std::span<const cplx> packed() const noexcept { return c_; }
  std::span<cplx> packed() noexcept { return c_; }

  bool same_shape(const SpectralField& other) const noexcept {
    return m_ == other.m_ && n_max_ == other.n_max_;
  }
  bool is_finite() const noexcept;
  double max_abs() const noexcept;

  SpectralField& operator+=(const SpectralField& rhs);
  SpectralField& operator-=(const SpectralField& rhs);
  SpectralField& operator*=(double a);

  friend bool operator==(const SpectralField&, const SpectralField&) = default;

 private:
  int m_;
  int n_max_;
  std::vector<cplx> c_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double s, SpectralField a);

// Reflection a -> -a (conjugates every coefficient).
SpectralField reflect(SpectralField f);

}  // namespace sqg::spectral
