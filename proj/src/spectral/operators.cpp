#include "sqg/spectral/operators.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "sqg/spectral/multiplier.hpp"
#include "sqg/spectral/transform.hpp"

namespace sqg::spectral {

namespace {

constexpr cplx I{0.0, 1.0};

template <class Symbol>
SpectralField apply_symbol(const SpectralField& f, Symbol symbol) {
  SpectralField out = f;
  auto c = out.packed();
  for (int k = 1; k <= f.modes(); ++k) c[static_cast<std::size_t>(k - 1)] *= symbol(f.mode_number(k));
  return out;
}

// Grid in b = m a. Products of two band-limited factors with |k| <= K are
// alias-free on 3K + 1 points for the retained modes |k| <= K.
int dealiased_grid(int K) { return 3 * K + 1; }

void to_grid(const SpectralField& f, std::span<cplx> scratch, std::span<double> out, RealFft& fft) {
  std::fill(scratch.begin(), scratch.end(), cplx{});
  const auto c = f.packed();
  for (std::size_t k = 0; k < c.size(); ++k) scratch[k + 1] = c[k];
  fft.inverse(scratch, out);
}

}  // namespace

SpectralField apply_S(const SpectralField& f) {
  return apply_symbol(f, [](long long n) { return cplx{sigma(n), 0.0}; });
}

SpectralField d_alpha(const SpectralField& f) {
  return apply_symbol(f, [](long long n) { return I * static_cast<double>(n); });
}

SpectralField d_alpha_S(const SpectralField& f) {
  return apply_symbol(f, [](long long n) { return I * lambda(n); });
}

NonlinearTerm nonlinearity_with_mean(const SpectralField& f) {
  const int K = f.modes();
  const int G = dealiased_grid(K);
  RealFft& fft = RealFft::local(G);
  const std::size_t half = static_cast<std::size_t>(G / 2 + 1);
  std::vector<cplx> scratch(half);
  std::vector<double> u(static_cast<std::size_t>(G)), Su(u.size()), du(u.size()), dSu(u.size());

  to_grid(f, scratch, u, fft);
  to_grid(apply_S(f), scratch, Su, fft);
  to_grid(d_alpha(f), scratch, du, fft);
  to_grid(d_alpha_S(f), scratch, dSu, fft);

  std::vector<double> prod(u.size());
  for (std::size_t j = 0; j < prod.size(); ++j) prod[j] = 2.0 * Su[j] * du[j] - u[j] * dSu[j];
  fft.forward(prod, scratch);

  const double inv = 1.0 / G;
  SpectralField out(f.m(), f.n_max());
  auto c = out.packed();
  for (int k = 1; k <= K; ++k) c[static_cast<std::size_t>(k - 1)] = scratch[static_cast<std::size_t>(k)] * inv;
  return {std::move(out), scratch[0] * inv};
}

SpectralField nonlinearity(const SpectralField& f) { return nonlinearity_with_mean(f).value; }

SpectralField product(const SpectralField& a, const SpectralField& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("product: fields have different (m, n_max)");
  const int K = a.modes();
  const int G = dealiased_grid(K);
  RealFft& fft = RealFft::local(G);
  std::vector<cplx> scratch(static_cast<std::size_t>(G / 2 + 1));
  std::vector<double> x(static_cast<std::size_t>(G)), y(x.size());
  to_grid(a, scratch, x, fft);
  to_grid(b, scratch, y, fft);
  for (std::size_t j = 0; j < x.size(); ++j) x[j] *= y[j];
  fft.forward(x, scratch);
  SpectralField out(a.m(), a.n_max());
  auto c = out.packed();
  for (int k = 1; k <= K; ++k) c[static_cast<std::size_t>(k - 1)] = scratch[static_cast<std::size_t>(k)] / double(G);
  return out;
}

double hs_norm(const SpectralField& f, double s) { return std::sqrt(2.0 * energy(f, s)); }

double energy(const SpectralField& f, double s) {
  // (1/2) sum over n != 0 = sum over n > 0.
  double e = 0.0;
  const auto c = f.packed();
  for (int k = 1; k <= f.modes(); ++k) {
    const double n = f.mode_number(k);
    e += std::pow(1.0 + n * n, s) * std::norm(c[static_cast<std::size_t>(k - 1)]);
  }
  return e;
}

double inner_product(const SpectralField& u, const SpectralField& v) {
  if (!u.same_shape(v)) throw std::invalid_argument("inner_product: fields have different (m, n_max)");
  double acc = 0.0;
  for (std::size_t k = 0; k < u.packed().size(); ++k) acc += (u.packed()[k] * std::conj(v.packed()[k])).real();
  return 4.0 * std::numbers::pi * acc;
}

}  // namespace sqg::spectral
