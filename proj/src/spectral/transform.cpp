#include "sqg/spectral/transform.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <map>
#include <mutex>
#include <string>

#include "sqg/common/errors.hpp"

namespace sqg::spectral {

namespace {
// The FFTW planner is not re-entrant; execution on distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex mu;
  return mu;
}
}  // namespace

struct RealFft::Impl {
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

RealFft::RealFft(int n) : n_(n), impl_(std::make_unique<Impl>()) {
  if (n < 1) throw std::invalid_argument("FFT length must be positive");
  std::lock_guard lock(planner_mutex());
  impl_->real = fftw_alloc_real(static_cast<std::size_t>(n));
  impl_->spec = fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1));
  impl_->forward = fftw_plan_dft_r2c_1d(n, impl_->real, impl_->spec, FFTW_ESTIMATE);
  impl_->inverse = fftw_plan_dft_c2r_1d(n, impl_->spec, impl_->real, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(impl_->forward);
  fftw_destroy_plan(impl_->inverse);
  fftw_free(impl_->real);
  fftw_free(impl_->spec);
}

void RealFft::forward(std::span<const double> x, std::span<cplx> X) {
  const std::size_t half = static_cast<std::size_t>(n_ / 2 + 1);
  if (x.size() != static_cast<std::size_t>(n_) || X.size() != half) {
    throw std::invalid_argument("RealFft::forward: buffer size mismatch");
  }
  std::copy(x.begin(), x.end(), impl_->real);
  fftw_execute(impl_->forward);
  for (std::size_t k = 0; k < half; ++k) X[k] = {impl_->spec[k][0], impl_->spec[k][1]};
}

void RealFft::inverse(std::span<const cplx> X, std::span<double> x) {
  const std::size_t half = static_cast<std::size_t>(n_ / 2 + 1);
  if (x.size() != static_cast<std::size_t>(n_) || X.size() != half) {
    throw std::invalid_argument("RealFft::inverse: buffer size mismatch");
  }
  for (std::size_t k = 0; k < half; ++k) {
    impl_->spec[k][0] = X[k].real();
    impl_->spec[k][1] = X[k].imag();
  }
  fftw_execute(impl_->inverse);
  std::copy(impl_->real, impl_->real + n_, x.begin());
}

RealFft& RealFft::local(int n) {
  thread_local std::map<int, std::unique_ptr<RealFft>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<RealFft>(n);
  return *slot;
}

std::vector<double> synthesize(const SpectralField& f, int grid_size) {
  if (grid_size < 2 * f.n_max() + 1) {
    throw AliasingError("grid of " + std::to_string(grid_size) + " points cannot resolve n_max = " +
                        std::to_string(f.n_max()) + " (need >= 2 n_max + 1)");
  }
  std::vector<cplx> spec(static_cast<std::size_t>(grid_size / 2 + 1));
  for (int k = 1; k <= f.modes(); ++k) {
    spec[static_cast<std::size_t>(f.mode_number(k))] = f.packed()[static_cast<std::size_t>(k - 1)];
  }
  std::vector<double> x(static_cast<std::size_t>(grid_size));
  RealFft::local(grid_size).inverse(spec, x);
  return x;
}

SpectralField analyze(std::span<const double> samples, int m, int n_max) {
  const int grid = static_cast<int>(samples.size());
  if (grid < 2 * n_max + 1) {
    throw AliasingError("grid of " + std::to_string(grid) + " points cannot resolve n_max = " +
                        std::to_string(n_max) + " (need >= 2 n_max + 1)");
  }
  SpectralField f(m, n_max);
  std::vector<cplx> spec(static_cast<std::size_t>(grid / 2 + 1));
  RealFft::local(grid).forward(samples, spec);
  const double inv = 1.0 / grid;
  double scale = 0.0;
  for (cplx& z : spec) {
    z *= inv;
    scale = std::max(scale, std::abs(z));
  }
  const double tol = 1e-10 * scale;
  for (int n = 0; n < static_cast<int>(spec.size()); ++n) {
    const bool stored = n > 0 && n <= n_max && n % m == 0;
    if (stored) {
      f.set(n, spec[static_cast<std::size_t>(n)]);
    } else if (std::abs(spec[static_cast<std::size_t>(n)]) > tol) {
      throw SymmetryError("samples carry mode " + std::to_string(n) + " (|coeff| = " +
                          std::to_string(std::abs(spec[static_cast<std::size_t>(n)])) +
                          ") outside the " + std::to_string(m) + "-fold symmetric class up to n_max = " +
                          std::to_string(n_max));
    }
  }
  return f;
}

}  // namespace sqg::spectral
