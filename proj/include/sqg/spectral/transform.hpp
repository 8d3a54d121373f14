#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "sqg/spectral/field.hpp"

namespace sqg::spectral {

// Real-to-complex DFT of fixed length backed by FFTW. forward() is the
// unnormalized sum_j x_j e^{-2 pi i jk/n}; inverse() the unnormalized
// sum_k X_k e^{+2 pi i jk/n} over the Hermitian extension.
// An instance owns scratch buffers and is not shareable between threads;
// use RealFft::local(n) for a per-thread cached instance.
class RealFft {
 public:
  explicit RealFft(int n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  int size() const noexcept { return n_; }
  void forward(std::span<const double> x, std::span<cplx> X);
  void inverse(std::span<const cplx> X, std::span<double> x);

  static RealFft& local(int n);

 private:
  struct Impl;
  int n_;
  std::unique_ptr<Impl> impl_;
};

// Point values f(2 pi j / grid_size), j = 0..grid_size-1.
// grid_size < 2 n_max + 1 throws AliasingError.
std::vector<double> synthesize(const SpectralField& f, int grid_size);

// Inverse of synthesize. Throws AliasingError when the grid cannot resolve
// n_max, and SymmetryError when the samples carry a mean or energy outside
// the multiples of m (relative tolerance 1e-10), or above n_max.
SpectralField analyze(std::span<const double> samples, int m, int n_max);

}  // namespace sqg::spectral
