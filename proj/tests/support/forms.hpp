#pragma once

#include <random>
#include <vector>

#include "sqg/multilinear/form.hpp"

namespace sqg::testing {

// Random complex multiplier table with the requested parity.
inline multilinear::MultilinearForm random_form(std::mt19937_64& rng, int p, int m, int n_max,
                                                multilinear::Parity parity) {
  using multilinear::cplx;
  auto space = multilinear::tuple_space(p, m, n_max);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<cplx> raw(space->size());
  for (auto& z : raw) z = {g(rng), g(rng)};
  std::vector<cplx> v(raw.size());
  const double sign = parity == multilinear::Parity::odd ? -1.0 : 1.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = parity == multilinear::Parity::none ? raw[i] : 0.5 * (raw[i] + sign * raw[space->negated(i)]);
  }
  return multilinear::MultilinearForm(space, std::move(v), parity, "random");
}

// sum |m| |u_1| ... |u_p|: the natural scale for round-off in evaluate().
inline double absolute_scale(const multilinear::MultilinearForm& M, std::span<const spectral::SpectralField> fields) {
  std::vector<multilinear::cplx> a(M.values().begin(), M.values().end());
  for (auto& z : a) z = std::abs(z);
  multilinear::MultilinearForm absM(M.space_ptr(), std::move(a), multilinear::Parity::none, "|M|");
  std::vector<spectral::SpectralField> absf;
  for (const auto& f : fields) {
    auto g = f;
    for (auto& z : g.packed()) z = std::abs(z);
    absf.push_back(std::move(g));
  }
  return multilinear::evaluate(absM, absf).real();
}

}  // namespace sqg::testing
