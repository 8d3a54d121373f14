#pragma once

#include <filesystem>
#include <optional>

#include "sqg/multilinear/form.hpp"

namespace sqg::multilinear {

// Trilinear form with M3(f, f, f) = d/dt E_s(f) along the truncated flow:
// the symmetrization of i <n_3>^{2s} (2 sigma(n_1) n_2 - lambda(n_2)), with
// <n> = (1 + n^2)^{1/2}. Odd.
MultilinearForm build_M3(double s, int m, int n_max, Exec exec = Exec::parallel);

/// Iterated normal-form corrections of E_s:
///   M3' = iL(M3),            M4 = -(2N2 - N1)(M3'),
///   M4' = iL(M4 - P(M4)),    M5 = -(2N2 - N1)(M4'),
///   M5' = iL(M5),            M6 = -(2N2 - N1)(M5').
/// Along the truncated flow d/dt(E_s - M3') = M4, and
/// d/dt(E_s - M3' - M4' - M5') = M6 (P(M4) vanishes on equal real arguments).
struct CorrectedEnergy {
  double s = 0.0;
  int m = 0;
  int n_max = 0;
  MultilinearForm M3, M3p, M4, M4p, M5, M5p;
  std::optional<MultilinearForm> M6;
};

// With cache_dir set, each stage is loaded from / stored to
// cache_dir/form_s<s>_m<m>_n<n_max>_<stage>.bin.
CorrectedEnergy build_chain(double s, int m, int n_max, const std::optional<std::filesystem::path>& cache_dir = {},
                            bool with_M6 = false, Exec exec = Exec::parallel);

struct EnergyLevels {
  double Es = 0.0;     // E_s
  double c3 = 0.0;     // E_s - M3'
  double c34 = 0.0;    // E_s - M3' - M4'
  double c345 = 0.0;   // E_s - M3' - M4' - M5'
};

// Values on f. Imaginary parts are round-off and are dropped.
EnergyLevels corrected_energies(const CorrectedEnergy& chain, const SpectralField& f, Exec exec = Exec::parallel);

// Time derivatives along a trajectory through f with velocity f_t, by the
// chain rule on the symmetric tables: d/dt Q(f..f) = p Q(f_t, f, .., f).
EnergyLevels corrected_rates(const CorrectedEnergy& chain, const SpectralField& f, const SpectralField& f_t,
                             Exec exec = Exec::parallel);

// Largest |Im| / |Re| scale over the corrections on f (reality check).
double imaginary_defect(const CorrectedEnergy& chain, const SpectralField& f);

}  // namespace sqg::multilinear
