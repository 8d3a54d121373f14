#include "sqg/multilinear/chain.hpp"

#include <cmath>
#include <cstdio>

#include "sqg/spectral/multiplier.hpp"
#include "sqg/spectral/operators.hpp"

namespace sqg::multilinear {

namespace {

constexpr cplx I{0.0, 1.0};

double weight(double s, int n) { return std::pow(1.0 + static_cast<double>(n) * n, s); }

std::filesystem::path cache_path(const std::filesystem::path& dir, double s, int m, int n_max, const char* stage) {
  char name[128];
  std::snprintf(name, sizeof name, "form_s%g_m%d_n%d_%s.bin", s, m, n_max, stage);
  return dir / name;
}

template <class Build>
MultilinearForm staged(const std::optional<std::filesystem::path>& dir, double s, int m, int n_max, const char* stage,
                       Build build) {
  if (!dir) return build().relabeled(stage);
  const auto path = cache_path(*dir, s, m, n_max, stage);
  if (std::filesystem::exists(path)) return load_form(path);
  MultilinearForm M = build().relabeled(stage);
  std::filesystem::create_directories(*dir);
  save_form(M, path);
  return M;
}

}  // namespace

MultilinearForm build_M3(double s, int m, int n_max, Exec exec) {
  if (!(s >= 0.0)) throw std::invalid_argument("build_M3: s must be >= 0");
  // d/dt E_s = sum_n <n>^{2s} N_n f_{-n}, with
  // N_n = sum_{n1 + n2 = n} i (2 sigma(n1) n2 - lambda(n2)) f_{n1} f_{n2}.
  auto raw = MultilinearForm::from_multiplier(
      3, m, n_max,
      [s](std::span<const int> t) {
        return I * (weight(s, t[2]) * (2.0 * spectral::sigma(t[0]) * t[1] - spectral::lambda(t[1])));
      },
      Parity::odd, "M3", exec);
  return symmetrize(raw, exec).relabeled("M3");
}

CorrectedEnergy build_chain(double s, int m, int n_max, const std::optional<std::filesystem::path>& cache_dir,
                            bool with_M6, Exec exec) {
  const auto& dir = cache_dir;
  auto M3 = staged(dir, s, m, n_max, "M3", [&] { return build_M3(s, m, n_max, exec); });
  auto M3p = staged(dir, s, m, n_max, "M3p", [&] { return I * L(M3, exec); });
  auto M4 = staged(dir, s, m, n_max, "M4", [&] { return cplx{-1.0} * nonlinear_insertion(M3p, exec); });
  // P(M4) is removed before dividing; it vanishes on equal real arguments
  // because M4 is odd.
  auto M4p = staged(dir, s, m, n_max, "M4p", [&] { return I * L(M4 - P(M4), exec); });
  auto M5 = staged(dir, s, m, n_max, "M5", [&] { return cplx{-1.0} * nonlinear_insertion(M4p, exec); });
  auto M5p = staged(dir, s, m, n_max, "M5p", [&] { return I * L(M5, exec); });
  CorrectedEnergy c{s, m, n_max, std::move(M3), std::move(M3p), std::move(M4), std::move(M4p), std::move(M5),
                    std::move(M5p), std::nullopt};
  if (with_M6) c.M6 = staged(dir, s, m, n_max, "M6", [&] { return cplx{-1.0} * nonlinear_insertion(c.M5p, exec); });
  return c;
}

EnergyLevels corrected_energies(const CorrectedEnergy& c, const SpectralField& f, Exec exec) {
  EnergyLevels e;
  e.Es = spectral::energy(f, c.s);
  e.c3 = e.Es - evaluate_diagonal(c.M3p, f, exec).real();
  e.c34 = e.c3 - evaluate_diagonal(c.M4p, f, exec).real();
  e.c345 = e.c34 - evaluate_diagonal(c.M5p, f, exec).real();
  return e;
}

namespace {

double rate(const MultilinearForm& Q, const SpectralField& f, const SpectralField& f_t, Exec exec) {
  std::vector<SpectralField> args(static_cast<std::size_t>(Q.arity()), f);
  args[0] = f_t;
  return Q.arity() * evaluate(Q, args, exec).real();
}

}  // namespace

EnergyLevels corrected_rates(const CorrectedEnergy& c, const SpectralField& f, const SpectralField& f_t, Exec exec) {
  // d/dt (1/2) sum_n w_n |f_n|^2 = sum_{n != 0} w_n Re(f_t(n) conj f_n)
  double dE = 0.0;
  for (int k = 1; k <= f.modes(); ++k) {
    const int n = f.mode_number(k);
    dE += 2.0 * weight(c.s, n) * (f_t.coeff(n) * std::conj(f.coeff(n))).real();
  }
  EnergyLevels r;
  r.Es = dE;
  r.c3 = r.Es - rate(c.M3p, f, f_t, exec);
  r.c34 = r.c3 - rate(c.M4p, f, f_t, exec);
  r.c345 = r.c34 - rate(c.M5p, f, f_t, exec);
  return r;
}

double imaginary_defect(const CorrectedEnergy& c, const SpectralField& f) {
  const double scale = std::max(spectral::energy(f, c.s), 1e-300);
  double worst = 0.0;
  for (const MultilinearForm* Q : {&c.M3, &c.M3p, &c.M4, &c.M4p, &c.M5, &c.M5p}) {
    worst = std::max(worst, std::fabs(evaluate_diagonal(*Q, f).imag()) / scale);
  }
  return worst;
}

}  // namespace sqg::multilinear
