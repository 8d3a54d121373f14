#include <doctest.h>

#include <filesystem>
#include <random>

#include "forms.hpp"
#include "random_field.hpp"
#include "sqg/common/errors.hpp"
#include "sqg/multilinear/chain.hpp"
#include "sqg/multilinear/form.hpp"
#include "sqg/spectral/multiplier.hpp"
#include "sqg/spectral/operators.hpp"

using namespace sqg;
using namespace sqg::multilinear;
using sqg::testing::absolute_scale;
using sqg::testing::random_field;
using sqg::testing::random_form;

namespace {

constexpr cplx I{0.0, 1.0};

std::vector<SpectralField> random_fields(std::mt19937_64& rng, int p, int m, int n_max) {
  std::vector<SpectralField> u;
  for (int j = 0; j < p; ++j) u.push_back(random_field(rng, m, n_max));
  return u;
}

// Brute force count of zero-sum tuples of active modes.
std::size_t count_tuples(int p, int m, int n_max) {
  std::vector<int> modes;
  for (int n = -n_max; n <= n_max; n += m)
    if (n != 0) modes.push_back(n);
  std::size_t count = 0;
  std::vector<std::size_t> idx(static_cast<std::size_t>(p), 0);
  while (true) {
    long s = 0;
    for (auto i : idx) s += modes[i];
    if (s == 0) ++count;
    std::size_t j = 0;
    while (j < idx.size() && ++idx[j] == modes.size()) idx[j++] = 0;
    if (j == idx.size()) break;
  }
  return count;
}

}  // namespace

TEST_CASE("tuple space enumeration") {
  for (int p : {2, 3, 4, 5}) {
    for (auto [m, n_max] : {std::pair{3, 12}, std::pair{4, 16}, std::pair{5, 15}}) {
      const TupleSpace sp(p, m, n_max);
      CHECK(sp.size() == count_tuples(p, m, n_max));
      for (std::size_t i = 0; i < sp.size(); ++i) {
        const auto t = sp.tuple(i);
        long sum = 0;
        for (int n : t) sum += n;
        REQUIRE(sum == 0);
        REQUIRE(sp.find(t) == i);
        auto neg = t;
        for (int& n : neg) n = -n;
        REQUIRE(sp.negated(i) == sp.find(neg));
      }
    }
  }
  const TupleSpace sp(3, 3, 12);
  CHECK(sp.find(std::vector<int>{3, 3, -5}) == TupleSpace::npos);
  CHECK(sp.find(std::vector<int>{3, 3, 3}) == TupleSpace::npos);
  CHECK(sp.find(std::vector<int>{9, 6, -15}) == TupleSpace::npos);
  CHECK_THROWS_AS(TupleSpace(3, 2, 12), SymmetryError);
}

TEST_CASE("evaluate: hand-enumerated value, zero field, homogeneity") {
  const auto one = MultilinearForm::from_multiplier(3, 3, 12, [](auto) { return cplx{1.0}; }, Parity::even, "1");
  SpectralField f(3, 12);
  f.set(3, 0.5);
  f.set(6, 0.5);
  // tuples (3,3,-6), (-3,-3,6) in all orders: 6 terms of (1/2)^3
  CHECK(std::abs(evaluate_diagonal(one, f) - 0.75) < 1e-15);
  CHECK(evaluate_diagonal(one, SpectralField(3, 12)) == cplx{});

  std::mt19937_64 rng(1);
  for (int p : {3, 4, 5}) {
    const auto M = random_form(rng, p, 3, 15, Parity::none);
    const auto g = random_field(rng, 3, 15);
    const double eps = 0.3;
    const cplx a = evaluate_diagonal(M, eps * g), b = std::pow(eps, p) * evaluate_diagonal(M, g);
    CHECK(std::abs(a - b) <= 1e-13 * std::abs(b));
  }
}

TEST_CASE("evaluate is multilinear and serial == parallel") {
  std::mt19937_64 rng(2);
  for (int p : {3, 4, 5}) {
    const auto M = random_form(rng, p, 4, 16, Parity::none);
    auto u = random_fields(rng, p, 4, 16);
    const auto w = random_field(rng, 4, 16);
    for (int slot = 0; slot < p; ++slot) {
      auto uw = u;
      uw[static_cast<std::size_t>(slot)] = w;
      auto sum = u;
      sum[static_cast<std::size_t>(slot)] = u[static_cast<std::size_t>(slot)] + 2.0 * w;
      const cplx lhs = evaluate(M, sum);
      const cplx rhs = evaluate(M, u) + 2.0 * evaluate(M, uw);
      CHECK(std::abs(lhs - rhs) <= 1e-13 * absolute_scale(M, sum));
    }
    const cplx ser = evaluate(M, u, Exec::serial), par = evaluate(M, u, Exec::parallel);
    CHECK(std::abs(ser - par) <= 1e-14 * absolute_scale(M, u));
  }
  const auto M = random_form(rng, 3, 3, 12, Parity::none);
  std::vector<SpectralField> wrong{SpectralField(3, 12), SpectralField(3, 12), SpectralField(3, 15)};
  CHECK_THROWS_AS(evaluate(M, wrong), std::invalid_argument);
}

TEST_CASE("tabulated multipliers agree with on-the-fly evaluation") {
  auto fn = [](std::span<const int> t) {
    return cplx{0.0, spectral::lambda(t[0]) * t[1] - spectral::lambda(t[1]) * t[0] + 0.0 * t[2]};
  };
  const auto M = MultilinearForm::from_multiplier(3, 3, 24, fn, Parity::none, "f");
  for (std::size_t i = 0; i < M.space().size(); ++i) {
    const auto t = M.space().tuple(i);
    REQUIRE(M.multiplier(t) == fn(t));
  }
  CHECK(M.multiplier(std::vector<int>{3, 3, -7}) == cplx{});
  CHECK_THROWS_AS(MultilinearForm::from_multiplier(3, 3, 12, [](auto) { return cplx{1.0}; }, Parity::odd, "bad"),
                  SymmetryError);
}

TEST_CASE("symmetrize") {
  std::mt19937_64 rng(3);
  const auto M = random_form(rng, 4, 3, 12, Parity::odd);
  const auto S = symmetrize(M);
  CHECK(S.symmetric());
  CHECK(symmetry_defect(S) < 1e-15);
  CHECK(symmetry_defect(M) > 0.1);
  CHECK(parity_defect(S) < 1e-15);
  const auto f = random_field(rng, 3, 12);
  CHECK(std::abs(evaluate_diagonal(S, f) - evaluate_diagonal(M, f)) < 1e-12 * std::abs(evaluate_diagonal(M, f)) + 1e-14);
}

TEST_CASE("L identity: sum_j L(M)(.., -d_a S u_j, ..) = -i M") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 12; ++trial) {
    const int p = 3 + trial % 3;
    const int m = 3 + trial % 2;
    const int n_max = m * (p == 5 ? 4 : 6);
    auto M = random_form(rng, p, m, n_max, trial % 2 ? Parity::odd : Parity::even);
    if (p == 4) M = M - P(M);
    const auto LM = L(M);
    CHECK(LM.parity() == flip(M.parity()));
    CHECK(parity_defect(LM) < 1e-14);
    const auto u = random_fields(rng, p, m, n_max);
    cplx lhs{};
    for (int j = 0; j < p; ++j) {
      auto v = u;
      v[static_cast<std::size_t>(j)] = -1.0 * spectral::d_alpha_S(u[static_cast<std::size_t>(j)]);
      lhs += evaluate(LM, v);
    }
    CHECK(std::abs(lhs + I * evaluate(M, u)) <= 1e-12 * absolute_scale(M, u));
  }
}

TEST_CASE("L raises on resonant support, never at p = 3") {
  auto M = MultilinearForm::from_multiplier(
      4, 3, 12, [](std::span<const int> t) { return cplx{std::abs(t[0] + t[1]) == 0 && std::abs(t[0]) == 3 ? 1.0 : 0.0}; },
      Parity::even, "degenerate");
  CHECK_THROWS_AS(L(M), ResonanceError);
  CHECK_NOTHROW(L(M - P(M)));
  std::mt19937_64 rng(5);
  CHECK_NOTHROW(L(random_form(rng, 3, 3, 24, Parity::odd)));
  CHECK_NOTHROW(L(random_form(rng, 5, 3, 15, Parity::odd)));
  try {
    L(M);
  } catch (const ResonanceError& e) {
    CHECK(std::string(e.what()).find("(") != std::string::npos);
  }
}

TEST_CASE("P: projection, parity, annihilation of odd forms") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const int p = trial % 2 ? 4 : 6;
    const int n_max = p == 4 ? 24 : 12;
    const auto M = random_form(rng, p, 3, n_max, trial % 3 ? Parity::odd : Parity::even);
    const auto PM = P(M);
    const auto PPM = P(PM);
    CHECK(std::equal(PM.values().begin(), PM.values().end(), PPM.values().begin()));
    CHECK(PM.parity() == M.parity());
    CHECK(parity_defect(PM) < 1e-15);
    if (M.parity() == Parity::odd) {
      const auto f = random_field(rng, 3, n_max);
      const std::vector<SpectralField> args(static_cast<std::size_t>(p), f);
      CHECK(std::abs(evaluate(PM, args)) <= 1e-14 * absolute_scale(PM, args));
    }
  }
  // Supported off the degenerate set -> P(M) = 0.
  const auto off = MultilinearForm::from_multiplier(
      4, 3, 12,
      [](std::span<const int> t) {
        return cplx{multilinear::TupleSpace(4, 3, 12).find(t) != TupleSpace::npos &&
                            !(t[0] + t[1] == 0 || t[0] + t[2] == 0 || t[0] + t[3] == 0)
                        ? 1.0
                        : 0.0};
      },
      Parity::even, "off");
  const auto P_off = P(off);
  for (const cplx& z : P_off.values()) CHECK(z == cplx{});
  CHECK_THROWS_AS(P(random_form(rng, 3, 3, 12, Parity::odd)), std::invalid_argument);
}

TEST_CASE("N1, N2 on equal arguments match direct substitution") {
  std::mt19937_64 rng(7);
  const int m = 3, n_max = 12;
  const auto M = symmetrize(random_form(rng, 3, m, n_max, Parity::odd));
  const auto f = random_field(rng, m, n_max);
  const auto n1 = N1(M), n2 = N2(M);
  CHECK(n1.arity() == 4);
  CHECK(n1.parity() == Parity::even);
  CHECK(n2.parity() == Parity::even);
  CHECK(symmetry_defect(n1) < 1e-15);

  const auto fdSf = spectral::product(f, spectral::d_alpha_S(f));
  const auto dfSf = spectral::product(spectral::d_alpha(f), spectral::apply_S(f));
  const std::vector<SpectralField> a1{fdSf, f, f}, a2{dfSf, f, f};
  const cplx want1 = 3.0 * evaluate(M, a1), want2 = 3.0 * evaluate(M, a2);
  const std::vector<SpectralField> four(4, f);
  const double scale = absolute_scale(n1, four) + absolute_scale(n2, four);
  CHECK(std::abs(evaluate(n1, four) - want1) <= 1e-12 * scale);
  CHECK(std::abs(evaluate(n2, four) - want2) <= 1e-12 * scale);
  const auto q = nonlinear_insertion(M);
  CHECK(std::abs(evaluate(q, four) - (2.0 * want2 - want1)) <= 1e-12 * scale);
  // (2N2 - N1)(M)(f..f) = sum_j M(.., N(f), ..)
  const std::vector<SpectralField> aN{spectral::nonlinearity(f), f, f};
  CHECK(std::abs(evaluate(q, four) - 3.0 * evaluate(M, aN)) <= 1e-12 * scale);

  const auto n1_zero = N1(MultilinearForm::zero(3, m, n_max));
  for (const cplx& z : n1_zero.values()) CHECK(z == cplx{});
  CHECK_THROWS_AS(N1(random_form(rng, 3, m, n_max, Parity::odd)), std::invalid_argument);
  CHECK_THROWS_AS(N2(symmetrize(random_form(rng, 6, m, 9, Parity::odd))), std::invalid_argument);
}

TEST_CASE("M3: parity, reality, and the energy derivative") {
  const double s = 3.0;
  const int m = 3, n_max = 24;
  const auto M3 = build_M3(s, m, n_max);
  CHECK(M3.parity() == Parity::odd);
  CHECK(parity_defect(M3) < 1e-15);
  CHECK(symmetry_defect(M3) < 1e-15);
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const auto f = random_field(rng, m, n_max);
    const cplx v = evaluate_diagonal(M3, f);
    const std::vector<SpectralField> three(3, f);
    CHECK(std::fabs(v.imag()) <= 1e-12 * absolute_scale(M3, three));
    // d/dt E_s along f_t = N(f): sum_n w_n Re(N_n conj f_n) over both signs
    const auto N = spectral::nonlinearity(f);
    double dE = 0.0;
    for (int n = m; n <= n_max; n += m)
      dE += 2.0 * std::pow(1.0 + n * n, s) * (N.coeff(n) * std::conj(f.coeff(n))).real();
    CHECK(std::fabs(v.real() - dE) <= 1e-12 * absolute_scale(M3, three));
  }
}

TEST_CASE("normal-form chain: parities, reality, derivative identities") {
  const double s = 3.0;
  const int m = 3, n_max = 15;
  const auto chain = build_chain(s, m, n_max, std::nullopt, true);
  CHECK(chain.M3p.parity() == Parity::even);
  CHECK(chain.M4.parity() == Parity::odd);
  CHECK(chain.M4p.parity() == Parity::even);
  CHECK(chain.M5.parity() == Parity::odd);
  CHECK(chain.M5p.parity() == Parity::even);
  CHECK(chain.M6->parity() == Parity::odd);
  for (const auto* Q : {&chain.M3p, &chain.M4, &chain.M4p, &chain.M5, &chain.M5p, &*chain.M6}) {
    CHECK(parity_defect(*Q) < 1e-14);
    CHECK(Q->symmetric());
  }

  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    const auto f = random_field(rng, m, n_max, 0.01);
    CHECK(imaginary_defect(chain, f) < 1e-10);
    const std::vector<SpectralField> four(4, f);
    CHECK(std::abs(evaluate(P(chain.M4), four)) <= 1e-14 * absolute_scale(chain.M4, four));

    const auto f_t = spectral::nonlinearity(f) - spectral::d_alpha_S(f);
    const auto r = corrected_rates(chain, f, f_t);
    const auto six = std::vector<SpectralField>(6, f);
    const double m3 = evaluate_diagonal(chain.M3, f).real();
    const double m4 = evaluate_diagonal(chain.M4, f).real();
    const double m6 = evaluate_diagonal(*chain.M6, f).real();
    const double tol = 1e-11 * std::fabs(r.Es);
    CHECK(std::fabs(r.Es - m3) <= tol);
    CHECK(std::fabs(r.c3 - m4) <= tol);
    CHECK(std::fabs(r.c345 - m6) <= tol + 1e-9 * absolute_scale(*chain.M6, six));
  }
}

TEST_CASE("form tables: binary round trip and chain cache") {
  const auto dir = std::filesystem::temp_directory_path() / "sqg_form_cache_test";
  std::filesystem::remove_all(dir);
  std::mt19937_64 rng(10);
  const auto M = symmetrize(random_form(rng, 4, 3, 12, Parity::even));
  std::filesystem::create_directories(dir);
  save_form(M, dir / "m.bin");
  const auto back = load_form(dir / "m.bin");
  CHECK(std::equal(M.values().begin(), M.values().end(), back.values().begin()));
  CHECK(back.parity() == M.parity());
  CHECK(back.symmetric());
  CHECK(back.label() == M.label());

  const auto fresh = build_chain(2.0, 3, 12, dir);
  CHECK(std::filesystem::exists(dir / "form_s2_m3_n12_M5p.bin"));
  const auto cached = build_chain(2.0, 3, 12, dir);
  CHECK(std::equal(fresh.M5p.values().begin(), fresh.M5p.values().end(), cached.M5p.values().begin()));
  std::filesystem::remove_all(dir);
}
