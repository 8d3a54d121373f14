#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sqg/resonance/resonance.hpp"

using namespace sqg;
using namespace sqg::resonance;

namespace {

Rational q(long num, long den) {
  Rational r(num, den);
  r.canonicalize();
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Ordered tuples of arity 2k built from k (+a, -a) couples with 3 <= a <= bound:
// sum over pair-multiplicity patterns c of (2k)! / prod_a (c_a!)^2.
std::uint64_t paired_count_arity6(int bound) {
  const std::uint64_t M = static_cast<std::uint64_t>(bound - 2);
  const std::uint64_t distinct = M * (M - 1) * (M - 2) / 6 * 720;  // c = (1,1,1)
  const std::uint64_t one_double = M * (M - 1) * (720 / 4);      // c = (2,1)
  const std::uint64_t triple = M * (720 / 36);                   // c = (3)
  return distinct + one_double + triple;
}

std::uint64_t paired_count_arity4(int bound) {
  const std::uint64_t M = static_cast<std::uint64_t>(bound - 2);
  return M * (M - 1) / 2 * 24 + M * 6;
}

}  // namespace

TEST_CASE("lambda_sum exact values") {
  const Tuple a{3, 3, -6};
  CHECK(lambda_sum(a) == q(337, 160));
  const Tuple b{5, 3, -4, -4};
  CHECK(lambda_sum(b) == q(17, 70));
  for (int k = 3; k <= 20; ++k) {
    for (int l = 3; l <= 20; ++l) {
      const Tuple t{k, -k, l, -l};
      CHECK(lambda_sum(t) == 0);
    }
  }
}

TEST_CASE("total degeneracy") {
  CHECK(is_totally_degenerate(Tuple{3, -3, 6, -6}));
  CHECK(is_totally_degenerate(Tuple{3, -3, 3, -3}));
  CHECK_FALSE(is_totally_degenerate(Tuple{5, 3, -4, -4}));
  CHECK_FALSE(is_totally_degenerate(Tuple{3, 3, -6}));
  CHECK_FALSE(is_totally_degenerate(Tuple{3, 3, -3, -3, 3, -3, 0}));
  CHECK(canonical(Tuple{-4, 3, -4, 5}) == Tuple{5, 3, -4, -4});
  CHECK(canonical(Tuple{4, -3, 4, -5}) == Tuple{5, 3, -4, -4});
}

TEST_CASE("negation flips the lambda sum") {
  for (const Tuple& t : {Tuple{3, 3, -6}, Tuple{7, -3, -4}, Tuple{9, 4, -6, -7}, Tuple{12, -3, -3, -3, -3}}) {
    Tuple neg = t;
    for (int& v : neg) v = -v;
    CHECK(lambda_sum(neg) == -lambda_sum(t));
  }
}

TEST_CASE("pruned enumeration agrees with the unpruned reference") {
  for (int p : {3, 4, 5}) {
    for (int bound : {9, 12}) {
      CAPTURE(p);
      CAPTURE(bound);
      CHECK(search(p, bound, Exec::serial) == search_unpruned(p, bound));
    }
  }
  CHECK(search(6, 10, Exec::serial) == search_unpruned(6, 10));
}

TEST_CASE("serial and parallel searches are identical") {
  for (int p : {3, 4, 5, 6}) CHECK(search(p, 14, Exec::serial) == search(p, 14, Exec::parallel));
}

TEST_CASE("arity 3 bound: |sum lambda| >= 2/5 up to radius 200") {
  const auto r = min_denominator(3, 200);
  CHECK(r.min_value >= q(2, 5));
  CHECK(r.exact_zero_tuples.empty());
  CHECK(r.degenerate_count == 0);
  const auto small = min_denominator(3, 50);
  CHECK(small.min_value >= q(2, 5));
  CHECK(lambda_sum(small.argmin) != 0);
}

TEST_CASE("arity 5 bound: |sum lambda| >= 9/35 up to radius 30") {
  const auto r = min_denominator(5, 30);
  CHECK(r.min_value >= q(9, 35));
  CHECK(r.exact_zero_tuples.empty());
  CHECK(min_denominator(5, 20).min_value >= q(9, 35));
}

TEST_CASE("arity 4: zero iff totally degenerate, levels above the second difference") {
  const auto r = search(4, 60);
  CHECK(r.exact_zero_tuples.empty());
  CHECK(r.degenerate_nonzero_count == 0);
  CHECK(r.degenerate_count == paired_count_arity4(60));
  CHECK(r.min_value > 0);
  for (const auto& lvl : r.levels) {
    CAPTURE(lvl.n);
    CHECK(lvl.min_value > 0);
    CHECK(Rational(abs(lambda_sum(lvl.argmin))) == lvl.min_value);
    if (lvl.n + 2 <= r.bound) CHECK(lvl.min_value >= second_difference(lvl.n));
  }
  const auto fit = fit_quartic_scaling(r);
  CHECK(fit.constant > 0.0);
  CHECK(fit.slope == doctest::Approx(-4.0).epsilon(0.1));
}

TEST_CASE("second difference closed form") {
  // lambda(3) - 2 lambda(4) + lambda(5) = 8/5 - 5/2 + 8/7
  CHECK(second_difference(3) == q(8, 5) - q(5, 2) + q(8, 7));
  for (int n = 3; n < 200; ++n) CHECK(second_difference(n) > 0);
}

TEST_CASE("arity 6 search at radius 12") {
  const auto r = search_resonances_p6(12);
  CHECK(r.exact_zero_tuples.empty());
  CHECK(r.degenerate_nonzero_count == 0);
  CHECK(r.degenerate_count == paired_count_arity6(12));
  CHECK(r.degenerate_count == 102800);
  CHECK(r.min_value > 0);
}

TEST_CASE("argument validation") {
  CHECK_THROWS_AS(min_denominator(6, 20), std::invalid_argument);
  CHECK_THROWS_AS(min_denominator(3, 8), std::invalid_argument);
  CHECK_THROWS_AS(search_resonances_p6(8), std::invalid_argument);
}

TEST_CASE("certificate round trip and byte-identical reruns") {
  const auto dir = std::filesystem::temp_directory_path();
  const auto a = dir / "sqg_cert_a.json", b = dir / "sqg_cert_b.json";
  const auto r = min_denominator(3, 10);
  certify(r, a);
  CHECK(read_certificate(a) == r);
  certify(min_denominator(3, 10), b);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a).find("\"min_numerator\"") != std::string::npos);
  const auto r4 = search(4, 16);
  certify(r4, a);
  CHECK(read_certificate(a) == r4);
  std::filesystem::remove(a);
  std::filesystem::remove(b);
}
