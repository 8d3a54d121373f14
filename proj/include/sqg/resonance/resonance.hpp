#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "sqg/common/exec.hpp"
#include "sqg/spectral/multiplier.hpp"

namespace sqg::resonance {

using spectral::Rational;

// Integer modes n_1..n_p, |n_j| >= 3, summing to zero.
using Tuple = std::vector<int>;

// Exact sum_j lambda(n_j).
Rational lambda_sum(std::span<const int> t);

// True iff the tuple pairs up into (k, -k) couples, i.e. every value occurs as
// often as its negative. Always false for odd arity.
bool is_totally_degenerate(std::span<const int> t);

// Sorted non-increasing representative of the tuple's orbit under
// permutations and the sign flip t -> -t: of the two sorted candidates the
// lexicographically larger one.
Tuple canonical(std::span<const int> t);

// Minimum of |sum lambda| among tuples whose smallest |n_j| equals n.
struct LevelMinimum {
  int n = 0;
  Rational min_value;
  Tuple argmin;
  bool operator==(const LevelMinimum&) const = default;
};

struct ResonanceReport {
  int p = 0;
  int bound = 0;
  // Exact minimum of |sum lambda| over nondegenerate tuples, and a canonical
  // minimizer (ties broken by the lexicographically smallest canonical tuple).
  Rational min_value;
  Tuple argmin;
  // Ordered tuples (all permutations counted) that are totally degenerate.
  std::uint64_t degenerate_count = 0;
  // Totally degenerate tuples whose lambda sum is nonzero (always 0: lambda is odd).
  std::uint64_t degenerate_nonzero_count = 0;
  // Ordered tuples examined in total.
  std::uint64_t ordered_count = 0;
  // Canonical nondegenerate tuples with lambda sum exactly zero.
  std::vector<Tuple> exact_zero_tuples;
  // Per-level minima over nondegenerate tuples, ascending in n.
  std::vector<LevelMinimum> levels;

  bool operator==(const ResonanceReport&) const = default;
};

// Exhaustive search over all tuples of arity p with |n_j| <= bound, using
// canonical representatives (sorted, sign-flip reduced) and orbit counting.
// A floating pre-filter with margin 1e-6 skips tuples that cannot improve a
// minimum; every reported value and every zero test is exact.
// Parallel over the leading entry.
ResonanceReport search(int p, int bound, Exec exec = Exec::parallel);

// Reference enumeration over every ordered tuple, exact arithmetic on every
// tuple, serial. Feasible only for small bounds; used to validate search().
ResonanceReport search_unpruned(int p, int bound);

// p in {3, 4, 5}. Throws std::invalid_argument outside that range or for
// bound < 9, std::domain_error if the domain holds no nondegenerate tuple.
ResonanceReport min_denominator(int p, int bound, Exec exec = Exec::parallel);

// Arity-6 search; default radius 20. The returned exact_zero_tuples is
// evidence about the radius searched, nothing more.
ResonanceReport search_resonances_p6(int bound = 20, Exec exec = Exec::parallel);

// lambda(n) - 2 lambda(n+1) + lambda(n+2): the unit-square integral of
// lambda'' that lower-bounds |sum lambda| at arity 4 when min |n_j| = n.
Rational second_difference(int n);

struct ScalingFit {
  double constant = 0.0;  // min over fitted levels of min_value * n^4
  double slope = 0.0;     // least-squares slope of log(min_value) vs log(n)
  int levels_used = 0;
};
// Fit over levels n with n + 2 <= bound / 2 so boundary effects stay out.
ScalingFit fit_quartic_scaling(const ResonanceReport& report);

// JSON certificate; exact rationals as decimal strings. Byte-identical for
// identical reports.
void certify(const ResonanceReport& report, const std::filesystem::path& path);
ResonanceReport read_certificate(const std::filesystem::path& path);

}  // namespace sqg::resonance
