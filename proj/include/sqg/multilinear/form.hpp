#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sqg/common/exec.hpp"
#include "sqg/spectral/field.hpp"

namespace sqg::multilinear {

using spectral::cplx;
using spectral::SpectralField;

// Behaviour of a multiplier under n -> -n.
enum class Parity { even, odd, none };

Parity flip(Parity p);
const char* to_string(Parity p);
Parity parity_from_string(const std::string& s);

/// All ordered p-tuples of active modes (nonzero multiples of m with
/// 3 <= |n| <= n_max) summing to zero. Modes are addressed by a slot index
/// 0..2K-1 running over -n_max, ..., -m, m, ..., n_max.
class TupleSpace {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  TupleSpace(int p, int m, int n_max);

  int arity() const noexcept { return p_; }
  int m() const noexcept { return m_; }
  int n_max() const noexcept { return n_max_; }
  int mode_count() const noexcept { return 2 * k_; }
  std::size_t size() const noexcept { return count_; }

  int mode_value(int slot) const noexcept { return slot < k_ ? (slot - k_) * m_ : (slot - k_ + 1) * m_; }
  // -1 if n is not an active mode.
  int mode_slot(long long n) const noexcept;

  // Mode slots of tuple i.
  std::span<const std::uint8_t> slots(std::size_t i) const noexcept {
    return {slots_.data() + i * static_cast<std::size_t>(p_), static_cast<std::size_t>(p_)};
  }
  std::vector<int> tuple(std::size_t i) const;

  // Index of the tuple with the given mode values, or npos.
  std::size_t find(std::span<const int> modes) const;
  std::size_t find_slots(std::span<const int> slots) const;
  // Index of the negated tuple.
  std::size_t negated(std::size_t i) const noexcept { return negated_[i]; }

 private:
  int p_, m_, n_max_, k_;
  std::size_t count_ = 0;
  std::vector<std::uint8_t> slots_;
  std::vector<std::uint32_t> lookup_;  // mixed radix over the first p-1 slots
  std::vector<std::size_t> negated_;
};

// Shared, memoized tuple spaces.
std::shared_ptr<const TupleSpace> tuple_space(int p, int m, int n_max);

/// p-linear form M(u_1..u_p) = sum m(n_1..n_p) u_1(n_1)...u_p(n_p) over the
/// active zero-sum tuples, stored as a dense multiplier table.
class MultilinearForm {
 public:
  MultilinearForm(std::shared_ptr<const TupleSpace> space, std::vector<cplx> values, Parity parity,
                  std::string label, bool symmetric = false);

  // Tabulates fn on every active tuple. Throws SymmetryError if the declared
  // parity does not hold.
  static MultilinearForm from_multiplier(int p, int m, int n_max, const std::function<cplx(std::span<const int>)>& fn,
                                         Parity parity, std::string label, Exec exec = Exec::parallel);
  static MultilinearForm zero(int p, int m, int n_max, Parity parity = Parity::none, std::string label = "0");

  int arity() const noexcept { return space_->arity(); }
  int m() const noexcept { return space_->m(); }
  int n_max() const noexcept { return space_->n_max(); }
  Parity parity() const noexcept { return parity_; }
  const std::string& label() const noexcept { return label_; }
  // True when the table is invariant under slot permutations.
  bool symmetric() const noexcept { return symmetric_; }

  const TupleSpace& space() const noexcept { return *space_; }
  const std::shared_ptr<const TupleSpace>& space_ptr() const noexcept { return space_; }
  std::span<const cplx> values() const noexcept { return values_; }

  // Multiplier at any integer tuple; zero off the active set.
  cplx multiplier(std::span<const int> modes) const;

  MultilinearForm relabeled(std::string label) const;

 private:
  std::shared_ptr<const TupleSpace> space_;
  std::vector<cplx> values_;
  Parity parity_;
  std::string label_;
  bool symmetric_;
};

// Direct sum over the active tuples. Fields must match the form's m and n_max.
cplx evaluate(const MultilinearForm& M, std::span<const SpectralField> fields, Exec exec = Exec::parallel);
// M(f, ..., f).
cplx evaluate_diagonal(const MultilinearForm& M, const SpectralField& f, Exec exec = Exec::parallel);

// Largest |m(-t) - (+-)m(t)| relative to max |m|; zero for Parity::none.
double parity_defect(const MultilinearForm& M);
// Largest |m(t) - m(t permuted)| relative to max |m|.
double symmetry_defect(const MultilinearForm& M);

MultilinearForm operator*(cplx a, const MultilinearForm& M);
MultilinearForm operator+(const MultilinearForm& a, const MultilinearForm& b);
MultilinearForm operator-(const MultilinearForm& a, const MultilinearForm& b);

// Average of the multiplier over all slot permutations.
MultilinearForm symmetrize(const MultilinearForm& M, Exec exec = Exec::parallel);

// Multiplier divided by sum_j lambda(n_j); parity flips. The zero test on the
// denominator is exact. Throws ResonanceError naming the tuple if the sum
// vanishes where the multiplier does not.
MultilinearForm L(const MultilinearForm& M, Exec exec = Exec::parallel);

// Restriction to totally degenerate tuples. Even arity only.
MultilinearForm P(const MultilinearForm& M);

// (p+1)-linear forms tracking the nonlinearity, symmetrized over slots. On
// equal arguments
//   N1(M)(f..f) = sum_j M(f, .., f d_a S f, .., f)
//   N2(M)(f..f) = sum_j M(f, .., (d_a f)(S f), .., f)
// with the products truncated to the field's modes. M must be symmetric and
// p + 1 <= 6.
MultilinearForm N1(const MultilinearForm& M, Exec exec = Exec::parallel);
MultilinearForm N2(const MultilinearForm& M, Exec exec = Exec::parallel);
// (2 N2 - N1)(M): the insertion of N(f) = 2 (Sf) f' - f (Sf)' into each slot.
MultilinearForm nonlinear_insertion(const MultilinearForm& M, Exec exec = Exec::parallel);

// Binary table with a one-line JSON header (arity, m, n_max, parity, label,
// symmetric, count) followed by little-endian doubles (re, im) per tuple.
void save_form(const MultilinearForm& M, const std::filesystem::path& path);
MultilinearForm load_form(const std::filesystem::path& path);

}  // namespace sqg::multilinear
