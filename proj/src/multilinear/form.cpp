#include "sqg/multilinear/form.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "sqg/common/errors.hpp"
#include "sqg/spectral/multiplier.hpp"

namespace sqg::multilinear {

namespace {

constexpr cplx I{0.0, 1.0};
constexpr std::uint32_t kNoTuple = 0xffffffffu;
constexpr std::size_t kMaxLookup = std::size_t{1} << 27;
// Evaluation sums in this many fixed blocks so that the parallel result does
// not depend on the thread count.
constexpr std::size_t kBlocks = 64;

std::string tuple_string(std::span<const int> t) {
  std::ostringstream os;
  os << '(';
  for (std::size_t j = 0; j < t.size(); ++j) os << (j ? ", " : "") << t[j];
  os << ')';
  return os.str();
}

template <class Fn>
void for_each_index(std::size_t n, Exec exec, Fn&& fn) {
  const auto count = static_cast<std::ptrdiff_t>(n);
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i) fn(static_cast<std::size_t>(i));
  } else {
    for (std::ptrdiff_t i = 0; i < count; ++i) fn(static_cast<std::size_t>(i));
  }
}

double max_abs(std::span<const cplx> v) {
  double r = 0.0;
  for (const cplx& z : v) r = std::max(r, std::abs(z));
  return r;
}

void require_same_space(const MultilinearForm& a, const MultilinearForm& b) {
  if (a.arity() != b.arity() || a.m() != b.m() || a.n_max() != b.n_max())
    throw std::invalid_argument("forms have different arity or truncation");
}

}  // namespace

Parity flip(Parity p) {
  switch (p) {
    case Parity::even: return Parity::odd;
    case Parity::odd: return Parity::even;
    default: return Parity::none;
  }
}

const char* to_string(Parity p) {
  switch (p) {
    case Parity::even: return "even";
    case Parity::odd: return "odd";
    default: return "none";
  }
}

Parity parity_from_string(const std::string& s) {
  if (s == "even") return Parity::even;
  if (s == "odd") return Parity::odd;
  if (s == "none") return Parity::none;
  throw std::invalid_argument("unknown parity '" + s + "'");
}

// ---------------------------------------------------------------------------

TupleSpace::TupleSpace(int p, int m, int n_max) : p_(p), m_(m), n_max_(n_max) {
  if (p < 2 || p > 6) throw std::invalid_argument("tuple arity must be in [2, 6]");
  if (m < 3 || n_max < m || n_max % m != 0) throw SymmetryError("tuple space needs m >= 3 and n_max a multiple of m");
  k_ = n_max / m;
  if (2 * k_ > 255) throw std::invalid_argument("tuple space: too many modes");
  const std::size_t radix = static_cast<std::size_t>(2 * k_);
  std::size_t cells = 1;
  for (int j = 0; j < p - 1; ++j) {
    cells *= radix;
    if (cells > kMaxLookup) throw std::invalid_argument("tuple space too large for a dense table");
  }
  lookup_.assign(cells, kNoTuple);

  std::vector<int> digits(static_cast<std::size_t>(p - 1), 0);
  for (std::size_t r = 0; r < cells; ++r) {
    // digits[0] is the most significant slot.
    std::size_t rem = r;
    for (int j = p - 2; j >= 0; --j) {
      digits[static_cast<std::size_t>(j)] = static_cast<int>(rem % radix);
      rem /= radix;
    }
    long long sum = 0;
    for (int d : digits) sum += mode_value(d);
    const int last = mode_slot(-sum);
    if (last < 0) continue;
    lookup_[r] = static_cast<std::uint32_t>(count_++);
    for (int d : digits) slots_.push_back(static_cast<std::uint8_t>(d));
    slots_.push_back(static_cast<std::uint8_t>(last));
  }

  negated_.resize(count_);
  std::vector<int> neg(static_cast<std::size_t>(p));
  for (std::size_t i = 0; i < count_; ++i) {
    const auto s = slots(i);
    for (int j = 0; j < p; ++j) neg[static_cast<std::size_t>(j)] = 2 * k_ - 1 - s[static_cast<std::size_t>(j)];
    negated_[i] = find_slots(neg);
  }
}

int TupleSpace::mode_slot(long long n) const noexcept {
  if (n == 0 || n % m_ != 0 || n > n_max_ || n < -n_max_) return -1;
  const long long k = n / m_;
  return static_cast<int>(k < 0 ? k + k_ : k + k_ - 1);
}

std::vector<int> TupleSpace::tuple(std::size_t i) const {
  std::vector<int> t;
  for (auto s : slots(i)) t.push_back(mode_value(s));
  return t;
}

std::size_t TupleSpace::find_slots(std::span<const int> s) const {
  if (s.size() != static_cast<std::size_t>(p_)) return npos;
  std::size_t r = 0;
  const std::size_t radix = static_cast<std::size_t>(2 * k_);
  for (int j = 0; j < p_ - 1; ++j) {
    const int d = s[static_cast<std::size_t>(j)];
    if (d < 0 || d >= 2 * k_) return npos;
    r = r * radix + static_cast<std::size_t>(d);
  }
  const std::uint32_t idx = lookup_[r];
  if (idx == kNoTuple) return npos;
  if (slots_[idx * static_cast<std::size_t>(p_) + static_cast<std::size_t>(p_ - 1)] != s.back()) return npos;
  return idx;
}

std::size_t TupleSpace::find(std::span<const int> modes) const {
  if (modes.size() != static_cast<std::size_t>(p_)) return npos;
  std::vector<int> s(modes.size());
  for (std::size_t j = 0; j < modes.size(); ++j) {
    s[j] = mode_slot(modes[j]);
    if (s[j] < 0) return npos;
  }
  return find_slots(s);
}

std::shared_ptr<const TupleSpace> tuple_space(int p, int m, int n_max) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, int>, std::shared_ptr<const TupleSpace>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[{p, m, n_max}];
  if (!slot) slot = std::make_shared<const TupleSpace>(p, m, n_max);
  return slot;
}

// ---------------------------------------------------------------------------

MultilinearForm::MultilinearForm(std::shared_ptr<const TupleSpace> space, std::vector<cplx> values, Parity parity,
                                 std::string label, bool symmetric)
    : space_(std::move(space)), values_(std::move(values)), parity_(parity), label_(std::move(label)),
      symmetric_(symmetric) {
  if (!space_) throw std::invalid_argument("form without tuple space");
  if (values_.size() != space_->size()) throw std::invalid_argument("multiplier table does not match tuple space");
}

MultilinearForm MultilinearForm::from_multiplier(int p, int m, int n_max,
                                                 const std::function<cplx(std::span<const int>)>& fn, Parity parity,
                                                 std::string label, Exec exec) {
  auto space = tuple_space(p, m, n_max);
  std::vector<cplx> values(space->size());
  for_each_index(space->size(), exec, [&](std::size_t i) {
    int t[6];
    const auto s = space->slots(i);
    for (int j = 0; j < p; ++j) t[j] = space->mode_value(s[static_cast<std::size_t>(j)]);
    values[i] = fn(std::span<const int>(t, static_cast<std::size_t>(p)));
  });
  MultilinearForm M(std::move(space), std::move(values), parity, std::move(label));
  if (parity_defect(M) > 1e-12) throw SymmetryError("multiplier '" + M.label() + "' violates its declared parity");
  return M;
}

MultilinearForm MultilinearForm::zero(int p, int m, int n_max, Parity parity, std::string label) {
  auto space = tuple_space(p, m, n_max);
  std::vector<cplx> values(space->size());
  return MultilinearForm(std::move(space), std::move(values), parity, std::move(label), true);
}

cplx MultilinearForm::multiplier(std::span<const int> modes) const {
  const std::size_t i = space_->find(modes);
  return i == TupleSpace::npos ? cplx{} : values_[i];
}

MultilinearForm MultilinearForm::relabeled(std::string label) const {
  MultilinearForm r = *this;
  r.label_ = std::move(label);
  return r;
}

// ---------------------------------------------------------------------------

cplx evaluate(const MultilinearForm& M, std::span<const SpectralField> fields, Exec exec) {
  const TupleSpace& sp = M.space();
  const int p = sp.arity();
  if (fields.size() != static_cast<std::size_t>(p)) throw std::invalid_argument("evaluate: wrong number of fields");
  // Coefficients by mode slot, one row per argument.
  const std::size_t modes = static_cast<std::size_t>(sp.mode_count());
  std::vector<cplx> coeff(static_cast<std::size_t>(p) * modes);
  for (int j = 0; j < p; ++j) {
    const SpectralField& f = fields[static_cast<std::size_t>(j)];
    if (f.m() != sp.m() || f.n_max() != sp.n_max())
      throw std::invalid_argument("evaluate: field truncation does not match the form");
    for (std::size_t s = 0; s < modes; ++s) coeff[static_cast<std::size_t>(j) * modes + s] = f.coeff(sp.mode_value(static_cast<int>(s)));
  }

  const auto values = M.values();
  auto block_sum = [&](std::size_t lo, std::size_t hi) {
    cplx acc{};
    for (std::size_t i = lo; i < hi; ++i) {
      if (values[i] == cplx{}) continue;
      const auto s = sp.slots(i);
      cplx term = values[i];
      for (int j = 0; j < p; ++j) term *= coeff[static_cast<std::size_t>(j) * modes + s[static_cast<std::size_t>(j)]];
      acc += term;
    }
    return acc;
  };

  const std::size_t n = sp.size();
  if (exec == Exec::serial) return block_sum(0, n);
  std::vector<cplx> partial(kBlocks);
  const std::size_t chunk = (n + kBlocks - 1) / kBlocks;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(kBlocks); ++b) {
    const std::size_t lo = std::min(n, static_cast<std::size_t>(b) * chunk);
    partial[static_cast<std::size_t>(b)] = block_sum(lo, std::min(n, lo + chunk));
  }
  return std::accumulate(partial.begin(), partial.end(), cplx{});
}

cplx evaluate_diagonal(const MultilinearForm& M, const SpectralField& f, Exec exec) {
  std::vector<SpectralField> args(static_cast<std::size_t>(M.arity()), f);
  return evaluate(M, args, exec);
}

double parity_defect(const MultilinearForm& M) {
  if (M.parity() == Parity::none) return 0.0;
  const double sign = M.parity() == Parity::even ? 1.0 : -1.0;
  const auto v = M.values();
  const double scale = max_abs(v);
  if (scale == 0.0) return 0.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) worst = std::max(worst, std::abs(v[M.space().negated(i)] - sign * v[i]));
  return worst / scale;
}

double symmetry_defect(const MultilinearForm& M) {
  const TupleSpace& sp = M.space();
  const auto v = M.values();
  const double scale = max_abs(v);
  if (scale == 0.0) return 0.0;
  const int p = sp.arity();
  double worst = 0.0;
  std::vector<int> s(static_cast<std::size_t>(p));
  // Adjacent transpositions generate the symmetric group.
  for (std::size_t i = 0; i < sp.size(); ++i) {
    for (int a = 0; a + 1 < p; ++a) {
      const auto orig = sp.slots(i);
      std::copy(orig.begin(), orig.end(), s.begin());
      std::swap(s[static_cast<std::size_t>(a)], s[static_cast<std::size_t>(a + 1)]);
      worst = std::max(worst, std::abs(v[sp.find_slots(s)] - v[i]));
    }
  }
  return worst / scale;
}

MultilinearForm operator*(cplx a, const MultilinearForm& M) {
  std::vector<cplx> v(M.values().begin(), M.values().end());
  for (cplx& z : v) z *= a;
  return MultilinearForm(M.space_ptr(), std::move(v), M.parity(), M.label(), M.symmetric());
}

namespace {

MultilinearForm combine(const MultilinearForm& a, const MultilinearForm& b, double sign, const char* op) {
  require_same_space(a, b);
  std::vector<cplx> v(a.values().begin(), a.values().end());
  const auto w = b.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += sign * w[i];
  const Parity parity = a.parity() == b.parity() ? a.parity() : Parity::none;
  return MultilinearForm(a.space_ptr(), std::move(v), parity, a.label() + op + b.label(),
                         a.symmetric() && b.symmetric());
}

}  // namespace

MultilinearForm operator+(const MultilinearForm& a, const MultilinearForm& b) { return combine(a, b, 1.0, " + "); }
MultilinearForm operator-(const MultilinearForm& a, const MultilinearForm& b) { return combine(a, b, -1.0, " - "); }

MultilinearForm symmetrize(const MultilinearForm& M, Exec exec) {
  const TupleSpace& sp = M.space();
  const int p = sp.arity();
  std::vector<std::vector<int>> perms;
  std::vector<int> perm(static_cast<std::size_t>(p));
  std::iota(perm.begin(), perm.end(), 0);
  do perms.push_back(perm);
  while (std::next_permutation(perm.begin(), perm.end()));

  const auto v = M.values();
  std::vector<cplx> out(v.size());
  for_each_index(sp.size(), exec, [&](std::size_t i) {
    const auto s = sp.slots(i);
    int q[6];
    cplx acc{};
    for (const auto& pr : perms) {
      for (int j = 0; j < p; ++j) q[j] = s[static_cast<std::size_t>(pr[static_cast<std::size_t>(j)])];
      acc += v[sp.find_slots(std::span<const int>(q, static_cast<std::size_t>(p)))];
    }
    out[i] = acc / static_cast<double>(perms.size());
  });
  return MultilinearForm(M.space_ptr(), std::move(out), M.parity(), "sym(" + M.label() + ")", true);
}

MultilinearForm L(const MultilinearForm& M, Exec exec) {
  const TupleSpace& sp = M.space();
  std::vector<spectral::Rational> lam_exact(static_cast<std::size_t>(sp.mode_count()));
  for (int s = 0; s < sp.mode_count(); ++s) lam_exact[static_cast<std::size_t>(s)] = spectral::lambda_exact(sp.mode_value(s));

  const auto v = M.values();
  std::vector<cplx> out(v.size());
  std::size_t first_resonant = TupleSpace::npos;
  std::mutex mu;
  for_each_index(sp.size(), exec, [&](std::size_t i) {
    if (v[i] == cplx{}) return;
    spectral::Rational denom = 0;
    for (auto s : sp.slots(i)) denom += lam_exact[s];
    if (denom == 0) {
      std::lock_guard lock(mu);
      first_resonant = std::min(first_resonant, i);
      return;
    }
    out[i] = v[i] / denom.get_d();
  });
  if (first_resonant != TupleSpace::npos) {
    throw ResonanceError("L(" + M.label() + "): sum of lambda vanishes on " + tuple_string(sp.tuple(first_resonant)) +
                         " where the multiplier is nonzero");
  }
  return MultilinearForm(M.space_ptr(), std::move(out), flip(M.parity()), "L(" + M.label() + ")", M.symmetric());
}

MultilinearForm P(const MultilinearForm& M) {
  const TupleSpace& sp = M.space();
  if (sp.arity() % 2 != 0) throw std::invalid_argument("P is defined for even arity only");
  const int modes = sp.mode_count();
  const auto v = M.values();
  std::vector<cplx> out(v.size());
  std::vector<int> count(static_cast<std::size_t>(modes));
  for (std::size_t i = 0; i < sp.size(); ++i) {
    std::fill(count.begin(), count.end(), 0);
    for (auto s : sp.slots(i)) ++count[s];
    bool paired = true;
    for (int s = 0; s < modes / 2 && paired; ++s) paired = count[static_cast<std::size_t>(s)] == count[static_cast<std::size_t>(modes - 1 - s)];
    if (paired) out[i] = v[i];
  }
  return MultilinearForm(M.space_ptr(), std::move(out), M.parity(), "P(" + M.label() + ")", M.symmetric());
}

namespace {

// Symmetrized insertion of a product into one slot of a symmetric M:
//   (1 / (p+1)) sum_{a != b} m(n_a + n_b, rest) c(n_a, n_b),
// the slot average of sum_j m(.., n_j + n_{j+1}, ..) c(n_j, n_{j+1}).
template <class Coef>
MultilinearForm insert_product(const MultilinearForm& M, Coef coef, const std::string& name, Exec exec) {
  if (!M.symmetric()) throw std::invalid_argument(name + ": the form must be symmetric");
  const int p = M.arity();
  if (p + 1 > 6) throw std::invalid_argument(name + ": arity " + std::to_string(p + 1) + " exceeds 6");
  const TupleSpace& in = M.space();
  auto out_space = tuple_space(p + 1, M.m(), M.n_max());
  const TupleSpace& os = *out_space;
  const auto v = M.values();
  const int q = p + 1;

  std::vector<cplx> out(os.size());
  for_each_index(os.size(), exec, [&](std::size_t i) {
    const auto s = os.slots(i);
    int n[6], merged[6];
    for (int j = 0; j < q; ++j) n[j] = os.mode_value(s[static_cast<std::size_t>(j)]);
    cplx acc{};
    for (int a = 0; a < q; ++a) {
      for (int b = 0; b < q; ++b) {
        if (a == b) continue;
        const int ms = in.mode_slot(static_cast<long long>(n[a]) + n[b]);
        if (ms < 0) continue;
        int k = 0;
        merged[k++] = ms;
        for (int j = 0; j < q; ++j) {
          if (j != a && j != b) merged[k++] = s[static_cast<std::size_t>(j)];
        }
        const std::size_t idx = in.find_slots(std::span<const int>(merged, static_cast<std::size_t>(p)));
        if (idx == TupleSpace::npos) continue;
        acc += v[idx] * coef(n[a], n[b]);
      }
    }
    out[i] = acc / static_cast<double>(q);
  });
  return MultilinearForm(std::move(out_space), std::move(out), flip(M.parity()), name + "(" + M.label() + ")", true);
}

}  // namespace

MultilinearForm N1(const MultilinearForm& M, Exec exec) {
  return insert_product(M, [](int, int b) { return I * spectral::lambda(b); }, "N1", exec);
}

MultilinearForm N2(const MultilinearForm& M, Exec exec) {
  return insert_product(M, [](int a, int b) { return I * (static_cast<double>(a) * spectral::sigma(b)); }, "N2", exec);
}

MultilinearForm nonlinear_insertion(const MultilinearForm& M, Exec exec) {
  return insert_product(
      M, [](int a, int b) { return I * (2.0 * static_cast<double>(a) * spectral::sigma(b) - spectral::lambda(b)); },
      "(2N2-N1)", exec);
}

// ---------------------------------------------------------------------------

void save_form(const MultilinearForm& M, const std::filesystem::path& path) {
  static_assert(std::endian::native == std::endian::little, "binary form tables are little-endian");
  nlohmann::json header = {{"arity", M.arity()},       {"m", M.m()},
                           {"n_max", M.n_max()},       {"parity", to_string(M.parity())},
                           {"label", M.label()},       {"symmetric", M.symmetric()},
                           {"count", M.values().size()}};
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << header.dump() << '\n';
    out.write(reinterpret_cast<const char*>(M.values().data()),
              static_cast<std::streamsize>(M.values().size() * sizeof(cplx)));
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

MultilinearForm load_form(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  const auto header = nlohmann::json::parse(line);
  auto space = tuple_space(header.at("arity").get<int>(), header.at("m").get<int>(), header.at("n_max").get<int>());
  const auto count = header.at("count").get<std::size_t>();
  if (count != space->size()) throw std::runtime_error("form table " + path.string() + " has the wrong size");
  std::vector<cplx> values(count);
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(count * sizeof(cplx)));
  if (!in) throw std::runtime_error("truncated form table " + path.string());
  return MultilinearForm(std::move(space), std::move(values), parity_from_string(header.at("parity")),
                         header.at("label").get<std::string>(), header.at("symmetric").get<bool>());
}

}  // namespace sqg::multilinear
