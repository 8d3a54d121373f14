#include "sqg/resonance/resonance.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <map>
#include <set>
#include <stdexcept>
#include <string>

namespace sqg::resonance {

namespace {

constexpr double kPrefilterMargin = 1e-6;

// lambda on [-bound, bound], exact and floating.
class LambdaTable {
 public:
  explicit LambdaTable(int bound) : bound_(bound), exact_(2 * bound + 1), approx_(2 * bound + 1, 0.0) {
    for (int v = -bound; v <= bound; ++v) {
      if (v >= -2 && v <= 2) continue;
      exact_[idx(v)] = spectral::lambda_exact(v);
      approx_[idx(v)] = spectral::lambda(v);
    }
  }
  const Rational& exact(int v) const { return exact_[idx(v)]; }
  double approx(int v) const { return approx_[idx(v)]; }

 private:
  std::size_t idx(int v) const { return static_cast<std::size_t>(v + bound_); }
  int bound_;
  std::vector<Rational> exact_;
  std::vector<double> approx_;
};

struct Best {
  bool have = false;
  Rational value;
  double approx = 0.0;
  Tuple argmin;

  bool could_improve(double d) const { return !have || d <= approx + kPrefilterMargin; }

  void offer(const Rational& q, const Tuple& t) {
    if (!have || q < value || (q == value && t < argmin)) {
      have = true;
      value = q;
      approx = q.get_d();
      argmin = t;
    }
  }
  void merge(const Best& o) {
    if (o.have) offer(o.value, o.argmin);
  }
};

struct Partial {
  Best global;
  std::map<int, Best> levels;
  std::uint64_t degenerate = 0;
  std::uint64_t degenerate_nonzero = 0;
  std::uint64_t ordered = 0;
  std::vector<Tuple> zeros;

  void merge(const Partial& o) {
    global.merge(o.global);
    for (const auto& [n, b] : o.levels) levels[n].merge(b);
    degenerate += o.degenerate;
    degenerate_nonzero += o.degenerate_nonzero;
    ordered += o.ordered;
    zeros.insert(zeros.end(), o.zeros.begin(), o.zeros.end());
  }
};

std::uint64_t factorial(int k) {
  std::uint64_t r = 1;
  for (int i = 2; i <= k; ++i) r *= static_cast<std::uint64_t>(i);
  return r;
}

// Distinct orderings of a sorted tuple: p! / prod(multiplicity!).
std::uint64_t arrangements(const Tuple& sorted) {
  std::uint64_t r = factorial(static_cast<int>(sorted.size()));
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    r /= factorial(static_cast<int>(j - i));
    i = j;
  }
  return r;
}

Tuple negated_sorted(const Tuple& sorted) {
  Tuple n(sorted.rbegin(), sorted.rend());
  for (int& v : n) v = -v;
  return n;
}

int min_magnitude(std::span<const int> t) {
  int r = std::abs(t[0]);
  for (int v : t) r = std::min(r, std::abs(v));
  return r;
}

Rational exact_abs_sum(const LambdaTable& table, std::span<const int> t) {
  Rational acc = 0;
  for (int v : t) acc += table.exact(v);
  return abs(acc);
}

// Visit one canonical multiset with its orbit weight.
void visit_canonical(const LambdaTable& table, const Tuple& t, Partial& out) {
  const Tuple neg = negated_sorted(t);
  const bool self_conjugate = (neg == t);
  const std::uint64_t orbit = arrangements(t) * (self_conjugate ? 1 : 2);
  out.ordered += orbit;
  if (self_conjugate) {
    // Self-conjugate sorted multisets are exactly the totally degenerate ones.
    out.degenerate += orbit;
    if (exact_abs_sum(table, t) != 0) out.degenerate_nonzero += orbit;
    return;
  }
  double d = 0.0;
  for (int v : t) d += table.approx(v);
  d = std::fabs(d);
  const int level = min_magnitude(t);
  Best& lvl = out.levels[level];
  if (d > kPrefilterMargin && !out.global.could_improve(d) && !lvl.could_improve(d)) return;
  const Rational q = exact_abs_sum(table, t);
  if (q == 0) out.zeros.push_back(t);
  out.global.offer(q, t);
  lvl.offer(q, t);
}

// Depth-first enumeration of sorted tuples t[0] >= t[1] >= ... summing to 0,
// with t[0] fixed, keeping only sign-flip canonical ones (t >= -t).
void enumerate_from(const LambdaTable& table, int p, int bound, Tuple& t, int pos, long sum, Partial& out) {
  const int prev = t[static_cast<std::size_t>(pos - 1)];
  const int remaining = p - pos;
  if (remaining == 1) {
    const long last = -sum;
    if (last > prev || last < -bound || (last > -3 && last < 3)) return;
    t[static_cast<std::size_t>(pos)] = static_cast<int>(last);
    // sign-flip canonical: max entry dominates the most negative one, then
    // lexicographic comparison with the negated tuple.
    if (t[0] < -t[static_cast<std::size_t>(p - 1)]) return;
    if (t < negated_sorted(t)) return;
    visit_canonical(table, t, out);
    return;
  }
  for (int v = prev; v >= -bound; --v) {
    if (v > -3 && v < 3) {
      v = -2;  // next iteration continues at -3
      continue;
    }
    const long s = sum + v;
    const long r = remaining - 1;
    // Remaining entries lie in [-bound, v].
    // Lowering v only makes the first condition worse, the second better.
    if (-s > static_cast<long>(v) * r) break;
    if (-s < -static_cast<long>(bound) * r) continue;
    t[static_cast<std::size_t>(pos)] = v;
    enumerate_from(table, p, bound, t, pos + 1, s, out);
  }
}

ResonanceReport finish(int p, int bound, Partial&& acc) {
  ResonanceReport r;
  r.p = p;
  r.bound = bound;
  r.degenerate_count = acc.degenerate;
  r.degenerate_nonzero_count = acc.degenerate_nonzero;
  r.ordered_count = acc.ordered;
  if (acc.global.have) {
    r.min_value = acc.global.value;
    r.argmin = acc.global.argmin;
  }
  std::sort(acc.zeros.begin(), acc.zeros.end());
  acc.zeros.erase(std::unique(acc.zeros.begin(), acc.zeros.end()), acc.zeros.end());
  r.exact_zero_tuples = std::move(acc.zeros);
  for (auto& [n, b] : acc.levels) {
    if (b.have) r.levels.push_back({n, b.value, b.argmin});
  }
  return r;
}

void check_search_args(int p, int bound) {
  if (p < 3 || p > 6) throw std::invalid_argument("arity must be in [3, 6], got " + std::to_string(p));
  if (bound < 3) throw std::invalid_argument("search radius must be >= 3");
  if (bound > 100000) throw std::invalid_argument("search radius too large for exact tables");
}

}  // namespace

Rational lambda_sum(std::span<const int> t) {
  Rational acc = 0;
  for (int v : t) acc += spectral::lambda_exact(v);
  return acc;
}

bool is_totally_degenerate(std::span<const int> t) {
  if (t.size() % 2 != 0) return false;
  Tuple sorted(t.begin(), t.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  return negated_sorted(sorted) == sorted;
}

Tuple canonical(std::span<const int> t) {
  Tuple sorted(t.begin(), t.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  Tuple neg = negated_sorted(sorted);
  return std::max(sorted, neg);
}

ResonanceReport search(int p, int bound, Exec exec) {
  check_search_args(p, bound);
  const LambdaTable table(bound);
  const int leads = bound - 2;  // t[0] ranges over 3..bound
  std::vector<Partial> partials(static_cast<std::size_t>(leads));

  auto run_lead = [&](int i) {
    Tuple t(static_cast<std::size_t>(p));
    t[0] = 3 + i;
    enumerate_from(table, p, bound, t, 1, t[0], partials[static_cast<std::size_t>(i)]);
  };

  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i < leads; ++i) run_lead(i);
  } else {
    for (int i = 0; i < leads; ++i) run_lead(i);
  }

  Partial acc;
  for (const auto& part : partials) acc.merge(part);
  return finish(p, bound, std::move(acc));
}

ResonanceReport search_unpruned(int p, int bound) {
  check_search_args(p, bound);
  const LambdaTable table(bound);
  std::vector<int> values;
  for (int v = -bound; v <= bound; ++v) {
    if (v <= -3 || v >= 3) values.push_back(v);
  }
  Partial acc;
  std::set<Tuple> zeros;
  Tuple t(static_cast<std::size_t>(p));
  std::vector<std::size_t> idx(static_cast<std::size_t>(p - 1), 0);
  while (true) {
    long sum = 0;
    for (int j = 0; j < p - 1; ++j) {
      t[static_cast<std::size_t>(j)] = values[idx[static_cast<std::size_t>(j)]];
      sum += t[static_cast<std::size_t>(j)];
    }
    const long last = -sum;
    if (std::labs(last) >= 3 && std::labs(last) <= bound) {
      t[static_cast<std::size_t>(p - 1)] = static_cast<int>(last);
      ++acc.ordered;
      const Rational q = exact_abs_sum(table, t);
      if (is_totally_degenerate(t)) {
        ++acc.degenerate;
        if (q != 0) ++acc.degenerate_nonzero;
      } else {
        const Tuple c = canonical(t);
        if (q == 0) zeros.insert(c);
        acc.global.offer(q, c);
        acc.levels[min_magnitude(t)].offer(q, c);
      }
    }
    int j = 0;
    while (j < p - 1 && ++idx[static_cast<std::size_t>(j)] == values.size()) {
      idx[static_cast<std::size_t>(j)] = 0;
      ++j;
    }
    if (j == p - 1) break;
  }
  acc.zeros.assign(zeros.begin(), zeros.end());
  return finish(p, bound, std::move(acc));
}

ResonanceReport min_denominator(int p, int bound, Exec exec) {
  if (p < 3 || p > 5) throw std::invalid_argument("min_denominator: arity must be 3, 4 or 5");
  if (bound < 9) throw std::invalid_argument("min_denominator: radius must be >= 9");
  ResonanceReport r = search(p, bound, exec);
  if (r.argmin.empty()) throw std::domain_error("min_denominator: empty search domain");
  return r;
}

ResonanceReport search_resonances_p6(int bound, Exec exec) {
  if (bound < 9) throw std::invalid_argument("search_resonances_p6: radius must be >= 9");
  return search(6, bound, exec);
}

Rational second_difference(int n) {
  Rational r = spectral::lambda_exact(n) - 2 * spectral::lambda_exact(n + 1) + spectral::lambda_exact(n + 2);
  r.canonicalize();
  return r;
}

ScalingFit fit_quartic_scaling(const ResonanceReport& report) {
  ScalingFit fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  bool first = true;
  for (const auto& lvl : report.levels) {
    if (lvl.n + 2 > report.bound) continue;
    const double v = lvl.min_value.get_d();
    const double scaled = v * std::pow(static_cast<double>(lvl.n), 4);
    fit.constant = first ? scaled : std::min(fit.constant, scaled);
    first = false;
    const double x = std::log(static_cast<double>(lvl.n)), y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++fit.levels_used;
  }
  const double k = fit.levels_used;
  if (fit.levels_used >= 2) fit.slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  return fit;
}

namespace {

nlohmann::json rational_json(const Rational& q) {
  return {{"numerator", q.get_num().get_str()}, {"denominator", q.get_den().get_str()}};
}

Rational rational_from(const nlohmann::json& j) {
  Rational q(mpz_class(j.at("numerator").get<std::string>()), mpz_class(j.at("denominator").get<std::string>()));
  q.canonicalize();
  return q;
}

}  // namespace

void certify(const ResonanceReport& report, const std::filesystem::path& path) {
  nlohmann::json j;
  j["p"] = report.p;
  j["bound"] = report.bound;
  j["min_numerator"] = report.min_value.get_num().get_str();
  j["min_denominator"] = report.min_value.get_den().get_str();
  j["argmin"] = report.argmin;
  j["degenerate_count"] = report.degenerate_count;
  j["degenerate_nonzero_count"] = report.degenerate_nonzero_count;
  j["ordered_count"] = report.ordered_count;
  j["exact_zero_tuples"] = report.exact_zero_tuples;
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& lvl : report.levels) {
    nlohmann::json e = rational_json(lvl.min_value);
    e["n"] = lvl.n;
    e["argmin"] = lvl.argmin;
    levels.push_back(std::move(e));
  }
  j["levels"] = std::move(levels);

  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << j.dump(1) << '\n';
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

ResonanceReport read_certificate(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const nlohmann::json j = nlohmann::json::parse(in);
  ResonanceReport r;
  r.p = j.at("p").get<int>();
  r.bound = j.at("bound").get<int>();
  r.min_value = Rational(mpz_class(j.at("min_numerator").get<std::string>()),
                         mpz_class(j.at("min_denominator").get<std::string>()));
  r.min_value.canonicalize();
  r.argmin = j.at("argmin").get<Tuple>();
  r.degenerate_count = j.at("degenerate_count").get<std::uint64_t>();
  r.degenerate_nonzero_count = j.at("degenerate_nonzero_count").get<std::uint64_t>();
  r.ordered_count = j.at("ordered_count").get<std::uint64_t>();
  r.exact_zero_tuples = j.at("exact_zero_tuples").get<std::vector<Tuple>>();
  for (const auto& e : j.at("levels")) {
    r.levels.push_back({e.at("n").get<int>(), rational_from(e), e.at("argmin").get<Tuple>()});
  }
  return r;
}

}  // namespace sqg::resonance
