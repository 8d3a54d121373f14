#include "sqg/evolve/evolve.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

#include "sqg/common/errors.hpp"
#include "sqg/spectral/field_io.hpp"
#include "sqg/spectral/multiplier.hpp"
#include "sqg/spectral/operators.hpp"

namespace sqg::evolve {

using spectral::cplx;

const char* to_string(InitialProfile p) { return p == InitialProfile::single_mode ? "single_mode" : "random_band"; }

InitialProfile profile_from_string(const std::string& s) {
  if (s == "single_mode") return InitialProfile::single_mode;
  if (s == "random_band") return InitialProfile::random_band;
  throw ConfigError("initial_profile: expected \"single_mode\" or \"random_band\", got \"" + s + "\"");
}

void validate(const SimConfig& c) {
  if (c.m < 3) throw ConfigError("m: must be >= 3 (m-fold symmetry class), got " + std::to_string(c.m));
  if (c.n_max < c.m || c.n_max % c.m != 0)
    throw ConfigError("n_max: must be a positive multiple of m, got " + std::to_string(c.n_max));
  if (!(c.s >= 0.0)) throw ConfigError("s: must be >= 0");
  if (!(c.dt > 0.0)) throw ConfigError("dt: must be > 0");
  if (!(c.t_end >= c.dt)) throw ConfigError("t_end: must be >= dt");
  if (!(c.epsilon > 0.0)) throw ConfigError("epsilon: must be > 0");
  if (c.diagnostics_stride < 1) throw ConfigError("diagnostics_stride: must be >= 1");
  if (!(c.stop_growth >= 0.0)) throw ConfigError("stop_growth: must be >= 0");
}

SpectralField initial_data(const SimConfig& cfg) {
  validate(cfg);
  SpectralField f(cfg.m, cfg.n_max);
  if (cfg.initial_profile == InitialProfile::single_mode) {
    f.set(cfg.m, 1.0);
  } else {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    for (int n = cfg.m; n <= cfg.n_max; n += cfg.m) {
      const double amp = std::pow(1.0 + static_cast<double>(n) * n, -(cfg.s + 1.0) / 2.0);
      f.set(n, std::polar(amp, phase(rng)));
    }
  }
  f *= cfg.epsilon / spectral::hs_norm(f, cfg.s);
  return f;
}

namespace {

// e^{-i lambda(n) h} on every stored mode.
SpectralField rotate(const SpectralField& f, double h) {
  SpectralField out = f;
  auto c = out.packed();
  for (int k = 1; k <= f.modes(); ++k) {
    c[static_cast<std::size_t>(k - 1)] *= std::polar(1.0, -spectral::lambda(f.mode_number(k)) * h);
  }
  return out;
}

SpectralField axpy(const SpectralField& x, double a, const SpectralField& y) {
  SpectralField out = x;
  auto o = out.packed();
  const auto v = y.packed();
  for (std::size_t k = 0; k < o.size(); ++k) o[k] += a * v[k];
  return out;
}

}  // namespace

SpectralField rhs(const SpectralField& f, bool linear_only) {
  SpectralField out = -1.0 * spectral::d_alpha_S(f);
  if (!linear_only) out += spectral::nonlinearity(f);
  return out;
}

StepResult step(const SpectralField& f, double h, bool linear_only) {
  if (linear_only) return {rotate(f, h), 0.0};
  // Lawson RK4 in the variable g = e^{i lambda t} f.
  const auto n1 = spectral::nonlinearity_with_mean(f);
  const SpectralField a = rotate(axpy(f, h / 2, n1.value), h / 2);
  const auto n2 = spectral::nonlinearity_with_mean(a);
  const SpectralField fh = rotate(f, h / 2);
  const auto n3 = spectral::nonlinearity_with_mean(axpy(fh, h / 2, n2.value));
  const auto n4 = spectral::nonlinearity_with_mean(axpy(rotate(f, h), h, rotate(n3.value, h / 2)));

  SpectralField out = rotate(f, h);
  out += (h / 6) * rotate(n1.value, h);
  out += (h / 3) * rotate(n2.value + n3.value, h / 2);
  out += (h / 6) * n4.value;
  if (!out.is_finite()) throw InstabilityError("non-finite coefficient after step", 0.0);
  const double dmean = (h / 6) * (n1.mean.real() + 2 * n2.mean.real() + 2 * n3.mean.real() + n4.mean.real());
  return {std::move(out), dmean};
}

Diagnostics diagnose(const SimConfig& cfg, const multilinear::CorrectedEnergy* chain, const SpectralField& f, double t,
                     double mean) {
  Diagnostics d;
  d.t = t;
  d.hs_norm = spectral::hs_norm(f, cfg.s);
  d.mean_res = std::fabs(mean);
  // Spectral content off the multiples of m over the full mode range.
  double off = 0.0;
  for (long long n = -f.n_max(); n <= f.n_max(); ++n) {
    if (n % f.m() != 0 || n == 0) off += std::abs(f.coeff(n));
  }
  d.sym_res = off;
  if (chain) {
    const auto e = multilinear::corrected_energies(*chain, f);
    const auto r = multilinear::corrected_rates(*chain, f, rhs(f, cfg.linear_only));
    d.Es = e.Es;
    d.Es_c3 = e.c3;
    d.Es_c34 = e.c34;
    d.Es_c345 = e.c345;
    d.dEs = r.Es;
    d.dEs_c3 = r.c3;
    d.dEs_c34 = r.c34;
    d.dEs_c345 = r.c345;
  } else {
    d.Es = spectral::energy(f, cfg.s);
    d.Es_c3 = d.Es_c34 = d.Es_c345 = std::nan("");
    d.dEs = d.dEs_c3 = d.dEs_c34 = d.dEs_c345 = std::nan("");
  }
  return d;
}

Trajectory run(const SimConfig& cfg, const RunOptions& opts) {
  validate(cfg);
  std::optional<multilinear::CorrectedEnergy> own_chain;
  const multilinear::CorrectedEnergy* chain = opts.chain;
  if (!chain && cfg.corrected_diagnostics) {
    own_chain = multilinear::build_chain(cfg.s, cfg.m, cfg.n_max);
    chain = &*own_chain;
  }
  if (chain && (chain->m != cfg.m || chain->n_max != cfg.n_max || chain->s != cfg.s))
    throw ConfigError("corrected-energy chain does not match (s, m, n_max) of the run");

  SpectralField f = opts.initial ? *opts.initial : initial_data(cfg);
  if (f.m() != cfg.m || f.n_max() != cfg.n_max) throw ConfigError("initial state does not match (m, n_max)");
  double mean = opts.mean0;

  Trajectory traj;
  auto record = [&](double t) {
    traj.times.push_back(t);
    if (opts.keep_states) traj.states.push_back(f);
    traj.diagnostics.push_back(diagnose(cfg, chain, f, t, mean));
  };
  record(opts.t0);

  const double span = cfg.t_end - opts.t0;
  const auto full_steps = static_cast<long long>(std::floor(span / cfg.dt * (1 + 1e-12)));
  const double remainder = span - static_cast<double>(full_steps) * cfg.dt;
  const long long total = full_steps + (remainder > 1e-12 * cfg.dt ? 1 : 0);
  const double blowup = 1e3 * cfg.epsilon;

  double t = opts.t0;
  for (long long k = 1; k <= total; ++k) {
    const double h = k <= full_steps ? cfg.dt : remainder;
    std::optional<StepResult> next;
    try {
      next = step(f, h, cfg.linear_only);
    } catch (const InstabilityError&) {
      throw InstabilityError("non-finite state", t);
    }
    const double norm = spectral::hs_norm(next->state, cfg.s);
    if (!(norm <= blowup)) {
      char msg[96];
      std::snprintf(msg, sizeof msg, "H^s norm %.3g exceeds 1e3 epsilon", norm);
      throw InstabilityError(msg, t);
    }
    f = std::move(next->state);
    mean += next->mean_increment;
    t = k <= full_steps ? opts.t0 + static_cast<double>(k) * cfg.dt : cfg.t_end;
    const bool grown = cfg.stop_growth > 0 && norm >= cfg.stop_growth * cfg.epsilon;
    if (grown || k == total || k % cfg.diagnostics_stride == 0) record(t);
    if (grown) {
      traj.stopped = true;
      traj.stop_time = t;
      break;
    }
  }
  traj.final_mean = mean;
  return traj;
}

namespace {

void write_atomic(const std::filesystem::path& path, const std::string& body) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << body;
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void append_numbers(std::string& line, std::initializer_list<double> values) {
  char buf[40];
  bool first = true;
  for (double v : values) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    if (!first) line += ',';
    line += buf;
    first = false;
  }
}

std::string csv(const Trajectory& traj, bool rates) {
  std::string out = "t,Es,Es_c3,Es_c34,Es_c345,hs_norm,mean_res,sym_res";
  if (rates) out += ",dEs,dEs_c3,dEs_c34,dEs_c345";
  out += '\n';
  for (const auto& d : traj.diagnostics) {
    append_numbers(out, {d.t, d.Es, d.Es_c3, d.Es_c34, d.Es_c345, d.hs_norm, d.mean_res, d.sym_res});
    if (rates) {
      out += ',';
      append_numbers(out, {d.dEs, d.dEs_c3, d.dEs_c34, d.dEs_c345});
    }
    out += '\n';
  }
  return out;
}

}  // namespace

void write_csv(const Trajectory& traj, const std::filesystem::path& path) { write_atomic(path, csv(traj, false)); }
void write_rates_csv(const Trajectory& traj, const std::filesystem::path& path) { write_atomic(path, csv(traj, true)); }

void save_restart(const SpectralField& f, double t, double mean, const std::filesystem::path& path) {
  auto j = spectral::to_json(f);
  j["t"] = t;
  j["mean"] = mean;
  write_atomic(path, j.dump() + "\n");
}

Restart load_restart(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const auto j = nlohmann::json::parse(in);
  return {spectral::field_from_json(j), j.value("t", 0.0), j.value("mean", 0.0)};
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need >= 2 matching points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double k = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

LifespanReport lifespan_experiment(const std::vector<double>& eps_list, const SimConfig& cfg_template,
                                   const multilinear::CorrectedEnergy* chain) {
  if (eps_list.size() < 2) throw ConfigError("eps_list: need at least two amplitudes");
  for (std::size_t i = 1; i < eps_list.size(); ++i) {
    if (!(eps_list[i] < eps_list[i - 1])) throw ConfigError("eps_list: must be strictly decreasing");
  }
  validate(cfg_template);
  std::optional<multilinear::CorrectedEnergy> own;
  if (!chain) {
    own = multilinear::build_chain(cfg_template.s, cfg_template.m, cfg_template.n_max);
    chain = &*own;
  }

  LifespanReport report;
  report.rows.resize(eps_list.size());
  report.runs.resize(eps_list.size());
  const auto count = static_cast<std::ptrdiff_t>(eps_list.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    SimConfig cfg = cfg_template;
    cfg.epsilon = eps_list[static_cast<std::size_t>(i)];
    cfg.stop_growth = 2.0;
    cfg.corrected_diagnostics = true;
    RunOptions opts;
    opts.chain = chain;
    opts.keep_states = false;
    Trajectory traj = run(cfg, opts);

    LifespanRow row;
    row.epsilon = cfg.epsilon;
    row.doubled = traj.stopped;
    row.doubling_time = traj.stopped ? traj.stop_time : traj.times.back();
    // Trapezoidal time averages of |d/dt|.
    const auto& d = traj.diagnostics;
    const double T = d.back().t - d.front().t;
    for (std::size_t k = 1; k < d.size(); ++k) {
      const double w = (d[k].t - d[k - 1].t) / (2 * T);
      row.rate_Es += w * (std::fabs(d[k].dEs) + std::fabs(d[k - 1].dEs));
      row.rate_c3 += w * (std::fabs(d[k].dEs_c3) + std::fabs(d[k - 1].dEs_c3));
      row.rate_c34 += w * (std::fabs(d[k].dEs_c34) + std::fabs(d[k - 1].dEs_c34));
      row.rate_c345 += w * (std::fabs(d[k].dEs_c345) + std::fabs(d[k - 1].dEs_c345));
    }
    report.rows[static_cast<std::size_t>(i)] = row;
    report.runs[static_cast<std::size_t>(i)] = std::move(traj);
  }

  std::vector<double> eps, rE, r3, r34, r345;
  for (const auto& r : report.rows) {
    eps.push_back(r.epsilon);
    rE.push_back(r.rate_Es);
    r3.push_back(r.rate_c3);
    r34.push_back(r.rate_c34);
    r345.push_back(r.rate_c345);
  }
  report.slope_Es = loglog_slope(eps, rE);
  report.slope_c3 = loglog_slope(eps, r3);
  report.slope_c34 = loglog_slope(eps, r34);
  report.slope_c345 = loglog_slope(eps, r345);
  return report;
}

}  // namespace sqg::evolve
