#include "sqg/waves/waves.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <limits>

#include "sqg/spectral/multiplier.hpp"
#include "sqg/spectral/operators.hpp"

namespace sqg::waves {

using spectral::cplx;

namespace {

double l2(const std::vector<double>& b) {
  double s = 0.0;
  for (double x : b) s += x * x;
  return std::sqrt(s);
}

std::vector<double> sine_coefficients(const SpectralField& r) {
  std::vector<double> b(static_cast<std::size_t>(r.modes()));
  // sum_k b_k sin(k m a) has coefficient -i b_k / 2 at n = k m.
  for (int k = 1; k <= r.modes(); ++k) b[static_cast<std::size_t>(k - 1)] = -2.0 * r.coeff(r.mode_number(k)).imag();
  return b;
}

SpectralField cosine_mode(int m, int K, int k) {
  SpectralField w(m, K * m);
  w.set(k * m, 0.5);
  return w;
}

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

}  // namespace

double bifurcation_speed(int m) { return spectral::sigma(m); }

int default_modes(int m) { return 64 / m; }

SpectralField to_field(int m, std::span<const double> a) {
  SpectralField u(m, static_cast<int>(a.size()) * m);
  for (std::size_t k = 0; k < a.size(); ++k) u.set(static_cast<long long>(k + 1) * m, 0.5 * a[k]);
  return u;
}

std::vector<double> cosine_coefficients(const SpectralField& u) {
  std::vector<double> a(static_cast<std::size_t>(u.modes()));
  for (int k = 1; k <= u.modes(); ++k) a[static_cast<std::size_t>(k - 1)] = 2.0 * u.coeff(u.mode_number(k)).real();
  return a;
}

SpectralField residual_field(const SpectralField& u, double v) {
  SpectralField r = -1.0 * spectral::d_alpha_S(u);
  r += v * spectral::d_alpha(u);
  r += spectral::nonlinearity(u);
  return r;
}

std::vector<double> residual(const SpectralField& u, double v) { return sine_coefficients(residual_field(u, v)); }

std::vector<double> jacobian_apply(const SpectralField& u, double v, const SpectralField& w) {
  using spectral::apply_S, spectral::d_alpha, spectral::d_alpha_S, spectral::product;
  const SpectralField du = d_alpha(u), Su = apply_S(u), dSu = d_alpha_S(u);
  const SpectralField dw = d_alpha(w), Sw = apply_S(w), dSw = d_alpha_S(w);
  SpectralField r = -1.0 * dSw;
  r += v * dw;
  r += 2.0 * product(dw, Su);
  r += 2.0 * product(du, Sw);
  r -= product(w, dSu);
  r -= product(u, dSw);
  return sine_coefficients(r);
}

Eigen::MatrixXd jacobian_matrix(const SpectralField& u, double v) {
  const int K = u.modes();
  Eigen::MatrixXd J(K, K);
  for (int k = 1; k <= K; ++k) {
    const auto col = jacobian_apply(u, v, cosine_mode(u.m(), K, k));
    for (int i = 0; i < K; ++i) J(i, k - 1) = col[static_cast<std::size_t>(i)];
  }
  return J;
}

WavePoint linear_guess(int m, int K, double xi) {
  WavePoint p;
  p.m = m;
  p.xi = xi;
  p.v = bifurcation_speed(m);
  p.cosine_coeffs.assign(static_cast<std::size_t>(K), 0.0);
  p.cosine_coeffs[0] = xi;
  return p;
}

WavePoint newton_solve(int m, double xi, const WavePoint& guess, const NewtonOptions& opts) {
  const int K = guess.K();
  if (K < 1) throw std::invalid_argument("newton_solve: empty guess");
  if (xi == 0.0) {
    WavePoint p = linear_guess(m, K, 0.0);
    p.decay_c = std::numeric_limits<double>::quiet_NaN();
    return p;
  }
  std::vector<double> a = guess.cosine_coeffs;
  a[0] = xi;
  double v = guess.v;

  auto eval = [&](const std::vector<double>& coeffs, double speed) { return residual(to_field(m, coeffs), speed); };
  std::vector<double> R = eval(a, v);
  double norm = l2(R);
  int it = 0;
  for (; norm > opts.tol; ++it) {
    if (it >= opts.max_iter) {
      char msg[128];
      std::snprintf(msg, sizeof msg, "Newton did not converge at xi = %.6g (residual %.3g)", xi, norm);
      throw NewtonFailure(msg);
    }
    const SpectralField u = to_field(m, a);
    // Unknowns a_2..a_K, then v.
    Eigen::MatrixXd J(K, K);
    for (int k = 2; k <= K; ++k) {
      const auto col = jacobian_apply(u, v, cosine_mode(m, K, k));
      for (int i = 0; i < K; ++i) J(i, k - 2) = col[static_cast<std::size_t>(i)];
    }
    for (int i = 0; i < K; ++i) J(i, K - 1) = -static_cast<double>((i + 1) * m) * a[static_cast<std::size_t>(i)];
    Eigen::VectorXd rhs(K);
    for (int i = 0; i < K; ++i) rhs(i) = -R[static_cast<std::size_t>(i)];
    const Eigen::VectorXd delta = J.colPivHouseholderQr().solve(rhs);
    if (!delta.allFinite()) throw NewtonFailure("singular Newton system");

    double step = 1.0;
    bool accepted = false;
    for (int halvings = 0; halvings < 30; ++halvings, step *= 0.5) {
      std::vector<double> trial = a;
      for (int k = 2; k <= K; ++k) trial[static_cast<std::size_t>(k - 1)] += step * delta(k - 2);
      const double trial_v = v + step * delta(K - 1);
      auto trial_R = eval(trial, trial_v);
      const double trial_norm = l2(trial_R);
      if (trial_norm < norm) {
        a = std::move(trial);
        v = trial_v;
        R = std::move(trial_R);
        norm = trial_norm;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      char msg[128];
      std::snprintf(msg, sizeof msg, "Newton stalled at xi = %.6g (residual %.3g)", xi, norm);
      throw NewtonFailure(msg);
    }
  }

  WavePoint p;
  p.m = m;
  p.xi = xi;
  p.v = v;
  p.cosine_coeffs = std::move(a);
  p.residual_norm = norm;
  p.iterations = it;
  try {
    p.decay_c = decay_rate(p);
  } catch (const std::domain_error&) {
    p.decay_c = std::numeric_limits<double>::quiet_NaN();
  }
  return p;
}

WaveBranch continue_branch(int m, double xi_max, int steps, int K, const NewtonOptions& opts) {
  spectral::require_admissible(m);
  if (!(xi_max > 0.0) || steps < 1) throw std::invalid_argument("continue_branch: need xi_max > 0 and steps >= 1");
  WaveBranch b;
  b.m = m;
  b.K = K > 0 ? K : default_modes(m);
  b.newton = opts;
  for (int i = 1; i <= steps; ++i) {
    const double xi = xi_max * i / steps;
    WavePoint guess;
    const auto& pts = b.points;
    if (pts.size() >= 2) {
      // Secant predictor on the uniform xi grid.
      guess = pts.back();
      const auto& prev = pts[pts.size() - 2];
      for (std::size_t k = 0; k < guess.cosine_coeffs.size(); ++k)
        guess.cosine_coeffs[k] = 2 * guess.cosine_coeffs[k] - prev.cosine_coeffs[k];
      guess.v = 2 * guess.v - prev.v;
    } else if (pts.size() == 1) {
      guess = pts.back();
    } else {
      guess = linear_guess(m, b.K, xi);
    }
    try {
      b.points.push_back(newton_solve(m, xi, guess, opts));
    } catch (const NewtonFailure&) {
      b.terminated = true;
      b.failure_xi = xi;
      break;
    }
  }
  return b;
}

double decay_rate(const WavePoint& p) {
  std::vector<double> x, y;
  for (int k = 1; k <= p.K(); ++k) {
    const double a = std::fabs(p.cosine_coeffs[static_cast<std::size_t>(k - 1)]);
    if (!(a > 1e-14)) break;
    x.push_back(static_cast<double>(k * p.m));
    y.push_back(-std::log(a));
  }
  if (x.size() < 4) throw std::domain_error("decay_rate: fewer than 4 resolved Fourier modes");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void write_branch_csv(const WaveBranch& b, const std::filesystem::path& path) {
  std::string out = "xi,v,residual,decay_c";
  for (int k = 1; k <= b.K; ++k) out += ",a_" + std::to_string(k);
  out += '\n';
  char buf[40];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const auto& p : b.points) {
    out += num(p.xi) + ',' + num(p.v) + ',' + num(p.residual_norm) + ',' + num(p.decay_c);
    for (double a : p.cosine_coeffs) out += ',' + num(a);
    out += '\n';
  }
  write_atomic(path, out);
}

void save_branch_json(const WaveBranch& b, const std::filesystem::path& path) {
  nlohmann::json j;
  j["m"] = b.m;
  j["K"] = b.K;
  j["tol"] = b.newton.tol;
  j["max_iter"] = b.newton.max_iter;
  j["terminated"] = b.terminated;
  j["failure_xi"] = b.failure_xi;
  j["points"] = nlohmann::json::array();
  for (const auto& p : b.points) {
    j["points"].push_back({{"xi", p.xi},
                           {"v", p.v},
                           {"residual_norm", p.residual_norm},
                           {"iterations", p.iterations},
                           {"decay_c", std::isfinite(p.decay_c) ? nlohmann::json(p.decay_c) : nlohmann::json()},
                           {"a", p.cosine_coeffs}});
  }
  write_atomic(path, j.dump(1) + "\n");
}

WaveBranch load_branch_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const auto j = nlohmann::json::parse(in);
  WaveBranch b;
  b.m = j.at("m");
  b.K = j.at("K");
  b.newton.tol = j.at("tol");
  b.newton.max_iter = j.at("max_iter");
  b.terminated = j.at("terminated");
  b.failure_xi = j.at("failure_xi");
  for (const auto& e : j.at("points")) {
    WavePoint p;
    p.m = b.m;
    p.xi = e.at("xi");
    p.v = e.at("v");
    p.residual_norm = e.at("residual_norm");
    p.iterations = e.at("iterations");
    p.decay_c = e.at("decay_c").is_null() ? std::numeric_limits<double>::quiet_NaN() : e.at("decay_c").get<double>();
    p.cosine_coeffs = e.at("a").get<std::vector<double>>();
    b.points.push_back(std::move(p));
  }
  return b;
}

}  // namespace sqg::waves
