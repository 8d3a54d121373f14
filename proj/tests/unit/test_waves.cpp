#include <doctest.h>

#include <Eigen/SVD>
#include <cmath>
#include <filesystem>
#include <random>

#include "sqg/evolve/evolve.hpp"
#include "sqg/spectral/multiplier.hpp"
#include "sqg/waves/waves.hpp"

using namespace sqg;
using namespace sqg::waves;

namespace {

double l2(const std::vector<double>& b) {
  double s = 0.0;
  for (double x : b) s += x * x;
  return std::sqrt(s);
}

// u(a - v t) in Fourier: coefficient at n gains e^{-i n v t}.
SpectralField translate(const SpectralField& u, double shift) {
  SpectralField out = u;
  for (int k = 1; k <= u.modes(); ++k) {
    const int n = u.mode_number(k);
    out.set(n, u.coeff(n) * std::polar(1.0, -n * shift));
  }
  return out;
}

}  // namespace

TEST_CASE("bifurcation speeds are lambda(m)/m") {
  CHECK(spectral::lambda_exact(3) / 3 == spectral::Rational(8, 15));
  CHECK(spectral::lambda_exact(4) / 4 == spectral::Rational(5, 16));
  CHECK(spectral::lambda_exact(5) / 5 == spectral::Rational(8, 35));
  CHECK(bifurcation_speed(3) == 8.0 / 15.0);
  CHECK(bifurcation_speed(4) == 5.0 / 16.0);
  CHECK(bifurcation_speed(5) == 8.0 / 35.0);
}

TEST_CASE("residual: trivial solution, quadratic defect of the linear mode, parity") {
  const int m = 3, K = 21;
  const std::vector<double> zero(K, 0.0);
  for (double v : {0.0, 0.5, 2.0}) CHECK(l2(residual(to_field(m, zero), v)) == 0.0);

  std::vector<double> norms;
  for (double xi : {1e-2, 5e-3, 2.5e-3}) {
    auto a = zero;
    a[0] = xi;
    norms.push_back(l2(residual(to_field(m, a), bifurcation_speed(m))));
  }
  CHECK(norms[0] / norms[1] == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(norms[1] / norms[2] == doctest::Approx(4.0).epsilon(1e-6));

  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  std::vector<double> a(K);
  for (int k = 0; k < K; ++k) a[static_cast<std::size_t>(k)] = g(rng) * std::exp(-0.3 * k);
  const auto r = residual_field(to_field(m, a), 0.4);
  double cos_part = 0.0, scale = 0.0;
  for (const auto& c : r.packed()) {
    cos_part = std::max(cos_part, std::fabs(c.real()));
    scale = std::max(scale, std::abs(c));
  }
  CHECK(cos_part <= 1e-15 * scale);
}

TEST_CASE("jacobian: finite differences and linearity") {
  const int m = 4, K = 16;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  std::vector<double> a(K), b(K), c(K);
  for (int k = 0; k < K; ++k) {
    const double d = std::exp(-0.4 * k);
    a[static_cast<std::size_t>(k)] = 0.2 * g(rng) * d;
    b[static_cast<std::size_t>(k)] = g(rng) * d;
    c[static_cast<std::size_t>(k)] = g(rng) * d;
  }
  const auto u = to_field(m, a), w = to_field(m, b), z = to_field(m, c);
  const double v = 0.3, h = 1e-7;
  const auto Jw = jacobian_apply(u, v, w);
  const auto r0 = residual(u, v), r1 = residual(u + h * w, v);
  double err = 0.0;
  for (int i = 0; i < K; ++i) err = std::max(err, std::fabs((r1[i] - r0[i]) / h - Jw[i]));
  CHECK(err <= 1e-6 * l2(Jw));

  const auto lin = jacobian_apply(u, v, w + 2.0 * z), Jz = jacobian_apply(u, v, z);
  for (int i = 0; i < K; ++i) CHECK(std::fabs(lin[i] - Jw[i] - 2 * Jz[i]) <= 1e-13 * l2(lin));
}

TEST_CASE("kernel at the bifurcation point is spanned by cos(m a)") {
  for (int m : {3, 4, 5}) {
    const int K = default_modes(m);
    const auto J = jacobian_matrix(SpectralField(m, K * m), bifurcation_speed(m));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeFullV);
    const auto sv = svd.singularValues();
    CHECK(sv(K - 1) < 1e-14);
    CHECK(sv(K - 2) > 1e-3);
    CHECK(std::fabs(std::fabs(svd.matrixV()(0, K - 1)) - 1.0) < 1e-12);
  }
}

TEST_CASE("Newton: trivial branch and small amplitude") {
  const auto trivial = newton_solve(3, 0.0, linear_guess(3, 21, 0.0));
  CHECK(trivial.v == bifurcation_speed(3));
  for (double a : trivial.cosine_coeffs) CHECK(a == 0.0);

  const double xi = 1e-3;
  const auto p = newton_solve(3, xi, linear_guess(3, 21, xi));
  CHECK(p.residual_norm <= 1e-11);
  CHECK(p.cosine_coeffs[0] == xi);
  CHECK(std::fabs(p.v - 8.0 / 15.0) <= 1.0 * xi * xi);
  CHECK(p.decay_c > 0.0);

  // xi -> -xi is the half-period translate: a_k -> (-1)^k a_k.
  const auto q = newton_solve(3, -0.05, linear_guess(3, 21, -0.05));
  const auto r = newton_solve(3, 0.05, linear_guess(3, 21, 0.05));
  CHECK(q.v == doctest::Approx(r.v).epsilon(1e-12));
  for (int k = 1; k <= 21; ++k) {
    const double sign = k % 2 ? -1.0 : 1.0;
    CHECK(std::fabs(q.cosine_coeffs[k - 1] - sign * r.cosine_coeffs[k - 1]) <= 1e-13);
  }
}

TEST_CASE("continuation branch") {
  const auto b = continue_branch(3, 0.2, 40);
  CHECK_FALSE(b.terminated);
  REQUIRE(b.points.size() == 40);
  for (std::size_t i = 0; i < b.points.size(); ++i) {
    const auto& p = b.points[i];
    CHECK(p.residual_norm <= 1e-11);
    CHECK(p.cosine_coeffs[0] == p.xi);
    CHECK(p.decay_c > 0.0);
    if (i > 0) CHECK(std::fabs(p.v - b.points[i - 1].v) < 1e-2);
  }
  // |v - v_m| = O(xi^2) over the small-amplitude end.
  std::vector<double> x, y;
  for (int i = 0; i < 8; ++i) {
    x.push_back(b.points[i].xi);
    y.push_back(std::fabs(b.points[i].v - bifurcation_speed(3)));
  }
  CHECK(evolve::loglog_slope(x, y) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("doubling K leaves the speed unchanged at small amplitude") {
  for (int m : {3, 4, 5}) {
    const int K = default_modes(m);
    const auto p = newton_solve(m, 0.05, linear_guess(m, K, 0.05));
    const auto q = newton_solve(m, 0.05, linear_guess(m, 2 * K, 0.05));
    CHECK(std::fabs(p.v - q.v) < 1e-10);
  }
}

TEST_CASE("computed wave translates rigidly under the time-dependent solver") {
  const int m = 3, K = default_modes(m);
  const auto p = newton_solve(m, 0.1, linear_guess(m, K, 0.1));
  const auto u0 = to_field(m, p.cosine_coeffs);
  const double T = 2.0;
  std::vector<double> err;
  for (double dt : {0.1, 0.05}) {
    auto u = u0;
    const int steps = static_cast<int>(std::lround(T / dt));
    for (int k = 0; k < steps; ++k) u = evolve::step(u, dt).state;
    const auto want = translate(u0, p.v * T);
    double e = 0.0;
    for (int k = 0; k < K; ++k) e = std::max(e, std::abs(u.packed()[k] - want.packed()[k]));
    err.push_back(e);
  }
  MESSAGE("translation errors " << err[0] << ", " << err[1]);
  CHECK(err[0] / err[1] > 12.0);
}

TEST_CASE("decay rate") {
  WavePoint p;
  p.m = 3;
  for (int k = 1; k <= 8; ++k) p.cosine_coeffs.push_back(std::exp(-3.0 * k));
  CHECK(std::fabs(decay_rate(p) - 1.0) < 1e-10);
  p.cosine_coeffs = {1.0, 1e-3, 1e-20, 1e-6};
  CHECK_THROWS_AS(decay_rate(p), std::domain_error);
}

TEST_CASE("branch CSV and JSON") {
  const auto b = continue_branch(4, 0.1, 5);
  const auto dir = std::filesystem::temp_directory_path();
  save_branch_json(b, dir / "sqg_branch.json");
  const auto back = load_branch_json(dir / "sqg_branch.json");
  REQUIRE(back.points.size() == b.points.size());
  for (std::size_t i = 0; i < b.points.size(); ++i) {
    CHECK(back.points[i].v == b.points[i].v);
    CHECK(back.points[i].cosine_coeffs == b.points[i].cosine_coeffs);
  }
  write_branch_csv(b, dir / "sqg_branch.csv");
  CHECK(std::filesystem::file_size(dir / "sqg_branch.csv") > 0);
  std::filesystem::remove(dir / "sqg_branch.json");
  std::filesystem::remove(dir / "sqg_branch.csv");
}
