#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "sqg/spectral/field.hpp"

namespace sqg::waves {

using spectral::SpectralField;

// Newton did not reach the tolerance: the continuation stops here.
class NewtonFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Even travelling wave u(a) = sum_{k=1..K} a_k cos(k m a) moving at speed v.
struct WavePoint {
  int m = 0;
  double xi = 0.0;  // a_1, pinned
  double v = 0.0;
  std::vector<double> cosine_coeffs;  // a_1..a_K
  double residual_norm = 0.0;         // l2 norm of the sine coefficients of the residual
  int iterations = 0;
  double decay_c = 0.0;  // NaN when too few modes are resolved

  int K() const { return static_cast<int>(cosine_coeffs.size()); }
};

struct NewtonOptions {
  double tol = 1e-11;
  int max_iter = 50;
};

struct WaveBranch {
  int m = 0;
  int K = 0;
  NewtonOptions newton;
  std::vector<WavePoint> points;  // ascending xi
  // Set when Newton failed before xi_max; failure_xi is the amplitude tried.
  bool terminated = false;
  double failure_xi = 0.0;
};

// lambda(m) / m.
double bifurcation_speed(int m);

SpectralField to_field(int m, std::span<const double> cosine_coeffs);
std::vector<double> cosine_coefficients(const SpectralField& u);

// -S u' + v u' + 2 u' S u - u S u' with dealiased, truncated products.
SpectralField residual_field(const SpectralField& u, double v);
// Its sine coefficients b_k (R = sum b_k sin(k m a)); the cosine part vanishes
// for even u.
std::vector<double> residual(const SpectralField& u, double v);

// Directional derivative in u along w:
// -S w' + v w' + 2 w' S u + 2 u' S w - w S u' - u S w'.
std::vector<double> jacobian_apply(const SpectralField& u, double v, const SpectralField& w);
// d/du on the cosine basis cos(k m a), k = 1..K (columns), sine rows.
Eigen::MatrixXd jacobian_matrix(const SpectralField& u, double v);

// Solves for a_2..a_K and v with a_1 = xi. Full Newton steps, halved while
// the residual grows. xi = 0 returns the trivial wave at v_m. Throws
// NewtonFailure after max_iter iterations.
WavePoint newton_solve(int m, double xi, const WavePoint& guess, const NewtonOptions& opts = {});
// Guess xi cos(m a) at speed v_m.
WavePoint linear_guess(int m, int K, double xi);

// Marches xi = xi_max/steps, 2 xi_max/steps, ..., xi_max with a secant
// predictor. Stops at the first Newton failure and returns the partial branch.
WaveBranch continue_branch(int m, double xi_max, int steps, int K = 0, const NewtonOptions& opts = {});
// Default truncation: 64 / m cosine modes.
int default_modes(int m);

// Least-squares slope c of -log|a_k| against k m over the leading run of
// coefficients above 1e-14. Throws std::domain_error with fewer than 4.
double decay_rate(const WavePoint& p);

// CSV: xi,v,residual,decay_c,a_1..a_K.
void write_branch_csv(const WaveBranch& b, const std::filesystem::path& path);
void save_branch_json(const WaveBranch& b, const std::filesystem::path& path);
WaveBranch load_branch_json(const std::filesystem::path& path);

}  // namespace sqg::waves
