#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sqg/multilinear/chain.hpp"
#include "sqg/spectral/field.hpp"

namespace sqg::evolve {

using spectral::SpectralField;

enum class InitialProfile { single_mode, random_band };

const char* to_string(InitialProfile p);
InitialProfile profile_from_string(const std::string& s);

struct SimConfig {
  int m = 3;
  int n_max = 24;
  double s = 3.0;
  double dt = 0.01;
  double t_end = 10.0;
  double epsilon = 0.1;
  std::uint64_t seed = 0;
  InitialProfile initial_profile = InitialProfile::random_band;
  int diagnostics_stride = 10;
  bool linear_only = false;
  // Evaluate E_s - M3' - ... at every diagnostic record.
  bool corrected_diagnostics = true;
  // Stop (without error) once hs_norm >= stop_growth * epsilon; 0 disables.
  double stop_growth = 0.0;
};

// Throws ConfigError naming the offending field.
void validate(const SimConfig& cfg);

// single_mode: a cos(m a) with ||.||_{H^s} = epsilon.
// random_band: modes m..n_max, amplitudes ~ <n>^{-s-1}, phases from seed,
// normalized to ||.||_{H^s} = epsilon.
SpectralField initial_data(const SimConfig& cfg);

// -d_a S f + N(f) (or only the linear part).
SpectralField rhs(const SpectralField& f, bool linear_only = false);

struct StepResult {
  SpectralField state;
  // Change of the mean over the step, from the mode-0 part of N(f). Zero up
  // to round-off for admissible data.
  double mean_increment = 0.0;
};

// One integrating-factor RK4 step: the linear flow e^{-i lambda(n) dt} is
// applied exactly, RK4 acts on the rotated nonlinearity. Negative dt steps
// backward. Throws InstabilityError on non-finite output.
StepResult step(const SpectralField& f, double dt, bool linear_only = false);

struct Diagnostics {
  double t = 0.0;
  double Es = 0.0, Es_c3 = 0.0, Es_c34 = 0.0, Es_c345 = 0.0;
  double hs_norm = 0.0;
  double mean_res = 0.0;
  double sym_res = 0.0;
  // Time derivatives of the four energies along the flow.
  double dEs = 0.0, dEs_c3 = 0.0, dEs_c34 = 0.0, dEs_c345 = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<SpectralField> states;
  std::vector<Diagnostics> diagnostics;
  // Set when the stop_growth threshold ended the run before t_end.
  bool stopped = false;
  double stop_time = 0.0;
  // Signed accumulated mean at the last step (for restarts).
  double final_mean = 0.0;
};

struct RunOptions {
  // Built from cfg when absent and corrected diagnostics are on.
  const multilinear::CorrectedEnergy* chain = nullptr;
  std::optional<SpectralField> initial;
  double t0 = 0.0;
  double mean0 = 0.0;
  bool keep_states = true;
};

// Integrates to t_end, recording state and diagnostics at t0 and every
// diagnostics_stride steps (and at the final time). Throws InstabilityError
// (with the last valid time) on non-finite data or hs_norm > 1e3 epsilon.
Trajectory run(const SimConfig& cfg, const RunOptions& opts = {});

// Diagnostics of a single state.
Diagnostics diagnose(const SimConfig& cfg, const multilinear::CorrectedEnergy* chain, const SpectralField& f,
                     double t, double mean);

// CSV with columns t,Es,Es_c3,Es_c34,Es_c345,hs_norm,mean_res,sym_res.
void write_csv(const Trajectory& traj, const std::filesystem::path& path);
// Same records plus the derivative columns dEs,dEs_c3,dEs_c34,dEs_c345.
void write_rates_csv(const Trajectory& traj, const std::filesystem::path& path);

// Restart file: the SpectralField JSON plus "t" and "mean".
void save_restart(const SpectralField& f, double t, double mean, const std::filesystem::path& path);
struct Restart {
  SpectralField state;
  double t;
  double mean;
};
Restart load_restart(const std::filesystem::path& path);

struct LifespanRow {
  double epsilon = 0.0;
  // First time hs_norm >= 2 epsilon, or t_end when never reached.
  double doubling_time = 0.0;
  bool doubled = false;
  // Time averages of |d/dt| over the run.
  double rate_Es = 0.0, rate_c3 = 0.0, rate_c34 = 0.0, rate_c345 = 0.0;
};

struct LifespanReport {
  std::vector<LifespanRow> rows;
  // Diagnostics of each run (states are not kept), in eps_list order.
  std::vector<Trajectory> runs;
  // log-log least-squares slopes of the averaged rates against epsilon.
  double slope_Es = 0.0, slope_c3 = 0.0, slope_c34 = 0.0, slope_c345 = 0.0;
};

// eps_list must be strictly decreasing. Each run uses cfg_template with
// epsilon replaced and stop_growth = 2; the independent runs execute in
// parallel.
LifespanReport lifespan_experiment(const std::vector<double>& eps_list, const SimConfig& cfg_template,
                                   const multilinear::CorrectedEnergy* chain = nullptr);

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace sqg::evolve
