#include "sqg/cli/cli.hpp"

#include <openssl/evp.h>
#include <omp.h>

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sqg/common/errors.hpp"
#include "sqg/multilinear/chain.hpp"
#include "sqg/resonance/resonance.hpp"
#include "sqg/spectral/multiplier.hpp"
#include "sqg/waves/waves.hpp"

#ifndef SQG_VERSION
#define SQG_VERSION "0.0.0"
#endif

namespace sqg::cli {

using nlohmann::json;
namespace fs = std::filesystem;

const char* version() { return SQG_VERSION; }

void write_atomic(const fs::path& path, std::string_view body) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string rational(const spectral::Rational& q) { return q.get_num().get_str() + "/" + q.get_den().get_str(); }

// ---- config schema --------------------------------------------------------

enum class FieldType { integer, unsigned_integer, number, boolean, string, number_array };

struct Field {
  const char* name;
  FieldType type;
  json fallback;
};

std::vector<Field> schema(ConfigKind kind) {
  const evolve::SimConfig d;
  std::vector<Field> f = {
      {"m", FieldType::integer, d.m},
      {"n_max", FieldType::integer, d.n_max},
      {"s", FieldType::number, d.s},
      {"dt", FieldType::number, d.dt},
      {"t_end", FieldType::number, d.t_end},
      {"epsilon", FieldType::number, d.epsilon},
      {"seed", FieldType::unsigned_integer, d.seed},
      {"initial_profile", FieldType::string, evolve::to_string(d.initial_profile)},
      {"diagnostics_stride", FieldType::integer, d.diagnostics_stride},
      {"linear_only", FieldType::boolean, d.linear_only},
      {"corrected_diagnostics", FieldType::boolean, d.corrected_diagnostics},
      {"stop_growth", FieldType::number, d.stop_growth},
  };
  if (kind == ConfigKind::normalform) {
    f.push_back({"eps_list", FieldType::number_array, json::array({0.1, 0.05, 0.025})});
    f.push_back({"cache_dir", FieldType::string, ""});
  }
  return f;
}

bool has_type(const json& v, FieldType t) {
  switch (t) {
    case FieldType::integer: return v.is_number_integer();
    case FieldType::unsigned_integer: return v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0);
    case FieldType::number: return v.is_number();
    case FieldType::boolean: return v.is_boolean();
    case FieldType::string: return v.is_string();
    case FieldType::number_array:
      if (!v.is_array()) return false;
      for (const auto& e : v)
        if (!e.is_number()) return false;
      return true;
  }
  return false;
}

const char* type_name(FieldType t) {
  switch (t) {
    case FieldType::integer: return "an integer";
    case FieldType::unsigned_integer: return "a non-negative integer";
    case FieldType::number: return "a number";
    case FieldType::boolean: return "a boolean";
    case FieldType::string: return "a string";
    case FieldType::number_array: return "an array of numbers";
  }
  return "?";
}

}  // namespace

json validate_config(const json& raw, ConfigKind kind) {
  if (!raw.is_object()) throw ConfigError("/: config must be a JSON object");
  std::vector<std::string> errors;
  json out = json::object();
  const auto fields = schema(kind);
  for (const auto& [key, value] : raw.items()) {
    bool known = false;
    for (const auto& f : fields) known = known || key == f.name;
    if (!known) errors.push_back("/" + key + ": unknown field");
  }
  for (const auto& f : fields) {
    if (!raw.contains(f.name)) {
      out[f.name] = f.fallback;
      continue;
    }
    const json& v = raw.at(f.name);
    if (!has_type(v, f.type)) {
      errors.push_back(std::string("/") + f.name + ": must be " + type_name(f.type));
      out[f.name] = f.fallback;
    } else {
      out[f.name] = v;
    }
  }

  auto fail = [&](const char* field, const std::string& why) { errors.push_back(std::string("/") + field + ": " + why); };
  const int m = out["m"].get<int>();
  const int n_max = out["n_max"].get<int>();
  const double dt = out["dt"].get<double>();
  if (m < 3) fail("m", "must be >= 3 (the m-fold symmetry class requires m >= 3), got " + std::to_string(m));
  if (n_max < std::max(m, 1) || (m > 0 && n_max % m != 0))
    fail("n_max", "must be a positive multiple of m = " + std::to_string(m) + ", got " + std::to_string(n_max));
  if (!(out["s"].get<double>() >= 0)) fail("s", "must be >= 0");
  if (!(dt > 0)) fail("dt", "must be > 0");
  if (!(out["t_end"].get<double>() >= dt)) fail("t_end", "must be >= dt");
  if (!(out["epsilon"].get<double>() > 0)) fail("epsilon", "must be > 0");
  if (out["diagnostics_stride"].get<int>() < 1) fail("diagnostics_stride", "must be >= 1");
  if (!(out["stop_growth"].get<double>() >= 0)) fail("stop_growth", "must be >= 0");
  const auto profile = out["initial_profile"].get<std::string>();
  if (profile != "single_mode" && profile != "random_band")
    fail("initial_profile", "must be \"single_mode\" or \"random_band\"");
  if (kind == ConfigKind::normalform) {
    const auto& eps = out["eps_list"];
    if (eps.size() < 2) fail("eps_list", "needs at least two amplitudes");
    for (std::size_t i = 0; i < eps.size(); ++i) {
      if (!(eps[i].get<double>() > 0)) fail("eps_list", "entries must be > 0");
      if (i > 0 && !(eps[i].get<double>() < eps[i - 1].get<double>())) fail("eps_list", "must be strictly decreasing");
    }
  }

  if (!errors.empty()) {
    std::string msg;
    for (const auto& e : errors) msg += (msg.empty() ? "" : "\n") + e;
    throw ConfigError(msg);
  }
  return out;
}

evolve::SimConfig to_sim_config(const json& j) {
  evolve::SimConfig c;
  c.m = j.at("m");
  c.n_max = j.at("n_max");
  c.s = j.at("s");
  c.dt = j.at("dt");
  c.t_end = j.at("t_end");
  c.epsilon = j.at("epsilon");
  c.seed = j.at("seed");
  c.initial_profile = evolve::profile_from_string(j.at("initial_profile"));
  c.diagnostics_stride = j.at("diagnostics_stride");
  c.linear_only = j.at("linear_only");
  c.corrected_diagnostics = j.at("corrected_diagnostics");
  c.stop_growth = j.at("stop_growth");
  return c;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_file(path)); }

fs::path emit_manifest(const RunManifest& run, std::optional<fs::path> path) {
  if (!path) {
    if (run.outputs.empty()) throw std::invalid_argument("manifest needs an output or an explicit path");
    path = run.outputs.front().string() + ".manifest.json";
  }
  json j;
  j["subcommand"] = run.subcommand;
  j["config_hash"] = run.config_hash;
  j["version"] = run.version;
  j["wall_time_s"] = run.wall_time_s;
  j["seed"] = run.seed ? json(*run.seed) : json();
  j["config"] = run.config;
  j["config_path"] = run.config_path ? json(run.config_path->string()) : json();
  j["outputs"] = json::array();
  for (const auto& o : run.outputs) j["outputs"].push_back({{"path", o.string()}, {"sha256", sha256_file(o)}});
  write_atomic(*path, j.dump(2) + "\n");
  return *path;
}

bool manifest_matches_config(const fs::path& manifest, const fs::path& config_path) {
  const auto j = json::parse(read_file(manifest));
  return j.at("config_hash").get<std::string>() == sha256_file(config_path);
}

// ---- subcommands ----------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

json load_config(const fs::path& path, ConfigKind kind, std::string& bytes) {
  bytes = read_file(path);
  json raw;
  try {
    raw = json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("/: invalid JSON: ") + e.what());
  }
  return validate_config(raw, kind);
}

struct DispersionArgs {
  int n_max = 50;
  std::string out;
};

void cmd_dispersion(const DispersionArgs& a, std::ostream& log) {
  const auto t0 = Clock::now();
  if (a.n_max < 3) throw ConfigError("--n-max: must be >= 3");
  std::string csv = "n,lambda,sigma,lambda_double,sigma_double\n";
  for (int n = 3; n <= a.n_max; ++n) {
    csv += std::to_string(n) + ',' + rational(spectral::lambda_exact(n)) + ',' + rational(spectral::sigma_exact(n)) +
           ',' + num(spectral::lambda(n)) + ',' + num(spectral::sigma(n)) + '\n';
  }
  write_atomic(a.out, csv);
  const json cfg = {{"n_max", a.n_max}};
  emit_manifest({"dispersion", sha256_hex(cfg.dump()), version(), seconds_since(t0), {a.out}, std::nullopt, cfg, {}});
  log << "wrote " << a.out << " (" << a.n_max - 2 << " modes)\n";
}

struct ResonanceArgs {
  int p = 4;
  int bound = 40;
  std::string out;
};

void cmd_resonance(const ResonanceArgs& a, std::ostream& log) {
  const auto t0 = Clock::now();
  if (a.p < 3 || a.p > 6) throw ConfigError("--p: must be in {3, 4, 5, 6}");
  if (a.bound < 9) throw ConfigError("--bound: must be >= 9");
  const auto report = a.p == 6 ? resonance::search_resonances_p6(a.bound) : resonance::min_denominator(a.p, a.bound);
  resonance::certify(report, a.out);
  const json cfg = {{"p", a.p}, {"bound", a.bound}};
  emit_manifest({"resonance", sha256_hex(cfg.dump()), version(), seconds_since(t0), {a.out}, std::nullopt, cfg, {}});
  log << "p = " << a.p << ", bound = " << a.bound << ": min |sum lambda| = " << rational(report.min_value) << " at (";
  for (std::size_t j = 0; j < report.argmin.size(); ++j) log << (j ? ", " : "") << report.argmin[j];
  log << "), exact zeros off the degenerate set: " << report.exact_zero_tuples.size() << "\n";
}

struct EvolveArgs {
  std::string config, out, restart_in, restart_out;
  std::optional<std::uint64_t> seed;
};

void cmd_evolve(const EvolveArgs& a, std::ostream& log) {
  const auto t0 = Clock::now();
  std::string bytes;
  json cfg = load_config(a.config, ConfigKind::evolve, bytes);
  if (a.seed) cfg["seed"] = *a.seed;
  const auto sim = to_sim_config(cfg);
  evolve::RunOptions opts;
  if (!a.restart_in.empty()) {
    const auto r = evolve::load_restart(a.restart_in);
    opts.initial = r.state;
    opts.t0 = r.t;
    opts.mean0 = r.mean;
  }
  const auto traj = evolve::run(sim, opts);
  evolve::write_csv(traj, a.out);
  std::vector<fs::path> outputs{a.out};
  if (!a.restart_out.empty()) {
    evolve::save_restart(traj.states.back(), traj.times.back(), traj.final_mean, a.restart_out);
    outputs.emplace_back(a.restart_out);
  }
  emit_manifest({"evolve", sha256_hex(bytes), version(), seconds_since(t0), outputs, sim.seed, cfg, fs::path(a.config)});
  log << "integrated to t = " << traj.times.back() << "; " << traj.diagnostics.size() << " records in " << a.out << "\n";
}

struct NormalFormArgs {
  std::string config, out;
  std::optional<std::uint64_t> seed;
};

void cmd_normalform(const NormalFormArgs& a, std::ostream& log) {
  const auto t0 = Clock::now();
  std::string bytes;
  json cfg = load_config(a.config, ConfigKind::normalform, bytes);
  if (a.seed) cfg["seed"] = *a.seed;
  const auto sim = to_sim_config(cfg);
  const auto eps = cfg["eps_list"].get<std::vector<double>>();
  const auto cache = cfg["cache_dir"].get<std::string>();
  const auto chain = multilinear::build_chain(sim.s, sim.m, sim.n_max,
                                              cache.empty() ? std::nullopt : std::optional<fs::path>(cache));
  const auto report = evolve::lifespan_experiment(eps, sim, &chain);

  fs::path out = a.out;
  if (out.empty()) {
    out = fs::path(a.config);
    out.replace_extension(".normalform.csv");
  }
  fs::path slopes_path = out;
  slopes_path.replace_extension(".slopes.json");

  std::string csv = "epsilon,t,Es,Es_c3,Es_c34,Es_c345,hs_norm,dEs,dEs_c3,dEs_c34,dEs_c345\n";
  for (std::size_t i = 0; i < report.runs.size(); ++i) {
    for (const auto& d : report.runs[i].diagnostics) {
      csv += num(report.rows[i].epsilon);
      for (double v : {d.t, d.Es, d.Es_c3, d.Es_c34, d.Es_c345, d.hs_norm, d.dEs, d.dEs_c3, d.dEs_c34, d.dEs_c345})
        csv += ',' + num(v);
      csv += '\n';
    }
  }
  write_atomic(out, csv);

  json slopes;
  slopes["slope_Es"] = report.slope_Es;
  slopes["slope_c3"] = report.slope_c3;
  slopes["slope_c34"] = report.slope_c34;
  slopes["slope_c345"] = report.slope_c345;
  slopes["rows"] = json::array();
  for (const auto& r : report.rows) {
    slopes["rows"].push_back({{"epsilon", r.epsilon},
                              {"doubling_time", r.doubling_time},
                              {"doubled", r.doubled},
                              {"rate_Es", r.rate_Es},
                              {"rate_c3", r.rate_c3},
                              {"rate_c34", r.rate_c34},
                              {"rate_c345", r.rate_c345}});
  }
  write_atomic(slopes_path, slopes.dump(2) + "\n");
  emit_manifest({"normalform", sha256_hex(bytes), version(), seconds_since(t0), {out, slopes_path}, sim.seed, cfg,
                 fs::path(a.config)});
  log << "slopes of |d/dt|: E_s " << report.slope_Es << ", -M3' " << report.slope_c3 << ", -M3'-M4' "
      << report.slope_c34 << ", full " << report.slope_c345 << "\n";
}

struct WavesArgs {
  int m = 3;
  double xi_max = 0.2;
  int steps = 40;
  int K = 0;
  std::string out, json_out;
};

void cmd_waves(const WavesArgs& a, std::ostream& log) {
  const auto t0 = Clock::now();
  if (a.m < 3) throw ConfigError("--m: must be >= 3");
  if (!(a.xi_max > 0)) throw ConfigError("--xi-max: must be > 0");
  if (a.steps < 1) throw ConfigError("--steps: must be >= 1");
  if (a.K < 0) throw ConfigError("--K: must be >= 0");
  const auto branch = waves::continue_branch(a.m, a.xi_max, a.steps, a.K);
  waves::write_branch_csv(branch, a.out);
  fs::path js = a.json_out;
  if (js.empty()) {
    js = a.out;
    js.replace_extension(".json");
  }
  waves::save_branch_json(branch, js);
  const json cfg = {{"m", a.m}, {"xi_max", a.xi_max}, {"steps", a.steps}, {"K", branch.K}};
  emit_manifest({"waves", sha256_hex(cfg.dump()), version(), seconds_since(t0), {a.out, js}, std::nullopt, cfg, {}});
  log << branch.points.size() << " points, v(" << (branch.points.empty() ? 0.0 : branch.points.back().xi)
      << ") = " << (branch.points.empty() ? 0.0 : branch.points.back().v);
  if (branch.terminated) log << "; Newton failed at xi = " << branch.failure_xi;
  log << "\n";
}

void apply_thread_env() {
  if (const char* t = std::getenv("SQG_THREADS")) {
    const int n = std::atoi(t);
    if (n > 0) omp_set_num_threads(n);
  }
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  apply_thread_env();
  CLI::App app{"Numerical laboratory for the 1D radially homogeneous SQG model", "sqg1d"};
  app.set_version_flag("--version", std::string("sqg1d ") + version());
  app.require_subcommand(1);

  DispersionArgs da;
  auto* disp = app.add_subcommand("dispersion", "Table of lambda(n), sigma(n), exact and floating");
  disp->add_option("--n-max", da.n_max, "Largest mode")->capture_default_str();
  disp->add_option("--out", da.out, "CSV output")->required();

  ResonanceArgs ra;
  auto* res = app.add_subcommand("resonance", "Exact small-denominator search with JSON certificate");
  res->add_option("--p", ra.p, "Arity (3..6)")->capture_default_str();
  res->add_option("--bound", ra.bound, "Search radius |n_j| <= bound")->capture_default_str();
  res->add_option("--out", ra.out, "Certificate JSON")->required();

  EvolveArgs ea;
  auto* evo = app.add_subcommand("evolve", "Integrate the truncated model and record diagnostics");
  evo->add_option("--config", ea.config, "Config JSON")->required();
  evo->add_option("--out", ea.out, "Trajectory CSV")->required();
  evo->add_option("--seed", ea.seed, "Override the config seed");
  evo->add_option("--restart-in", ea.restart_in, "Start from a restart file");
  evo->add_option("--restart-out", ea.restart_out, "Write the final state as a restart file");

  NormalFormArgs na;
  auto* nf = app.add_subcommand("normalform", "Corrected-energy derivative scaling over an amplitude sweep");
  nf->add_option("--config", na.config, "Config JSON (simulation fields plus eps_list, cache_dir)")->required();
  nf->add_option("--out", na.out, "Time-series CSV (default: <config>.normalform.csv)");
  nf->add_option("--seed", na.seed, "Override the config seed");

  WavesArgs wa;
  auto* wav = app.add_subcommand("waves", "Travelling-wave branch by Newton continuation");
  wav->add_option("--m", wa.m, "Symmetry order")->capture_default_str();
  wav->add_option("--xi-max", wa.xi_max, "Largest amplitude")->capture_default_str();
  wav->add_option("--steps", wa.steps, "Continuation steps")->capture_default_str();
  wav->add_option("--K", wa.K, "Cosine modes (default 64/m)");
  wav->add_option("--out", wa.out, "Branch CSV")->required();
  wav->add_option("--json", wa.json_out, "Branch JSON (default: CSV path with .json)");

  std::string vconfig, vkind = "evolve";
  auto* val = app.add_subcommand("validate", "Check a config and print it with defaults filled in");
  val->add_option("--config", vconfig, "Config JSON")->required();
  val->add_option("--kind", vkind, "evolve or normalform")->check(CLI::IsMember({"evolve", "normalform"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*disp) cmd_dispersion(da, out);
    if (*res) cmd_resonance(ra, out);
    if (*evo) cmd_evolve(ea, out);
    if (*nf) cmd_normalform(na, out);
    if (*wav) cmd_waves(wa, out);
    if (*val) {
      std::string bytes;
      out << load_config(vconfig, vkind == "normalform" ? ConfigKind::normalform : ConfigKind::evolve, bytes).dump(2)
          << "\n";
    }
  } catch (const ConfigError& e) {
    err << "config error:\n" << e.what() << "\n";
    return 2;
  } catch (const InstabilityError& e) {
    err << "instability: " << e.what() << " (last valid time " << e.last_valid_time() << ")\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace sqg::cli
