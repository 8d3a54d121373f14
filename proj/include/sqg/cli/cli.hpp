#pragma once

#include <filesystem>
#include <iosfwd>
#include <json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sqg/evolve/evolve.hpp"

namespace sqg::cli {

const char* version();

// Runs one subcommand: dispersion, resonance, evolve, normalform, waves,
// validate. Returns the process exit code: 0 success, 2 usage or config
// error, 1 runtime failure.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

enum class ConfigKind { evolve, normalform };

// Fills defaults and checks ranges and types. Throws ConfigError listing
// every violation, one per line, each prefixed with its JSON field path.
nlohmann::json validate_config(const nlohmann::json& raw, ConfigKind kind);
evolve::SimConfig to_sim_config(const nlohmann::json& normalized);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

struct RunManifest {
  std::string subcommand;
  std::string config_hash;
  std::string version;
  double wall_time_s = 0.0;
  std::vector<std::filesystem::path> outputs;
  std::optional<std::uint64_t> seed;
  nlohmann::json config;  // normalized configuration
  std::optional<std::filesystem::path> config_path;
};

// Writes the manifest (with per-output SHA-256) to <first output>.manifest.json
// unless a path is given; returns the path written.
std::filesystem::path emit_manifest(const RunManifest& run, std::optional<std::filesystem::path> path = {});

// True iff the manifest's config_hash matches the bytes of config_path.
bool manifest_matches_config(const std::filesystem::path& manifest, const std::filesystem::path& config_path);

// Temp file + rename.
void write_atomic(const std::filesystem::path& path, std::string_view body);

}  // namespace sqg::cli
