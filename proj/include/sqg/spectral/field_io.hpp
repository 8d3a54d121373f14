#pragma once

#include <filesystem>
#include <json.hpp>

#include "sqg/spectral/field.hpp"

namespace sqg::spectral {

// {"m": m, "n_max": n_max, "modes": [[n, re, im], ...]}, n > 0 only.
nlohmann::json to_json(const SpectralField& f);
SpectralField field_from_json(const nlohmann::json& j);

void save_field(const SpectralField& f, const std::filesystem::path& path);
SpectralField load_field(const std::filesystem::path& path);

}  // namespace sqg::spectral
