#include "sqg/spectral/field_io.hpp"

#include <fstream>
#include <stdexcept>

#include "sqg/common/errors.hpp"

namespace sqg::spectral {

nlohmann::json to_json(const SpectralField& f) {
  nlohmann::json modes = nlohmann::json::array();
  for (int k = 1; k <= f.modes(); ++k) {
    const cplx z = f.packed()[static_cast<std::size_t>(k - 1)];
    modes.push_back({f.mode_number(k), z.real(), z.imag()});
  }
  return {{"m", f.m()}, {"n_max", f.n_max()}, {"modes", std::move(modes)}};
}

SpectralField field_from_json(const nlohmann::json& j) {
  SpectralField f(j.at("m").get<int>(), j.at("n_max").get<int>());
  for (const auto& entry : j.at("modes")) {
    if (!entry.is_array() || entry.size() != 3) {
      throw std::invalid_argument("field JSON: each mode must be [n, re, im]");
    }
    f.set(entry[0].get<long long>(), {entry[1].get<double>(), entry[2].get<double>()});
  }
  return f;
}

void save_field(const SpectralField& f, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << to_json(f).dump(1) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

SpectralField load_field(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return field_from_json(nlohmann::json::parse(in));
}

}  // namespace sqg::spectral
