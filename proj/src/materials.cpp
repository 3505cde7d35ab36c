#include "planarcav/materials.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "planarcav/errors.hpp"

#ifndef PLANARCAV_DEFAULT_DATA_DIR
#define PLANARCAV_DEFAULT_DATA_DIR "data"
#endif

namespace planarcav {

MaterialTable::MaterialTable(std::string name, std::vector<IndexSample> samples)
    : name_(std::move(name)), samples_(std::move(samples)) {
  if (samples_.size() < 2) {
    throw ConfigError("material '" + name_ + "' needs at least two samples");
  }
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& s = samples_[i];
    if (!std::isfinite(s.wavelength_nm) || !std::isfinite(s.n) || !std::isfinite(s.k)) {
      throw ConfigError("material '" + name_ + "' has a non-finite sample");
    }
    if (s.k < 0.0) {
      throw ConfigError("material '" + name_ + "' has negative extinction at " +
                        std::to_string(s.wavelength_nm) + " nm");
    }
    if (i > 0 && !(s.wavelength_nm > samples_[i - 1].wavelength_nm)) {
      throw ConfigError("material '" + name_ + "' wavelengths are not strictly increasing");
    }
  }
}

MaterialTable MaterialTable::constant(std::string name, std::complex<double> index,
                                      double min_nm, double max_nm) {
  return MaterialTable(std::move(name), {{min_nm, index.real(), index.imag()},
                                         {max_nm, index.real(), index.imag()}});
}

bool MaterialTable::covers(double wavelength_nm) const noexcept {
  return wavelength_nm >= min_wavelength() && wavelength_nm <= max_wavelength();
}

std::complex<double> MaterialTable::index(double wavelength_nm) const {
  if (!covers(wavelength_nm)) {
    std::ostringstream msg;
    msg << "wavelength " << wavelength_nm << " nm outside the table of '" << name_
        << "' [" << min_wavelength() << ", " << max_wavelength() << "] nm";
    throw RangeError(msg.str());
  }
  auto hi = std::lower_bound(samples_.begin(), samples_.end(), wavelength_nm,
                             [](const IndexSample& s, double w) { return s.wavelength_nm < w; });
  if (hi->wavelength_nm == wavelength_nm) return {hi->n, hi->k};
  auto lo = hi - 1;
  const double f = (wavelength_nm - lo->wavelength_nm) / (hi->wavelength_nm - lo->wavelength_nm);
  return {lo->n + f * (hi->n - lo->n), lo->k + f * (hi->k - lo->k)};
}

std::complex<double> refractive_index(const MaterialTable& table, double wavelength_nm) {
  return table.index(wavelength_nm);
}

MaterialTable parse_material(std::istream& in, std::string name) {
  std::vector<IndexSample> samples;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    IndexSample s{};
    if (!(row >> s.wavelength_nm)) continue;  // blank
    if (!(row >> s.n >> s.k)) {
      throw ParseError("material '" + name + "' line " + std::to_string(lineno) +
                       ": expected `wavelength_nm n k`");
    }
    std::string extra;
    if (row >> extra) {
      throw ParseError("material '" + name + "' line " + std::to_string(lineno) +
                       ": unexpected trailing field '" + extra + "'");
    }
    samples.push_back(s);
  }
  return MaterialTable(std::move(name), std::move(samples));
}

MaterialTable load_material(const std::filesystem::path& file, std::string name) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open material file " + file.string());
  if (name.empty()) name = file.stem().string();
  return parse_material(in, std::move(name));
}

MaterialLibrary MaterialLibrary::from_directory(const std::filesystem::path& dir,
                                                SicIndexModel sic_model) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw ConfigError("materials directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  MaterialLibrary lib;
  for (const auto& f : files) lib.add(std::make_shared<const MaterialTable>(load_material(f)));
  if (sic_model == SicIndexModel::extraordinary) {
    if (!lib.contains("sic_e")) throw ConfigError("extraordinary SiC table sic_e.txt missing in " + dir.string());
    lib.alias("sic", "sic_e");
  }
  return lib;
}

MaterialLibrary MaterialLibrary::bundled(SicIndexModel sic_model) {
  return from_directory(default_materials_dir(), sic_model);
}

void MaterialLibrary::add(MaterialPtr material) {
  if (!material) throw ConfigError("null material");
  materials_[material->name()] = std::move(material);
}

void MaterialLibrary::alias(const std::string& alias_name, const std::string& target) {
  auto m = get(target);
  materials_[alias_name] = std::make_shared<const MaterialTable>(
      alias_name, std::vector<IndexSample>(m->samples().begin(), m->samples().end()));
}

bool MaterialLibrary::contains(const std::string& name) const { return materials_.count(name) > 0; }

MaterialPtr MaterialLibrary::get(const std::string& name) const {
  auto it = materials_.find(name);
  if (it == materials_.end()) {
    std::string known;
    for (const auto& [k, v] : materials_) known += (known.empty() ? "" : ", ") + k;
    throw ConfigError("unknown material '" + name + "' (known: " + known + ")");
  }
  return it->second;
}

std::vector<std::string> MaterialLibrary::names() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : materials_) out.push_back(k);
  return out;
}

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("PLANARCAV_DATA_DIR"); env && *env) return env;
  return PLANARCAV_DEFAULT_DATA_DIR;
}

std::filesystem::path default_materials_dir() {
  if (const char* env = std::getenv("PLANARCAV_MATERIALS_DIR"); env && *env) return env;
  return default_data_dir() / "materials";
}

}  // namespace planarcav
