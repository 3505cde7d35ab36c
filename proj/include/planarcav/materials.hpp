#pragma once

#include <complex>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace planarcav {

struct IndexSample {
  double wavelength_nm;
  double n;
  double k;
};

/// Tabulated complex refractive index n + ik versus vacuum wavelength.
///
/// Samples must be strictly increasing in wavelength, at least two of them,
/// with k >= 0 everywhere (passive media). Lookups interpolate n and k
/// linearly and independently; there is no extrapolation.
class MaterialTable {
 public:
  MaterialTable(std::string name, std::vector<IndexSample> samples);

  /// Non-dispersive medium valid over [min_nm, max_nm].
  static MaterialTable constant(std::string name, std::complex<double> index,
                                double min_nm = 1.0, double max_nm = 1.0e6);

  const std::string& name() const noexcept { return name_; }
  std::span<const IndexSample> samples() const noexcept { return samples_; }
  double min_wavelength() const noexcept { return samples_.front().wavelength_nm; }
  double max_wavelength() const noexcept { return samples_.back().wavelength_nm; }
  bool covers(double wavelength_nm) const noexcept;

  /// Throws RangeError outside [min_wavelength, max_wavelength].
  std::complex<double> index(double wavelength_nm) const;

 private:
  std::string name_;
  std::vector<IndexSample> samples_;
};

using MaterialPtr = std::shared_ptr<const MaterialTable>;

std::complex<double> refractive_index(const MaterialTable& table, double wavelength_nm);

/// Reads `wavelength_nm n k` rows; `#` starts a comment.
MaterialTable parse_material(std::istream& in, std::string name);
MaterialTable load_material(const std::filesystem::path& file, std::string name = {});

/// Which principal index of 4H-SiC backs the isotropic `sic` material.
enum class SicIndexModel { ordinary, extraordinary };

/// Named collection of materials loaded from a directory of `<name>.txt` files.
class MaterialLibrary {
 public:
  MaterialLibrary() = default;

  static MaterialLibrary from_directory(const std::filesystem::path& dir,
                                        SicIndexModel sic_model = SicIndexModel::ordinary);

  /// Bundled tables: `$PLANARCAV_MATERIALS_DIR` when set, else the data shipped with the build.
  static MaterialLibrary bundled(SicIndexModel sic_model = SicIndexModel::ordinary);

  void add(MaterialPtr material);
  void alias(const std::string& alias_name, const std::string& target);
  bool contains(const std::string& name) const;
  MaterialPtr get(const std::string& name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, MaterialPtr> materials_;
};

/// Root of the bundled data tree (materials/ and spectra/).
std::filesystem::path default_data_dir();
std::filesystem::path default_materials_dir();

}  // namespace planarcav
