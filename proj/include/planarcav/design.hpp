#pragma once

// Spectrally weighted enhancement, parameter sweeps and thickness optimization
// of the silver-coated membrane antenna.

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "planarcav/dipole.hpp"
#include "planarcav/materials.hpp"

namespace planarcav {

struct SpectrumSample {
  double wavelength_nm;
  double intensity;
};

class EmitterSpectrum {
 public:
  explicit EmitterSpectrum(std::vector<SpectrumSample> samples);

  const std::vector<SpectrumSample>& samples() const { return samples_; }
  /// Linear interpolation; zero outside the tabulated support.
  double intensity(double wavelength_nm) const;

 private:
  std::vector<SpectrumSample> samples_;
};

EmitterSpectrum parse_spectrum(std::istream& in, const std::string& origin = "<stream>");
EmitterSpectrum load_spectrum(const std::string& path);
/// The room-temperature V2 emission spectrum shipped in data/spectra.
EmitterSpectrum bundled_v2_spectrum();

struct SpectralWindow {
  double min_nm = 900.0;
  double max_nm = 1000.0;
  double step_nm = 5.0;

  void validate() const;
  std::vector<double> grid() const;  // min, min + step, ... up to max inclusive
  /// Parses "min:max[:step]".
  static SpectralWindow parse(const std::string& text);
};

namespace windows {
inline constexpr SpectralWindow room_temperature{900.0, 1000.0, 5.0};
inline constexpr SpectralWindow low_temperature{925.0, 1150.0, 5.0};
inline constexpr SpectralWindow full_psb{900.0, 1150.0, 5.0};
}  // namespace windows

/// Normalized weights on window.grid(); throws ConfigError on empty overlap.
std::vector<double> spectral_weights(const EmitterSpectrum& spectrum, const SpectralWindow& window);

double weighted_enhancement(const Stack& stack, const DipoleConfig& dipole, const EmitterSpectrum& spectrum,
                            const SpectralWindow& window, const CollectionGeometry& geom,
                            const EnhancementOptions& options = {});

// ---- antenna parametrization ----

enum class DesignAxis { upper_silver_nm, sic_nm, dipole_rel_pos, silica_nm };

std::string to_string(DesignAxis axis);
DesignAxis parse_design_axis(const std::string& text);

/// air | SiO2 | Ag (thin) | SiC | Ag (thick) | air, dipole in the SiC layer.
/// A silica thickness of 0 omits the capping layer.
struct AntennaDesign {
  double silica_nm = 173.0;
  double upper_silver_nm = 31.2;
  double sic_nm = 145.1;
  double dipole_rel_pos = 0.5;  // 0 = SiC / thick-silver interface
  double lower_silver_nm = 200.0;
  DipoleOrientation orientation = DipoleOrientation::horizontal;

  double get(DesignAxis axis) const;
  void set(DesignAxis axis, double value);
};

struct AntennaMaterials {
  MaterialPtr air, silica, silver, sic;
  static AntennaMaterials from(const MaterialLibrary& lib);
};

struct AntennaModel {
  Stack stack;
  DipoleConfig dipole;
};

AntennaModel build_antenna(const AntennaDesign& design, const AntennaMaterials& materials);

/// Everything needed to turn an AntennaDesign into a figure of merit.
struct DesignContext {
  AntennaMaterials materials;
  EmitterSpectrum spectrum;
  SpectralWindow window = windows::room_temperature;
  CollectionGeometry geom;
  EnhancementOptions options;
  int threads = 0;  // 0: hardware concurrency

  DesignContext(AntennaMaterials m, EmitterSpectrum s) : materials(std::move(m)), spectrum(std::move(s)) {}
};

/// Weighted enhancement of one design. The bulk reference is evaluated per call;
/// use DesignEvaluator for repeated evaluations.
double design_enhancement(const AntennaDesign& design, const DesignContext& ctx);

/// Caches the window weights and the bulk reference powers.
class DesignEvaluator {
 public:
  explicit DesignEvaluator(const DesignContext& ctx);
  double operator()(const AntennaDesign& design) const;
  const std::vector<double>& wavelengths() const { return grid_; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  const DesignContext& ctx_;
  std::vector<double> grid_;
  std::vector<double> weights_;
  std::vector<double> reference_;
};

struct SweepAxis {
  DesignAxis parameter = DesignAxis::sic_nm;
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 2;

  void validate() const;
  double value(std::size_t i) const;
};

struct SweepSpec {
  std::vector<SweepAxis> axes;  // one or two
  AntennaDesign base;

  void validate() const;
};

struct EnhancementMap {
  std::vector<SweepAxis> axes;
  std::vector<double> values;  // row-major, the last axis varies fastest
  std::size_t argmax = 0;

  double at(std::size_t i, std::size_t j = 0) const;
  std::size_t size(std::size_t axis) const { return axes.at(axis).count; }
  double max_value() const { return values.at(argmax); }
  /// Coordinates of cell `flat` along each axis.
  std::vector<double> coordinates(std::size_t flat) const;
};

EnhancementMap sweep(const SweepSpec& spec, const DesignContext& ctx);

// ---- optimization ----

struct Bound {
  double lower;
  double upper;
};

struct OptimizerOptions {
  std::size_t grid_points = 0;  // per dimension in the coarse scan; 0 picks about 256 cells in total
  int max_evaluations = 600;
  double x_tolerance = 1e-3;    // relative to the box width
  double f_tolerance = 1e-9;
};

struct OptimizationResult {
  std::vector<double> x;
  double value = 0.0;
  bool converged = false;
  int evaluations = 0;
};

/// Maximizes f over a box: coarse grid scan, then Nelder-Mead from the best
/// cell with iterates clamped to the box. Deterministic.
OptimizationResult maximize_in_box(const std::function<double(std::span<const double>)>& f,
                                   std::span<const Bound> bounds, const OptimizerOptions& options = {});

struct DesignOptimum {
  AntennaDesign design;
  double enhancement = 0.0;
  bool converged = false;
  int evaluations = 0;
};

struct FreeParameter {
  DesignAxis axis;
  Bound bounds;
};

DesignOptimum optimize(std::span<const FreeParameter> free, const AntennaDesign& start, const DesignContext& ctx,
                       const OptimizerOptions& options = {});

/// weighted_enhancement(window_a) / weighted_enhancement(window_b) for one design.
double window_ratio(const AntennaDesign& design, const DesignContext& ctx, const SpectralWindow& window_a,
                    const SpectralWindow& window_b);

/// Default optimum for the room-temperature window with the bundled data.
AntennaDesign reference_design();

}  // namespace planarcav
