#include "planarcav/design.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "planarcav/errors.hpp"
#include "planarcav/parallel.hpp"

namespace planarcav {

// ---- spectrum ----

EmitterSpectrum::EmitterSpectrum(std::vector<SpectrumSample> samples) : samples_(std::move(samples)) {
  if (samples_.empty()) throw ConfigError("emitter spectrum has no samples");
  bool positive = false;
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& s = samples_[i];
    if (!std::isfinite(s.wavelength_nm) || !std::isfinite(s.intensity) || s.intensity < 0.0) {
      throw ConfigError("emitter spectrum sample " + std::to_string(i) + " is negative or not finite");
    }
    if (i > 0 && !(s.wavelength_nm > samples_[i - 1].wavelength_nm)) {
      throw ConfigError("emitter spectrum wavelengths must be strictly increasing");
    }
    positive = positive || s.intensity > 0.0;
  }
  if (!positive) throw ConfigError("emitter spectrum has no positive intensity");
}

double EmitterSpectrum::intensity(double wl) const {
  if (samples_.size() == 1) return wl == samples_.front().wavelength_nm ? samples_.front().intensity : 0.0;
  if (wl < samples_.front().wavelength_nm || wl > samples_.back().wavelength_nm) return 0.0;
  auto hi = std::lower_bound(samples_.begin(), samples_.end(), wl,
                             [](const SpectrumSample& s, double v) { return s.wavelength_nm < v; });
  if (hi->wavelength_nm == wl) return hi->intensity;
  auto lo = hi - 1;
  const double f = (wl - lo->wavelength_nm) / (hi->wavelength_nm - lo->wavelength_nm);
  return lo->intensity + f * (hi->intensity - lo->intensity);
}

EmitterSpectrum parse_spectrum(std::istream& in, const std::string& origin) {
  std::vector<SpectrumSample> samples;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    double wl = 0.0, value = 0.0;
    if (!(row >> wl)) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) {
        throw ParseError(origin + ":" + std::to_string(lineno) + ": expected 'wavelength_nm intensity'");
      }
      continue;
    }
    std::string extra;
    if (!(row >> value) || (row >> extra)) {
      throw ParseError(origin + ":" + std::to_string(lineno) + ": expected 'wavelength_nm intensity'");
    }
    samples.push_back({wl, value});
  }
  try {
    return EmitterSpectrum(std::move(samples));
  } catch (const ConfigError& e) {
    throw ParseError(origin + ": " + e.what());
  }
}

EmitterSpectrum load_spectrum(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open spectrum file '" + path + "'");
  return parse_spectrum(in, path);
}

EmitterSpectrum bundled_v2_spectrum() {
  return load_spectrum((default_data_dir() / "spectra" / "v2_rt.txt").string());
}

// ---- windows and weights ----

void SpectralWindow::validate() const {
  if (!(std::isfinite(min_nm) && std::isfinite(max_nm) && min_nm > 0.0 && min_nm < max_nm)) {
    throw ConfigError("spectral window needs 0 < min < max");
  }
  if (!(step_nm > 0.0)) throw ConfigError("spectral window step must be positive");
}

std::vector<double> SpectralWindow::grid() const {
  validate();
  const auto n = static_cast<std::size_t>(std::floor((max_nm - min_nm) / step_nm + 1e-9)) + 1;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = min_nm + static_cast<double>(i) * step_nm;
  return out;
}

SpectralWindow SpectralWindow::parse(const std::string& text) {
  SpectralWindow w;
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("window must be min:max[:step], got '" + text + "'");
    }
  }
  if (parts.size() < 2 || parts.size() > 3) throw ConfigError("window must be min:max[:step], got '" + text + "'");
  w.min_nm = parts[0];
  w.max_nm = parts[1];
  if (parts.size() == 3) w.step_nm = parts[2];
  w.validate();
  return w;
}

std::vector<double> spectral_weights(const EmitterSpectrum& spectrum, const SpectralWindow& window) {
  const std::vector<double> grid = window.grid();
  std::vector<double> w(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) w[i] = spectrum.intensity(grid[i]);
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(total > 0.0)) {
    std::ostringstream msg;
    msg << "emitter spectrum does not overlap the window " << window.min_nm << "-" << window.max_nm << " nm";
    throw ConfigError(msg.str());
  }
  for (double& v : w) v /= total;
  return w;
}

double weighted_enhancement(const Stack& stack, const DipoleConfig& dipole, const EmitterSpectrum& spectrum,
                            const SpectralWindow& window, const CollectionGeometry& geom,
                            const EnhancementOptions& options) {
  const std::vector<double> grid = window.grid();
  const std::vector<double> w = spectral_weights(spectrum, window);
  std::vector<double> used;
  std::vector<double> used_w;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (w[i] > 0.0) {
      used.push_back(grid[i]);
      used_w.push_back(w[i]);
    }
  }
  const auto spectrum_values = enhancement_spectrum(stack, dipole, used, geom, options);
  double sum = 0.0;
  for (std::size_t i = 0; i < used.size(); ++i) sum += used_w[i] * spectrum_values[i].enhancement;
  return sum;
}

// ---- antenna parametrization ----

std::string to_string(DesignAxis axis) {
  switch (axis) {
    case DesignAxis::upper_silver_nm: return "upper_silver_nm";
    case DesignAxis::sic_nm: return "sic_nm";
    case DesignAxis::dipole_rel_pos: return "dipole_rel_pos";
    case DesignAxis::silica_nm: return "silica_nm";
  }
  return "?";
}

DesignAxis parse_design_axis(const std::string& text) {
  if (text == "upper_silver_nm" || text == "ag" || text == "upper_ag_nm") return DesignAxis::upper_silver_nm;
  if (text == "sic_nm" || text == "sic") return DesignAxis::sic_nm;
  if (text == "dipole_rel_pos" || text == "pos" || text == "position") return DesignAxis::dipole_rel_pos;
  if (text == "silica_nm" || text == "sio2" || text == "silica") return DesignAxis::silica_nm;
  throw ConfigError("unknown design parameter '" + text +
                    "' (expected upper_silver_nm, sic_nm, dipole_rel_pos or silica_nm)");
}

double AntennaDesign::get(DesignAxis axis) const {
  switch (axis) {
    case DesignAxis::upper_silver_nm: return upper_silver_nm;
    case DesignAxis::sic_nm: return sic_nm;
    case DesignAxis::dipole_rel_pos: return dipole_rel_pos;
    case DesignAxis::silica_nm: return silica_nm;
  }
  return 0.0;
}

void AntennaDesign::set(DesignAxis axis, double value) {
  switch (axis) {
    case DesignAxis::upper_silver_nm: upper_silver_nm = value; break;
    case DesignAxis::sic_nm: sic_nm = value; break;
    case DesignAxis::dipole_rel_pos: dipole_rel_pos = value; break;
    case DesignAxis::silica_nm: silica_nm = value; break;
  }
}

AntennaMaterials AntennaMaterials::from(const MaterialLibrary& lib) {
  return {lib.get("air"), lib.get("sio2"), lib.get("ag"), lib.get("sic")};
}

AntennaModel build_antenna(const AntennaDesign& d, const AntennaMaterials& m) {
  if (!(d.silica_nm >= 0.0)) throw ConfigError("silica thickness must be >= 0");
  if (!(d.upper_silver_nm > 0.0 && d.sic_nm > 0.0 && d.lower_silver_nm > 0.0)) {
    throw ConfigError("silver and SiC thicknesses must be positive");
  }
  AntennaModel out;
  out.stack.incidence = m.air;
  out.stack.exit = m.air;
  if (d.silica_nm > 0.0) out.stack.layers.push_back({m.silica, d.silica_nm});
  out.stack.layers.push_back({m.silver, d.upper_silver_nm});
  out.stack.layers.push_back({m.sic, d.sic_nm});
  out.stack.layers.push_back({m.silver, d.lower_silver_nm});
  out.stack.validate();
  out.dipole = DipoleConfig::relative(out.stack, out.stack.layers.size() - 2, d.dipole_rel_pos, d.orientation);
  return out;
}

double design_enhancement(const AntennaDesign& design, const DesignContext& ctx) {
  return DesignEvaluator(ctx)(design);
}

DesignEvaluator::DesignEvaluator(const DesignContext& ctx) : ctx_(ctx) {
  const std::vector<double> grid = ctx.window.grid();
  const std::vector<double> w = spectral_weights(ctx.spectrum, ctx.window);
  const MaterialPtr bulk = ctx.options.bulk_material ? ctx.options.bulk_material : ctx.materials.sic;
  // The reference depends on the dipole orientation; horizontal is the design default.
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (w[i] <= 0.0) continue;
    grid_.push_back(grid[i]);
    weights_.push_back(w[i]);
    reference_.push_back(bulk_reference_power(*bulk, grid[i], ctx.geom, DipoleOrientation::horizontal,
                                              ctx.options.reference, ctx.materials.air->index(grid[i]).real()));
  }
}

double DesignEvaluator::operator()(const AntennaDesign& design) const {
  const AntennaModel model = build_antenna(design, ctx_.materials);
  const MaterialPtr bulk = ctx_.options.bulk_material ? ctx_.options.bulk_material : ctx_.materials.sic;
  double sum = 0.0;
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    double ref = reference_[i];
    if (design.orientation != DipoleOrientation::horizontal) {
      ref = bulk_reference_power(*bulk, grid_[i], ctx_.geom, design.orientation, ctx_.options.reference,
                                 ctx_.materials.air->index(grid_[i]).real());
    }
    sum += weights_[i] * collected_power(model.stack, model.dipole, grid_[i], ctx_.geom) / ref;
  }
  return sum;
}

// ---- sweeps ----

void SweepAxis::validate() const {
  if (count < 2) throw ConfigError("sweep axis " + to_string(parameter) + " needs at least 2 points");
  if (!(std::isfinite(min) && std::isfinite(max) && min < max)) {
    throw ConfigError("sweep axis " + to_string(parameter) + " needs min < max");
  }
  if (parameter == DesignAxis::dipole_rel_pos) {
    if (min < 0.0 || max > 1.0) throw ConfigError("dipole_rel_pos range must lie in [0, 1]");
  } else if (min < 0.0 || (min == 0.0 && parameter != DesignAxis::silica_nm)) {
    throw ConfigError("sweep axis " + to_string(parameter) + " needs positive thicknesses");
  }
}

double SweepAxis::value(std::size_t i) const {
  return min + (max - min) * static_cast<double>(i) / static_cast<double>(count - 1);
}

void SweepSpec::validate() const {
  if (axes.empty() || axes.size() > 2) throw ConfigError("a sweep has one or two axes");
  for (const auto& a : axes) a.validate();
  if (axes.size() == 2 && axes[0].parameter == axes[1].parameter) {
    throw ConfigError("sweep axes must be different parameters");
  }
}

double EnhancementMap::at(std::size_t i, std::size_t j) const {
  if (axes.size() == 1) return values.at(i);
  return values.at(i * axes[1].count + j);
}

std::vector<double> EnhancementMap::coordinates(std::size_t flat) const {
  if (axes.size() == 1) return {axes[0].value(flat)};
  return {axes[0].value(flat / axes[1].count), axes[1].value(flat % axes[1].count)};
}

EnhancementMap sweep(const SweepSpec& spec, const DesignContext& ctx) {
  spec.validate();
  EnhancementMap map;
  map.axes = spec.axes;
  std::size_t cells = 1;
  for (const auto& a : spec.axes) cells *= a.count;
  map.values.assign(cells, 0.0);
  const DesignEvaluator evaluate(ctx);
  parallel_for(cells, static_cast<unsigned>(std::max(0, ctx.threads)), [&](std::size_t flat) {
    AntennaDesign d = spec.base;
    const std::vector<double> c = map.coordinates(flat);
    for (std::size_t k = 0; k < c.size(); ++k) d.set(spec.axes[k].parameter, c[k]);
    map.values[flat] = evaluate(d);
  });
  map.argmax = static_cast<std::size_t>(std::max_element(map.values.begin(), map.values.end()) - map.values.begin());
  return map;
}

// ---- optimization ----

namespace {

std::size_t auto_grid_points(std::size_t dims) {
  const double per_dim = std::floor(std::pow(256.0, 1.0 / static_cast<double>(dims)) + 1e-9);
  return static_cast<std::size_t>(std::clamp(per_dim, 3.0, 17.0));
}

}  // namespace

OptimizationResult maximize_in_box(const std::function<double(std::span<const double>)>& f,
                                   std::span<const Bound> bounds, const OptimizerOptions& options) {
  const std::size_t n = bounds.size();
  if (n == 0) throw ConfigError("optimizer needs at least one free parameter");
  for (const auto& b : bounds) {
    if (!(std::isfinite(b.lower) && std::isfinite(b.upper) && b.lower < b.upper)) {
      throw ConfigError("optimizer bounds need lower < upper");
    }
  }
  OptimizationResult result;
  std::vector<double> x(n);
  // objective in unit-box coordinates
  auto eval = [&](const std::vector<double>& u) {
    for (std::size_t k = 0; k < n; ++k) {
      x[k] = bounds[k].lower + std::clamp(u[k], 0.0, 1.0) * (bounds[k].upper - bounds[k].lower);
    }
    ++result.evaluations;
    const double v = f(x);
    return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
  };

  const std::size_t g = options.grid_points ? options.grid_points : auto_grid_points(n);
  if (g < 2) throw ConfigError("optimizer grid needs at least 2 points per dimension");
  std::size_t total = 1;
  for (std::size_t k = 0; k < n; ++k) total *= g;
  std::vector<double> best_u(n, 0.0), u(n);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (std::size_t k = n; k-- > 0;) {
      u[k] = static_cast<double>(rem % g) / static_cast<double>(g - 1);
      rem /= g;
    }
    const double v = eval(u);
    if (v > best) {
      best = v;
      best_u = u;
    }
  }

  // Nelder-Mead on -f, simplex edge of half a grid cell.
  const double edge = 0.5 / static_cast<double>(g - 1);
  std::vector<std::vector<double>> simplex(n + 1, best_u);
  std::vector<double> values(n + 1);
  values[0] = -best;
  for (std::size_t k = 0; k < n; ++k) {
    simplex[k + 1][k] += best_u[k] + edge <= 1.0 ? edge : -edge;
    values[k + 1] = -eval(simplex[k + 1]);
  }
  auto clamp_unit = [](std::vector<double> v) {
    for (double& c : v) c = std::clamp(c, 0.0, 1.0);
    return v;
  };
  std::vector<std::size_t> order(n + 1);
  while (result.evaluations < options.max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t lo = order.front(), hi = order.back(), second = order[n - 1];
    double diameter = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
      for (std::size_t k = 0; k < n; ++k) diameter = std::max(diameter, std::abs(simplex[i][k] - simplex[lo][k]));
    }
    const double spread = values[hi] - values[lo];
    if (diameter < options.x_tolerance && spread <= options.f_tolerance * (std::abs(values[lo]) + 1e-12)) {
      result.converged = true;
      break;
    }
    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == hi) continue;
      for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i][k] / static_cast<double>(n);
    }
    auto along = [&](double t) {
      std::vector<double> p(n);
      for (std::size_t k = 0; k < n; ++k) p[k] = centroid[k] + t * (simplex[hi][k] - centroid[k]);
      return clamp_unit(p);
    };
    const auto xr = along(-1.0);
    const double fr = -eval(xr);
    if (fr < values[lo]) {
      const auto xe = along(-2.0);
      const double fe = -eval(xe);
      if (fe < fr) {
        simplex[hi] = xe;
        values[hi] = fe;
      } else {
        simplex[hi] = xr;
        values[hi] = fr;
      }
    } else if (fr < values[second]) {
      simplex[hi] = xr;
      values[hi] = fr;
    } else {
      const bool outside = fr < values[hi];
      const auto xc = along(outside ? -0.5 : 0.5);
      const double fc = -eval(xc);
      if (fc < (outside ? fr : values[hi])) {
        simplex[hi] = xc;
        values[hi] = fc;
      } else {
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == lo) continue;
          for (std::size_t k = 0; k < n; ++k) simplex[i][k] = simplex[lo][k] + 0.5 * (simplex[i][k] - simplex[lo][k]);
          values[i] = -eval(simplex[i]);
        }
      }
    }
  }
  const std::size_t lo = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
  const std::vector<double>& best_point = -values[lo] >= best ? simplex[lo] : best_u;
  result.value = std::max(-values[lo], best);
  result.x.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    result.x[k] = bounds[k].lower + std::clamp(best_point[k], 0.0, 1.0) * (bounds[k].upper - bounds[k].lower);
  }
  return result;
}

DesignOptimum optimize(std::span<const FreeParameter> free, const AntennaDesign& start, const DesignContext& ctx,
                       const OptimizerOptions& options) {
  if (free.empty()) throw ConfigError("optimize needs at least one free parameter");
  std::vector<Bound> bounds;
  for (const auto& p : free) {
    SweepAxis check{p.axis, p.bounds.lower, p.bounds.upper, 2};
    check.validate();
    bounds.push_back(p.bounds);
  }
  const DesignEvaluator evaluate(ctx);
  auto objective = [&](std::span<const double> x) {
    AntennaDesign d = start;
    for (std::size_t k = 0; k < free.size(); ++k) d.set(free[k].axis, x[k]);
    return evaluate(d);
  };
  const OptimizationResult r = maximize_in_box(objective, bounds, options);
  DesignOptimum out;
  out.design = start;
  for (std::size_t k = 0; k < free.size(); ++k) out.design.set(free[k].axis, r.x[k]);
  out.enhancement = r.value;
  out.converged = r.converged;
  out.evaluations = r.evaluations;
  return out;
}

double window_ratio(const AntennaDesign& design, const DesignContext& ctx, const SpectralWindow& window_a,
                    const SpectralWindow& window_b) {
  DesignContext a = ctx;
  a.window = window_a;
  DesignContext b = ctx;
  b.window = window_b;
  const double num = design_enhancement(design, a);
  const double den = design_enhancement(design, b);
  if (!(den > 0.0)) throw NumericalDegeneracy("window ratio denominator vanishes");
  return num / den;
}

AntennaDesign reference_design() {
  AntennaDesign d;
  d.silica_nm = 173.0;
  d.upper_silver_nm = 31.2;
  d.sic_nm = 145.1;
  d.dipole_rel_pos = 0.5;
  return d;
}

}  // namespace planarcav
