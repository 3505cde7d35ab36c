#include "planarcav/ple.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "planarcav/parallel.hpp"

namespace planarcav {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& text, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (trim(text.substr(used)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw ParseError(where + ": '" + text + "' is not a number");
}

struct MeanStd {
  double mean;
  double std;
};

MeanStd population_stats(std::span<const double> v) {
  if (v.empty()) return {kNaN, kNaN};
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size()))};
}

double median_step(std::span<const FrequencyPoint> pts) {
  std::vector<double> d;
  for (std::size_t i = 1; i < pts.size(); ++i) d.push_back(std::abs(pts[i].ghz - pts[i - 1].ghz));
  if (d.empty()) return 0.0;
  std::sort(d.begin(), d.end());
  const std::size_t mid = d.size() / 2;
  return d.size() % 2 ? d[mid] : 0.5 * (d[mid - 1] + d[mid]);
}

}  // namespace

void PleLineRecord::validate() const {
  const std::string where = source.empty() ? "PLE line" : source;
  if (samples.size() < 2) throw InsufficientData(where + ": needs at least 2 ramp samples");
  if (!(std::isfinite(wavemeter_min_ghz) && std::isfinite(wavemeter_max_ghz) && wavemeter_min_ghz < wavemeter_max_ghz)) {
    throw ConfigError(where + ": wavemeter_min_ghz must be below wavemeter_max_ghz");
  }
  if (!(duration_s > 0.0)) throw ConfigError(where + ": duration_s must be positive");
}

std::vector<FrequencyPoint> ramp_to_frequency(const PleLineRecord& line) {
  line.validate();
  const std::size_t n = line.samples.size();
  const double span = line.wavemeter_max_ghz - line.wavemeter_min_ghz;
  std::vector<FrequencyPoint> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(n - 1);
    out[i].ghz = line.reversed ? line.wavemeter_max_ghz - f * span : line.wavemeter_min_ghz + f * span;
    out[i].counts = line.samples[i].counts;
  }
  // pin the endpoints exactly
  out.front().ghz = line.reversed ? line.wavemeter_max_ghz : line.wavemeter_min_ghz;
  out.back().ghz = line.reversed ? line.wavemeter_min_ghz : line.wavemeter_max_ghz;
  return out;
}

std::string to_string(Rejection r) {
  switch (r) {
    case Rejection::non_converged: return "non_converged";
    case Rejection::center_out_of_range: return "center_out_of_range";
    case Rejection::nonnegativity: return "nonnegativity";
    case Rejection::linewidth: return "linewidth";
    case Rejection::amplitude_ratio: return "amplitude_ratio";
    case Rejection::separation_deviation: return "separation_deviation";
    case Rejection::r_squared: return "r_squared";
  }
  return "?";
}

void ConstraintSet::validate() const {
  if (!(max_amplitude_ratio > 1.0)) throw ConfigError("max_amplitude_ratio must exceed 1");
  if (!(max_separation_deviation > 0.0)) throw ConfigError("max_separation_deviation must be positive");
  if (!(r2_threshold > 0.0 && r2_threshold < 1.0)) throw ConfigError("r2_threshold must lie in (0, 1)");
}

ConstraintSet ConstraintSet::preset(const std::string& name) {
  ConstraintSet c;
  if (name == "loose" || name == "0.46") {
    c.r2_threshold = 0.46;
  } else if (name == "strict" || name == "0.7923") {
    c.r2_threshold = 0.7923;
  } else {
    throw ConfigError("unknown constraint preset '" + name + "' (expected loose or strict)");
  }
  return c;
}

std::optional<Rejection> PleLineFit::primary() const {
  if (violations.empty()) return std::nullopt;
  return violations.front();
}

std::vector<Rejection> check_constraints(const PleLineParams& p, double r2, double lo, double hi, double step,
                                         const ConstraintSet& c, std::optional<double> reference) {
  std::vector<Rejection> v;
  auto inside = [&](double x) { return x >= lo && x <= hi; };
  if (c.centers_in_range && !(inside(p.first.center) && inside(p.second.center))) {
    v.push_back(Rejection::center_out_of_range);
  }
  if (c.nonnegative && !(p.first.amplitude >= 0.0 && p.second.amplitude >= 0.0 && p.offset >= 0.0)) {
    v.push_back(Rejection::nonnegativity);
  }
  if (c.min_linewidth && !(p.first.fwhm() > step && p.second.fwhm() > step)) v.push_back(Rejection::linewidth);
  const double a_hi = std::max(p.first.amplitude, p.second.amplitude);
  const double a_lo = std::min(p.first.amplitude, p.second.amplitude);
  if (!(a_lo > 0.0 && a_hi / a_lo < c.max_amplitude_ratio)) v.push_back(Rejection::amplitude_ratio);
  if (reference) {
    const double sep = p.second.center - p.first.center;
    if (!(std::abs(sep - *reference) < c.max_separation_deviation * std::abs(*reference))) {
      v.push_back(Rejection::separation_deviation);
    }
  }
  if (!(r2 > c.r2_threshold)) v.push_back(Rejection::r_squared);
  return v;
}

namespace {

// Fit without the separation rule; the caller adds it once a reference exists.
PleLineFit fit_line_core(const PleLineRecord& line, const ConstraintSet& c) {
  PleLineFit out;
  out.power_nw = line.power_nw;
  out.duration_s = line.duration_s;
  const std::vector<FrequencyPoint> pts = ramp_to_frequency(line);
  std::vector<double> x(pts.size()), y(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    x[i] = pts[i].ghz;
    y[i] = pts[i].counts;
  }
  out.grid_step_ghz = median_step(pts);
  out.range_min_ghz = line.wavemeter_min_ghz;
  out.range_max_ghz = line.wavemeter_max_ghz;

  FitResult fit;
  bool converged = true;
  try {
    fit = fit_double_gaussian(x, y).fit;
    converged = fit.converged;
    out.message = fit.message;
  } catch (const DegenerateFit& e) {
    fit = e.partial();
    converged = false;
    out.message = e.what();
  } catch (const Error& e) {
    out.violations.push_back(Rejection::non_converged);
    out.message = e.what();
    return out;
  }
  out.has_fit = true;
  const auto& p = fit.parameters;
  out.params = {{p[0], p[1], p[2]}, {p[3], p[4], p[5]}, p[6]};
  out.params.first.sigma = std::abs(out.params.first.sigma);
  out.params.second.sigma = std::abs(out.params.second.sigma);
  out.std_errors = fit.std_errors;
  if (out.params.second.center < out.params.first.center) {
    std::swap(out.params.first, out.params.second);
    std::swap_ranges(out.std_errors.begin(), out.std_errors.begin() + 3, out.std_errors.begin() + 3);
  }
  out.r_squared = fit.r_squared;
  if (!converged) out.violations.push_back(Rejection::non_converged);
  const auto rest = check_constraints(out.params, out.r_squared, out.range_min_ghz, out.range_max_ghz,
                                      out.grid_step_ghz, c, std::nullopt);
  out.violations.insert(out.violations.end(), rest.begin(), rest.end());
  return out;
}

void apply_reference(PleLineFit& f, const ConstraintSet& c, std::optional<double> reference) {
  if (!f.has_fit) return;
  const bool degenerate = !f.violations.empty() && f.violations.front() == Rejection::non_converged;
  f.violations = check_constraints(f.params, f.r_squared, f.range_min_ghz, f.range_max_ghz, f.grid_step_ghz, c,
                                   reference);
  if (degenerate) f.violations.insert(f.violations.begin(), Rejection::non_converged);
  f.accepted = f.violations.empty();
}

}  // namespace

PleLineFit fit_ple_line(const PleLineRecord& line, const ConstraintSet& constraints,
                        std::optional<double> reference_separation) {
  constraints.validate();
  PleLineFit f = fit_line_core(line, constraints);
  apply_reference(f, constraints, reference_separation);
  return f;
}

PleScanResult analyze_scan(const PleScan& scan, const ConstraintSet& constraints,
                           std::optional<double> reference_separation, int threads) {
  constraints.validate();
  if (scan.lines.empty()) throw InsufficientData("PLE scan '" + scan.emitter_id + "' has no lines");
  PleScanResult out;
  out.emitter_id = scan.emitter_id;
  out.lines.resize(scan.lines.size());
  parallel_for(scan.lines.size(), static_cast<unsigned>(std::max(0, threads)), [&](std::size_t i) {
    out.lines[i] = fit_line_core(scan.lines[i], constraints);
    out.lines[i].line_index = i;
  });
  std::optional<double> reference = reference_separation;
  if (!reference) {
    for (const auto& f : out.lines) {
      if (f.has_fit && f.violations.empty()) {
        reference = f.separation();
        break;
      }
    }
  }
  out.reference_separation = reference;
  for (auto& f : out.lines) apply_reference(f, constraints, reference);
  return out;
}

std::vector<LinewidthGroup> linewidth_statistics(std::span<const PleLineFit> lines) {
  std::map<double, std::pair<std::vector<double>, std::vector<double>>> accepted;
  std::map<double, std::size_t> totals;
  for (const auto& f : lines) {
    ++totals[f.power_nw];
    auto& slot = accepted[f.power_nw];
    if (f.accepted) {
      slot.first.push_back(f.a1_fwhm());
      slot.second.push_back(f.a2_fwhm());
    }
  }
  std::vector<LinewidthGroup> out;
  for (const auto& [power, widths] : accepted) {
    LinewidthGroup g;
    g.power_nw = power;
    g.total = totals[power];
    g.accepted = widths.first.size();
    g.empty = g.accepted == 0;
    const MeanStd a1 = population_stats(widths.first);
    const MeanStd a2 = population_stats(widths.second);
    g.a1_mean = a1.mean;
    g.a1_std = a1.std;
    g.a2_mean = a2.mean;
    g.a2_std = a2.std;
    out.push_back(g);
  }
  return out;
}

WanderingSeries spectral_wandering(std::span<const PleLineFit> lines) {
  WanderingSeries w;
  for (std::size_t i = 0; i + 1 < lines.size(); ++i) {
    if (!lines[i].accepted || !lines[i + 1].accepted) continue;
    const double delta_mhz = (lines[i + 1].params.second.center - lines[i].params.second.center) * 1000.0;
    w.rates_mhz_per_s.push_back(delta_mhz / lines[i].duration_s);
    w.first_line.push_back(i);
  }
  if (w.rates_mhz_per_s.empty()) {
    throw InsufficientData("spectral wandering needs at least two consecutive accepted lines");
  }
  const MeanStd s = population_stats(w.rates_mhz_per_s);
  w.mean = s.mean;
  w.std = s.std;
  return w;
}

EnhancementStatistics enhancement_statistics(
    const std::vector<std::pair<std::string, std::vector<SaturationSample>>>& groups,
    const std::string& reference_group) {
  EnhancementStatistics out;
  out.reference = reference_group;
  for (const auto& [name, samples] : groups) {
    if (samples.empty()) throw InsufficientData("group '" + name + "' has no saturation fits");
    GroupSummary g;
    g.name = name;
    g.count = samples.size();
    std::vector<double> values;
    for (const auto& s : samples) {
      if (!std::isfinite(s.i_sat) || !(s.error >= 0.0)) {
        throw ConfigError("group '" + name + "' has an invalid I_sat or error");
      }
      values.push_back(s.i_sat);
    }
    const MeanStd st = population_stats(values);
    g.mean = st.mean;
    g.std = st.std;
    g.uncertainty = g.count > 1 ? st.std : samples.front().error;
    const auto it = std::max_element(samples.begin(), samples.end(),
                                     [](const SaturationSample& a, const SaturationSample& b) { return a.i_sat < b.i_sat; });
    g.max = it->i_sat;
    g.max_error = it->error;
    out.groups.push_back(g);
  }
  const auto ref = std::find_if(out.groups.begin(), out.groups.end(),
                                [&](const GroupSummary& g) { return g.name == reference_group; });
  if (ref == out.groups.end()) throw ConfigError("reference group '" + reference_group + "' not found");
  if (!(ref->mean != 0.0)) throw NumericalDegeneracy("reference group mean is zero");
  const double rm = ref->mean, ru = ref->uncertainty;
  for (auto& g : out.groups) {
    g.ratio_mean = g.mean / rm;
    g.ratio_max = g.max / rm;
    if (&g == &*ref) {
      g.ratio_mean_error = 0.0;
    } else {
      g.ratio_mean_error = std::abs(g.ratio_mean) * std::hypot(g.uncertainty / g.mean, ru / rm);
    }
    g.ratio_max_error = std::abs(g.ratio_max) * std::hypot(g.max_error / g.max, ru / rm);
  }
  return out;
}

PleLineRecord parse_ple_line(std::istream& in, const std::string& origin) {
  PleLineRecord line;
  line.source = origin;
  bool has_min = false, has_max = false, has_duration = false, has_power = false;
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno);
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string text = trim(raw);
    if (text.empty()) continue;
    if (auto eq = text.find('='); eq != std::string::npos) {
      if (!line.samples.empty()) throw ParseError(where + ": header line after data rows");
      const std::string key = trim(text.substr(0, eq));
      const std::string value = trim(text.substr(eq + 1));
      if (key == "wavemeter_min_ghz") {
        line.wavemeter_min_ghz = parse_number(value, where);
        has_min = true;
      } else if (key == "wavemeter_max_ghz") {
        line.wavemeter_max_ghz = parse_number(value, where);
        has_max = true;
      } else if (key == "duration_s") {
        line.duration_s = parse_number(value, where);
        has_duration = true;
      } else if (key == "power_nw") {
        line.power_nw = parse_number(value, where);
        has_power = true;
      } else if (key == "reversed") {
        if (value == "true" || value == "1" || value == "yes") line.reversed = true;
        else if (value == "false" || value == "0" || value == "no") line.reversed = false;
        else throw ParseError(where + ": reversed must be true or false");
      } else {
        throw ParseError(where + ": unknown header key '" + key + "'");
      }
      continue;
    }
    std::istringstream row(text);
    double v = 0.0, c = 0.0;
    std::string extra;
    if (!(row >> v >> c) || (row >> extra)) throw ParseError(where + ": expected 'voltage counts'");
    line.samples.push_back({v, c});
  }
  if (!has_min || !has_max || !has_duration || !has_power) {
    throw ParseError(origin + ": header needs wavemeter_min_ghz, wavemeter_max_ghz, duration_s and power_nw");
  }
  line.validate();
  return line;
}

PleLineRecord load_ple_line(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open PLE line file '" + path.string() + "'");
  return parse_ple_line(in, path.string());
}

void write_ple_line(std::ostream& out, const PleLineRecord& line) {
  out << std::setprecision(17);
  out << "wavemeter_min_ghz = " << line.wavemeter_min_ghz << "\n";
  out << "wavemeter_max_ghz = " << line.wavemeter_max_ghz << "\n";
  out << "duration_s = " << line.duration_s << "\n";
  out << "power_nw = " << line.power_nw << "\n";
  if (line.reversed) out << "reversed = true\n";
  for (const auto& s : line.samples) out << s.voltage << " " << s.counts << "\n";
}

PleScan load_ple_scan(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw ConfigError("cannot open PLE manifest '" + manifest.string() + "'");
  PleScan scan;
  scan.emitter_id = manifest.stem().string();
  const auto dir = manifest.parent_path();
  std::string raw;
  while (std::getline(in, raw)) {
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string text = trim(raw);
    if (text.empty()) continue;
    if (auto eq = text.find('='); eq != std::string::npos) {
      const std::string key = trim(text.substr(0, eq));
      if (key != "emitter") throw ParseError(manifest.string() + ": unknown manifest key '" + key + "'");
      scan.emitter_id = trim(text.substr(eq + 1));
      continue;
    }
    std::filesystem::path p(text);
    if (p.is_relative()) p = dir / p;
    scan.lines.push_back(load_ple_line(p));
  }
  if (scan.lines.empty()) throw InsufficientData(manifest.string() + ": manifest lists no line files");
  return scan;
}

}  // namespace planarcav
