#include "planarcav/synth.hpp"

#include <cmath>

namespace planarcav::synth {

std::vector<double> linspace(double a, double b, std::size_t n) {
  if (n < 2) throw ConfigError("linspace needs at least 2 points");
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

XY g2_trace(const G2Params& p, const std::vector<double>& tau, double noise, Rng& rng) {
  p.validate();
  std::normal_distribution<double> gauss(0.0, noise);
  XY out;
  for (double t : tau) {
    out.x.push_back(t);
    out.y.push_back(g2_value(p, t) + gauss(rng));
    out.sigma_y.push_back(noise);
  }
  return out;
}

XYWithErrors saturation_curve(const SaturationParams& p, const std::vector<double>& power, double rel, double abs_err,
                              Rng& rng) {
  p.validate();
  std::normal_distribution<double> unit(0.0, 1.0);
  XYWithErrors out;
  for (double P : power) {
    const double sx = rel * P;
    out.x.push_back(P + sx * unit(rng));
    out.sigma_x.push_back(sx);
    out.y.push_back(saturation_value(p, P) + abs_err * unit(rng));
    out.sigma_y.push_back(abs_err);
  }
  return out;
}

XY odmr_trace(const OdmrParams& p, const std::vector<double>& mhz, double noise, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, noise);
  XY out;
  for (double f : mhz) {
    out.x.push_back(f);
    out.y.push_back(odmr_value(p, f) + gauss(rng));
    out.sigma_y.push_back(noise);
  }
  return out;
}

XY ple_counts(const PleLineParams& p, const std::vector<double>& ghz, Rng& rng) {
  XY out;
  for (double f : ghz) {
    const double mean = std::max(ple_line_value(p, f), 0.0);
    std::poisson_distribution<long long> poisson(mean);
    out.x.push_back(f);
    out.y.push_back(mean > 0.0 ? static_cast<double>(poisson(rng)) : 0.0);
    out.sigma_y.push_back(std::sqrt(std::max(mean, 1.0)));
  }
  return out;
}

PleLineRecord ple_line(const PleLineParams& p, const PleScanSpec& spec, Rng& rng) {
  PleLineRecord line;
  line.wavemeter_min_ghz = spec.range_min_ghz;
  line.wavemeter_max_ghz = spec.range_max_ghz;
  line.duration_s = spec.duration_s;
  line.power_nw = spec.power_nw;
  const auto grid = linspace(spec.range_min_ghz, spec.range_max_ghz, spec.samples);
  const XY c = ple_counts(p, grid, rng);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    // voltage ramp is nominal; only its index matters for the conversion
    line.samples.push_back({10.0 * static_cast<double>(i) / static_cast<double>(grid.size() - 1), c.y[i]});
  }
  return line;
}

SyntheticScan ple_scan(const PleScanSpec& spec, Rng& rng) {
  if (spec.lines < 1) throw ConfigError("synthetic scan needs at least one line");
  std::normal_distribution<double> step(0.0, spec.wander_step_ghz);
  SyntheticScan out;
  out.scan.emitter_id = "synthetic";
  double a2 = spec.a2_start_ghz;
  const double sigma = sigma_from_fwhm(spec.fwhm_ghz);
  for (std::size_t i = 0; i < spec.lines; ++i) {
    if (i > 0) a2 += step(rng);
    out.a2_centers_ghz.push_back(a2);
    PleLineParams p{{spec.a1_amplitude, a2 - spec.separation_ghz, sigma}, {spec.a2_amplitude, a2, sigma}, spec.background};
    PleLineRecord line = ple_line(p, spec, rng);
    line.source = "line_" + std::to_string(i);
    out.scan.lines.push_back(std::move(line));
  }
  return out;
}

std::vector<PolarizationTrace> polarization_traces(double delta_percent, std::size_t count, double rate, Rng& rng) {
  if (!(rate > 0.0)) throw ConfigError("trace rate must be positive");
  const double frac = 0.5 - delta_percent / 100.0;
  if (!(frac >= 0.0 && frac <= 1.0)) throw ConfigError("delta_pol must lie in [-50, 50] percent");
  std::uniform_real_distribution<double> jitter(0.5, 1.5);
  std::vector<PolarizationTrace> out;
  for (std::size_t i = 0; i < count; ++i) {
    const double total = rate * jitter(rng);
    out.push_back({frac * total, (1.0 - frac) * total});
  }
  return out;
}

}  // namespace planarcav::synth
