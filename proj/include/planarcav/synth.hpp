#pragma once

// Seeded synthetic datasets for every analysis model.

#include <cstdint>
#include <random>
#include <vector>

#include "planarcav/models.hpp"
#include "planarcav/ple.hpp"

namespace planarcav::synth {

using Rng = std::mt19937_64;

struct XY {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> sigma_y;
};

struct XYWithErrors {
  std::vector<double> x;
  std::vector<double> sigma_x;
  std::vector<double> y;
  std::vector<double> sigma_y;
};

std::vector<double> linspace(double a, double b, std::size_t n);

/// Gaussian noise of fixed standard deviation.
XY g2_trace(const G2Params& p, const std::vector<double>& tau_ns, double noise, Rng& rng);

/// Relative power error and absolute count-rate error, both applied to the
/// recorded values around the true ones.
XYWithErrors saturation_curve(const SaturationParams& p, const std::vector<double>& power_uw, double power_rel_error,
                              double count_error, Rng& rng);

XY odmr_trace(const OdmrParams& p, const std::vector<double>& mhz, double noise, Rng& rng);

/// Poisson counts around the line shape.
XY ple_counts(const PleLineParams& p, const std::vector<double>& ghz, Rng& rng);

struct PleScanSpec {
  std::size_t lines = 50;
  std::size_t samples = 400;
  double range_min_ghz = -4.0;
  double range_max_ghz = 4.0;
  double duration_s = 4.0;
  double power_nw = 10.0;
  double a2_start_ghz = 0.5;
  double separation_ghz = 1.0;  // A2 - A1
  double fwhm_ghz = 0.2;
  double a1_amplitude = 200.0;
  double a2_amplitude = 300.0;
  double background = 5.0;
  double wander_step_ghz = 0.104;  // per line, standard deviation
};

struct SyntheticScan {
  PleScan scan;
  std::vector<double> a2_centers_ghz;  // injected
};

SyntheticScan ple_scan(const PleScanSpec& spec, Rng& rng);

/// A single line on the scan grid with the given shape.
PleLineRecord ple_line(const PleLineParams& p, const PleScanSpec& spec, Rng& rng);

/// Constant traces with Pol1 / (Pol1 + Pol2) = 1/2 - delta_percent / 100.
std::vector<PolarizationTrace> polarization_traces(double delta_percent, std::size_t count, double rate, Rng& rng);

}  // namespace planarcav::synth
