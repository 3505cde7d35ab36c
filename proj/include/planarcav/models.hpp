#pragma once

// Phenomenological models for emitter characterization and their fits.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "planarcav/fit.hpp"

namespace planarcav {

// ---- photon autocorrelation ----

struct G2Params {
  double N = 1.0;      // emitter count, >= 1
  double a = 0.0;      // bunching amplitude
  double tau0 = 0.0;   // ns
  double tau1 = 1.0;   // antibunching time, ns
  double tau2 = 10.0;  // bunching time, ns

  void validate() const;
};

/// (1/N)[1 - (1+a) e^{-|t-t0|/t1} + a e^{-|t-t0|/t2}] + (N-1)/N
double g2_value(const G2Params& p, double tau_ns);

/// rho = I_em / (I_em + I_bg), in (0, 1].
double background_ratio(double emitter_intensity, double background_intensity);

/// (g2 - (1 - rho^2)) / rho^2
double g2_background_correct(double g2_measured, double rho);

// ---- saturation ----

struct SaturationParams {
  double I_sat = 1.0;  // counts/s
  double P_exc = 1.0;  // saturation power, uW
  double b = 0.0;      // linear background, counts/s per uW

  void validate() const;
};

/// I_sat P / (P + P_exc) + b P
double saturation_value(const SaturationParams& p, double power_uw);

// ---- line shapes ----

struct LorentzianPeak {
  double amplitude = 0.0;  // signed
  double center = 0.0;
  double fwhm = 1.0;
};

struct OdmrParams {
  LorentzianPeak first;
  LorentzianPeak second;
  double offset = 0.0;
};

double lorentzian(const LorentzianPeak& peak, double x);
double odmr_value(const OdmrParams& p, double mhz);

struct GaussianPeak {
  double amplitude = 0.0;
  double center = 0.0;
  double sigma = 1.0;

  double fwhm() const;
};

struct PleLineParams {
  GaussianPeak first;
  GaussianPeak second;
  double offset = 0.0;
};

double gaussian(const GaussianPeak& peak, double x);
double ple_line_value(const PleLineParams& p, double ghz);

/// FWHM = 2 sqrt(2 ln 2) sigma
double fwhm_from_sigma(double sigma);
double sigma_from_fwhm(double fwhm);

// ---- polarization preselection ----

struct PolarizationTrace {
  double pol1;  // counts/s on detector 1
  double pol2;  // counts/s on detector 2
};

/// (100 / N) sum (1/2 - Pol1 / (Pol1 + Pol2)), signed, in percent.
double delta_pol(std::span<const PolarizationTrace> traces);

struct PreselectionResult {
  double delta_pol_percent = 0.0;
  double threshold_percent = 1.5;
  bool accepted = false;  // |delta_pol| < threshold
};

PreselectionResult preselect(std::span<const PolarizationTrace> traces, double threshold_percent = 1.5);

// ---- fits ----

/// Parameter order: N, a, tau0, tau1, tau2. N is continuous in [1, 100].
FitModel g2_fit_model();
/// Parameter order: I_sat, P_exc, b; all bounded below by 0.
FitModel saturation_fit_model();
/// Parameter order: A1, c1, w1, A2, c2, w2, offset (w = FWHM > 0).
FitModel odmr_fit_model();
/// Parameter order: A1, c1, s1, A2, c2, s2, offset (s = sigma > 0). Amplitudes unconstrained.
FitModel double_gaussian_fit_model();

struct G2Fit {
  FitResult fit;
  G2Params params;
  double dip = 0.0;  // (N - 1) / N
  double dip_error = 0.0;
  int emitters = 1;  // round(N)
};

G2Fit fit_g2(std::span<const double> tau_ns, std::span<const double> g2, std::span<const double> sigma = {},
             std::optional<G2Params> initial = std::nullopt);
G2Params guess_g2(std::span<const double> tau_ns, std::span<const double> g2);

struct SaturationFit {
  FitResult fit;
  SaturationParams params;
};

/// Orthogonal distance regression with errors on both power and count rate.
SaturationFit fit_saturation(std::span<const double> power_uw, std::span<const double> sigma_power,
                             std::span<const double> counts, std::span<const double> sigma_counts,
                             std::optional<SaturationParams> initial = std::nullopt);
SaturationParams guess_saturation(std::span<const double> power_uw, std::span<const double> counts);

struct OdmrFit {
  FitResult fit;
  OdmrParams params;
  double splitting = 0.0;  // |c2 - c1|
  double splitting_error = 0.0;
};

OdmrFit fit_odmr(std::span<const double> mhz, std::span<const double> signal, std::span<const double> sigma = {},
                 std::optional<OdmrParams> initial = std::nullopt);
OdmrParams guess_odmr(std::span<const double> mhz, std::span<const double> signal);

struct DoubleGaussianFit {
  FitResult fit;
  PleLineParams params;  // first = lower center
};

DoubleGaussianFit fit_double_gaussian(std::span<const double> ghz, std::span<const double> counts,
                                      std::span<const double> sigma = {},
                                      std::optional<PleLineParams> initial = std::nullopt);

/// Two most prominent maxima after 3-bin smoothing, endpoints included.
/// Returns sample indices ordered by position; a single index when only one maximum exists.
std::vector<std::size_t> prominent_peaks(std::span<const double> y, std::size_t count = 2);
PleLineParams guess_double_gaussian(std::span<const double> ghz, std::span<const double> counts);

}  // namespace planarcav
