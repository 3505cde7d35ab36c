#include "planarcav/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace planarcav {
namespace {

const double kFwhmPerSigma = 2.0 * std::sqrt(2.0 * std::log(2.0));
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_same_size(std::span<const double> x, std::span<const double> y, std::span<const double> s) {
  if (x.size() != y.size() || (!s.empty() && s.size() != x.size())) {
    throw ConfigError("data columns must have the same length");
  }
}

FitData to_data(std::span<const double> x, std::span<const double> y, std::span<const double> s) {
  check_same_size(x, y, s);
  return {{x.begin(), x.end()}, {y.begin(), y.end()}, {s.begin(), s.end()}};
}

std::vector<double> smooth3(std::span<const double> y) {
  std::vector<double> s(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = std::min(y.size() - 1, i + 1);
    double sum = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) sum += y[j];
    s[i] = sum / static_cast<double>(hi - lo + 1);
  }
  return s;
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
  return m;
}

// Distance from x[i] to where |s - base| first drops below half its peak value.
double half_width(std::span<const double> x, std::span<const double> s, std::size_t i, double base) {
  const double half = 0.5 * std::abs(s[i] - base);
  double left = 0.0, right = 0.0;
  bool have_left = false, have_right = false;
  for (std::size_t j = i; j-- > 0;) {
    if (std::abs(s[j] - base) <= half) {
      left = std::abs(x[i] - x[j]);
      have_left = true;
      break;
    }
  }
  for (std::size_t j = i + 1; j < s.size(); ++j) {
    if (std::abs(s[j] - base) <= half) {
      right = std::abs(x[j] - x[i]);
      have_right = true;
      break;
    }
  }
  if (have_left && have_right) return 0.5 * (left + right);
  if (have_left) return left;
  if (have_right) return right;
  return 0.25 * std::abs(x.back() - x.front());
}

double min_spacing(std::span<const double> x) {
  double d = kInf;
  for (std::size_t i = 1; i < x.size(); ++i) d = std::min(d, std::abs(x[i] - x[i - 1]));
  return std::isfinite(d) && d > 0.0 ? d : 1.0;
}

}  // namespace

// ---- autocorrelation ----

void G2Params::validate() const {
  if (!(N >= 1.0)) throw ConfigError("g2: N must be >= 1");
  if (!(tau1 > 0.0) || !(tau2 > 0.0)) throw ConfigError("g2: tau1 and tau2 must be positive");
}

double g2_value(const G2Params& p, double tau) {
  const double t = std::abs(tau - p.tau0);
  return (1.0 - (1.0 + p.a) * std::exp(-t / p.tau1) + p.a * std::exp(-t / p.tau2)) / p.N + (p.N - 1.0) / p.N;
}

double background_ratio(double emitter, double background) {
  if (!(emitter > 0.0) || !(background >= 0.0)) {
    throw ConfigError("background ratio needs emitter intensity > 0 and background >= 0");
  }
  return emitter / (emitter + background);
}

double g2_background_correct(double g2, double rho) {
  if (!(rho > 0.0 && rho <= 1.0)) throw ConfigError("background ratio rho must lie in (0, 1]");
  return (g2 - (1.0 - rho * rho)) / (rho * rho);
}

// ---- saturation ----

void SaturationParams::validate() const {
  if (!(I_sat > 0.0) || !(P_exc > 0.0) || !(b >= 0.0)) {
    throw ConfigError("saturation model needs I_sat > 0, P_exc > 0, b >= 0");
  }
}

double saturation_value(const SaturationParams& p, double power) {
  return p.I_sat * power / (power + p.P_exc) + p.b * power;
}

// ---- line shapes ----

double lorentzian(const LorentzianPeak& l, double x) {
  const double u = 2.0 * (x - l.center) / l.fwhm;
  return l.amplitude / (1.0 + u * u);
}

double odmr_value(const OdmrParams& p, double x) { return lorentzian(p.first, x) + lorentzian(p.second, x) + p.offset; }

double GaussianPeak::fwhm() const { return fwhm_from_sigma(sigma); }

double gaussian(const GaussianPeak& g, double x) {
  const double u = (x - g.center) / g.sigma;
  return g.amplitude * std::exp(-0.5 * u * u);
}

double ple_line_value(const PleLineParams& p, double x) { return gaussian(p.first, x) + gaussian(p.second, x) + p.offset; }

double fwhm_from_sigma(double sigma) { return kFwhmPerSigma * std::abs(sigma); }
double sigma_from_fwhm(double fwhm) { return fwhm / kFwhmPerSigma; }

// ---- polarization ----

double delta_pol(std::span<const PolarizationTrace> traces) {
  if (traces.empty()) throw InsufficientData("delta_pol needs at least one trace");
  double sum = 0.0;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const double total = traces[i].pol1 + traces[i].pol2;
    if (!(total > 0.0)) throw ConfigError("trace " + std::to_string(i) + " has no counts (Pol1 + Pol2 = 0)");
    sum += 0.5 - traces[i].pol1 / total;
  }
  return 100.0 * sum / static_cast<double>(traces.size());
}

PreselectionResult preselect(std::span<const PolarizationTrace> traces, double threshold) {
  if (!(threshold > 0.0)) throw ConfigError("preselection threshold must be positive");
  PreselectionResult r;
  r.delta_pol_percent = delta_pol(traces);
  r.threshold_percent = threshold;
  r.accepted = std::abs(r.delta_pol_percent) < threshold;
  return r;
}

// ---- fit models ----

FitModel g2_fit_model() {
  FitModel m;
  m.names = {"N", "a", "tau0", "tau1", "tau2"};
  m.f = [](std::span<const double> p, double x) { return g2_value({p[0], p[1], p[2], p[3], p[4]}, x); };
  m.bounds = {{1.0, 100.0}, {0.0, 100.0}, {-kInf, kInf}, {0.0, kInf}, {0.0, kInf}};
  return m;
}

FitModel saturation_fit_model() {
  FitModel m;
  m.names = {"I_sat", "P_exc", "b"};
  m.f = [](std::span<const double> p, double x) { return saturation_value({p[0], p[1], p[2]}, x); };
  m.bounds = {{0.0, kInf}, {0.0, kInf}, {0.0, kInf}};
  return m;
}

FitModel odmr_fit_model() {
  FitModel m;
  m.names = {"A1", "c1", "w1", "A2", "c2", "w2", "offset"};
  m.f = [](std::span<const double> p, double x) {
    return odmr_value({{p[0], p[1], p[2]}, {p[3], p[4], p[5]}, p[6]}, x);
  };
  m.bounds = {{-kInf, kInf}, {-kInf, kInf}, {0.0, kInf}, {-kInf, kInf}, {-kInf, kInf}, {0.0, kInf}, {-kInf, kInf}};
  return m;
}

FitModel double_gaussian_fit_model() {
  FitModel m;
  m.names = {"A1", "c1", "s1", "A2", "c2", "s2", "offset"};
  m.f = [](std::span<const double> p, double x) {
    return ple_line_value({{p[0], p[1], p[2]}, {p[3], p[4], p[5]}, p[6]}, x);
  };
  m.bounds = {{-kInf, kInf}, {-kInf, kInf}, {0.0, kInf}, {-kInf, kInf}, {-kInf, kInf}, {0.0, kInf}, {-kInf, kInf}};
  return m;
}

// ---- g2 fit ----

G2Params guess_g2(std::span<const double> tau, std::span<const double> g2) {
  check_same_size(tau, g2, {});
  if (tau.size() < 6) throw InsufficientData("g2 fit needs at least 6 points");
  const std::vector<double> s = smooth3(g2);
  const std::size_t imin = static_cast<std::size_t>(std::min_element(s.begin(), s.end()) - s.begin());
  G2Params p;
  p.tau0 = tau[imin];
  const double dip = std::clamp(s[imin], 0.0, 0.95);
  p.N = std::clamp(1.0 / (1.0 - dip), 1.0, 100.0);
  const double top = *std::max_element(s.begin(), s.end());
  const double bunch = std::max(top - 1.0, 0.0);
  p.a = std::max(0.05, bunch * p.N);
  const double span = std::abs(tau.back() - tau.front());
  // antibunching: distance to the half-recovery level
  const double half = 0.5 * (s[imin] + 1.0);
  double t_half = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] >= half) {
      const double d = std::abs(tau[i] - p.tau0);
      if (d > 0.0 && (t_half == 0.0 || d < t_half)) t_half = d;
    }
  }
  p.tau1 = std::max(t_half > 0.0 ? t_half / std::log(2.0) : span / 20.0, min_spacing(tau));
  // bunching: 1/e decay of the excess beyond its maximum
  p.tau2 = 10.0 * p.tau1;
  if (bunch > 0.0) {
    std::size_t imax = static_cast<std::size_t>(std::max_element(s.begin(), s.end()) - s.begin());
    const bool right = tau[imax] >= p.tau0;
    for (std::size_t k = 1; k < s.size(); ++k) {
      const std::ptrdiff_t j = right ? static_cast<std::ptrdiff_t>(imax + k) : static_cast<std::ptrdiff_t>(imax) - static_cast<std::ptrdiff_t>(k);
      if (j < 0 || j >= static_cast<std::ptrdiff_t>(s.size())) break;
      if (s[static_cast<std::size_t>(j)] - 1.0 < bunch / std::exp(1.0)) {
        p.tau2 = std::max(std::abs(tau[static_cast<std::size_t>(j)] - p.tau0), 2.0 * p.tau1);
        break;
      }
    }
  }
  return p;
}

G2Fit fit_g2(std::span<const double> tau, std::span<const double> g2, std::span<const double> sigma,
             std::optional<G2Params> initial) {
  const G2Params start = initial ? *initial : guess_g2(tau, g2);
  const double init[] = {std::clamp(start.N, 1.0, 100.0), std::clamp(start.a, 0.0, 100.0), start.tau0, start.tau1, start.tau2};
  G2Fit out;
  out.fit = fit_least_squares(g2_fit_model(), to_data(tau, g2, sigma), init);
  const auto& p = out.fit.parameters;
  out.params = {p[0], p[1], p[2], p[3], p[4]};
  out.dip = (p[0] - 1.0) / p[0];
  out.dip_error = out.fit.std_errors[0] / (p[0] * p[0]);
  out.emitters = static_cast<int>(std::lround(p[0]));
  return out;
}

// ---- saturation fit ----

SaturationParams guess_saturation(std::span<const double> power, std::span<const double> counts) {
  check_same_size(power, counts, {});
  if (power.size() < 4) throw InsufficientData("saturation fit needs at least 4 points");
  std::vector<std::size_t> order(power.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return power[a] < power[b]; });
  const double i_max = *std::max_element(counts.begin(), counts.end());
  const double p_max = power[order.back()];
  SaturationParams p;
  p.I_sat = std::max(i_max, 1e-12);
  p.P_exc = p_max / 4.0;
  for (std::size_t k : order) {
    if (counts[k] >= 0.5 * i_max) {
      p.P_exc = std::max(power[k], 1e-6 * p_max);
      break;
    }
  }
  p.b = 0.01 * p.I_sat / std::max(p_max, 1e-12);
  return p;
}

SaturationFit fit_saturation(std::span<const double> power, std::span<const double> sigma_power,
                             std::span<const double> counts, std::span<const double> sigma_counts,
                             std::optional<SaturationParams> initial) {
  check_same_size(power, counts, sigma_power);
  check_same_size(power, counts, sigma_counts);
  const SaturationParams start = initial ? *initial : guess_saturation(power, counts);
  const double init[] = {start.I_sat, start.P_exc, start.b};
  OdrData data{{power.begin(), power.end()},
               {sigma_power.begin(), sigma_power.end()},
               {counts.begin(), counts.end()},
               {sigma_counts.begin(), sigma_counts.end()}};
  SaturationFit out;
  out.fit = fit_odr(saturation_fit_model(), data, init);
  out.params = {out.fit.parameters[0], out.fit.parameters[1], out.fit.parameters[2]};
  return out;
}

// ---- peak finding ----

std::vector<std::size_t> prominent_peaks(std::span<const double> y, std::size_t count) {
  const std::size_t n = y.size();
  if (n == 0) return {};
  const std::vector<double> s = smooth3(y);
  struct Candidate {
    std::size_t index;
    double prominence;
  };
  std::vector<Candidate> cand;
  for (std::size_t i = 0; i < n; ++i) {
    const bool left_ok = i == 0 || s[i] > s[i - 1];
    const bool right_ok = i + 1 == n || s[i] >= s[i + 1];
    if (!left_ok || !right_ok) continue;
    // lowest point between the peak and the nearest higher sample on each side
    // (an equal sample to the left counts as higher, so equal maxima yield one peak);
    // an endpoint peak is measured against its one inner side
    double base = -kInf;
    if (i > 0) {
      double lm = s[i];
      for (std::size_t j = i; j-- > 0 && s[j] < s[i];) lm = std::min(lm, s[j]);
      base = std::max(base, lm);
    }
    if (i + 1 < n) {
      double rm = s[i];
      for (std::size_t j = i + 1; j < n && s[j] <= s[i]; ++j) rm = std::min(rm, s[j]);
      base = std::max(base, rm);
    }
    cand.push_back({i, std::isfinite(base) ? s[i] - base : 0.0});
  }
  std::stable_sort(cand.begin(), cand.end(),
                   [](const Candidate& a, const Candidate& b) { return a.prominence > b.prominence; });
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < cand.size() && out.size() < count; ++k) out.push_back(cand[k].index);
  std::sort(out.begin(), out.end());
  return out;
}

// ---- ODMR fit ----

OdmrParams guess_odmr(std::span<const double> x, std::span<const double> y) {
  check_same_size(x, y, {});
  if (x.size() < 8) throw InsufficientData("ODMR fit needs at least 8 points");
  const std::vector<double> s = smooth3(y);
  const double offset = median_of(s);
  std::vector<double> dev(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) dev[i] = std::abs(s[i] - offset);
  std::vector<std::size_t> peaks = prominent_peaks(dev, 2);
  const double step = min_spacing(x);
  OdmrParams p;
  p.offset = offset;
  auto make = [&](std::size_t i) {
    LorentzianPeak l;
    l.center = x[i];
    l.amplitude = s[i] - offset;
    l.fwhm = std::max(2.0 * half_width(x, s, i, offset), 2.0 * step);
    return l;
  };
  p.first = make(peaks.front());
  if (peaks.size() > 1) {
    p.second = make(peaks.back());
  } else {
    p.second = p.first;
    p.second.center += p.first.fwhm;
    p.second.amplitude *= 0.5;
  }
  const double gap = std::abs(p.second.center - p.first.center);
  if (gap > 0.0) {
    p.first.fwhm = std::min(p.first.fwhm, gap);
    p.second.fwhm = std::min(p.second.fwhm, gap);
  }
  return p;
}

OdmrFit fit_odmr(std::span<const double> x, std::span<const double> y, std::span<const double> sigma,
                 std::optional<OdmrParams> initial) {
  const OdmrParams g = initial ? *initial : guess_odmr(x, y);
  const double init[] = {g.first.amplitude, g.first.center, g.first.fwhm, g.second.amplitude,
                         g.second.center, g.second.fwhm, g.offset};
  OdmrFit out;
  out.fit = fit_least_squares(odmr_fit_model(), to_data(x, y, sigma), init);
  const auto& p = out.fit.parameters;
  out.params = {{p[0], p[1], p[2]}, {p[3], p[4], p[5]}, p[6]};
  if (out.params.second.center < out.params.first.center) std::swap(out.params.first, out.params.second);
  out.splitting = std::abs(p[4] - p[1]);
  const auto& C = out.fit.covariance;
  out.splitting_error = std::sqrt(std::max(0.0, C(1, 1) + C(4, 4) - 2.0 * C(1, 4)));
  return out;
}

// ---- double Gaussian fit ----

PleLineParams guess_double_gaussian(std::span<const double> x, std::span<const double> y) {
  check_same_size(x, y, {});
  if (x.size() < 8) throw InsufficientData("double-Gaussian fit needs at least 8 points");
  const std::vector<double> s = smooth3(y);
  std::vector<double> sorted = s;
  std::sort(sorted.begin(), sorted.end());
  const double offset = sorted[sorted.size() / 10];
  const std::vector<std::size_t> peaks = prominent_peaks(y, 2);
  const double step = min_spacing(x);
  auto make = [&](std::size_t i) {
    GaussianPeak g;
    g.center = x[i];
    g.amplitude = std::max(s[i] - offset, 0.0);
    g.sigma = std::max(half_width(x, s, i, offset) / std::sqrt(2.0 * std::log(2.0)), step);
    return g;
  };
  PleLineParams p;
  p.offset = offset;
  p.first = make(peaks.front());
  if (peaks.size() > 1) {
    p.second = make(peaks.back());
    const double gap = std::abs(p.second.center - p.first.center);
    p.first.sigma = std::min(p.first.sigma, std::max(gap / 2.0, step));
    p.second.sigma = std::min(p.second.sigma, std::max(gap / 2.0, step));
  } else {
    p.second = p.first;
    p.second.center += 3.0 * p.first.sigma;
    p.second.amplitude *= 0.1;
  }
  return p;
}

DoubleGaussianFit fit_double_gaussian(std::span<const double> x, std::span<const double> y,
                                      std::span<const double> sigma, std::optional<PleLineParams> initial) {
  const PleLineParams g = initial ? *initial : guess_double_gaussian(x, y);
  const double init[] = {g.first.amplitude, g.first.center, g.first.sigma, g.second.amplitude,
                         g.second.center, g.second.sigma, g.offset};
  DoubleGaussianFit out;
  out.fit = fit_least_squares(double_gaussian_fit_model(), to_data(x, y, sigma), init);
  const auto& p = out.fit.parameters;
  out.params = {{p[0], p[1], p[2]}, {p[3], p[4], p[5]}, p[6]};
  if (out.params.second.center < out.params.first.center) std::swap(out.params.first, out.params.second);
  return out;
}

}  // namespace planarcav
