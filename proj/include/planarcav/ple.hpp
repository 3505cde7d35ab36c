#pragma once

// Photoluminescence-excitation line analysis: ramp conversion, constrained
// double-Gaussian fits, linewidth statistics and spectral wandering, plus
// cross-sample statistics of saturation count rates.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "planarcav/models.hpp"

namespace planarcav {

struct RampSample {
  double voltage;
  double counts;
};

/// One laser sweep. With `reversed` the ramp runs from the maximum to the
/// minimum wavemeter reading, so frequency decreases with sample index.
struct PleLineRecord {
  std::vector<RampSample> samples;
  double wavemeter_min_ghz = 0.0;
  double wavemeter_max_ghz = 0.0;
  double duration_s = 0.0;
  double power_nw = 0.0;
  bool reversed = false;
  std::string source;  // file name or label, for diagnostics

  void validate() const;
};

struct PleScan {
  std::string emitter_id;
  std::vector<PleLineRecord> lines;
};

struct FrequencyPoint {
  double ghz;
  double counts;
};

std::vector<FrequencyPoint> ramp_to_frequency(const PleLineRecord& line);

enum class Rejection {
  non_converged,
  center_out_of_range,
  nonnegativity,
  linewidth,
  amplitude_ratio,
  separation_deviation,
  r_squared,
};

std::string to_string(Rejection r);

struct ConstraintSet {
  bool centers_in_range = true;
  bool nonnegative = true;          // amplitudes and offset
  bool min_linewidth = true;        // both FWHM above the median grid step
  double max_amplitude_ratio = 10.0;
  double max_separation_deviation = 0.4;  // relative to the reference separation
  double r2_threshold = 0.46;

  void validate() const;
  /// "loose" (0.46) or "strict" (0.7923).
  static ConstraintSet preset(const std::string& name);
};

struct PleLineFit {
  std::size_t line_index = 0;
  double power_nw = 0.0;
  double duration_s = 0.0;
  bool has_fit = false;  // false when no fit could be attempted
  bool accepted = false;
  std::vector<Rejection> violations;  // in rule order; the first is the primary reason
  std::string message;
  PleLineParams params;  // first = A1 (lower frequency), second = A2
  std::vector<double> std_errors;  // A1, c1, s1, A2, c2, s2, offset order after sorting
  double r_squared = 0.0;
  double grid_step_ghz = 0.0;
  double range_min_ghz = 0.0;
  double range_max_ghz = 0.0;

  std::optional<Rejection> primary() const;
  double a1_fwhm() const { return params.first.fwhm(); }
  double a2_fwhm() const { return params.second.fwhm(); }
  double separation() const { return params.second.center - params.first.center; }
};

/// All violated rules for a parameter set, in rule order. The separation rule
/// is skipped without a reference.
std::vector<Rejection> check_constraints(const PleLineParams& params, double r_squared, double range_min,
                                         double range_max, double grid_step, const ConstraintSet& constraints,
                                         std::optional<double> reference_separation);

PleLineFit fit_ple_line(const PleLineRecord& line, const ConstraintSet& constraints,
                        std::optional<double> reference_separation = std::nullopt);

struct PleScanResult {
  std::string emitter_id;
  std::vector<PleLineFit> lines;
  std::optional<double> reference_separation;
};

/// Fits every line. Without an explicit reference, the separation of the
/// first line that passes all other rules becomes the reference.
PleScanResult analyze_scan(const PleScan& scan, const ConstraintSet& constraints,
                           std::optional<double> reference_separation = std::nullopt, int threads = 0);

struct LinewidthGroup {
  double power_nw = 0.0;
  std::size_t total = 0;
  std::size_t accepted = 0;
  bool empty = true;  // no accepted line; the statistics below are NaN
  double a1_mean = 0.0, a1_std = 0.0;
  double a2_mean = 0.0, a2_std = 0.0;
};

/// Mean and population standard deviation of the A1 / A2 FWHM per excitation power.
std::vector<LinewidthGroup> linewidth_statistics(std::span<const PleLineFit> lines);

struct WanderingSeries {
  std::vector<double> rates_mhz_per_s;
  std::vector<std::size_t> first_line;  // index of the earlier line of each pair
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

/// Rate of the A2 center between consecutive accepted lines. Throws
/// InsufficientData when no consecutive accepted pair exists.
WanderingSeries spectral_wandering(std::span<const PleLineFit> lines);

// ---- saturation statistics across samples ----

struct SaturationSample {
  double i_sat;
  double error;  // 1 sigma from the fit
};

struct GroupSummary {
  std::string name;
  std::size_t count = 0;
  double mean = 0.0;
  double std = 0.0;          // population
  double uncertainty = 0.0;  // std when count > 1, else the fit error
  double max = 0.0;
  double max_error = 0.0;
  double ratio_mean = 0.0;  // mean / reference mean
  double ratio_mean_error = 0.0;
  double ratio_max = 0.0;  // max / reference mean
  double ratio_max_error = 0.0;
};

struct EnhancementStatistics {
  std::string reference;
  std::vector<GroupSummary> groups;
};

EnhancementStatistics enhancement_statistics(
    const std::vector<std::pair<std::string, std::vector<SaturationSample>>>& groups,
    const std::string& reference_group);

// ---- files ----

/// Header lines `key = value` (wavemeter_min_ghz, wavemeter_max_ghz,
/// duration_s, power_nw, optional reversed), then `voltage counts` rows.
PleLineRecord parse_ple_line(std::istream& in, const std::string& origin = "<stream>");
PleLineRecord load_ple_line(const std::filesystem::path& path);
void write_ple_line(std::ostream& out, const PleLineRecord& line);

/// One line-file path per row, relative to the manifest; optional `emitter = id`.
PleScan load_ple_scan(const std::filesystem::path& manifest);

}  // namespace planarcav
