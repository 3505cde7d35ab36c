#include <cmath>
#include <fstream>
#include <memory>
#include <optional>

#include "cli/commands.hpp"
#include "planarcav/errors.hpp"
#include "planarcav/ple.hpp"

namespace planarcav::cli {
namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void write_line_table(std::ostream& os, const CLI::App& sub, const PleScanResult& result) {
  write_csv_header(os, sub);
  os << "line,power_nw,duration_s,accepted,reason,violations,a1_center_ghz,a1_fwhm_ghz,a2_center_ghz,a2_fwhm_ghz,"
        "a1_amplitude,a2_amplitude,offset,separation_ghz,r_squared\n";
  for (const auto& l : result.lines) {
    std::string violations;
    for (std::size_t i = 0; i < l.violations.size(); ++i) {
      violations += (i ? ";" : "") + to_string(l.violations[i]);
    }
    const auto primary = l.primary();
    os << l.line_index << "," << num(l.power_nw) << "," << num(l.duration_s) << "," << (l.accepted ? 1 : 0) << ","
       << (primary ? to_string(*primary) : std::string(l.has_fit ? "" : "no_fit")) << "," << violations << ",";
    if (l.has_fit) {
      os << num(l.params.first.center) << "," << num(l.a1_fwhm()) << "," << num(l.params.second.center) << ","
         << num(l.a2_fwhm()) << "," << num(l.params.first.amplitude) << "," << num(l.params.second.amplitude) << ","
         << num(l.params.offset) << "," << num(l.separation()) << "," << num(l.r_squared) << "\n";
    } else {
      os << ",,,,,,,,\n";
    }
  }
}

void add_ple_analyze(CLI::App& app, Registry& reg) {
  struct Opts {
    CommonOptions common;
    std::string manifest;
    std::string out_lines;
    std::string constraints = "loose";
    std::optional<double> r2_threshold;
    double max_amplitude_ratio = 10.0;
    double max_separation_deviation = 0.4;
    std::optional<double> reference_separation;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("ple-analyze",
                                 "Fit every PLE line of a scan, apply the acceptance rules, report linewidths and "
                                 "spectral wandering (JSON; per-line CSV with --out-lines)");
  add_common_options(*sub, o->common);
  sub->add_option("--manifest", o->manifest, "Scan manifest listing line files in order")->required();
  sub->add_option("--out-lines", o->out_lines, "Per-line fit table (CSV)");
  sub->add_option("--constraints", o->constraints, "Threshold preset: loose (r2 0.46) or strict (r2 0.7923)")
      ->check(CLI::IsMember({"loose", "strict"}));
  sub->add_option("--r2-threshold", o->r2_threshold, "Override of the preset r2 acceptance threshold");
  sub->add_option("--max-amplitude-ratio", o->max_amplitude_ratio, "Largest accepted A1/A2 amplitude ratio");
  sub->add_option("--max-separation-deviation", o->max_separation_deviation,
                  "Largest accepted relative deviation from the reference separation");
  sub->add_option("--reference-separation", o->reference_separation,
                  "A2 - A1 separation in GHz (default: from the first otherwise accepted line)");
  reg.add(sub, [o, sub](const Streams& s) {
    ConstraintSet constraints = ConstraintSet::preset(o->constraints);
    if (o->r2_threshold) constraints.r2_threshold = *o->r2_threshold;
    constraints.max_amplitude_ratio = o->max_amplitude_ratio;
    constraints.max_separation_deviation = o->max_separation_deviation;
    constraints.validate();
    const PleScan scan = load_ple_scan(o->manifest);
    const PleScanResult result = analyze_scan(scan, constraints, o->reference_separation, o->common.threads);

    if (!o->out_lines.empty()) {
      std::ofstream lines(o->out_lines);
      if (!lines) throw ConfigError("cannot write '" + o->out_lines + "'");
      write_line_table(lines, *sub, result);
    }

    json j;
    j["command"] = sub->get_name();
    j["config"] = config_json(*sub);
    j["emitter_id"] = result.emitter_id;
    j["lines"] = result.lines.size();
    std::size_t accepted = 0;
    json rejections = json::object();
    for (const auto& l : result.lines) {
      if (l.accepted) ++accepted;
      const auto p = l.primary();
      const std::string key = p ? to_string(*p) : (l.has_fit ? "" : "no_fit");
      if (!key.empty()) rejections[key] = rejections.value(key, 0) + 1;
    }
    j["accepted"] = accepted;
    j["rejections"] = rejections;
    j["reference_separation_ghz"] = result.reference_separation ? json(*result.reference_separation) : json(nullptr);

    json groups = json::array();
    for (const auto& g : linewidth_statistics(result.lines)) {
      groups.push_back({{"power_nw", g.power_nw},
                        {"lines", g.total},
                        {"accepted", g.accepted},
                        {"a1_fwhm_mean_ghz", number_or_null(g.a1_mean)},
                        {"a1_fwhm_std_ghz", number_or_null(g.a1_std)},
                        {"a2_fwhm_mean_ghz", number_or_null(g.a2_mean)},
                        {"a2_fwhm_std_ghz", number_or_null(g.a2_std)}});
    }
    j["linewidths"] = groups;

    try {
      const WanderingSeries w = spectral_wandering(result.lines);
      j["wandering"] = {{"pairs", w.rates_mhz_per_s.size()},
                        {"mean_mhz_per_s", w.mean},
                        {"std_mhz_per_s", w.std},
                        {"rates_mhz_per_s", w.rates_mhz_per_s},
                        {"first_line", w.first_line}};
    } catch (const InsufficientData& e) {
      j["wandering"] = {{"pairs", 0}, {"message", e.what()}};
    }
    Sink sink(o->common.out, s.out);
    write_json(sink.stream(), j);
  });
}

}  // namespace

void register_ple(CLI::App& app, Registry& reg) { add_ple_analyze(app, reg); }

}  // namespace planarcav::cli
