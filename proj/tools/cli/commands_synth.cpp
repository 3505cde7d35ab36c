#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>

#include <fmt/format.h>

#include "cli/commands.hpp"
#include "planarcav/errors.hpp"
#include "planarcav/synth.hpp"

namespace planarcav::cli {
namespace {

struct SynthOptions {
  CommonOptions common;
  std::string model;
  std::uint64_t seed = 0;
  std::size_t points = 0;  // 0: model default
  // g2
  double n = 1.0, a = 0.6, tau0 = 0.0, tau1 = 4.0, tau2 = 80.0, tau_range = 200.0, noise = -1.0;
  // saturation
  double i_sat = 119.3, p_exc = 0.9, background_slope = 5.0, power_min = 0.05, power_max = 6.0;
  double power_rel_error = 0.03, count_error = 2.0;
  // odmr
  double odmr_min = 1320.0, odmr_max = 1370.0, contrast1 = -0.02, contrast2 = -0.018, center1 = 1340.0,
         center2 = 1351.6, odmr_fwhm = 4.0, odmr_offset = 1.0;
  // ple
  std::string out_dir;
  synth::PleScanSpec ple;
  bool violations = false;
  // polarization
  double delta_pol = 0.0, rate = 20000.0;
};

const std::set<std::string> kCommon = {"model", "seed", "materials-dir", "sic-index"};

std::set<std::string> model_keys(const std::string& model) {
  if (model == "g2") return {"points", "n", "a", "tau0", "tau1", "tau2", "tau-range", "noise"};
  if (model == "saturation") {
    return {"points", "i-sat", "p-exc", "background-slope", "power-min", "power-max", "power-rel-error", "count-error"};
  }
  if (model == "odmr") {
    return {"points", "noise", "odmr-min", "odmr-max", "contrast1", "contrast2", "center1", "center2", "odmr-fwhm",
            "odmr-offset"};
  }
  if (model == "ple") {
    return {"lines",    "points", "range-min", "range-max", "duration", "power-nw",   "a2-start", "separation",
            "ple-fwhm", "a1-amplitude", "a2-amplitude", "ple-background", "wander-step", "violations"};
  }
  if (model == "polarization") return {"points", "delta-pol", "rate"};
  return {};
}

EchoFilter filter_for(const std::string& model) {
  auto keys = model_keys(model);
  return [keys](const std::string& name) { return kCommon.count(name) > 0 || keys.count(name) > 0; };
}

std::size_t points_or(std::size_t points, std::size_t fallback) { return points == 0 ? fallback : points; }

void write_xy(std::ostream& os, const std::string& columns, const synth::XY& d) {
  os << columns << "\n";
  for (std::size_t i = 0; i < d.x.size(); ++i) os << num(d.x[i]) << "," << num(d.y[i]) << "," << num(d.sigma_y[i]) << "\n";
}

/// Lines that each break one acceptance rule on purpose.
std::vector<PleLineRecord> violating_lines(const synth::PleScanSpec& spec, synth::Rng& rng) {
  const double sigma = sigma_from_fwhm(spec.fwhm_ghz);
  const double a1 = spec.a2_start_ghz - spec.separation_ghz;
  const double grid_step = (spec.range_max_ghz - spec.range_min_ghz) / static_cast<double>(spec.samples - 1);
  std::vector<PleLineRecord> out;
  // A2 twelve times A1
  PleLineParams ratio{{spec.a2_amplitude / 12.0, a1, sigma}, {spec.a2_amplitude, spec.a2_start_ghz, sigma},
                      spec.background};
  out.push_back(synth::ple_line(ratio, spec, rng));
  out.back().source = "violation_amplitude_ratio";
  // A2 beyond the scanned range, only its flank visible
  PleLineParams outside{{spec.a1_amplitude, spec.range_max_ghz - spec.separation_ghz, sigma},
                        {spec.a2_amplitude, spec.range_max_ghz + 0.6 * spec.fwhm_ghz, sigma},
                        spec.background};
  out.push_back(synth::ple_line(outside, spec, rng));
  out.back().source = "violation_center_out_of_range";
  // both lines narrower than the frequency grid, centered on grid points so they stay visible
  const auto on_grid = [&](double f) {
    return spec.range_min_ghz + std::round((f - spec.range_min_ghz) / grid_step) * grid_step;
  };
  const double narrow = sigma_from_fwhm(0.5 * grid_step);
  PleLineParams subgrid{{spec.a1_amplitude, on_grid(a1), narrow},
                        {spec.a2_amplitude, on_grid(spec.a2_start_ghz), narrow},
                        spec.background};
  out.push_back(synth::ple_line(subgrid, spec, rng));
  out.back().source = "violation_linewidth";
  return out;
}

void write_ple(const SynthOptions& o, const CLI::App& sub, synth::Rng& rng) {
  if (o.out_dir.empty()) throw ConfigError("synth ple needs --out-dir");
  synth::PleScanSpec spec = o.ple;
  if (o.points != 0) spec.samples = o.points;
  const synth::SyntheticScan scan = synth::ple_scan(spec, rng);
  std::vector<PleLineRecord> lines = scan.scan.lines;
  if (o.violations) {
    for (auto& l : violating_lines(spec, rng)) lines.push_back(std::move(l));
  }
  const std::filesystem::path dir(o.out_dir);
  std::filesystem::create_directories(dir);
  std::ofstream manifest(dir / "manifest.txt");
  std::ofstream truth(dir / "truth.csv");
  if (!manifest || !truth) throw ConfigError("cannot write into '" + o.out_dir + "'");
  const EchoFilter filter = filter_for("ple");
  write_csv_header(manifest, sub, filter);
  manifest << "emitter = synthetic\n";
  write_csv_header(truth, sub, filter);
  truth << "line,file,a2_center_ghz\n";
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string name = fmt::format("line_{:03d}.txt", i);
    std::ofstream f(dir / name);
    if (!f) throw ConfigError("cannot write '" + (dir / name).string() + "'");
    f << "# " << (i < scan.a2_centers_ghz.size() ? "synthetic" : lines[i].source) << "\n";
    write_ple_line(f, lines[i]);
    manifest << name << "\n";
    truth << i << "," << name << ",";
    if (i < scan.a2_centers_ghz.size()) truth << num(scan.a2_centers_ghz[i]);
    truth << "\n";
  }
}

}  // namespace

void register_synth(CLI::App& app, Registry& reg) {
  auto o = std::make_shared<SynthOptions>();
  auto* sub = app.add_subcommand("synth", "Seeded synthetic datasets: g2, saturation, odmr, ple, polarization");
  add_common_options(*sub, o->common);
  sub->add_option("model,--model", o->model, "Dataset kind")
      ->required()
      ->check(CLI::IsMember({"g2", "saturation", "odmr", "ple", "polarization"}));
  sub->add_option("--seed", o->seed, "Random seed")->required();
  sub->add_option("--points", o->points, "Samples per trace (0: model default)");
  sub->add_option("--n", o->n, "g2: emitter number N");
  sub->add_option("--a", o->a, "g2: bunching amplitude");
  sub->add_option("--tau0", o->tau0, "g2: delay offset, ns");
  sub->add_option("--tau1", o->tau1, "g2: antibunching time, ns");
  sub->add_option("--tau2", o->tau2, "g2: bunching time, ns");
  sub->add_option("--tau-range", o->tau_range, "g2: delays span -range..range, ns");
  sub->add_option("--noise", o->noise, "g2/odmr: Gaussian noise (negative: model default)");
  sub->add_option("--i-sat", o->i_sat, "saturation: I_sat, kcps");
  sub->add_option("--p-exc", o->p_exc, "saturation: saturation power, uW");
  sub->add_option("--background-slope", o->background_slope, "saturation: linear background, kcps/uW");
  sub->add_option("--power-min", o->power_min, "saturation: lowest power, uW");
  sub->add_option("--power-max", o->power_max, "saturation: highest power, uW");
  sub->add_option("--power-rel-error", o->power_rel_error, "saturation: relative power error");
  sub->add_option("--count-error", o->count_error, "saturation: count-rate error, kcps");
  sub->add_option("--odmr-min", o->odmr_min, "odmr: first frequency, MHz");
  sub->add_option("--odmr-max", o->odmr_max, "odmr: last frequency, MHz");
  sub->add_option("--contrast1", o->contrast1, "odmr: first dip amplitude");
  sub->add_option("--contrast2", o->contrast2, "odmr: second dip amplitude");
  sub->add_option("--center1", o->center1, "odmr: first resonance, MHz");
  sub->add_option("--center2", o->center2, "odmr: second resonance, MHz");
  sub->add_option("--odmr-fwhm", o->odmr_fwhm, "odmr: resonance FWHM, MHz");
  sub->add_option("--odmr-offset", o->odmr_offset, "odmr: baseline");
  sub->add_option("--out-dir", o->out_dir, "ple: directory for line files, manifest.txt and truth.csv");
  sub->add_option("--lines", o->ple.lines, "ple: number of lines");
  sub->add_option("--range-min", o->ple.range_min_ghz, "ple: scan start, GHz");
  sub->add_option("--range-max", o->ple.range_max_ghz, "ple: scan end, GHz");
  sub->add_option("--duration", o->ple.duration_s, "ple: seconds per line");
  sub->add_option("--power-nw", o->ple.power_nw, "ple: excitation power, nW");
  sub->add_option("--a2-start", o->ple.a2_start_ghz, "ple: A2 center of the first line, GHz");
  sub->add_option("--separation", o->ple.separation_ghz, "ple: A2 - A1, GHz");
  sub->add_option("--ple-fwhm", o->ple.fwhm_ghz, "ple: line FWHM, GHz");
  sub->add_option("--a1-amplitude", o->ple.a1_amplitude, "ple: A1 peak counts");
  sub->add_option("--a2-amplitude", o->ple.a2_amplitude, "ple: A2 peak counts");
  sub->add_option("--ple-background", o->ple.background, "ple: background counts");
  sub->add_option("--wander-step", o->ple.wander_step_ghz, "ple: random-walk step std per line, GHz");
  sub->add_option("--violations", o->violations, "ple: append three lines that each break one acceptance rule");
  sub->add_option("--delta-pol", o->delta_pol, "polarization: imposed delta_pol, percent");
  sub->add_option("--rate", o->rate, "polarization: mean total count rate");

  reg.add(sub, [o, sub](const Streams& s) {
    synth::Rng rng(o->seed);
    if (o->model == "ple") {
      write_ple(*o, *sub, rng);
      return;
    }
    Sink sink(o->common.out, s.out);
    auto& os = sink.stream();
    write_csv_header(os, *sub, filter_for(o->model));
    if (o->model == "g2") {
      const G2Params p{o->n, o->a, o->tau0, o->tau1, o->tau2};
      const auto tau = synth::linspace(-o->tau_range, o->tau_range, points_or(o->points, 401));
      write_xy(os, "tau_ns,g2,sigma", synth::g2_trace(p, tau, o->noise < 0.0 ? 0.03 : o->noise, rng));
    } else if (o->model == "odmr") {
      const OdmrParams p{{o->contrast1, o->center1, o->odmr_fwhm}, {o->contrast2, o->center2, o->odmr_fwhm},
                         o->odmr_offset};
      const auto f = synth::linspace(o->odmr_min, o->odmr_max, points_or(o->points, 201));
      write_xy(os, "mhz,signal,sigma", synth::odmr_trace(p, f, o->noise < 0.0 ? 0.002 : o->noise, rng));
    } else if (o->model == "saturation") {
      const SaturationParams p{o->i_sat, o->p_exc, o->background_slope};
      const auto power = synth::linspace(o->power_min, o->power_max, points_or(o->points, 25));
      const auto d = synth::saturation_curve(p, power, o->power_rel_error, o->count_error, rng);
      os << "power_uw,sigma_power_uw,counts_kcps,sigma_counts_kcps\n";
      for (std::size_t i = 0; i < d.x.size(); ++i) {
        os << num(d.x[i]) << "," << num(d.sigma_x[i]) << "," << num(d.y[i]) << "," << num(d.sigma_y[i]) << "\n";
      }
    } else if (o->model == "polarization") {
      const auto traces = synth::polarization_traces(o->delta_pol, points_or(o->points, 100), o->rate, rng);
      os << "pol1,pol2\n";
      for (const auto& t : traces) os << num(t.pol1) << "," << num(t.pol2) << "\n";
    }
  });
}

}  // namespace planarcav::cli
