#include <cmath>
#include <memory>

#include "cli/commands.hpp"
#include "planarcav/errors.hpp"
#include "planarcav/models.hpp"

namespace planarcav::cli {
namespace {

json fit_json(const FitResult& fit) {
  json params = json::object();
  for (std::size_t i = 0; i < fit.names.size(); ++i) {
    params[fit.names[i]] = {{"value", fit.parameters[i]}, {"error", fit.std_errors[i]}};
  }
  json j;
  j["parameters"] = params;
  j["chi_squared"] = fit.chi_squared;
  j["dof"] = fit.dof;
  j["r_squared"] = fit.r_squared;
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  j["message"] = fit.message;
  return j;
}

json header(const CLI::App& sub) {
  json j;
  j["command"] = sub.get_name();
  j["config"] = config_json(sub);
  return j;
}

struct Table {
  std::vector<double> x, y, sigma;
};

/// Two columns plus an optional third holding 1-sigma errors of y.
Table xy_table(const std::string& path) {
  const auto rows = read_table(path, 2);
  Table t{column(rows, 0), column(rows, 1), {}};
  bool all_have_sigma = true;
  for (const auto& r : rows) all_have_sigma = all_have_sigma && r.size() >= 3;
  if (all_have_sigma) t.sigma = column(rows, 2);
  return t;
}

void add_fit_odmr(CLI::App& app, Registry& reg) {
  struct Opts {
    CommonOptions common;
    std::string input;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("fit-odmr", "Double-Lorentzian fit of an ODMR trace (columns MHz, signal[, sigma])");
  add_common_options(*sub, o->common);
  sub->add_option("--input", o->input, "Data file")->required();
  reg.add(sub, [o, sub](const Streams& s) {
    const Table t = xy_table(o->input);
    const OdmrFit r = fit_odmr(t.x, t.y, t.sigma);
    json j = header(*sub);
    j["fit"] = fit_json(r.fit);
    j["splitting_mhz"] = r.splitting;
    j["splitting_error_mhz"] = r.splitting_error;
    Sink sink(o->common.out, s.out);
    write_json(sink.stream(), j);
  });
}

void add_fit_g2(CLI::App& app, Registry& reg) {
  struct Opts {
    CommonOptions common;
    std::string input;
    double rho = 1.0;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("fit-g2", "Autocorrelation fit (columns tau_ns, g2[, sigma])");
  add_common_options(*sub, o->common);
  sub->add_option("--input", o->input, "Data file")->required();
  sub->add_option("--rho", o->rho, "Signal-to-total ratio for background correction (1: none)")
      ->check(CLI::Range(0.0, 1.0));
  reg.add(sub, [o, sub](const Streams& s) {
    Table t = xy_table(o->input);
    if (o->rho != 1.0) {
      for (auto& v : t.y) v = g2_background_correct(v, o->rho);
      for (auto& v : t.sigma) v /= o->rho * o->rho;
    }
    const G2Fit r = fit_g2(t.x, t.y, t.sigma);
    json j = header(*sub);
    j["fit"] = fit_json(r.fit);
    j["dip"] = r.dip;
    j["dip_error"] = r.dip_error;
    j["emitters"] = r.emitters;
    j["single_photon_emitter"] = r.dip < 0.5;
    Sink sink(o->common.out, s.out);
    write_json(sink.stream(), j);
  });
}

void add_fit_saturation(CLI::App& app, Registry& reg) {
  struct Opts {
    CommonOptions common;
    std::string input;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand(
      "fit-saturation", "Saturation fit by orthogonal distance regression (columns P_uW, sigma_P, counts, sigma_counts)");
  add_common_options(*sub, o->common);
  sub->add_option("--input", o->input, "Data file")->required();
  reg.add(sub, [o, sub](const Streams& s) {
    const auto rows = read_table(o->input, 4);
    const SaturationFit r = fit_saturation(column(rows, 0), column(rows, 1), column(rows, 2), column(rows, 3));
    json j = header(*sub);
    j["fit"] = fit_json(r.fit);
    Sink sink(o->common.out, s.out);
    write_json(sink.stream(), j);
  });
}

void add_preselect(CLI::App& app, Registry& reg) {
  struct Opts {
    CommonOptions common;
    std::string input;
    double threshold = 1.5;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("preselect", "Polarization preselection from a two-detector trace (columns pol1, pol2)");
  add_common_options(*sub, o->common);
  sub->add_option("--input", o->input, "Trace file")->required();
  sub->add_option("--threshold", o->threshold, "Acceptance threshold on |delta_pol|, percent")
      ->check(CLI::PositiveNumber);
  reg.add(sub, [o, sub](const Streams& s) {
    const auto rows = read_table(o->input, 2);
    std::vector<PolarizationTrace> traces;
    for (const auto& r : rows) traces.push_back({r[0], r[1]});
    const PreselectionResult r = preselect(traces, o->threshold);
    json j = header(*sub);
    j["delta_pol_percent"] = r.delta_pol_percent;
    j["threshold_percent"] = r.threshold_percent;
    j["accepted"] = r.accepted;
    if (r.delta_pol_percent < 0.0) {
      j["note"] = "delta_pol is negative (detector 1 above one half); the threshold applies to its magnitude";
    }
    Sink sink(o->common.out, s.out);
    write_json(sink.stream(), j);
  });
}

}  // namespace

void register_fit(CLI::App& app, Registry& reg) {
  add_fit_odmr(app, reg);
  add_fit_g2(app, reg);
  add_fit_saturation(app, reg);
  add_preselect(app, reg);
}

}  // namespace planarcav::cli
