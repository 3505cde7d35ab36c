#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>

#include "cli/commands.hpp"
#include "planarcav/errors.hpp"

namespace planarcav::cli {
namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  return parts;
}

double to_double(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(what + ": '" + text + "' is not a number");
}

/// "param:min:max:count"
SweepAxis parse_axis(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 4) throw ConfigError("sweep axis '" + text + "' must read param:min:max:count");
  SweepAxis axis;
  axis.parameter = parse_design_axis(parts[0]);
  axis.min = to_double(parts[1], "sweep axis");
  axis.max = to_double(parts[2], "sweep axis");
  const double count = to_double(parts[3], "sweep axis");
  if (!(count >= 1.0) || count != std::floor(count)) throw ConfigError("sweep axis count must be a positive integer");
  axis.count = static_cast<std::size_t>(count);
  axis.validate();
  return axis;
}

/// "param:lower:upper"
FreeParameter parse_free(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw ConfigError("free parameter '" + text + "' must read param:lower:upper");
  FreeParameter p{parse_design_axis(parts[0]), {to_double(parts[1], "bound"), to_double(parts[2], "bound")}};
  if (!(p.bounds.lower < p.bounds.upper)) throw ConfigError("free parameter '" + text + "' has an empty range");
  return p;
}

std::vector<double> wavelength_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo) || !(lo > 0.0)) {
    throw ConfigError("wavelength grid needs 0 < lambda-min <= lambda-max and a positive step");
  }
  SpectralWindow w{lo, hi, step};
  return w.grid();
}

json design_json(const AntennaDesign& d) {
  json j;
  j["silica_nm"] = d.silica_nm;
  j["upper_silver_nm"] = d.upper_silver_nm;
  j["sic_nm"] = d.sic_nm;
  j["dipole_rel_pos"] = d.dipole_rel_pos;
  j["lower_silver_nm"] = d.lower_silver_nm;
  j["orientation"] = to_string(d.orientation);
  return j;
}

struct Preset {
  std::string x, y;
};

Preset sweep_preset(const std::string& name) {
  if (name == "fig1c") return {"upper_silver_nm:5:60:100", "sic_nm:100:250:100"};
  if (name == "fig1e") return {"sic_nm:100:600:101", "dipole_rel_pos:0:1:21"};
  if (name == "supp-sweeps") return {"silica_nm:0:400:81", "upper_silver_nm:5:60:56"};
  throw ConfigError("unknown preset '" + name + "'");
}

void add_reflectivity(CLI::App& app, Registry& reg) {
  struct Opts {
    CommonOptions common;
    std::string stack;
    double lambda_min = 900.0, lambda_max = 1150.0, lambda_step = 1.0;
    double angle_deg = 0.0;
    std::string pol = "avg";
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("reflectivity", "Reflectivity spectrum of a layer stack (CSV wavelength_nm,R)");
  add_common_options(*sub, o->common);
  sub->add_option("--stack", o->stack, "Stack description file")->required();
  sub->add_option("--lambda-min", o->lambda_min, "First wavelength, nm");
  sub->add_option("--lambda-max", o->lambda_max, "Last wavelength, nm");
  sub->add_option("--lambda-step", o->lambda_step, "Wavelength step, nm");
  sub->add_option("--angle-deg", o->angle_deg, "Angle of incidence in the incidence medium, degrees")
      ->check(CLI::Range(0.0, 90.0));
  sub->add_option("--pol", o->pol, "Polarization")->check(CLI::IsMember({"s", "p", "avg"}));
  reg.add(sub, [o, sub](const Streams& s) {
    const auto lib = o->common.library();
    const Stack stack = load_stack(o->stack, lib);
    const auto grid = wavelength_grid(o->lambda_min, o->lambda_max, o->lambda_step);
    const auto spectrum = reflectivity_spectrum(stack, grid, o->angle_deg * std::numbers::pi / 180.0,
                                                parse_polarization_mode(o->pol));
    Sink sink(o->common.out, s.out);
    auto& os = sink.stream();
    write_csv_header(os, *sub);
    os << "wavelength_nm,R\n";
    for (const auto& p : spectrum) os << num(p.wavelength_nm) << "," << num(p.R) << "\n";
  });
}

void add_enhance(CLI::App& app, Registry& reg) {
  struct Opts {
    CommonOptions common;
    DesignOptions design;
    std::string stack;
    int dipole_layer = -1;
    double lambda_min = 900.0, lambda_max = 1150.0, lambda_step = 5.0;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand(
      "enhance", "Collected-power enhancement spectrum (CSV wavelength_nm,enhancement); antenna design unless --stack");
  add_common_options(*sub, o->common);
  o->design.add_to(*sub, false);
  sub->add_option("--stack", o->stack, "Stack description file (default: the antenna design options)");
  sub->add_option("--dipole-layer", o->dipole_layer, "Index of the host layer in --stack (0 = first listed)");
  sub->add_option("--lambda-min", o->lambda_min, "First wavelength, nm");
  sub->add_option("--lambda-max", o->lambda_max, "Last wavelength, nm");
  sub->add_option("--lambda-step", o->lambda_step, "Wavelength step, nm");
  reg.add(sub, [o, sub](const Streams& s) {
    const auto lib = o->common.library();
    const auto grid = wavelength_grid(o->lambda_min, o->lambda_max, o->lambda_step);
    const auto geom = geometry(o->design.na, o->design.quad_order);
    EnhancementOptions options;
    options.reference = parse_reference_model(o->design.reference);
    const AntennaDesign design = o->design.resolved_design();
    AntennaModel model;
    if (o->stack.empty()) {
      model = build_antenna(design, AntennaMaterials::from(lib));
    } else {
      model.stack = load_stack(o->stack, lib);
      if (o->dipole_layer < 0 || static_cast<std::size_t>(o->dipole_layer) >= model.stack.layers.size()) {
        throw ConfigError("--dipole-layer must index a layer of the stack");
      }
      model.dipole = DipoleConfig::relative(model.stack, static_cast<std::size_t>(o->dipole_layer),
                                            design.dipole_rel_pos, design.orientation);
    }
    const auto spectrum = enhancement_spectrum(model.stack, model.dipole, grid, geom, options);
    Sink sink(o->common.out, s.out);
    auto& os = sink.stream();
    write_csv_header(os, *sub);
    os << "wavelength_nm,enhancement\n";
    for (const auto& p : spectrum) os << num(p.wavelength_nm) << "," << num(p.enhancement) << "\n";
  });
}

void add_sweep(CLI::App& app, Registry& reg) {
  struct Opts {
    CommonOptions common;
    DesignOptions design;
    std::string preset, x, y;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("sweep", "Weighted enhancement over a 1D or 2D design grid (long-format CSV)");
  add_common_options(*sub, o->common, true);
  o->design.add_to(*sub);
  sub->add_option("--preset", o->preset, "Grid preset: fig1c, fig1e or supp-sweeps")
      ->check(CLI::IsMember({"fig1c", "fig1e", "supp-sweeps"}));
  sub->add_option("--x", o->x, "First axis param:min:max:count");
  sub->add_option("--y", o->y, "Second axis param:min:max:count (optional)");
  reg.add(sub, [o, sub](const Streams& s) {
    std::string x = o->x, y = o->y;
    if (!o->preset.empty()) {
      const Preset p = sweep_preset(o->preset);
      if (x.empty()) x = p.x;
      if (y.empty()) y = p.y;
    }
    if (x.empty()) throw ConfigError("sweep needs --x or --preset");
    SweepSpec spec;
    spec.base = o->design.resolved_design();
    spec.axes.push_back(parse_axis(x));
    if (!y.empty()) spec.axes.push_back(parse_axis(y));
    spec.validate();
    const auto lib = o->common.library();
    const DesignContext ctx = o->design.context(lib, o->common.threads);
    const EnhancementMap map = sweep(spec, ctx);
    Sink sink(o->common.out, s.out);
    auto& os = sink.stream();
    write_csv_header(os, *sub);
    for (const auto& a : spec.axes) os << to_string(a.parameter) << ",";
    os << "enhancement\n";
    for (std::size_t k = 0; k < map.values.size(); ++k) {
      for (double c : map.coordinates(k)) os << num(c) << ",";
      os << num(map.values[k]) << "\n";
    }
  });
}

void add_optimize(CLI::App& app, Registry& reg) {
  struct Opts {
    CommonOptions common;
    DesignOptions design;
    std::vector<std::string> free = {"upper_silver_nm:5:60", "sic_nm:100:250", "dipole_rel_pos:0:1",
                                     "silica_nm:0:300"};
    int max_evaluations = 600;
    std::size_t grid_points = 0;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("optimize", "Maximize the weighted enhancement over free design parameters (JSON)");
  add_common_options(*sub, o->common, true);
  o->design.add_to(*sub);
  sub->add_option("--free,--bounds", o->free, "Free parameter param:lower:upper (repeatable)");
  sub->add_option("--max-evaluations", o->max_evaluations, "Evaluation budget of the local search")
      ->check(CLI::PositiveNumber);
  sub->add_option("--grid-points", o->grid_points, "Coarse grid points per dimension (0: automatic)");
  reg.add(sub, [o, sub](const Streams& s) {
    std::vector<FreeParameter> free;
    for (const auto& f : o->free) free.push_back(parse_free(f));
    const auto lib = o->common.library();
    const DesignContext ctx = o->design.context(lib, o->common.threads);
    OptimizerOptions options;
    options.max_evaluations = o->max_evaluations;
    options.grid_points = o->grid_points;
    const DesignOptimum best = optimize(free, o->design.resolved_design(), ctx, options);
    json j;
    j["command"] = sub->get_name();
    j["config"] = config_json(*sub);
    j["design"] = design_json(best.design);
    j["enhancement"] = best.enhancement;
    j["converged"] = best.converged;
    j["evaluations"] = best.evaluations;
    Sink sink(o->common.out, s.out);
    write_json(sink.stream(), j);
  });
}

void add_window_ratio(CLI::App& app, Registry& reg) {
  struct Opts {
    CommonOptions common;
    DesignOptions design;
    std::string window_a = "900:1150:5";
    std::string window_b = "900:1000:5";
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("window-ratio", "Ratio of weighted enhancements in two spectral windows (JSON)");
  add_common_options(*sub, o->common);
  o->design.add_to(*sub, false);
  sub->add_option("--window-a", o->window_a, "Numerator window min:max[:step], nm");
  sub->add_option("--window-b", o->window_b, "Denominator window min:max[:step], nm");
  reg.add(sub, [o, sub](const Streams& s) {
    const auto lib = o->common.library();
    const DesignContext ctx = o->design.context(lib, o->common.threads);
    const AntennaDesign design = o->design.resolved_design();
    const SpectralWindow a = SpectralWindow::parse(o->window_a);
    const SpectralWindow b = SpectralWindow::parse(o->window_b);
    DesignContext ca = ctx, cb = ctx;
    ca.window = a;
    cb.window = b;
    json j;
    j["command"] = sub->get_name();
    j["config"] = config_json(*sub);
    j["enhancement_a"] = design_enhancement(design, ca);
    j["enhancement_b"] = design_enhancement(design, cb);
    j["ratio"] = window_ratio(design, ctx, a, b);
    Sink sink(o->common.out, s.out);
    write_json(sink.stream(), j);
  });
}

}  // namespace

void register_optics(CLI::App& app, Registry& reg) {
  add_reflectivity(app, reg);
  add_enhance(app, reg);
  add_sweep(app, reg);
  add_optimize(app, reg);
  add_window_ratio(app, reg);
}

}  // namespace planarcav::cli
