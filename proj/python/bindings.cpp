#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <numbers>

#include "planarcav/planarcav.hpp"

namespace py = pybind11;
using namespace planarcav;

namespace {

Stack make_stack(const MaterialLibrary& lib, const std::string& incidence,
                 const std::vector<std::pair<std::string, double>>& layers, const std::string& exit) {
  Stack s;
  s.incidence = lib.get(incidence);
  s.exit = lib.get(exit);
  for (const auto& [name, d] : layers) s.layers.push_back({lib.get(name), d});
  s.validate();
  return s;
}

SicIndexModel sic_model(const std::string& name) {
  if (name == "ordinary") return SicIndexModel::ordinary;
  if (name == "extraordinary") return SicIndexModel::extraordinary;
  throw ConfigError("sic_index must be ordinary or extraordinary");
}

py::dict fit_dict(const FitResult& fit) {
  py::dict params, errors;
  for (std::size_t i = 0; i < fit.names.size(); ++i) {
    params[py::str(fit.names[i])] = fit.parameters[i];
    errors[py::str(fit.names[i])] = fit.std_errors[i];
  }
  py::dict d;
  d["parameters"] = params;
  d["errors"] = errors;
  d["chi_squared"] = fit.chi_squared;
  d["dof"] = fit.dof;
  d["r_squared"] = fit.r_squared;
  d["converged"] = fit.converged;
  return d;
}

DesignContext make_context(const SpectralWindow& window, double na, const std::string& reference) {
  DesignContext ctx(AntennaMaterials::from(MaterialLibrary::bundled()), bundled_v2_spectrum());
  ctx.window = window;
  ctx.geom.numerical_aperture = na;
  ctx.geom.validate();
  ctx.options.reference = parse_reference_model(reference);
  return ctx;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Planar antenna optics, emitter model fits and PLE analysis";

  static py::exception<Error> base(m, "PlanarcavError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(base, (std::string(e.kind()) + ": " + e.what()).c_str());
    }
  });

  m.def("data_dir", [] { return default_data_dir().string(); }, "Directory of the bundled data");

  m.def(
      "refractive_index",
      [](const std::string& material, double wavelength_nm, const std::string& sic_index) {
        return MaterialLibrary::bundled(sic_model(sic_index)).get(material)->index(wavelength_nm);
      },
      py::arg("material"), py::arg("wavelength_nm"), py::arg("sic_index") = "ordinary",
      "Complex index n + ik of a bundled material");

  m.def(
      "reflectivity",
      [](const std::vector<std::pair<std::string, double>>& layers, const std::vector<double>& wavelengths_nm,
         const std::string& incidence, const std::string& exit, double angle_deg, const std::string& pol) {
        const Stack s = make_stack(MaterialLibrary::bundled(), incidence, layers, exit);
        std::vector<double> out;
        for (const auto& p : reflectivity_spectrum(s, wavelengths_nm, angle_deg * std::numbers::pi / 180.0,
                                                   parse_polarization_mode(pol))) {
          out.push_back(p.R);
        }
        return out;
      },
      py::arg("layers"), py::arg("wavelengths_nm"), py::arg("incidence") = "air", py::arg("exit") = "sic",
      py::arg("angle_deg") = 0.0, py::arg("pol") = "avg",
      "Reflectivity of [(material, thickness_nm), ...] listed from the incidence side");

  m.def(
      "antenna_enhancement",
      [](double silica_nm, double upper_silver_nm, double sic_nm, double dipole_rel_pos, const std::string& window,
         double na, const std::string& reference) {
        AntennaDesign d = reference_design();
        d.silica_nm = silica_nm;
        d.upper_silver_nm = upper_silver_nm;
        d.sic_nm = sic_nm;
        d.dipole_rel_pos = dipole_rel_pos;
        return design_enhancement(d, make_context(SpectralWindow::parse(window), na, reference));
      },
      py::arg("silica_nm") = 173.0, py::arg("upper_silver_nm") = 31.2, py::arg("sic_nm") = 145.1,
      py::arg("dipole_rel_pos") = 0.5, py::arg("window") = "900:1000:5", py::arg("na") = 0.9,
      py::arg("reference") = "semi_infinite", "Spectrally weighted enhancement of the antenna design");

  m.def(
      "enhancement_spectrum",
      [](const std::vector<double>& wavelengths_nm, double silica_nm, double upper_silver_nm, double sic_nm,
         double dipole_rel_pos, double na) {
        AntennaDesign d = reference_design();
        d.silica_nm = silica_nm;
        d.upper_silver_nm = upper_silver_nm;
        d.sic_nm = sic_nm;
        d.dipole_rel_pos = dipole_rel_pos;
        const AntennaModel model = build_antenna(d, AntennaMaterials::from(MaterialLibrary::bundled()));
        CollectionGeometry g;
        g.numerical_aperture = na;
        std::vector<double> out;
        for (const auto& p : enhancement_spectrum(model.stack, model.dipole, wavelengths_nm, g)) {
          out.push_back(p.enhancement);
        }
        return out;
      },
      py::arg("wavelengths_nm"), py::arg("silica_nm") = 173.0, py::arg("upper_silver_nm") = 31.2,
      py::arg("sic_nm") = 145.1, py::arg("dipole_rel_pos") = 0.5, py::arg("na") = 0.9);

  m.def("g2_value",
        [](double tau, double N, double a, double tau0, double tau1, double tau2) {
          return g2_value(G2Params{N, a, tau0, tau1, tau2}, tau);
        },
        py::arg("tau_ns"), py::arg("N") = 1.0, py::arg("a") = 0.0, py::arg("tau0") = 0.0, py::arg("tau1") = 1.0,
        py::arg("tau2") = 10.0);

  m.def("saturation_value",
        [](double power, double i_sat, double p_exc, double b) {
          return saturation_value(SaturationParams{i_sat, p_exc, b}, power);
        },
        py::arg("power_uw"), py::arg("I_sat"), py::arg("P_exc"), py::arg("b") = 0.0);

  m.def(
      "fit_g2",
      [](const std::vector<double>& tau, const std::vector<double>& g2, const std::vector<double>& sigma) {
        const G2Fit r = fit_g2(tau, g2, sigma);
        py::dict d = fit_dict(r.fit);
        d["dip"] = r.dip;
        d["dip_error"] = r.dip_error;
        d["emitters"] = r.emitters;
        return d;
      },
      py::arg("tau_ns"), py::arg("g2"), py::arg("sigma") = std::vector<double>{});

  m.def(
      "fit_odmr",
      [](const std::vector<double>& mhz, const std::vector<double>& signal, const std::vector<double>& sigma) {
        const OdmrFit r = fit_odmr(mhz, signal, sigma);
        py::dict d = fit_dict(r.fit);
        d["splitting"] = r.splitting;
        d["splitting_error"] = r.splitting_error;
        return d;
      },
      py::arg("mhz"), py::arg("signal"), py::arg("sigma") = std::vector<double>{});

  m.def(
      "fit_saturation",
      [](const std::vector<double>& power, const std::vector<double>& sigma_power, const std::vector<double>& counts,
         const std::vector<double>& sigma_counts) {
        return fit_dict(fit_saturation(power, sigma_power, counts, sigma_counts).fit);
      },
      py::arg("power_uw"), py::arg("sigma_power"), py::arg("counts"), py::arg("sigma_counts"),
      "Orthogonal distance regression of the saturation model");

  m.def(
      "delta_pol",
      [](const std::vector<double>& pol1, const std::vector<double>& pol2) {
        if (pol1.size() != pol2.size()) throw ConfigError("pol1 and pol2 differ in length");
        std::vector<PolarizationTrace> t;
        for (std::size_t i = 0; i < pol1.size(); ++i) t.push_back({pol1[i], pol2[i]});
        return delta_pol(t);
      },
      py::arg("pol1"), py::arg("pol2"), "Signed polarization deviation in percent");

  m.def(
      "analyze_ple",
      [](const std::string& manifest, const std::string& constraints) {
        const PleScanResult r = analyze_scan(load_ple_scan(manifest), ConstraintSet::preset(constraints));
        py::list lines;
        for (const auto& l : r.lines) {
          py::dict d;
          d["accepted"] = l.accepted;
          d["a1_center"] = l.params.first.center;
          d["a2_center"] = l.params.second.center;
          d["a1_fwhm"] = l.a1_fwhm();
          d["a2_fwhm"] = l.a2_fwhm();
          d["r_squared"] = l.r_squared;
          const auto p = l.primary();
          d["reason"] = p ? to_string(*p) : std::string();
          lines.append(d);
        }
        py::dict out;
        out["lines"] = lines;
        out["wandering_std_mhz_per_s"] = spectral_wandering(r.lines).std;
        return out;
      },
      py::arg("manifest"), py::arg("constraints") = "loose");
}
