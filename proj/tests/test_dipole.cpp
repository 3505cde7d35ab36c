#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "planarcav/design.hpp"
#include "planarcav/dipole.hpp"
#include "planarcav/errors.hpp"
#include "planarcav/quadrature.hpp"

using namespace planarcav;
using oracle::constant;

namespace {

constexpr double kPi = std::numbers::pi;

CollectionGeometry geom(double na, int order = 64) {
  CollectionGeometry g;
  g.numerical_aperture = na;
  g.quadrature_order = order;
  return g;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Collected power of a horizontal dipole in a lossless film in air, with the
// cavity denominator expanded as a 50-term geometric series.
double film_series_power(double n, double d, double z0, double wl, double na, int order) {
  const double k0 = 2.0 * kPi / wl;
  const QuadratureRule rule = gauss_legendre(order, std::sqrt(1.0 - na * na), 1.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double u = rule.nodes[i];
    const double kpar = k0 * std::sqrt(1.0 - u * u);
    const cplx kz_f = std::sqrt(cplx(k0 * k0 * n * n - kpar * kpar));
    const cplx kz_a = k0 * u;
    // s: E amplitudes; p: H amplitudes
    const cplx rs = (kz_f - kz_a) / (kz_f + kz_a);
    const cplx ts = 2.0 * kz_f / (kz_f + kz_a);
    const cplx rp = (kz_f - n * n * kz_a) / (kz_f + n * n * kz_a);
    const cplx tp = 2.0 * kz_f / (kz_f + n * n * kz_a);
    const cplx I(0.0, 1.0);
    const cplx round_trip_s = rs * rs * std::exp(2.0 * I * kz_f * d);
    const cplx round_trip_p = rp * rp * std::exp(2.0 * I * kz_f * d);
    cplx series_s = 0.0, series_p = 0.0, term_s = 1.0, term_p = 1.0;
    for (int m = 0; m < 50; ++m) {
      series_s += term_s;
      series_p += term_p;
      term_s *= round_trip_s;
      term_p *= round_trip_p;
    }
    const double above = d - z0;
    const cplx src = k0 / kz_f;
    const cplx up_s = src * (std::exp(I * kz_f * above) + rs * std::exp(I * kz_f * (above + 2.0 * z0))) * series_s;
    const cplx up_p = (std::exp(I * kz_f * above) - rp * std::exp(I * kz_f * (above + 2.0 * z0))) * series_p;
    const double pre = u * u;
    // azimuthal integrals of sin^2 and cos^2 are both pi
    sum += rule.weights[i] * pre * kPi * (std::norm(ts * up_s) + std::norm(tp * up_p));
  }
  return sum;
}

}  // namespace

TEST_CASE("bulk reference geometry gives unit enhancement") {
  const auto sic = constant(2.6);
  const std::vector<double> wl{900.0, 950.0, 1000.0, 1100.0};
  SUBCASE("semi-infinite reading") {
    const Stack s{constant(1.0), {{sic, 300.0}}, sic};
    for (double pos : {0.0, 0.3, 1.0}) {
      for (auto o : {DipoleOrientation::horizontal, DipoleOrientation::vertical}) {
        const auto d = DipoleConfig::relative(s, 0, pos, o);
        for (const auto& p : enhancement_spectrum(s, d, wl, geom(0.9))) CHECK(std::abs(p.enhancement - 1.0) < 1e-9);
      }
    }
  }
  SUBCASE("homogeneous reading") {
    const Stack s{sic, {{sic, 300.0}}, sic};
    EnhancementOptions opt;
    opt.reference = ReferenceModel::homogeneous;
    for (auto o : {DipoleOrientation::horizontal, DipoleOrientation::vertical}) {
      const auto d = DipoleConfig::relative(s, 0, 0.4, o);
      for (const auto& p : enhancement_spectrum(s, d, wl, geom(0.9), opt)) {
        CHECK(std::abs(p.enhancement - 1.0) < 1e-9);
      }
    }
  }
}

TEST_CASE("horizontal dipole on a near-perfect mirror is cancelled by its image") {
  const Stack s{constant(1.0), {{constant(2.6), 150.0}}, constant(0.01, 1e5)};
  const auto on_mirror = DipoleConfig::relative(s, 0, 0.0);
  const auto inside = DipoleConfig::relative(s, 0, 0.5);
  CHECK(collected_power(s, on_mirror, 950.0, geom(0.9)) < 1e-6 * collected_power(s, inside, 950.0, geom(0.9)));
}

TEST_CASE("collected power vanishes with the aperture and grows with it") {
  const MaterialLibrary lib = MaterialLibrary::bundled();
  const AntennaModel m = build_antenna(reference_design(), AntennaMaterials::from(lib));
  double previous = 0.0;
  for (double na : {1e-4, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) {
    const double p = collected_power(m.stack, m.dipole, 950.0, geom(na));
    CHECK(p >= previous);
    previous = p;
  }
  CHECK(collected_power(m.stack, m.dipole, 950.0, geom(1e-4)) < 1e-6 * previous);
  CHECK_THROWS_AS(collected_power(m.stack, m.dipole, 950.0, geom(0.0)), RangeError);
  CHECK_THROWS_AS(collected_power(m.stack, m.dipole, 950.0, geom(1.2)), RangeError);
}

TEST_CASE("bulk SiC sends little light into an air objective") {
  const auto sic = constant(2.6);
  const double from_sic = bulk_reference_power(*sic, 950.0, geom(0.9), DipoleOrientation::horizontal);
  const double in_vacuum =
      bulk_reference_power(*constant(1.0), 950.0, geom(0.9), DipoleOrientation::horizontal, ReferenceModel::homogeneous);
  // normal emission through the interface: |t|^2 / n^2 = 4 / (n + 1)^2 of the vacuum value
  const Stack deep{constant(1.0), {{sic, 200.0}}, sic};
  const auto centre = DipoleConfig::relative(deep, 0, 0.5);
  CHECK(angular_power_density(deep, centre, 950.0, 0.0, 0.0) == doctest::Approx(4.0 / (3.6 * 3.6)).epsilon(1e-12));
  // Fresnel losses and cone compression only grow off axis
  CHECK(from_sic / in_vacuum < 4.0 / (3.6 * 3.6));
  // same quantity through the general stack solver with a whole-sphere aperture
  const Stack s{constant(1.0), {{sic, 200.0}}, sic};
  const auto d = DipoleConfig::relative(s, 0, 0.5);
  const double top = radiated_power(s, d, 950.0, Side::top);
  const double collected = collected_power(s, d, 950.0, geom(1.0, 128));
  CHECK(rel(collected, top) < 1e-6);
  CHECK(rel(bulk_reference_power(*sic, 950.0, geom(1.0, 128), DipoleOrientation::horizontal), top) < 1e-6);
}

TEST_CASE("antenna resonance") {
  const MaterialLibrary lib = MaterialLibrary::bundled();
  const AntennaMaterials mats = AntennaMaterials::from(lib);
  const AntennaModel m = build_antenna(reference_design(), mats);
  std::vector<double> wl;
  for (double w = 900.0; w <= 1000.0; w += 5.0) wl.push_back(w);
  double peak = 0.0;
  for (const auto& p : enhancement_spectrum(m.stack, m.dipole, wl, geom(0.9))) peak = std::max(peak, p.enhancement);
  CHECK(peak > 25.0);
  // broad resonance: at least half the window above a quarter of the peak
  int broad = 0;
  for (const auto& p : enhancement_spectrum(m.stack, m.dipole, wl, geom(0.9))) broad += p.enhancement > 0.25 * peak;
  CHECK(broad >= static_cast<int>(wl.size()) / 2);

  DesignContext ctx(mats, bundled_v2_spectrum());
  // a weighted mean cannot exceed the spectral maximum
  CHECK(design_enhancement(reference_design(), ctx) <= peak);
  AntennaDesign detuned = reference_design();
  detuned.sic_nm = 300.0;
  CHECK(design_enhancement(detuned, ctx) < 0.3 * design_enhancement(reference_design(), ctx));
}

TEST_CASE("horizontal dipole power is independent of its in-plane direction") {
  const MaterialLibrary lib = MaterialLibrary::bundled();
  AntennaModel m = build_antenna(reference_design(), AntennaMaterials::from(lib));
  const double a = collected_power(m.stack, m.dipole, 960.0, geom(0.9));
  m.dipole.azimuth_rad = 0.7;
  CHECK(rel(collected_power(m.stack, m.dipole, 960.0, geom(0.9)), a) < 1e-10);
}

TEST_CASE("angular quadrature converged at the default order") {
  const MaterialLibrary lib = MaterialLibrary::bundled();
  for (auto o : {DipoleOrientation::horizontal, DipoleOrientation::vertical}) {
    AntennaDesign d = reference_design();
    d.orientation = o;
    const AntennaModel m = build_antenna(d, AntennaMaterials::from(lib));
    for (double wl : {900.0, 950.0, 1000.0, 1150.0}) {
      CollectionGeometry g = geom(0.9);
      g.check_convergence = true;
      CHECK_NOTHROW(collected_power(m.stack, m.dipole, wl, g));
      CHECK(rel(collected_power(m.stack, m.dipole, wl, geom(0.9, 128)), collected_power(m.stack, m.dipole, wl, g)) <
            1e-6);
    }
  }
}

TEST_CASE("collected power is smooth in the dipole position") {
  const MaterialLibrary lib = MaterialLibrary::bundled();
  const AntennaModel m = build_antenna(reference_design(), AntennaMaterials::from(lib));
  auto p = [&](double z) {
    DipoleConfig d = m.dipole;
    d.position_nm = z;
    return collected_power(m.stack, d, 950.0, geom(0.9));
  };
  const double z = 40.0;
  const double coarse = (p(z + 1.0) - p(z - 1.0)) / 2.0;
  const double fine = (p(z + 0.1) - p(z - 0.1)) / 0.2;
  CHECK(std::abs(coarse - fine) < 0.01 * std::abs(fine));
}

TEST_CASE("cavity closed form equals the unrolled multiple-reflection series") {
  const double n = 2.0, d = 420.0;
  const Stack s{constant(1.0), {{constant(n), d}}, constant(1.0)};
  for (double z0 : {30.0, 210.0, 390.0}) {
    for (double wl : {900.0, 975.0, 1100.0}) {
      DipoleConfig dip;
      dip.host_layer = 0;
      dip.position_nm = z0;
      const double closed = collected_power(s, dip, wl, geom(0.9, 64));
      const double series = film_series_power(n, d, z0, wl, 0.9, 64);
      CHECK(rel(closed, series) < 1e-8);
    }
  }
}

TEST_CASE("total emission and Purcell factor") {
  SUBCASE("homogeneous medium") {
    const auto sic = constant(2.6);
    const Stack s{sic, {{sic, 200.0}}, sic};
    for (auto o : {DipoleOrientation::horizontal, DipoleOrientation::vertical}) {
      const auto d = DipoleConfig::relative(s, 0, 0.3, o);
      const double total = radiated_power(s, d, 950.0, Side::top) + radiated_power(s, d, 950.0, Side::bottom);
      CHECK(rel(total, homogeneous_power(2.6)) < 1e-8);
      CHECK(purcell_factor(s, d, 950.0) == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
  SUBCASE("lossless cavity: all power leaves through the claddings") {
    const auto glass = constant(1.5);
    const Stack s{glass, {{constant(1.0), 200.0}}, glass};
    for (auto o : {DipoleOrientation::horizontal, DipoleOrientation::vertical}) {
      const auto d = DipoleConfig::relative(s, 0, 0.35, o);
      const double total = radiated_power(s, d, 950.0, Side::top) + radiated_power(s, d, 950.0, Side::bottom);
      CHECK(rel(total, purcell_factor(s, d, 950.0) * homogeneous_power(1.0)) < 1e-6);
    }
  }
}

TEST_CASE("invalid dipole configurations") {
  const Stack s{constant(1.0), {{constant(2.6), 100.0}, {constant(0.1, 6.0), 50.0}}, constant(1.0)};
  CHECK_THROWS_AS(DipoleConfig::relative(s, 2, 0.5), ConfigError);
  CHECK_THROWS_AS(DipoleConfig::relative(s, 0, 1.5), ConfigError);
  const auto in_metal = DipoleConfig::relative(s, 1, 0.5);
  CHECK_THROWS_AS(collected_power(s, in_metal, 950.0, geom(0.9)), UnsupportedConfiguration);
  DipoleConfig outside;
  outside.position_nm = 120.0;
  CHECK_THROWS_AS(collected_power(s, outside, 950.0, geom(0.9)), ConfigError);
  CHECK(parse_orientation("v") == DipoleOrientation::vertical);
  CHECK_THROWS_AS(parse_orientation("diagonal"), ConfigError);
  CHECK_THROWS_AS(parse_reference_model("sil"), ConfigError);
}
