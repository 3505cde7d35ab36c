#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "oracles.hpp"
#include "planarcav/design.hpp"
#include "planarcav/errors.hpp"

using namespace planarcav;
using oracle::constant;

namespace {

const MaterialLibrary& lib() {
  static const MaterialLibrary l = MaterialLibrary::bundled();
  return l;
}

DesignContext context(EmitterSpectrum spectrum = bundled_v2_spectrum()) {
  return DesignContext(AntennaMaterials::from(lib()), std::move(spectrum));
}

EmitterSpectrum scaled(const EmitterSpectrum& s, double c) {
  std::vector<SpectrumSample> v = s.samples();
  for (auto& x : v) x.intensity *= c;
  return EmitterSpectrum(v);
}

}  // namespace

TEST_CASE("spectral weights are normalized in every window") {
  const auto spec = bundled_v2_spectrum();
  for (const auto& w : {windows::room_temperature, windows::low_temperature, windows::full_psb,
                        SpectralWindow{910.0, 1100.0, 2.5}}) {
    const auto weights = spectral_weights(spec, w);
    CHECK(std::abs(std::accumulate(weights.begin(), weights.end(), 0.0) - 1.0) < 1e-12);
    CHECK(weights.size() == w.grid().size());
  }
}

TEST_CASE("window grid and parsing") {
  const auto g = SpectralWindow::parse("900:1000:5").grid();
  CHECK(g.size() == 21);
  CHECK(g.front() == 900.0);
  CHECK(g.back() == 1000.0);
  CHECK(SpectralWindow::parse("925:1150").step_nm == 5.0);
  CHECK_THROWS_AS(SpectralWindow::parse("1000:900:5"), ConfigError);
  CHECK_THROWS_AS(SpectralWindow::parse("abc"), ConfigError);
  CHECK_THROWS_AS(SpectralWindow::parse("900:1000:0"), ConfigError);
}

TEST_CASE("unit enhancement spectrum gives unit weighted enhancement") {
  const auto sic = constant(2.6);
  const Stack s{constant(1.0), {{sic, 200.0}}, sic};
  const auto d = DipoleConfig::relative(s, 0, 0.5);
  const EmitterSpectrum flat({{850.0, 1.0}, {1200.0, 1.0}});
  for (const auto& spec : {bundled_v2_spectrum(), flat}) {
    for (const auto& w : {windows::room_temperature, windows::low_temperature, windows::full_psb}) {
      CHECK(std::abs(weighted_enhancement(s, d, spec, w, CollectionGeometry{}) - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("delta-like spectrum picks a single wavelength") {
  const EmitterSpectrum delta({{949.0, 0.0}, {950.0, 1.0}, {951.0, 0.0}});
  const AntennaModel m = build_antenna(reference_design(), AntennaMaterials::from(lib()));
  const double at_950 = enhancement_spectrum(m.stack, m.dipole, std::vector<double>{950.0}, {}).front().enhancement;
  CHECK(weighted_enhancement(m.stack, m.dipole, delta, windows::room_temperature, {}) ==
        doctest::Approx(at_950).epsilon(1e-14));
}

TEST_CASE("spectrum scale does not matter") {
  const DesignContext a = context();
  const DesignContext b = context(scaled(bundled_v2_spectrum(), 37.5));
  CHECK(design_enhancement(reference_design(), a) == doctest::Approx(design_enhancement(reference_design(), b)).epsilon(1e-13));
  SweepSpec spec;
  spec.base = reference_design();
  spec.axes = {{DesignAxis::upper_silver_nm, 10.0, 50.0, 5}, {DesignAxis::sic_nm, 120.0, 170.0, 6}};
  CHECK(sweep(spec, a).argmax == sweep(spec, b).argmax);
}

TEST_CASE("halving the wavelength step barely changes the weighted enhancement") {
  DesignContext coarse = context();
  DesignContext fine = context();
  fine.window.step_nm = 2.5;
  const double e1 = design_enhancement(reference_design(), coarse);
  const double e2 = design_enhancement(reference_design(), fine);
  CHECK(std::abs(e1 - e2) < 0.01 * e2);
}

TEST_CASE("antenna construction") {
  const AntennaMaterials mats = AntennaMaterials::from(lib());
  AntennaDesign d = reference_design();
  const AntennaModel with = build_antenna(d, mats);
  CHECK(with.stack.layers.size() == 4);
  CHECK(with.dipole.host_layer == 2);
  CHECK(with.dipole.position_nm == doctest::Approx(0.5 * d.sic_nm));
  d.silica_nm = 0.0;
  const AntennaModel without = build_antenna(d, mats);
  CHECK(without.stack.layers.size() == 3);
  CHECK(without.dipole.host_layer == 1);
  d.sic_nm = -1.0;
  CHECK_THROWS_AS(build_antenna(d, mats), ConfigError);
  CHECK(parse_design_axis("ag") == DesignAxis::upper_silver_nm);
  CHECK(parse_design_axis("pos") == DesignAxis::dipole_rel_pos);
  CHECK_THROWS_AS(parse_design_axis("gold"), ConfigError);
}

TEST_CASE("evaluator agrees with the direct computation") {
  const DesignContext ctx = context();
  const DesignEvaluator eval(ctx);
  AntennaDesign d = reference_design();
  d.sic_nm = 160.0;
  d.dipole_rel_pos = 0.3;
  const AntennaModel m = build_antenna(d, ctx.materials);
  const double direct = weighted_enhancement(m.stack, m.dipole, ctx.spectrum, ctx.window, ctx.geom, ctx.options);
  CHECK(eval(d) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("sweep layout and determinism") {
  DesignContext ctx = context();
  SweepSpec spec;
  spec.base = reference_design();
  spec.axes = {{DesignAxis::sic_nm, 100.0, 200.0, 5}, {DesignAxis::dipole_rel_pos, 0.0, 1.0, 3}};
  ctx.threads = 1;
  const EnhancementMap one = sweep(spec, ctx);
  ctx.threads = 3;
  const EnhancementMap three = sweep(spec, ctx);
  REQUIRE(one.values.size() == 15);
  CHECK(one.values == three.values);  // bitwise
  CHECK(one.at(2, 1) == one.values[2 * 3 + 1]);
  const auto c = one.coordinates(2 * 3 + 1);
  CHECK(c[0] == 150.0);
  CHECK(c[1] == 0.5);
  AntennaDesign d = reference_design();
  d.sic_nm = 150.0;
  d.dipole_rel_pos = 0.5;
  CHECK(one.at(2, 1) == design_enhancement(d, ctx));
  CHECK(one.max_value() == *std::max_element(one.values.begin(), one.values.end()));
  spec.axes.push_back(spec.axes.front());
  CHECK_THROWS_AS(sweep(spec, ctx), ConfigError);
}

TEST_CASE("quarter-wave antireflection film from the optimizer") {
  const double n_sub = 1.5, wl = 1000.0;
  const double n_film = std::sqrt(n_sub);
  auto reflect = [&](std::span<const double> x) {
    const Stack s{constant(1.0), {{constant(n_film), x[0]}}, constant(n_sub)};
    return -stack_amplitudes(s, PlaneWaveContext{wl, 0.0, Polarization::s}).R;
  };
  const Bound b[] = {{50.0, 300.0}};
  const auto r = maximize_in_box(reflect, b);
  const double quarter = wl / (4.0 * n_film);
  CHECK(std::abs(r.x[0] - quarter) < 0.02 * quarter);
  CHECK(-r.value < 1e-8);
}

TEST_CASE("optimizer beats a coarse sweep over the same box") {
  const DesignContext ctx = context();
  SweepSpec spec;
  spec.base = reference_design();
  spec.axes = {{DesignAxis::upper_silver_nm, 10.0, 50.0, 6}, {DesignAxis::sic_nm, 110.0, 190.0, 6}};
  const EnhancementMap map = sweep(spec, ctx);
  const FreeParameter free[] = {{DesignAxis::upper_silver_nm, {10.0, 50.0}}, {DesignAxis::sic_nm, {110.0, 190.0}}};
  const DesignOptimum best = optimize(free, reference_design(), ctx);
  CHECK(best.enhancement >= map.max_value() - 1e-6);
  CHECK(best.design.upper_silver_nm >= 10.0);
  CHECK(best.design.upper_silver_nm <= 50.0);
  // repeatable to the bit
  CHECK(optimize(free, reference_design(), ctx).enhancement == best.enhancement);
}

TEST_CASE("window ratio") {
  const DesignContext ctx = context();
  CHECK(window_ratio(reference_design(), ctx, windows::room_temperature, windows::room_temperature) == 1.0);
  const double r = window_ratio(reference_design(), ctx, windows::full_psb, windows::room_temperature);
  CHECK(r > 0.0);
  CHECK(r < 1.0);
}

TEST_CASE("spectrum files") {
  std::istringstream ok("# wl intensity\n900 0\n950 1\n1000 0.5\n");
  const auto s = parse_spectrum(ok);
  CHECK(s.intensity(925.0) == doctest::Approx(0.5));
  CHECK(s.intensity(1200.0) == 0.0);
  std::istringstream negative("900 -1\n950 1\n");
  CHECK_THROWS(parse_spectrum(negative));
  CHECK_THROWS(load_spectrum("/nonexistent/spectrum.txt"));
  const EmitterSpectrum narrow({{1200.0, 1.0}, {1210.0, 1.0}});
  CHECK_THROWS_AS(spectral_weights(narrow, windows::room_temperature), ConfigError);
}
