#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "planarcav/errors.hpp"
#include "planarcav/stratified.hpp"

using namespace planarcav;
using oracle::constant;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

StackAmplitudes amps(const Stack& s, double wl, double kpar, Polarization pol) {
  return stack_amplitudes(s, PlaneWaveContext{wl, kpar, pol});
}

double rel_diff(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("longitudinal wavevector branch") {
  const cplx kz0 = longitudinal_wavevector(cplx(1.0), 1000.0, 0.0);
  CHECK(kz0.real() == doctest::Approx(kTwoPi / 1000.0).epsilon(1e-15));
  CHECK(kz0.imag() == 0.0);
  CHECK(std::abs(longitudinal_wavevector(cplx(1.0), 1000.0, kTwoPi / 1000.0)) < 1e-12);
  const cplx ev = longitudinal_wavevector(cplx(1.0), 1000.0, 1.5 * kTwoPi / 1000.0);
  CHECK(std::abs(ev.real()) < 1e-15);
  CHECK(ev.imag() > 0.0);
  // lossy medium: decaying along +z
  CHECK(longitudinal_wavevector(cplx(0.1, 6.0), 950.0, 0.003).imag() > 0.0);
}

TEST_CASE("interface without contrast is transparent") {
  for (auto pol : {Polarization::s, Polarization::p}) {
    const cplx n(1.7, 0.0);
    const cplx kz = longitudinal_wavevector(n, 900.0, 0.004);
    const auto c = fresnel(n, n, kz, kz, pol);
    CHECK(std::abs(c.r) < 1e-15);
    CHECK(std::abs(c.t) == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("analytic Fresnel single interface") {
  const Stack s{constant(1.0), {}, constant(2.6)};
  CHECK(amps(s, 950.0, 0.0, Polarization::s).R == doctest::Approx(std::pow(1.6 / 3.6, 2)).epsilon(1e-13));
  CHECK(std::pow(1.6 / 3.6, 2) == doctest::Approx(0.1975).epsilon(1e-3));
  const double n1 = 1.0, n2 = 2.6;
  for (double deg : {10.0, 35.0, 60.0, 85.0}) {
    const double th = deg * std::numbers::pi / 180.0;
    const double c1 = std::cos(th);
    const double c2 = std::sqrt(1.0 - std::pow(n1 * std::sin(th) / n2, 2));
    const double rs = (n1 * c1 - n2 * c2) / (n1 * c1 + n2 * c2);
    const double rp = (n2 * c1 - n1 * c2) / (n2 * c1 + n1 * c2);
    const double kpar = kTwoPi * n1 * std::sin(th) / 950.0;
    const auto as = amps(s, 950.0, kpar, Polarization::s);
    const auto ap = amps(s, 950.0, kpar, Polarization::p);
    CHECK(std::abs(as.R - rs * rs) < 1e-12);
    CHECK(std::abs(ap.R - rp * rp) < 1e-12);
    CHECK(std::abs(as.R + as.T - 1.0) < 1e-12);
    CHECK(std::abs(ap.R + ap.T - 1.0) < 1e-12);
  }
}

TEST_CASE("metallic limit approaches a perfect mirror") {
  double previous = 0.0;
  for (double k : {10.0, 100.0, 1000.0}) {
    const Stack s{constant(1.0), {}, constant(0.05, k)};
    const double R = amps(s, 950.0, 0.0, Polarization::s).R;
    CHECK(R > previous);
    previous = R;
  }
  CHECK(previous > 0.9999);
}

TEST_CASE("empty stack between identical media") {
  const Stack s{constant(1.5), {}, constant(1.5)};
  const auto a = amps(s, 1000.0, 0.002, Polarization::p);
  CHECK(a.R == doctest::Approx(0.0));
  CHECK(a.T == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("single film matches the Airy formula") {
  const Stack s{constant(1.0), {{constant(2.6), 137.0}}, constant(1.45)};
  for (double wl = 900.0; wl <= 1150.0; wl += 2.5) {
    CHECK(std::abs(amps(s, wl, 0.0, Polarization::s).R - oracle::airy_reflectivity(1.0, 2.6, 1.45, 137.0, wl)) <
          1e-12);
  }
}

TEST_CASE("randomized lossless stacks: energy, splitting, reversal, Abeles route") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const auto rs = oracle::random_lossless_stack(rng);
    const double wl = 700.0 + 5.0 * trial;
    const double kpar = kTwoPi * rs.index.front().real() * rs.sin_theta0 / wl;
    for (auto pol : {Polarization::s, Polarization::p}) {
      const auto a = amps(rs.stack, wl, kpar, pol);
      CHECK(std::abs(a.R + a.T - 1.0) < 1e-10);
      CHECK(a.R <= 1.0 + 1e-12);

      Stack split = rs.stack;
      split.layers.clear();
      for (const auto& l : rs.stack.layers) {
        split.layers.push_back({l.material, 0.5 * l.thickness_nm});
        split.layers.push_back({l.material, 0.5 * l.thickness_nm});
      }
      const auto b = amps(split, wl, kpar, pol);
      CHECK(rel_diff(b.r, a.r) < 1e-10);
      CHECK(rel_diff(b.t, a.t) < 1e-10);

      const auto rev = amps(rs.stack.reversed(), wl, kpar, pol);
      CHECK(std::abs(rev.T - a.T) < 1e-10);
    }
    const auto ab = oracle::abeles_s(rs.index, rs.thickness, wl, rs.sin_theta0);
    const auto a = amps(rs.stack, wl, kpar, Polarization::s);
    CHECK(std::abs(ab.r - a.r) < 1e-10);
    CHECK(std::abs(ab.T - a.T) < 1e-10);
  }
}

TEST_CASE("zero and negative thicknesses are rejected") {
  Stack s{constant(1.0), {{constant(2.0), 0.0}}, constant(1.5)};
  CHECK_THROWS_AS(s.validate(), ConfigError);
  CHECK_THROWS_AS(amps(s, 900.0, 0.0, Polarization::s), ConfigError);
  s.layers[0].thickness_nm = -5.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("passive absorbing stacks never exceed unit reflectivity") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> n(0.05, 3.0), k(0.0, 8.0), d(5.0, 300.0), wl(600.0, 1400.0);
  for (int trial = 0; trial < 200; ++trial) {
    Stack s{constant(1.0), {}, constant(n(rng), k(rng))};
    for (int i = 0; i < 4; ++i) s.layers.push_back({constant(n(rng), k(rng)), d(rng)});
    const double w = wl(rng);
    for (auto pol : {Polarization::s, Polarization::p}) {
      const auto a = amps(s, w, 0.3 * kTwoPi / w, pol);
      CHECK(a.R <= 1.0 + 1e-12);
      CHECK(a.R + a.T <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("s and p agree at normal incidence") {
  const Stack s{constant(1.0), {{constant(0.1, 6.5), 22.0}, {constant(2.6), 137.0}}, constant(0.1, 6.5)};
  for (double wl = 900.0; wl <= 1000.0; wl += 10.0) {
    CHECK(std::abs(amps(s, wl, 0.0, Polarization::s).R - amps(s, wl, 0.0, Polarization::p).R) < 1e-12);
  }
}

TEST_CASE("star product with an identity section is a no-op") {
  const SMatrix a{cplx(0.3, 0.1), cplx(0.8, -0.2), cplx(-0.1, 0.4), cplx(0.7, 0.3)};
  const SMatrix id{};
  const SMatrix left = star(id, a), right = star(a, id);
  CHECK(std::abs(left.r_f - a.r_f) < 1e-15);
  CHECK(std::abs(right.t_b - a.t_b) < 1e-15);
}

TEST_CASE("reflectivity spectrum validates input") {
  const Stack s{constant(1.0), {}, constant(1.5)};
  CHECK_THROWS_AS(reflectivity_spectrum(s, {}, 0.0, PolarizationMode::average), ConfigError);
  CHECK_THROWS_AS(parse_polarization_mode("circular"), ConfigError);
  CHECK(parse_polarization_mode("avg") == PolarizationMode::average);
}
