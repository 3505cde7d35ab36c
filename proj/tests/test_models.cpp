#include <doctest.h>

#include <cmath>
#include <random>

#include "planarcav/models.hpp"

using namespace planarcav;

TEST_CASE("g2 closed-form identities") {
  for (double N : {1.0, 2.0, 3.0, 7.5}) {
    for (double a : {0.0, 0.4, 2.0}) {
      const G2Params p{N, a, 1.5, 3.0, 60.0};
      CHECK(g2_value(p, 1.5) == doctest::Approx(1.0 - 1.0 / N).epsilon(1e-14));
      CHECK(std::abs(g2_value(p, 1e6) - 1.0) < 1e-12);
      CHECK(g2_value(p, 1.5 + 4.2) == doctest::Approx(g2_value(p, 1.5 - 4.2)).epsilon(1e-14));
    }
  }
  CHECK(g2_value(G2Params{2.0, 0.0, 0.0, 1.0, 10.0}, 0.0) == doctest::Approx(0.5));
  CHECK_THROWS_AS((G2Params{0.5, 0.0, 0.0, 1.0, 10.0}.validate()), ConfigError);
  CHECK_THROWS_AS((G2Params{1.0, 0.0, 0.0, 0.0, 10.0}.validate()), ConfigError);
}

TEST_CASE("background correction") {
  CHECK(background_ratio(90.0, 10.0) == doctest::Approx(0.9));
  CHECK(g2_background_correct(0.37, 1.0) == doctest::Approx(0.37));
  // an ideal single emitter diluted by uncorrelated background
  const double rho = 0.8;
  const double measured = 1.0 - rho * rho;
  CHECK(std::abs(g2_background_correct(measured, rho)) < 1e-14);
  CHECK_THROWS_AS(g2_background_correct(0.2, 0.0), ConfigError);
  CHECK_THROWS_AS(g2_background_correct(0.2, 1.1), ConfigError);
  CHECK_THROWS_AS(background_ratio(0.0, 1.0), ConfigError);
}

TEST_CASE("saturation curve") {
  const SaturationParams p{119.3, 0.9, 0.0};
  CHECK(saturation_value(p, 0.9) == doctest::Approx(119.3 / 2.0));
  CHECK(saturation_value(p, 1e9) == doctest::Approx(119.3).epsilon(1e-6));
  const SaturationParams q{100.0, 1.0, 5.0};
  CHECK(saturation_value(q, 2.0) == doctest::Approx(100.0 * 2.0 / 3.0 + 10.0));
  CHECK_THROWS_AS((SaturationParams{-1.0, 1.0, 0.0}.validate()), ConfigError);
}

TEST_CASE("line shapes") {
  const LorentzianPeak l{-0.02, 1340.0, 4.0};
  CHECK(lorentzian(l, 1340.0) == doctest::Approx(-0.02));
  CHECK(lorentzian(l, 1342.0) == doctest::Approx(-0.01));
  const GaussianPeak g{5.0, 2.0, 0.3};
  CHECK(gaussian(g, 2.0) == doctest::Approx(5.0));
  CHECK(gaussian(g, 2.0 + 0.5 * g.fwhm()) == doctest::Approx(2.5));
  CHECK(fwhm_from_sigma(1.0) == doctest::Approx(2.0 * std::sqrt(2.0 * std::log(2.0))));
  CHECK(sigma_from_fwhm(fwhm_from_sigma(0.37)) == doctest::Approx(0.37));
}

TEST_CASE("polarization deviation") {
  const PolarizationTrace balanced[] = {{100.0, 100.0}, {50.0, 50.0}};
  CHECK(delta_pol(balanced) == 0.0);
  // pol1 / (pol1 + pol2) = 0.3584 gives +14.16 %
  const PolarizationTrace skewed[] = {{35.84, 64.16}};
  CHECK(delta_pol(skewed) == doctest::Approx(14.16).epsilon(1e-12));
  const PolarizationTrace mirrored[] = {{64.16, 35.84}};
  CHECK(delta_pol(mirrored) == doctest::Approx(-14.16).epsilon(1e-12));
  CHECK(preselect(balanced).accepted);
  CHECK_FALSE(preselect(skewed).accepted);
  CHECK_FALSE(preselect(mirrored).accepted);  // threshold on the magnitude
  const PolarizationTrace slight[] = {{49.5, 50.5}};
  CHECK(preselect(slight).delta_pol_percent == doctest::Approx(0.5));
  CHECK(preselect(slight).accepted);
  CHECK_FALSE(preselect(slight, 0.4).accepted);
  CHECK_THROWS_AS(delta_pol(std::span<const PolarizationTrace>{}), InsufficientData);
  const PolarizationTrace dark[] = {{0.0, 0.0}};
  CHECK_THROWS_AS(delta_pol(dark), ConfigError);
}

TEST_CASE("g2 fit recovers a single emitter") {
  const G2Params truth{1.0, 0.6, 0.0, 4.0, 80.0};
  std::mt19937_64 rng(1);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<double> tau, g2, sigma;
  for (int i = 0; i <= 400; ++i) {
    const double t = -200.0 + i;
    tau.push_back(t);
    g2.push_back(g2_value(truth, t) + noise(rng));
    sigma.push_back(0.01);
  }
  const G2Fit r = fit_g2(tau, g2, sigma);
  CHECK(r.fit.converged);
  CHECK(r.dip < 0.05);
  CHECK(r.emitters == 1);
  CHECK(std::abs(r.params.tau1 - 4.0) < 0.5);
  CHECK(std::abs(r.params.tau2 - 80.0) < 10.0);
  CHECK_THROWS_AS(fit_g2(std::vector<double>{0, 1, 2}, std::vector<double>{0, 1, 1}), InsufficientData);
}

TEST_CASE("g2 fit resolves two emitters") {
  const G2Params truth{2.0, 0.3, 1.0, 3.0, 50.0};
  std::vector<double> tau, g2;
  for (int i = 0; i <= 300; ++i) {
    tau.push_back(-150.0 + i);
    g2.push_back(g2_value(truth, tau.back()));
  }
  const G2Fit r = fit_g2(tau, g2);
  CHECK(r.params.N == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(r.dip == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(r.emitters == 2);
}

TEST_CASE("saturation fit by orthogonal regression") {
  const SaturationParams truth{119.3, 0.9, 5.0};
  std::vector<double> p, sp, c, sc;
  for (int i = 0; i < 25; ++i) {
    const double x = 0.05 + 0.24 * i;
    p.push_back(x);
    sp.push_back(0.03 * x);
    c.push_back(saturation_value(truth, x));
    sc.push_back(2.0);
  }
  const SaturationFit r = fit_saturation(p, sp, c, sc);
  CHECK(r.params.I_sat == doctest::Approx(119.3).epsilon(1e-6));
  CHECK(r.params.P_exc == doctest::Approx(0.9).epsilon(1e-6));
  CHECK(r.params.b == doctest::Approx(5.0).epsilon(1e-6));
}

TEST_CASE("ODMR fit resolves the splitting") {
  const OdmrParams truth{{-0.02, 1340.0, 4.0}, {-0.018, 1351.6, 4.0}, 1.0};
  std::mt19937_64 rng(9);
  std::normal_distribution<double> noise(0.0, 0.001);
  std::vector<double> x, y;
  for (int i = 0; i <= 200; ++i) {
    x.push_back(1320.0 + 0.25 * i);
    y.push_back(odmr_value(truth, x.back()) + noise(rng));
  }
  const OdmrFit r = fit_odmr(x, y);
  CHECK(std::abs(r.splitting - 11.6) < 0.3);
  CHECK(r.splitting_error > 0.0);
  CHECK(r.splitting_error < 0.3);
  CHECK(r.params.first.center < r.params.second.center);
}

TEST_CASE("double Gaussian fit and peak finding") {
  const PleLineParams truth{{40.0, -1.0, 0.085}, {25.0, 0.3, 0.085}, 2.0};
  std::vector<double> x, y;
  for (int i = 0; i <= 300; ++i) {
    x.push_back(-3.0 + 0.02 * i);
    y.push_back(ple_line_value(truth, x.back()));
  }
  const auto peaks = prominent_peaks(y);
  REQUIRE(peaks.size() == 2);
  CHECK(std::abs(x[peaks[0]] + 1.0) < 0.05);
  CHECK(std::abs(x[peaks[1]] - 0.3) < 0.05);
  const DoubleGaussianFit r = fit_double_gaussian(x, y);
  CHECK(r.params.first.center == doctest::Approx(-1.0).epsilon(1e-7));
  CHECK(r.params.second.center == doctest::Approx(0.3).epsilon(1e-7));
  CHECK(r.params.first.fwhm() == doctest::Approx(truth.first.fwhm()).epsilon(1e-6));
  CHECK(r.fit.r_squared > 0.999999);
}
