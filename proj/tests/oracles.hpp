#pragma once

// Independent closed-form references shared by unit and acceptance tests.

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <random>
#include <vector>

#include "planarcav/stratified.hpp"

namespace oracle {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

inline planarcav::MaterialPtr constant(double n, double k = 0.0) {
  return std::make_shared<const planarcav::MaterialTable>(
      planarcav::MaterialTable::constant("n" + std::to_string(n), {n, k}, 100.0, 5000.0));
}

/// Single film (n1, d) between n0 and n2, all lossless, normal incidence.
inline double airy_reflectivity(double n0, double n1, double n2, double d, double wavelength) {
  const double r01 = (n0 - n1) / (n0 + n1);
  const double r12 = (n1 - n2) / (n1 + n2);
  const double delta = 2.0 * kPi * n1 * d / wavelength;
  const double c = std::cos(2.0 * delta);
  return (r01 * r01 + r12 * r12 + 2.0 * r01 * r12 * c) / (1.0 + r01 * r01 * r12 * r12 + 2.0 * r01 * r12 * c);
}

/// Abeles characteristic-matrix route for s polarization: complex r and T,
/// written for the exp(-i omega t) convention.
struct AbelesResult {
  cplx r;
  double T;
};

inline AbelesResult abeles_s(const std::vector<cplx>& n, const std::vector<double>& d, double wavelength,
                             double sin_theta0) {
  const double k0 = 2.0 * kPi / wavelength;
  const cplx beta = n.front() * sin_theta0;  // conserved n sin(theta)
  auto cos_t = [&](cplx ni) {
    cplx c = std::sqrt(1.0 - (beta / ni) * (beta / ni));
    if (c.imag() < 0.0) c = -c;
    return c;
  };
  cplx m11 = 1.0, m12 = 0.0, m21 = 0.0, m22 = 1.0;
  for (std::size_t j = 1; j + 1 < n.size(); ++j) {
    const cplx eta = n[j] * cos_t(n[j]);
    const cplx phase = k0 * n[j] * cos_t(n[j]) * d[j - 1];
    const cplx a11 = std::cos(phase), a12 = cplx(0.0, -1.0) * std::sin(phase) / eta;
    const cplx a21 = cplx(0.0, -1.0) * eta * std::sin(phase), a22 = std::cos(phase);
    const cplx b11 = m11 * a11 + m12 * a21, b12 = m11 * a12 + m12 * a22;
    const cplx b21 = m21 * a11 + m22 * a21, b22 = m21 * a12 + m22 * a22;
    m11 = b11, m12 = b12, m21 = b21, m22 = b22;
  }
  const cplx eta0 = n.front() * cos_t(n.front());
  const cplx etas = n.back() * cos_t(n.back());
  const cplx B = m11 + m12 * etas;
  const cplx C = m21 + m22 * etas;
  const cplx r = (eta0 * B - C) / (eta0 * B + C);
  const double T = 4.0 * eta0.real() * etas.real() / std::norm(eta0 * B + C);
  return {r, T};
}

/// Random lossless stack: 1..8 layers, 10..500 nm, indices 1.3..3.5, angle below
/// total internal reflection at every interface.
struct RandomStack {
  planarcav::Stack stack;
  std::vector<cplx> index;
  std::vector<double> thickness;
  double sin_theta0 = 0.0;
};

inline RandomStack random_lossless_stack(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> layers(1, 8);
  std::uniform_real_distribution<double> idx(1.3, 3.5), thick(10.0, 500.0), unit(0.0, 1.0);
  RandomStack out;
  const int m = layers(rng);
  out.index.push_back(idx(rng));
  for (int i = 0; i < m; ++i) {
    out.index.push_back(idx(rng));
    out.thickness.push_back(thick(rng));
  }
  out.index.push_back(idx(rng));
  double n_min = out.index.front().real();
  for (const auto& n : out.index) n_min = std::min(n_min, n.real());
  // n0 sin(theta0) kept below the smallest index: propagating everywhere
  out.sin_theta0 = 0.95 * unit(rng) * n_min / out.index.front().real();
  out.stack.incidence = constant(out.index.front().real());
  out.stack.exit = constant(out.index.back().real());
  for (int i = 0; i < m; ++i) out.stack.layers.push_back({constant(out.index[i + 1].real()), out.thickness[i]});
  return out;
}

}  // namespace oracle
