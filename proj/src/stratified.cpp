#include "planarcav/stratified.hpp"

#include <cmath>
#include <numbers>

#include "planarcav/errors.hpp"

namespace planarcav {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Interface "admittance" for the amplitude carried in the S-matrices.
cplx admittance(cplx index, cplx kz, Polarization pol) {
  return pol == Polarization::s ? kz : kz / (index * index);
}

SMatrix interface_smatrix(cplx q1, cplx q2) {
  const cplx sum = q1 + q2;
  if (sum == cplx(0.0)) throw NumericalDegeneracy("interface admittances cancel (q1 + q2 = 0)");
  SMatrix s;
  s.r_f = (q1 - q2) / sum;
  s.t_f = 2.0 * q1 / sum;
  s.r_b = -s.r_f;
  s.t_b = 2.0 * q2 / sum;
  return s;
}

}  // namespace

std::string to_string(Polarization pol) { return pol == Polarization::s ? "s" : "p"; }

std::string to_string(PolarizationMode mode) {
  switch (mode) {
    case PolarizationMode::s: return "s";
    case PolarizationMode::p: return "p";
    case PolarizationMode::average: return "avg";
  }
  return "?";
}

PolarizationMode parse_polarization_mode(const std::string& text) {
  if (text == "s") return PolarizationMode::s;
  if (text == "p") return PolarizationMode::p;
  if (text == "avg" || text == "average" || text == "unpolarized") return PolarizationMode::average;
  throw ConfigError("polarization must be s, p or avg, got '" + text + "'");
}

void Stack::validate() const {
  if (!incidence || !exit) throw ConfigError("stack needs incidence and exit media");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (!l.material) throw ConfigError("layer " + std::to_string(i) + " has no material");
    if (!std::isfinite(l.thickness_nm) || !(l.thickness_nm > 0.0)) {
      throw ConfigError("layer " + std::to_string(i) + " (" + l.material->name() +
                        ") thickness must be finite and > 0 nm");
    }
  }
}

Stack Stack::reversed() const {
  Stack out{exit, {layers.rbegin(), layers.rend()}, incidence};
  return out;
}

cplx longitudinal_wavevector(cplx index, double wavelength_nm, double k_parallel) {
  return longitudinal_wavevector(index, wavelength_nm, cplx(k_parallel));
}

cplx longitudinal_wavevector(cplx index, double wavelength_nm, cplx k_parallel) {
  const cplx k = kTwoPi * index / wavelength_nm;
  cplx kz = std::sqrt(k * k - k_parallel * k_parallel);
  if (kz.imag() < 0.0 || (kz.imag() == 0.0 && kz.real() < 0.0)) kz = -kz;
  return kz;
}

cplx longitudinal_wavevector(const MaterialTable& material, double wavelength_nm, double k_parallel) {
  return longitudinal_wavevector(material.index(wavelength_nm), wavelength_nm, k_parallel);
}

InterfaceCoefficients fresnel(cplx n1, cplx n2, cplx kz1, cplx kz2, Polarization pol) {
  if (pol == Polarization::s) {
    const cplx den = kz1 + kz2;
    if (den == cplx(0.0)) throw NumericalDegeneracy("s-wave Fresnel denominator vanishes");
    return {(kz1 - kz2) / den, 2.0 * kz1 / den};
  }
  const cplx a = n2 * n2 * kz1;
  const cplx b = n1 * n1 * kz2;
  const cplx den = a + b;
  if (den == cplx(0.0)) throw NumericalDegeneracy("p-wave Fresnel denominator vanishes");
  return {(a - b) / den, 2.0 * n1 * n2 * kz1 / den};
}

SMatrix star(const SMatrix& a, const SMatrix& b) {
  const cplx denom = 1.0 - a.r_b * b.r_f;
  if (denom == cplx(0.0)) throw NumericalDegeneracy("multiple-reflection series diverges (1 - r r' = 0)");
  SMatrix s;
  s.r_f = a.r_f + a.t_b * b.r_f * a.t_f / denom;
  s.t_f = b.t_f * a.t_f / denom;
  s.r_b = b.r_b + b.t_f * a.r_b * b.t_b / denom;
  s.t_b = a.t_b * b.t_b / denom;
  return s;
}

ResolvedStack resolve(const Stack& stack, double wavelength_nm) {
  stack.validate();
  if (!(wavelength_nm > 0.0)) throw RangeError("wavelength must be positive");
  ResolvedStack r;
  r.wavelength_nm = wavelength_nm;
  r.index.reserve(stack.layers.size() + 2);
  r.index.push_back(stack.incidence->index(wavelength_nm));
  for (const auto& l : stack.layers) {
    r.index.push_back(l.material->index(wavelength_nm));
    r.thickness.push_back(l.thickness_nm);
  }
  r.index.push_back(stack.exit->index(wavelength_nm));
  return r;
}

SMatrix section_smatrix(std::span<const cplx> index, std::span<const double> thickness,
                        double wavelength_nm, cplx k_parallel, Polarization pol) {
  if (index.size() < 2 || thickness.size() + 2 != index.size()) {
    throw ConfigError("section needs two bounding media and one thickness per interior layer");
  }
  cplx kz_prev = longitudinal_wavevector(index[0], wavelength_nm, k_parallel);
  cplx q_prev = admittance(index[0], kz_prev, pol);
  SMatrix total;
  for (std::size_t i = 1; i < index.size(); ++i) {
    const cplx kz = longitudinal_wavevector(index[i], wavelength_nm, k_parallel);
    const cplx q = admittance(index[i], kz, pol);
    total = star(total, interface_smatrix(q_prev, q));
    if (i + 1 < index.size()) {
      const cplx phase = std::exp(cplx(0.0, 1.0) * kz * thickness[i - 1]);
      total = star(total, SMatrix{0.0, phase, 0.0, phase});
    }
    q_prev = q;
  }
  return total;
}

StackAmplitudes stack_amplitudes(const ResolvedStack& stack, double k_parallel, Polarization pol) {
  const double wl = stack.wavelength_nm;
  const SMatrix s = section_smatrix(stack.index, stack.thickness, wl, k_parallel, pol);
  const cplx n_in = stack.index.front();
  const cplx n_out = stack.index.back();
  const cplx q_in = admittance(n_in, longitudinal_wavevector(n_in, wl, k_parallel), pol);
  const cplx q_out = admittance(n_out, longitudinal_wavevector(n_out, wl, k_parallel), pol);
  if (!(q_in.real() > 0.0)) throw RangeError("incident wave is not propagating in the incidence medium");
  StackAmplitudes a;
  a.r = s.r_f;
  a.t = pol == Polarization::s ? s.t_f : s.t_f * n_in / n_out;
  a.R = std::norm(a.r);
  a.T = std::norm(s.t_f) * q_out.real() / q_in.real();
  return a;
}

StackAmplitudes stack_amplitudes(const Stack& stack, const PlaneWaveContext& ctx) {
  if (!(ctx.k_parallel >= 0.0)) throw RangeError("k_parallel must be >= 0");
  return stack_amplitudes(resolve(stack, ctx.wavelength_nm), ctx.k_parallel, ctx.pol);
}

std::vector<ReflectivityPoint> reflectivity_spectrum(const Stack& stack,
                                                     std::span<const double> wavelengths_nm,
                                                     double angle_rad, PolarizationMode mode) {
  if (wavelengths_nm.empty()) throw ConfigError("reflectivity spectrum needs at least one wavelength");
  std::vector<ReflectivityPoint> out;
  out.reserve(wavelengths_nm.size());
  for (double wl : wavelengths_nm) {
    const ResolvedStack rs = resolve(stack, wl);
    const double kpar = kTwoPi * rs.index.front().real() * std::sin(angle_rad) / wl;
    double R = 0.0;
    switch (mode) {
      case PolarizationMode::s: R = stack_amplitudes(rs, kpar, Polarization::s).R; break;
      case PolarizationMode::p: R = stack_amplitudes(rs, kpar, Polarization::p).R; break;
      case PolarizationMode::average:
        R = 0.5 * (stack_amplitudes(rs, kpar, Polarization::s).R +
                   stack_amplitudes(rs, kpar, Polarization::p).R);
        break;
    }
    out.push_back({wl, R});
  }
  return out;
}

}  // namespace planarcav
