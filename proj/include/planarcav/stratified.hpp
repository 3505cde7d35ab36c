#pragma once

// Plane-wave optics of planar multilayers.
//
// Conventions (shared with dipole.hpp):
//  * time dependence exp(-i w t); a wave exp(i (k_par x + kz z)) with
//    Im(kz) >= 0 decays along its propagation direction.
//  * s waves are described by their E amplitude along s = z x k_par_hat.
//  * p waves are described internally by their H amplitude (n * |E|) along s.
//    The E vector of a p wave is p = s x k_hat for both up- and down-going
//    waves, so at normal incidence r_p = -r_s.
//  * Reflection coefficients are identical for the E and H descriptions.
//    Transmission coefficients returned by fresnel() and stack_amplitudes()
//    are E-field ratios; internal S-matrices carry the H ratio for p.
//
// Stacks are evaluated with scalar scattering matrices combined by the
// Redheffer star product, so only decaying exponentials ever appear.

#include <complex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "planarcav/materials.hpp"

namespace planarcav {

using cplx = std::complex<double>;

enum class Polarization { s, p };
enum class PolarizationMode { s, p, average };

std::string to_string(Polarization pol);
std::string to_string(PolarizationMode mode);
PolarizationMode parse_polarization_mode(const std::string& text);

struct Layer {
  MaterialPtr material;
  double thickness_nm = 0.0;
};

/// Finite layers between two semi-infinite media. `layers` runs from the
/// incidence side (top) to the exit side (bottom). Layer thicknesses must be
/// finite and strictly positive; validate() enforces it.
struct Stack {
  MaterialPtr incidence;
  std::vector<Layer> layers;
  MaterialPtr exit;

  void validate() const;
  Stack reversed() const;
};

struct PlaneWaveContext {
  double wavelength_nm = 0.0;
  double k_parallel = 0.0;  // rad/nm, conserved across layers
  Polarization pol = Polarization::s;
};

/// kz = sqrt((2 pi n / lambda)^2 - k_par^2) on the branch Im(kz) >= 0,
/// and Re(kz) >= 0 when kz is real.
cplx longitudinal_wavevector(cplx index, double wavelength_nm, double k_parallel);
cplx longitudinal_wavevector(const MaterialTable& material, double wavelength_nm, double k_parallel);
/// Complex k_par, used for contour integrals; same branch rule.
cplx longitudinal_wavevector(cplx index, double wavelength_nm, cplx k_parallel);

struct InterfaceCoefficients {
  cplx r;
  cplx t;  // E-field transmission
};

/// Single-interface amplitudes from medium 1 into medium 2.
///   s: r = (kz1 - kz2) / (kz1 + kz2),              t = 2 kz1 / (kz1 + kz2)
///   p: r = (n2^2 kz1 - n1^2 kz2) / (n2^2 kz1 + n1^2 kz2),
///      t = 2 n1 n2 kz1 / (n2^2 kz1 + n1^2 kz2)
/// Throws NumericalDegeneracy when the denominator vanishes.
InterfaceCoefficients fresnel(cplx n1, cplx n2, cplx kz1, cplx kz2, Polarization pol);

/// Scalar scattering matrix of a 1D section. "Forward" runs from the first
/// medium of the section to the last. Reference planes sit on the outer
/// interfaces of the section.
struct SMatrix {
  cplx r_f{0.0};
  cplx t_f{1.0};
  cplx r_b{0.0};
  cplx t_b{1.0};
};

/// a followed by b.
SMatrix star(const SMatrix& a, const SMatrix& b);

/// Indices and thicknesses of a stack resolved at one wavelength.
/// index[0] is the incidence medium, index.back() the exit medium, and
/// thickness[i] belongs to index[i + 1].
struct ResolvedStack {
  double wavelength_nm = 0.0;
  std::vector<cplx> index;
  std::vector<double> thickness;
};

ResolvedStack resolve(const Stack& stack, double wavelength_nm);

/// S-matrix of media index[0..N-1] with interior thicknesses (size N-2).
/// p-polarized entries relate H amplitudes.
SMatrix section_smatrix(std::span<const cplx> index, std::span<const double> thickness,
                        double wavelength_nm, cplx k_parallel, Polarization pol);

struct StackAmplitudes {
  cplx r;    // reflection amplitude
  cplx t;    // E-field transmission amplitude
  double R;  // reflected power fraction |r|^2
  double T;  // transmitted power fraction (z-component of Poynting flux)
};

/// T = |t_H|^2 Re(q_exit) / Re(q_inc) with q = kz (s) or kz / n^2 (p).
StackAmplitudes stack_amplitudes(const Stack& stack, const PlaneWaveContext& ctx);
StackAmplitudes stack_amplitudes(const ResolvedStack& stack, double k_parallel, Polarization pol);

struct ReflectivityPoint {
  double wavelength_nm;
  double R;
};

/// R versus wavelength at a fixed incidence angle (radians, in the incidence
/// medium). `average` is the mean of s and p.
std::vector<ReflectivityPoint> reflectivity_spectrum(const Stack& stack,
                                                     std::span<const double> wavelengths_nm,
                                                     double angle_rad, PolarizationMode mode);

}  // namespace planarcav
