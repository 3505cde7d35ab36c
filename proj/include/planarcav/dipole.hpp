#pragma once

// Far-field emission of a point dipole embedded in a planar stack.
//
// Power is expressed in units where a unit dipole in an infinite medium of
// index n radiates dP/dOmega = n |p_perp|^2, i.e. 8 pi n / 3 in total. The
// same units are used for collected power, the bulk reference, radiated
// power and total power, so ratios between them are physical.
//
// The dipole sits in Stack::layers[host_layer]. Its position is measured from
// the lower boundary of that layer, i.e. the interface on the exit side.
// Collection happens in the incidence half-space ("top").

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "planarcav/stratified.hpp"

namespace planarcav {

enum class DipoleOrientation { horizontal, vertical };

std::string to_string(DipoleOrientation o);
DipoleOrientation parse_orientation(const std::string& text);

struct DipoleConfig {
  DipoleOrientation orientation = DipoleOrientation::horizontal;
  std::size_t host_layer = 0;
  double position_nm = 0.0;  // from the exit-side boundary of the host layer
  double azimuth_rad = 0.0;  // in-plane direction of a horizontal dipole

  /// Position given as a fraction of the host thickness (0 = exit side).
  static DipoleConfig relative(const Stack& stack, std::size_t host_layer, double fraction,
                               DipoleOrientation orientation = DipoleOrientation::horizontal);
};

struct CollectionGeometry {
  double numerical_aperture = 0.9;  // sine of the cone half-angle in the collection medium
  int quadrature_order = 64;        // Gauss-Legendre nodes in cos(theta)
  int azimuth_points = 12;          // trapezoid nodes in phi (exact for these integrands when >= 3)
  bool check_convergence = false;   // also evaluate at twice the order and compare
  double convergence_tolerance = 1e-6;

  void validate() const;
};

/// How the bulk normalization is defined.
///  semi_infinite: dipole deep inside a bulk half-space below a planar
///                 interface with the collection medium (measured bulk sample).
///  homogeneous:   dipole in an infinite bulk medium, same angular cone.
enum class ReferenceModel { semi_infinite, homogeneous };

std::string to_string(ReferenceModel m);
ReferenceModel parse_reference_model(const std::string& text);

/// dP/dOmega in the incidence medium at polar angle theta (measured from the
/// stack normal, in that medium) and azimuth phi.
double angular_power_density(const Stack& stack, const DipoleConfig& dipole,
                             double wavelength_nm, double theta, double phi);

/// Power radiated into the collection cone theta <= asin(NA) of the incidence medium.
/// Throws UnsupportedConfiguration for an absorbing host or a lossy collection medium.
double collected_power(const Stack& stack, const DipoleConfig& dipole, double wavelength_nm,
                       const CollectionGeometry& geom);

/// Collected power of the same dipole in the bulk reference geometry.
/// `collection_index` is the medium the objective looks from (air by default).
double bulk_reference_power(const MaterialTable& bulk, double wavelength_nm,
                            const CollectionGeometry& geom, DipoleOrientation orientation,
                            ReferenceModel model = ReferenceModel::semi_infinite,
                            double collection_index = 1.0);

struct EnhancementOptions {
  ReferenceModel reference = ReferenceModel::semi_infinite;
  MaterialPtr bulk_material;  // null: the host layer's material
};

struct EnhancementPoint {
  double wavelength_nm;
  double enhancement;
};

std::vector<EnhancementPoint> enhancement_spectrum(const Stack& stack, const DipoleConfig& dipole,
                                                   std::span<const double> wavelengths_nm,
                                                   const CollectionGeometry& geom,
                                                   const EnhancementOptions& options = {});

// ---- auxiliary outputs (not part of the enhancement figure of merit) ----

enum class Side { top, bottom };

/// Power radiated into the whole far-field half-space on one side.
double radiated_power(const Stack& stack, const DipoleConfig& dipole, double wavelength_nm,
                      Side side, int order_per_segment = 64);

/// Total power delivered by the dipole (radiated, absorbed and guided),
/// relative to the same dipole in an infinite host medium: the Purcell factor.
/// Evaluated by integrating the reflected Green's function over k_parallel on
/// a contour deformed below the real axis.
double purcell_factor(const Stack& stack, const DipoleConfig& dipole, double wavelength_nm);

/// Power of a unit dipole in an infinite medium of real index n.
double homogeneous_power(double n);

}  // namespace planarcav
