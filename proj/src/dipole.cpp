#include "planarcav/dipole.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>

#include "planarcav/errors.hpp"
#include "planarcav/quadrature.hpp"

namespace planarcav {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr cplx kI{0.0, 1.0};

const QuadratureRule& unit_rule(int order) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<QuadratureRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[order];
  if (!slot) slot = std::make_unique<QuadratureRule>(gauss_legendre(order, 0.0, 1.0));
  return *slot;
}

// The stack split around the host layer at one wavelength.
struct Emitter {
  ResolvedStack rs;
  std::size_t host = 0;  // index into rs.index
  double k0 = 0.0;
  cplx n_host;
  double n_top = 1.0;
  double above = 0.0;  // distance from the dipole to the top of the host layer
  double below = 0.0;  // distance to the bottom
  DipoleOrientation orientation = DipoleOrientation::horizontal;

  std::span<const cplx> upper_index() const {
    return std::span<const cplx>(rs.index).subspan(0, host + 1);
  }
  std::span<const double> upper_thickness() const {
    return std::span<const double>(rs.thickness).subspan(0, host - 1);
  }
  std::span<const cplx> lower_index() const { return std::span<const cplx>(rs.index).subspan(host); }
  std::span<const double> lower_thickness() const {
    return std::span<const double>(rs.thickness).subspan(host);
  }
  double thickness() const { return above + below; }
};

Emitter make_emitter(const Stack& stack, const DipoleConfig& dipole, double wavelength_nm) {
  if (dipole.host_layer >= stack.layers.size()) {
    throw ConfigError("dipole host layer " + std::to_string(dipole.host_layer) +
                      " out of range (stack has " + std::to_string(stack.layers.size()) + " layers)");
  }
  Emitter e;
  e.rs = resolve(stack, wavelength_nm);
  e.host = dipole.host_layer + 1;
  e.k0 = 2.0 * kPi / wavelength_nm;
  e.n_host = e.rs.index[e.host];
  e.orientation = dipole.orientation;
  const double d = e.rs.thickness[dipole.host_layer];
  if (!(dipole.position_nm >= 0.0 && dipole.position_nm <= d)) {
    std::ostringstream msg;
    msg << "dipole position " << dipole.position_nm << " nm outside host layer [0, " << d << "] nm";
    throw ConfigError(msg.str());
  }
  if (e.n_host.imag() > 0.0) {
    throw UnsupportedConfiguration("dipole host layer '" + stack.layers[dipole.host_layer].material->name() +
                                   "' is absorbing at " + std::to_string(wavelength_nm) + " nm");
  }
  const cplx n_top = e.rs.index.front();
  if (n_top.imag() != 0.0) {
    throw UnsupportedConfiguration("collection medium '" + stack.incidence->name() + "' must be lossless");
  }
  e.n_top = n_top.real();
  e.below = dipole.position_nm;
  e.above = d - dipole.position_nm;
  return e;
}

// Amplitudes of the plane wave leaving the stack into the top medium, with
// the azimuthal factor stripped: horizontal s carries -sin(phi'), horizontal
// p carries cos(phi'), vertical p has none. p is an H amplitude.
struct TopAmplitudes {
  cplx s{0.0};
  cplx p{0.0};
};

cplx outgoing(const Emitter& e, cplx kz, const SMatrix& up, const SMatrix& down, cplx src_up,
              cplx src_down) {
  const cplx cavity = 1.0 - up.r_b * down.r_f * std::exp(2.0 * kI * kz * e.thickness());
  if (std::abs(cavity) == 0.0) throw NumericalDegeneracy("cavity round-trip factor vanishes");
  const cplx upgoing = (src_up * std::exp(kI * kz * e.above) +
                        src_down * down.r_f * std::exp(kI * kz * (e.above + 2.0 * e.below))) /
                       cavity;
  return up.t_b * upgoing;
}

TopAmplitudes top_amplitudes(const Emitter& e, double k_par) {
  const double wl = e.rs.wavelength_nm;
  const cplx kz = longitudinal_wavevector(e.n_host, wl, k_par);
  if (kz == cplx(0.0)) throw NumericalDegeneracy("emission exactly along the host layer plane");
  TopAmplitudes out;
  const SMatrix up_p = section_smatrix(e.upper_index(), e.upper_thickness(), wl, k_par, Polarization::p);
  const SMatrix down_p = section_smatrix(e.lower_index(), e.lower_thickness(), wl, k_par, Polarization::p);
  if (e.orientation == DipoleOrientation::horizontal) {
    const SMatrix up_s = section_smatrix(e.upper_index(), e.upper_thickness(), wl, k_par, Polarization::s);
    const SMatrix down_s = section_smatrix(e.lower_index(), e.lower_thickness(), wl, k_par, Polarization::s);
    const cplx src_s = e.k0 / kz;
    out.s = outgoing(e, kz, up_s, down_s, src_s, src_s);
    out.p = outgoing(e, kz, up_p, down_p, 1.0, -1.0);
  } else {
    const cplx src_p = -k_par / kz;
    out.p = outgoing(e, kz, up_p, down_p, src_p, src_p);
  }
  return out;
}

// Azimuthal sums of sin^2 and cos^2 of (phi - azimuth) on the trapezoid grid.
struct AzimuthWeights {
  double sin2 = 0.0;
  double cos2 = 0.0;
  double flat = 0.0;
};

AzimuthWeights azimuth_weights(int points, double azimuth) {
  AzimuthWeights w;
  const double dphi = 2.0 * kPi / points;
  for (int j = 0; j < points; ++j) {
    const double phi = j * dphi - azimuth;
    const double s = std::sin(phi), c = std::cos(phi);
    w.sin2 += dphi * s * s;
    w.cos2 += dphi * c * c;
    w.flat += dphi;
  }
  return w;
}

double radial_density(const Emitter& e, const TopAmplitudes& a, double cos_theta,
                      const AzimuthWeights& w) {
  const double kz_top = e.k0 * e.n_top * cos_theta;
  const double pre = e.n_top * (kz_top / e.k0) * (kz_top / e.k0);
  const double p_e = std::norm(a.p) / (e.n_top * e.n_top);
  if (e.orientation == DipoleOrientation::horizontal) return pre * (std::norm(a.s) * w.sin2 + p_e * w.cos2);
  return pre * p_e * w.flat;
}

double integrate_cone(const Emitter& e, double na, int order, const AzimuthWeights& w) {
  const QuadratureRule& rule = unit_rule(order);
  const double c_min = std::sqrt(std::max(0.0, 1.0 - na * na));
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double u = c_min + (1.0 - c_min) * rule.nodes[i];
    const double sin_t = std::sqrt(std::max(0.0, 1.0 - u * u));
    const double k_par = e.k0 * e.n_top * sin_t;
    sum += (1.0 - c_min) * rule.weights[i] * radial_density(e, top_amplitudes(e, k_par), u, w);
  }
  return sum;
}

}  // namespace

std::string to_string(DipoleOrientation o) {
  return o == DipoleOrientation::horizontal ? "horizontal" : "vertical";
}

DipoleOrientation parse_orientation(const std::string& text) {
  if (text == "horizontal" || text == "h" || text == "parallel") return DipoleOrientation::horizontal;
  if (text == "vertical" || text == "v" || text == "perpendicular") return DipoleOrientation::vertical;
  throw ConfigError("dipole orientation must be horizontal or vertical, got '" + text + "'");
}

std::string to_string(ReferenceModel m) {
  return m == ReferenceModel::semi_infinite ? "semi_infinite" : "homogeneous";
}

ReferenceModel parse_reference_model(const std::string& text) {
  if (text == "semi_infinite" || text == "semi-infinite") return ReferenceModel::semi_infinite;
  if (text == "homogeneous") return ReferenceModel::homogeneous;
  throw ConfigError("reference model must be semi_infinite or homogeneous, got '" + text + "'");
}

DipoleConfig DipoleConfig::relative(const Stack& stack, std::size_t host_layer, double fraction,
                                    DipoleOrientation orientation) {
  if (host_layer >= stack.layers.size()) throw ConfigError("dipole host layer out of range");
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ConfigError("relative dipole position must lie in [0, 1]");
  DipoleConfig d;
  d.orientation = orientation;
  d.host_layer = host_layer;
  d.position_nm = fraction * stack.layers[host_layer].thickness_nm;
  return d;
}

void CollectionGeometry::validate() const {
  if (!(numerical_aperture > 0.0 && numerical_aperture <= 1.0)) {
    throw RangeError("numerical aperture must lie in (0, 1], got " + std::to_string(numerical_aperture));
  }
  if (quadrature_order < 2) throw ConfigError("quadrature order must be >= 2");
  if (azimuth_points < 3) throw ConfigError("azimuth points must be >= 3");
}

double angular_power_density(const Stack& stack, const DipoleConfig& dipole, double wavelength_nm,
                             double theta, double phi) {
  const Emitter e = make_emitter(stack, dipole, wavelength_nm);
  if (!(theta >= 0.0 && theta < kPi / 2)) throw RangeError("theta must lie in [0, pi/2)");
  const double k_par = e.k0 * e.n_top * std::sin(theta);
  const TopAmplitudes a = top_amplitudes(e, k_par);
  const double s = std::sin(phi - dipole.azimuth_rad), c = std::cos(phi - dipole.azimuth_rad);
  return radial_density(e, a, std::cos(theta), AzimuthWeights{s * s, c * c, 1.0});
}

double collected_power(const Stack& stack, const DipoleConfig& dipole, double wavelength_nm,
                       const CollectionGeometry& geom) {
  geom.validate();
  const Emitter e = make_emitter(stack, dipole, wavelength_nm);
  const AzimuthWeights w = azimuth_weights(geom.azimuth_points, dipole.azimuth_rad);
  const double value = integrate_cone(e, geom.numerical_aperture, geom.quadrature_order, w);
  if (!std::isfinite(value)) {
    throw QuadratureError("collected power is not finite at " + std::to_string(wavelength_nm) + " nm");
  }
  if (geom.check_convergence) {
    const double refined = integrate_cone(e, geom.numerical_aperture, 2 * geom.quadrature_order, w);
    const double rel = std::abs(refined - value) / std::max(std::abs(refined), 1e-300);
    if (rel > geom.convergence_tolerance) {
      std::ostringstream msg;
      msg << "angular quadrature not converged at " << wavelength_nm << " nm: order "
          << geom.quadrature_order << " -> " << value << ", order " << 2 * geom.quadrature_order
          << " -> " << refined << " (relative change " << rel << ")";
      throw QuadratureError(msg.str());
    }
  }
  return value;
}

double bulk_reference_power(const MaterialTable& bulk, double wavelength_nm,
                            const CollectionGeometry& geom, DipoleOrientation orientation,
                            ReferenceModel model, double collection_index) {
  geom.validate();
  const cplx n_b = bulk.index(wavelength_nm);
  if (n_b.imag() != 0.0) throw UnsupportedConfiguration("bulk reference material must be lossless");
  const double nb = n_b.real();
  const double c = std::sqrt(std::max(0.0, 1.0 - geom.numerical_aperture * geom.numerical_aperture));

  if (model == ReferenceModel::homogeneous) {
    // n * integral of |p_perp|^2 over the cone, in closed form.
    if (orientation == DipoleOrientation::horizontal) {
      return nb * kPi * ((1.0 - c) + (1.0 - c * c * c) / 3.0);
    }
    return nb * 2.0 * kPi * ((1.0 - c) - (1.0 - c * c * c) / 3.0);
  }

  if (!(collection_index > 0.0)) throw ConfigError("collection index must be positive");
  const double na_med = collection_index;
  const double k0 = 2.0 * kPi / wavelength_nm;
  const QuadratureRule& rule = unit_rule(geom.quadrature_order);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double u = c + (1.0 - c) * rule.nodes[i];
    const double k_par = k0 * na_med * std::sqrt(std::max(0.0, 1.0 - u * u));
    const cplx kz_b = longitudinal_wavevector(n_b, wavelength_nm, k_par);
    const cplx kz_a = longitudinal_wavevector(cplx(na_med), wavelength_nm, k_par);
    const double kz_top = k0 * na_med * u;
    const double pre = na_med * (kz_top / k0) * (kz_top / k0);
    const auto ts = fresnel(n_b, na_med, kz_b, kz_a, Polarization::s).t;
    const auto tp = fresnel(n_b, na_med, kz_b, kz_a, Polarization::p).t;
    double density = 0.0;
    if (orientation == DipoleOrientation::horizontal) {
      // azimuthal integrals of sin^2 and cos^2 are both pi
      const double s_part = std::norm(ts * (k0 / kz_b));
      const double p_part = std::norm(tp / nb);
      density = pre * kPi * (s_part + p_part);
    } else {
      const double p_part = std::norm(tp * (k_par / (kz_b * nb)));
      density = pre * 2.0 * kPi * p_part;
    }
    sum += (1.0 - c) * rule.weights[i] * density;
  }
  return sum;
}

std::vector<EnhancementPoint> enhancement_spectrum(const Stack& stack, const DipoleConfig& dipole,
                                                   std::span<const double> wavelengths_nm,
                                                   const CollectionGeometry& geom,
                                                   const EnhancementOptions& options) {
  if (dipole.host_layer >= stack.layers.size()) throw ConfigError("dipole host layer out of range");
  const MaterialPtr bulk = options.bulk_material ? options.bulk_material : stack.layers[dipole.host_layer].material;
  std::vector<EnhancementPoint> out;
  out.reserve(wavelengths_nm.size());
  for (double wl : wavelengths_nm) {
    const double top_n = stack.incidence->index(wl).real();
    const double num = collected_power(stack, dipole, wl, geom);
    const double den = bulk_reference_power(*bulk, wl, geom, dipole.orientation, options.reference, top_n);
    if (!(den > 0.0)) throw NumericalDegeneracy("bulk reference power vanishes");
    out.push_back({wl, num / den});
  }
  return out;
}

double homogeneous_power(double n) { return 8.0 * kPi * n / 3.0; }

double radiated_power(const Stack& stack, const DipoleConfig& dipole, double wavelength_nm, Side side,
                      int order_per_segment) {
  Stack s = stack;
  DipoleConfig d = dipole;
  if (side == Side::bottom) {
    s = stack.reversed();
    d.host_layer = stack.layers.size() - 1 - dipole.host_layer;
    d.position_nm = stack.layers.at(dipole.host_layer).thickness_nm - dipole.position_nm;
  }
  const Emitter e = make_emitter(s, d, wavelength_nm);
  const AzimuthWeights w = azimuth_weights(12, d.azimuth_rad);

  // Break the cos(theta) range where k_par crosses the light line of a
  // lower-index medium; amplitudes have square-root kinks there.
  std::vector<double> breaks{0.0, 1.0};
  for (const cplx& n : e.rs.index) {
    const double ratio = n.real() / e.n_top;
    if (n.imag() == 0.0 && ratio > 0.0 && ratio < 1.0) breaks.push_back(std::sqrt(1.0 - ratio * ratio));
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  const QuadratureRule& rule = unit_rule(order_per_segment);
  double sum = 0.0;
  for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
    const double lo = breaks[b], hi = breaks[b + 1];
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      // smoothstep map flattens the endpoint kinks
      const double t = rule.nodes[i];
      const double u = lo + (hi - lo) * t * t * (3.0 - 2.0 * t);
      const double jac = (hi - lo) * 6.0 * t * (1.0 - t);
      if (u >= 1.0 || u <= 0.0) continue;
      const double k_par = e.k0 * e.n_top * std::sqrt(1.0 - u * u);
      sum += rule.weights[i] * jac * radial_density(e, top_amplitudes(e, k_par), u, w);
    }
  }
  return sum;
}

double purcell_factor(const Stack& stack, const DipoleConfig& dipole, double wavelength_nm) {
  const Emitter e = make_emitter(stack, dipole, wavelength_nm);
  if (e.above <= 0.0 || e.below <= 0.0) {
    throw UnsupportedConfiguration("total power diverges for a dipole on an interface");
  }
  const double wl = wavelength_nm;
  const double k = e.k0 * e.n_host.real();
  double n_max = 0.0;
  for (const cplx& n : e.rs.index) n_max = std::max(n_max, std::abs(n));
  const double k_max = (n_max + 1.0) * e.k0;
  const double depth = 0.5 * e.k0;
  const bool horizontal = e.orientation == DipoleOrientation::horizontal;

  auto integrand = [&](cplx kp) -> cplx {
    const cplx kz = longitudinal_wavevector(e.n_host, wl, kp);
    const cplx ea = std::exp(2.0 * kI * kz * e.above);
    const cplx eb = std::exp(2.0 * kI * kz * e.below);
    auto reflected = [&](Polarization pol, double sign) {
      const SMatrix up = section_smatrix(e.upper_index(), e.upper_thickness(), wl, kp, pol);
      const SMatrix down = section_smatrix(e.lower_index(), e.lower_thickness(), wl, kp, pol);
      const cplx ru = up.r_b * ea, rd = down.r_f * eb;
      return (sign * (ru + rd) + 2.0 * ru * rd) / (1.0 - ru * rd);
    };
    if (horizontal) {
      return kp * (reflected(Polarization::s, 1.0) / kz + (kz / (k * k)) * reflected(Polarization::p, -1.0));
    }
    return kp * (kp * kp / (k * k * kz)) * reflected(Polarization::p, 1.0);
  };

  const QuadratureRule& rule = unit_rule(24);
  cplx total{0.0};
  // deformed segment: k_par = t - i depth sin(pi t / k_max), t in [0, k_max]
  const int panels = 24;
  for (int pnl = 0; pnl < panels; ++pnl) {
    const double t0 = k_max * pnl / panels, t1 = k_max * (pnl + 1) / panels;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double t = t0 + (t1 - t0) * rule.nodes[i];
      const cplx kp(t, -depth * std::sin(kPi * t / k_max));
      const cplx dk(1.0, -depth * kPi / k_max * std::cos(kPi * t / k_max));
      total += (t1 - t0) * rule.weights[i] * integrand(kp) * dk;
    }
  }
  // real tail: evanescent reflections decay at least like exp(-2 k_par min(a, b))
  const double decay = 2.0 * std::min(e.above, e.below);
  const double width = std::min(k_max, 2.0 / decay);
  double t0 = k_max;
  for (int pnl = 0; pnl < 4000; ++pnl) {
    const double t1 = t0 + width;
    cplx part{0.0};
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double t = t0 + width * rule.nodes[i];
      part += width * rule.weights[i] * integrand(cplx(t, 0.0));
    }
    total += part;
    if ((t1 - k_max) * decay > 60.0 && std::abs(part) < 1e-14 * std::abs(total)) break;
    t0 = t1;
  }
  const double pref = horizontal ? 3.0 / (4.0 * k) : 3.0 / (2.0 * k);
  const double value = 1.0 + (pref * total).real();
  if (!std::isfinite(value)) throw QuadratureError("Purcell integral is not finite");
  return value;
}

}  // namespace planarcav
