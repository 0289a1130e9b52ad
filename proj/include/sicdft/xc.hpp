#pragma once

// Local spin-density exchange-correlation: Slater exchange plus optional
// Perdew-Wang 1992 correlation.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "sicdft/errors.hpp"
#include "sicdft/grid.hpp"

namespace sicdft {

enum class Correlation { none, perdew_wang_92 };

struct XCFunctionalSpec {
  Correlation correlation = Correlation::perdew_wang_92;

  friend bool operator==(const XCFunctionalSpec&, const XCFunctionalSpec&) = default;
};

inline const char* to_string(Correlation c) {
  return c == Correlation::none ? "none" : "perdew-wang-92";
}

inline Correlation parse_correlation(const std::string& name) {
  if (name == "none") return Correlation::none;
  if (name == "perdew-wang-92" || name == "pw92") return Correlation::perdew_wang_92;
  throw ConfigurationError("xc.correlation: unknown functional '" + name + "'");
}

/// Energy per volume and the two spin potentials at one point.
struct XCPoint {
  double energy_density = 0.0;
  double v_up = 0.0;
  double v_down = 0.0;
};

namespace pw92 {

struct Params {
  double a, alpha1, beta1, beta2, beta3, beta4;
};

inline constexpr Params kParamagnetic{0.031091, 0.21370, 7.5957, 3.5876, 1.6382, 0.49294};
inline constexpr Params kFerromagnetic{0.015545, 0.20548, 14.1189, 6.1977, 3.3662, 0.62517};
inline constexpr Params kMinusSpinStiffness{0.016887, 0.11125, 10.357, 3.6231, 0.88026, 0.49671};

/// G(rs) and dG/drs of the PW92 interpolation form.
inline void g_form(const Params& p, double rs, double& g, double& dg) {
  const double srs = std::sqrt(rs);
  const double q = p.beta1 * srs + p.beta2 * rs + p.beta3 * rs * srs + p.beta4 * rs * rs;
  const double dq = 0.5 * p.beta1 / srs + p.beta2 + 1.5 * p.beta3 * srs + 2.0 * p.beta4 * rs;
  const double log_term = std::log1p(1.0 / (2.0 * p.a * q));
  g = -2.0 * p.a * (1.0 + p.alpha1 * rs) * log_term;
  dg = -2.0 * p.a * p.alpha1 * log_term +
       2.0 * p.a * (1.0 + p.alpha1 * rs) * dq / (2.0 * p.a * q * q + q);
}

}  // namespace pw92

/// Below this density a spin channel contributes nothing.
inline constexpr double kDensityCutoff = 1e-30;

inline XCPoint lsda_point(double rho_up, double rho_down, const XCFunctionalSpec& spec) {
  XCPoint out;
  rho_up = rho_up > kDensityCutoff ? rho_up : 0.0;
  rho_down = rho_down > kDensityCutoff ? rho_down : 0.0;
  const double rho = rho_up + rho_down;
  if (rho <= 0.0) return out;

  // Exchange, spin-scaled: e_x = -(3/4)(6/pi)^(1/3) sum_s rho_s^(4/3).
  const double cx = std::cbrt(6.0 / std::numbers::pi);
  for (int s = 0; s < 2; ++s) {
    const double rs_ = s == 0 ? rho_up : rho_down;
    if (rs_ <= 0.0) continue;
    const double c = std::cbrt(rs_);
    out.energy_density += -0.75 * cx * rs_ * c;
    (s == 0 ? out.v_up : out.v_down) += -cx * c;
  }

  if (spec.correlation == Correlation::none) return out;

  const double rs = std::cbrt(3.0 / (4.0 * std::numbers::pi * rho));
  double zeta = (rho_up - rho_down) / rho;
  zeta = std::clamp(zeta, -1.0, 1.0);
  static const double two43 = std::pow(2.0, 4.0 / 3.0);
  const double fdd0 = 8.0 / (9.0 * (two43 - 2.0));
  const double opz = 1.0 + zeta, omz = 1.0 - zeta;
  const double f = (opz * std::cbrt(opz) + omz * std::cbrt(omz) - 2.0) / (two43 - 2.0);
  const double df = (4.0 / 3.0) * (std::cbrt(opz) - std::cbrt(omz)) / (two43 - 2.0);

  double ec0, dec0, ec1, dec1, mac, dmac;
  pw92::g_form(pw92::kParamagnetic, rs, ec0, dec0);
  pw92::g_form(pw92::kFerromagnetic, rs, ec1, dec1);
  pw92::g_form(pw92::kMinusSpinStiffness, rs, mac, dmac);
  const double ac = -mac, dac = -dmac;

  const double z3 = zeta * zeta * zeta;
  const double z4 = z3 * zeta;
  const double ec = ec0 + ac * f / fdd0 * (1.0 - z4) + (ec1 - ec0) * f * z4;
  const double dec_drs = dec0 * (1.0 - f * z4) + dec1 * f * z4 + dac * f / fdd0 * (1.0 - z4);
  const double dec_dz = df * ((ec1 - ec0) * z4 + ac * (1.0 - z4) / fdd0) +
                        4.0 * z3 * f * (ec1 - ec0 - ac / fdd0);

  const double common = ec - rs / 3.0 * dec_drs;
  out.energy_density += rho * ec;
  out.v_up += common - (zeta - 1.0) * dec_dz;
  out.v_down += common - (zeta + 1.0) * dec_dz;
  return out;
}

struct XCResult {
  RealField v_up;
  RealField v_down;
  double energy = 0.0;
};

inline XCResult xc_potential(const RealField& rho_up, const RealField& rho_down,
                             const XCFunctionalSpec& spec) {
  XCResult out{RealField(rho_up.grid), RealField(rho_up.grid), 0.0};
  double e = 0.0;
  for (std::size_t p = 0; p < rho_up.size(); ++p) {
    const auto pt = lsda_point(rho_up.values[p], rho_down.values[p], spec);
    out.v_up.values[p] = pt.v_up;
    out.v_down.values[p] = pt.v_down;
    e += pt.energy_density;
  }
  out.energy = e * rho_up.grid.cell_volume();
  return out;
}

/// lsda_point(rho, 0) restricted to the occupied channel. At zeta = 1 the
/// spin-stiffness and paramagnetic terms drop out of both the energy and the
/// up-spin potential, leaving exchange plus the ferromagnetic correlation.
inline XCPoint polarized_point(double rho, const XCFunctionalSpec& spec) {
  XCPoint out;
  if (!(rho > kDensityCutoff)) return out;
  static const double cx = std::cbrt(6.0 / std::numbers::pi);
  const double c = std::cbrt(rho);
  out.energy_density = -0.75 * cx * rho * c;
  out.v_up = -cx * c;
  if (spec.correlation == Correlation::none) return out;
  const double rs = std::cbrt(3.0 / (4.0 * std::numbers::pi)) / c;
  double ec1, dec1;
  pw92::g_form(pw92::kFerromagnetic, rs, ec1, dec1);
  out.energy_density += rho * ec1;
  out.v_up += ec1 - rs / 3.0 * dec1;
  return out;
}

/// Fully spin-polarized evaluation of a single channel density: potential
/// written to `v`, energy returned.
inline double xc_polarized(const Eigen::Ref<const Eigen::VectorXd>& rho, Eigen::Ref<Eigen::VectorXd> v,
                           const XCFunctionalSpec& spec, double dv) {
  double e = 0.0;
  for (Eigen::Index p = 0; p < rho.size(); ++p) {
    const auto pt = polarized_point(rho[p], spec);
    v[p] = pt.v_up;
    e += pt.energy_density;
  }
  return e * dv;
}

}  // namespace sicdft
