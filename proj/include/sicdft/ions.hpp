#pragma once

// Ionic background (local erf pseudopotentials) and the static external field.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "sicdft/errors.hpp"
#include "sicdft/grid.hpp"

namespace sicdft {

/// Local pseudopotential
///   V(r) = -Z erf(r / core_width) / r + gauss_amplitude * exp(-(r / gauss_width)^2).
struct PseudopotentialSpec {
  double core_width = 0.4;
  double gauss_amplitude = 0.0;
  double gauss_width = 1.0;

  friend bool operator==(const PseudopotentialSpec&, const PseudopotentialSpec&) = default;
};

struct Ion {
  std::string species = "H";
  Vec3 position{0.0, 0.0, 0.0};
  double charge = 1.0;
  PseudopotentialSpec pseudo;

  friend bool operator==(const Ion&, const Ion&) = default;
};

struct IonicConfiguration {
  std::vector<Ion> ions;

  double total_charge() const {
    double q = 0.0;
    for (const auto& ion : ions) q += ion.charge;
    return q;
  }

  friend bool operator==(const IonicConfiguration&, const IonicConfiguration&) = default;
};

inline double pseudopotential_value(const PseudopotentialSpec& pp, double charge, double r) {
  const double sigma = pp.core_width;
  const double coulomb = r < 1e-12 * sigma
                             ? -charge * 2.0 / (sigma * std::sqrt(std::numbers::pi))
                             : -charge * std::erf(r / sigma) / r;
  const double gauss =
      pp.gauss_amplitude == 0.0 ? 0.0
                                : pp.gauss_amplitude * std::exp(-(r * r) / (pp.gauss_width * pp.gauss_width));
  return coulomb + gauss;
}

/// Throws ConfigurationError when the form is invalid or does not approach
/// -Z/r at ten core widths (1% tolerance).
inline void validate(const PseudopotentialSpec& pp, double charge) {
  if (!(pp.core_width > 0.0)) throw ConfigurationError("pseudopotential: core_width must be positive");
  if (!(pp.gauss_width > 0.0)) throw ConfigurationError("pseudopotential: gauss_width must be positive");
  const double r = 10.0 * pp.core_width;
  const double v = pseudopotential_value(pp, charge, r);
  if (std::abs(v + charge / r) > 0.01 * std::abs(charge / r))
    throw ConfigurationError("pseudopotential: does not reach -Z/r at ten core widths");
}

inline double distance(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

/// Every ion must sit at least `margin` bohr inside every face of the box
/// (active axes only).
inline void validate_placement(const IonicConfiguration& config, const GridSpec& grid,
                               double margin = 4.0) {
  for (std::size_t k = 0; k < config.ions.size(); ++k) {
    const auto& ion = config.ions[k];
    for (int a = 0; a < 3; ++a) {
      if (!grid.active(a)) {
        if (std::abs(ion.position[a] - grid.origin[a]) > 1e-12)
          throw ConfigurationError("ions[" + std::to_string(k) +
                                   "]: off the line of a 1d grid");
        continue;
      }
      const double half = 0.5 * grid.extent(a);
      const double offset = std::abs(ion.position[a] - grid.origin[a]);
      if (offset > half - margin)
        throw ConfigurationError("ions[" + std::to_string(k) + "]: closer than " +
                                 std::to_string(margin) + " a0 to a box face");
    }
  }
}

/// Sum of the ionic pseudopotentials. On a 1d grid each ion acts through the
/// soft-Coulomb form -Z / sqrt(x^2 + a^2).
inline RealField ionic_potential(const IonicConfiguration& config, const GridSpec& grid,
                                 double softening = 1.0) {
  validate_placement(config, grid);
  RealField v(grid);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const Vec3 r = grid.position(p);
    double acc = 0.0;
    for (const auto& ion : config.ions) {
      const double d = distance(r, ion.position);
      acc += grid.mode == GridMode::full_3d
                 ? pseudopotential_value(ion.pseudo, ion.charge, d)
                 : -ion.charge / std::sqrt(d * d + softening * softening);
    }
    v.values[p] = acc;
  }
  return v;
}

inline constexpr double kMaxFieldStrength = 1e-2;

/// Potential energy of an electron in the static field E: V(r) = E . (r - origin).
inline RealField field_potential(const Vec3& field, const GridSpec& grid) {
  const double strength = std::sqrt(field[0] * field[0] + field[1] * field[1] + field[2] * field[2]);
  if (strength > kMaxFieldStrength)
    throw FieldTooStrongError("field strength " + std::to_string(strength) +
                              " a.u. exceeds 1e-2; use a smaller field or a larger box");
  RealField v(grid);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const Vec3 r = grid.position(p);
    double acc = 0.0;
    for (int a = 0; a < 3; ++a) acc += field[a] * (r[a] - grid.origin[a]);
    v.values[p] = acc;
  }
  return v;
}

/// Ion-ion repulsion (point charges in 3d, soft-Coulomb on a line) plus the
/// energy of the ions in the field, -sum Z E . (R - origin).
inline double ionic_constant_energy(const IonicConfiguration& config, const GridSpec& grid,
                                    const Vec3& field, double softening = 1.0) {
  double e = 0.0;
  const auto& ions = config.ions;
  for (std::size_t a = 0; a < ions.size(); ++a) {
    for (std::size_t b = a + 1; b < ions.size(); ++b) {
      const double d = distance(ions[a].position, ions[b].position);
      e += grid.mode == GridMode::full_3d
               ? ions[a].charge * ions[b].charge / d
               : ions[a].charge * ions[b].charge / std::sqrt(d * d + softening * softening);
    }
    for (int k = 0; k < 3; ++k)
      e -= ions[a].charge * field[k] * (ions[a].position[k] - grid.origin[k]);
  }
  return e;
}

}  // namespace sicdft
