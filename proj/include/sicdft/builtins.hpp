#pragma once

// Named systems: hydrogen atom and molecule, alternating hydrogen chains,
// the H2-H2 distance sweep, and a planar Na5 cluster.
//
// All 3d builtins use spacing 0.7 a0 and put the molecule's center at the grid
// origin. Chains lie on z; boxes are max(40, L + 24) a0 long and 20 a0 wide.
// The 1d variants place the same atoms on a soft-Coulomb line.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sicdft/errors.hpp"
#include "sicdft/grid.hpp"
#include "sicdft/ions.hpp"
#include "sicdft/system.hpp"

namespace sicdft {

inline constexpr double kDefaultSpacing = 0.7;
inline constexpr double kH2Bond = 1.46;
inline constexpr double kTransverseBox = 20.0;

/// Local erf pseudopotential widths.
inline constexpr double kHydrogenCoreWidth = 0.4;
inline constexpr double kSodiumCoreWidth = 2.83;

/// Grid covering at least `box` a0 per axis, centered at the origin.
inline GridSpec box_grid(const Vec3& box, double spacing, GridMode mode = GridMode::full_3d) {
  GridSpec g;
  g.mode = mode;
  g.spacing = {spacing, spacing, spacing};
  g.origin = {0.0, 0.0, 0.0};
  for (int a = 0; a < 3; ++a) g.dims[a] = fft_friendly_size(static_cast<int>(std::ceil(box[a] / spacing - 1e-9)));
  if (mode == GridMode::soft_coulomb_1d) g.dims[0] = g.dims[1] = 1;
  return g;
}

inline Ion hydrogen(const Vec3& r) {
  Ion ion;
  ion.species = "H";
  ion.position = r;
  ion.charge = 1.0;
  ion.pseudo.core_width = kHydrogenCoreWidth;
  return ion;
}

inline Ion sodium(const Vec3& r) {
  Ion ion;
  ion.species = "Na";
  ion.position = r;
  ion.charge = 1.0;
  ion.pseudo.core_width = kSodiumCoreWidth;
  return ion;
}

/// Hydrogen atoms on z at the given coordinates, centered, closed shell when
/// the count is even.
inline SystemSpec hydrogen_line(std::string name, std::vector<double> z, GridMode mode, double spacing) {
  const double mid = 0.5 * (z.front() + z.back());
  for (auto& v : z) v -= mid;
  SystemSpec s;
  s.name = std::move(name);
  for (double v : z) s.ions.ions.push_back(hydrogen({0.0, 0.0, v}));
  const int n = static_cast<int>(z.size());
  s.n_up = (n + 1) / 2;
  s.n_down = n / 2;
  const double length = z.back() - z.front();
  s.grid = box_grid({kTransverseBox, kTransverseBox, std::max(40.0, length + 24.0)}, spacing, mode);
  return s;
}

inline SystemSpec h_atom(GridMode mode = GridMode::full_3d, double spacing = kDefaultSpacing) {
  SystemSpec s;
  s.name = "h-atom";
  s.ions.ions.push_back(hydrogen({0.0, 0.0, 0.0}));
  s.n_up = 1;
  s.n_down = 0;
  s.grid = box_grid({20.0, 20.0, 20.0}, spacing, mode);
  return s;
}

inline SystemSpec h2(GridMode mode = GridMode::full_3d, double spacing = kDefaultSpacing) {
  auto s = hydrogen_line("h2", {0.0, kH2Bond}, mode, spacing);
  return s;
}

/// H_n with bonds alternating 2 and 3 a0.
inline SystemSpec h_chain(int n, GridMode mode = GridMode::full_3d, double spacing = kDefaultSpacing) {
  if (n < 2 || n % 2 != 0) throw ConfigurationError("system.n: h-chain needs an even n >= 2");
  std::vector<double> z{0.0};
  for (int k = 1; k < n; ++k) z.push_back(z.back() + (k % 2 == 1 ? 2.0 : 3.0));
  return hydrogen_line("h-chain(" + std::to_string(n) + ")", z, mode, spacing);
}

/// Two H2 units (bond 1.46 a0) whose centers are `d` apart along z.
inline SystemSpec h4_sweep(double d, GridMode mode = GridMode::full_3d, double spacing = kDefaultSpacing) {
  if (!(d > kH2Bond)) throw ConfigurationError("system.d: H2-H2 distance must exceed the H2 bond length 1.46");
  const double b = 0.5 * kH2Bond;
  std::ostringstream name;
  name << "h4-sweep(" << d << ")";
  auto s = hydrogen_line(name.str(), {-0.5 * d - b, -0.5 * d + b, 0.5 * d - b, 0.5 * d + b},
                         mode, spacing);
  return s;
}

/// Planar C2v pentagon in the x-y plane: a square of side 6.6 a0, i.e. the
/// (+-2.9, +-2.9) corners scaled by 3.3 / 2.9, and an apex atom on the long
/// (x) axis 6.6 a0 from both neighbours. Recentred on the center of mass.
inline SystemSpec na5(double spacing = kDefaultSpacing, double box = 38.0) {
  const double h = 3.3;
  const double apex = h + std::sqrt(6.6 * 6.6 - h * h);
  std::vector<Vec3> r{{-h, -h, 0.0}, {-h, h, 0.0}, {h, -h, 0.0}, {h, h, 0.0}, {apex, 0.0, 0.0}};
  Vec3 c{0.0, 0.0, 0.0};
  for (const auto& p : r)
    for (int a = 0; a < 3; ++a) c[a] += p[a] / static_cast<double>(r.size());
  SystemSpec s;
  s.name = "na5";
  for (auto p : r) {
    for (int a = 0; a < 3; ++a) p[a] -= c[a];
    s.ions.ions.push_back(sodium(p));
  }
  s.n_up = 3;
  s.n_down = 2;
  s.grid = box_grid({box, box, box}, spacing);
  return s;
}

/// Parse "h-atom", "h2", "h-chain(6)", "h4-sweep(4.0)", "na5", each optionally
/// followed by ":1d" for the soft-Coulomb line variant.
inline SystemSpec builtin_system(const std::string& text) {
  std::string name = text;
  GridMode mode = GridMode::full_3d;
  if (const auto colon = name.find(':'); colon != std::string::npos) {
    const std::string tag = name.substr(colon + 1);
    if (tag != "1d" && tag != "3d") throw ConfigurationError("system: unknown variant '" + tag + "' (expected 1d or 3d)");
    if (tag == "1d") mode = GridMode::soft_coulomb_1d;
    name = name.substr(0, colon);
  }
  auto argument = [&](const std::string& prefix) -> std::optional<std::string> {
    if (name.rfind(prefix + "(", 0) != 0 || name.back() != ')') return std::nullopt;
    return name.substr(prefix.size() + 1, name.size() - prefix.size() - 2);
  };
  try {
    if (name == "h-atom") return h_atom(mode);
    if (name == "h2") return h2(mode);
    if (name == "na5") {
      if (mode != GridMode::full_3d) throw ConfigurationError("system: na5 has no 1d variant");
      return na5();
    }
    if (auto arg = argument("h-chain")) {
      std::size_t used = 0;
      const int n = std::stoi(*arg, &used);
      if (used != arg->size()) throw ConfigurationError("system: bad chain length '" + *arg + "'");
      return h_chain(n, mode);
    }
    if (auto arg = argument("h4-sweep")) {
      std::size_t used = 0;
      const double d = std::stod(*arg, &used);
      if (used != arg->size()) throw ConfigurationError("system: bad distance '" + *arg + "'");
      return h4_sweep(d, mode);
    }
  } catch (const std::logic_error&) {
    throw ConfigurationError("system: cannot parse builtin '" + text + "'");
  }
  throw ConfigurationError("system: unknown builtin '" + text +
                           "' (expected h-atom, h2, h-chain(n), h4-sweep(d) or na5)");
}

}  // namespace sicdft
