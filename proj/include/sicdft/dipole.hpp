#pragma once

#include "sicdft/grid.hpp"
#include "sicdft/ions.hpp"

namespace sicdft {

/// mu = sum_ions Z R - int r rho dr, measured from the grid origin.
inline Vec3 dipole_moment(const RealField& rho, const IonicConfiguration& ions) {
  const GridSpec& g = rho.grid;
  Vec3 mu{0.0, 0.0, 0.0};
  for (const auto& ion : ions.ions)
    for (int a = 0; a < 3; ++a) mu[a] += ion.charge * (ion.position[a] - g.origin[a]);
  const double dv = g.cell_volume();
  for (int a = 0; a < 3; ++a) {
    if (!g.active(a)) continue;
    Eigen::VectorXd coord(static_cast<Eigen::Index>(g.size()));
    for (std::size_t p = 0; p < g.size(); ++p)
      coord[static_cast<Eigen::Index>(p)] = g.position(p)[a] - g.origin[a];
    mu[a] -= coord.dot(rho.values) * dv;
  }
  return mu;
}

}  // namespace sicdft
