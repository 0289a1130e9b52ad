#pragma once

// Fourth-order central finite-difference Laplacian with zero Dirichlet
// boundaries (values beyond the outermost points are zero).

#include <Eigen/Dense>

#include "sicdft/grid.hpp"

namespace sicdft {

namespace stencil {
inline constexpr double c0 = -5.0 / 2.0;
inline constexpr double c1 = 4.0 / 3.0;
inline constexpr double c2 = -1.0 / 12.0;
}  // namespace stencil

/// out = lap(in) for one field stored contiguously in grid order.
template <typename T>
void laplacian(const GridSpec& grid, const T* in, T* out) {
  const auto n = grid.size();
  for (std::size_t p = 0; p < n; ++p) out[p] = T(0);
  const std::array<std::size_t, 3> stride{
      static_cast<std::size_t>(grid.dims[1]) * grid.dims[2],
      static_cast<std::size_t>(grid.dims[2]), 1};

  for (int a = 0; a < 3; ++a) {
    if (!grid.active(a)) continue;
    const int len = grid.dims[a];
    const std::size_t s = stride[a];
    const double inv_h2 = 1.0 / (grid.spacing[a] * grid.spacing[a]);
    const double w0 = stencil::c0 * inv_h2;
    const double w1 = stencil::c1 * inv_h2;
    const double w2 = stencil::c2 * inv_h2;
    // Every line along axis a starts at a point whose index along a is zero.
    for (std::size_t start = 0; start < n; ++start) {
      if ((start / s) % len != 0) continue;
      const T* f = in + start;
      T* g = out + start;
      for (int i = 0; i < len; ++i) {
        T acc = w0 * f[i * s];
        if (i >= 1) acc += w1 * f[(i - 1) * s];
        if (i + 1 < len) acc += w1 * f[(i + 1) * s];
        if (i >= 2) acc += w2 * f[(i - 2) * s];
        if (i + 2 < len) acc += w2 * f[(i + 2) * s];
        g[i * s] += acc;
      }
    }
  }
}

template <typename T>
ScalarField<T> apply_laplacian(const ScalarField<T>& f) {
  ScalarField<T> out(f.grid);
  laplacian(f.grid, f.values.data(), out.values.data());
  return out;
}

/// Column-wise Laplacian of a block of orbitals (points x orbitals).
inline Eigen::MatrixXcd laplacian_columns(const GridSpec& grid, const Eigen::MatrixXcd& waves) {
  Eigen::MatrixXcd out(waves.rows(), waves.cols());
  for (Eigen::Index c = 0; c < waves.cols(); ++c)
    laplacian(grid, waves.col(c).data(), out.col(c).data());
  return out;
}

/// -1/2 <phi|lap|phi>, real part.
inline double kinetic_energy(const ComplexField& phi) {
  const auto lap = apply_laplacian(phi);
  return -0.5 * inner(phi, lap).real();
}

/// Symbol of the stencil for a plane wave of wave number k along one axis,
/// i.e. lap exp(ikx) = -symbol * exp(ikx).
inline double stencil_symbol(double k, double h) {
  return -(stencil::c0 + 2.0 * stencil::c1 * std::cos(k * h) +
           2.0 * stencil::c2 * std::cos(2.0 * k * h)) /
         (h * h);
}

}  // namespace sicdft
