#pragma once

// Uniform Cartesian grids and scalar fields living on them.
//
// Points are stored row-major with x slowest: flat = (ix * ny + iy) * nz + iz.
// The grid is centered on `origin`; point i along an axis sits at
//   origin + (i - (n - 1) / 2) * h,
// and wave functions are implicitly zero one spacing beyond the outermost
// points. In soft-coulomb-1d mode exactly one axis is active, the other two
// have a single point located at the origin.
//
// All reductions (integrals, inner products) go through Eigen's fixed-order
// vectorized sum, so results are bit-reproducible for a given build.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>

#include <Eigen/Dense>

#include "sicdft/errors.hpp"

namespace sicdft {

using Vec3 = std::array<double, 3>;
using cplx = std::complex<double>;

enum class GridMode { full_3d, soft_coulomb_1d };

inline const char* to_string(GridMode mode) {
  return mode == GridMode::full_3d ? "3d" : "1d";
}

struct GridSpec {
  std::array<int, 3> dims{8, 8, 8};
  Vec3 spacing{1.0, 1.0, 1.0};
  Vec3 origin{0.0, 0.0, 0.0};
  GridMode mode = GridMode::full_3d;

  std::size_t size() const {
    return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  }

  bool active(int axis) const {
    return mode == GridMode::full_3d || dims[axis] > 1;
  }

  /// Quadrature weight of a single point (product over active axes).
  double cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < 3; ++a)
      if (active(a)) v *= spacing[a];
    return v;
  }

  /// Box length along an axis (points times spacing).
  double extent(int axis) const { return dims[axis] * spacing[axis]; }

  double coordinate(int axis, int i) const {
    if (!active(axis)) return origin[axis];
    return origin[axis] + (i - 0.5 * (dims[axis] - 1)) * spacing[axis];
  }

  std::size_t flat(int ix, int iy, int iz) const {
    return (static_cast<std::size_t>(ix) * dims[1] + iy) * dims[2] + iz;
  }

  std::array<int, 3> unflat(std::size_t p) const {
    const int iz = static_cast<int>(p % dims[2]);
    p /= dims[2];
    const int iy = static_cast<int>(p % dims[1]);
    const int ix = static_cast<int>(p / dims[1]);
    return {ix, iy, iz};
  }

  Vec3 position(std::size_t p) const {
    const auto idx = unflat(p);
    return {coordinate(0, idx[0]), coordinate(1, idx[1]), coordinate(2, idx[2])};
  }

  /// Single active axis of a 1D grid (z if several qualify).
  int line_axis() const {
    for (int a = 2; a >= 0; --a)
      if (dims[a] > 1) return a;
    return 2;
  }

  void validate() const {
    for (int a = 0; a < 3; ++a) {
      if (!(spacing[a] > 0.0))
        throw ConfigurationError("grid: spacing must be positive on every axis");
    }
    if (mode == GridMode::full_3d) {
      for (int a = 0; a < 3; ++a)
        if (dims[a] < 8)
          throw ConfigurationError("grid: 3d mode needs at least 8 points per axis");
    } else {
      int ones = 0;
      for (int a = 0; a < 3; ++a) ones += dims[a] == 1 ? 1 : 0;
      if (ones != 2)
        throw ConfigurationError("grid: 1d mode needs exactly two axes with one point");
      if (dims[line_axis()] < 8)
        throw ConfigurationError("grid: 1d mode needs at least 8 points on the line");
    }
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Smallest n >= target whose prime factors are all in {2, 3, 5, 7}, so that
/// doubled (zero-padded) FFTs stay fast.
inline int fft_friendly_size(int target) {
  for (int n = std::max(target, 1);; ++n) {
    int m = n;
    for (int p : {2, 3, 5, 7})
      while (m % p == 0) m /= p;
    if (m == 1) return n;
  }
}

template <typename T>
struct ScalarField {
  using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

  GridSpec grid;
  Vector values;

  ScalarField() = default;
  explicit ScalarField(const GridSpec& g) : grid(g), values(Vector::Zero(g.size())) {}
  ScalarField(const GridSpec& g, Vector v) : grid(g), values(std::move(v)) {
    if (static_cast<std::size_t>(values.size()) != grid.size())
      throw ConfigurationError("field: value count does not match grid size");
  }

  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
};

using RealField = ScalarField<double>;
using ComplexField = ScalarField<cplx>;

/// Sum of values times cell volume.
template <typename T>
T integrate(const ScalarField<T>& f) {
  return f.values.sum() * f.grid.cell_volume();
}

/// <a|b> = sum conj(a) b dV over one orbital column each.
template <typename DerivedA, typename DerivedB>
cplx inner(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b,
           double dv) {
  return a.dot(b) * dv;
}

inline cplx inner(const ComplexField& a, const ComplexField& b) {
  return a.values.dot(b.values) * a.grid.cell_volume();
}

/// Fill a field from a function of position.
template <typename T, typename F>
ScalarField<T> sample(const GridSpec& grid, F&& fn) {
  ScalarField<T> out(grid);
  for (std::size_t p = 0; p < grid.size(); ++p) out.values[p] = fn(grid.position(p));
  return out;
}

}  // namespace sicdft
