#pragma once

// Occupied spin orbitals carried as two unitarily connected sets.
//
// Per spin channel the "diagonal" orbitals phi_i are the columns of a
// (points x N) matrix. The localized orbitals are psi = phi * U, i.e.
//   psi_a = sum_i phi_i U(i, a),
// with U the channel's unitary. Because U is unitary both sets build the
// same spin density.

#include <array>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "sicdft/errors.hpp"
#include "sicdft/grid.hpp"

namespace sicdft {

enum class Spin { up = 0, down = 1 };

inline constexpr std::array<Spin, 2> kSpins{Spin::up, Spin::down};

inline int index(Spin s) { return static_cast<int>(s); }

inline const char* to_string(Spin s) { return s == Spin::up ? "up" : "down"; }

struct SpinOrbital {
  Spin spin = Spin::up;
  ComplexField wave;
};

struct LocalizationTransform {
  std::array<Eigen::MatrixXcd, 2> unitary;
  /// Frobenius norm of the symmetry-condition matrix at the last evaluation.
  std::array<double, 2> residual{0.0, 0.0};

  static LocalizationTransform identity(int n_up, int n_down) {
    LocalizationTransform t;
    t.unitary[0] = Eigen::MatrixXcd::Identity(n_up, n_up);
    t.unitary[1] = Eigen::MatrixXcd::Identity(n_down, n_down);
    return t;
  }

  const Eigen::MatrixXcd& operator[](Spin s) const { return unitary[index(s)]; }
  Eigen::MatrixXcd& operator[](Spin s) { return unitary[index(s)]; }
};

enum class OrbitalKind { diagonal, localized };

struct OrbitalSet {
  GridSpec grid;
  std::array<Eigen::MatrixXcd, 2> diagonal;
  LocalizationTransform transform;

  OrbitalSet() = default;
  OrbitalSet(const GridSpec& g, int n_up, int n_down) : grid(g) {
    diagonal[0] = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(g.size()), n_up);
    diagonal[1] = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(g.size()), n_down);
    transform = LocalizationTransform::identity(n_up, n_down);
  }

  int count(Spin s) const { return static_cast<int>(diagonal[index(s)].cols()); }

  const Eigen::MatrixXcd& waves(Spin s) const { return diagonal[index(s)]; }
  Eigen::MatrixXcd& waves(Spin s) { return diagonal[index(s)]; }

  Eigen::MatrixXcd localized(Spin s) const {
    return diagonal[index(s)] * transform.unitary[index(s)];
  }

  Eigen::MatrixXcd set(Spin s, OrbitalKind kind) const {
    return kind == OrbitalKind::diagonal ? diagonal[index(s)] : localized(s);
  }

  SpinOrbital orbital(Spin s, int i, OrbitalKind kind = OrbitalKind::diagonal) const {
    SpinOrbital o;
    o.spin = s;
    o.wave = ComplexField(grid, kind == OrbitalKind::diagonal
                                    ? Eigen::VectorXcd(diagonal[index(s)].col(i))
                                    : Eigen::VectorXcd(localized(s).col(i)));
    return o;
  }

  /// Both channels hold identical orbitals and transforms (closed shell run).
  bool spin_symmetric() const {
    return diagonal[0].cols() == diagonal[1].cols() && diagonal[0] == diagonal[1] &&
           transform.unitary[0] == transform.unitary[1];
  }
};

/// sum_a |w_a|^2 over the columns of a block of orbitals.
inline Eigen::VectorXd channel_density(const Eigen::MatrixXcd& waves) {
  Eigen::VectorXd rho = Eigen::VectorXd::Zero(waves.rows());
  for (Eigen::Index c = 0; c < waves.cols(); ++c) rho += waves.col(c).cwiseAbs2();
  return rho;
}

inline std::pair<RealField, RealField> density_from(const OrbitalSet& set,
                                                    OrbitalKind which = OrbitalKind::diagonal) {
  return {RealField(set.grid, channel_density(set.set(Spin::up, which))),
          RealField(set.grid, channel_density(set.set(Spin::down, which)))};
}

inline RealField total_density(const OrbitalSet& set) {
  auto [up, down] = density_from(set);
  up.values += down.values;
  return up;
}

inline Eigen::MatrixXcd overlap(const Eigen::MatrixXcd& waves, double dv) {
  return waves.adjoint() * waves * dv;
}

enum class OrthoMethod { loewdin, gram_schmidt };

/// Symmetric (Loewdin) or sequential (modified Gram-Schmidt) orthonormalization
/// of one channel. Throws DegeneracyError when the overlap condition number
/// exceeds 1e12.
inline void orthonormalize_channel(Eigen::MatrixXcd& waves, double dv,
                                   OrthoMethod method = OrthoMethod::loewdin) {
  constexpr double max_condition = 1e12;
  if (waves.cols() == 0) return;
  if (method == OrthoMethod::loewdin) {
    const Eigen::MatrixXcd s = overlap(waves, dv);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(s);
    const Eigen::VectorXd& lam = eig.eigenvalues();
    if (!(lam.minCoeff() > 0.0) || lam.maxCoeff() / lam.minCoeff() > max_condition)
      throw DegeneracyError("orthonormalize: overlap matrix is singular (linearly dependent orbitals)");
    const Eigen::MatrixXcd& v = eig.eigenvectors();
    const Eigen::MatrixXcd s_inv_half =
        v * lam.cwiseSqrt().cwiseInverse().asDiagonal() * v.adjoint();
    waves = waves * s_inv_half;
    return;
  }
  const double reference = std::sqrt(waves.colwise().squaredNorm().maxCoeff() * dv);
  for (Eigen::Index i = 0; i < waves.cols(); ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      const cplx c = waves.col(j).dot(waves.col(i)) * dv;
      waves.col(i) -= c * waves.col(j);
    }
    const double norm = std::sqrt(waves.col(i).squaredNorm() * dv);
    if (!(norm > reference / std::sqrt(max_condition)))
      throw DegeneracyError("orthonormalize: orbital lies in the span of the previous ones");
    waves.col(i) /= norm;
  }
}

inline void orthonormalize(OrbitalSet& set, OrthoMethod method = OrthoMethod::loewdin) {
  const double dv = set.grid.cell_volume();
  for (Spin s : kSpins) orthonormalize_channel(set.waves(s), dv, method);
}

}  // namespace sicdft
