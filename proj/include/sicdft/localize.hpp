#pragma once

// Unitary optimization of the localized set.
//
// For fixed diagonal orbitals phi, U is chosen to maximize
//   F(U) = sum_a E_LDA[|psi_a|^2],  psi = phi U,
// whose stationarity condition is the symmetry condition S = 0 with
//   S(b, a) = (psi_b | U_b - U_a | psi_a).
// The ascent direction on the unitary group is G = -S (anti-hermitian), and
// updates are U <- U exp(s G), which keep U unitary to rounding.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

#include <Eigen/Dense>

#include "sicdft/orbitals.hpp"
#include "sicdft/schemes.hpp"
#include "sicdft/system.hpp"

namespace sicdft {

/// exp(G) for anti-hermitian G, via the eigenvectors of the hermitian iG.
inline Eigen::MatrixXcd unitary_exp(const Eigen::MatrixXcd& g) {
  if (g.size() == 0) return g;
  const Eigen::MatrixXcd h = cplx(0.0, 1.0) * g;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(0.5 * (h + h.adjoint()));
  const Eigen::VectorXcd phase = (eig.eigenvalues().cast<cplx>() * cplx(0.0, -1.0)).array().exp();
  return eig.eigenvectors() * phase.asDiagonal() * eig.eigenvectors().adjoint();
}

/// Nearest unitary matrix (polar factor), removing accumulated drift.
inline Eigen::MatrixXcd nearest_unitary(const Eigen::MatrixXcd& u) {
  if (u.size() == 0) return u;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(u, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

/// Deterministic generic starting unitary. The identity is a stationary point
/// whenever the diagonal orbitals carry a symmetry, so localization starts
/// from a fixed pseudo-random rotation instead.
inline Eigen::MatrixXcd symmetry_breaking_start(int n, std::uint32_t seed = 20240611u, double amplitude = 0.3) {
  std::mt19937 rng(seed);
  // Map raw engine output by hand; distribution objects are not portable.
  auto uniform = [&rng] { return static_cast<double>(rng()) / 4294967296.0 - 0.5; };
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const cplx v(uniform(), 0.2 * uniform());
      a(i, j) = amplitude * v;
      a(j, i) = -std::conj(a(i, j));
    }
  return unitary_exp(a);
}

/// One step of the steepest ascent with a Barzilai-Borwein step length,
/// carried across calls. Used for the single step per SCF iteration.
class UnitaryStepper {
 public:
  explicit UnitaryStepper(double step = 1.0, double min_step = 1e-3, double max_step = 50.0)
      : step_(step), min_(min_step), max_(max_step) {}

  double step() const { return step_; }

  /// Move `u` along -S, the ascent direction for the symmetry matrix `s`
  /// evaluated at `u`.
  void advance(Eigen::MatrixXcd& u, const Eigen::MatrixXcd& s) {
    if (s.size() == 0) return;
    const Eigen::MatrixXcd g = -s;
    if (last_move_.size() == g.size()) {
      const Eigen::MatrixXcd dg = g - last_gradient_;
      const double curvature = -last_move_.cwiseProduct(dg.conjugate()).sum().real();
      const double moved = last_move_.squaredNorm();
      if (curvature > 0.0)
        step_ = std::clamp(moved / curvature, min_, max_);
      else
        step_ = std::min(2.0 * step_, max_);
      // Safeguard against a growing residual.
      if (g.norm() > 2.0 * last_gradient_.norm()) step_ = std::max(min_, 0.5 * step_);
    }
    last_move_ = step_ * g;
    last_gradient_ = g;
    u = nearest_unitary(u * unitary_exp(last_move_));
  }

  void reset() {
    last_move_.resize(0, 0);
    last_gradient_.resize(0, 0);
  }

 private:
  double step_;
  double min_;
  double max_;
  Eigen::MatrixXcd last_move_;
  Eigen::MatrixXcd last_gradient_;
};

struct LocalizeOptions {
  double tolerance = 1e-9;
  int max_iterations = 500;
  double initial_step = 1.0;
  /// Start from the set's stored unitary when true, else from a fixed
  /// symmetry-breaking rotation.
  bool warm_start = true;
};

struct ChannelLocalization {
  Eigen::MatrixXcd unitary;
  double residual = 0.0;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Maximize F for one channel with ascent steps and backtracking.
inline ChannelLocalization localize_channel(const Model& model, const Eigen::MatrixXcd& phi,
                                            const Eigen::MatrixXcd& start, const LocalizeOptions& opt) {
  const double dv = model.cell_volume();
  ChannelLocalization out;
  out.unitary = start;
  if (phi.cols() < 2) {
    out.converged = true;
    if (phi.cols() == 1) out.objective = orbital_terms(model, phi * start).energies.sum();
    return out;
  }

  auto evaluate = [&](const Eigen::MatrixXcd& u, double& f, Eigen::MatrixXcd& s) {
    const Eigen::MatrixXcd psi = phi * u;
    const OrbitalTerms t = orbital_terms(model, psi);
    f = t.energies.sum();
    s = symmetry_matrix(psi, t, dv);
  };

  double f = 0.0;
  Eigen::MatrixXcd s;
  evaluate(out.unitary, f, s);
  double step = opt.initial_step;
  Eigen::MatrixXcd last_move, last_gradient;

  for (out.iterations = 0; out.iterations < opt.max_iterations; ++out.iterations) {
    if (s.norm() < opt.tolerance) {
      out.converged = true;
      break;
    }
    const Eigen::MatrixXcd g = -s;
    if (last_move.size() > 0) {
      const double curvature = -last_move.cwiseProduct((g - last_gradient).conjugate()).sum().real();
      step = curvature > 0.0 ? std::clamp(last_move.squaredNorm() / curvature, 1e-4, 100.0)
                             : std::min(2.0 * step, 100.0);
    }
    bool accepted = false;
    double f_new = f;
    Eigen::MatrixXcd s_new, u_new;
    for (int tries = 0; tries < 40; ++tries) {
      u_new = nearest_unitary(out.unitary * unitary_exp(step * g));
      evaluate(u_new, f_new, s_new);
      if (f_new >= f - 1e-14 * std::max(1.0, std::abs(f))) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    last_move = step * g;
    last_gradient = g;
    out.unitary = u_new;
    f = f_new;
    s = s_new;
  }
  out.objective = f;
  out.residual = s.norm();
  if (out.residual < opt.tolerance) out.converged = true;
  return out;
}

/// Solve the symmetry condition for every channel of `set` at fixed diagonal
/// orbitals.
inline LocalizationTransform localize(const Model& model, const OrbitalSet& set, const LocalizeOptions& opt = {}) {
  LocalizationTransform out = set.transform;
  const bool mirror = set.spin_symmetric();
  for (Spin s : kSpins) {
    const int k = index(s);
    if (mirror && s == Spin::down) {
      out.unitary[1] = out.unitary[0];
      out.residual[1] = out.residual[0];
      break;
    }
    const int n = set.count(s);
    const Eigen::MatrixXcd start = opt.warm_start ? set.transform.unitary[k] : symmetry_breaking_start(n);
    const auto r = localize_channel(model, set.waves(s), start, opt);
    out.unitary[k] = r.unitary;
    out.residual[k] = r.residual;
  }
  return out;
}

/// Convenience overload taking only the tolerance.
inline LocalizationTransform localize(const Model& model, const OrbitalSet& set, double tolerance) {
  LocalizeOptions opt;
  opt.tolerance = tolerance;
  return localize(model, set, opt);
}

}  // namespace sicdft
