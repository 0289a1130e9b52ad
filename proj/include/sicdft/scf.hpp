#pragma once

// Damped-gradient ground-state solver.
//
// One iteration:
//   1. single-orbital terms of the localized set (two-set schemes),
//   2. mean field of the current orbitals,
//   3. H phi and lambda = <phi|H|phi>; rotate phi to diagonalize lambda
//      (the localized set is kept fixed by composing U with the rotation),
//   4. convergence check,
//   5. phi <- ortho(phi - eta D (H phi - phi lambda)),  D = (T + E0)^-1,
//   6. one ascent step of the localizing unitary (two-set schemes).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "sicdft/errors.hpp"
#include "sicdft/localize.hpp"
#include "sicdft/orbitals.hpp"
#include "sicdft/preconditioner.hpp"
#include "sicdft/schemes.hpp"
#include "sicdft/system.hpp"

namespace sicdft {

struct SCFConfig {
  double step = 0.4;
  double kinetic_shift = 0.2;
  int max_iter = 3000;
  double tol_variance = 1e-7;
  double tol_energy = 1e-9;
  /// Frobenius norm bound on the symmetry-condition matrix.
  double tol_localize = 1e-9;
  int localize_every = 1;
  std::uint32_t seed = 20240611u;
  OrthoMethod ortho = OrthoMethod::loewdin;

  void validate() const {
    if (!(step > 0.0)) throw ConfigurationError("scf.step: must be positive");
    if (!(kinetic_shift > 0.0)) throw ConfigurationError("scf.kinetic_shift: must be positive");
    if (max_iter < 1) throw ConfigurationError("scf.max_iter: must be at least 1");
    if (!(tol_variance > 0.0)) throw ConfigurationError("scf.tol_variance: must be positive");
    if (!(tol_energy > 0.0)) throw ConfigurationError("scf.tol_energy: must be positive");
    if (!(tol_localize > 0.0)) throw ConfigurationError("scf.tol_localize: must be positive");
    if (localize_every < 1) throw ConfigurationError("scf.localize_every: must be at least 1");
  }

  friend bool operator==(const SCFConfig&, const SCFConfig&) = default;
};

/// Number of trailing iterations whose energy changes must all be below tol_energy.
inline constexpr int kEnergyWindow = 10;

struct ConvergenceReport {
  SchemeId scheme = SchemeId::lda;
  int iterations = 0;
  bool converged = false;
  std::string message;
  EnergyParts energy;
  double total_energy = 0.0;
  std::array<Eigen::VectorXd, 2> eigenvalues;
  double max_variance = 0.0;
  double symmetry_residual = 0.0;
  double kli_residual = 0.0;
  /// Largest |lambda_ij - conj(lambda_ji)| of the occupied-space Hamiltonian.
  double lambda_asymmetry = 0.0;
  double final_step = 0.0;
};

struct IterationTrace {
  int iteration = 0;
  double energy = 0.0;
  double max_variance = 0.0;
  double residual = 0.0;
  double step = 0.0;
};

using TraceSink = std::function<void(const IterationTrace&)>;

struct GroundState {
  OrbitalSet orbitals;
  SchemeState state;
  ConvergenceReport report;
};

/// Atom-centered Gaussians combined with cosine patterns across the ions
/// (nodeless, one node, ...) plus a small seeded perturbation. Both spins get
/// the same leading orbitals, so closed shells start spin-symmetric.
inline OrbitalSet initial_guess(const Model& model, std::uint32_t seed) {
  const GridSpec& g = model.grid();
  const auto& ions = model.system().ions.ions;
  const int n_max = std::max(model.electrons(Spin::up), model.electrons(Spin::down));
  const auto npts = static_cast<Eigen::Index>(g.size());
  const int m = static_cast<int>(ions.size());

  Eigen::MatrixXd basis(npts, m);
  for (int a = 0; a < m; ++a) {
    const double w = std::max(1.0, 2.5 * ions[a].pseudo.core_width);
    for (Eigen::Index p = 0; p < npts; ++p) {
      const double d = distance(g.position(static_cast<std::size_t>(p)), ions[a].position);
      basis(p, a) = std::exp(-0.5 * d * d / (w * w));
    }
  }

  const Eigen::VectorXd envelope = basis.rowwise().sum();
  std::mt19937 rng(seed);
  auto uniform = [&rng] { return static_cast<double>(rng()) / 4294967296.0 - 0.5; };
  Eigen::MatrixXd guess(npts, n_max);
  for (int k = 0; k < n_max; ++k) {
    Eigen::VectorXd col = Eigen::VectorXd::Zero(npts);
    const int pattern = k % m;
    for (int a = 0; a < m; ++a) {
      const double c = std::cos(std::numbers::pi * pattern * (a + 0.5) / m) + 0.05 * uniform();
      col += c * basis.col(a);
    }
    // Orbitals beyond the ion count get a polynomial factor along a rotating axis.
    if (k >= m) {
      const int axis = (k / m - 1) % 3;
      for (Eigen::Index p = 0; p < npts; ++p)
        col[p] *= g.position(static_cast<std::size_t>(p))[axis] - g.origin[axis];
    }
    const double scale = col.cwiseAbs().maxCoeff();
    for (Eigen::Index p = 0; p < npts; ++p) col[p] += 0.01 * scale * uniform() * envelope[p];
    guess.col(k) = col;
  }

  OrbitalSet set(g, model.electrons(Spin::up), model.electrons(Spin::down));
  for (Spin s : kSpins) set.waves(s) = guess.leftCols(set.count(s)).cast<cplx>();
  orthonormalize(set);
  return set;
}

/// Rotate spin channel `s` so that the hermitian part of `lambda` becomes
/// diagonal (ascending). `h_phi` and `lambda` are rotated alongside, and U is
/// composed with the inverse rotation so the localized set is unchanged.
inline void subspace_diagonalize(OrbitalSet& set, Spin s, Eigen::MatrixXcd& lambda, Eigen::MatrixXcd* h_phi = nullptr) {
  const auto n = lambda.rows();
  if (n == 0) return;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(0.5 * (lambda + lambda.adjoint()));
  Eigen::MatrixXcd r = eig.eigenvectors();
  // Fix the phase: largest component of each eigenvector real and positive.
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index big = 0;
    r.col(c).cwiseAbs().maxCoeff(&big);
    const cplx z = r(big, c);
    r.col(c) *= std::abs(z) / z;
  }
  set.waves(s) = set.waves(s) * r;
  if (h_phi) *h_phi = *h_phi * r;
  lambda = r.adjoint() * lambda * r;
  auto& u = set.transform[s];
  u = r.adjoint() * u;
}

/// Result of evaluating H on the current orbitals (after the subspace rotation).
struct ScfEvaluation {
  std::array<Eigen::MatrixXcd, 2> h_phi;
  std::array<Eigen::MatrixXcd, 2> lambda;
  std::array<Eigen::VectorXd, 2> eigenvalues;
  std::array<Eigen::VectorXd, 2> variance;
  double kinetic = 0.0;
  double max_variance = 0.0;
  double lambda_asymmetry = 0.0;
};

/// Build H phi and lambda for both channels and diagonalize the occupied
/// subspace. With `mirror` only the up channel is computed and copied.
inline ScfEvaluation evaluate_orbitals(const SchemeState& st, OrbitalSet& set, bool mirror) {
  const double dv = set.grid.cell_volume();
  ScfEvaluation ev;
  for (Spin s : kSpins) {
    const int k = index(s);
    if (mirror && s == Spin::down) {
      ev.h_phi[1] = ev.h_phi[0];
      ev.lambda[1] = ev.lambda[0];
      ev.eigenvalues[1] = ev.eigenvalues[0];
      ev.variance[1] = ev.variance[0];
      ev.kinetic *= 2.0;
      set.waves(Spin::down) = set.waves(Spin::up);
      set.transform[Spin::down] = set.transform[Spin::up];
      break;
    }
    const auto& phi = set.waves(s);
    if (phi.cols() == 0) {
      ev.eigenvalues[k].resize(0);
      ev.variance[k].resize(0);
      continue;
    }
    Eigen::MatrixXcd t_phi;
    Eigen::MatrixXcd h_phi = apply_hamiltonian(st, s, phi, &t_phi);
    for (Eigen::Index i = 0; i < phi.cols(); ++i) ev.kinetic += phi.col(i).dot(t_phi.col(i)).real() * dv;
    Eigen::MatrixXcd lambda = phi.adjoint() * h_phi * dv;
    if (phi.cols() > 1) subspace_diagonalize(set, s, lambda, &h_phi);
    ev.eigenvalues[k] = lambda.diagonal().real();
    ev.variance[k].resize(phi.cols());
    for (Eigen::Index i = 0; i < phi.cols(); ++i)
      ev.variance[k][i] = (h_phi.col(i) - lambda(i, i) * phi.col(i)).squaredNorm() * dv;
    ev.lambda_asymmetry = std::max(ev.lambda_asymmetry, (lambda - lambda.adjoint()).cwiseAbs().maxCoeff());
    ev.h_phi[k] = std::move(h_phi);
    ev.lambda[k] = std::move(lambda);
  }
  for (const auto& v : ev.variance)
    if (v.size() > 0) ev.max_variance = std::max(ev.max_variance, v.maxCoeff());
  return ev;
}

/// Preconditioned gradient step followed by orthonormalization.
inline void descend(OrbitalSet& set, const ScfEvaluation& ev, double eta, KineticPreconditioner& precond,
                    OrthoMethod ortho, bool mirror) {
  const double dv = set.grid.cell_volume();
  for (Spin s : kSpins) {
    const int k = index(s);
    if (mirror && s == Spin::down) {
      set.waves(Spin::down) = set.waves(Spin::up);
      break;
    }
    auto& phi = set.waves(s);
    if (phi.cols() == 0) continue;
    Eigen::MatrixXcd grad = ev.h_phi[k] - phi * ev.lambda[k];
    precond.apply(grad);
    phi -= eta * grad;
    orthonormalize_channel(phi, dv, ortho);
  }
}

/// One full damped-gradient step at a fixed mean field. Returns the
/// evaluation made before the step.
inline ScfEvaluation scf_step(OrbitalSet& set, const SchemeState& st, const SCFConfig& cfg,
                              KineticPreconditioner& precond, double eta) {
  const bool mirror = set.spin_symmetric();
  ScfEvaluation ev = evaluate_orbitals(st, set, mirror);
  descend(set, ev, eta, precond, cfg.ortho, mirror);
  return ev;
}

inline ScfEvaluation scf_step(OrbitalSet& set, const SchemeState& st, const SCFConfig& cfg) {
  KineticPreconditioner precond(set.grid, cfg.kinetic_shift);
  return scf_step(set, st, cfg, precond, cfg.step);
}

inline GroundState solve_ground_state(const Model& model, SchemeId scheme, const SCFConfig& cfg,
                                      const OrbitalSet* start = nullptr, const TraceSink& trace = {}) {
  cfg.validate();
  GroundState out;
  OrbitalSet set = start ? *start : initial_guess(model, cfg.seed);
  for (Spin s : kSpins)
    if (set.count(s) != model.electrons(s) || !(set.grid == model.grid()))
      throw ConfigurationError("solve_ground_state: starting orbitals do not match the system");

  const bool two_set = needs_localized_set(scheme);
  const bool mirror = set.spin_symmetric();
  if (!two_set) {
    set.transform = LocalizationTransform::identity(set.count(Spin::up), set.count(Spin::down));
  } else if (!start) {
    for (Spin s : kSpins) set.transform[s] = symmetry_breaking_start(set.count(s));
  }

  KineticPreconditioner precond(model.grid(), cfg.kinetic_shift);
  std::array<UnitaryStepper, 2> steppers;
  double eta = cfg.step;
  std::deque<bool> rises;
  int calm = 0;
  double last_energy = std::numeric_limits<double>::quiet_NaN();
  double last_variance = std::numeric_limits<double>::infinity();
  std::deque<double> changes;
  ConvergenceReport& rep = out.report;
  rep.scheme = scheme;

  for (int it = 1; it <= cfg.max_iter; ++it) {
    std::array<OrbitalTerms, 2> terms;
    if (two_set)
      for (Spin s : kSpins)
        if (!(mirror && s == Spin::down)) terms[index(s)] = orbital_terms(model, set.localized(s));
    SchemeState st = build_potential(model, scheme, set, two_set ? &terms : nullptr);
    ScfEvaluation ev = evaluate_orbitals(st, set, mirror);
    st.energy.kinetic = ev.kinetic;
    const double energy = st.energy.total();
    const double residual = st.symmetry_residual();

    if (!std::isnan(last_energy)) {
      changes.push_back(std::abs(energy - last_energy));
      if (changes.size() > static_cast<std::size_t>(kEnergyWindow)) changes.pop_front();
      const double monitor = is_variational(scheme) ? energy - last_energy : ev.max_variance - last_variance;
      const double noise = is_variational(scheme) ? 1e-12 * std::max(1.0, std::abs(energy)) : 0.0;
      // Halve on persistent rises, including the alternating rise and fall of
      // an overshooting two-cycle; grow back after a calm stretch.
      const bool rose = monitor > noise;
      rises.push_back(rose);
      if (rises.size() > static_cast<std::size_t>(kEnergyWindow)) rises.pop_front();
      calm = rose ? 0 : calm + 1;
      if (std::count(rises.begin(), rises.end(), true) >= 5) {
        eta *= 0.5;
        rises.clear();
      } else if (calm >= 20 && eta < cfg.step) {
        eta = std::min(cfg.step, 1.5 * eta);
        calm = 0;
      }
    }
    last_energy = energy;
    last_variance = ev.max_variance;

    if (trace) trace({it, energy, ev.max_variance, residual, eta});

    rep.iterations = it;
    rep.energy = st.energy;
    rep.total_energy = energy;
    rep.eigenvalues = ev.eigenvalues;
    rep.max_variance = ev.max_variance;
    rep.symmetry_residual = residual;
    rep.kli_residual = std::max(st.kli_residual[0], st.kli_residual[1]);
    rep.lambda_asymmetry = ev.lambda_asymmetry;
    rep.final_step = eta;

    const bool energy_ok = changes.size() == static_cast<std::size_t>(kEnergyWindow) &&
                           std::all_of(changes.begin(), changes.end(), [&](double d) { return d < cfg.tol_energy; });
    const bool localized_ok = !two_set || residual < cfg.tol_localize;
    if (ev.max_variance < cfg.tol_variance && energy_ok && localized_ok) {
      rep.converged = true;
      rep.message = "converged";
      out.state = std::move(st);
      break;
    }
    if (eta < 1e-4 * cfg.step) {
      rep.message = "step underflow: no progress after repeated halving";
      out.state = std::move(st);
      break;
    }

    if (it == cfg.max_iter) {
      rep.message = "max_iter reached";
      out.state = std::move(st);
      break;
    }

    descend(set, ev, eta, precond, cfg.ortho, mirror);
    if (two_set && it % cfg.localize_every == 0) {
      for (Spin s : kSpins) {
        if (mirror && s == Spin::down) {
          set.transform[Spin::down] = set.transform[Spin::up];
          break;
        }
        if (set.count(s) > 1) steppers[index(s)].advance(set.transform[s], st.symmetry[index(s)]);
      }
    }
  }
  for (Spin s : kSpins) set.transform.residual[index(s)] = out.state.symmetry[index(s)].size() > 0
                                                               ? out.state.symmetry[index(s)].norm()
                                                               : 0.0;
  out.orbitals = std::move(set);
  return out;
}

}  // namespace sicdft
