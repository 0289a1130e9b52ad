#pragma once

// The hierarchy of self-interaction-corrected mean fields.
//
// Every scheme acts on the diagonal orbitals phi_i through
//   h = -1/2 lap + V_ext + U_LDA[rho_s] - V0_s            (local schemes)
//   h = -1/2 lap + V_ext + U_LDA[rho_s] - sum_a U_a |psi_a)(psi_a|   (EXACT_SIC)
// where U_a = U_LDA[|psi_a|^2] is the Hartree plus fully polarized xc potential
// of one orbital density. V0 per scheme:
//   LDA      0
//   ADSIC    U_LDA[rho_s / N_s]
//   SLATER   sum_j (|phi_j|^2 / rho_s) U_LDA[|phi_j|^2]
//   GSLAT    sum_a (|psi_a|^2 / rho_s) U_LDA[|psi_a|^2]
//   LOC_KLI  GSLAT + (1/rho_s) sum_a |psi_a|^2 c_a
// GSLAT, LOC_KLI and EXACT_SIC use the localized set psi = phi U, whose
// unitary U satisfies the symmetry condition (psi_b|U_b - U_a|psi_a) = 0.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "sicdft/errors.hpp"
#include "sicdft/grid.hpp"
#include "sicdft/laplacian.hpp"
#include "sicdft/orbitals.hpp"
#include "sicdft/system.hpp"
#include "sicdft/xc.hpp"

namespace sicdft {

enum class SchemeId { lda, adsic, slater, gslat, loc_kli, exact_sic };

inline constexpr std::array<SchemeId, 6> kAllSchemes{SchemeId::lda,    SchemeId::adsic,
                                                     SchemeId::slater, SchemeId::gslat,
                                                     SchemeId::loc_kli, SchemeId::exact_sic};

inline const char* to_string(SchemeId id) {
  switch (id) {
    case SchemeId::lda: return "LDA";
    case SchemeId::adsic: return "ADSIC";
    case SchemeId::slater: return "SLATER";
    case SchemeId::gslat: return "GSLAT";
    case SchemeId::loc_kli: return "LOC_KLI";
    case SchemeId::exact_sic: return "EXACT_SIC";
  }
  return "?";
}

inline SchemeId parse_scheme(std::string name) {
  for (auto& c : name) c = c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (SchemeId id : kAllSchemes)
    if (name == to_string(id)) return id;
  throw ConfigurationError("scheme: unknown id '" + name +
                           "' (expected LDA, ADSIC, SLATER, GSLAT, LOC_KLI or EXACT_SIC)");
}

/// Schemes built on the localized set, which needs the symmetry condition.
inline bool needs_localized_set(SchemeId id) {
  return id == SchemeId::gslat || id == SchemeId::loc_kli || id == SchemeId::exact_sic;
}

/// Schemes whose Hamiltonian is the gradient of their energy.
inline bool is_variational(SchemeId id) {
  return id == SchemeId::lda || id == SchemeId::adsic || id == SchemeId::exact_sic;
}

/// Floor on rho_s in the weights |psi_a|^2 / rho_s.
inline constexpr double kDensityFloor = 1e-12;

/// Single-orbital quantities for one spin channel's set of orbitals.
struct OrbitalTerms {
  Eigen::MatrixXd densities;   ///< |w_a|^2 as columns
  Eigen::MatrixXd potentials;  ///< U_LDA[|w_a|^2] as columns
  Eigen::VectorXd energies;    ///< E_LDA[|w_a|^2]

  Eigen::Index count() const { return energies.size(); }
};

/// U_LDA of a fully polarized density written to `v`; returns E_LDA (Hartree
/// plus xc energy of that density alone).
inline double polarized_lda(const Model& model, const Eigen::VectorXd& rho, Eigen::Ref<Eigen::VectorXd> v) {
  const double dv = model.cell_volume();
  Eigen::VectorXd vxc(rho.size());
  model.hartree().solve(rho, v);
  const double e_h = 0.5 * rho.dot(v) * dv;
  const double e_xc = xc_polarized(rho, vxc, model.xc(), dv);
  v += vxc;
  return e_h + e_xc;
}

inline OrbitalTerms orbital_terms(const Model& model, const Eigen::MatrixXcd& waves) {
  OrbitalTerms t;
  const auto n = waves.cols();
  t.densities.resize(waves.rows(), n);
  t.potentials.resize(waves.rows(), n);
  t.energies.resize(n);
  for (Eigen::Index a = 0; a < n; ++a) {
    t.densities.col(a) = waves.col(a).cwiseAbs2();
    t.energies[a] = polarized_lda(model, t.densities.col(a), t.potentials.col(a));
  }
  return t;
}

/// U_LDA[|psi|^2] for one orbital.
inline RealField orbital_potential(const Model& model, const SpinOrbital& orbital) {
  RealField v(orbital.wave.grid);
  const Eigen::VectorXd rho = orbital.wave.values.cwiseAbs2();
  polarized_lda(model, rho, v.values);
  return v;
}

/// S(b, a) = (w_b | U_b - U_a | w_a); anti-hermitian by construction.
inline Eigen::MatrixXcd symmetry_matrix(const Eigen::MatrixXcd& waves, const OrbitalTerms& terms, double dv) {
  const Eigen::MatrixXcd weighted = (terms.potentials.cast<cplx>().array() * waves.array()).matrix();
  // m(a, b) = int U_a conj(w_a) w_b
  const Eigen::MatrixXcd m = weighted.adjoint() * waves * dv;
  return m - m.adjoint();
}

/// Symmetry-condition matrices of the localized set, per spin.
inline std::array<Eigen::MatrixXcd, 2> symmetry_residual(const Model& model, const OrbitalSet& set) {
  std::array<Eigen::MatrixXcd, 2> out;
  for (Spin s : kSpins) {
    const Eigen::MatrixXcd psi = set.localized(s);
    if (psi.cols() < 2) {
      out[index(s)] = Eigen::MatrixXcd::Zero(psi.cols(), psi.cols());
      continue;
    }
    out[index(s)] = symmetry_matrix(psi, orbital_terms(model, psi), model.cell_volume());
  }
  return out;
}

struct EnergyParts {
  double kinetic = 0.0;
  double ion = 0.0;             ///< electron-ion, field, and ion-ion terms
  double lda = 0.0;             ///< E_LDA[rho]: Hartree plus xc
  double sic_correction = 0.0;  ///< subtracted sum of single-orbital E_LDA

  double total() const { return kinetic + ion + lda - sic_correction; }
};

/// Hartree plus LSDA mean field of the total density.
struct LdaTerms {
  std::array<Eigen::VectorXd, 2> potential;
  double hartree_energy = 0.0;
  double xc_energy = 0.0;
};

inline LdaTerms lda_terms(const Model& model, const Eigen::VectorXd& rho_up, const Eigen::VectorXd& rho_down) {
  const GridSpec& g = model.grid();
  const double dv = model.cell_volume();
  LdaTerms out;
  const Eigen::VectorXd rho = rho_up + rho_down;
  Eigen::VectorXd vh(rho.size());
  model.hartree().solve(rho, vh);
  out.hartree_energy = 0.5 * rho.dot(vh) * dv;
  const auto xc = xc_potential(RealField(g, rho_up), RealField(g, rho_down), model.xc());
  out.xc_energy = xc.energy;
  out.potential[0] = vh + xc.v_up.values;
  out.potential[1] = vh + xc.v_down.values;
  return out;
}

/// Total SIC energy with the orbital corrections taken from the localized set.
inline EnergyParts sic_energy(const Model& model, const OrbitalSet& set) {
  const GridSpec& g = model.grid();
  const double dv = model.cell_volume();
  EnergyParts e;
  std::array<Eigen::VectorXd, 2> rho;
  for (Spin s : kSpins) {
    const auto& phi = set.waves(s);
    rho[index(s)] = channel_density(phi);
    for (Eigen::Index i = 0; i < phi.cols(); ++i) {
      Eigen::VectorXcd lap(phi.rows());
      laplacian(g, phi.col(i).data(), lap.data());
      e.kinetic += -0.5 * phi.col(i).dot(lap).real() * dv;
    }
    if (phi.cols() > 0) e.sic_correction += orbital_terms(model, set.localized(s)).energies.sum();
  }
  const auto lda = lda_terms(model, rho[0], rho[1]);
  e.lda = lda.hartree_energy + lda.xc_energy;
  e.ion = (rho[0] + rho[1]).dot(model.external()) * dv + model.ionic_constant();
  return e;
}

/// Constants of the localized KLI correction: M c = b with
///   M(a, b) = delta_ab - int |psi_a|^2 |psi_b|^2 / rho,
///   b_a     = (psi_a | V_S - U_a | psi_a).
/// M is singular along (1, ..., 1): c is fixed up to a constant, chosen so
/// that sum_a c_a = 0 (equivalently int rho V_K = 0).
struct KliSystem {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd rhs;
};

inline KliSystem kli_system(const OrbitalTerms& terms, const Eigen::MatrixXd& weights,
                            const Eigen::VectorXd& slater, double dv) {
  const auto n = terms.count();
  KliSystem sys;
  sys.matrix = Eigen::MatrixXd::Identity(n, n) - terms.densities.transpose() * weights * dv;
  sys.matrix = 0.5 * (sys.matrix + sys.matrix.transpose()).eval();
  sys.rhs.resize(n);
  for (Eigen::Index a = 0; a < n; ++a)
    sys.rhs[a] = terms.densities.col(a).dot(slater - terms.potentials.col(a)) * dv;
  return sys;
}

struct KliSolution {
  Eigen::VectorXd constants;
  double residual = 0.0;
};

inline KliSolution solve_kli(const KliSystem& sys) {
  const auto n = sys.rhs.size();
  KliSolution out;
  out.constants = Eigen::VectorXd::Zero(n);
  if (n == 0) return out;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sys.matrix);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n) / std::sqrt(static_cast<double>(n));
  Eigen::Index gauge = 0;
  (eig.eigenvectors().transpose() * ones).cwiseAbs().maxCoeff(&gauge);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double lam = eig.eigenvalues()[k];
    if (k == gauge && std::abs(lam) < 1e-6) continue;
    const auto v = eig.eigenvectors().col(k);
    out.constants += v * (v.dot(sys.rhs) / lam);
  }
  out.constants.array() -= out.constants.mean();
  out.residual = (sys.matrix * out.constants - sys.rhs).norm();
  return out;
}

struct SchemeState {
  SchemeId scheme = SchemeId::lda;
  GridSpec grid;
  /// Complete multiplicative potential per spin: V_ext + U_LDA[rho] - V0.
  std::array<Eigen::VectorXd, 2> local;
  /// The subtracted self-interaction potential V0 per spin.
  std::array<Eigen::VectorXd, 2> v0;
  std::array<Eigen::VectorXd, 2> kli_constants;
  std::array<double, 2> kli_residual{0.0, 0.0};
  /// Single-orbital terms of the set entering the correction.
  std::array<OrbitalTerms, 2> orbital;
  /// psi_a spanning the EXACT_SIC projector.
  std::array<Eigen::MatrixXcd, 2> projector;
  /// Symmetry-condition matrix of the localized set (two-set schemes).
  std::array<Eigen::MatrixXcd, 2> symmetry;
  /// Interaction parts of the energy; the kinetic part is filled by the solver.
  EnergyParts energy;

  bool nonlocal() const { return scheme == SchemeId::exact_sic; }

  double symmetry_residual() const {
    double r = 0.0;
    for (const auto& s : symmetry)
      if (s.size() > 0) r = std::max(r, s.norm());
    return r;
  }
};

/// Build the mean field of `scheme` for `set`. `precomputed` may supply the
/// single-orbital terms of the set entering the correction (localized set for
/// two-set schemes, diagonal set for SLATER) to avoid recomputing them.
inline SchemeState build_potential(const Model& model, SchemeId scheme, const OrbitalSet& set,
                                   const std::array<OrbitalTerms, 2>* precomputed = nullptr) {
  if (!(set.grid == model.grid())) throw ConfigurationError("build_potential: orbital grid differs from model grid");
  const double dv = model.cell_volume();
  const bool mirror = set.spin_symmetric();
  SchemeState st;
  st.scheme = scheme;
  st.grid = model.grid();

  std::array<Eigen::VectorXd, 2> rho;
  for (Spin s : kSpins) rho[index(s)] = channel_density(set.waves(s));
  const LdaTerms lda = lda_terms(model, rho[0], rho[1]);
  st.energy.lda = lda.hartree_energy + lda.xc_energy;
  st.energy.ion = (rho[0] + rho[1]).dot(model.external()) * dv + model.ionic_constant();

  for (Spin s : kSpins) {
    const int k = index(s);
    const auto npts = static_cast<Eigen::Index>(model.grid().size());
    const int n = set.count(s);
    st.v0[k] = Eigen::VectorXd::Zero(npts);
    st.kli_constants[k] = Eigen::VectorXd::Zero(n);
    st.symmetry[k] = Eigen::MatrixXcd::Zero(n, n);
    if (mirror && s == Spin::down) {
      st.v0[1] = st.v0[0];
      st.kli_constants[1] = st.kli_constants[0];
      st.kli_residual[1] = st.kli_residual[0];
      st.orbital[1] = st.orbital[0];
      st.projector[1] = st.projector[0];
      st.symmetry[1] = st.symmetry[0];
      st.energy.sic_correction *= 2.0;
      break;
    }
    if (n == 0) continue;

    switch (scheme) {
      case SchemeId::lda:
        break;
      case SchemeId::adsic: {
        const Eigen::VectorXd avg = rho[k] / static_cast<double>(n);
        st.energy.sic_correction += n * polarized_lda(model, avg, st.v0[k]);
        break;
      }
      case SchemeId::slater:
      case SchemeId::gslat:
      case SchemeId::loc_kli:
      case SchemeId::exact_sic: {
        const Eigen::MatrixXcd w = scheme == SchemeId::slater ? set.waves(s) : set.localized(s);
        st.orbital[k] = precomputed ? (*precomputed)[k] : orbital_terms(model, w);
        const OrbitalTerms& t = st.orbital[k];
        st.energy.sic_correction += t.energies.sum();
        if (needs_localized_set(scheme) && n > 1) st.symmetry[k] = symmetry_matrix(w, t, dv);
        if (scheme == SchemeId::exact_sic) {
          st.projector[k] = w;
          break;
        }
        const Eigen::VectorXd own = t.densities.rowwise().sum();
        const Eigen::ArrayXd inv = own.array().max(kDensityFloor).inverse();
        const Eigen::MatrixXd weights = (t.densities.array().colwise() * inv).matrix();
        st.v0[k] = weights.cwiseProduct(t.potentials).rowwise().sum();
        if (scheme == SchemeId::loc_kli) {
          const KliSolution kli = solve_kli(kli_system(t, weights, st.v0[k], dv));
          st.kli_constants[k] = kli.constants;
          st.kli_residual[k] = kli.residual;
          st.v0[k] += weights * kli.constants;
        }
        break;
      }
    }
  }
  for (Spin s : kSpins) st.local[index(s)] = model.external() + lda.potential[index(s)] - st.v0[index(s)];
  return st;
}

/// H applied to a block of orbitals of spin `s`. When `kinetic` is given it
/// receives the -1/2 lap part alone.
inline Eigen::MatrixXcd apply_hamiltonian(const SchemeState& st, Spin s, const Eigen::MatrixXcd& waves,
                                          Eigen::MatrixXcd* kinetic = nullptr) {
  const int k = index(s);
  if (st.local[k].size() != waves.rows())
    throw SpinMismatchError(std::string("apply_hamiltonian: no potential of matching size for spin ") + to_string(s));
  Eigen::MatrixXcd out = -0.5 * laplacian_columns(st.grid, waves);
  if (kinetic) *kinetic = out;
  out += (waves.array().colwise() * st.local[k].array().cast<cplx>()).matrix();
  if (st.nonlocal() && st.projector[k].cols() > 0) {
    const double dv = st.grid.cell_volume();
    const Eigen::MatrixXcd& psi = st.projector[k];
    const Eigen::MatrixXcd up = (psi.array() * st.orbital[k].potentials.array().cast<cplx>()).matrix();
    out -= up * (psi.adjoint() * waves * dv);
  }
  return out;
}

inline ComplexField apply_hamiltonian(const SchemeState& st, const SpinOrbital& orbital) {
  if (!(orbital.wave.grid == st.grid)) throw SpinMismatchError("apply_hamiltonian: orbital grid differs from state grid");
  Eigen::MatrixXcd col = orbital.wave.values;
  return ComplexField(st.grid, apply_hamiltonian(st, orbital.spin, col).col(0));
}

}  // namespace sicdft
