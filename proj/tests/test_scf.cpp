#include <catch_amalgamated.hpp>

#include <cmath>

#include "sicdft/builtins.hpp"
#include "sicdft/scf.hpp"

using namespace sicdft;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const Model& line_h4() {
  static const Model m(h_chain(4, GridMode::soft_coulomb_1d));
  return m;
}

SCFConfig tight() {
  SCFConfig cfg;
  cfg.tol_variance = 1e-10;
  cfg.tol_energy = 1e-11;
  return cfg;
}

}  // namespace

TEST_CASE("every scheme converges on the 1d H4 chain") {
  const Model& model = line_h4();
  const double dv = model.cell_volume();
  double lda_energy = 0.0;
  for (SchemeId id : kAllSchemes) {
    INFO(to_string(id));
    const GroundState gs = solve_ground_state(model, id, tight());
    const auto& r = gs.report;
    REQUIRE(r.converged);
    CHECK(r.max_variance < 1e-10);
    if (needs_localized_set(id)) CHECK(r.symmetry_residual < 1e-9);
    if (id == SchemeId::lda) lda_energy = r.total_energy;
    if (id != SchemeId::lda) CHECK(std::abs(r.total_energy - lda_energy) > 1e-3);

    for (Spin s : kSpins) {
      const Eigen::MatrixXcd& phi = gs.orbitals.waves(s);
      CHECK((overlap(phi, dv) - Eigen::MatrixXcd::Identity(phi.cols(), phi.cols())).cwiseAbs().maxCoeff() < 1e-12);
      // Rayleigh quotients reproduce the reported eigenvalues.
      const Eigen::MatrixXcd h_phi = apply_hamiltonian(gs.state, s, phi);
      for (Eigen::Index i = 0; i < phi.cols(); ++i)
        CHECK_THAT(phi.col(i).dot(h_phi.col(i)).real() * dv, WithinAbs(r.eigenvalues[index(s)][i], 1e-6));
      CHECK(r.eigenvalues[index(s)][0] <= r.eigenvalues[index(s)][1]);
    }
  }
}

TEST_CASE("one-electron SIC schemes coincide") {
  const Model model(h_atom(GridMode::soft_coulomb_1d));
  const double e = solve_ground_state(model, SchemeId::exact_sic, tight()).report.total_energy;
  for (SchemeId id : {SchemeId::adsic, SchemeId::slater, SchemeId::gslat, SchemeId::loc_kli}) {
    INFO(to_string(id));
    const GroundState gs = solve_ground_state(model, id, tight());
    CHECK_THAT(gs.report.total_energy, WithinAbs(e, 1e-8));
    // Koopmans-like: eigenvalue equals the total energy of a one-electron system.
    CHECK_THAT(gs.report.eigenvalues[0][0], WithinAbs(e, 1e-5));
  }
  CHECK(std::abs(solve_ground_state(model, SchemeId::lda, tight()).report.total_energy - e) > 1e-2);
}

TEST_CASE("subspace diagonalization leaves the localized set unchanged") {
  const Model& model = line_h4();
  OrbitalSet set = initial_guess(model, 5);
  set.transform[Spin::up] = symmetry_breaking_start(2);
  const Eigen::MatrixXcd before = set.localized(Spin::up);
  const SchemeState st = build_potential(model, SchemeId::gslat, set);
  Eigen::MatrixXcd h_phi = apply_hamiltonian(st, Spin::up, set.waves(Spin::up));
  Eigen::MatrixXcd lambda = set.waves(Spin::up).adjoint() * h_phi * model.cell_volume();
  subspace_diagonalize(set, Spin::up, lambda, &h_phi);
  CHECK((set.localized(Spin::up) - before).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::abs(lambda(0, 1)) < 1e-12);
  CHECK((h_phi - apply_hamiltonian(st, Spin::up, set.waves(Spin::up))).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("solver is deterministic") {
  const Model& model = line_h4();
  SCFConfig cfg;
  cfg.max_iter = 60;
  const auto a = solve_ground_state(model, SchemeId::gslat, cfg);
  const auto b = solve_ground_state(model, SchemeId::gslat, cfg);
  CHECK(a.report.total_energy == b.report.total_energy);
  CHECK(a.orbitals.waves(Spin::up) == b.orbitals.waves(Spin::up));
  CHECK(a.orbitals.transform[Spin::up] == b.orbitals.transform[Spin::up]);
}

TEST_CASE("closed-shell shortcut matches the full two-spin iteration") {
  const Model& model = line_h4();
  const GroundState mirror = solve_ground_state(model, SchemeId::loc_kli, tight());
  REQUIRE(mirror.orbitals.spin_symmetric());
  OrbitalSet start = initial_guess(model, 20240611u);
  // A tiny spin-dependent perturbation disables the shortcut.
  start.waves(Spin::down)(10, 1) += 1e-6;
  orthonormalize(start);
  REQUIRE_FALSE(start.spin_symmetric());
  for (Spin s : kSpins) start.transform[s] = symmetry_breaking_start(2);
  const GroundState full = solve_ground_state(model, SchemeId::loc_kli, tight(), &start);
  REQUIRE(full.report.converged);
  CHECK_THAT(full.report.total_energy, WithinAbs(mirror.report.total_energy, 1e-8));
}

TEST_CASE("iteration limit and tracing") {
  const Model& model = line_h4();
  SCFConfig cfg;
  cfg.max_iter = 7;
  int calls = 0;
  const auto gs = solve_ground_state(model, SchemeId::lda, cfg, nullptr, [&](const IterationTrace& t) {
    ++calls;
    CHECK(t.iteration == calls);
  });
  CHECK(calls == 7);
  CHECK_FALSE(gs.report.converged);
  CHECK(gs.report.iterations == 7);
  CHECK_FALSE(gs.report.message.empty());

  OrbitalSet wrong(model.grid(), 3, 1);
  CHECK_THROWS_AS(solve_ground_state(model, SchemeId::lda, cfg, &wrong), ConfigurationError);
  SCFConfig bad;
  bad.step = -1.0;
  CHECK_THROWS_AS(solve_ground_state(model, SchemeId::lda, bad), ConfigurationError);
}

TEST_CASE("3d hydrogen atom") {
  const Model model(h_atom());
  const GroundState lda = solve_ground_state(model, SchemeId::lda, {});
  const GroundState sic = solve_ground_state(model, SchemeId::exact_sic, {});
  REQUIRE(lda.report.converged);
  REQUIRE(sic.report.converged);
  CHECK_THAT(lda.report.total_energy, WithinAbs(-0.4114439, 1e-5));
  CHECK_THAT(sic.report.total_energy, WithinAbs(-0.4287574, 1e-5));
  CHECK_THAT(sic.report.eigenvalues[0][0], WithinAbs(sic.report.total_energy, 1e-4));
}
