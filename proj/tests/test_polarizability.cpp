#include <catch_amalgamated.hpp>

#include <cmath>

#include "sicdft/builtins.hpp"
#include "sicdft/dipole.hpp"
#include "sicdft/polarizability.hpp"

using namespace sicdft;
using Catch::Matchers::WithinRel;

namespace {

PolarizabilityRequest line_h2(SchemeId scheme) {
  PolarizabilityRequest req;
  req.system = h2(GridMode::soft_coulomb_1d);
  req.scheme = scheme;
  req.axes = {2};
  return req;
}

}  // namespace

TEST_CASE("finite-field polarizability of the 1d H2 molecule") {
  for (SchemeId id : {SchemeId::lda, SchemeId::gslat}) {
    INFO(to_string(id));
    const PolarizabilityRequest req = line_h2(id);
    const GroundState zero = solve_ground_state(Model(req.system), id, req.scf);
    const PolarizabilityReport rep = polarizability(req, zero);
    REQUIRE(rep.valid);
    const AxisPolarizability* a = rep.axis(2);
    REQUIRE(a != nullptr);
    CHECK(a->converged);
    CHECK(a->alpha > 0.0);
    // The molecule is centrosymmetric: the response is odd in the field.
    CHECK(std::abs(a->mu_zero) < 1e-6);
    CHECK(std::abs(a->mu_plus + a->mu_minus - 2.0 * a->mu_zero) < 1e-3 * std::abs(a->mu_plus - a->mu_minus));
    CHECK_THAT(a->alpha, WithinRel((a->mu_plus - a->mu_minus) / (2.0 * req.field_strength), 1e-14));
    // A forward difference agrees with the central one to first order.
    CHECK_THAT((a->mu_plus - a->mu_zero) / req.field_strength, WithinRel(a->alpha, 1e-2));
    CHECK(a->linearity_pct < 1.0);
    CHECK(rep.field_runs.size() == 4);
    CHECK(rep.axis(0) == nullptr);
  }
}

TEST_CASE("dipole response equals the energy curvature for variational schemes") {
  // Open shell: two up, one down.
  const SystemSpec sys = hydrogen_line("h3", {-2.5, 0.0, 2.5}, GridMode::soft_coulomb_1d, 0.3);
  const SCFConfig cfg = polarizability_scf();
  const double f = 2e-3;
  const Model zero_field(sys);
  for (SchemeId id : {SchemeId::lda, SchemeId::adsic, SchemeId::exact_sic}) {
    INFO(to_string(id));
    const GroundState g0 = solve_ground_state(zero_field, id, cfg);
    REQUIRE(g0.report.converged);
    double e[2], mu[2];
    for (int k = 0; k < 2; ++k) {
      const Model m = zero_field.with_field({0.0, 0.0, k == 0 ? f : -f});
      const GroundState g = solve_ground_state(m, id, cfg, &g0.orbitals);
      REQUIRE(g.report.converged);
      e[k] = g.report.total_energy;
      mu[k] = dipole_moment(total_density(g.orbitals), sys.ions)[2];
    }
    const double from_dipole = (mu[0] - mu[1]) / (2.0 * f);
    const double from_energy = -(e[0] + e[1] - 2.0 * g0.report.total_energy) / (f * f);
    CHECK_THAT(from_energy, WithinRel(from_dipole, 5e-4));
  }
}

TEST_CASE("worker count does not change the result") {
  PolarizabilityRequest req = line_h2(SchemeId::lda);
  req.linearity_check = false;
  const GroundState zero = solve_ground_state(Model(req.system), req.scheme, req.scf);
  const auto serial = polarizability(req, zero);
  req.threads = 2;
  const auto parallel = polarizability(req, zero);
  REQUIRE(serial.axes.size() == 1);
  CHECK(serial.axes[0].alpha == parallel.axes[0].alpha);
  CHECK(std::isnan(serial.axes[0].linearity_pct));
  CHECK(serial.field_runs.size() == 2);
}

TEST_CASE("polarizability requests are validated") {
  PolarizabilityRequest req = line_h2(SchemeId::lda);
  req.axes.clear();
  CHECK_THROWS_AS(req.validate(), ConfigurationError);
  req.axes = {3};
  CHECK_THROWS_AS(req.validate(), ConfigurationError);
  req.axes = {2};
  req.field_strength = 0.05;
  CHECK_THROWS_AS(req.validate(), ConfigurationError);
  req.field_strength = kDefaultFieldStrength;
  req.threads = 0;
  CHECK_THROWS_AS(req.validate(), ConfigurationError);
  CHECK(parse_axis("Y") == 1);
  CHECK(axis_name(2) == 'z');
  CHECK_THROWS_AS(parse_axis("w"), ConfigurationError);
  const SCFConfig tight = polarizability_scf();
  CHECK(tight.tol_energy <= 1e-11);
  CHECK(tight.tol_variance <= 1e-12);
}
