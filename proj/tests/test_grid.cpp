#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "sicdft/grid.hpp"
#include "sicdft/laplacian.hpp"
#include "sicdft/orbitals.hpp"

using namespace sicdft;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

GridSpec cube(int n, double h) {
  GridSpec g;
  g.dims = {n, n, n};
  g.spacing = {h, h, h};
  return g;
}

GridSpec line(int n, double h) {
  GridSpec g;
  g.mode = GridMode::soft_coulomb_1d;
  g.dims = {1, 1, n};
  g.spacing = {h, h, h};
  return g;
}

}  // namespace

TEST_CASE("grid points are centered on the origin") {
  GridSpec g = cube(10, 0.5);
  g.origin = {1.0, -2.0, 0.5};
  CHECK_THAT(g.coordinate(0, 0) + g.coordinate(0, 9), WithinAbs(2.0, 1e-14));
  CHECK_THAT(g.coordinate(1, 5) - g.coordinate(1, 4), WithinAbs(0.5, 1e-14));
  CHECK_THAT(g.extent(2), WithinAbs(5.0, 1e-14));
  const auto p = g.flat(3, 7, 2);
  CHECK(g.unflat(p) == std::array<int, 3>{3, 7, 2});
  CHECK_THAT(g.position(p)[1], WithinAbs(g.coordinate(1, 7), 0.0));
}

TEST_CASE("1d grids weigh points by the line spacing only") {
  const GridSpec g = line(40, 0.3);
  CHECK(g.line_axis() == 2);
  CHECK_THAT(g.cell_volume(), WithinAbs(0.3, 1e-15));
  CHECK_THAT(g.position(0)[0], WithinAbs(0.0, 0.0));
}

TEST_CASE("grid validation rejects bad shapes") {
  GridSpec g = cube(10, 0.5);
  g.spacing[1] = 0.0;
  CHECK_THROWS_AS(g.validate(), ConfigurationError);
  GridSpec l = line(40, 0.3);
  l.dims = {2, 1, 40};
  CHECK_THROWS_AS(l.validate(), ConfigurationError);
}

TEST_CASE("fft-friendly sizes factor into 2, 3, 5, 7") {
  CHECK(fft_friendly_size(29) == 30);
  CHECK(fft_friendly_size(58) == 60);
  CHECK(fft_friendly_size(55) == 56);
  CHECK(fft_friendly_size(64) == 64);
  CHECK(fft_friendly_size(11) == 12);
}

TEST_CASE("integrals of a Gaussian") {
  const GridSpec g = cube(40, 0.25);
  const auto f = sample<double>(g, [](const Vec3& r) {
    return std::exp(-(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]));
  });
  CHECK_THAT(integrate(f), WithinRel(std::pow(std::numbers::pi, 1.5), 1e-10));
}

TEST_CASE("laplacian is fourth-order accurate on a Dirichlet sine mode") {
  // sin(pi (x - x0) / L) vanishes one spacing beyond both ends.
  auto error_at = [](int n) {
    const double length = 6.0;
    const double h = length / (n + 1);
    GridSpec g = line(n, h);
    const double k = std::numbers::pi / length;
    const double x0 = g.coordinate(2, 0) - h;
    const auto f = sample<double>(g, [&](const Vec3& r) { return std::sin(k * (r[2] - x0)); });
    const auto lap = apply_laplacian(f);
    double err = 0.0;
    for (int i = 4; i < n - 4; ++i) err = std::max(err, std::abs(lap.values[i] + k * k * f.values[i]));
    return err;
  };
  const double e1 = error_at(39);
  const double e2 = error_at(79);
  CHECK(e1 < 1e-4);
  CHECK(e1 / e2 > 14.0);
}

TEST_CASE("stencil symbol matches the plane-wave action") {
  const GridSpec g = line(64, 0.4);
  const double k = 1.3;
  const auto f = sample<double>(g, [&](const Vec3& r) { return std::cos(k * r[2]); });
  const auto lap = apply_laplacian(f);
  const int i = 30;
  CHECK_THAT(lap.values[i], WithinAbs(-stencil_symbol(k, 0.4) * f.values[i], 1e-12));
  CHECK_THAT(stencil_symbol(1e-3, 0.4), WithinRel(1e-6, 1e-6));
}

TEST_CASE("laplacian is symmetric on the zero-boundary grid") {
  const GridSpec g = cube(9, 0.5);
  Eigen::VectorXcd a(g.size()), b(g.size());
  for (std::size_t p = 0; p < g.size(); ++p) {
    a[p] = cplx(std::sin(0.37 * p), std::cos(0.11 * p));
    b[p] = cplx(std::cos(0.23 * p + 1.0), 0.5 * std::sin(0.07 * p));
  }
  Eigen::VectorXcd la(g.size()), lb(g.size());
  laplacian(g, a.data(), la.data());
  laplacian(g, b.data(), lb.data());
  CHECK(std::abs(a.dot(lb) - la.dot(b)) < 1e-10 * a.norm() * lb.norm());
}

TEST_CASE("kinetic energy of a Gaussian orbital") {
  // phi = (2/pi)^(3/4) exp(-r^2): <T> = 3/2.
  const GridSpec g = cube(48, 0.15);
  const auto phi = sample<cplx>(g, [](const Vec3& r) {
    return std::pow(2.0 / std::numbers::pi, 0.75) * std::exp(-(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]));
  });
  CHECK_THAT(kinetic_energy(phi), WithinRel(1.5, 1e-4));
}

TEST_CASE("orthonormalization") {
  const GridSpec g = line(50, 0.3);
  const double dv = g.cell_volume();
  Eigen::MatrixXcd w(g.size(), 3);
  for (std::size_t p = 0; p < g.size(); ++p) {
    const double z = g.position(p)[2];
    w(p, 0) = std::exp(-z * z);
    w(p, 1) = z * std::exp(-z * z / 2.0) + 0.3 * std::exp(-z * z);
    w(p, 2) = cplx(z * z, 0.2 * z) * std::exp(-z * z / 3.0);
  }

  SECTION("loewdin keeps the spanned space") {
    Eigen::MatrixXcd q = w;
    orthonormalize_channel(q, dv);
    CHECK((overlap(q, dv) - Eigen::MatrixXcd::Identity(3, 3)).norm() < 1e-12);
    // Projector onto span(w) is unchanged.
    const Eigen::MatrixXcd s_inv = overlap(w, dv).inverse();
    const Eigen::MatrixXcd p_w = w * s_inv * w.adjoint() * dv;
    const Eigen::MatrixXcd p_q = q * q.adjoint() * dv;
    CHECK((p_w - p_q).cwiseAbs().maxCoeff() < 1e-10);
    // Loewdin of an orthonormal set is the identity.
    Eigen::MatrixXcd again = q;
    orthonormalize_channel(again, dv);
    CHECK((again - q).cwiseAbs().maxCoeff() < 1e-12);
  }

  SECTION("gram-schmidt") {
    Eigen::MatrixXcd q = w;
    orthonormalize_channel(q, dv, OrthoMethod::gram_schmidt);
    CHECK((overlap(q, dv) - Eigen::MatrixXcd::Identity(3, 3)).norm() < 1e-12);
    // The first orbital only changes by its norm.
    CHECK(std::abs(std::abs(q.col(0).dot(w.col(0)) * dv) - std::sqrt(w.col(0).squaredNorm() * dv)) < 1e-12);
  }

  SECTION("linearly dependent orbitals are refused") {
    Eigen::MatrixXcd d = w;
    d.col(2) = 2.0 * d.col(0);
    CHECK_THROWS_AS(orthonormalize_channel(d, dv), DegeneracyError);
    Eigen::MatrixXcd e = d;
    CHECK_THROWS_AS(orthonormalize_channel(e, dv, OrthoMethod::gram_schmidt), DegeneracyError);
  }
}

TEST_CASE("both orbital sets build the same density") {
  const GridSpec g = line(40, 0.4);
  OrbitalSet set(g, 2, 1);
  for (std::size_t p = 0; p < g.size(); ++p) {
    const double z = g.position(p)[2];
    set.waves(Spin::up)(p, 0) = std::exp(-z * z / 4.0);
    set.waves(Spin::up)(p, 1) = z * std::exp(-z * z / 4.0);
    set.waves(Spin::down)(p, 0) = std::exp(-z * z / 2.0);
  }
  orthonormalize(set);
  const double t = 0.7;
  set.transform[Spin::up] << std::cos(t), cplx(0.0, std::sin(t)), cplx(0.0, std::sin(t)), std::cos(t);
  const Eigen::VectorXd a = channel_density(set.set(Spin::up, OrbitalKind::diagonal));
  const Eigen::VectorXd b = channel_density(set.set(Spin::up, OrbitalKind::localized));
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-14);
  CHECK_THAT(integrate(total_density(set)), WithinAbs(3.0, 1e-12));
  CHECK_FALSE(set.spin_symmetric());
  CHECK(set.orbital(Spin::up, 1, OrbitalKind::localized).wave.values.isApprox(set.localized(Spin::up).col(1)));
}
