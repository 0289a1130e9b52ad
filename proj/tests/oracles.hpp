#pragma once

// Reference computations that avoid the production code paths.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "sicdft/grid.hpp"
#include "sicdft/schemes.hpp"
#include "sicdft/system.hpp"

namespace oracle {

using sicdft::cplx;
using sicdft::GridSpec;

/// Uniform double in [lo, hi) from raw engine output.
inline double uniform(std::mt19937& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng()) / 4294967296.0);
}

/// Hartree energy 1/2 sum_ij rho_i rho_j C(i - j) dv with the solver's discrete
/// kernel rebuilt term by term: the sampled long-range part erf(r/s)/r times dv
/// plus an explicit cosine series of the short-range Fourier kernel over the
/// doubled grid. O(N^2) in the grid size.
inline double direct_hartree_energy(const GridSpec& g, const Eigen::VectorXd& rho) {
  const std::array<int, 3> n = g.dims;
  std::array<int, 3> p{2 * n[0], 2 * n[1], 2 * n[2]};
  const double hmax = std::max({g.spacing[0], g.spacing[1], g.spacing[2]});
  const double s = 3.0 * hmax;
  const double dv = g.cell_volume();
  const double total = static_cast<double>(p[0]) * p[1] * p[2];

  // cos(k_m d h) tables per axis, d in [0, n).
  std::array<std::vector<double>, 3> cos_tab;
  std::array<std::vector<double>, 3> k_tab;
  for (int a = 0; a < 3; ++a) {
    cos_tab[a].resize(static_cast<std::size_t>(p[a]) * n[a]);
    k_tab[a].resize(p[a]);
    for (int m = 0; m < p[a]; ++m) {
      const int mm = m <= p[a] / 2 ? m : m - p[a];
      k_tab[a][m] = 2.0 * std::numbers::pi * mm / (p[a] * g.spacing[a]);
      for (int d = 0; d < n[a]; ++d)
        cos_tab[a][static_cast<std::size_t>(m) * n[a] + d] = std::cos(k_tab[a][m] * d * g.spacing[a]);
    }
  }
  std::vector<double> gsr(static_cast<std::size_t>(total));
  for (int i = 0; i < p[0]; ++i)
    for (int j = 0; j < p[1]; ++j)
      for (int k = 0; k < p[2]; ++k) {
        const double k2 = k_tab[0][i] * k_tab[0][i] + k_tab[1][j] * k_tab[1][j] + k_tab[2][k] * k_tab[2][k];
        gsr[(static_cast<std::size_t>(i) * p[1] + j) * p[2] + k] =
            k2 == 0.0 ? std::numbers::pi * s * s : 4.0 * std::numbers::pi * (1.0 - std::exp(-0.25 * k2 * s * s)) / k2;
      }

  // Kernel as a function of |offset| per axis (it is even in each component).
  std::vector<double> kernel(static_cast<std::size_t>(n[0]) * n[1] * n[2]);
  for (int dx = 0; dx < n[0]; ++dx)
    for (int dy = 0; dy < n[1]; ++dy)
      for (int dz = 0; dz < n[2]; ++dz) {
        double sr = 0.0;
        for (int i = 0; i < p[0]; ++i) {
          const double cx = cos_tab[0][static_cast<std::size_t>(i) * n[0] + dx];
          for (int j = 0; j < p[1]; ++j) {
            const double cxy = cx * cos_tab[1][static_cast<std::size_t>(j) * n[1] + dy];
            const double* gr = &gsr[(static_cast<std::size_t>(i) * p[1] + j) * p[2]];
            for (int k = 0; k < p[2]; ++k) sr += gr[k] * cxy * cos_tab[2][static_cast<std::size_t>(k) * n[2] + dz];
          }
        }
        const double x = dx * g.spacing[0], y = dy * g.spacing[1], z = dz * g.spacing[2];
        const double r = std::sqrt(x * x + y * y + z * z);
        const double lr = r == 0.0 ? 2.0 / (s * std::sqrt(std::numbers::pi)) : std::erf(r / s) / r;
        kernel[(static_cast<std::size_t>(dx) * n[1] + dy) * n[2] + dz] = lr * dv + sr / total;
      }

  double e = 0.0;
  for (std::size_t a = 0; a < g.size(); ++a) {
    const auto ia = g.unflat(a);
    double acc = 0.0;
    for (std::size_t b = 0; b < g.size(); ++b) {
      const auto ib = g.unflat(b);
      const int dx = std::abs(ia[0] - ib[0]), dy = std::abs(ia[1] - ib[1]), dz = std::abs(ia[2] - ib[2]);
      acc += kernel[(static_cast<std::size_t>(dx) * n[1] + dy) * n[2] + dz] * rho[static_cast<Eigen::Index>(b)];
    }
    e += rho[static_cast<Eigen::Index>(a)] * acc;
  }
  return 0.5 * e * dv;
}

/// KLI constants by the fixed-point iteration c <- b + M' c projected onto
/// sum c = 0, with M' = 1 - M.
inline Eigen::VectorXd kli_fixed_point(const sicdft::KliSystem& sys, int iterations = 2000) {
  const auto n = sys.rhs.size();
  const Eigen::MatrixXd mprime = Eigen::MatrixXd::Identity(n, n) - sys.matrix;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  for (int it = 0; it < iterations; ++it) {
    c = sys.rhs + mprime * c;
    c.array() -= c.mean();
  }
  return c;
}

/// sum_a E_LDA[|psi_a|^2] for psi = phi R(theta) with a real 2x2 rotation.
inline double rotated_objective(const sicdft::Model& model, const Eigen::MatrixXcd& phi, double theta) {
  Eigen::MatrixXcd r(2, 2);
  r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  const Eigen::MatrixXcd psi = phi * r;
  double f = 0.0;
  for (int a = 0; a < 2; ++a) {
    const Eigen::VectorXd rho = psi.col(a).cwiseAbs2();
    Eigen::VectorXd v(rho.size());
    f += sicdft::polarized_lda(model, rho, v);
  }
  return f;
}

/// Brute-force maximizer of rotated_objective on [0, pi/2), which covers every
/// distinct pair of orbitals up to order and sign. Coarse scan followed by
/// golden-section refinement.
inline double best_rotation_angle(const sicdft::Model& model, const Eigen::MatrixXcd& phi, int samples = 180) {
  const double period = 0.5 * std::numbers::pi;
  int best = 0;
  double fbest = -1e300;
  for (int k = 0; k < samples; ++k) {
    const double f = rotated_objective(model, phi, period * k / samples);
    if (f > fbest) {
      fbest = f;
      best = k;
    }
  }
  double lo = period * (best - 1) / samples, hi = period * (best + 1) / samples;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = rotated_objective(model, phi, x1), f2 = rotated_objective(model, phi, x2);
  while (hi - lo > 1e-6) {
    if (f1 > f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = rotated_objective(model, phi, x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = rotated_objective(model, phi, x2);
    }
  }
  const double t = 0.5 * (lo + hi);
  return std::fmod(t + period, period);
}

/// Angle of a 2x2 unitary of the form R(theta) diag(phases), modulo pi/2.
/// Column phases do not change orbital densities and are removed first.
inline double rotation_angle(const Eigen::MatrixXcd& u) {
  const double period = 0.5 * std::numbers::pi;
  Eigen::MatrixXcd r = u;
  for (int c = 0; c < 2; ++c) {
    const cplx z = std::abs(r(0, c)) >= std::abs(r(1, c)) ? r(0, c) : r(1, c);
    r.col(c) *= std::abs(z) / z;
  }
  double t = std::atan2(r(1, 0).real(), r(0, 0).real());
  return std::fmod(std::fmod(t, period) + period, period);
}

/// Distance between two angles modulo pi/2.
inline double angle_distance(double a, double b) {
  const double period = 0.5 * std::numbers::pi;
  double d = std::fmod(std::abs(a - b), period);
  return std::min(d, period - d);
}

}  // namespace oracle
