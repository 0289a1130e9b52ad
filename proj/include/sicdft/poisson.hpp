#pragma once

// Free-space Hartree potential V(r) = int rho(r') / |r - r'| dr'.
//
// 3d grids: zero-padded (doubled) FFT convolution. The Coulomb kernel is split
// at a screening length s = 3 h_max,
//   1/r = erf(r/s)/r + erfc(r/s)/r.
// The smooth long-range part is sampled in real space on the padded grid, which
// keeps the boundary conditions isolated. The short-range part is applied in
// Fourier space through its analytic transform 4 pi (1 - exp(-k^2 s^2 / 4)) / k^2;
// it decays well inside the padding so periodic images do not matter. For
// densities resolved on the grid the result is spectrally accurate.
//
// 1d grids: direct convolution with the soft-Coulomb kernel 1/sqrt(x^2 + a^2).
//
// A solver owns FFTW plans and scratch buffers: one instance per thread.

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "sicdft/grid.hpp"

namespace sicdft {

namespace detail {

/// FFTW's planner is not thread-safe; every plan creation and destruction goes
/// through this lock.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwDeleter {
  void operator()(double* p) const { fftw_free(p); }
  void operator()(fftw_complex* p) const { fftw_free(p); }
};

class FftwPlan {
 public:
  FftwPlan() = default;
  explicit FftwPlan(fftw_plan p) : plan_(p) {}
  FftwPlan(const FftwPlan&) = delete;
  FftwPlan& operator=(const FftwPlan&) = delete;
  FftwPlan(FftwPlan&& o) noexcept : plan_(o.plan_) { o.plan_ = nullptr; }
  FftwPlan& operator=(FftwPlan&& o) noexcept {
    std::swap(plan_, o.plan_);
    return *this;
  }
  ~FftwPlan() {
    if (plan_) {
      std::lock_guard lock(fftw_planner_mutex());
      fftw_destroy_plan(plan_);
    }
  }
  void execute() const { fftw_execute(plan_); }

 private:
  fftw_plan plan_ = nullptr;
};

}  // namespace detail

class HartreeSolver {
 public:
  explicit HartreeSolver(const GridSpec& grid, double softening = 1.0)
      : grid_(grid), softening_(softening) {
    grid_.validate();
    if (grid_.mode == GridMode::full_3d)
      setup_3d();
    else
      setup_1d();
  }

  const GridSpec& grid() const { return grid_; }
  double screening_length() const { return screening_; }
  std::array<int, 3> padded_dims() const { return padded_; }

  /// Potential of `rho` written into `out` (both of length grid().size()).
  void solve(const Eigen::Ref<const Eigen::VectorXd>& rho, Eigen::Ref<Eigen::VectorXd> out) {
    if (grid_.mode == GridMode::full_3d)
      solve_3d(rho, out);
    else
      out.noalias() = line_kernel_ * rho;
  }

  RealField solve(const RealField& rho) {
    RealField v(grid_);
    solve(rho.values, v.values);
    return v;
  }

  /// Fourier-space short-range kernel for wave vector squared k2.
  static double short_range_kernel(double k2, double s) {
    if (k2 == 0.0) return std::numbers::pi * s * s;
    return 4.0 * std::numbers::pi * (1.0 - std::exp(-0.25 * k2 * s * s)) / k2;
  }

  /// Real-space long-range kernel erf(r/s)/r.
  static double long_range_kernel(double r, double s) {
    if (r < 1e-12 * s) return 2.0 / (s * std::sqrt(std::numbers::pi));
    return std::erf(r / s) / r;
  }

  /// Signed offset of padded index m on a padded axis of length p.
  static int signed_offset(int m, int p) { return m <= p / 2 ? m : m - p; }

 private:
  void setup_1d() {
    const int axis = grid_.line_axis();
    const int n = grid_.dims[axis];
    const double h = grid_.spacing[axis];
    line_kernel_.resize(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double x = (i - j) * h;
        line_kernel_(i, j) = h / std::sqrt(x * x + softening_ * softening_);
      }
  }

  void setup_3d() {
    for (int a = 0; a < 3; ++a) padded_[a] = 2 * grid_.dims[a];
    const double hmax = std::max({grid_.spacing[0], grid_.spacing[1], grid_.spacing[2]});
    screening_ = 3.0 * hmax;
    const std::size_t nreal = static_cast<std::size_t>(padded_[0]) * padded_[1] * padded_[2];
    const std::size_t ncplx = static_cast<std::size_t>(padded_[0]) * padded_[1] * (padded_[2] / 2 + 1);
    real_.reset(fftw_alloc_real(nreal));
    spec_.reset(fftw_alloc_complex(ncplx));
    {
      std::lock_guard lock(detail::fftw_planner_mutex());
      forward_ = detail::FftwPlan(fftw_plan_dft_r2c_3d(padded_[0], padded_[1], padded_[2],
                                                       real_.get(), spec_.get(), FFTW_ESTIMATE));
      backward_ = detail::FftwPlan(fftw_plan_dft_c2r_3d(padded_[0], padded_[1], padded_[2],
                                                        spec_.get(), real_.get(), FFTW_ESTIMATE));
    }

    // Long-range kernel samples on the padded grid (minimum-image offsets).
    for (int i = 0; i < padded_[0]; ++i) {
      const double x = signed_offset(i, padded_[0]) * grid_.spacing[0];
      for (int j = 0; j < padded_[1]; ++j) {
        const double y = signed_offset(j, padded_[1]) * grid_.spacing[1];
        for (int k = 0; k < padded_[2]; ++k) {
          const double z = signed_offset(k, padded_[2]) * grid_.spacing[2];
          real_.get()[(static_cast<std::size_t>(i) * padded_[1] + j) * padded_[2] + k] =
              long_range_kernel(std::sqrt(x * x + y * y + z * z), screening_);
        }
      }
    }
    forward_.execute();

    const double dv = grid_.cell_volume();
    const double norm = 1.0 / static_cast<double>(nreal);
    const int nzc = padded_[2] / 2 + 1;
    kernel_.resize(ncplx);
    for (int i = 0; i < padded_[0]; ++i) {
      const double kx = 2.0 * std::numbers::pi * signed_offset(i, padded_[0]) /
                        (padded_[0] * grid_.spacing[0]);
      for (int j = 0; j < padded_[1]; ++j) {
        const double ky = 2.0 * std::numbers::pi * signed_offset(j, padded_[1]) /
                          (padded_[1] * grid_.spacing[1]);
        for (int k = 0; k < nzc; ++k) {
          const double kz = 2.0 * std::numbers::pi * k / (padded_[2] * grid_.spacing[2]);
          const std::size_t idx = (static_cast<std::size_t>(i) * padded_[1] + j) * nzc + k;
          // Long-range part of a transformed real symmetric kernel is real.
          const double lr = spec_.get()[idx][0] * dv;
          const double sr = short_range_kernel(kx * kx + ky * ky + kz * kz, screening_);
          kernel_[idx] = (lr + sr) * norm;
        }
      }
    }
  }

  void solve_3d(const Eigen::Ref<const Eigen::VectorXd>& rho, Eigen::Ref<Eigen::VectorXd> out) {
    const auto& d = grid_.dims;
    const auto& p = padded_;
    double* buf = real_.get();
    std::fill(buf, buf + static_cast<std::size_t>(p[0]) * p[1] * p[2], 0.0);
    for (int i = 0; i < d[0]; ++i)
      for (int j = 0; j < d[1]; ++j) {
        const double* src = rho.data() + grid_.flat(i, j, 0);
        double* dst = buf + (static_cast<std::size_t>(i) * p[1] + j) * p[2];
        std::copy(src, src + d[2], dst);
      }
    forward_.execute();
    fftw_complex* spec = spec_.get();
    const std::size_t ncplx = kernel_.size();
    for (std::size_t q = 0; q < ncplx; ++q) {
      spec[q][0] *= kernel_[q];
      spec[q][1] *= kernel_[q];
    }
    backward_.execute();
    for (int i = 0; i < d[0]; ++i)
      for (int j = 0; j < d[1]; ++j) {
        const double* src = buf + (static_cast<std::size_t>(i) * p[1] + j) * p[2];
        std::copy(src, src + d[2], out.data() + grid_.flat(i, j, 0));
      }
  }

  GridSpec grid_;
  double softening_ = 1.0;
  double screening_ = 0.0;
  std::array<int, 3> padded_{0, 0, 0};
  std::unique_ptr<double, detail::FftwDeleter> real_;
  std::unique_ptr<fftw_complex, detail::FftwDeleter> spec_;
  detail::FftwPlan forward_;
  detail::FftwPlan backward_;
  std::vector<double> kernel_;
  Eigen::MatrixXd line_kernel_;
};

/// E_H = 1/2 int rho V_H.
inline double hartree_energy(const RealField& rho, const RealField& v_hartree) {
  return 0.5 * rho.values.dot(v_hartree.values) * rho.grid.cell_volume();
}

}  // namespace sicdft
