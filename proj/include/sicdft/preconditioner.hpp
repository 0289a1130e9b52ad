#pragma once

// (T + E0)^-1 for wave functions vanishing one spacing outside the grid.
// The sine transform (DST-I) diagonalizes the Dirichlet second difference; the
// fourth-order stencil symbol is used for the diagonal, which is exact in the
// interior and close enough near the walls for a preconditioner.

#include <fftw3.h>

#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "sicdft/grid.hpp"
#include "sicdft/laplacian.hpp"
#include "sicdft/poisson.hpp"

namespace sicdft {

class KineticPreconditioner {
 public:
  KineticPreconditioner(const GridSpec& grid, double e0) : grid_(grid), e0_(e0) {
    std::vector<int> axes;
    for (int a = 0; a < 3; ++a)
      if (grid.active(a) && grid.dims[a] > 1) axes.push_back(a);
    const std::size_t n = grid.size();
    buffer_.reset(fftw_alloc_real(n));
    std::vector<int> dims;
    std::vector<fftw_r2r_kind> kinds;
    for (int a : axes) {
      dims.push_back(grid.dims[a]);
      kinds.push_back(FFTW_RODFT00);
    }
    {
      std::lock_guard lock(detail::fftw_planner_mutex());
      plan_ = detail::FftwPlan(fftw_plan_r2r(static_cast<int>(dims.size()), dims.data(), buffer_.get(),
                                             buffer_.get(), kinds.data(), FFTW_ESTIMATE));
    }
    double norm = 1.0;
    for (int a : axes) norm *= 2.0 * (grid.dims[a] + 1);
    factor_.resize(n);
    for (std::size_t p = 0; p < n; ++p) {
      const auto idx = grid.unflat(p);
      double t = 0.0;
      for (int a : axes) {
        const double k = std::numbers::pi * (idx[a] + 1) / ((grid.dims[a] + 1) * grid.spacing[a]);
        t += 0.5 * stencil_symbol(k, grid.spacing[a]);
      }
      factor_[p] = 1.0 / ((t + e0_) * norm);
    }
  }

  double shift() const { return e0_; }

  /// Apply in place to every column.
  void apply(Eigen::MatrixXcd& block) {
    for (Eigen::Index c = 0; c < block.cols(); ++c) {
      Eigen::VectorXd re = block.col(c).real();
      Eigen::VectorXd im = block.col(c).imag();
      apply_real(re);
      apply_real(im);
      block.col(c).real() = re;
      block.col(c).imag() = im;
    }
  }

  void apply_real(Eigen::VectorXd& v) {
    double* b = buffer_.get();
    const auto n = static_cast<std::size_t>(v.size());
    std::copy(v.data(), v.data() + n, b);
    plan_.execute();
    for (std::size_t p = 0; p < n; ++p) b[p] *= factor_[p];
    plan_.execute();
    std::copy(b, b + n, v.data());
  }

 private:
  GridSpec grid_;
  double e0_;
  std::unique_ptr<double, detail::FftwDeleter> buffer_;
  detail::FftwPlan plan_;
  std::vector<double> factor_;
};

}  // namespace sicdft
