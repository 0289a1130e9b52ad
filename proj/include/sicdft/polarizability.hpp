#pragma once

// Finite-field static polarizability,
//   alpha_i = (mu_i(+E) - mu_i(-E)) / (2E),
// with every field run warm-started from the zero-field ground state.

#include <algorithm>
#include <atomic>
#include <exception>
#include <cmath>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "sicdft/dipole.hpp"
#include "sicdft/errors.hpp"
#include "sicdft/scf.hpp"
#include "sicdft/system.hpp"

namespace sicdft {

inline constexpr double kDefaultFieldStrength = 5e-4;

inline char axis_name(int axis) { return static_cast<char>('x' + axis); }

inline int parse_axis(const std::string& name) {
  if (name == "x" || name == "X") return 0;
  if (name == "y" || name == "Y") return 1;
  if (name == "z" || name == "Z") return 2;
  throw ConfigurationError("polarizability.axes: unknown axis '" + name + "' (expected x, y or z)");
}

/// SCF settings for field runs: alpha is a small difference of dipoles, so the
/// energy and variance tolerances are tightened.
inline SCFConfig polarizability_scf(SCFConfig cfg = {}) {
  cfg.tol_energy = std::min(cfg.tol_energy, 1e-11);
  cfg.tol_variance = std::min(cfg.tol_variance, 1e-12);
  return cfg;
}

struct PolarizabilityRequest {
  SystemSpec system;
  SchemeId scheme = SchemeId::lda;
  std::vector<int> axes{2};
  double field_strength = kDefaultFieldStrength;
  bool linearity_check = true;
  SCFConfig scf = polarizability_scf();
  /// Field runs executed concurrently, each with its own solver.
  int threads = 1;

  void validate() const {
    if (axes.empty()) throw ConfigurationError("polarizability.axes: at least one axis is required");
    for (int a : axes)
      if (a < 0 || a > 2) throw ConfigurationError("polarizability.axes: axis index out of range");
    if (!(field_strength > 0.0) || field_strength > kMaxFieldStrength)
      throw ConfigurationError("polarizability.field_strength: must lie in (0, 1e-2]");
    if (threads < 1) throw ConfigurationError("threads: must be at least 1");
    scf.validate();
  }
};

struct AxisPolarizability {
  int axis = 2;
  double mu_zero = 0.0;
  double mu_plus = 0.0;
  double mu_minus = 0.0;
  double alpha = 0.0;
  /// alpha from the +-E/2 pair, NaN without the linearity check.
  double alpha_half = std::numeric_limits<double>::quiet_NaN();
  /// 100 |alpha(E) - alpha(E/2)| / alpha(E), NaN without the linearity check.
  double linearity_pct = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
};

struct PolarizabilityReport {
  std::string system;
  SchemeId scheme = SchemeId::lda;
  double field_strength = kDefaultFieldStrength;
  ConvergenceReport zero_field;
  std::vector<AxisPolarizability> axes;
  std::vector<ConvergenceReport> field_runs;
  std::vector<std::string> diagnostics;
  bool valid = false;

  const AxisPolarizability* axis(int a) const {
    for (const auto& r : axes)
      if (r.axis == a) return &r;
    return nullptr;
  }
};

namespace detail {

struct FieldJob {
  int axis = 2;
  double field = 0.0;
  double mu = 0.0;
  ConvergenceReport report;
};

/// Run `jobs` on `threads` workers; each worker owns one solver.
inline void run_field_jobs(const SystemSpec& system, SchemeId scheme, const SCFConfig& cfg, const OrbitalSet& start,
                           std::vector<FieldJob>& jobs, int threads) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_lock;
  auto worker = [&] {
    try {
      std::optional<Model> base;
      for (std::size_t j = next++; j < jobs.size(); j = next++) {
        if (!base) base.emplace(system);
        Vec3 e{0.0, 0.0, 0.0};
        e[jobs[j].axis] = jobs[j].field;
        const Model m = base->with_field(e);
        const GroundState gs = solve_ground_state(m, scheme, cfg, &start);
        jobs[j].mu = dipole_moment(total_density(gs.orbitals), system.ions)[jobs[j].axis];
        jobs[j].report = gs.report;
      }
    } catch (...) {
      std::lock_guard lock(failure_lock);
      if (!failure) failure = std::current_exception();
    }
  };
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(jobs.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace detail

/// Polarizability from an already converged zero-field ground state.
inline PolarizabilityReport polarizability(const PolarizabilityRequest& req, const GroundState& zero) {
  req.validate();
  PolarizabilityReport rep;
  rep.system = req.system.name;
  rep.scheme = req.scheme;
  rep.field_strength = req.field_strength;
  rep.zero_field = zero.report;
  const Vec3 mu0 = dipole_moment(total_density(zero.orbitals), req.system.ions);

  const double e = req.field_strength;
  std::vector<detail::FieldJob> jobs;
  for (int a : req.axes) {
    jobs.push_back({a, +e, 0.0, {}});
    jobs.push_back({a, -e, 0.0, {}});
    if (req.linearity_check) {
      jobs.push_back({a, +0.5 * e, 0.0, {}});
      jobs.push_back({a, -0.5 * e, 0.0, {}});
    }
  }
  detail::run_field_jobs(req.system, req.scheme, req.scf, zero.orbitals, jobs, req.threads);

  bool all_converged = zero.report.converged;
  if (!zero.report.converged) rep.diagnostics.push_back("zero-field run did not converge: " + zero.report.message);
  std::size_t j = 0;
  for (int a : req.axes) {
    AxisPolarizability r;
    r.axis = a;
    r.mu_zero = mu0[a];
    const auto& plus = jobs[j++];
    const auto& minus = jobs[j++];
    r.mu_plus = plus.mu;
    r.mu_minus = minus.mu;
    r.alpha = (plus.mu - minus.mu) / (2.0 * e);
    r.converged = zero.report.converged && plus.report.converged && minus.report.converged;
    rep.field_runs.push_back(plus.report);
    rep.field_runs.push_back(minus.report);
    if (req.linearity_check) {
      const auto& hp = jobs[j++];
      const auto& hm = jobs[j++];
      r.alpha_half = (hp.mu - hm.mu) / e;
      r.linearity_pct = 100.0 * std::abs(r.alpha - r.alpha_half) / std::abs(r.alpha);
      r.converged = r.converged && hp.report.converged && hm.report.converged;
      rep.field_runs.push_back(hp.report);
      rep.field_runs.push_back(hm.report);
      if (r.linearity_pct > 1.0)
        rep.diagnostics.push_back(std::string("axis ") + axis_name(a) +
                                  ": response not linear within 1%; try a smaller field strength");
    }
    if (!r.converged) rep.diagnostics.push_back(std::string("axis ") + axis_name(a) + ": a field run did not converge");
    if (!(r.alpha > 0.0))
      rep.diagnostics.push_back(std::string("axis ") + axis_name(a) + ": non-positive polarizability");
    all_converged = all_converged && r.converged;
    rep.axes.push_back(r);
  }
  rep.valid = all_converged;
  return rep;
}

inline PolarizabilityReport polarizability(const PolarizabilityRequest& req) {
  req.validate();
  const Model model(req.system);
  const GroundState zero = solve_ground_state(model, req.scheme, req.scf);
  return polarizability(req, zero);
}

}  // namespace sicdft
