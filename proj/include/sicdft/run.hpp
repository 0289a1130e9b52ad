#pragma once

// Task execution and result emission.
//
// Polarizability CSV columns (fixed order):
//   system, scheme, axis, E, mu_plus, mu_minus, alpha, linearity_pct, converged
// Energy CSV columns (scf task, and the .energies.csv companion of the others):
//   system, scheme, energy, iterations, max_variance, symmetry_residual, converged
// Files start with '#' provenance lines: code version, the resolved config, and
// grid and tolerance summaries.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "sicdft/builtins.hpp"
#include "sicdft/config.hpp"
#include "sicdft/polarizability.hpp"
#include "sicdft/scf.hpp"

#ifndef SICDFT_VERSION
#define SICDFT_VERSION "0.0.0"
#endif

namespace sicdft {

inline constexpr const char* kVersion = SICDFT_VERSION;

enum ExitCode : int { kExitOk = 0, kExitNotConverged = 1, kExitConfigError = 2, kExitIoError = 3 };

struct EnergyRecord {
  std::string system;
  ConvergenceReport report;
};

struct RunResult {
  std::vector<EnergyRecord> energies;
  std::vector<PolarizabilityReport> polarizabilities;
  /// Atom count per polarizability report, for per-atom values.
  std::vector<int> atoms;

  bool all_converged() const {
    for (const auto& e : energies)
      if (!e.report.converged) return false;
    for (const auto& p : polarizabilities)
      if (!p.valid) return false;
    return true;
  }
};

struct RunOptions {
  int threads = 1;
  /// Receives (system, scheme, trace) for every SCF iteration when set.
  std::function<void(const std::string&, SchemeId, const IterationTrace&)> trace;
  /// Receives a line of progress after every finished sub-task when set.
  std::function<void(const std::string&)> progress;
};

/// Thread count from SICDFT_THREADS (default 1).
inline int threads_from_environment() {
  const char* v = std::getenv("SICDFT_THREADS");
  if (!v || !*v) return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1 || n > 256) throw ConfigurationError("SICDFT_THREADS: expected an integer in [1, 256]");
  return static_cast<int>(n);
}

namespace run_detail {

inline PolarizabilityReport polarize(const RunConfig& cfg, const SystemSpec& system, SchemeId scheme,
                                     const RunOptions& opt, RunResult& out) {
  PolarizabilityRequest req;
  req.system = system;
  req.scheme = scheme;
  req.axes = cfg.polarizability.axes;
  req.field_strength = cfg.polarizability.field_strength;
  req.linearity_check = cfg.polarizability.linearity_check;
  req.scf = cfg.scf;
  req.threads = opt.threads;
  const Model model(system);
  TraceSink sink;
  if (opt.trace) sink = [&](const IterationTrace& t) { opt.trace(system.name, scheme, t); };
  const GroundState zero = solve_ground_state(model, scheme, cfg.scf, nullptr, sink);
  auto rep = polarizability(req, zero);
  out.energies.push_back({system.name, zero.report});
  out.polarizabilities.push_back(rep);
  out.atoms.push_back(static_cast<int>(system.ions.ions.size()));
  if (opt.progress) {
    std::ostringstream line;
    line << system.name << " " << to_string(scheme);
    for (const auto& a : rep.axes) line << " alpha_" << axis_name(a.axis) << "=" << a.alpha;
    line << (rep.valid ? "" : " (not converged)");
    opt.progress(line.str());
  }
  return rep;
}

}  // namespace run_detail

inline RunResult execute(const RunConfig& cfg, const RunOptions& opt = {}) {
  validate(cfg);
  RunResult out;
  switch (cfg.task) {
    case Task::scf: {
      const Model model(cfg.system);
      for (SchemeId scheme : cfg.schemes) {
        TraceSink sink;
        if (opt.trace) sink = [&](const IterationTrace& t) { opt.trace(cfg.system.name, scheme, t); };
        const GroundState gs = solve_ground_state(model, scheme, cfg.scf, nullptr, sink);
        out.energies.push_back({cfg.system.name, gs.report});
        if (opt.progress)
          opt.progress(cfg.system.name + " " + to_string(scheme) + " E=" + std::to_string(gs.report.total_energy));
      }
      break;
    }
    case Task::polarizability:
    case Task::compare:
      for (SchemeId scheme : cfg.schemes) run_detail::polarize(cfg, cfg.system, scheme, opt, out);
      break;
    case Task::chain_series:
      for (int n : cfg.series.n_list) {
        const SystemSpec sys = h_chain(n, cfg.series.mode, cfg.series.spacing);
        for (SchemeId scheme : cfg.schemes) run_detail::polarize(cfg, sys, scheme, opt, out);
      }
      break;
    case Task::h4_sweep: {
      for (double d : cfg.series.d_list) {
        const SystemSpec sys = h4_sweep(d, cfg.series.mode, cfg.series.spacing);
        for (SchemeId scheme : cfg.schemes) run_detail::polarize(cfg, sys, scheme, opt, out);
      }
      // Isolated-molecule reference for the large-distance limit.
      const SystemSpec ref = h2(cfg.series.mode, cfg.series.spacing);
      for (SchemeId scheme : cfg.schemes) run_detail::polarize(cfg, ref, scheme, opt, out);
      break;
    }
  }
  return out;
}

/// Shortest text that reads back as the same double; "nan" for NaN.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  for (int prec = 6; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline void write_provenance(std::ostream& os, const RunConfig& cfg) {
  os << "# sicdft " << kVersion << "\n";
  os << "# config: " << to_json(cfg).dump() << "\n";
  if (cfg.has_system) {
    const auto& g = cfg.system.grid;
    os << "# grid: " << g.dims[0] << "x" << g.dims[1] << "x" << g.dims[2] << " spacing "
       << format_number(g.spacing[0]) << " mode " << to_string(g.mode) << "\n";
  }
  os << "# tolerances: tol_energy " << format_number(cfg.scf.tol_energy) << " tol_variance "
     << format_number(cfg.scf.tol_variance) << " tol_localize " << format_number(cfg.scf.tol_localize) << "\n";
}

inline void write_polarizability_csv(std::ostream& os, const RunResult& res) {
  os << "system,scheme,axis,E,mu_plus,mu_minus,alpha,linearity_pct,converged\n";
  for (const auto& rep : res.polarizabilities)
    for (const auto& a : rep.axes)
      os << rep.system << "," << to_string(rep.scheme) << "," << axis_name(a.axis) << ","
         << format_number(rep.field_strength) << "," << format_number(a.mu_plus) << "," << format_number(a.mu_minus)
         << "," << format_number(a.alpha) << "," << format_number(a.linearity_pct) << ","
         << (a.converged ? "true" : "false") << "\n";
}

inline void write_energy_csv(std::ostream& os, const RunResult& res) {
  os << "system,scheme,energy,iterations,max_variance,symmetry_residual,converged\n";
  for (const auto& e : res.energies)
    os << e.system << "," << to_string(e.report.scheme) << "," << format_number(e.report.total_energy) << ","
       << e.report.iterations << "," << format_number(e.report.max_variance) << ","
       << format_number(e.report.symmetry_residual) << "," << (e.report.converged ? "true" : "false") << "\n";
}

inline Json json_number(double v) { return std::isnan(v) ? Json(nullptr) : Json(v); }

inline Json to_json(const ConvergenceReport& r) {
  Json eps = Json::object();
  for (Spin s : kSpins) {
    Json list = Json::array();
    for (Eigen::Index i = 0; i < r.eigenvalues[index(s)].size(); ++i) list.push_back(r.eigenvalues[index(s)][i]);
    eps[to_string(s)] = list;
  }
  return {{"scheme", to_string(r.scheme)},
          {"converged", r.converged},
          {"message", r.message},
          {"iterations", r.iterations},
          {"energy",
           {{"total", r.total_energy},
            {"kinetic", r.energy.kinetic},
            {"ion", r.energy.ion},
            {"lda", r.energy.lda},
            {"sic_correction", r.energy.sic_correction}}},
          {"eigenvalues", eps},
          {"max_variance", r.max_variance},
          {"symmetry_residual", r.symmetry_residual},
          {"kli_residual", r.kli_residual},
          {"lambda_asymmetry", r.lambda_asymmetry},
          {"final_step", r.final_step}};
}

inline Json to_json(const PolarizabilityReport& rep, int atoms) {
  Json axes = Json::array();
  for (const auto& a : rep.axes)
    axes.push_back({{"axis", std::string(1, axis_name(a.axis))},
                    {"mu_zero", a.mu_zero},
                    {"mu_plus", a.mu_plus},
                    {"mu_minus", a.mu_minus},
                    {"alpha", a.alpha},
                    {"alpha_per_atom", a.alpha / atoms},
                    {"alpha_half", json_number(a.alpha_half)},
                    {"linearity_pct", json_number(a.linearity_pct)},
                    {"converged", a.converged}});
  return {{"system", rep.system},
          {"scheme", to_string(rep.scheme)},
          {"field_strength", rep.field_strength},
          {"valid", rep.valid},
          {"axes", axes},
          {"diagnostics", rep.diagnostics},
          {"zero_field", to_json(rep.zero_field)}};
}

inline Json to_json(const RunConfig& cfg, const RunResult& res) {
  Json j;
  j["version"] = kVersion;
  j["config"] = to_json(cfg);
  Json energies = Json::array();
  for (const auto& e : res.energies) {
    Json row = to_json(e.report);
    row["system"] = e.system;
    energies.push_back(row);
  }
  j["ground_states"] = energies;
  if (cfg.task != Task::scf) {
    Json pol = Json::array();
    for (std::size_t k = 0; k < res.polarizabilities.size(); ++k)
      pol.push_back(to_json(res.polarizabilities[k], res.atoms[k]));
    j["polarizabilities"] = pol;
  }
  j["all_converged"] = res.all_converged();
  return j;
}

/// Write the result in the configured format. Returns false on I/O failure.
inline bool write_result(const RunConfig& cfg, const RunResult& res, std::ostream& fallback = std::cout) {
  auto emit = [&](std::ostream& os, bool energies_only) {
    if (cfg.output.format == OutputFormat::json) {
      os << to_json(cfg, res).dump(2) << "\n";
      return;
    }
    write_provenance(os, cfg);
    if (energies_only)
      write_energy_csv(os, res);
    else
      write_polarizability_csv(os, res);
  };
  const bool energies_only = cfg.task == Task::scf;
  if (cfg.output.path.empty()) {
    emit(fallback, energies_only);
    return static_cast<bool>(fallback);
  }
  std::ofstream file(cfg.output.path);
  if (!file) return false;
  emit(file, energies_only);
  if (!file) return false;
  if (cfg.output.format == OutputFormat::csv && !energies_only) {
    std::ofstream side(cfg.output.path + ".energies.csv");
    if (!side) return false;
    write_provenance(side, cfg);
    write_energy_csv(side, res);
    if (!side) return false;
  }
  return true;
}

}  // namespace sicdft
