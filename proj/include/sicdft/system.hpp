#pragma once

#include <cmath>
#include <memory>
#include <string>

#include <Eigen/Dense>

#include "sicdft/errors.hpp"
#include "sicdft/grid.hpp"
#include "sicdft/ions.hpp"
#include "sicdft/orbitals.hpp"
#include "sicdft/poisson.hpp"
#include "sicdft/xc.hpp"

namespace sicdft {

struct SystemSpec {
  std::string name = "system";
  IonicConfiguration ions;
  int n_up = 0;
  int n_down = 0;
  GridSpec grid;
  XCFunctionalSpec xc;
  /// Soft-Coulomb parameter a of the 1d interaction kernel.
  double softening = 1.0;

  int electrons(Spin s) const { return s == Spin::up ? n_up : n_down; }

  void validate() const {
    grid.validate();
    if (n_up < 0 || n_down < 0) throw ConfigurationError("electrons: counts must be non-negative");
    if (n_up + n_down == 0) throw ConfigurationError("electrons: system has no electrons");
    if (ions.ions.empty()) throw ConfigurationError("ions: at least one ion is required");
    for (std::size_t k = 0; k < ions.ions.size(); ++k) {
      try {
        sicdft::validate(ions.ions[k].pseudo, ions.ions[k].charge);
      } catch (const ConfigurationError& e) {
        throw ConfigurationError("ions[" + std::to_string(k) + "]." + e.what());
      }
    }
    if (std::abs(ions.total_charge() - (n_up + n_down)) > 1e-9)
      throw ConfigurationError("electrons: total valence charge " + std::to_string(ions.total_charge()) +
                               " differs from electron count " + std::to_string(n_up + n_down) +
                               " (only neutral systems are supported)");
    if (static_cast<std::size_t>(std::max(n_up, n_down)) > grid.size())
      throw ConfigurationError("electrons: more orbitals than grid points");
    validate_placement(ions, grid);
  }

  friend bool operator==(const SystemSpec&, const SystemSpec&) = default;
};

/// A system placed in a static field, with the solvers needed to evaluate its
/// mean fields. Models built from each other share one Hartree solver, so they
/// must stay on the same thread.
class Model {
 public:
  explicit Model(SystemSpec system, const Vec3& field = {0.0, 0.0, 0.0})
      : system_(std::move(system)) {
    system_.validate();
    hartree_ = std::make_shared<HartreeSolver>(system_.grid, system_.softening);
    set_field(field);
  }

  /// Same system and solver, different field.
  Model with_field(const Vec3& field) const {
    Model m(*this);
    m.set_field(field);
    return m;
  }

  const SystemSpec& system() const { return system_; }
  const GridSpec& grid() const { return system_.grid; }
  const XCFunctionalSpec& xc() const { return system_.xc; }
  const Vec3& field() const { return field_; }
  int electrons(Spin s) const { return system_.electrons(s); }
  double cell_volume() const { return system_.grid.cell_volume(); }

  HartreeSolver& hartree() const { return *hartree_; }

  /// Ionic pseudopotential plus the field ramp.
  const Eigen::VectorXd& external() const { return external_; }
  const RealField& ionic() const { return ionic_; }

  /// Ion-ion repulsion plus the ions' energy in the field.
  double ionic_constant() const { return ionic_constant_; }

 private:
  void set_field(const Vec3& field) {
    field_ = field;
    if (ionic_.size() == 0) ionic_ = ionic_potential(system_.ions, system_.grid, system_.softening);
    external_ = ionic_.values + field_potential(field_, system_.grid).values;
    ionic_constant_ = ionic_constant_energy(system_.ions, system_.grid, field_, system_.softening);
  }

  SystemSpec system_;
  Vec3 field_{0.0, 0.0, 0.0};
  std::shared_ptr<HartreeSolver> hartree_;
  RealField ionic_;
  Eigen::VectorXd external_;
  double ionic_constant_ = 0.0;
};

}  // namespace sicdft
