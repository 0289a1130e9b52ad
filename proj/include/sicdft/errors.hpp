#pragma once

#include <stdexcept>
#include <string>

namespace sicdft {

/// Invalid geometry, grid or system description.
class ConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Overlap matrix too close to singular to orthonormalize.
class DegeneracyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Static field outside the range the finite box can represent.
class FieldTooStrongError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Orbital applied to a Hamiltonian built for another spin channel or grid.
class SpinMismatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The damped-gradient step collapsed below its floor.
class StepUnderflowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sicdft
