#pragma once

#include <stdexcept>
#include <string>

namespace phnet {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A state left the admissible set of the constitutive law.
struct DomainError : Error {
  using Error::Error;
};

struct NetworkError : Error {
  using Error::Error;
};

/// Scenario or network file violation. `pointer` is a JSON pointer to the
/// offending value ("" for the document root).
struct SchemaError : Error {
  SchemaError(std::string ptr, const std::string& what)
      : Error(ptr.empty() ? what : ptr + ": " + what), pointer(std::move(ptr)) {}
  std::string pointer;
};

/// A time step whose nonlinear solve did not converge.
struct StepFailure : Error {
  StepFailure(double t, const std::string& what)
      : Error(what), t_k(t) {}
  double t_k;
};

}  // namespace phnet
