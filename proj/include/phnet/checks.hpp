#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "phnet/scenario.hpp"

namespace phnet {

struct CheckItem {
  std::string name;
  bool passed = true;
  double value = 0.0;
  double tol = 0.0;
  std::string detail;
  /// Informational items never fail the suite.
  bool enforced = true;
};

struct CheckReport {
  std::vector<CheckItem> items;
  bool all_passed() const;
  void append(const CheckReport& other);
};

struct CheckSettings {
  std::uint64_t seed = 20240601;
  int random_states = 50;
  int constitutive_samples = 100;
  /// Finite-difference Jacobian checks probe at most this many columns.
  int fd_columns = 60;
  double jacobian_tol = 1e-6;
  double step_jacobian_tol = 1e-5;
};

/// Sup over v of m v - h(rho, v) by golden-section search on an expanding
/// bracket; the test oracle for the closed-form g.
double g_numeric_supremum(const ConstitutiveLaw& law, double rho, double m);

/// Roundtrip, gradient, duality and supremum checks on sampled states in
/// [rho_lo, rho_hi] x [-v_max, v_max].
CheckReport constitutive_checks(const ConstitutiveLaw& law, double rho_lo, double rho_hi, double v_max,
                                const CheckSettings& s = {});

/// Random admissible state around a flat density rho0 with velocities up to
/// v_max.
State random_state(const DiscreteOperators& ops, double rho0, double v_max, std::mt19937_64& rng);

/// Compatibility, mass-matrix Cholesky, skew structure, R PSD, Jacobians
/// against finite differences and reduced Grams.
CheckReport operator_checks(const DiscreteOperators& ops, double rho0, double v_max, const CheckSettings& s = {});

/// Newton Jacobian of the time step against finite differences.
CheckReport stepper_checks(const TimeStepper& stepper, double rho0, double v_max, double dt,
                           const CheckSettings& s = {});

/// Everything above for one scenario.
CheckReport run_checks(const Scenario& sc, const CheckSettings& s = {});

}  // namespace phnet
