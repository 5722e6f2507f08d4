#pragma once

#include <array>
#include <limits>
#include <string>
#include <variant>

#include "phnet/errors.hpp"

namespace phnet {

/// p(rho) = c rho^2.
struct Isentropic {
  double c = 0.5;
};

/// p(rho) = R T rho / (1 - R T alpha rho), a virial-type real gas law.
struct IsothermalAlpha {
  double R = 518.0;
  double T = 283.0;
  double alpha = -3e-8;
  double rho_star = 1.0;
  /// Lower admissibility guard as a fraction of rho_star.
  double rho_floor = 1e-6;
};

/// Barotropic pressure law with its potential P, where P'' = p'/rho and
/// P(rho) = rho P'(rho) - p(rho).
class PressureLaw {
 public:
  using Variant = std::variant<Isentropic, IsothermalAlpha>;

  PressureLaw() : PressureLaw(Isentropic{}) {}
  PressureLaw(Isentropic law);
  PressureLaw(IsothermalAlpha law);

  const Variant& variant() const { return law_; }
  std::string name() const;

  double p(double rho) const;
  double dp(double rho) const;
  double P(double rho) const;
  double dP(double rho) const;
  double d2P(double rho) const;

  /// P(rho0 + drho) - P(rho0) without cancellation when |drho| << rho0.
  double P_difference(double rho0, double drho) const;

  /// Open admissible interval (rho_min, rho_max).
  double rho_min() const { return rho_min_; }
  double rho_max() const { return rho_max_; }
  bool admissible(double rho) const { return rho > rho_min_ && rho < rho_max_; }

 private:
  Variant law_;
  double rho_min_ = 0.0;
  double rho_max_ = std::numeric_limits<double>::infinity();
};

/// Mixed-variable constitutive relations for barotropic Euler:
/// h(rho, v) = rho v^2 / 2 + P(rho) and its partial Legendre transform in v,
/// g(rho, m) = m^2 / (2 rho) - P(rho).
class ConstitutiveLaw {
 public:
  ConstitutiveLaw() = default;
  ConstitutiveLaw(PressureLaw pressure, double lambda) : pressure_(pressure), lambda_(lambda) {}

  const PressureLaw& pressure() const { return pressure_; }
  double lambda() const { return lambda_; }

  /// Throws DomainError unless rho is admissible.
  void check(double rho) const;
  bool admissible(double rho) const { return pressure_.admissible(rho); }

  double h(double rho, double v) const;
  std::array<double, 2> grad_h(double rho, double v) const;
  /// Row-major 2x2 Hessian of h in (rho, v).
  std::array<double, 4> hess_h(double rho, double v) const;
  /// Smallest eigenvalue of the Hessian; positive iff the state is subsonic.
  double hess_h_min_eig(double rho, double v) const;

  double g(double rho, double m) const;
  /// (d g/d rho, d g/d m).
  std::array<double, 2> grad_g(double rho, double m) const;

  std::array<double, 2> z_hat(double rho, double m) const;
  std::array<double, 2> a_hat(double rho, double v) const;

  /// d2g * m - g = m^2/(2 rho) + P(rho).
  double hamiltonian_density_a(double rho, double m) const;

  /// lambda |m| / (2 D rho^2).
  double friction_r(double rho, double m, double diameter) const;

 private:
  PressureLaw pressure_;
  double lambda_ = 0.0;
};

}  // namespace phnet
