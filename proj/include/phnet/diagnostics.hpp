#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "phnet/assembly.hpp"

namespace phnet {

struct StepDiagnostics {
  double t = 0.0;
  double mass = 0.0;
  double hamiltonian = 0.0;
  double boundary_power = 0.0;        ///< e . f
  double friction_dissipation = 0.0;  ///< a2^T R(a) a2
  /// H(a^{k-1}) - H(a^k) + dt (e.f - a2^T R a2); nonnegative up to solver tolerance.
  double dissipation_slack = 0.0;
  double mass_residual = 0.0;   ///< |M(a^k) - M(a^{k-1}) - dt sum f|
  double local_residual = 0.0;  ///< max |(a1^k - a1^{k-1})/dt + D a2^k|
  int newton_iters = 0;

  // Not part of the CSV layout.
  double state_norm = 0.0;       ///< ||a^k||_2
  double rho_min = 0.0, rho_max = 0.0;  ///< over reduced quadrature points
  double junction_flux = 0.0;    ///< max signed mass-flux sum at interior nodes
  int spd_violations = 0;        ///< points where the Hessian of h is not positive definite
  double newton_residual = 0.0;
};

/// CSV column names, in order.
const std::vector<std::string>& diagnostics_columns();

/// Per-step certificate. `D` is the broken-derivative matrix of the space.
StepDiagnostics record(const DiscreteOperators& ops, const SpMat& D, const Vec& a1_prev, const Vec& a2_prev,
                       const Vec& a1, const Vec& a2, const Vec& e, const Vec& f, double dt, double t,
                       int newton_iters);

/// Diagnostics of a single state (no step): mass, H, extremes, junction flux.
StepDiagnostics record_state(const DiscreteOperators& ops, const Vec& a1, const Vec& a2, double t);

/// Max over interior nodes of |sum_w n^w[nu] m|_w[nu]|.
double junction_flux_residual(const SpacePair& sp, const Vec& a2);

/// Restriction of the error integral to part of one edge: [x0, x1).
struct Subdomain {
  std::size_t edge = 0;
  double x0 = 0.0, x1 = 0.0;
};

/// Area-weighted L2 norm of u - ref over the subdomain. `u` and `ref` are
/// evaluated on their own meshes; the integration respects both meshes'
/// breakpoints and uses max(5, 2q+3) Gauss points per piece.
double l2_error(const SpacePair& sp, const Vec& u, const SpacePair& ref_sp, const Vec& ref,
                const Subdomain& sub);
/// Same, against a callable reference ref(edge, x).
double l2_error(const SpacePair& sp, const Vec& u, const std::function<double(std::size_t, double)>& ref,
                const Subdomain& sub);

/// Least-squares slope of log(err) against log(dx). Throws Error for fewer
/// than two points or non-positive data.
double convergence_order(const std::vector<std::pair<double, double>>& dx_err);

}  // namespace phnet
