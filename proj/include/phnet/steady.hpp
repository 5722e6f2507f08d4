#pragma once

#include <string>

#include "phnet/timestepper.hpp"

namespace phnet {

enum class SteadyStrategy { Newton, PseudoTransient, Homotopy, Failed };
std::string to_string(SteadyStrategy s);

struct SteadyOptions {
  NewtonSettings newton;
  /// First pseudo time step; <= 0 picks one from the mesh and sound speed.
  double ptc_dt0 = 0.0;
  int ptc_max_steps = 400;
  int homotopy_stages = 10;
};

struct SteadyResult {
  State state;
  Vec f;
  bool converged = false;
  SteadyStrategy strategy = SteadyStrategy::Failed;
  NewtonStats stats;
  int pseudo_steps = 0;
  /// With all-flow data the density level is fixed by a total-mass anchor;
  /// sigma is the mass source needed for balance (zero for consistent data).
  bool mass_anchor = false;
  double mass_source = 0.0;
  double residual = 0.0;  ///< final steady residual norm
};

/// Representative constant density for a steady guess: mean of prescribed
/// densities, else inverted efforts, else `fallback`.
double reference_density(const DiscreteOperators& ops, const std::vector<BoundaryCondition>& bcs, double t,
                         double fallback);

/// rho = rho0, m = 0, e = P'(rho0).
State flat_state(const DiscreteOperators& ops, double rho0);

/// Steady residual [J a2 + sigma w1; c1 + K2 e - R a2; k; anchor] without the
/// time-derivative blocks.
class SteadyProblem {
 public:
  SteadyProblem(const TimeStepper& stepper, double t, bool anchor, double mass_target);
  std::size_t size() const;
  Vec pack(const State& s, double sigma = 0.0) const;
  State unpack(const Vec& x) const;
  double sigma(const Vec& x) const { return anchor_ ? x[x.size() - 1] : 0.0; }
  bool eval(const Vec& x, Vec& F, SpMat* J) const;
  bool converged(const Vec& F, double tol) const;
  double norm(const State& s) const;

 private:
  const TimeStepper& st_;
  double t_;
  bool anchor_;
  double mass_target_;
};

/// Steady state for the boundary data at time t, starting from `guess`.
SteadyResult solve_steady(const DiscreteOperators& ops, const std::vector<BoundaryCondition>& bcs, double t,
                          const State& guess, const SteadyOptions& opts = {});
/// Convenience overload with a shared operator handle.
SteadyResult solve_steady(std::shared_ptr<const DiscreteOperators> ops, const std::vector<BoundaryCondition>& bcs,
                          double t, const State& guess, const SteadyOptions& opts = {});

}  // namespace phnet
