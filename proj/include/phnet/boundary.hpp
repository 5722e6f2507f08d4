#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "phnet/constitutive.hpp"

namespace phnet {

/// Piecewise input u(t): 10 t/t* up to t*, back down to 5 at 1.5 t*, then 5.
double ramp_profile(double t, double t_star);

struct ConstantSignal {
  double value = 0.0;
};

/// Piecewise-linear interpolation, held constant outside the table.
struct TableSignal {
  std::vector<std::pair<double, double>> points;
};

/// base + gain * ramp_profile(t, t_star).
struct RampSignal {
  double base = 0.0;
  double gain = 1.0;
  double t_star = 3600.0;
};

using Signal = std::variant<ConstantSignal, TableSignal, RampSignal>;

double evaluate(const Signal& s, double t);

enum class BCType { Flow, Effort, Density, PressureOnlyDensity };

std::string to_string(BCType t);
/// Throws Error for an unknown name.
BCType bc_type_from_string(const std::string& s);

struct BoundaryCondition {
  BCType type = BCType::Flow;
  Signal signal = ConstantSignal{};
};

/// Value and partial derivatives of one scaled closure row k_i(e, f, u).
struct ClosureRow {
  double k = 0.0;
  double dk_de = 0.0;
  double dk_df = 0.0;
};

/// Closure k_i(e_i, f_i, u_i(t)) divided by max(1, |target|), where the
/// target is u for flow and effort rows and P'(u) for density rows. `area` is the cross-section of
/// the edge attached to the boundary node.
///   flow:     f - u
///   effort:   e - u
///   density:  e - P'(u) - (f / (A u))^2 / 2
///   pressure_only_density: e - P'(u)
ClosureRow closure_row(const BoundaryCondition& bc, const ConstitutiveLaw& law, double area, double e,
                       double f, double t);

}  // namespace phnet
