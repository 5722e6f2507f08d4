#include "phnet/boundary.hpp"

#include <algorithm>
#include <cmath>

namespace phnet {

double ramp_profile(double t, double t_star) {
  if (t < t_star) return 10.0 * t / t_star;
  if (t < 1.5 * t_star) return 10.0 * (2.0 - t / t_star);
  return 5.0;
}

double evaluate(const Signal& s, double t) {
  if (auto c = std::get_if<ConstantSignal>(&s)) return c->value;
  if (auto r = std::get_if<RampSignal>(&s)) return r->base + r->gain * ramp_profile(t, r->t_star);
  const auto& pts = std::get<TableSignal>(s).points;
  if (pts.empty()) throw Error("empty signal table");
  if (t <= pts.front().first) return pts.front().second;
  if (t >= pts.back().first) return pts.back().second;
  auto it = std::upper_bound(pts.begin(), pts.end(), t,
                             [](double x, const std::pair<double, double>& p) { return x < p.first; });
  const auto& b = *it;
  const auto& a = *(it - 1);
  if (b.first == a.first) return b.second;
  return a.second + (b.second - a.second) * (t - a.first) / (b.first - a.first);
}

std::string to_string(BCType t) {
  switch (t) {
    case BCType::Flow: return "flow";
    case BCType::Effort: return "effort";
    case BCType::Density: return "density";
    case BCType::PressureOnlyDensity: return "pressure_only_density";
  }
  return "?";
}

BCType bc_type_from_string(const std::string& s) {
  if (s == "flow") return BCType::Flow;
  if (s == "effort") return BCType::Effort;
  if (s == "density") return BCType::Density;
  if (s == "pressure_only_density") return BCType::PressureOnlyDensity;
  throw Error("unknown boundary condition type '" + s + "'");
}

ClosureRow closure_row(const BoundaryCondition& bc, const ConstitutiveLaw& law, double area, double e,
                       double f, double t) {
  const double u = evaluate(bc.signal, t);
  ClosureRow r;
  double target = u;
  switch (bc.type) {
    case BCType::Flow:
      r = {f - u, 0.0, 1.0};
      break;
    case BCType::Effort:
      r = {e - u, 1.0, 0.0};
      break;
    case BCType::Density: {
      law.check(u);
      const double s = 1.0 / (area * u);
      const double v = f * s;
      // Scale by P'(u) alone so the row stays an exact derivative in f.
      target = law.pressure().dP(u);
      r = {e - target - 0.5 * v * v, 1.0, -v * s};
      break;
    }
    case BCType::PressureOnlyDensity:
      law.check(u);
      target = law.pressure().dP(u);
      r = {e - target, 1.0, 0.0};
      break;
  }
  const double scale = 1.0 / std::max(1.0, std::abs(target));
  r.k *= scale;
  r.dk_de *= scale;
  r.dk_df *= scale;
  return r;
}

}  // namespace phnet
