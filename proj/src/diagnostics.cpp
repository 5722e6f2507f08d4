#include "phnet/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "phnet/quadrature.hpp"

namespace phnet {

const std::vector<std::string>& diagnostics_columns() {
  static const std::vector<std::string> cols{"t",
                                             "mass",
                                             "hamiltonian",
                                             "boundary_power",
                                             "friction_dissipation",
                                             "dissipation_slack",
                                             "mass_residual",
                                             "local_residual",
                                             "newton_iters"};
  return cols;
}

double junction_flux_residual(const SpacePair& sp, const Vec& a2) {
  const Vec b = sp.T() * a2;
  const auto& topo = sp.topology();
  double worst = 0.0;
  for (std::size_t nu : topo.interior_nodes()) {
    double s = 0.0;
    for (const auto& inc : topo.adjacent_edges(nu)) s += inc.weight * b[sp.edge_end_dof(inc.edge, inc.sign > 0 ? 0 : 1)];
    worst = std::max(worst, std::abs(s));
  }
  return worst;
}

StepDiagnostics record_state(const DiscreteOperators& ops, const Vec& a1, const Vec& a2, double t) {
  StepDiagnostics d;
  d.t = t;
  d.mass = ops.mass(a1);
  d.hamiltonian = ops.H_c(a1, a2);
  d.state_norm = std::sqrt(a1.squaredNorm() + a2.squaredNorm());
  const PointStates st = ops.point_states(a1, a2);
  d.rho_min = st.rho.minCoeff();
  d.rho_max = st.rho.maxCoeff();
  for (long i = 0; i < st.rho.size(); ++i)
    if (!(ops.law().hess_h_min_eig(st.rho[i], st.m[i] / st.rho[i]) > 0.0)) ++d.spd_violations;
  d.junction_flux = junction_flux_residual(ops.space(), a2);
  return d;
}

StepDiagnostics record(const DiscreteOperators& ops, const SpMat& D, const Vec& a1_prev, const Vec& a2_prev,
                       const Vec& a1, const Vec& a2, const Vec& e, const Vec& f, double dt, double t,
                       int newton_iters) {
  StepDiagnostics d = record_state(ops, a1, a2, t);
  d.boundary_power = e.dot(f);
  d.friction_dissipation = a2.dot(ops.R_apply(a1, a2, a2));
  d.dissipation_slack = ops.H_drop(a1_prev, a2_prev, a1, a2) + dt * (d.boundary_power - d.friction_dissipation);
  const Vec da1 = a1 - a1_prev;
  d.mass_residual = std::abs(ops.mass(da1) - dt * f.sum());
  d.local_residual = (da1 / dt + D * a2).cwiseAbs().maxCoeff();
  d.newton_iters = newton_iters;
  return d;
}

namespace {

template <class RefFn>
double l2_error_impl(const SpacePair& sp, const Vec& u, const RefFn& ref, const std::vector<double>& ref_breaks,
                     const Subdomain& sub) {
  const auto& topo = sp.topology();
  if (sub.edge >= topo.num_edges()) throw Error("subdomain on unknown edge");
  const double len = topo.edge(sub.edge).length;
  if (sub.x0 < -1e-12 * len || sub.x1 > len * (1 + 1e-12) || !(sub.x1 > sub.x0))
    throw Error("subdomain off the network");
  std::set<double> cuts{sub.x0, sub.x1};
  for (std::size_t e = sp.edge_first_element(sub.edge); e < sp.edge_first_element(sub.edge + 1); ++e) {
    const Element& el = sp.elements()[e];
    for (double x : {el.x0, el.x1})
      if (x > sub.x0 && x < sub.x1) cuts.insert(x);
  }
  for (double x : ref_breaks)
    if (x > sub.x0 && x < sub.x1) cuts.insert(x);
  const Rule1D rule = gauss_legendre(std::max(5, 2 * sp.q() + 3));
  const double area = topo.edge(sub.edge).area;
  double s = 0.0;
  double prev = *cuts.begin();
  for (auto it = std::next(cuts.begin()); it != cuts.end(); ++it) {
    const double a = prev, b = *it;
    prev = b;
    if (b - a <= 1e-14 * len) continue;
    for (std::size_t g = 0; g < rule.size(); ++g) {
      const double x = a + 0.5 * (rule.x[g] + 1.0) * (b - a);
      const double diff = sp.eval_v1(u, {sub.edge, x}) - ref(x);
      s += 0.5 * (b - a) * rule.w[g] * area * diff * diff;
    }
  }
  return std::sqrt(s);
}

}  // namespace

double l2_error(const SpacePair& sp, const Vec& u, const SpacePair& ref_sp, const Vec& ref, const Subdomain& sub) {
  if (ref_sp.topology().num_edges() != sp.topology().num_edges()) throw Error("reference mesh on a different network");
  std::vector<double> breaks;
  for (std::size_t e = ref_sp.edge_first_element(sub.edge); e < ref_sp.edge_first_element(sub.edge + 1); ++e)
    breaks.push_back(ref_sp.elements()[e].x0);
  return l2_error_impl(sp, u, [&](double x) { return ref_sp.eval_v1(ref, {sub.edge, x}); }, breaks, sub);
}

double l2_error(const SpacePair& sp, const Vec& u, const std::function<double(std::size_t, double)>& ref,
                const Subdomain& sub) {
  return l2_error_impl(sp, u, [&](double x) { return ref(sub.edge, x); }, {}, sub);
}

double convergence_order(const std::vector<std::pair<double, double>>& dx_err) {
  if (dx_err.size() < 2) throw Error("convergence_order needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [dx, err] : dx_err) {
    if (!(dx > 0.0) || !(err > 0.0)) throw Error("convergence_order needs positive data");
    const double x = std::log(dx), y = std::log(err);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(dx_err.size());
  const double den = n * sxx - sx * sx;
  if (std::abs(den) < 1e-300) throw Error("convergence_order needs distinct mesh sizes");
  return (n * sxy - sx * sy) / den;
}

}  // namespace phnet
