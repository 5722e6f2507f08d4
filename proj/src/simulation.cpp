#include <algorithm>
#include <chrono>
#include <cmath>
#include <atomic>
#include <exception>
#include <sstream>
#include <thread>

#include "phnet/scenario.hpp"

namespace phnet {

double evaluate(const FieldTable& table, double x) {
  const auto& pts = table.points;
  if (pts.empty()) throw Error("empty field table");
  if (x <= pts.front().first) return pts.front().second;
  if (x >= pts.back().first) return pts.back().second;
  auto it = std::upper_bound(pts.begin(), pts.end(), x,
                             [](double v, const std::pair<double, double>& p) { return v < p.first; });
  const auto& b = *it;
  const auto& a = *(it - 1);
  if (b.first == a.first) return b.second;
  return a.second + (b.second - a.second) * (x - a.first) / (b.first - a.first);
}

int Scenario::num_steps() const {
  if (!(dt > 0.0)) throw Error("time step must be positive");
  if (!(t_end > 0.0)) throw Error("end time must be positive");
  const double K = t_end / dt;
  const double Kr = std::round(K);
  if (Kr < 1 || std::abs(K - Kr) > 1e-9 * std::max(1.0, K)) {
    std::ostringstream os;
    os << "end time " << t_end << " is not an integer multiple of dt = " << dt;
    throw Error(os.str());
  }
  return static_cast<int>(Kr);
}

void validate(const Scenario& sc) {
  require_valid(sc.network);
  sc.num_steps();
  for (std::size_t nu : sc.network.boundary_nodes()) {
    const auto& id = sc.network.node(nu).id;
    if (!sc.bcs.count(id)) throw Error("no boundary condition for boundary node '" + id + "'");
  }
  for (const auto& [id, bc] : sc.bcs) {
    auto idx = sc.network.find_node(id);
    if (!idx || sc.network.node(*idx).kind != NodeKind::Boundary)
      throw Error("boundary condition on '" + id + "', which is not a boundary node");
  }
  if (sc.output.cadence < 1) throw Error("output cadence must be at least 1");
}

Model build_model(const Scenario& sc, std::optional<double> dx_override) {
  validate(sc);
  Model m;
  NetworkTopology topo = sc.network;
  if (dx_override) topo = with_dx_cap(topo, *dx_override);
  else if (sc.dx_max) topo = with_dx_cap(topo, *sc.dx_max);
  m.space = std::make_shared<const SpacePair>(topo, uniform_partition(topo), sc.q, sc.v2_degree);
  m.ops = std::make_shared<const DiscreteOperators>(m.space, sc.law(), sc.quadrature);
  for (std::size_t nu : topo.boundary_nodes()) m.bcs.push_back(sc.bcs.at(topo.node(nu).id));
  return m;
}

Vec boundary_efforts(const DiscreteOperators& ops, const Vec& a1, const Vec& a2) {
  const auto& sp = ops.space();
  const auto& topo = sp.topology();
  Vec e(topo.num_ports());
  for (std::size_t i = 0; i < topo.num_ports(); ++i) {
    const auto& inc = topo.boundary_edge(i);
    const EdgePoint pt{inc.edge, inc.sign > 0 ? 0.0 : topo.edge(inc.edge).length};
    const double rho = sp.eval_v1(a1, pt), m = sp.eval_v2(a2, pt);
    ops.law().check(rho);
    e[i] = ops.law().pressure().dP(rho) + 0.5 * (m / rho) * (m / rho);
  }
  return e;
}

InitialData initial_state(const Model& model, const Scenario& sc) {
  const DiscreteOperators& ops = *model.ops;
  const SpacePair& sp = *model.space;
  const auto& topo = sp.topology();
  InitialData d;
  if (sc.initial.kind == InitialCondition::Kind::Fields) {
    auto field = [&](const std::map<std::string, FieldTable>& tables, double dflt) {
      return [&, dflt](std::size_t edge, double x) {
        auto it = tables.find(topo.edge(edge).id);
        return it == tables.end() ? dflt : evaluate(it->second, x);
      };
    };
    d.state.a1 = sp.project_v1(field(sc.initial.rho, sc.initial.rho_default));
    d.state.a2 = sp.interpolate_v2(field(sc.initial.m, sc.initial.m_default));
    ops.point_states(d.state.a1, d.state.a2);  // admissibility
    d.state.e = boundary_efforts(ops, d.state.a1, d.state.a2);
    return d;
  }
  const double fallback = sc.initial.steady_rho_guess.value_or(sc.initial.rho_default);
  const double rho0 = reference_density(ops, model.bcs, 0.0, fallback);
  SteadyOptions so;
  so.newton = sc.newton;
  so.newton.max_iter = std::max(sc.newton.max_iter, 50);
  so.ptc_dt0 = sc.dt;
  d.steady = solve_steady(model.ops, model.bcs, 0.0, flat_state(ops, rho0), so);
  if (!d.steady->converged) throw StepFailure(0.0, "steady initialization did not converge: " + d.steady->stats.message);
  d.state = d.steady->state;
  return d;
}

std::vector<EdgePoint> probe_points(const SpacePair& sp, const std::vector<Probe>& probes) {
  std::vector<EdgePoint> out;
  for (const auto& p : probes) {
    const std::size_t e = sp.topology().edge_index(p.edge);
    if (p.x < 0.0 || p.x > sp.topology().edge(e).length)
      throw Error("probe at x = " + std::to_string(p.x) + " lies off edge '" + p.edge + "'");
    out.push_back({e, p.x});
  }
  return out;
}

Trajectory simulate(const Model& model, const Scenario& sc, const SimulateOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const DiscreteOperators& ops = *model.ops;
  const SpMat D = model.space->derivative_matrix();
  const TimeStepper stepper(model.ops, model.bcs, sc.newton);
  const int K = sc.num_steps();
  const double dt = sc.dt;

  Trajectory tr;
  InitialData init = initial_state(model, sc);
  tr.steady = init.steady;
  State s = init.state;
  Vec f = ops.K2().transpose() * s.a2;
  tr.initial = record_state(ops, s.a1, s.a2, 0.0);
  tr.max_abs_rho = std::max(std::abs(tr.initial.rho_min), std::abs(tr.initial.rho_max));
  if (opts.keep_states) {
    tr.times.push_back(0.0);
    tr.states.push_back(s);
    tr.flows.push_back(f);
  }
  if (opts.observer) opts.observer({0, 0.0, &s, &f, &tr.initial});
  tr.diagnostics.reserve(K);

  for (int k = 1; k <= K; ++k) {
    const double t = k * dt;
    TimeStepper::Result r;
    try {
      r = stepper.step(s, t, dt);
    } catch (const DomainError& ex) {
      throw StepFailure(t, ex.what());
    }
    if (!r.stats.converged) {
      std::ostringstream os;
      os.precision(17);
      os << "Newton did not converge at t = " << t << " (" << r.stats.message << ", residual "
         << r.stats.residual << ")";
      throw StepFailure(t, os.str());
    }
    StepDiagnostics d;
    try {
      d = record(ops, D, s.a1, s.a2, r.state.a1, r.state.a2, r.state.e, r.f, dt, t, r.stats.iterations);
    } catch (const DomainError& ex) {
      throw StepFailure(t, ex.what());
    }
    d.newton_residual = r.stats.residual;
    tr.max_abs_rho = std::max({tr.max_abs_rho, std::abs(d.rho_min), std::abs(d.rho_max)});
    tr.max_newton_iters = std::max(tr.max_newton_iters, d.newton_iters);
    s = std::move(r.state);
    f = std::move(r.f);
    tr.diagnostics.push_back(d);
    if (opts.keep_states && (k % sc.output.cadence == 0 || k == K)) {
      tr.times.push_back(t);
      tr.states.push_back(s);
      tr.flows.push_back(f);
    }
    if (opts.observer) opts.observer({k, t, &s, &f, &tr.diagnostics.back()});
  }
  tr.final_state = s;
  tr.final_flow = f;
  tr.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return tr;
}

Trajectory simulate(const Scenario& sc, const SimulateOptions& opts) {
  return simulate(build_model(sc), sc, opts);
}

ConvergenceResult convergence_study(const Scenario& sc, const std::vector<double>& dxs, double ref_dx,
                                    const std::string& edge, double x0, double x1, unsigned threads) {
  if (dxs.size() < 2) throw Error("convergence study needs at least two mesh sizes");
  std::vector<double> caps = dxs;
  caps.push_back(ref_dx);
  const std::size_t n = caps.size();
  std::vector<Model> models(n);
  std::vector<Vec> finals(n);
  for (std::size_t i = 0; i < n; ++i) models[i] = build_model(sc, caps[i]);

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  auto worker = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        SimulateOptions opts;
        opts.keep_states = false;
        finals[i] = simulate(models[i], sc, opts).final_state.a1;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, n);
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  const std::size_t ei = models.back().space->topology().edge_index(edge);
  const Subdomain sub{ei, x0, x1};
  ConvergenceResult r;
  r.ref_dx = ref_dx;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    ConvergenceRow row;
    row.dx = caps[i];
    row.num_elements = models[i].space->num_elements();
    row.error = l2_error(*models[i].space, finals[i], *models.back().space, finals.back(), sub);
    r.rows.push_back(row);
    pts.emplace_back(row.dx, row.error);
  }
  std::vector<ConvergenceRow> sorted = r.rows;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.dx > b.dx; });
  r.strictly_decreasing = true;
  for (std::size_t i = 1; i < sorted.size(); ++i)
    r.strictly_decreasing = r.strictly_decreasing && sorted[i].error < sorted[i - 1].error;
  r.order = convergence_order(pts);
  return r;
}

}  // namespace phnet
