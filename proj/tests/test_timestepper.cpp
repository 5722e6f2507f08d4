#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "phnet/benchmarks.hpp"
#include "phnet/checks.hpp"
#include "phnet/scenario.hpp"

using namespace phnet;

namespace {

double max_abs(const Mat& A) { return A.size() ? A.cwiseAbs().maxCoeff() : 0.0; }

// Single closed pipe with a smooth asymmetric initial state.
Scenario smooth_pipe(bool mirrored) {
  Scenario sc = dam_break_scenario(0.1, 1, 0.01);
  sc.name = "smooth";
  sc.t_end = 0.5;
  sc.initial.rho.clear();
  sc.initial.m.clear();
  std::vector<std::pair<double, double>> rho, m;
  for (int i = 0; i <= 100; ++i) {
    const double x = 0.1 * i, y = mirrored ? 10.0 - x : x;
    rho.push_back({x, 1.0 + 0.3 * std::exp(-std::pow(y - 3.0, 2))});
    m.push_back({x, (mirrored ? -1.0 : 1.0) * 0.2 * std::sin(M_PI * y / 10.0) * (1.0 + 0.1 * y)});
  }
  sc.initial.rho["w1"] = FieldTable{rho};
  sc.initial.m["w1"] = FieldTable{m};
  return sc;
}

}  // namespace

TEST_SUITE("timestepper") {

TEST_CASE("equilibrium is preserved") {
  const Scenario sc = equilibrium_scenario();
  const Model model = build_model(sc);
  const Trajectory tr = simulate(model, sc);
  REQUIRE(tr.diagnostics.size() == 100);
  const State& s = tr.final_state;
  CHECK((s.a1 - tr.states.front().a1).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(s.a2.cwiseAbs().maxCoeff() <= 1e-12);
  for (long i = 0; i < s.e.size(); ++i) CHECK(s.e[i] == doctest::Approx(1.5));  // P'(1.5) = 2 c rho
  CHECK(tr.max_newton_iters <= 2);
  for (const auto& d : tr.diagnostics) {
    CHECK(std::abs(d.dissipation_slack) <= 1e-12);
    CHECK(d.mass_residual <= 1e-13);
  }
}

TEST_CASE("mass balance with driven ports") {
  const Scenario sc = y_network_scenario();
  Scenario shortened = sc;
  shortened.t_end = 0.5;
  const Trajectory tr = simulate(shortened);
  double mass = tr.initial.mass;
  for (const auto& d : tr.diagnostics) {
    CHECK(d.mass_residual <= 1e-10 * (1.0 + std::abs(d.mass)));
    CHECK(d.local_residual <= 1e-9);
    CHECK(d.junction_flux <= 1e-12);
    CHECK(d.dissipation_slack >= -1e-10 * (1.0 + d.state_norm));
    mass = d.mass;
  }
  CHECK(mass != tr.initial.mass);
}

TEST_CASE("mirrored problem gives the mirrored solution") {
  const Trajectory a = simulate(smooth_pipe(false));
  const Trajectory b = simulate(smooth_pipe(true));
  const Model ma = build_model(smooth_pipe(false));
  const SpacePair& sp = *ma.space;
  double err_rho = 0.0, err_m = 0.0;
  for (double x = 0.05; x < 10.0; x += 0.1) {
    err_rho = std::max(err_rho, std::abs(sp.eval_v1(a.final_state.a1, {0, x}) - sp.eval_v1(b.final_state.a1, {0, 10.0 - x})));
    err_m = std::max(err_m, std::abs(sp.eval_v2(a.final_state.a2, {0, x}) + sp.eval_v2(b.final_state.a2, {0, 10.0 - x})));
  }
  CHECK(err_rho <= 1e-10);
  CHECK(err_m <= 1e-10);
}

TEST_CASE("reversing an edge flips its flux and nothing else") {
  Scenario sc = y_network_scenario();
  sc.t_end = 0.25;
  Scenario rev = sc;
  const std::size_t w2 = sc.network.edge_index("w2");
  rev.network = sc.network.with_reversed_edge(w2);
  const Trajectory a = simulate(sc);
  const Trajectory b = simulate(rev);
  const Model ma = build_model(sc), mb = build_model(rev);
  double err = 0.0;
  for (std::size_t k = 0; k < sc.network.num_edges(); ++k) {
    const double L = sc.network.edge(k).length;
    for (double s : {0.0, 0.13, 0.52, 0.91, 1.0}) {
      const double x = s * L, xr = k == w2 ? L - x : x;
      const double sign = k == w2 ? -1.0 : 1.0;
      err = std::max(err, std::abs(ma.space->eval_v1(a.final_state.a1, {k, std::min(x, L)}) -
                                   mb.space->eval_v1(b.final_state.a1, {k, std::min(xr, L)})));
      err = std::max(err, std::abs(ma.space->eval_v2(a.final_state.a2, {k, x}) -
                                   sign * mb.space->eval_v2(b.final_state.a2, {k, xr})));
    }
  }
  CHECK(err <= 1e-9);
  CHECK((a.final_flow - b.final_flow).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("Newton Jacobian matches finite differences") {
  for (const Scenario& sc : {y_network_scenario(), dam_break_scenario(0.5, 1, 0.01)}) {
    const Model model = build_model(sc);
    const TimeStepper st(model.ops, model.bcs, sc.newton);
    CheckSettings cs;
    cs.fd_columns = 200;
    const CheckReport r = stepper_checks(st, 1.5, 0.3, sc.dt, cs);
    for (const auto& item : r.items) CHECK_MESSAGE(item.passed, item.name, " ", item.value);
  }
}

TEST_CASE("full and reduced residuals agree") {
  const Scenario sc = y_network_scenario();
  const Model model = build_model(sc);
  const TimeStepper st(model.ops, model.bcs, sc.newton);
  std::mt19937_64 rng(12);
  const State prev = random_state(*model.ops, 1.1, 0.2, rng);
  State x = random_state(*model.ops, 1.1, 0.2, rng);
  x.e = Vec::Constant(model.ops->num_ports(), 1.0);
  const double dt = 0.005;
  x.a1 = st.a1_from(prev.a1, x.a2, dt);
  Vec y(x.a2.size() + x.e.size());
  y << x.a2, x.e;
  const Vec full = st.full_residual(prev, x, 0.1, dt);
  const Vec red = st.reduced_residual(prev, y, 0.1, dt);
  const std::size_t n1 = model.ops->n1();
  CHECK(full.head(n1).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((full.tail(red.size()) - red).cwiseAbs().maxCoeff() <= 1e-12);
  const Mat J(st.full_jacobian(prev, x, 0.1, dt));
  const long n = J.rows();
  Vec xv(n);
  xv << x.a1, x.a2, x.e;
  Mat fd(n, n);
  for (long j = 0; j < n; ++j) {
    State p = x, m = x;
    const double h = 1e-6;
    auto bump = [&](State& s, double d) {
      if (j < static_cast<long>(n1)) s.a1[j] += d;
      else if (j < static_cast<long>(n1 + x.a2.size())) s.a2[j - n1] += d;
      else s.e[j - n1 - x.a2.size()] += d;
    };
    bump(p, h);
    bump(m, -h);
    fd.col(j) = (st.full_residual(prev, p, 0.1, dt) - st.full_residual(prev, m, 0.1, dt)) / (2 * h);
  }
  CHECK(max_abs(fd - J) <= 1e-6 * (1.0 + max_abs(J)));
}

TEST_CASE("a step satisfies the discrete equations it solves") {
  const Scenario sc = dam_break_scenario(0.25, 0, 0.01);
  const Model model = build_model(sc);
  const TimeStepper st(model.ops, model.bcs, sc.newton);
  const State s0 = initial_state(model, sc).state;
  const TimeStepper::Result r = st.step(s0, sc.dt, sc.dt);
  REQUIRE(r.stats.converged);
  const Vec F = st.full_residual(s0, r.state, sc.dt, sc.dt);
  CHECK(F.cwiseAbs().maxCoeff() <= 1e-9);
  CHECK((r.f - model.ops->K2().transpose() * r.state.a2).norm() <= 1e-14);
}

TEST_CASE("non-convergence becomes a StepFailure with its time") {
  Scenario sc = dam_break_scenario(0.25, 0, 0.5);
  sc.t_end = 2.0;
  sc.newton.max_iter = 1;
  sc.newton.abs_tol = 1e-14;
  try {
    simulate(sc);
    FAIL("expected StepFailure");
  } catch (const StepFailure& e) {
    CHECK(e.t_k == doctest::Approx(0.5));
  }
}

TEST_CASE("block stacking") {
  SpMat A(1, 1), D(1, 1);
  A.insert(0, 0) = 2.0;
  D.insert(0, 0) = 3.0;
  const Mat M(block2x2(A, SpMat(1, 1), SpMat(1, 1), D));
  CHECK(M(0, 0) == 2.0);
  CHECK(M(1, 1) == 3.0);
  CHECK(M(0, 1) == 0.0);
  const Mat N(block2x2(A, SpMat(1, 0), SpMat(0, 1), SpMat(0, 0)));
  CHECK(N.rows() == 1);
  CHECK(N.cols() == 1);
}

TEST_CASE("all-flow detection") {
  CHECK(all_flow({{BCType::Flow, ConstantSignal{}}, {BCType::Flow, ConstantSignal{1.0}}}));
  CHECK_FALSE(all_flow({{BCType::Flow, ConstantSignal{}}, {BCType::Density, ConstantSignal{1.0}}}));
}

}
