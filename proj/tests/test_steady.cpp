#include <doctest.h>

#include <cmath>
#include <memory>

#include "phnet/benchmarks.hpp"
#include "phnet/scenario.hpp"

using namespace phnet;

namespace {

// Pipe of length 10, diameter 1, density u0 at the tail and a draw at the head.
Scenario friction_pipe(double u0, double draw, double lambda, int ne = 200) {
  Scenario sc = dam_break_scenario(10.0 / ne, 0, 0.01);
  Edge e = sc.network.edge(0);
  e.diameter = 1.0;
  e.area = circular_area(1.0);
  e.num_elements = ne;
  sc.network = NetworkTopology(sc.network.nodes(), {e});
  sc.lambda = lambda;
  sc.bcs["left"] = {BCType::Density, ConstantSignal{u0}};
  sc.bcs["right"] = {BCType::Flow, ConstantSignal{-draw}};
  return sc;
}

// Stationary profile: (P''(rho) - m^2/rho^3) rho' = -lambda |m| m / (2 D rho^2), rho(0) = u0.
double rk4_profile(const PressureLaw& law, double lambda, double D, double m, double u0, double x) {
  auto rhs = [&](double rho) {
    return -lambda * std::abs(m) * m / (2.0 * D * rho * rho) / (law.d2P(rho) - m * m / (rho * rho * rho));
  };
  const int n = 20000;
  const double h = x / n;
  double r = u0;
  for (int i = 0; i < n; ++i) {
    const double k1 = rhs(r), k2 = rhs(r + 0.5 * h * k1), k3 = rhs(r + 0.5 * h * k2), k4 = rhs(r + h * k3);
    r += h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0;
  }
  return r;
}

}  // namespace

TEST_SUITE("steady") {

TEST_CASE("friction-driven profile matches the stationary ODE") {
  const double u0 = 2.0, draw = 0.1, lambda = 0.5;
  const Scenario sc = friction_pipe(u0, draw, lambda);
  const Model model = build_model(sc);
  const SteadyResult r = solve_steady(model.ops, model.bcs, 0.0, flat_state(*model.ops, u0));
  REQUIRE(r.converged);
  CHECK(r.strategy == SteadyStrategy::Newton);
  CHECK_FALSE(r.mass_anchor);
  const double A = circular_area(1.0), m = draw / A;
  const SpacePair& sp = *model.space;
  for (double x : {0.025, 2.525, 5.025, 9.975}) {
    CHECK(sp.eval_v2(r.state.a2, {0, x}) == doctest::Approx(m).epsilon(1e-10));
    const double exact = rk4_profile(sc.pressure, lambda, 1.0, m, u0, x);
    CHECK(std::abs(sp.eval_v1(r.state.a1, {0, x}) - exact) <= 1e-5 * u0);
  }
  CHECK(sp.eval_v1(r.state.a1, {0, 9.975}) < sp.eval_v1(r.state.a1, {0, 0.025}));
  CHECK(r.f[1] == doctest::Approx(-draw));
}

TEST_CASE("steady state is a fixed point of the time step") {
  // Strong friction keeps the through-flow between n1 and n4 subsonic.
  Scenario sc = y_network_scenario();
  sc.lambda = 2.0;
  sc.bcs["n1"] = {BCType::Density, ConstantSignal{1.05}};
  const Model model = build_model(sc);
  const SteadyResult r = solve_steady(model.ops, model.bcs, 2.0, flat_state(*model.ops, 1.0));
  REQUIRE(r.converged);
  const TimeStepper st(model.ops, model.bcs, sc.newton);
  const TimeStepper::Result next = st.step(r.state, 2.0, sc.dt);
  REQUIRE(next.stats.converged);
  CHECK((next.state.a1 - r.state.a1).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK((next.state.a2 - r.state.a2).cwiseAbs().maxCoeff() <= 1e-9);
  const StepDiagnostics d = record_state(*model.ops, r.state.a1, r.state.a2, 2.0);
  CHECK(d.junction_flux <= 1e-12);
  // Withdrawal at n3 is supplied through the density and pressure ports.
  CHECK(std::abs(r.f.sum()) <= 1e-10);
}

TEST_CASE("closed network keeps the mass of the guess") {
  Scenario sc = equilibrium_scenario();
  const Model model = build_model(sc);
  const State guess = flat_state(*model.ops, 1.7);
  const SteadyResult r = solve_steady(model.ops, model.bcs, 0.0, guess);
  REQUIRE(r.converged);
  CHECK(r.mass_anchor);
  CHECK(std::abs(r.mass_source) <= 1e-12);
  CHECK(model.ops->mass(r.state.a1) == doctest::Approx(model.ops->mass(guess.a1)));
  CHECK(r.state.a2.cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("inconsistent all-flow data needs a mass source") {
  Scenario sc = equilibrium_scenario();
  sc.bcs["n1"] = {BCType::Flow, ConstantSignal{0.02}};
  const Model model = build_model(sc);
  const SteadyResult r = solve_steady(model.ops, model.bcs, 0.0, flat_state(*model.ops, 1.5));
  REQUIRE(r.converged);
  double volume = 0.0;
  for (const auto& e : sc.network.edges()) volume += e.area * e.length;
  CHECK(r.mass_source == doctest::Approx(-0.02 / volume).epsilon(1e-8));
}

TEST_CASE("reference density and flat state") {
  const Scenario sc = y_network_scenario();
  const Model model = build_model(sc);
  CHECK(reference_density(*model.ops, model.bcs, 0.0, 9.0) == doctest::Approx(1.0));
  CHECK(reference_density(*model.ops, model.bcs, 1.0, 9.0) == doctest::Approx(0.5 * (1.2 + 1.0)));
  const Model closed = build_model(equilibrium_scenario());
  CHECK(reference_density(*closed.ops, closed.bcs, 0.0, 9.0) == 9.0);
  const State s = flat_state(*model.ops, 1.3);
  CHECK(s.a2.norm() == 0.0);
  CHECK(s.e[0] == doctest::Approx(1.3));
}

TEST_CASE("gas network steady initialization converges") {
  const Scenario sc = pipeline_scenario(0.01);
  const Model model = build_model(sc);
  const InitialData init = initial_state(model, sc);
  REQUIRE(init.steady.has_value());
  CHECK(init.steady->converged);
  CHECK(init.steady->strategy != SteadyStrategy::Failed);
  const StepDiagnostics d = record_state(*model.ops, init.state.a1, init.state.a2, 0.0);
  CHECK(d.junction_flux <= 1e-12);
  CHECK(d.spd_violations == 0);
}

TEST_CASE("strategy names") {
  CHECK(to_string(SteadyStrategy::Newton) == "newton");
  CHECK(to_string(SteadyStrategy::PseudoTransient) == "pseudo_transient");
  CHECK(to_string(SteadyStrategy::Homotopy) == "homotopy");
}

}
