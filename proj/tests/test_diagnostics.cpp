#include <doctest.h>

#include <cmath>
#include <memory>

#include "phnet/benchmarks.hpp"
#include "phnet/scenario.hpp"

using namespace phnet;

namespace {

SpacePair unit_space(int ne, int q = 0) {
  Scenario sc = dam_break_scenario(1.0, q);
  Edge e = sc.network.edge(0);
  e.length = 1.0;
  e.num_elements = ne;
  const NetworkTopology t(sc.network.nodes(), {e});
  return SpacePair(t, uniform_partition(t), q);
}

}  // namespace

TEST_SUITE("diagnostics") {

TEST_CASE("projection error of x on ten cells") {
  const SpacePair sp = unit_space(10);
  const Vec u = sp.project_v1([](std::size_t, double x) { return x; });
  const double err = l2_error(sp, u, [](std::size_t, double x) { return x; }, {0, 0.0, 1.0});
  CHECK(err == doctest::Approx(1.0 / (20.0 * std::sqrt(3.0))).epsilon(1e-12));
  CHECK(l2_error(sp, u, sp, u, {0, 0.0, 1.0}) == 0.0);
}

TEST_CASE("error between two meshes respects both partitions") {
  const SpacePair coarse = unit_space(3), fine = unit_space(7);
  auto f = [](std::size_t, double x) { return std::sin(3.0 * x); };
  const Vec uc = coarse.project_v1(f), uf = fine.project_v1(f);
  // Reference: integrate the difference of the two step functions on a very fine grid.
  double s = 0.0;
  const int n = 21 * 2000;
  for (int i = 0; i < n; ++i) {
    const double x = (i + 0.5) / n;
    const double d = coarse.eval_v1(uc, {0, x}) - fine.eval_v1(uf, {0, x});
    s += d * d / n;
  }
  CHECK(l2_error(coarse, uc, fine, uf, {0, 0.0, 1.0}) == doctest::Approx(std::sqrt(s)).epsilon(1e-6));
  // Restricting to [0, 0.5) only sees the left half.
  CHECK(l2_error(coarse, uc, fine, uf, {0, 0.0, 0.5}) < l2_error(coarse, uc, fine, uf, {0, 0.0, 1.0}));
}

TEST_CASE("convergence order fit") {
  CHECK(convergence_order({{0.1, 0.01}, {0.05, 0.005}, {0.025, 0.0025}}) == doctest::Approx(1.0));
  CHECK(convergence_order({{0.1, 0.01}, {0.05, 0.0025}}) == doctest::Approx(2.0));
  CHECK_THROWS_AS(convergence_order({{0.1, 0.01}}), Error);
  CHECK_THROWS_AS(convergence_order({{0.1, 0.0}, {0.05, 0.01}}), Error);
}

TEST_CASE("telescoping energy balance over a friction run") {
  Scenario sc = y_network_scenario();
  sc.t_end = 0.5;
  const Trajectory tr = simulate(sc);
  double drop = 0.0, work = 0.0, slack = 0.0;
  for (const auto& d : tr.diagnostics) {
    work += sc.dt * (d.boundary_power - d.friction_dissipation);
    slack += d.dissipation_slack;
    CHECK(d.friction_dissipation >= 0.0);
  }
  drop = tr.initial.hamiltonian - tr.diagnostics.back().hamiltonian;
  CHECK(slack == doctest::Approx(drop + work).epsilon(1e-9));
}

TEST_CASE("closed dam break loses energy monotonically") {
  Scenario sc = dam_break_scenario(0.1, 0, 0.005);
  sc.t_end = 0.5;
  const Trajectory tr = simulate(sc);
  double prev = tr.initial.hamiltonian;
  CHECK(prev == doctest::Approx(4.5 * 5.0 + 0.5 * 5.0).epsilon(1e-12));  // P = rho^2 / 2
  for (const auto& d : tr.diagnostics) {
    CHECK(d.hamiltonian <= prev + 1e-12);
    CHECK(d.boundary_power == 0.0);
    CHECK(d.mass == doctest::Approx(20.0).epsilon(1e-14));
    prev = d.hamiltonian;
  }
}

TEST_CASE("column layout") {
  const auto& cols = diagnostics_columns();
  REQUIRE(cols.size() == 9);
  CHECK(cols.front() == "t");
  CHECK(cols[5] == "dissipation_slack");
  CHECK(cols.back() == "newton_iters");
}

TEST_CASE("junction flux residual of a balanced constrained member") {
  const Model model = build_model(y_network_scenario());
  Vec a2 = Vec::LinSpaced(model.ops->n2(), -1.0, 1.0);
  CHECK(junction_flux_residual(*model.space, a2) <= 1e-15);
}

}
