#include <doctest.h>

#include "phnet/boundary.hpp"

using namespace phnet;

TEST_SUITE("boundary") {

TEST_CASE("ramp profile") {
  const double ts = 3600.0;
  CHECK(ramp_profile(0.0, ts) == 0.0);
  CHECK(ramp_profile(1800.0, ts) == doctest::Approx(5.0));
  CHECK(ramp_profile(ts, ts) == doctest::Approx(10.0));
  CHECK(ramp_profile(1.25 * ts, ts) == doctest::Approx(7.5));
  CHECK(ramp_profile(1.5 * ts, ts) == doctest::Approx(5.0));
  CHECK(ramp_profile(5.0 * ts, ts) == 5.0);
  CHECK(evaluate(RampSignal{60.0, -1.0, ts}, ts) == doctest::Approx(50.0));
}

TEST_CASE("table signals interpolate and hold") {
  const Signal s = TableSignal{{{0.0, 1.0}, {1.0, 3.0}, {1.0, 5.0}, {2.0, 5.0}}};
  CHECK(evaluate(s, -1.0) == 1.0);
  CHECK(evaluate(s, 0.5) == doctest::Approx(2.0));
  CHECK(evaluate(s, 1.0) == 5.0);
  CHECK(evaluate(s, 9.0) == 5.0);
  CHECK(evaluate(ConstantSignal{-100.0}, 3.0) == -100.0);
}

TEST_CASE("type names round trip") {
  for (BCType t : {BCType::Flow, BCType::Effort, BCType::Density, BCType::PressureOnlyDensity})
    CHECK(bc_type_from_string(to_string(t)) == t);
  CHECK_THROWS_AS(bc_type_from_string("pressure"), Error);
}

TEST_CASE("closure rows and their derivatives") {
  const ConstitutiveLaw law(PressureLaw(Isentropic{0.5}), 0.0);
  SUBCASE("flow") {
    const ClosureRow r = closure_row({BCType::Flow, ConstantSignal{0.5}}, law, 2.0, 7.0, 0.75, 0.0);
    CHECK(r.k == doctest::Approx(0.25));
    CHECK(r.dk_de == 0.0);
    CHECK(r.dk_df == 1.0);
  }
  SUBCASE("large flow targets are scaled") {
    const ClosureRow r = closure_row({BCType::Flow, ConstantSignal{-100.0}}, law, 1.0, 0.0, -99.0, 0.0);
    CHECK(r.k == doctest::Approx(0.01));
  }
  SUBCASE("effort") {
    const ClosureRow r = closure_row({BCType::Effort, ConstantSignal{0.5}}, law, 1.0, 0.7, 3.0, 0.0);
    CHECK(r.k == doctest::Approx(0.2));
    CHECK(r.dk_df == 0.0);
  }
  SUBCASE("density includes the kinetic term") {
    const double A = 0.5, u = 2.0, f = 0.3, e = 2.1;
    const BoundaryCondition bc{BCType::Density, ConstantSignal{u}};
    const ClosureRow r = closure_row(bc, law, A, e, f, 0.0);
    const double v = f / (A * u);
    const double scale = 1.0 / law.pressure().dP(u);
    CHECK(r.k == doctest::Approx((e - law.pressure().dP(u) - 0.5 * v * v) * scale));
    const double h = 1e-6;
    const double fd = (closure_row(bc, law, A, e, f + h, 0.0).k - closure_row(bc, law, A, e, f - h, 0.0).k) / (2 * h);
    CHECK(r.dk_df == doctest::Approx(fd).epsilon(1e-8));
    CHECK(r.dk_de == doctest::Approx(scale));
  }
  SUBCASE("pressure-only density ignores the flow") {
    const ClosureRow r = closure_row({BCType::PressureOnlyDensity, ConstantSignal{1.0}}, law, 1.0, 1.0, 5.0, 0.0);
    CHECK(r.k == doctest::Approx(0.0));
    CHECK(r.dk_df == 0.0);
  }
  SUBCASE("inadmissible density data") {
    CHECK_THROWS_AS(closure_row({BCType::Density, ConstantSignal{-1.0}}, law, 1.0, 1.0, 0.0, 0.0), DomainError);
  }
}

}
