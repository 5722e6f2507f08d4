#include <doctest.h>

#include <cmath>
#include <random>

#include "phnet/checks.hpp"
#include "phnet/constitutive.hpp"

using namespace phnet;

namespace {

// Independent oracle: ternary search for sup_v m v - h(rho, v) on a fixed
// bracket wide enough for the sampled states.
double g_oracle(const ConstitutiveLaw& law, double rho, double m) {
  double lo = m / rho - 50.0, hi = m / rho + 50.0;
  auto f = [&](double v) { return m * v - law.h(rho, v); };
  for (int i = 0; i < 300; ++i) {
    const double a = lo + (hi - lo) / 3.0, b = hi - (hi - lo) / 3.0;
    if (f(a) < f(b)) lo = a; else hi = b;
  }
  return f(0.5 * (lo + hi));
}

ConstitutiveLaw isentropic(double c = 0.5, double lambda = 0.0) { return {PressureLaw(Isentropic{c}), lambda}; }
ConstitutiveLaw isothermal(double lambda = 0.0) { return {PressureLaw(IsothermalAlpha{}), lambda}; }

}  // namespace

TEST_SUITE("constitutive") {

TEST_CASE("closed form values for p = rho^2 / 2") {
  const ConstitutiveLaw law = isentropic();
  CHECK(law.pressure().P(1.0) == doctest::Approx(0.5));
  CHECK(law.g(1.0, 0.0) == doctest::Approx(-0.5));
  CHECK(law.g(2.0, 4.0) == doctest::Approx(2.0));
  CHECK(law.h(2.0, 2.0) == doctest::Approx(6.0));
  CHECK(law.hamiltonian_density_a(2.0, 4.0) == doctest::Approx(6.0));
  const auto gg = law.grad_g(1.0, 1.0);
  CHECK(gg[0] == doctest::Approx(-1.5));
  CHECK(gg[1] == doctest::Approx(1.0));
  const auto z = law.z_hat(2.0, 4.0);
  CHECK(z[0] == 2.0);
  CHECK(z[1] == 2.0);
  const auto a = law.a_hat(2.0, 2.0);
  CHECK(a[1] == 4.0);
}

TEST_CASE("closed-form g matches the supremum oracle") {
  std::mt19937_64 rng(7);
  for (const ConstitutiveLaw& law : {isentropic(), isentropic(3.0), isothermal()}) {
    const bool iso = law.pressure().name() != "isentropic";
    std::uniform_real_distribution<double> dr(iso ? 20.0 : 0.2, iso ? 80.0 : 4.0), dv(-3.0, 3.0);
    for (int i = 0; i < 40; ++i) {
      const double rho = dr(rng), m = rho * dv(rng);
      const double g = law.g(rho, m);
      CHECK(std::abs(g_oracle(law, rho, m) - g) <= 1e-8 * (1.0 + std::abs(g)));
      CHECK(std::abs(g_numeric_supremum(law, rho, m) - g) <= 1e-8 * (1.0 + std::abs(g)));
    }
  }
}

TEST_CASE("Legendre roundtrip, duality and gradient") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dr(0.3, 3.0), dv(-0.5, 0.5);
  const ConstitutiveLaw law = isentropic();
  for (int i = 0; i < 100; ++i) {
    const double rho = dr(rng), v = dv(rng);
    const auto a = law.a_hat(rho, v);
    const auto z = law.z_hat(a[0], a[1]);
    CHECK(std::abs(z[0] - rho) <= 1e-14 * rho);
    CHECK(std::abs(z[1] - v) <= 1e-14 * (1.0 + std::abs(v)));
    // g(a) + h(z) = m v
    CHECK(std::abs(law.g(a[0], a[1]) + law.h(rho, v) - a[1] * v) <= 1e-12 * (1.0 + law.h(rho, v)));
    const auto gg = law.grad_g(a[0], a[1]);
    const double eps = 1e-6;
    const double fr = (law.g(a[0] + eps, a[1]) - law.g(a[0] - eps, a[1])) / (2 * eps);
    const double fm = (law.g(a[0], a[1] + eps) - law.g(a[0], a[1] - eps)) / (2 * eps);
    CHECK(std::abs(fr - gg[0]) <= 1e-6 * (1.0 + std::abs(gg[0])));
    CHECK(std::abs(fm - gg[1]) <= 1e-6 * (1.0 + std::abs(gg[1])));
  }
}

TEST_CASE("pressure potential identities hold for both laws") {
  for (const PressureLaw& law : {PressureLaw(Isentropic{0.5}), PressureLaw(IsothermalAlpha{})}) {
    for (double rho : {0.5, 1.0, 10.0, 45.0, 65.0, 200.0}) {
      const double h = 1e-5 * rho;
      CHECK(law.P(rho) == doctest::Approx(rho * law.dP(rho) - law.p(rho)).epsilon(1e-12));
      CHECK(law.d2P(rho) == doctest::Approx(law.dp(rho) / rho).epsilon(1e-12));
      CHECK((law.P(rho + h) - law.P(rho - h)) / (2 * h) == doctest::Approx(law.dP(rho)).epsilon(1e-7));
      CHECK((law.dP(rho + h) - law.dP(rho - h)) / (2 * h) == doctest::Approx(law.d2P(rho)).epsilon(1e-7));
      CHECK(law.dp(rho) > 0.0);
      CHECK(law.d2P(rho) > 0.0);
    }
  }
}

TEST_CASE("isothermal law with attractive virial term") {
  const IsothermalAlpha c{};
  const PressureLaw law(c);
  const double rt = c.R * c.T;
  CHECK(law.p(60.0) == doctest::Approx(rt * 60.0 / (1.0 - rt * c.alpha * 60.0)).epsilon(1e-15));
  // With alpha < 0 the admissible set is unbounded above.
  CHECK(std::isinf(law.rho_max()));
  CHECK(law.admissible(60.0));
  CHECK_FALSE(law.admissible(0.0));
  IsothermalAlpha rep = c;
  rep.alpha = 3e-8;
  const PressureLaw repulsive(rep);
  CHECK(repulsive.rho_max() == doctest::Approx(1.0 / (rt * rep.alpha)));
}

TEST_CASE("P_difference is accurate for tiny increments") {
  const PressureLaw law(IsothermalAlpha{});
  const double rho = 60.0, d = 1e-9;
  const double exact = law.dP(rho) * d + 0.5 * law.d2P(rho) * d * d;
  CHECK(law.P_difference(rho, d) == doctest::Approx(exact).epsilon(1e-9));
  CHECK(law.P_difference(rho, 5.0) == doctest::Approx(law.P(rho + 5.0) - law.P(rho)).epsilon(1e-12));
}

TEST_CASE("Hessian of h is positive definite exactly for subsonic states") {
  const ConstitutiveLaw law = isentropic();
  const double rho = 2.0, c = std::sqrt(law.pressure().dp(rho));
  CHECK(law.hess_h_min_eig(rho, 0.5 * c) > 0.0);
  CHECK(law.hess_h_min_eig(rho, -0.99 * c) > 0.0);
  CHECK(law.hess_h_min_eig(rho, 1.01 * c) < 0.0);
  const auto H = law.hess_h(rho, 0.3);
  CHECK(H[1] == H[2]);
}

TEST_CASE("friction coefficient") {
  const ConstitutiveLaw law = isentropic(0.5, 0.01);
  CHECK(law.friction_r(1.0, 2.0, 0.5) == doctest::Approx(0.01 * 2.0 / (2.0 * 0.5)));
  CHECK(law.friction_r(2.0, -3.0, 1.0) == doctest::Approx(0.01 * 3.0 / 8.0));
  CHECK(law.friction_r(2.0, 0.0, 1.0) == 0.0);
  CHECK(isentropic().friction_r(1.0, 5.0, 1.0) == 0.0);
}

TEST_CASE("inadmissible densities raise DomainError") {
  const ConstitutiveLaw law = isentropic();
  CHECK_THROWS_AS(law.check(0.0), DomainError);
  CHECK_THROWS_AS(law.check(-1.0), DomainError);
  CHECK_THROWS_AS(law.g(-1.0, 0.0), DomainError);
  CHECK_NOTHROW(law.check(1e-3));
}

TEST_CASE("oracle suite passes for both laws") {
  const CheckReport a = constitutive_checks(isentropic(), 0.2, 4.0, 0.5);
  const CheckReport b = constitutive_checks(isothermal(), 20.0, 80.0, 100.0);
  for (const auto& item : a.items) CHECK_MESSAGE(item.passed, item.name);
  for (const auto& item : b.items) CHECK_MESSAGE(item.passed, item.name);
}

}
