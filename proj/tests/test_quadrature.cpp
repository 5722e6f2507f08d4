#include <doctest.h>

#include <cmath>
#include <numeric>

#include "phnet/quadrature.hpp"

using namespace phnet;

namespace {
double integrate(const Rule1D& r, int degree) {
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) s += r.w[i] * std::pow(r.x[i], degree);
  return s;
}
double monomial_integral(int k) { return k % 2 ? 0.0 : 2.0 / (k + 1); }
}  // namespace

TEST_SUITE("quadrature") {

TEST_CASE("Gauss-Legendre is exact to degree 2n-1") {
  for (int n = 1; n <= 12; ++n) {
    const Rule1D r = gauss_legendre(n);
    REQUIRE(r.size() == static_cast<std::size_t>(n));
    for (double w : r.w) CHECK(w > 0.0);
    for (int k = 0; k <= 2 * n - 1; ++k) CHECK(integrate(r, k) == doctest::Approx(monomial_integral(k)).epsilon(1e-13));
    CHECK(std::abs(integrate(r, 2 * n) - monomial_integral(2 * n)) > 1e-12);
  }
}

TEST_CASE("Gauss-Lobatto nodes and exactness") {
  const Rule1D r3 = gauss_lobatto(3);
  CHECK(r3.x[0] == -1.0);
  CHECK(r3.x[1] == doctest::Approx(0.0));
  CHECK(r3.x[2] == 1.0);
  CHECK(r3.w[0] == doctest::Approx(1.0 / 3.0));
  CHECK(r3.w[1] == doctest::Approx(4.0 / 3.0));
  for (int n = 2; n <= 10; ++n) {
    const Rule1D r = gauss_lobatto(n);
    CHECK(r.x.front() == -1.0);
    CHECK(r.x.back() == 1.0);
    for (int k = 0; k <= 2 * n - 3; ++k) CHECK(integrate(r, k) == doctest::Approx(monomial_integral(k)).epsilon(1e-13));
  }
}

TEST_CASE("Legendre polynomials") {
  CHECK(legendre(0, 0.3) == 1.0);
  CHECK(legendre(2, 0.5) == doctest::Approx(-0.125));
  CHECK(legendre(3, 1.0) == doctest::Approx(1.0));
  CHECK(legendre_deriv(2, 0.5) == doctest::Approx(1.5));
  double v[5], d[5];
  legendre_all(4, -0.7, v, d);
  for (int k = 0; k <= 4; ++k) {
    CHECK(v[k] == doctest::Approx(legendre(k, -0.7)));
    CHECK(d[k] == doctest::Approx(legendre_deriv(k, -0.7)));
  }
}

TEST_CASE("Lagrange basis is a partition of unity") {
  const auto nodes = gauss_lobatto(5).x;
  double v[5], d[5];
  lagrange_all(nodes, 0.123, v, d);
  CHECK(std::accumulate(v, v + 5, 0.0) == doctest::Approx(1.0));
  CHECK(std::accumulate(d, d + 5, 0.0) == doctest::Approx(0.0).epsilon(1e-12));
  lagrange_all(nodes, nodes[2], v);
  CHECK(v[2] == doctest::Approx(1.0));
  CHECK(v[0] == doctest::Approx(0.0));
}

}
