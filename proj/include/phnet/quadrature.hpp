#pragma once

#include <vector>

namespace phnet {

/// Points and positive weights on the reference interval [-1, 1].
struct Rule1D {
  std::vector<double> x;
  std::vector<double> w;
  std::size_t size() const { return x.size(); }
};

/// n-point Gauss-Legendre rule, exact for degree 2n-1.
Rule1D gauss_legendre(int n);

/// n-point Gauss-Lobatto-Legendre rule (n >= 2), endpoints included.
Rule1D gauss_lobatto(int n);

/// Legendre polynomial P_k(x) and its derivative.
double legendre(int k, double x);
double legendre_deriv(int k, double x);
/// Values P_0..P_n at x.
void legendre_all(int n, double x, double* vals, double* derivs = nullptr);

/// Lagrange polynomials on `nodes`, evaluated at x.
void lagrange_all(const std::vector<double>& nodes, double x, double* vals, double* derivs = nullptr);

}  // namespace phnet
