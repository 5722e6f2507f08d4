#include "phnet/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace phnet {

void legendre_all(int n, double x, double* vals, double* derivs) {
  vals[0] = 1.0;
  if (derivs) derivs[0] = 0.0;
  if (n == 0) return;
  vals[1] = x;
  if (derivs) derivs[1] = 1.0;
  for (int k = 1; k < n; ++k) {
    vals[k + 1] = ((2.0 * k + 1.0) * x * vals[k] - k * vals[k - 1]) / (k + 1.0);
    // P'_{k+1} = P'_{k-1} + (2k+1) P_k
    if (derivs) derivs[k + 1] = derivs[k - 1] + (2.0 * k + 1.0) * vals[k];
  }
}

double legendre(int k, double x) {
  std::vector<double> v(k + 1);
  legendre_all(k, x, v.data());
  return v[k];
}

double legendre_deriv(int k, double x) {
  std::vector<double> v(k + 1), d(k + 1);
  legendre_all(k, x, v.data(), d.data());
  return d[k];
}

Rule1D gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
  Rule1D r;
  r.x.resize(n);
  r.w.resize(n);
  std::vector<double> v(n + 1), d(n + 1);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      legendre_all(n, x, v.data(), d.data());
      const double dx = v[n] / d[n];
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    legendre_all(n, x, v.data(), d.data());
    const double w = 2.0 / ((1.0 - x * x) * d[n] * d[n]);
    r.x[i] = -x;
    r.x[n - 1 - i] = x;
    r.w[i] = w;
    r.w[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.x[n / 2] = 0.0;
  return r;
}

Rule1D gauss_lobatto(int n) {
  if (n < 2) throw std::invalid_argument("gauss_lobatto: n must be at least 2");
  const int N = n - 1;
  Rule1D r;
  r.x.resize(n);
  r.w.resize(n);
  std::vector<double> v(N + 1);
  for (int i = 0; i < n; ++i) {
    // Newton on (1 - x^2) P_N'(x) starting from Chebyshev-Gauss-Lobatto points.
    double x = -std::cos(std::numbers::pi * i / N);
    for (int it = 0; it < 100; ++it) {
      legendre_all(N, x, v.data());
      const double xold = x;
      // von Winckel iteration: x <- x - (x P_N - P_{N-1}) / (n P_N)
      x = xold - (xold * v[N] - v[N - 1]) / (n * v[N]);
      if (std::abs(x - xold) < 1e-16) break;
    }
    legendre_all(N, x, v.data());
    r.x[i] = x;
    r.w[i] = 2.0 / (N * n * v[N] * v[N]);
  }
  r.x.front() = -1.0;
  r.x.back() = 1.0;
  return r;
}

void lagrange_all(const std::vector<double>& nodes, double x, double* vals, double* derivs) {
  const std::size_t n = nodes.size();
  for (std::size_t i = 0; i < n; ++i) {
    double l = 1.0, dl = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double denom = nodes[i] - nodes[j];
      dl = dl * (x - nodes[j]) / denom + l / denom;
      l *= (x - nodes[j]) / denom;
    }
    vals[i] = l;
    if (derivs) derivs[i] = dl;
  }
}

}  // namespace phnet
