#include "phnet/constitutive.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace phnet {

namespace {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
}  // namespace

PressureLaw::PressureLaw(Isentropic law) : law_(law) {
  if (!(law.c > 0.0)) throw DomainError("isentropic constant c must be positive");
}

PressureLaw::PressureLaw(IsothermalAlpha law) : law_(law) {
  if (!(law.R > 0.0) || !(law.T > 0.0)) throw DomainError("R and T must be positive");
  if (!(law.rho_star > 0.0)) throw DomainError("rho_star must be positive");
  rho_min_ = law.rho_floor * law.rho_star;
  const double beta = law.R * law.T * law.alpha;
  if (beta > 0.0) rho_max_ = 1.0 / beta;
}

std::string PressureLaw::name() const {
  return std::visit(overloaded{[](const Isentropic&) { return std::string("isentropic"); },
                               [](const IsothermalAlpha&) { return std::string("isothermal_alpha"); }},
                    law_);
}

double PressureLaw::p(double rho) const {
  return std::visit(overloaded{[&](const Isentropic& l) { return l.c * rho * rho; },
                               [&](const IsothermalAlpha& l) {
                                 const double rt = l.R * l.T;
                                 return rt * rho / (1.0 - rt * l.alpha * rho);
                               }},
                    law_);
}

double PressureLaw::dp(double rho) const {
  return std::visit(overloaded{[&](const Isentropic& l) { return 2.0 * l.c * rho; },
                               [&](const IsothermalAlpha& l) {
                                 const double rt = l.R * l.T;
                                 const double s = 1.0 - rt * l.alpha * rho;
                                 return rt / (s * s);
                               }},
                    law_);
}

double PressureLaw::P(double rho) const {
  return std::visit(overloaded{[&](const Isentropic& l) { return l.c * rho * rho; },
                               [&](const IsothermalAlpha& l) {
                                 const double rt = l.R * l.T;
                                 const double s = 1.0 - rt * l.alpha * rho;
                                 return rt * rho * std::log(rho / (s * l.rho_star));
                               }},
                    law_);
}

double PressureLaw::dP(double rho) const {
  return std::visit(overloaded{[&](const Isentropic& l) { return 2.0 * l.c * rho; },
                               [&](const IsothermalAlpha& l) {
                                 const double rt = l.R * l.T;
                                 const double s = 1.0 - rt * l.alpha * rho;
                                 return rt * (std::log(rho / (s * l.rho_star)) + 1.0 / s);
                               }},
                    law_);
}

double PressureLaw::d2P(double rho) const {
  return std::visit(overloaded{[&](const Isentropic& l) { return 2.0 * l.c; },
                               [&](const IsothermalAlpha& l) {
                                 const double rt = l.R * l.T;
                                 const double beta = rt * l.alpha;
                                 const double s = 1.0 - beta * rho;
                                 return rt * (1.0 / rho + beta / s + beta / (s * s));
                               }},
                    law_);
}

double PressureLaw::P_difference(double rho0, double drho) const {
  return std::visit(
      overloaded{[&](const Isentropic& l) { return l.c * drho * (2.0 * rho0 + drho); },
                 [&](const IsothermalAlpha& l) {
                   // rho1 L(rho1) - rho0 L(rho0) = drho L(rho1) + rho0 (L(rho1) - L(rho0)),
                   // L(rho) = log(rho / ((1 - beta rho) rho_star)).
                   const double rt = l.R * l.T;
                   const double beta = rt * l.alpha;
                   const double rho1 = rho0 + drho;
                   const double s0 = 1.0 - beta * rho0;
                   const double L1 = std::log(rho1 / ((1.0 - beta * rho1) * l.rho_star));
                   const double dL = std::log1p(drho / rho0) - std::log1p(-beta * drho / s0);
                   return rt * (drho * L1 + rho0 * dL);
                 }},
      law_);
}

void ConstitutiveLaw::check(double rho) const {
  if (pressure_.admissible(rho)) return;
  std::ostringstream os;
  os.precision(17);
  os << "density " << rho << " outside admissible interval (" << pressure_.rho_min() << ", "
     << pressure_.rho_max() << ")";
  throw DomainError(os.str());
}

double ConstitutiveLaw::h(double rho, double v) const {
  check(rho);
  return 0.5 * rho * v * v + pressure_.P(rho);
}

std::array<double, 2> ConstitutiveLaw::grad_h(double rho, double v) const {
  check(rho);
  return {0.5 * v * v + pressure_.dP(rho), rho * v};
}

std::array<double, 4> ConstitutiveLaw::hess_h(double rho, double v) const {
  check(rho);
  return {pressure_.d2P(rho), v, v, rho};
}

double ConstitutiveLaw::hess_h_min_eig(double rho, double v) const {
  auto H = hess_h(rho, v);
  const double tr = H[0] + H[3];
  const double det = H[0] * H[3] - H[1] * H[2];
  const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
  // Smaller root via the product to avoid cancellation.
  const double big = 0.5 * tr + disc;
  return big != 0.0 ? det / big : 0.0;
}

double ConstitutiveLaw::g(double rho, double m) const {
  check(rho);
  return 0.5 * m * m / rho - pressure_.P(rho);
}

std::array<double, 2> ConstitutiveLaw::grad_g(double rho, double m) const {
  check(rho);
  const double v = m / rho;
  return {-(pressure_.dP(rho) + 0.5 * v * v), v};
}

std::array<double, 2> ConstitutiveLaw::z_hat(double rho, double m) const {
  check(rho);
  return {rho, m / rho};
}

std::array<double, 2> ConstitutiveLaw::a_hat(double rho, double v) const {
  check(rho);
  return {rho, rho * v};
}

double ConstitutiveLaw::hamiltonian_density_a(double rho, double m) const {
  check(rho);
  return 0.5 * m * m / rho + pressure_.P(rho);
}

double ConstitutiveLaw::friction_r(double rho, double m, double diameter) const {
  check(rho);
  return lambda_ * std::abs(m) / (2.0 * diameter * rho * rho);
}

}  // namespace phnet
