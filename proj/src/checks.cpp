#include "phnet/checks.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

namespace phnet {

namespace {

CheckItem item(std::string name, double value, double tol, bool pass, std::string detail = {}) {
  CheckItem it;
  it.name = std::move(name);
  it.value = value;
  it.tol = tol;
  it.passed = pass;
  it.detail = std::move(detail);
  return it;
}

CheckItem le(std::string name, double value, double tol, std::string detail = {}) {
  return item(std::move(name), value, tol, std::isfinite(value) && value <= tol, std::move(detail));
}

CheckItem info(std::string name, double value, std::string detail = {}) {
  CheckItem it = item(std::move(name), value, 0.0, true, std::move(detail));
  it.enforced = false;
  return it;
}

std::vector<long> sample_columns(long n, int max_cols, std::mt19937_64& rng) {
  std::vector<long> cols(n);
  std::iota(cols.begin(), cols.end(), 0L);
  if (n > max_cols) {
    std::shuffle(cols.begin(), cols.end(), rng);
    cols.resize(max_cols);
    std::sort(cols.begin(), cols.end());
  }
  return cols;
}

/// Max column defect of an analytic Jacobian against central differences,
/// relative to the largest checked analytic column.
double fd_defect(const std::function<Vec(const Vec&)>& f, const Vec& x, const SpMat& J,
                 const std::vector<long>& cols) {
  const Mat Jd = Mat(J);
  double err = 0.0, scale = 0.0;
  for (long j : cols) {
    const double h = 1e-6 * std::max(1.0, std::abs(x[j]));
    Vec xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    const Vec col = (f(xp) - f(xm)) / (2.0 * h);
    err = std::max(err, (col - Jd.col(j)).cwiseAbs().maxCoeff());
    scale = std::max(scale, Jd.col(j).cwiseAbs().maxCoeff());
  }
  return err / std::max(scale, 1e-300);
}

double golden_max(const std::function<double(double)>& f, double a, double b) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  while (std::abs(b - a) > 1e-10 * std::max(1.0, std::abs(a) + std::abs(b))) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return f(0.5 * (a + b));
}

}  // namespace

bool CheckReport::all_passed() const {
  return std::all_of(items.begin(), items.end(), [](const CheckItem& i) { return i.passed || !i.enforced; });
}

void CheckReport::append(const CheckReport& other) {
  items.insert(items.end(), other.items.begin(), other.items.end());
}

double g_numeric_supremum(const ConstitutiveLaw& law, double rho, double m) {
  law.check(rho);
  auto obj = [&](double v) { return m * v - law.h(rho, v); };
  double lo = -1.0, hi = 1.0;
  while (obj(hi) > obj(0.5 * hi)) hi *= 2.0;
  while (obj(lo) > obj(0.5 * lo)) lo *= 2.0;
  return golden_max(obj, lo, hi);
}

CheckReport constitutive_checks(const ConstitutiveLaw& law, double rho_lo, double rho_hi, double v_max,
                                const CheckSettings& s) {
  std::mt19937_64 rng(s.seed);
  std::uniform_real_distribution<double> Ur(rho_lo, rho_hi), Uv(-v_max, v_max);
  const auto& P = law.pressure();
  double roundtrip = 0.0, grad = 0.0, duality = 0.0, sup = 0.0, dpp = 0.0;
  double convex = std::numeric_limits<double>::infinity();
  double min_dp = std::numeric_limits<double>::infinity();
  for (int i = 0; i < s.constitutive_samples; ++i) {
    const double rho = Ur(rng), v = Uv(rng), m = rho * v;
    const auto z = law.z_hat(rho, m);
    const auto a = law.a_hat(z[0], z[1]);
    roundtrip = std::max({roundtrip, std::abs(a[0] - rho) / std::abs(rho),
                          std::abs(a[1] - m) / std::max(std::abs(m), 1e-300 + std::abs(rho))});

    const auto gg = law.grad_g(rho, m);
    // g ~ -P can be large, so use moderate steps with one Richardson level.
    // The m step is scaled by the momentum at sound speed.
    const double hr = 1e-3 * rho;
    const double hm = 1e-3 * std::max({1.0, std::abs(m), rho * std::sqrt(P.dp(rho))});
    auto central = [](auto&& f, double h) { return (f(h) - f(-h)) / (2 * h); };
    auto richardson = [&](auto&& f, double h) { return (4.0 * central(f, 0.5 * h) - central(f, h)) / 3.0; };
    const double d1 = richardson([&](double d) { return law.g(rho + d, m); }, hr);
    const double d2 = richardson([&](double d) { return law.g(rho, m + d); }, hm);
    grad = std::max({grad, std::abs(d1 - gg[0]) / std::max(1.0, std::abs(gg[0])),
                     std::abs(d2 - gg[1]) / std::max(1.0, std::abs(gg[1]))});

    const double h = law.h(z[0], z[1]);
    duality = std::max(duality, std::abs(h - (gg[1] * m - law.g(rho, m))) / std::max(1.0, std::abs(h)));

    const double g = law.g(rho, m);
    sup = std::max(sup, std::abs(g_numeric_supremum(law, rho, m) - g) / std::max(1.0, std::abs(g)));

    dpp = std::max(dpp, std::abs(P.d2P(rho) - P.dp(rho) / rho) / std::abs(P.d2P(rho)));
    min_dp = std::min(min_dp, P.dp(rho));

    const double m2 = rho * Uv(rng);
    if (m2 != m) convex = std::min(convex, (law.grad_g(rho, m)[1] - law.grad_g(rho, m2)[1]) * (m - m2));
  }
  const std::string tag = P.name();
  CheckReport r;
  r.items.push_back(le("legendre_roundtrip[" + tag + "]", roundtrip, 1e-12));
  r.items.push_back(le("grad_g_fd[" + tag + "]", grad, 1e-6));
  r.items.push_back(le("duality[" + tag + "]", duality, 1e-12));
  r.items.push_back(le("g_supremum[" + tag + "]", sup, 1e-8));
  r.items.push_back(le("d2P_vs_dp[" + tag + "]", dpp, 1e-8));
  r.items.push_back(item("dp_positive[" + tag + "]", min_dp, 0.0, min_dp > 0.0));
  r.items.push_back(item("convex_in_m[" + tag + "]", convex, 0.0, convex > 0.0));
  return r;
}

State random_state(const DiscreteOperators& ops, double rho0, double v_max, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const SpacePair& sp = ops.space();
  State st;
  st.a1.resize(sp.n1());
  for (std::size_t e = 0; e < sp.num_elements(); ++e)
    for (int k = 0; k <= sp.q(); ++k)
      st.a1[sp.v1_dof(e, k)] = k == 0 ? rho0 * (1.0 + 0.2 * U(rng)) : 0.05 * rho0 * U(rng) / (k + 1);
  st.a2 = Vec::NullaryExpr(sp.n2(), [&] { return rho0 * v_max * U(rng); });
  st.e = Vec::NullaryExpr(sp.num_ports(), [&] { return ops.law().pressure().dP(rho0) * (1.0 + 0.1 * U(rng)); });
  return st;
}

CheckReport operator_checks(const DiscreteOperators& ops, double rho0, double v_max, const CheckSettings& s) {
  CheckReport r;
  const SpacePair& sp = ops.space();
  std::mt19937_64 rng(s.seed + 1);
  std::uniform_real_distribution<double> U(-1.0, 1.0);

  const CompatibilityReport c = check_compatibility(sp);
  {
    std::ostringstream os;
    os << "rank(D) = " << c.rank_D << ", n1 = " << c.n1;
    r.items.push_back(item("compat_A1_rank", static_cast<double>(c.rank_D), static_cast<double>(c.n1), c.a1, os.str()));
  }
  r.items.push_back(le("compat_A1_derivative", c.derivative_error, 1e-10));
  r.items.push_back(item("compat_A2_kernel", c.a2_error, 1e-12, c.a2,
                         "kernel dimension " + std::to_string(c.kernel_dim)));
  r.items.push_back(le("junction_constraint", c.constraint_error, 1e-12));

  for (const auto& [name, M] : {std::pair<std::string, const SpMat*>{"M1", &ops.M1()}, {"M2", &ops.M2()}}) {
    Eigen::SimplicialLLT<SpMat> llt(*M);
    const SpMat d = *M - SpMat(M->transpose());
    const double asym = d.nonZeros() ? d.coeffs().cwiseAbs().maxCoeff() : 0.0;
    r.items.push_back(item(name + "_cholesky", asym, 0.0, llt.info() == Eigen::Success && asym == 0.0,
                           llt.info() == Eigen::Success ? "" : "factorization failed"));
  }

  {
    const long n1 = ops.n1(), n2 = ops.n2();
    std::vector<Eigen::Triplet<double>> t;
    const SpMat& J = ops.J();
    for (int k = 0; k < J.outerSize(); ++k)
      for (SpMat::InnerIterator it(J, k); it; ++it) {
        t.emplace_back(it.row(), n1 + it.col(), it.value());
        t.emplace_back(n1 + it.col(), it.row(), -it.value());
      }
    SpMat S(n1 + n2, n1 + n2);
    S.setFromTriplets(t.begin(), t.end());
    const SpMat sum = S + SpMat(S.transpose());
    const double defect = sum.nonZeros() ? sum.coeffs().cwiseAbs().maxCoeff() : 0.0;
    r.items.push_back(item("skew_structure", defect, 0.0, defect == 0.0));
  }

  double psd = std::numeric_limits<double>::infinity(), dense = 0.0;
  for (int i = 0; i < s.random_states; ++i) {
    const State st = random_state(ops, rho0, v_max, rng);
    const Vec w = Vec::NullaryExpr(ops.n2(), [&] { return U(rng); });
    const Vec Rw = ops.R_apply(st.a1, st.a2, w);
    psd = std::min(psd, w.dot(Rw));
    const Vec Rd = ops.R_matrix(st.a1, st.a2) * w;
    dense = std::max(dense, (Rd - Rw).cwiseAbs().maxCoeff() / std::max(1e-300, Rw.cwiseAbs().maxCoeff()));
  }
  r.items.push_back(item("R_psd", psd, -1e-12, psd >= -1e-12, "min w^T R w over random states"));
  if (ops.law().lambda() > 0.0) r.items.push_back(le("R_dense_vs_apply", dense, 1e-14));

  {
    const State st = random_state(ops, rho0, v_max, rng);
    const long n1 = ops.n1();
    Vec x(n1 + ops.n2());
    x << st.a1, st.a2;
    const auto cols = sample_columns(x.size(), s.fd_columns, rng);
    struct Form {
      const char* name;
      std::function<Vec(const Vec&, const Vec&)> value;
      std::function<FormJacobian(const Vec&, const Vec&)> jac;
    };
    const Form forms[] = {
        {"jacobian_n2", [&](const Vec& a1, const Vec& a2) { return ops.n2_vec(a1, a2); },
         [&](const Vec& a1, const Vec& a2) { return ops.jacobian_n2(a1, a2); }},
        {"jacobian_c1", [&](const Vec& a1, const Vec& a2) { return ops.c1_vec(a1, a2); },
         [&](const Vec& a1, const Vec& a2) { return ops.jacobian_c1(a1, a2); }},
        {"jacobian_Ra2", [&](const Vec& a1, const Vec& a2) { return ops.R_apply(a1, a2, a2); },
         [&](const Vec& a1, const Vec& a2) { return ops.jacobian_Ra2(a1, a2); }},
    };
    for (const Form& f : forms) {
      if (std::string(f.name) == "jacobian_Ra2" && ops.law().lambda() == 0.0) continue;
      const FormJacobian fj = f.jac(st.a1, st.a2);
      const SpMat Jrow = block2x2(fj.d_a1, fj.d_a2, SpMat(0, n1), SpMat(0, ops.n2()));
      auto fn = [&](const Vec& y) { return f.value(y.head(n1), y.tail(ops.n2())); };
      r.items.push_back(le(f.name, fd_defect(fn, x, Jrow, cols), s.jacobian_tol));
    }
  }

  {
    const Mat G1 = Mat(ops.reduced_gram_v1()), G2 = Mat(ops.reduced_gram_v2());
    for (const auto& [name, G] : {std::pair<std::string, const Mat*>{"V1", &G1}, {"V2", &G2}}) {
      Eigen::SelfAdjointEigenSolver<Mat> es(*G, Eigen::EigenvaluesOnly);
      const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
      r.items.push_back(item("reduced_gram_" + name + "_spd", lo, 0.0, lo > 0.0));
      r.items.push_back(info("reduced_gram_" + name + "_cond", hi / lo, "reported, not enforced"));
    }
  }
  return r;
}

CheckReport stepper_checks(const TimeStepper& stepper, double rho0, double v_max, double dt,
                           const CheckSettings& s) {
  const DiscreteOperators& ops = stepper.ops();
  std::mt19937_64 rng(s.seed + 2);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const State prev = random_state(ops, rho0, v_max, rng);
  const long n2 = ops.n2(), p = ops.num_ports();
  Vec y(n2 + p);
  y.head(n2) = prev.a2 + 0.05 * rho0 * v_max * Vec::NullaryExpr(n2, [&] { return U(rng); });
  y.tail(p) = prev.e;
  const double t = dt;
  SpMat J;
  stepper.reduced_residual(prev, y, t, dt, &J);
  auto fn = [&](const Vec& yy) { return stepper.reduced_residual(prev, yy, t, dt); };
  CheckReport r;
  r.items.push_back(
      le("step_jacobian", fd_defect(fn, y, J, sample_columns(y.size(), s.fd_columns, rng)), s.step_jacobian_tol));
  return r;
}

CheckReport run_checks(const Scenario& sc, const CheckSettings& s) {
  const Model model = build_model(sc);
  const DiscreteOperators& ops = *model.ops;
  double rho0;
  if (sc.initial.kind == InitialCondition::Kind::Fields) {
    const State st = initial_state(model, sc).state;
    double vol = 0.0;
    for (const auto& el : model.space->elements()) vol += el.area * el.h();
    rho0 = ops.mass(st.a1) / vol;
  } else {
    rho0 = reference_density(ops, model.bcs, 0.0, sc.initial.steady_rho_guess.value_or(sc.initial.rho_default));
  }
  const double v_max = 0.3 * std::sqrt(ops.law().pressure().dp(rho0));
  CheckReport r = constitutive_checks(ops.law(), 0.5 * rho0, 2.0 * rho0, 2.0 * v_max, s);
  r.append(operator_checks(ops, rho0, v_max, s));
  const TimeStepper stepper(model.ops, model.bcs, sc.newton);
  r.append(stepper_checks(stepper, rho0, v_max, sc.dt, s));
  return r;
}

}  // namespace phnet
