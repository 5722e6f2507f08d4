#include "phnet/steady.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace phnet {

std::string to_string(SteadyStrategy s) {
  switch (s) {
    case SteadyStrategy::Newton: return "newton";
    case SteadyStrategy::PseudoTransient: return "pseudo_transient";
    case SteadyStrategy::Homotopy: return "homotopy";
    case SteadyStrategy::Failed: return "failed";
  }
  return "?";
}

namespace {

void append_block(std::vector<Eigen::Triplet<double>>& t, const SpMat& M, long r0, long c0) {
  for (int k = 0; k < M.outerSize(); ++k)
    for (SpMat::InnerIterator it(M, k); it; ++it) t.emplace_back(r0 + it.row(), c0 + it.col(), it.value());
}

// Invert P'(rho) = e by safeguarded Newton.
double density_from_effort(const PressureLaw& P, double e, double guess) {
  double rho = guess;
  for (int it = 0; it < 100; ++it) {
    const double step = (P.dP(rho) - e) / P.d2P(rho);
    double next = rho - step;
    if (!P.admissible(next)) next = 0.5 * (rho + (step > 0 ? P.rho_min() : std::min(P.rho_max(), 2 * rho)));
    if (std::abs(next - rho) <= 1e-15 * std::abs(rho)) return next;
    rho = next;
  }
  return rho;
}

}  // namespace

double reference_density(const DiscreteOperators& ops, const std::vector<BoundaryCondition>& bcs, double t,
                         double fallback) {
  double s = 0.0;
  int n = 0;
  for (const auto& bc : bcs)
    if (bc.type == BCType::Density || bc.type == BCType::PressureOnlyDensity) {
      s += evaluate(bc.signal, t);
      ++n;
    }
  if (n > 0) return s / n;
  for (const auto& bc : bcs)
    if (bc.type == BCType::Effort) {
      s += density_from_effort(ops.law().pressure(), evaluate(bc.signal, t), fallback);
      ++n;
    }
  if (n > 0) return s / n;
  return fallback;
}

State flat_state(const DiscreteOperators& ops, double rho0) {
  ops.law().check(rho0);
  State s;
  s.a1 = ops.space().project_v1([&](std::size_t, double) { return rho0; });
  s.a2 = Vec::Zero(ops.n2());
  s.e = Vec::Constant(ops.num_ports(), ops.law().pressure().dP(rho0));
  return s;
}

SteadyProblem::SteadyProblem(const TimeStepper& stepper, double t, bool anchor, double mass_target)
    : st_(stepper), t_(t), anchor_(anchor), mass_target_(mass_target) {}

std::size_t SteadyProblem::size() const {
  const auto& o = st_.ops();
  return o.n1() + o.n2() + o.num_ports() + (anchor_ ? 1 : 0);
}

Vec SteadyProblem::pack(const State& s, double sigma) const {
  const auto& o = st_.ops();
  Vec x(size());
  x.head(o.n1()) = s.a1;
  x.segment(o.n1(), o.n2()) = s.a2;
  x.segment(o.n1() + o.n2(), o.num_ports()) = s.e;
  if (anchor_) x[x.size() - 1] = sigma;
  return x;
}

State SteadyProblem::unpack(const Vec& x) const {
  const auto& o = st_.ops();
  return {x.head(o.n1()), x.segment(o.n1(), o.n2()), x.segment(o.n1() + o.n2(), o.num_ports())};
}

bool SteadyProblem::eval(const Vec& x, Vec& F, SpMat* J) const {
  const DiscreteOperators& o = st_.ops();
  const long n1 = o.n1(), n2 = o.n2(), p = o.num_ports();
  const State s = unpack(x);
  if (!o.admissible(s.a1)) return false;
  const double sig = sigma(x);
  const FormValue fv = o.combined(s.a1, s.a2, 0.0, 1.0, -1.0, J != nullptr);
  const SpMat Kt = o.K2().transpose();
  const Vec f = Kt * s.a2;
  SpMat dk_de, dk_df;
  F.resize(size());
  F.head(n1) = o.J() * s.a2 + sig * o.mass_weights();
  F.segment(n1, n2) = fv.value + o.K2() * s.e;
  F.segment(n1 + n2, p) = st_.closure(s.e, f, t_, J ? &dk_de : nullptr, J ? &dk_df : nullptr);
  const double mscale = std::max(1.0, std::abs(mass_target_));
  if (anchor_) F[F.size() - 1] = (o.mass(s.a1) - mass_target_) / mscale;
  if (J) {
    std::vector<Eigen::Triplet<double>> trip;
    append_block(trip, o.J(), 0, n1);
    append_block(trip, fv.jac.d_a1, n1, 0);
    append_block(trip, fv.jac.d_a2, n1, n1);
    append_block(trip, o.K2(), n1, n1 + n2);
    append_block(trip, SpMat(dk_df * Kt), n1 + n2, n1);
    append_block(trip, dk_de, n1 + n2, n1 + n2);
    if (anchor_) {
      const long last = n1 + n2 + p;
      for (long i = 0; i < n1; ++i) {
        const double w = o.mass_weights()[i];
        if (w == 0.0) continue;
        trip.emplace_back(i, last, w);
        trip.emplace_back(last, i, w / mscale);
      }
    }
    J->resize(size(), size());
    J->setFromTriplets(trip.begin(), trip.end());
  }
  return true;
}

bool SteadyProblem::converged(const Vec& F, double tol) const {
  const auto& o = st_.ops();
  const long n12 = o.n1() + o.n2();
  if (F.head(n12).norm() > tol) return false;
  const long rest = F.size() - n12;
  return rest == 0 || F.tail(rest).cwiseAbs().maxCoeff() <= tol;
}

double SteadyProblem::norm(const State& s) const {
  Vec F;
  if (!eval(pack(s), F, nullptr)) return std::numeric_limits<double>::infinity();
  const auto& o = st_.ops();
  return F.head(o.n1() + o.n2()).norm() + (F.size() > static_cast<long>(o.n1() + o.n2()) ?
                                               F.tail(F.size() - o.n1() - o.n2()).cwiseAbs().maxCoeff() : 0.0);
}

namespace {

struct Attempt {
  bool ok = false;
  State state;
  double sigma = 0.0;
  NewtonStats stats;
  int pseudo_steps = 0;
};

Attempt newton_attempt(const TimeStepper& stepper, double t, const State& guess, bool anchor, double mass,
                       const NewtonSettings& ns) {
  SteadyProblem prob(stepper, t, anchor, mass);
  NewtonProblem np;
  np.eval = [&](const Vec& x, Vec& F, SpMat* J) { return prob.eval(x, F, J); };
  np.converged = [&](const Vec& F) { return prob.converged(F, ns.abs_tol); };
  np.merit = [](const Vec& F) { return F.norm(); };
  const long n12 = stepper.ops().n1() + stepper.ops().n2();
  np.measure = [&](const Vec& F, NewtonStats& st) {
    st.balance_residual = F.head(n12).norm();
    st.closure_residual = F.size() > n12 ? F.tail(F.size() - n12).cwiseAbs().maxCoeff() : 0.0;
  };
  Attempt a;
  Vec x = prob.pack(guess);
  Vec F0;
  if (prob.eval(x, F0, nullptr) && prob.converged(F0, ns.abs_tol)) {
    a.ok = true;
    a.state = guess;
    a.stats.converged = true;
    a.stats.residual = F0.norm();
    np.measure(F0, a.stats);
    return a;
  }
  LinearSolver lin;
  a.stats = newton_solve(np, x, ns, lin);
  a.ok = a.stats.converged;
  a.state = prob.unpack(x);
  a.sigma = prob.sigma(x);
  return a;
}

double default_pseudo_dt(const DiscreteOperators& ops, const State& s) {
  double hmin = std::numeric_limits<double>::infinity();
  for (const auto& el : ops.space().elements()) hmin = std::min(hmin, el.h());
  const Vec rho = ops.point_densities(s.a1);
  double cmax = 0.0;
  for (long i = 0; i < rho.size(); ++i) cmax = std::max(cmax, std::sqrt(ops.law().pressure().dp(rho[i])));
  return hmin / std::max(cmax, 1e-12);
}

Attempt pseudo_transient(const TimeStepper& stepper, double t, const State& guess, bool anchor, double mass,
                         const SteadyOptions& opts) {
  SteadyProblem prob(stepper, t, anchor, mass);
  Attempt a;
  State s = guess;
  double dt = opts.ptc_dt0 > 0 ? opts.ptc_dt0 : default_pseudo_dt(stepper.ops(), s);
  const double dt_min = dt * 1e-6;
  double r_prev = prob.norm(s);
  double r_last_try = r_prev;
  for (int n = 1; n <= opts.ptc_max_steps; ++n) {
    const auto res = stepper.step(s, t, dt);
    ++a.pseudo_steps;
    if (!res.stats.converged) {
      dt *= 0.25;
      if (dt < dt_min) break;
      continue;
    }
    s = res.state;
    const double r = prob.norm(s);
    dt *= std::clamp(1.5 * r_prev / std::max(r, 1e-300), 0.5, 4.0);
    r_prev = r;
    if (r < 1e-2 * r_last_try || n % 10 == 0) {
      r_last_try = r;
      Attempt na = newton_attempt(stepper, t, s, anchor, mass, opts.newton);
      if (na.ok) {
        na.pseudo_steps = a.pseudo_steps;
        return na;
      }
    }
  }
  a.state = s;
  return a;
}

std::vector<BoundaryCondition> frozen(const std::vector<BoundaryCondition>& bcs, double t, double theta,
                                      const DiscreteOperators& ops, double rho0) {
  std::vector<BoundaryCondition> out;
  for (const auto& bc : bcs) {
    const double u = evaluate(bc.signal, t);
    double flat = 0.0;
    switch (bc.type) {
      case BCType::Flow: flat = 0.0; break;
      case BCType::Effort: flat = ops.law().pressure().dP(rho0); break;
      case BCType::Density:
      case BCType::PressureOnlyDensity: flat = rho0; break;
    }
    out.push_back({bc.type, ConstantSignal{(1.0 - theta) * flat + theta * u}});
  }
  return out;
}

}  // namespace

SteadyResult solve_steady(std::shared_ptr<const DiscreteOperators> ops, const std::vector<BoundaryCondition>& bcs,
                          double t, const State& guess, const SteadyOptions& opts) {
  SteadyResult r;
  r.mass_anchor = all_flow(bcs);
  const double mass = ops->mass(guess.a1);
  const TimeStepper stepper(ops, frozen(bcs, t, 1.0, *ops, 1.0), opts.newton);

  auto finish = [&](const Attempt& a, SteadyStrategy s, const TimeStepper& st) {
    r.converged = a.ok;
    r.strategy = a.ok ? s : SteadyStrategy::Failed;
    r.state = a.state;
    r.stats = a.stats;
    r.pseudo_steps += a.pseudo_steps;
    r.mass_source = a.sigma;
    r.f = ops->K2().transpose() * a.state.a2;
    r.residual = SteadyProblem(st, t, r.mass_anchor, mass).norm(a.state);
    return r;
  };

  Attempt a = newton_attempt(stepper, t, guess, r.mass_anchor, mass, opts.newton);
  if (a.ok) return finish(a, SteadyStrategy::Newton, stepper);

  a = pseudo_transient(stepper, t, guess, r.mass_anchor, mass, opts);
  if (a.ok) return finish(a, SteadyStrategy::PseudoTransient, stepper);
  r.pseudo_steps += a.pseudo_steps;

  // Continuation from boundary data compatible with a constant state.
  const double rho0 = reference_density(*ops, bcs, t, ops->point_densities(guess.a1).mean());
  State s = flat_state(*ops, rho0);
  const int N = std::max(1, opts.homotopy_stages);
  for (int k = 1; k <= N; ++k) {
    const TimeStepper stage(ops, frozen(bcs, t, static_cast<double>(k) / N, *ops, rho0), opts.newton);
    const double stage_mass = ops->mass(s.a1);
    Attempt b = newton_attempt(stage, t, s, r.mass_anchor, r.mass_anchor ? mass : stage_mass, opts.newton);
    if (!b.ok) b = pseudo_transient(stage, t, s, r.mass_anchor, r.mass_anchor ? mass : stage_mass, opts);
    r.pseudo_steps += b.pseudo_steps;
    b.pseudo_steps = 0;
    if (!b.ok) return finish(b, SteadyStrategy::Failed, stage);
    s = b.state;
    if (k == N) return finish(b, SteadyStrategy::Homotopy, stepper);
  }
  return r;
}

SteadyResult solve_steady(const DiscreteOperators& ops, const std::vector<BoundaryCondition>& bcs, double t,
                          const State& guess, const SteadyOptions& opts) {
  // Non-owning handle; the caller keeps ops alive for the duration of the call.
  std::shared_ptr<const DiscreteOperators> h(std::shared_ptr<const DiscreteOperators>(), &ops);
  return solve_steady(h, bcs, t, guess, opts);
}

}  // namespace phnet
