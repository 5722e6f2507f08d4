#include "phnet/timestepper.hpp"

#include <algorithm>
#include <cmath>

namespace phnet {

namespace {

void append_block(std::vector<Eigen::Triplet<double>>& t, const SpMat& M, long r0, long c0) {
  for (int k = 0; k < M.outerSize(); ++k)
    for (SpMat::InnerIterator it(M, k); it; ++it) t.emplace_back(r0 + it.row(), c0 + it.col(), it.value());
}

}  // namespace

SpMat block2x2(const SpMat& A, const SpMat& B, const SpMat& C, const SpMat& D) {
  const long r0 = std::max(A.rows(), B.rows()), c0 = std::max(A.cols(), C.cols());
  const long r1 = std::max(C.rows(), D.rows()), c1 = std::max(B.cols(), D.cols());
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(A.nonZeros() + B.nonZeros() + C.nonZeros() + D.nonZeros());
  append_block(t, A, 0, 0);
  append_block(t, B, 0, c0);
  append_block(t, C, r0, 0);
  append_block(t, D, r0, c0);
  SpMat M(r0 + r1, c0 + c1);
  M.setFromTriplets(t.begin(), t.end());
  return M;
}

bool LinearSolver::factorize(const SpMat& A) {
  SpMat M = A;
  M.makeCompressed();
  const bool same = analyzed_ && static_cast<std::size_t>(M.outerSize() + 1) == outer_.size() &&
                    static_cast<std::size_t>(M.nonZeros()) == inner_.size() &&
                    std::equal(outer_.begin(), outer_.end(), M.outerIndexPtr()) &&
                    std::equal(inner_.begin(), inner_.end(), M.innerIndexPtr());
  if (!same) {
    lu_.analyzePattern(M);
    outer_.assign(M.outerIndexPtr(), M.outerIndexPtr() + M.outerSize() + 1);
    inner_.assign(M.innerIndexPtr(), M.innerIndexPtr() + M.nonZeros());
    analyzed_ = true;
  }
  lu_.factorize(M);
  return lu_.info() == Eigen::Success;
}

NewtonStats newton_solve(const NewtonProblem& prob, Vec& y, const NewtonSettings& s, LinearSolver& lin) {
  NewtonStats st;
  Vec F;
  SpMat J;
  if (!prob.eval(y, F, &J)) {
    st.message = "initial iterate is inadmissible";
    return st;
  }
  double merit = prob.merit(F);
  for (int it = 1; it <= s.max_iter; ++it) {
    if (!F.allFinite()) {
      st.message = "non-finite residual";
      break;
    }
    if (!lin.factorize(J)) {
      st.message = "singular Jacobian";
      break;
    }
    const Vec delta = lin.solve(-F);
    if (!delta.allFinite()) {
      st.message = "non-finite Newton update";
      break;
    }
    double alpha = 1.0;
    bool accepted = false, any = false;
    Vec y_try, F_try, y_last, F_last;
    for (int h = 0; h <= s.max_halvings; ++h) {
      y_try = y + alpha * delta;
      if (prob.eval(y_try, F_try, nullptr) && F_try.allFinite()) {
        any = true;
        y_last = y_try;
        F_last = F_try;
        const double m = prob.merit(F_try);
        if (m < merit || m == 0.0) {
          accepted = true;
          break;
        }
      }
      if (h < s.max_halvings) {
        alpha *= s.backtrack;
        ++st.halvings;
      }
    }
    if (!accepted && !any) {
      st.message = "no admissible step within the line search";
      st.iterations = it;
      break;
    }
    y = accepted ? y_try : y_last;
    prob.eval(y, F, &J);
    merit = prob.merit(F);
    st.iterations = it;
    if (prob.converged(F)) {
      st.converged = true;
      break;
    }
  }
  st.residual = merit;
  if (prob.measure) prob.measure(F, st);
  if (!st.converged && st.message.empty()) st.message = "maximum iterations reached";
  return st;
}

bool all_flow(const std::vector<BoundaryCondition>& bcs) {
  return std::all_of(bcs.begin(), bcs.end(), [](const BoundaryCondition& b) { return b.type == BCType::Flow; });
}

TimeStepper::TimeStepper(std::shared_ptr<const DiscreteOperators> ops, std::vector<BoundaryCondition> bcs,
                         NewtonSettings newton)
    : ops_(std::move(ops)), bcs_(std::move(bcs)), newton_(newton) {
  if (bcs_.size() != ops_->num_ports())
    throw Error("expected " + std::to_string(ops_->num_ports()) + " boundary conditions, got " +
                std::to_string(bcs_.size()));
  const auto& topo = ops_->space().topology();
  for (std::size_t i = 0; i < bcs_.size(); ++i) port_area_.push_back(topo.edge(topo.boundary_edge(i).edge).area);
}

Vec TimeStepper::closure(const Vec& e, const Vec& f, double t, SpMat* dk_de, SpMat* dk_df) const {
  const std::size_t p = bcs_.size();
  Vec k(p);
  std::vector<Eigen::Triplet<double>> te, tf;
  for (std::size_t i = 0; i < p; ++i) {
    const ClosureRow r = closure_row(bcs_[i], ops_->law(), port_area_[i], e[i], f[i], t);
    k[i] = r.k;
    te.emplace_back(i, i, r.dk_de);
    tf.emplace_back(i, i, r.dk_df);
  }
  if (dk_de) {
    dk_de->resize(p, p);
    dk_de->setFromTriplets(te.begin(), te.end());
  }
  if (dk_df) {
    dk_df->resize(p, p);
    dk_df->setFromTriplets(tf.begin(), tf.end());
  }
  return k;
}

Vec TimeStepper::full_residual(const State& prev, const State& x, double t, double dt) const {
  const DiscreteOperators& o = *ops_;
  const std::size_t n1 = o.n1(), n2 = o.n2(), p = o.num_ports();
  Vec F(n1 + n2 + p);
  F.head(n1) = o.M1() * (x.a1 - prev.a1) - dt * (o.J() * x.a2);
  const FormValue fv = o.combined(x.a1, x.a2, 1.0, -dt, dt, false);
  F.segment(n1, n2) = fv.value - o.n2_vec(prev.a1, prev.a2) - dt * (o.K2() * x.e);
  F.tail(p) = closure(x.e, o.K2().transpose() * x.a2, t);
  return F;
}

SpMat TimeStepper::full_jacobian(const State&, const State& x, double t, double dt) const {
  const DiscreteOperators& o = *ops_;
  const long n1 = o.n1(), n2 = o.n2(), p = o.num_ports();
  const FormValue fv = o.combined(x.a1, x.a2, 1.0, -dt, dt, true);
  SpMat dk_de, dk_df;
  const SpMat Kt = o.K2().transpose();
  closure(x.e, Kt * x.a2, t, &dk_de, &dk_df);
  std::vector<Eigen::Triplet<double>> trip;
  append_block(trip, o.M1(), 0, 0);
  append_block(trip, SpMat(-dt * o.J()), 0, n1);
  append_block(trip, fv.jac.d_a1, n1, 0);
  append_block(trip, fv.jac.d_a2, n1, n1);
  append_block(trip, SpMat(-dt * o.K2()), n1, n1 + n2);
  append_block(trip, SpMat(dk_df * Kt), n1 + n2, n1);
  append_block(trip, dk_de, n1 + n2, n1 + n2);
  SpMat Jm(n1 + n2 + p, n1 + n2 + p);
  Jm.setFromTriplets(trip.begin(), trip.end());
  return Jm;
}

Vec TimeStepper::reduced_residual(const State& prev, const Vec& y, double t, double dt, SpMat* jac) const {
  const DiscreteOperators& o = *ops_;
  const std::size_t n2 = o.n2(), p = o.num_ports();
  const Vec a2 = y.head(n2), e = y.tail(p);
  const Vec a1 = a1_from(prev.a1, a2, dt);
  const FormValue fv = o.combined(a1, a2, 1.0, -dt, dt, jac != nullptr);
  Vec F(n2 + p);
  F.head(n2) = fv.value - o.n2_vec(prev.a1, prev.a2) - dt * (o.K2() * e);
  const Vec f = o.K2().transpose() * a2;
  SpMat dk_de, dk_df;
  F.tail(p) = closure(e, f, t, jac ? &dk_de : nullptr, jac ? &dk_df : nullptr);
  if (jac) {
    const SpMat A = fv.jac.d_a2 + dt * (fv.jac.d_a1 * o.B());
    *jac = block2x2(A, SpMat(-dt * o.K2()), SpMat(dk_df * o.K2().transpose()), dk_de);
  }
  return F;
}

TimeStepper::Result TimeStepper::step(const State& prev, double t_k, double dt) const {
  const DiscreteOperators& o = *ops_;
  const std::size_t n2 = o.n2(), p = o.num_ports();
  const Vec n2_prev = o.n2_vec(prev.a1, prev.a2);
  const SpMat Kt = o.K2().transpose();
  const SpMat mdtK = -dt * o.K2();

  NewtonProblem prob;
  prob.eval = [&](const Vec& y, Vec& F, SpMat* jac) {
    const Vec a2 = y.head(n2), e = y.tail(p);
    const Vec a1 = a1_from(prev.a1, a2, dt);
    if (!o.admissible(a1)) return false;
    const FormValue fv = o.combined(a1, a2, 1.0, -dt, dt, jac != nullptr);
    F.resize(n2 + p);
    F.head(n2) = fv.value - n2_prev - dt * (o.K2() * e);
    SpMat dk_de, dk_df;
    F.tail(p) = closure(e, Kt * a2, t_k, jac ? &dk_de : nullptr, jac ? &dk_df : nullptr);
    if (jac) {
      const SpMat A = fv.jac.d_a2 + dt * (fv.jac.d_a1 * o.B());
      *jac = block2x2(A, mdtK, SpMat(dk_df * Kt), dk_de);
    }
    return true;
  };
  const double tol = newton_.abs_tol;
  prob.converged = [&](const Vec& F) {
    return F.head(n2).norm() <= tol && (p == 0 || F.tail(p).cwiseAbs().maxCoeff() <= tol);
  };
  prob.merit = [&](const Vec& F) { return F.norm(); };
  prob.measure = [&](const Vec& F, NewtonStats& st) {
    st.balance_residual = F.head(n2).norm();
    st.closure_residual = p == 0 ? 0.0 : F.tail(p).cwiseAbs().maxCoeff();
  };

  Vec y(n2 + p);
  y.head(n2) = prev.a2;
  y.tail(p) = prev.e;
  Result r;
  r.stats = newton_solve(prob, y, newton_, lin_);
  r.state.a2 = y.head(n2);
  r.state.e = y.tail(p);
  r.state.a1 = a1_from(prev.a1, r.state.a2, dt);
  r.f = Kt * r.state.a2;
  return r;
}

}  // namespace phnet
