#include "phnet/assembly.hpp"

#include <cmath>
#include <sstream>

#include "phnet/quadrature.hpp"

namespace phnet {

namespace {

struct KernelOut {
  double f0 = 0.0, f1 = 0.0;          // integrand = f0 * b2 + f1 * dx b2
  double f0_rho = 0.0, f0_m = 0.0;
  double f1_rho = 0.0, f1_m = 0.0;
};

using Triplets = std::vector<Eigen::Triplet<double>>;

SpMat from_triplets(std::size_t rows, std::size_t cols, const Triplets& t) {
  SpMat m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

}  // namespace

DiscreteOperators::DiscreteOperators(std::shared_ptr<const SpacePair> space, ConstitutiveLaw law,
                                     QuadratureSettings quad)
    : sp_(std::move(space)), law_(law) {
  const SpacePair& sp = *sp_;
  const int q = sp.q(), p = sp.v2_degree();
  const int min_exact = std::max(p, q) + 1;
  nexact_ = quad.exact_points > 0 ? quad.exact_points : min_exact;
  if (nexact_ < min_exact) {
    std::ostringstream os;
    os << "exact rule with " << nexact_ << " points cannot integrate the mass matrices; need at least "
       << min_exact;
    throw Error(os.str());
  }
  nred_ = quad.points_per_element > 0 ? quad.points_per_element : q + 2;
  if (nred_ < p + 1) {
    std::ostringstream os;
    os << "reduced rule with " << nred_ << " points per element makes the V2 Gram matrix singular; need at least "
       << p + 1;
    throw Error(os.str());
  }

  const std::size_t n1 = sp.n1(), nb = sp.n2_broken();
  const int np = p + 1, nq = q + 1;

  // Static matrices, exact rule.
  const Rule1D ex = gauss_legendre(nexact_);
  Mat m2ref = Mat::Zero(np, np), jref = Mat::Zero(nq, np);
  {
    std::vector<double> lv(nq), pv(np), pd(np);
    for (std::size_t g = 0; g < ex.size(); ++g) {
      sp.v1_basis(ex.x[g], lv.data());
      sp.v2_basis(ex.x[g], pv.data(), pd.data());
      for (int i = 0; i < np; ++i) {
        for (int j = 0; j < np; ++j) m2ref(i, j) += ex.w[g] * pv[i] * pv[j];
        for (int k = 0; k < nq; ++k) jref(k, i) -= ex.w[g] * lv[k] * pd[i];
      }
    }
  }
  M1d_.resize(n1);
  w1_ = Vec::Zero(n1);
  Triplets tm2, tj;
  for (std::size_t e = 0; e < sp.num_elements(); ++e) {
    const Element& el = sp.elements()[e];
    const double Ah = el.area * el.h();
    for (int k = 0; k < nq; ++k) M1d_[sp.v1_dof(e, k)] = Ah / (2.0 * k + 1.0);
    w1_[sp.v1_dof(e, 0)] = Ah;
    for (int i = 0; i < np; ++i) {
      for (int j = 0; j < np; ++j) tm2.emplace_back(sp.v2_broken_dof(e, i), sp.v2_broken_dof(e, j), 0.5 * Ah * m2ref(i, j));
      // (h/2) from dx and (2/h) from the derivative cancel.
      for (int k = 0; k < nq; ++k)
        if (jref(k, i) != 0.0) tj.emplace_back(sp.v1_dof(e, k), sp.v2_broken_dof(e, i), el.area * jref(k, i));
    }
  }
  M1_ = SpMat(n1, n1);
  {
    Triplets t;
    for (std::size_t i = 0; i < n1; ++i) t.emplace_back(i, i, M1d_[i]);
    M1_.setFromTriplets(t.begin(), t.end());
  }
  const SpMat& T = sp.T();
  const SpMat Tt = T.transpose();
  M2_ = Tt * from_triplets(nb, nb, tm2) * T;
  // The triple product can leave round-off asymmetry across junction rows.
  M2_ = 0.5 * (SpMat(M2_) + SpMat(M2_.transpose()));
  J_ = from_triplets(n1, nb, tj) * T;
  J_.prune(0.0);
  K2_ = sp.trace_map();
  B_ = M1d_.cwiseInverse().asDiagonal() * J_;
  M2_ldlt_.compute(M2_);

  // Reduced rule and cached reference basis values.
  const Rule1D red = gauss_legendre(nred_);
  ref_xi_ = red.x;
  phi1_.resize(nred_, nq);
  phi2_.resize(nred_, np);
  dphi2_.resize(nred_, np);
  {
    std::vector<double> lv(nq), pv(np), pd(np);
    for (int g = 0; g < nred_; ++g) {
      sp.v1_basis(red.x[g], lv.data());
      sp.v2_basis(red.x[g], pv.data(), pd.data());
      for (int k = 0; k < nq; ++k) phi1_(g, k) = lv[k];
      for (int i = 0; i < np; ++i) {
        phi2_(g, i) = pv[i];
        dphi2_(g, i) = pd[i];
      }
    }
  }
  pts_.reserve(sp.num_elements() * nred_);
  elem_diam_.resize(sp.num_elements());
  for (std::size_t e = 0; e < sp.num_elements(); ++e) {
    const Element& el = sp.elements()[e];
    elem_diam_[e] = sp.topology().edge(el.edge).friction_diameter();
    for (int g = 0; g < nred_; ++g) pts_.push_back({e, 0.5 * el.h() * el.area * red.w[g], g});
  }
}

EdgePoint DiscreteOperators::point_location(std::size_t i) const {
  const Element& el = sp_->elements()[pts_.at(i).elem];
  return {el.edge, el.x0 + 0.5 * (ref_xi_[pts_[i].ref] + 1.0) * el.h()};
}

Vec DiscreteOperators::point_densities(const Vec& a1) const {
  Vec rho(pts_.size());
  const int nq = sp_->q() + 1;
  for (std::size_t i = 0; i < pts_.size(); ++i) {
    double r = 0.0;
    for (int k = 0; k < nq; ++k) r += a1[sp_->v1_dof(pts_[i].elem, k)] * phi1_(pts_[i].ref, k);
    rho[i] = r;
  }
  return rho;
}

bool DiscreteOperators::admissible(const Vec& a1) const {
  const Vec rho = point_densities(a1);
  for (long i = 0; i < rho.size(); ++i)
    if (!law_.admissible(rho[i])) return false;
  return true;
}

PointStates DiscreteOperators::point_states(const Vec& a1, const Vec& a2) const {
  PointStates s;
  s.rho = point_densities(a1);
  const Vec b = sp_->T() * a2;
  s.m.resize(pts_.size());
  const int np = sp_->v2_degree() + 1;
  for (std::size_t i = 0; i < pts_.size(); ++i) {
    double m = 0.0;
    for (int j = 0; j < np; ++j) m += b[sp_->v2_broken_dof(pts_[i].elem, j)] * phi2_(pts_[i].ref, j);
    s.m[i] = m;
    if (!law_.admissible(s.rho[i])) {
      const EdgePoint loc = point_location(i);
      std::ostringstream os;
      os.precision(17);
      os << "inadmissible density " << s.rho[i] << " at quadrature point " << i << " (edge '"
         << sp_->topology().edge(loc.edge).id << "', x = " << loc.x << ")";
      throw DomainError(os.str());
    }
  }
  return s;
}

template <class Kernel>
void DiscreteOperators::accumulate(const Vec& a1, const Vec& a2, Kernel&& kernel, Vec* out,
                                   FormJacobian* jac) const {
  const SpacePair& sp = *sp_;
  const PointStates st = point_states(a1, a2);
  const int np = sp.v2_degree() + 1, nq = sp.q() + 1;
  const std::size_t nb = sp.n2_broken();
  Vec Fb = Vec::Zero(nb);
  Triplets t1, t2;
  if (jac) {
    t1.reserve(sp.num_elements() * np * nq);
    t2.reserve(sp.num_elements() * np * np);
  }
  Vec fl(np);
  Mat j1(np, nq), j2(np, np);
  for (std::size_t e = 0; e < sp.num_elements(); ++e) {
    const double dx = 2.0 / sp.elements()[e].h();
    fl.setZero();
    if (jac) {
      j1.setZero();
      j2.setZero();
    }
    for (int g = 0; g < nred_; ++g) {
      const std::size_t ip = e * nred_ + g;
      const double W = pts_[ip].w;
      const KernelOut k = kernel(st.rho[ip], st.m[ip], elem_diam_[e]);
      for (int i = 0; i < np; ++i) {
        const double b = phi2_(g, i), db = dphi2_(g, i) * dx;
        fl[i] += W * (k.f0 * b + k.f1 * db);
        if (jac) {
          const double ri = W * (k.f0_rho * b + k.f1_rho * db);
          const double mi = W * (k.f0_m * b + k.f1_m * db);
          for (int kk = 0; kk < nq; ++kk) j1(i, kk) += ri * phi1_(g, kk);
          for (int j = 0; j < np; ++j) j2(i, j) += mi * phi2_(g, j);
        }
      }
    }
    for (int i = 0; i < np; ++i) {
      const std::size_t di = sp.v2_broken_dof(e, i);
      Fb[di] += fl[i];
      if (jac) {
        for (int kk = 0; kk < nq; ++kk) t1.emplace_back(di, sp.v1_dof(e, kk), j1(i, kk));
        for (int j = 0; j < np; ++j) t2.emplace_back(di, sp.v2_broken_dof(e, j), j2(i, j));
      }
    }
  }
  const SpMat& T = sp.T();
  if (out) *out = T.transpose() * Fb;
  if (jac) {
    const SpMat Tt = T.transpose();
    jac->d_a1 = Tt * from_triplets(nb, sp.n1(), t1);
    jac->d_a2 = Tt * from_triplets(nb, nb, t2) * T;
  }
}

namespace {

KernelOut n2_kernel(double rho, double m) {
  KernelOut k;
  k.f0 = m / rho;
  k.f0_rho = -m / (rho * rho);
  k.f0_m = 1.0 / rho;
  return k;
}

KernelOut c1_kernel(const PressureLaw& P, double rho, double m) {
  KernelOut k;
  const double v = m / rho;
  k.f1 = P.dP(rho) + 0.5 * v * v;
  k.f1_rho = P.d2P(rho) - v * v / rho;
  k.f1_m = v / rho;
  return k;
}

KernelOut ra2_kernel(double lambda, double rho, double m, double D) {
  KernelOut k;
  const double c = lambda / (2.0 * D * rho * rho);
  k.f0 = c * std::abs(m) * m;
  k.f0_rho = -2.0 * k.f0 / rho;
  k.f0_m = 2.0 * c * std::abs(m);
  return k;
}

}  // namespace

Vec DiscreteOperators::n2_vec(const Vec& a1, const Vec& a2) const {
  Vec out;
  accumulate(a1, a2, [](double r, double m, double) { return n2_kernel(r, m); }, &out, nullptr);
  return out;
}

Vec DiscreteOperators::c1_vec(const Vec& a1, const Vec& a2) const {
  Vec out;
  const PressureLaw& P = law_.pressure();
  accumulate(a1, a2, [&](double r, double m, double) { return c1_kernel(P, r, m); }, &out, nullptr);
  return out;
}

FormJacobian DiscreteOperators::jacobian_n2(const Vec& a1, const Vec& a2) const {
  FormJacobian j;
  accumulate(a1, a2, [](double r, double m, double) { return n2_kernel(r, m); }, nullptr, &j);
  return j;
}

FormJacobian DiscreteOperators::jacobian_c1(const Vec& a1, const Vec& a2) const {
  FormJacobian j;
  const PressureLaw& P = law_.pressure();
  accumulate(a1, a2, [&](double r, double m, double) { return c1_kernel(P, r, m); }, nullptr, &j);
  return j;
}

FormJacobian DiscreteOperators::jacobian_Ra2(const Vec& a1, const Vec& a2) const {
  FormJacobian j;
  const double lam = law_.lambda();
  accumulate(a1, a2, [&](double r, double m, double D) { return ra2_kernel(lam, r, m, D); }, nullptr, &j);
  return j;
}

FormValue DiscreteOperators::combined(const Vec& a1, const Vec& a2, double cn, double cc, double cr,
                                      bool with_jacobian) const {
  FormValue fv;
  const PressureLaw& P = law_.pressure();
  const double lam = law_.lambda();
  auto kernel = [&](double r, double m, double D) {
    const KernelOut a = n2_kernel(r, m), b = c1_kernel(P, r, m);
    KernelOut k;
    k.f1 = cc * b.f1;
    k.f1_rho = cc * b.f1_rho;
    k.f1_m = cc * b.f1_m;
    k.f0 = cn * a.f0;
    k.f0_rho = cn * a.f0_rho;
    k.f0_m = cn * a.f0_m;
    if (lam != 0.0 && cr != 0.0) {
      const KernelOut c = ra2_kernel(lam, r, m, D);
      k.f0 += cr * c.f0;
      k.f0_rho += cr * c.f0_rho;
      k.f0_m += cr * c.f0_m;
    }
    return k;
  };
  accumulate(a1, a2, kernel, &fv.value, with_jacobian ? &fv.jac : nullptr);
  return fv;
}

Vec DiscreteOperators::R_apply(const Vec& a1, const Vec& a2, const Vec& w) const {
  const SpacePair& sp = *sp_;
  const PointStates st = point_states(a1, a2);
  const Vec wb = sp.T() * w;
  const int np = sp.v2_degree() + 1;
  Vec Fb = Vec::Zero(sp.n2_broken());
  for (std::size_t ip = 0; ip < pts_.size(); ++ip) {
    const std::size_t e = pts_[ip].elem;
    const int g = pts_[ip].ref;
    double wv = 0.0;
    for (int j = 0; j < np; ++j) wv += wb[sp.v2_broken_dof(e, j)] * phi2_(g, j);
    const double r = law_.friction_r(st.rho[ip], st.m[ip], elem_diam_[e]);
    for (int i = 0; i < np; ++i) Fb[sp.v2_broken_dof(e, i)] += pts_[ip].w * r * wv * phi2_(g, i);
  }
  return sp.T().transpose() * Fb;
}

SpMat DiscreteOperators::R_matrix(const Vec& a1, const Vec& a2) const {
  const SpacePair& sp = *sp_;
  const PointStates st = point_states(a1, a2);
  const int np = sp.v2_degree() + 1;
  Triplets t;
  for (std::size_t ip = 0; ip < pts_.size(); ++ip) {
    const std::size_t e = pts_[ip].elem;
    const int g = pts_[ip].ref;
    const double r = law_.friction_r(st.rho[ip], st.m[ip], elem_diam_[e]);
    for (int i = 0; i < np; ++i)
      for (int j = 0; j < np; ++j)
        t.emplace_back(sp.v2_broken_dof(e, i), sp.v2_broken_dof(e, j), pts_[ip].w * r * phi2_(g, i) * phi2_(g, j));
  }
  const SpMat Tt = sp.T().transpose();
  return Tt * from_triplets(sp.n2_broken(), sp.n2_broken(), t) * sp.T();
}

double DiscreteOperators::G_c(const Vec& a1, const Vec& a2) const {
  const PointStates st = point_states(a1, a2);
  double s = 0.0;
  for (std::size_t i = 0; i < pts_.size(); ++i) s += pts_[i].w * law_.g(st.rho[i], st.m[i]);
  return s;
}

double DiscreteOperators::H_c(const Vec& a1, const Vec& a2) const {
  const PointStates st = point_states(a1, a2);
  double s = 0.0;
  for (std::size_t i = 0; i < pts_.size(); ++i) s += pts_[i].w * law_.hamiltonian_density_a(st.rho[i], st.m[i]);
  return s;
}

double DiscreteOperators::H_drop(const Vec& a1_prev, const Vec& a2_prev, const Vec& a1, const Vec& a2) const {
  const PointStates s0 = point_states(a1_prev, a2_prev);
  const PointStates s1 = point_states(a1, a2);
  const Vec drho = point_densities(a1 - a1_prev);
  const PressureLaw& P = law_.pressure();
  double drop = 0.0;
  for (std::size_t i = 0; i < pts_.size(); ++i) {
    const double r0 = s0.rho[i], r1 = s1.rho[i];
    const double m0 = s0.m[i], m1 = s1.m[i];
    const double dr = drho[i], dm = m1 - m0;
    const double dkin = (dm * (m1 + m0) * r0 - m0 * m0 * dr) / (2.0 * r0 * r1);
    drop -= pts_[i].w * (dkin + P.P_difference(r0, dr));
  }
  return drop;
}

Vec DiscreteOperators::to_standard_ph_coordinates(const Vec& a1, const Vec& a2) const {
  Vec z(n1() + n2());
  z.head(n1()) = a1;
  z.tail(n2()) = M2_ldlt_.solve(n2_vec(a1, a2));
  return z;
}

SpMat DiscreteOperators::reduced_gram_v1() const {
  const int nq = sp_->q() + 1;
  Triplets t;
  for (const auto& pt : pts_)
    for (int i = 0; i < nq; ++i)
      for (int j = 0; j < nq; ++j)
        t.emplace_back(sp_->v1_dof(pt.elem, i), sp_->v1_dof(pt.elem, j), pt.w * phi1_(pt.ref, i) * phi1_(pt.ref, j));
  return from_triplets(n1(), n1(), t);
}

SpMat DiscreteOperators::reduced_gram_v2() const {
  const int np = sp_->v2_degree() + 1;
  Triplets t;
  for (const auto& pt : pts_)
    for (int i = 0; i < np; ++i)
      for (int j = 0; j < np; ++j)
        t.emplace_back(sp_->v2_broken_dof(pt.elem, i), sp_->v2_broken_dof(pt.elem, j),
                       pt.w * phi2_(pt.ref, i) * phi2_(pt.ref, j));
  const SpMat Tt = sp_->T().transpose();
  return Tt * from_triplets(sp_->n2_broken(), sp_->n2_broken(), t) * sp_->T();
}

}  // namespace phnet
