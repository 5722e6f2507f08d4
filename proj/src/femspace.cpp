#include "phnet/femspace.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "phnet/quadrature.hpp"

namespace phnet {

Partition uniform_partition(const NetworkTopology& topology) {
  Partition p;
  for (const Edge& e : topology.edges()) {
    std::vector<double> bp(e.num_elements + 1);
    for (int j = 0; j <= e.num_elements; ++j) bp[j] = e.length * j / e.num_elements;
    bp.back() = e.length;
    p.breakpoints.push_back(std::move(bp));
  }
  return p;
}

int elements_for_cap(double length, double dx_max) {
  if (!(dx_max > 0.0)) throw NetworkError("dx cap must be positive");
  // Tolerate round-off in length / dx.
  const double ratio = length / dx_max;
  int n = static_cast<int>(std::ceil(ratio * (1.0 - 1e-12)));
  return std::max(1, n);
}

NetworkTopology with_dx_cap(const NetworkTopology& topology, double dx_max) {
  std::vector<Edge> edges = topology.edges();
  for (Edge& e : edges) e.num_elements = elements_for_cap(e.length, dx_max);
  return NetworkTopology(topology.nodes(), std::move(edges));
}

SpacePair::SpacePair(const NetworkTopology& topology, const Partition& partition, int q, int v2_degree)
    : topo_(topology), q_(q), p_(v2_degree < 0 ? q + 1 : v2_degree) {
  if (q_ < 0) throw NetworkError("polynomial degree q must be non-negative");
  if (p_ < 1) throw NetworkError("V2 degree must be at least 1");
  if (p_ > q_ + 1) throw NetworkError("V2 degree may not exceed q + 1");
  if (partition.breakpoints.size() != topo_.num_edges())
    throw NetworkError("partition does not match the number of edges");

  edge_elem_.reserve(topo_.num_edges() + 1);
  edge_dof_.reserve(topo_.num_edges() + 1);
  for (std::size_t k = 0; k < topo_.num_edges(); ++k) {
    const Edge& e = topo_.edge(k);
    const auto& bp = partition.breakpoints[k];
    if (bp.size() < 2) throw NetworkError("edge '" + e.id + "': degenerate partition");
    if (static_cast<int>(bp.size()) - 1 != e.num_elements)
      throw NetworkError("edge '" + e.id + "': partition element count differs from num_elements");
    if (bp.front() != 0.0 || std::abs(bp.back() - e.length) > 1e-12 * e.length)
      throw NetworkError("edge '" + e.id + "': partition does not span the edge");
    edge_elem_.push_back(elements_.size());
    edge_dof_.push_back(n2b_);
    for (std::size_t j = 0; j + 1 < bp.size(); ++j) {
      if (!(bp[j + 1] > bp[j])) throw NetworkError("edge '" + e.id + "': breakpoints not increasing");
      elements_.push_back({k, bp[j], bp[j + 1], e.area});
      elem_local_.push_back(j);
    }
    n2b_ += (bp.size() - 1) * p_ + 1;
  }
  edge_elem_.push_back(elements_.size());
  edge_dof_.push_back(n2b_);
  n1_ = elements_.size() * (q_ + 1);
  gll_ = gauss_lobatto(p_ + 1).x;

  // One eliminated endpoint per interior node: the lowest-index adjacent edge.
  std::vector<char> eliminated(n2b_, 0);
  for (std::size_t nu : topo_.interior_nodes()) {
    const auto& adj = topo_.adjacent_edges(nu);
    if (adj.empty()) continue;
    auto dof_at = [&](const EdgeIncidence& inc) { return edge_end_dof(inc.edge, inc.sign > 0 ? 0 : 1); };
    JunctionConstraint c;
    c.node = nu;
    c.eliminated = dof_at(adj.front());
    for (std::size_t i = 1; i < adj.size(); ++i)
      c.terms.emplace_back(dof_at(adj[i]), -adj[i].weight / adj.front().weight);
    eliminated[c.eliminated] = 1;
    constraints_.push_back(std::move(c));
  }
  free_index_.assign(n2b_, -1);
  for (std::size_t i = 0; i < n2b_; ++i)
    if (!eliminated[i]) free_index_[i] = static_cast<long>(n2_++);

  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t i = 0; i < n2b_; ++i)
    if (free_index_[i] >= 0) trip.emplace_back(i, free_index_[i], 1.0);
  for (const auto& c : constraints_)
    for (auto [dof, coef] : c.terms) trip.emplace_back(c.eliminated, free_index_.at(dof), coef);
  T_.resize(n2b_, n2_);
  T_.setFromTriplets(trip.begin(), trip.end());
}

std::size_t SpacePair::v2_broken_dof(std::size_t elem, int node) const {
  return edge_dof_[elements_[elem].edge] + elem_local_[elem] * p_ + node;
}

std::size_t SpacePair::edge_end_dof(std::size_t edge, int end) const {
  return end == 0 ? edge_dof_.at(edge) : edge_dof_.at(edge + 1) - 1;
}

void SpacePair::v1_basis(double xi, double* vals) const { legendre_all(q_, xi, vals); }

void SpacePair::v2_basis(double xi, double* vals, double* dvals) const {
  lagrange_all(gll_, xi, vals, dvals);
}

std::pair<std::size_t, double> SpacePair::locate(const EdgePoint& pt) const {
  if (pt.edge >= topo_.num_edges()) throw NetworkError("point on unknown edge");
  const double len = topo_.edge(pt.edge).length;
  const double tol = 1e-12 * len;
  if (pt.x < -tol || pt.x > len + tol) throw NetworkError("point off edge '" + topo_.edge(pt.edge).id + "'");
  const std::size_t first = edge_elem_[pt.edge], last = edge_elem_[pt.edge + 1];
  auto it = std::upper_bound(elements_.begin() + first, elements_.begin() + last, pt.x,
                             [](double x, const Element& el) { return x < el.x1; });
  std::size_t e = it == elements_.begin() + last ? last - 1 : static_cast<std::size_t>(it - elements_.begin());
  const Element& el = elements_[e];
  const double xi = std::clamp(2.0 * (pt.x - el.x0) / el.h() - 1.0, -1.0, 1.0);
  return {e, xi};
}

SpMat SpacePair::derivative_matrix_broken() const {
  // Per element, d/dx phi_i = (2/h) phi_i'(xi) has degree p-1 <= q, so the
  // L2 projection onto Q_q reproduces it:
  // D_{(e,k),i} = (2k+1)/h * int phi_i'(xi) P_k(xi) dxi.
  const auto rule = gauss_legendre(std::max(p_, q_) + 1);
  const int nb = p_ + 1;
  Mat ref = Mat::Zero(q_ + 1, nb);
  std::vector<double> lv(q_ + 1), pv(nb), pd(nb);
  for (std::size_t g = 0; g < rule.size(); ++g) {
    v1_basis(rule.x[g], lv.data());
    v2_basis(rule.x[g], pv.data(), pd.data());
    for (int k = 0; k <= q_; ++k)
      for (int i = 0; i < nb; ++i) ref(k, i) += rule.w[g] * lv[k] * pd[i];
  }
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t e = 0; e < elements_.size(); ++e) {
    const double h = elements_[e].h();
    for (int k = 0; k <= q_; ++k)
      for (int i = 0; i < nb; ++i)
        if (ref(k, i) != 0.0) trip.emplace_back(v1_dof(e, k), v2_broken_dof(e, i), (2.0 * k + 1.0) / h * ref(k, i));
  }
  SpMat D(n1_, n2b_);
  D.setFromTriplets(trip.begin(), trip.end());
  return D;
}

SpMat SpacePair::derivative_matrix() const {
  SpMat D = derivative_matrix_broken() * T_;
  D.prune(0.0);
  return D;
}

SpMat SpacePair::trace_map_broken() const {
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t i = 0; i < topo_.num_ports(); ++i) {
    const auto& inc = topo_.boundary_edge(i);
    trip.emplace_back(edge_end_dof(inc.edge, inc.sign > 0 ? 0 : 1), i, inc.weight);
  }
  SpMat K(n2b_, topo_.num_ports());
  K.setFromTriplets(trip.begin(), trip.end());
  return K;
}

SpMat SpacePair::trace_map() const {
  SpMat K = SpMat(T_.transpose()) * trace_map_broken();
  K.prune(0.0);
  return K;
}

double SpacePair::eval_v1(const Vec& a1, const EdgePoint& pt) const {
  auto [e, xi] = locate(pt);
  std::vector<double> lv(q_ + 1);
  v1_basis(xi, lv.data());
  double s = 0.0;
  for (int k = 0; k <= q_; ++k) s += a1[v1_dof(e, k)] * lv[k];
  return s;
}

double SpacePair::eval_v2(const Vec& a2, const EdgePoint& pt) const {
  return eval_v2_broken(T_ * a2, pt);
}

double SpacePair::eval_v2_dx(const Vec& a2, const EdgePoint& pt) const {
  return eval_v2_dx_broken(T_ * a2, pt);
}

double SpacePair::eval_v2_broken(const Vec& b, const EdgePoint& pt) const {
  auto [e, xi] = locate(pt);
  std::vector<double> pv(p_ + 1);
  v2_basis(xi, pv.data());
  double s = 0.0;
  for (int i = 0; i <= p_; ++i) s += b[v2_broken_dof(e, i)] * pv[i];
  return s;
}

double SpacePair::eval_v2_dx_broken(const Vec& b, const EdgePoint& pt) const {
  auto [e, xi] = locate(pt);
  std::vector<double> pv(p_ + 1), pd(p_ + 1);
  v2_basis(xi, pv.data(), pd.data());
  double s = 0.0;
  for (int i = 0; i <= p_; ++i) s += b[v2_broken_dof(e, i)] * pd[i];
  return s * 2.0 / elements_[e].h();
}

std::vector<std::array<double, 2>> SpacePair::evaluate(const Vec& a1, const Vec& a2,
                                                       const std::vector<EdgePoint>& pts) const {
  const Vec b = T_ * a2;
  std::vector<std::array<double, 2>> out;
  out.reserve(pts.size());
  for (const auto& pt : pts) out.push_back({eval_v1(a1, pt), eval_v2_broken(b, pt)});
  return out;
}

Vec SpacePair::project_v1(const std::function<double(std::size_t, double)>& f) const {
  const auto rule = gauss_legendre(std::max(q_ + 4, 8));
  Vec a = Vec::Zero(n1_);
  std::vector<double> lv(q_ + 1);
  for (std::size_t e = 0; e < elements_.size(); ++e) {
    const Element& el = elements_[e];
    for (std::size_t g = 0; g < rule.size(); ++g) {
      const double x = el.x0 + 0.5 * (rule.x[g] + 1.0) * el.h();
      const double fx = f(el.edge, x);
      v1_basis(rule.x[g], lv.data());
      for (int k = 0; k <= q_; ++k) a[v1_dof(e, k)] += 0.5 * rule.w[g] * (2.0 * k + 1.0) * fx * lv[k];
    }
  }
  return a;
}

Vec SpacePair::interpolate_v2_broken(const std::function<double(std::size_t, double)>& f) const {
  Vec b(n2b_);
  for (std::size_t e = 0; e < elements_.size(); ++e) {
    const Element& el = elements_[e];
    for (int i = 0; i <= p_; ++i) b[v2_broken_dof(e, i)] = f(el.edge, el.x0 + 0.5 * (gll_[i] + 1.0) * el.h());
    b[v2_broken_dof(e, p_)] = f(el.edge, el.x1);
  }
  return b;
}

Vec SpacePair::restrict_v2(const Vec& broken) const {
  Vec c(n2_);
  for (std::size_t i = 0; i < n2b_; ++i)
    if (free_index_[i] >= 0) c[free_index_[i]] = broken[i];
  return c;
}

Vec SpacePair::interpolate_v2(const std::function<double(std::size_t, double)>& f) const {
  return restrict_v2(interpolate_v2_broken(f));
}

CompatibilityReport check_compatibility(const SpacePair& sp) {
  CompatibilityReport r;
  r.n1 = sp.n1();
  r.n2 = sp.n2();
  const SpMat D = sp.derivative_matrix();
  Eigen::ColPivHouseholderQR<Mat> qr{Mat(D)};
  qr.setThreshold(1e-10);
  r.rank_D = qr.rank();
  r.a1 = r.rank_D == r.n1;

  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Vec c = Vec::NullaryExpr(sp.n2(), [&] { return U(rng); });
  const Vec b = sp.T() * c;
  const Vec dc = D * c;
  for (std::size_t e = 0; e < sp.num_elements(); ++e) {
    const Element& el = sp.elements()[e];
    for (double s : {-0.83, -0.2, 0.37, 0.91}) {
      EdgePoint pt{el.edge, el.x0 + 0.5 * (s + 1.0) * el.h()};
      const double exact = sp.eval_v2_dx_broken(b, pt);
      r.derivative_error = std::max(r.derivative_error, std::abs(exact - sp.eval_v1(dc, pt)) /
                                                            std::max(1.0, std::abs(exact)));
    }
  }
  const auto& topo = sp.topology();
  for (std::size_t nu : topo.interior_nodes()) {
    double s = 0.0, scale = 0.0;
    for (const auto& inc : topo.adjacent_edges(nu)) {
      const double v = b[sp.edge_end_dof(inc.edge, inc.sign > 0 ? 0 : 1)];
      s += inc.weight * v;
      scale += std::abs(inc.weight * v);
    }
    r.constraint_error = std::max(r.constraint_error, std::abs(s) / std::max(1.0, scale));
  }

  // Edgewise constants whose signed area sums vanish at every interior node.
  const auto& interior = topo.interior_nodes();
  const std::size_t ne = topo.num_edges();
  Mat kernel;
  if (interior.empty()) {
    kernel = Mat::Identity(ne, ne);
  } else {
    Mat C = Mat::Zero(interior.size(), ne);
    for (std::size_t i = 0; i < interior.size(); ++i)
      for (const auto& inc : topo.adjacent_edges(interior[i])) C(i, inc.edge) += inc.weight;
    Eigen::FullPivLU<Mat> lu(C);
    kernel = lu.kernel();
    if (lu.rank() == static_cast<long>(ne)) kernel.resize(ne, 0);
  }
  r.kernel_dim = kernel.cols();
  for (long j = 0; j < kernel.cols(); ++j) {
    Vec k = kernel.col(j) / kernel.col(j).cwiseAbs().maxCoeff();
    const Vec broken = sp.interpolate_v2_broken([&](std::size_t edge, double) { return k[edge]; });
    const Vec back = sp.T() * sp.restrict_v2(broken);
    r.a2_error = std::max(r.a2_error, (back - broken).cwiseAbs().maxCoeff());
    r.a2_error = std::max(r.a2_error, (D * sp.restrict_v2(broken)).cwiseAbs().maxCoeff());
  }
  r.a2 = r.a2_error <= 1e-12;
  return r;
}

}  // namespace phnet
