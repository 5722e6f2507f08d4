#pragma once

#include <Eigen/Dense>
#include <array>
#include <Eigen/Sparse>
#include <functional>
#include <string>
#include <vector>

#include "phnet/network.hpp"

namespace phnet {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;

/// Element breakpoints per edge, in edge index order.
struct Partition {
  std::vector<std::vector<double>> breakpoints;
};

/// Uniform breakpoints using each edge's num_elements.
Partition uniform_partition(const NetworkTopology& topology);

/// Element count ceil(length / dx_max), at least 1.
int elements_for_cap(double length, double dx_max);

/// Copy of the topology with num_elements derived from a global cap.
NetworkTopology with_dx_cap(const NetworkTopology& topology, double dx_max);

struct Element {
  std::size_t edge = 0;
  double x0 = 0.0, x1 = 0.0;
  double area = 0.0;
  double h() const { return x1 - x0; }
};

/// A location on the network: edge index and local coordinate in [0, length].
struct EdgePoint {
  std::size_t edge = 0;
  double x = 0.0;
};

/// One interior-node coupling: the broken coefficient `eliminated` equals
/// sum coef * broken[dof] over `terms`.
struct JunctionConstraint {
  std::size_t node = 0;
  std::size_t eliminated = 0;
  std::vector<std::pair<std::size_t, double>> terms;
};

/// V1 = Q_q (Legendre modes per element, discontinuous) and
/// V2 = P_p (GLL nodal Lagrange, continuous within edges, flux-coupled at
/// interior nodes). The compatible choice is p = q + 1.
///
/// V2 coefficients come in two flavours. "Broken" coefficients hold one value
/// per GLL node of every edge; the constrained coordinates drop one endpoint
/// value per interior node. T maps constrained to broken.
class SpacePair {
 public:
  SpacePair(const NetworkTopology& topology, const Partition& partition, int q, int v2_degree = -1);

  const NetworkTopology& topology() const { return topo_; }
  int q() const { return q_; }
  int v2_degree() const { return p_; }
  std::size_t n1() const { return n1_; }
  std::size_t n2() const { return n2_; }
  std::size_t n2_broken() const { return n2b_; }
  std::size_t num_elements() const { return elements_.size(); }
  std::size_t num_ports() const { return topo_.num_ports(); }

  const std::vector<Element>& elements() const { return elements_; }
  /// Elements of edge k are [edge_first_element(k), edge_first_element(k+1)).
  std::size_t edge_first_element(std::size_t edge) const { return edge_elem_.at(edge); }

  std::size_t v1_dof(std::size_t elem, int mode) const { return elem * (q_ + 1) + mode; }
  std::size_t v2_broken_dof(std::size_t elem, int node) const;
  /// Broken dof at an edge end (0 = tail at x=0, 1 = head at x=length).
  std::size_t edge_end_dof(std::size_t edge, int end) const;

  const std::vector<double>& v2_nodes() const { return gll_; }
  const SpMat& T() const { return T_; }
  const std::vector<JunctionConstraint>& constraints() const { return constraints_; }
  /// Constrained index of a broken dof, or -1 if eliminated.
  long constrained_index(std::size_t broken) const { return free_index_.at(broken); }

  /// Reference-element basis values at xi in [-1, 1].
  void v1_basis(double xi, double* vals) const;
  void v2_basis(double xi, double* vals, double* dvals = nullptr) const;

  /// Element containing the point and its reference coordinate.
  std::pair<std::size_t, double> locate(const EdgePoint& point) const;

  /// D with D c = V1 coefficients of d/dx of the V2 member c (n1 x n2).
  SpMat derivative_matrix() const;
  /// Broken version (n1 x n2_broken).
  SpMat derivative_matrix_broken() const;
  /// K2 (n2 x p): area-weighted signed traces at the boundary nodes.
  SpMat trace_map() const;
  SpMat trace_map_broken() const;

  double eval_v1(const Vec& a1, const EdgePoint& pt) const;
  double eval_v2(const Vec& a2, const EdgePoint& pt) const;
  double eval_v2_dx(const Vec& a2, const EdgePoint& pt) const;
  double eval_v2_broken(const Vec& b, const EdgePoint& pt) const;
  double eval_v2_dx_broken(const Vec& b, const EdgePoint& pt) const;
  /// Componentwise Psi(a) at each point.
  std::vector<std::array<double, 2>> evaluate(const Vec& a1, const Vec& a2,
                                              const std::vector<EdgePoint>& pts) const;

  /// L2 projection of an edgewise function onto V1 (exact up to quadrature).
  Vec project_v1(const std::function<double(std::size_t edge, double x)>& f) const;
  /// Nodal interpolation onto V2 in broken coordinates.
  Vec interpolate_v2_broken(const std::function<double(std::size_t edge, double x)>& f) const;
  /// Nodal interpolation onto V2, junction values fixed by the constraints.
  Vec interpolate_v2(const std::function<double(std::size_t edge, double x)>& f) const;
  /// Constrained coordinates of a broken vector (drops eliminated entries).
  Vec restrict_v2(const Vec& broken) const;

 private:
  NetworkTopology topo_;
  int q_ = 0, p_ = 1;
  std::size_t n1_ = 0, n2_ = 0, n2b_ = 0;
  std::vector<Element> elements_;
  std::vector<std::size_t> edge_elem_;
  std::vector<std::size_t> edge_dof_;  // first broken dof per edge
  std::vector<std::size_t> elem_local_;
  std::vector<double> gll_;
  std::vector<JunctionConstraint> constraints_;
  std::vector<long> free_index_;
  SpMat T_;
};

struct CompatibilityReport {
  std::size_t n1 = 0, n2 = 0;
  std::size_t rank_D = 0;
  bool a1 = false;            ///< rank(D) == n1
  double derivative_error = 0.0;  ///< max |d/dx v2 - V1 image| at sample points
  std::size_t kernel_dim = 0;     ///< number of edgewise-constant fluxes allowed by coupling
  bool a2 = false;
  double a2_error = 0.0;     ///< max interpolation defect over the kernel basis
  double constraint_error = 0.0;  ///< max signed trace sum at interior nodes for random members
};

CompatibilityReport check_compatibility(const SpacePair& sp);

}  // namespace phnet
