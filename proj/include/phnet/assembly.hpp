#pragma once

#include <Eigen/SparseCholesky>
#include <memory>

#include "phnet/constitutive.hpp"
#include "phnet/femspace.hpp"

namespace phnet {

struct QuadratureSettings {
  /// Reduced rule for the nonlinear forms; <= 0 selects q + 2 points.
  int points_per_element = 0;
  /// Rule for the static matrices; <= 0 selects the minimal exact rule.
  int exact_points = 0;
};

/// Jacobian blocks of a V2-tested form with respect to (a1, a2).
struct FormJacobian {
  SpMat d_a1;  ///< n2 x n1
  SpMat d_a2;  ///< n2 x n2
};

/// Weighted combination cn*n2(a) + cc*c1(a) + cr*R(a)a2 and its Jacobian.
struct FormValue {
  Vec value;
  FormJacobian jac;
};

/// State at the reduced quadrature points.
struct PointStates {
  Vec rho, m;
};

/// Static operators and nonlinear form evaluators on a SpacePair.
class DiscreteOperators {
 public:
  DiscreteOperators(std::shared_ptr<const SpacePair> space, ConstitutiveLaw law,
                    QuadratureSettings quad = {});

  const SpacePair& space() const { return *sp_; }
  std::shared_ptr<const SpacePair> space_ptr() const { return sp_; }
  const ConstitutiveLaw& law() const { return law_; }
  std::size_t n1() const { return sp_->n1(); }
  std::size_t n2() const { return sp_->n2(); }
  std::size_t num_ports() const { return sp_->num_ports(); }
  int reduced_points() const { return nred_; }
  int exact_points() const { return nexact_; }

  const SpMat& M1() const { return M1_; }
  const Vec& M1_diag() const { return M1d_; }
  const SpMat& M2() const { return M2_; }
  const SpMat& J() const { return J_; }
  const SpMat& K2() const { return K2_; }
  /// B = M1^{-1} J, so the local conservation law reads a1' = B a2.
  const SpMat& B() const { return B_; }
  /// Integrals of the V1 basis functions, mass(a1) = w1 . a1.
  const Vec& mass_weights() const { return w1_; }

  double mass(const Vec& a1) const { return w1_.dot(a1); }

  /// Values at the reduced points; throws DomainError naming the point if a
  /// density is inadmissible.
  PointStates point_states(const Vec& a1, const Vec& a2) const;
  Vec point_densities(const Vec& a1) const;
  /// True if all reduced-point densities are admissible.
  bool admissible(const Vec& a1) const;
  std::size_t num_points() const { return pts_.size(); }
  EdgePoint point_location(std::size_t i) const;
  double point_weight(std::size_t i) const { return pts_[i].w; }

  Vec n2_vec(const Vec& a1, const Vec& a2) const;
  Vec c1_vec(const Vec& a1, const Vec& a2) const;
  /// R(a) w.
  Vec R_apply(const Vec& a1, const Vec& a2, const Vec& w) const;
  /// Dense-path assembly of R(a) as a sparse matrix.
  SpMat R_matrix(const Vec& a1, const Vec& a2) const;
  FormJacobian jacobian_n2(const Vec& a1, const Vec& a2) const;
  FormJacobian jacobian_c1(const Vec& a1, const Vec& a2) const;
  /// Jacobian of a -> R(a) a2.
  FormJacobian jacobian_Ra2(const Vec& a1, const Vec& a2) const;

  FormValue combined(const Vec& a1, const Vec& a2, double cn, double cc, double cr,
                     bool with_jacobian) const;

  double G_c(const Vec& a1, const Vec& a2) const;
  double H_c(const Vec& a1, const Vec& a2) const;
  /// H_c(prev) - H_c(next), summed pointwise from differences.
  double H_drop(const Vec& a1_prev, const Vec& a2_prev, const Vec& a1, const Vec& a2) const;

  /// [a1; M2^{-1} n2(a)].
  Vec to_standard_ph_coordinates(const Vec& a1, const Vec& a2) const;

  /// Gram matrices of V1 and V2 under the reduced rule.
  SpMat reduced_gram_v1() const;
  SpMat reduced_gram_v2() const;

 private:
  struct QPoint {
    std::size_t elem;
    double w;     // physical weight including area
    int ref;      // index into reference tables
  };
  template <class Kernel>
  void accumulate(const Vec& a1, const Vec& a2, Kernel&& kernel, Vec* out, FormJacobian* jac) const;

  std::shared_ptr<const SpacePair> sp_;
  ConstitutiveLaw law_;
  int nred_ = 0, nexact_ = 0;
  SpMat M1_, M2_, J_, K2_, B_;
  Vec M1d_, w1_;
  Eigen::SimplicialLDLT<SpMat> M2_ldlt_;
  std::vector<QPoint> pts_;
  std::vector<double> ref_xi_;
  Mat phi1_, phi2_, dphi2_;  // reference values, rows = reduced points
  std::vector<double> elem_diam_;
};

}  // namespace phnet
