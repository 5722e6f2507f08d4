#pragma once

#include <Eigen/SparseLU>
#include <functional>
#include <memory>
#include <vector>

#include "phnet/assembly.hpp"
#include "phnet/boundary.hpp"

namespace phnet {

struct NewtonSettings {
  /// Convergence: ||F2||_2 <= abs_tol and max scaled closure residual <= abs_tol.
  double abs_tol = 1e-10;
  int max_iter = 25;
  double backtrack = 0.5;
  int max_halvings = 8;
};

struct NewtonStats {
  bool converged = false;
  int iterations = 0;
  int halvings = 0;
  double residual = 0.0;          ///< final merit value
  double balance_residual = 0.0;  ///< ||F2||_2 (plus ||F1||_2 for steady solves)
  double closure_residual = 0.0;  ///< max scaled closure row
  std::string message;
};

/// Discrete state: a1 (V1), a2 (V2, constrained coordinates) and the port efforts.
struct State {
  Vec a1, a2, e;
};

/// A root-finding problem F(y) = 0 with a sparse Jacobian.
struct NewtonProblem {
  /// Returns false if y is outside the admissible set. J may be null.
  std::function<bool(const Vec& y, Vec& F, SpMat* J)> eval;
  std::function<bool(const Vec& F)> converged;
  std::function<double(const Vec& F)> merit;
  /// Fills the balance/closure residual fields of the stats.
  std::function<void(const Vec& F, NewtonStats&)> measure;
};

/// Sparse LU that keeps the symbolic analysis while the pattern is unchanged.
class LinearSolver {
 public:
  bool factorize(const SpMat& A);
  Vec solve(const Vec& b) const { return lu_.solve(b); }

 private:
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
  std::vector<int> outer_, inner_;
  bool analyzed_ = false;
};

/// Damped Newton with backtracking and an admissibility guard. At least one
/// Newton update is taken. If no halving decreases the merit, the last
/// admissible trial is accepted.
NewtonStats newton_solve(const NewtonProblem& prob, Vec& y, const NewtonSettings& s, LinearSolver& lin);

/// True if every boundary condition prescribes a flow.
bool all_flow(const std::vector<BoundaryCondition>& bcs);

/// Implicit Euler-type step. Newton eliminates a1 through the linear first
/// block, a1 = a1_prev + dt B a2, and iterates on y = [a2; e].
class TimeStepper {
 public:
  TimeStepper(std::shared_ptr<const DiscreteOperators> ops, std::vector<BoundaryCondition> bcs,
              NewtonSettings newton = {});

  const DiscreteOperators& ops() const { return *ops_; }
  const std::vector<BoundaryCondition>& bcs() const { return bcs_; }
  const NewtonSettings& newton() const { return newton_; }

  struct Result {
    State state;
    Vec f;
    NewtonStats stats;
  };
  /// Not thread-safe: reuses the symbolic factorization across calls.
  Result step(const State& prev, double t_k, double dt) const;

  /// Scaled closure rows k(e, f, u(t)) and their Jacobian blocks.
  Vec closure(const Vec& e, const Vec& f, double t, SpMat* dk_de = nullptr, SpMat* dk_df = nullptr) const;

  /// Full residual [F1; F2; F3] in the unknowns x = [a1; a2; e].
  Vec full_residual(const State& prev, const State& x, double t, double dt) const;
  SpMat full_jacobian(const State& prev, const State& x, double t, double dt) const;

  /// Residual [F2; F3] after eliminating a1, in y = [a2; e].
  Vec reduced_residual(const State& prev, const Vec& y, double t, double dt, SpMat* jac = nullptr) const;

  Vec a1_from(const Vec& a1_prev, const Vec& a2, double dt) const { return a1_prev + dt * (ops_->B() * a2); }

 private:
  std::shared_ptr<const DiscreteOperators> ops_;
  std::vector<BoundaryCondition> bcs_;
  NewtonSettings newton_;
  std::vector<double> port_area_;
  mutable LinearSolver lin_;
};

/// Stack blocks [A B; C D] (empty blocks allowed as 0-size).
SpMat block2x2(const SpMat& A, const SpMat& B, const SpMat& C, const SpMat& D);

}  // namespace phnet
