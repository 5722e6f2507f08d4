#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "phnet/diagnostics.hpp"
#include "phnet/steady.hpp"

namespace phnet {

/// Piecewise-linear profile over local edge coordinates. Repeated x values
/// encode jumps; the right-hand value wins at the jump itself.
struct FieldTable {
  std::vector<std::pair<double, double>> points;
};
double evaluate(const FieldTable& table, double x);

struct InitialCondition {
  enum class Kind { Fields, Steady };
  Kind kind = Kind::Fields;
  /// Per edge id; edges without an entry use the default value.
  std::map<std::string, FieldTable> rho, m;
  double rho_default = 1.0;
  double m_default = 0.0;
  /// Density level of the steady guess when no boundary density is prescribed.
  std::optional<double> steady_rho_guess;
};

struct Probe {
  std::string edge;
  double x = 0.0;
};

struct OutputSettings {
  int cadence = 1;
  std::vector<Probe> probes;
  std::string out_dir;
};

struct Scenario {
  std::string name;
  std::string description;
  NetworkTopology network;
  /// Source of the network when loaded from a separate file (relative to the
  /// scenario file); empty means inline.
  std::string network_path;
  std::optional<double> dx_max;
  int q = 0;
  /// Degree of V2; negative selects the compatible q + 1.
  int v2_degree = -1;
  PressureLaw pressure;
  double lambda = 0.0;
  std::map<std::string, BoundaryCondition> bcs;  ///< by boundary node id
  InitialCondition initial;
  double dt = 0.0;
  double t_end = 0.0;
  QuadratureSettings quadrature;
  NewtonSettings newton;
  OutputSettings output;

  ConstitutiveLaw law() const { return {pressure, lambda}; }
  /// K with t_end = K dt; throws Error if t_end is not a multiple of dt.
  int num_steps() const;
};

/// Structural checks beyond what the loader enforces. Throws Error.
void validate(const Scenario& sc);

struct Model {
  std::shared_ptr<const SpacePair> space;
  std::shared_ptr<const DiscreteOperators> ops;
  std::vector<BoundaryCondition> bcs;  ///< port order
};

/// Mesh, spaces and operators for a scenario; dx_override replaces the cap.
Model build_model(const Scenario& sc, std::optional<double> dx_override = std::nullopt);

/// Effort at each port implied by a state: P'(rho) + v^2/2 at the node.
Vec boundary_efforts(const DiscreteOperators& ops, const Vec& a1, const Vec& a2);

struct InitialData {
  State state;
  std::optional<SteadyResult> steady;
};
/// Initial state; a steady initial condition runs solve_steady at t = 0.
InitialData initial_state(const Model& model, const Scenario& sc);

std::vector<EdgePoint> probe_points(const SpacePair& sp, const std::vector<Probe>& probes);

struct StepEvent {
  int k = 0;
  double t = 0.0;
  const State* state = nullptr;
  const Vec* f = nullptr;
  const StepDiagnostics* diag = nullptr;
};

struct SimulateOptions {
  bool keep_states = true;
  std::function<void(const StepEvent&)> observer;
};

struct Trajectory {
  std::vector<double> times;     ///< times of the kept states
  std::vector<State> states;
  std::vector<Vec> flows;
  std::vector<StepDiagnostics> diagnostics;  ///< one per step k = 1..K
  StepDiagnostics initial;                   ///< state diagnostics at t = 0
  std::optional<SteadyResult> steady;
  State final_state;
  Vec final_flow;
  double max_abs_rho = 0.0;  ///< over all reduced points and steps
  int max_newton_iters = 0;
  double runtime_s = 0.0;
};

/// Runs the scheme over [0, T]. Throws StepFailure with the failing time.
Trajectory simulate(const Model& model, const Scenario& sc, const SimulateOptions& opts = {});
Trajectory simulate(const Scenario& sc, const SimulateOptions& opts = {});

struct ConvergenceRow {
  double dx = 0.0;
  std::size_t num_elements = 0;
  double error = 0.0;
};

struct ConvergenceResult {
  std::vector<ConvergenceRow> rows;
  double ref_dx = 0.0;
  double order = 0.0;
  bool strictly_decreasing = false;
};

/// L2 error of the density at T on edge `edge`, [x0, x1), for each mesh cap
/// in `dxs` against a run with cap `ref_dx`. Runs execute on up to `threads`
/// worker threads (0 picks the hardware concurrency).
ConvergenceResult convergence_study(const Scenario& sc, const std::vector<double>& dxs, double ref_dx,
                                    const std::string& edge, double x0, double x1, unsigned threads = 0);

}  // namespace phnet
