#pragma once

#include <iosfwd>
#include <json.hpp>
#include <string>
#include <vector>

#include "phnet/scenario.hpp"

namespace phnet {

using json = nlohmann::json;

/// Network document {nodes: [...], edges: [...]}. `ptr` prefixes the JSON
/// pointers of schema errors.
NetworkTopology network_from_json(const json& j, const std::string& ptr = "");
json network_to_json(const NetworkTopology& topo);
NetworkTopology load_network(const std::string& path);

json signal_to_json(const Signal& s);
Signal signal_from_json(const json& j, const std::string& ptr);
json pressure_to_json(const PressureLaw& law);
PressureLaw pressure_from_json(const json& j, const std::string& ptr);

/// Parses and validates a scenario document. Relative network paths resolve
/// against `base_dir`. Non-fatal remarks are appended to `warnings`.
Scenario scenario_from_json(const json& j, const std::string& base_dir = ".",
                            std::vector<std::string>* warnings = nullptr);
/// Serializes a scenario; the network is written inline unless `network_ref`
/// names a file to reference instead.
json scenario_to_json(const Scenario& sc, const std::string& network_ref = "");

Scenario load_scenario(const std::string& path, std::vector<std::string>* warnings = nullptr);
void save_scenario(const std::string& path, const Scenario& sc, const std::string& network_ref = "");
void save_json(const std::string& path, const json& j);

/// Shortest decimal form is not used for CSV; values carry 17 significant digits.
std::string format_double(double v);

void write_diagnostics_csv(std::ostream& os, const std::vector<StepDiagnostics>& rows);
/// One row per kept state: t, rho, m, v, p, mass_flow at the probe.
void write_probe_csv(std::ostream& os, const Model& model, const Trajectory& tr, const EdgePoint& pt);
/// One row per kept state with the effort and flow at every port.
void write_ports_csv(std::ostream& os, const Model& model, const Trajectory& tr);
/// Field values at element midpoints and edge ends.
void write_state_csv(std::ostream& os, const Model& model, const State& s);

/// Every setting that affects the numbers, for the run metadata file.
json run_metadata(const Scenario& sc, const Model& model);

}  // namespace phnet
