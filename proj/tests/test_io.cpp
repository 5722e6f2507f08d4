#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "phnet/benchmarks.hpp"
#include "phnet/io.hpp"

using namespace phnet;
namespace fs = std::filesystem;

namespace {

const std::string dir = PHNET_SCENARIOS;

json read(const std::string& name) {
  std::ifstream in(dir + "/" + name);
  return json::parse(in);
}

std::string schema_pointer(const json& j) {
  try {
    scenario_from_json(j, dir);
  } catch (const SchemaError& e) {
    return e.pointer;
  }
  return "<accepted>";
}

std::string schema_message(const json& j) {
  try {
    scenario_from_json(j, dir);
  } catch (const SchemaError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("shipped dam break file") {
  const Scenario sc = load_scenario(dir + "/dam_break.json");
  REQUIRE(sc.network.num_edges() == 1);
  CHECK(sc.network.edge(0).length == 10.0);
  CHECK(sc.network.edge(0).num_elements == 200);
  CHECK(sc.lambda == 0.0);
  CHECK(std::get<Isentropic>(sc.pressure.variant()).c == 0.5);
  CHECK(sc.t_end == 2.0);
  CHECK(sc.num_steps() == 4000);
  for (const auto& [id, bc] : sc.bcs) CHECK(bc.type == BCType::Flow);
  CHECK(evaluate(sc.initial.rho.at("w1"), 4.9) == 3.0);
  CHECK(evaluate(sc.initial.rho.at("w1"), 5.0) == 1.0);
}

TEST_CASE("every shipped scenario loads and survives a round trip") {
  for (const char* name : {"dam_break.json", "dam_break_q3.json", "y_network.json", "equilibrium.json",
                           "pipeline_lambda001.json", "pipeline_lambda0003.json"}) {
    CAPTURE(name);
    const Scenario sc = load_scenario(dir + "/" + name);
    const json once = scenario_to_json(sc);
    const json twice = scenario_to_json(scenario_from_json(once, dir));
    CHECK(once == twice);
  }
}

TEST_CASE("shipped files match the built-in benchmarks") {
  CHECK(scenario_to_json(load_scenario(dir + "/dam_break.json")) == scenario_to_json(dam_break_scenario()));
  CHECK(scenario_to_json(load_scenario(dir + "/y_network.json")) == scenario_to_json(y_network_scenario()));
  const Scenario p = load_scenario(dir + "/pipeline_lambda0003.json");
  CHECK(p.network_path == "pipeline_network.json");
  CHECK(scenario_to_json(p) == scenario_to_json(pipeline_scenario(0.003)));
}

TEST_CASE("save and load are inverse") {
  const fs::path tmp = fs::temp_directory_path() / "phnet_io_roundtrip.json";
  save_scenario(tmp.string(), y_network_scenario());
  const Scenario back = load_scenario(tmp.string());
  CHECK(scenario_to_json(back) == scenario_to_json(y_network_scenario()));
  fs::remove(tmp);
}

TEST_CASE("missing boundary condition names the node") {
  json j = read("y_network.json");
  j["bcs"].erase("n3");
  CHECK(schema_pointer(j) == "/bcs");
  CHECK(schema_message(j).find("'n3'") != std::string::npos);
}

TEST_CASE("schema violations carry JSON pointers") {
  SUBCASE("wrong type") {
    json j = read("dam_break.json");
    j["time"]["dt_s"] = "small";
    CHECK(schema_pointer(j) == "/time/dt_s");
  }
  SUBCASE("unknown field") {
    json j = read("dam_break.json");
    j["law"]["gamma"] = 1.4;
    CHECK(schema_pointer(j) == "/law/gamma");
  }
  SUBCASE("unknown signal type") {
    json j = read("dam_break.json");
    j["bcs"]["left"]["signal"] = {{"type", "sine"}};
    CHECK(schema_pointer(j) == "/bcs/left/signal/type");
  }
  SUBCASE("unknown bc type") {
    json j = read("dam_break.json");
    j["bcs"]["left"]["type"] = "pressure";
    CHECK(schema_pointer(j) == "/bcs/left/type");
  }
  SUBCASE("horizon not a multiple of the step") {
    json j = read("dam_break.json");
    j["time"]["dt_s"] = 0.0007;
    CHECK(schema_pointer(j) == "/time/t_end_s");
  }
  SUBCASE("probe off the edge") {
    json j = read("dam_break.json");
    j["output"]["probes"][0]["x"] = 11.0;
    CHECK(schema_pointer(j) == "/output/probes/0/x");
  }
  SUBCASE("density signal leaves the admissible set") {
    json j = read("y_network.json");
    j["bcs"]["n4"]["signal"]["value"] = -1.0;
    CHECK(schema_pointer(j) == "/bcs/n4/signal");
  }
  SUBCASE("table too short for the horizon") {
    json j = read("y_network.json");
    j["bcs"]["n1"]["signal"]["points"] = json::array({json::array({0.0, 1.0}), json::array({1.0, 1.2})});
    CHECK(schema_pointer(j) == "/bcs/n1/signal/points");
  }
  SUBCASE("reduced rule too weak") {
    json j = read("dam_break_q3.json");
    j["quadrature"]["points_per_element"] = 3;
    CHECK(schema_pointer(j) == "/quadrature/points_per_element");
  }
  SUBCASE("bc on an interior node") {
    json j = read("y_network.json");
    j["bcs"]["n2"] = j["bcs"]["n4"];
    CHECK(schema_pointer(j) == "/bcs/n2");
  }
  SUBCASE("incompatible V2 degree") {
    json j = read("dam_break.json");
    j["space"]["v2_degree"] = 2;
    CHECK(schema_pointer(j) == "/space/v2_degree");
  }
  SUBCASE("network file missing") {
    json j = read("pipeline_lambda001.json");
    j["network"] = "nowhere.json";
    CHECK(schema_pointer(j) == "/network");
  }
}

TEST_CASE("network documents") {
  const NetworkTopology t = load_network(dir + "/pipeline_network.json");
  CHECK(t.num_edges() == 10);
  CHECK(t.num_ports() == 6);
  CHECK(network_to_json(t) == network_to_json(pipeline_network()));
  json bad = network_to_json(t);
  bad["edges"][0].erase("diameter_m");
  bad["edges"][0].erase("area_m2");
  try {
    network_from_json(bad, "/network");
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.pointer == "/network/edges/0");
  }
}

TEST_CASE("numbers are written with 17 significant digits") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("CSV writers") {
  Scenario sc = equilibrium_scenario();
  sc.t_end = 0.05;
  const Model model = build_model(sc);
  const Trajectory tr = simulate(model, sc);
  std::ostringstream d, p, ports, state;
  write_diagnostics_csv(d, tr.diagnostics);
  write_probe_csv(p, model, tr, probe_points(*model.space, sc.output.probes)[0]);
  write_ports_csv(ports, model, tr);
  write_state_csv(state, model, tr.final_state);
  std::string header;
  std::istringstream(d.str()) >> header;
  CHECK(header == "t,mass,hamiltonian,boundary_power,friction_dissipation,dissipation_slack,mass_residual,"
                  "local_residual,newton_iters");
  const std::string diag = d.str();
  CHECK(std::count(diag.begin(), diag.end(), '\n') == 6);
  CHECK(p.str().rfind("t,rho,m,v,p,mass_flow", 0) == 0);
  CHECK(ports.str().find("e_n1") != std::string::npos);
  CHECK(state.str().rfind("edge,x,rho,m,v,p,mass_flow", 0) == 0);
  const json meta = run_metadata(sc, model);
  CHECK(meta["discretization"]["n1"] == model.space->n1());
  CHECK(meta["boundary_closures"]["n1"]["type"] == "flow");
}

}
