#include "phnet/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "phnet/io.hpp"

namespace phnet {

namespace {

Edge edge(std::string id, std::string from, std::string to, double length, double area) {
  Edge e;
  e.id = std::move(id);
  e.tail = std::move(from);
  e.head = std::move(to);
  e.length = length;
  e.area = area;
  return e;
}

Edge pipe(std::string id, std::string from, std::string to, double length_km, double diameter) {
  Edge e = edge(std::move(id), std::move(from), std::move(to), 1000.0 * length_km, circular_area(diameter));
  e.diameter = diameter;
  return e;
}

BoundaryCondition bc(BCType type, Signal s) { return {type, std::move(s)}; }

}  // namespace

Scenario dam_break_scenario(double dx, int q, double dt, int reduced_points) {
  Scenario sc;
  sc.name = "dam_break";
  sc.description = "Riemann problem on [-5, 5]; local x = position + 5";
  Edge w = edge("w1", "left", "right", 10.0, 1.0);
  w.num_elements = elements_for_cap(10.0, dx);
  sc.network = NetworkTopology({{"left", NodeKind::Boundary}, {"right", NodeKind::Boundary}}, {w});
  sc.dx_max = dx;
  sc.q = q;
  sc.pressure = Isentropic{0.5};
  sc.lambda = 0.0;
  sc.bcs["left"] = bc(BCType::Flow, ConstantSignal{0.0});
  sc.bcs["right"] = bc(BCType::Flow, ConstantSignal{0.0});
  sc.initial.kind = InitialCondition::Kind::Fields;
  sc.initial.rho["w1"] = FieldTable{{{0.0, 3.0}, {5.0, 3.0}, {5.0, 1.0}, {10.0, 1.0}}};
  sc.initial.rho_default = 1.0;
  sc.initial.m_default = 0.0;
  sc.dt = dt;
  sc.t_end = 2.0;
  sc.quadrature.points_per_element = reduced_points;
  sc.output.cadence = std::max(1, static_cast<int>(std::lround(0.1 / dt)));
  sc.output.probes = {{"w1", 2.5}, {"w1", 5.0}, {"w1", 7.5}};
  sc.output.out_dir = "out/" + sc.name;
  return sc;
}

Scenario dam_break_q3_scenario() {
  Scenario sc = dam_break_scenario(0.1, 3, 0.005, 5);
  sc.name = "dam_break_q3";
  sc.output.out_dir = "out/" + sc.name;
  return sc;
}

NetworkTopology y_network(double area1, double area2, double area3) {
  std::vector<Node> nodes{{"n1", NodeKind::Boundary},
                          {"n2", NodeKind::Interior},
                          {"n3", NodeKind::Boundary},
                          {"n4", NodeKind::Boundary}};
  std::vector<Edge> edges{edge("w1", "n1", "n2", 1.0, area1), edge("w2", "n2", "n3", 1.0, area2),
                          edge("w3", "n2", "n4", 1.0, area3)};
  return NetworkTopology(nodes, edges);
}

Scenario y_network_scenario() {
  Scenario sc;
  sc.name = "y_network";
  sc.description = "three pipes at one junction, mixed port conditions";
  sc.network = y_network();
  sc.dx_max = 0.05;
  sc.network = with_dx_cap(sc.network, 0.05);
  sc.q = 0;
  sc.pressure = Isentropic{0.5};
  sc.lambda = 0.05;
  sc.bcs["n1"] = bc(BCType::Density, TableSignal{{{0.0, 1.0}, {0.5, 1.2}, {2.0, 1.2}}});
  sc.bcs["n3"] = bc(BCType::Flow, TableSignal{{{0.0, 0.0}, {0.5, -0.05}, {2.0, -0.05}}});
  sc.bcs["n4"] = bc(BCType::PressureOnlyDensity, ConstantSignal{1.0});
  sc.initial.kind = InitialCondition::Kind::Fields;
  sc.initial.rho_default = 1.0;
  sc.initial.m_default = 0.0;
  sc.dt = 0.005;
  sc.t_end = 2.0;
  sc.output.cadence = 20;
  sc.output.probes = {{"w1", 0.5}, {"w2", 0.5}, {"w3", 0.5}};
  sc.output.out_dir = "out/" + sc.name;
  return sc;
}

Scenario equilibrium_scenario() {
  Scenario sc;
  sc.name = "equilibrium";
  sc.description = "constant density at rest with closed ports";
  sc.network = with_dx_cap(y_network(), 0.1);
  sc.dx_max = 0.1;
  sc.q = 1;
  sc.pressure = Isentropic{0.5};
  sc.lambda = 0.01;
  for (const char* id : {"n1", "n3", "n4"}) sc.bcs[id] = bc(BCType::Flow, ConstantSignal{0.0});
  sc.initial.kind = InitialCondition::Kind::Fields;
  sc.initial.rho_default = 1.5;
  sc.initial.m_default = 0.0;
  sc.dt = 0.01;
  sc.t_end = 1.0;
  sc.output.cadence = 10;
  sc.output.probes = {{"w1", 0.5}};
  sc.output.out_dir = "out/" + sc.name;
  return sc;
}

NetworkTopology pipeline_network() {
  std::vector<Node> nodes;
  for (const char* id : {"n1", "n2", "n3", "n4", "n5", "n6"}) nodes.push_back({id, NodeKind::Boundary});
  for (const char* id : {"j1", "j2", "j3", "j4"}) nodes.push_back({id, NodeKind::Interior});
  std::vector<Edge> edges{
      pipe("p01", "n1", "j1", 20.0, 1.0),  pipe("p02", "n2", "j1", 15.0, 0.8), pipe("p03", "j1", "j2", 30.0, 1.0),
      pipe("p04", "n4", "j2", 10.0, 0.6), pipe("p05", "j2", "j3", 25.0, 0.9), pipe("p06", "n5", "j3", 12.0, 0.5),
      pipe("p07", "j3", "j4", 20.0, 0.8), pipe("p08", "j4", "n6", 8.0, 0.4),  pipe("p09", "n3", "j4", 15.0, 0.7),
      pipe("p10", "j1", "j3", 40.0, 0.6),
  };
  return NetworkTopology(nodes, edges);
}

Scenario pipeline_scenario(double lambda) {
  Scenario sc;
  char tag[32];
  std::snprintf(tag, sizeof tag, "%g", lambda);
  std::string t(tag);
  t.erase(std::remove(t.begin(), t.end(), '.'), t.end());
  sc.name = "pipeline_lambda" + t;
  sc.description = "synthetic six-port gas network, isothermal law, ramped supply densities";
  sc.dx_max = 500.0;
  sc.network = pipeline_network();
  sc.q = 0;
  sc.pressure = IsothermalAlpha{};
  sc.lambda = lambda;
  sc.bcs["n1"] = bc(BCType::Density, RampSignal{65.0, 1.0, 3600.0});
  sc.bcs["n2"] = bc(BCType::Density, RampSignal{50.0, 1.0, 3600.0});
  sc.bcs["n3"] = bc(BCType::Flow, ConstantSignal{-100.0});
  sc.bcs["n4"] = bc(BCType::Density, RampSignal{60.0, -1.0, 3600.0});
  sc.bcs["n5"] = bc(BCType::Density, ConstantSignal{60.0});
  sc.bcs["n6"] = bc(BCType::Density, ConstantSignal{45.0});
  sc.initial.kind = InitialCondition::Kind::Steady;
  sc.initial.steady_rho_guess = 55.0;
  sc.dt = 1.0;
  sc.t_end = 18000.0;
  sc.newton.abs_tol = 1e-6;
  sc.output.cadence = 60;
  sc.output.probes = {{"p02", 0.0}, {"p03", 30000.0}, {"p05", 25000.0}, {"p07", 20000.0}, {"p09", 0.0}};
  sc.output.out_dir = "out/" + sc.name;
  return sc;
}

std::vector<std::string> write_benchmark(const std::string& which, const std::string& dir) {
  namespace fs = std::filesystem;
  std::vector<std::string> written;
  auto put = [&](const Scenario& sc, const std::string& file, const std::string& network_ref = "") {
    const std::string path = (fs::path(dir) / file).string();
    save_scenario(path, sc, network_ref);
    written.push_back(path);
  };
  const bool all = which == "all";
  bool known = all;
  if (all || which == "dam-break") {
    known = true;
    put(dam_break_scenario(), "dam_break.json");
    put(dam_break_q3_scenario(), "dam_break_q3.json");
  }
  if (all || which == "pipeline") {
    known = true;
    const std::string net = (fs::path(dir) / "pipeline_network.json").string();
    save_json(net, network_to_json(pipeline_network()));
    written.push_back(net);
    for (double lambda : {0.01, 0.003}) {
      const Scenario sc = pipeline_scenario(lambda);
      put(sc, sc.name + ".json", "pipeline_network.json");
    }
  }
  if (all || which == "y-network") {
    known = true;
    put(y_network_scenario(), "y_network.json");
  }
  if (all || which == "equilibrium") {
    known = true;
    put(equilibrium_scenario(), "equilibrium.json");
  }
  if (!known) throw Error("unknown benchmark '" + which + "' (expected dam-break, pipeline, y-network, equilibrium or all)");
  return written;
}

}  // namespace phnet
