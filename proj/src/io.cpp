#include "phnet/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace phnet {

namespace fs = std::filesystem;

namespace {

std::string escape(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') out += "~0";
    else if (c == '/') out += "~1";
    else out += c;
  }
  return out;
}

std::string child(const std::string& ptr, const std::string& key) { return ptr + "/" + escape(key); }
std::string child(const std::string& ptr, std::size_t i) { return ptr + "/" + std::to_string(i); }

void expect_object(const json& j, const std::string& ptr) {
  if (!j.is_object()) throw SchemaError(ptr, "expected an object");
}

void expect_array(const json& j, const std::string& ptr) {
  if (!j.is_array()) throw SchemaError(ptr, "expected an array");
}

void reject_unknown(const json& j, const std::string& ptr, std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw SchemaError(child(ptr, it.key()), "unknown field");
  }
}

const json& required(const json& j, const char* key, const std::string& ptr) {
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(child(ptr, key), "missing required field");
  return *it;
}

double number(const json& j, const std::string& ptr) {
  if (!j.is_number()) throw SchemaError(ptr, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw SchemaError(ptr, "expected a finite number");
  return v;
}

double positive(const json& j, const std::string& ptr) {
  const double v = number(j, ptr);
  if (!(v > 0.0)) throw SchemaError(ptr, "expected a positive number");
  return v;
}

int integer(const json& j, const std::string& ptr) {
  if (!j.is_number_integer()) throw SchemaError(ptr, "expected an integer");
  return j.get<int>();
}

std::string string(const json& j, const std::string& ptr) {
  if (!j.is_string()) throw SchemaError(ptr, "expected a string");
  return j.get<std::string>();
}

double number_or(const json& j, const char* key, const std::string& ptr, double dflt) {
  auto it = j.find(key);
  return it == j.end() ? dflt : number(*it, child(ptr, key));
}

std::vector<std::pair<double, double>> pairs(const json& j, const std::string& ptr) {
  expect_array(j, ptr);
  if (j.empty()) throw SchemaError(ptr, "expected at least one point");
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = child(ptr, i);
    if (!j[i].is_array() || j[i].size() != 2) throw SchemaError(p, "expected a pair [x, value]");
    const double x = number(j[i][0], child(p, 0)), v = number(j[i][1], child(p, 1));
    if (!out.empty() && x < out.back().first) throw SchemaError(child(p, 0), "abscissae must be nondecreasing");
    out.emplace_back(x, v);
  }
  return out;
}

json pairs_to_json(const std::vector<std::pair<double, double>>& pts) {
  json a = json::array();
  for (const auto& [x, v] : pts) a.push_back({x, v});
  return a;
}

std::string kind_name(NodeKind k) { return k == NodeKind::Boundary ? "boundary" : "interior"; }

}  // namespace

NetworkTopology network_from_json(const json& j, const std::string& ptr) {
  expect_object(j, ptr);
  reject_unknown(j, ptr, {"nodes", "edges", "name", "description"});
  const std::string pn = child(ptr, "nodes"), pe = child(ptr, "edges");
  const json& jn = required(j, "nodes", ptr);
  const json& je = required(j, "edges", ptr);
  expect_array(jn, pn);
  expect_array(je, pe);
  std::vector<Node> nodes;
  for (std::size_t i = 0; i < jn.size(); ++i) {
    const std::string p = child(pn, i);
    expect_object(jn[i], p);
    reject_unknown(jn[i], p, {"id", "type"});
    Node n;
    n.id = string(required(jn[i], "id", p), child(p, "id"));
    const std::string type = string(required(jn[i], "type", p), child(p, "type"));
    if (type == "boundary") n.kind = NodeKind::Boundary;
    else if (type == "interior") n.kind = NodeKind::Interior;
    else throw SchemaError(child(p, "type"), "expected \"interior\" or \"boundary\", got \"" + type + "\"");
    nodes.push_back(n);
  }
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < je.size(); ++i) {
    const std::string p = child(pe, i);
    expect_object(je[i], p);
    reject_unknown(je[i], p, {"id", "from", "to", "length_m", "diameter_m", "area_m2", "num_elements"});
    Edge e;
    e.id = string(required(je[i], "id", p), child(p, "id"));
    e.tail = string(required(je[i], "from", p), child(p, "from"));
    e.head = string(required(je[i], "to", p), child(p, "to"));
    e.length = positive(required(je[i], "length_m", p), child(p, "length_m"));
    if (je[i].contains("diameter_m")) e.diameter = positive(je[i]["diameter_m"], child(p, "diameter_m"));
    if (je[i].contains("area_m2")) e.area = positive(je[i]["area_m2"], child(p, "area_m2"));
    else if (e.diameter) e.area = circular_area(*e.diameter);
    else throw SchemaError(p, "edge '" + e.id + "' needs area_m2 or diameter_m");
    if (je[i].contains("num_elements")) {
      e.num_elements = integer(je[i]["num_elements"], child(p, "num_elements"));
      if (e.num_elements < 1) throw SchemaError(child(p, "num_elements"), "expected at least 1");
    }
    edges.push_back(e);
  }
  NetworkTopology topo;
  try {
    topo = NetworkTopology(nodes, edges);
  } catch (const NetworkError& ex) {
    throw SchemaError(ptr, ex.what());
  }
  const auto violations = validate(topo);
  if (!violations.empty()) {
    std::string msg = "invalid network:";
    for (const auto& v : violations) msg += " " + v + ";";
    msg.pop_back();
    throw SchemaError(ptr, msg);
  }
  return topo;
}

json network_to_json(const NetworkTopology& topo) {
  json j;
  j["nodes"] = json::array();
  for (const auto& n : topo.nodes()) j["nodes"].push_back({{"id", n.id}, {"type", kind_name(n.kind)}});
  j["edges"] = json::array();
  for (const auto& e : topo.edges()) {
    json je = {{"id", e.id}, {"from", e.tail}, {"to", e.head}, {"length_m", e.length}};
    if (e.diameter) je["diameter_m"] = *e.diameter;
    if (!e.diameter || std::abs(circular_area(*e.diameter) - e.area) > 0.0) je["area_m2"] = e.area;
    je["num_elements"] = e.num_elements;
    j["edges"].push_back(je);
  }
  return j;
}

namespace {

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& ex) {
    throw SchemaError("", "'" + path + "' is not valid JSON: " + ex.what());
  }
}

}  // namespace

NetworkTopology load_network(const std::string& path) { return network_from_json(read_json(path)); }

json signal_to_json(const Signal& s) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ConstantSignal>) return {{"type", "constant"}, {"value", v.value}};
        else if constexpr (std::is_same_v<T, TableSignal>) return {{"type", "table"}, {"points", pairs_to_json(v.points)}};
        else return {{"type", "ramp_profile"}, {"base", v.base}, {"gain", v.gain}, {"t_star_s", v.t_star}};
      },
      s);
}

Signal signal_from_json(const json& j, const std::string& ptr) {
  expect_object(j, ptr);
  const std::string type = string(required(j, "type", ptr), child(ptr, "type"));
  if (type == "constant") {
    reject_unknown(j, ptr, {"type", "value"});
    return ConstantSignal{number(required(j, "value", ptr), child(ptr, "value"))};
  }
  if (type == "table") {
    reject_unknown(j, ptr, {"type", "points"});
    return TableSignal{pairs(required(j, "points", ptr), child(ptr, "points"))};
  }
  if (type == "ramp_profile") {
    reject_unknown(j, ptr, {"type", "base", "gain", "t_star_s"});
    RampSignal r;
    r.base = number_or(j, "base", ptr, 0.0);
    r.gain = number_or(j, "gain", ptr, 1.0);
    if (j.contains("t_star_s")) r.t_star = positive(j["t_star_s"], child(ptr, "t_star_s"));
    return r;
  }
  throw SchemaError(child(ptr, "type"), "unknown signal type \"" + type + "\"");
}

json pressure_to_json(const PressureLaw& law) {
  if (const auto* s = std::get_if<Isentropic>(&law.variant())) return {{"type", "isentropic"}, {"c", s->c}};
  const auto& t = std::get<IsothermalAlpha>(law.variant());
  return {{"type", "isothermal_alpha"}, {"R", t.R},         {"T", t.T},
          {"alpha", t.alpha},          {"rho_star", t.rho_star}, {"rho_floor", t.rho_floor}};
}

PressureLaw pressure_from_json(const json& j, const std::string& ptr) {
  expect_object(j, ptr);
  const std::string type = string(required(j, "type", ptr), child(ptr, "type"));
  if (type == "isentropic") {
    reject_unknown(j, ptr, {"type", "c"});
    return Isentropic{positive(required(j, "c", ptr), child(ptr, "c"))};
  }
  if (type == "isothermal_alpha") {
    reject_unknown(j, ptr, {"type", "R", "T", "alpha", "rho_star", "rho_floor"});
    IsothermalAlpha t;
    if (j.contains("R")) t.R = positive(j["R"], child(ptr, "R"));
    if (j.contains("T")) t.T = positive(j["T"], child(ptr, "T"));
    t.alpha = number_or(j, "alpha", ptr, t.alpha);
    if (j.contains("rho_star")) t.rho_star = positive(j["rho_star"], child(ptr, "rho_star"));
    if (j.contains("rho_floor")) t.rho_floor = positive(j["rho_floor"], child(ptr, "rho_floor"));
    return t;
  }
  throw SchemaError(child(ptr, "type"), "unknown pressure law \"" + type + "\"");
}

namespace {

/// Extreme values a signal takes on [0, T].
std::pair<double, double> signal_range(const Signal& s, double T) {
  double lo = evaluate(s, 0.0), hi = lo;
  auto see = [&](double t) {
    if (t < 0.0 || t > T) return;
    const double v = evaluate(s, t);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  };
  see(T);
  if (const auto* tb = std::get_if<TableSignal>(&s))
    for (const auto& [t, v] : tb->points) see(t);
  if (const auto* r = std::get_if<RampSignal>(&s)) {
    see(r->t_star);
    see(1.5 * r->t_star);
  }
  return {lo, hi};
}

std::map<std::string, FieldTable> field_tables(const json& j, const std::string& ptr, const NetworkTopology& topo) {
  expect_object(j, ptr);
  std::map<std::string, FieldTable> out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string p = child(ptr, it.key());
    const auto idx = topo.find_edge(it.key());
    if (!idx) throw SchemaError(p, "unknown edge '" + it.key() + "'");
    FieldTable t{pairs(it.value(), p)};
    const double len = topo.edge(*idx).length;
    for (std::size_t i = 0; i < t.points.size(); ++i)
      if (t.points[i].first < 0.0 || t.points[i].first > len * (1 + 1e-12))
        throw SchemaError(child(child(p, i), 0), "position outside [0, " + format_double(len) + "]");
    out[it.key()] = t;
  }
  return out;
}

}  // namespace

Scenario scenario_from_json(const json& j, const std::string& base_dir, std::vector<std::string>* warnings) {
  expect_object(j, "");
  reject_unknown(j, "", {"name", "description", "units", "network", "space", "law", "bcs", "initial", "time",
                         "quadrature", "newton", "output"});
  Scenario sc;
  if (j.contains("name")) sc.name = string(j["name"], "/name");
  if (j.contains("description")) sc.description = string(j["description"], "/description");

  const json& jnet = required(j, "network", "");
  if (jnet.is_string()) {
    sc.network_path = jnet.get<std::string>();
    fs::path p = fs::path(base_dir) / sc.network_path;
    try {
      sc.network = network_from_json(read_json(p.string()), "");
    } catch (const SchemaError& ex) {
      throw SchemaError("/network", "in '" + p.string() + "': " + ex.what());
    } catch (const Error& ex) {
      throw SchemaError("/network", ex.what());
    }
  } else {
    sc.network = network_from_json(jnet, "/network");
  }
  const NetworkTopology& topo = sc.network;

  if (j.contains("units")) {
    const std::string u = string(j["units"], "/units");
    if (u != "SI" && u != "dimensionless") throw SchemaError("/units", "expected \"SI\" or \"dimensionless\"");
    if (u == "SI" && warnings)
      for (const auto& e : topo.edges())
        if (!e.diameter) warnings->push_back("edge '" + e.id + "' has no diameter; units are ignored for it");
  }

  if (j.contains("space")) {
    const json& s = j["space"];
    expect_object(s, "/space");
    reject_unknown(s, "/space", {"q", "dx_max_m", "v2_degree"});
    if (s.contains("q")) sc.q = integer(s["q"], "/space/q");
    if (sc.q < 0) throw SchemaError("/space/q", "expected q >= 0");
    if (s.contains("dx_max_m")) sc.dx_max = positive(s["dx_max_m"], "/space/dx_max_m");
    if (s.contains("v2_degree")) {
      sc.v2_degree = integer(s["v2_degree"], "/space/v2_degree");
      if (sc.v2_degree < 1 || sc.v2_degree > sc.q + 1)
        throw SchemaError("/space/v2_degree", "expected 1 <= degree <= q + 1");
    }
  }

  {
    const json& l = required(j, "law", "");
    expect_object(l, "/law");
    reject_unknown(l, "/law", {"pressure", "lambda"});
    sc.pressure = pressure_from_json(required(l, "pressure", "/law"), "/law/pressure");
    sc.lambda = number_or(l, "lambda", "/law", 0.0);
    if (sc.lambda < 0.0) throw SchemaError("/law/lambda", "friction factor must be nonnegative");
  }

  {
    const json& t = required(j, "time", "");
    expect_object(t, "/time");
    reject_unknown(t, "/time", {"dt_s", "t_end_s"});
    sc.dt = positive(required(t, "dt_s", "/time"), "/time/dt_s");
    sc.t_end = positive(required(t, "t_end_s", "/time"), "/time/t_end_s");
    try {
      sc.num_steps();
    } catch (const Error& ex) {
      throw SchemaError("/time/t_end_s", ex.what());
    }
  }

  {
    const json& b = required(j, "bcs", "");
    expect_object(b, "/bcs");
    for (auto it = b.begin(); it != b.end(); ++it) {
      const std::string p = child("/bcs", it.key());
      const auto idx = topo.find_node(it.key());
      if (!idx) throw SchemaError(p, "unknown node '" + it.key() + "'");
      if (topo.node(*idx).kind != NodeKind::Boundary)
        throw SchemaError(p, "node '" + it.key() + "' is not a boundary node");
      expect_object(it.value(), p);
      reject_unknown(it.value(), p, {"type", "signal"});
      BoundaryCondition bc;
      try {
        bc.type = bc_type_from_string(string(required(it.value(), "type", p), child(p, "type")));
      } catch (const SchemaError&) {
        throw;
      } catch (const Error& ex) {
        throw SchemaError(child(p, "type"), ex.what());
      }
      bc.signal = signal_from_json(required(it.value(), "signal", p), child(p, "signal"));
      if (bc.type == BCType::Density || bc.type == BCType::PressureOnlyDensity) {
        const auto [lo, hi] = signal_range(bc.signal, sc.t_end);
        if (!sc.pressure.admissible(lo) || !sc.pressure.admissible(hi))
          throw SchemaError(child(p, "signal"), "prescribed density leaves the admissible interval on [0, T]");
      }
      if (const auto* tb = std::get_if<TableSignal>(&bc.signal))
        if (tb->points.front().first > 0.0 || tb->points.back().first < sc.t_end)
          throw SchemaError(child(child(p, "signal"), "points"), "table does not cover [0, T]");
      sc.bcs[it.key()] = bc;
    }
    for (std::size_t nu : topo.boundary_nodes()) {
      const auto& id = topo.node(nu).id;
      if (!sc.bcs.count(id)) throw SchemaError("/bcs", "no boundary condition for boundary node '" + id + "'");
    }
  }

  {
    const json& in = required(j, "initial", "");
    expect_object(in, "/initial");
    const std::string type = string(required(in, "type", "/initial"), "/initial/type");
    if (type == "fields") {
      reject_unknown(in, "/initial", {"type", "rho", "m", "rho_default", "m_default"});
      sc.initial.kind = InitialCondition::Kind::Fields;
      if (in.contains("rho")) sc.initial.rho = field_tables(in["rho"], "/initial/rho", topo);
      if (in.contains("m")) sc.initial.m = field_tables(in["m"], "/initial/m", topo);
      const bool has_rho_default = in.contains("rho_default");
      if (has_rho_default) sc.initial.rho_default = positive(in["rho_default"], "/initial/rho_default");
      sc.initial.m_default = number_or(in, "m_default", "/initial", 0.0);
      for (const auto& e : topo.edges())
        if (!sc.initial.rho.count(e.id) && !has_rho_default)
          throw SchemaError("/initial/rho", "no density profile for edge '" + e.id + "' and no rho_default");
    } else if (type == "steady") {
      reject_unknown(in, "/initial", {"type", "rho_guess"});
      sc.initial.kind = InitialCondition::Kind::Steady;
      if (in.contains("rho_guess")) sc.initial.steady_rho_guess = positive(in["rho_guess"], "/initial/rho_guess");
    } else {
      throw SchemaError("/initial/type", "expected \"fields\" or \"steady\", got \"" + type + "\"");
    }
  }

  if (j.contains("quadrature")) {
    const json& q = j["quadrature"];
    expect_object(q, "/quadrature");
    reject_unknown(q, "/quadrature", {"points_per_element", "exact_points"});
    if (q.contains("points_per_element"))
      sc.quadrature.points_per_element = integer(q["points_per_element"], "/quadrature/points_per_element");
    if (q.contains("exact_points")) sc.quadrature.exact_points = integer(q["exact_points"], "/quadrature/exact_points");
    const int p = sc.v2_degree > 0 ? sc.v2_degree : sc.q + 1;
    if (sc.quadrature.points_per_element > 0 && sc.quadrature.points_per_element < p + 1)
      throw SchemaError("/quadrature/points_per_element", "reduced rule needs at least " + std::to_string(p + 1) + " points");
  }

  if (j.contains("newton")) {
    const json& n = j["newton"];
    expect_object(n, "/newton");
    reject_unknown(n, "/newton", {"abs_tol", "max_iter", "backtrack", "max_halvings"});
    if (n.contains("abs_tol")) sc.newton.abs_tol = positive(n["abs_tol"], "/newton/abs_tol");
    if (n.contains("max_iter")) sc.newton.max_iter = integer(n["max_iter"], "/newton/max_iter");
    if (n.contains("backtrack")) sc.newton.backtrack = positive(n["backtrack"], "/newton/backtrack");
    if (n.contains("max_halvings")) sc.newton.max_halvings = integer(n["max_halvings"], "/newton/max_halvings");
    if (sc.newton.max_iter < 1) throw SchemaError("/newton/max_iter", "expected at least 1");
    if (sc.newton.backtrack >= 1.0) throw SchemaError("/newton/backtrack", "expected a factor in (0, 1)");
    if (sc.newton.max_halvings < 0) throw SchemaError("/newton/max_halvings", "expected a nonnegative integer");
  }

  if (j.contains("output")) {
    const json& o = j["output"];
    expect_object(o, "/output");
    reject_unknown(o, "/output", {"cadence", "probes", "out_dir"});
    if (o.contains("cadence")) sc.output.cadence = integer(o["cadence"], "/output/cadence");
    if (sc.output.cadence < 1) throw SchemaError("/output/cadence", "expected at least 1");
    if (o.contains("out_dir")) sc.output.out_dir = string(o["out_dir"], "/output/out_dir");
    if (o.contains("probes")) {
      expect_array(o["probes"], "/output/probes");
      for (std::size_t i = 0; i < o["probes"].size(); ++i) {
        const json& pj = o["probes"][i];
        const std::string p = child("/output/probes", i);
        expect_object(pj, p);
        reject_unknown(pj, p, {"edge", "x"});
        Probe pr{string(required(pj, "edge", p), child(p, "edge")), number(required(pj, "x", p), child(p, "x"))};
        const auto idx = topo.find_edge(pr.edge);
        if (!idx) throw SchemaError(child(p, "edge"), "unknown edge '" + pr.edge + "'");
        if (pr.x < 0.0 || pr.x > topo.edge(*idx).length)
          throw SchemaError(child(p, "x"), "probe lies outside the edge");
        sc.output.probes.push_back(pr);
      }
    }
  }
  return sc;
}

json scenario_to_json(const Scenario& sc, const std::string& network_ref) {
  json j;
  if (!sc.name.empty()) j["name"] = sc.name;
  if (!sc.description.empty()) j["description"] = sc.description;
  j["network"] = network_ref.empty() ? network_to_json(sc.network) : json(network_ref);
  j["space"] = {{"q", sc.q}};
  if (sc.dx_max) j["space"]["dx_max_m"] = *sc.dx_max;
  if (sc.v2_degree > 0) j["space"]["v2_degree"] = sc.v2_degree;
  j["law"] = {{"pressure", pressure_to_json(sc.pressure)}, {"lambda", sc.lambda}};
  j["bcs"] = json::object();
  for (const auto& [id, bc] : sc.bcs) j["bcs"][id] = {{"type", to_string(bc.type)}, {"signal", signal_to_json(bc.signal)}};
  if (sc.initial.kind == InitialCondition::Kind::Fields) {
    json in = {{"type", "fields"}, {"rho_default", sc.initial.rho_default}, {"m_default", sc.initial.m_default}};
    in["rho"] = json::object();
    in["m"] = json::object();
    for (const auto& [id, t] : sc.initial.rho) in["rho"][id] = pairs_to_json(t.points);
    for (const auto& [id, t] : sc.initial.m) in["m"][id] = pairs_to_json(t.points);
    j["initial"] = in;
  } else {
    j["initial"] = {{"type", "steady"}};
    if (sc.initial.steady_rho_guess) j["initial"]["rho_guess"] = *sc.initial.steady_rho_guess;
  }
  j["time"] = {{"dt_s", sc.dt}, {"t_end_s", sc.t_end}};
  j["quadrature"] = {{"points_per_element", sc.quadrature.points_per_element},
                     {"exact_points", sc.quadrature.exact_points}};
  j["newton"] = {{"abs_tol", sc.newton.abs_tol},
                 {"max_iter", sc.newton.max_iter},
                 {"backtrack", sc.newton.backtrack},
                 {"max_halvings", sc.newton.max_halvings}};
  json out = {{"cadence", sc.output.cadence}, {"probes", json::array()}};
  for (const auto& p : sc.output.probes) out["probes"].push_back({{"edge", p.edge}, {"x", p.x}});
  if (!sc.output.out_dir.empty()) out["out_dir"] = sc.output.out_dir;
  j["output"] = out;
  return j;
}

Scenario load_scenario(const std::string& path, std::vector<std::string>* warnings) {
  const json j = read_json(path);
  return scenario_from_json(j, fs::path(path).parent_path().string().empty() ? "." : fs::path(path).parent_path().string(),
                            warnings);
}

void save_json(const std::string& path, const json& j) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

void save_scenario(const std::string& path, const Scenario& sc, const std::string& network_ref) {
  save_json(path, scenario_to_json(sc, network_ref));
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_diagnostics_csv(std::ostream& os, const std::vector<StepDiagnostics>& rows) {
  const auto& cols = diagnostics_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << "\n";
  for (const auto& d : rows) {
    os << format_double(d.t) << ',' << format_double(d.mass) << ',' << format_double(d.hamiltonian) << ','
       << format_double(d.boundary_power) << ',' << format_double(d.friction_dissipation) << ','
       << format_double(d.dissipation_slack) << ',' << format_double(d.mass_residual) << ','
       << format_double(d.local_residual) << ',' << d.newton_iters << "\n";
  }
}

namespace {

void write_point(std::ostream& os, const Model& model, const State& s, const EdgePoint& pt) {
  const SpacePair& sp = *model.space;
  const double rho = sp.eval_v1(s.a1, pt), m = sp.eval_v2(s.a2, pt);
  const double area = sp.topology().edge(pt.edge).area;
  os << format_double(rho) << ',' << format_double(m) << ',' << format_double(m / rho) << ','
     << format_double(model.ops->law().pressure().p(rho)) << ',' << format_double(area * m);
}

}  // namespace

void write_probe_csv(std::ostream& os, const Model& model, const Trajectory& tr, const EdgePoint& pt) {
  os << "t,rho,m,v,p,mass_flow\n";
  for (std::size_t k = 0; k < tr.states.size(); ++k) {
    os << format_double(tr.times[k]) << ',';
    write_point(os, model, tr.states[k], pt);
    os << "\n";
  }
}

void write_ports_csv(std::ostream& os, const Model& model, const Trajectory& tr) {
  const auto& topo = model.space->topology();
  os << "t";
  for (std::size_t nu : topo.boundary_nodes()) os << ",e_" << topo.node(nu).id;
  for (std::size_t nu : topo.boundary_nodes()) os << ",f_" << topo.node(nu).id;
  os << "\n";
  for (std::size_t k = 0; k < tr.states.size(); ++k) {
    os << format_double(tr.times[k]);
    for (long i = 0; i < tr.states[k].e.size(); ++i) os << ',' << format_double(tr.states[k].e[i]);
    for (long i = 0; i < tr.flows[k].size(); ++i) os << ',' << format_double(tr.flows[k][i]);
    os << "\n";
  }
}

void write_state_csv(std::ostream& os, const Model& model, const State& s) {
  const SpacePair& sp = *model.space;
  os << "edge,x,rho,m,v,p,mass_flow\n";
  for (std::size_t e = 0; e < sp.topology().num_edges(); ++e) {
    const auto& edge = sp.topology().edge(e);
    std::vector<double> xs{0.0};
    const std::size_t end = e + 1 < sp.topology().num_edges() ? sp.edge_first_element(e + 1) : sp.num_elements();
    for (std::size_t el = sp.edge_first_element(e); el < end; ++el)
      xs.push_back(0.5 * (sp.elements()[el].x0 + sp.elements()[el].x1));
    xs.push_back(edge.length);
    for (double x : xs) {
      os << edge.id << ',' << format_double(x) << ',';
      write_point(os, model, s, {e, x});
      os << "\n";
    }
  }
}

json run_metadata(const Scenario& sc, const Model& model) {
  const DiscreteOperators& ops = *model.ops;
  const SpacePair& sp = *model.space;
  json m;
  m["scenario"] = scenario_to_json(sc);
  json mesh = json::object();
  for (const auto& e : sp.topology().edges()) mesh[e.id] = {{"num_elements", e.num_elements}, {"dx_m", e.length / e.num_elements}};
  m["mesh"] = mesh;
  m["discretization"] = {
      {"v1", "Q_q, Legendre modes per element"},
      {"v2", "P_p, Gauss-Lobatto Lagrange nodes per element"},
      {"q", sp.q()},
      {"v2_degree", sp.v2_degree()},
      {"n1", sp.n1()},
      {"n2", sp.n2()},
      {"num_elements", sp.num_elements()},
      {"junction_elimination", "tail/head value of the lowest-index adjacent edge"},
      {"reduced_points_per_element", ops.reduced_points()},
      {"exact_points_per_element", ops.exact_points()},
      {"friction_sign_at_zero", 0},
  };
  json closures = json::object();
  for (const auto& [id, bc] : sc.bcs) {
    std::string form;
    switch (bc.type) {
      case BCType::Flow: form = "f - u"; break;
      case BCType::Effort: form = "e - u"; break;
      case BCType::Density: form = "e - P'(u) - (f/(A u))^2/2"; break;
      case BCType::PressureOnlyDensity: form = "e - P'(u)"; break;
    }
    closures[id] = {{"type", to_string(bc.type)}, {"closure", form}};
  }
  m["boundary_closures"] = closures;
  m["closure_scaling"] = "row divided by max(1, |u|) for flow/effort and max(1, |P'(u)|) for density rows";
  m["time_integration"] = {{"scheme", "implicit Euler-type, a1 eliminated via a1 = a1_prev + dt B a2"},
                           {"dt_s", sc.dt},
                           {"num_steps", sc.num_steps()},
                           {"step_failure", "abort"}};
  m["newton"] = {{"abs_tol", sc.newton.abs_tol},
                 {"convergence", "||F_balance||_2 <= abs_tol and max|F_closure| <= abs_tol"},
                 {"max_iter", sc.newton.max_iter},
                 {"backtrack", sc.newton.backtrack},
                 {"max_halvings", sc.newton.max_halvings},
                 {"merit", "||F||_2"},
                 {"initial_guess", "previous step"},
                 {"linear_solver", "sparse LU, pattern reused"}};
  m["law"] = {{"pressure", pressure_to_json(sc.pressure)},
              {"lambda", sc.lambda},
              {"rho_min", sc.pressure.rho_min()},
              {"rho_max", std::isfinite(sc.pressure.rho_max()) ? json(sc.pressure.rho_max()) : json("inf")}};
  const SteadyOptions so;
  m["steady"] = {{"strategies", {"newton", "pseudo_transient", "homotopy"}},
                 {"zero_flow_gauge", "total-mass anchor with a mass-source unknown when all ports are flow"},
                 {"ptc_max_steps", so.ptc_max_steps},
                 {"homotopy_stages", so.homotopy_stages}};
  return m;
}

}  // namespace phnet
