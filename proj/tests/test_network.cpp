#include <doctest.h>

#include <algorithm>

#include "phnet/benchmarks.hpp"
#include "phnet/network.hpp"

using namespace phnet;

namespace {

Edge make_edge(std::string id, std::string tail, std::string head, double area = 1.0) {
  Edge e;
  e.id = std::move(id);
  e.tail = std::move(tail);
  e.head = std::move(head);
  e.length = 1.0;
  e.area = area;
  return e;
}

// Two boundary nodes v1, v3 and the junction v2: w1 = (v1, v2), w2 = (v2, v3).
NetworkTopology serial(double area = 1.0) {
  return NetworkTopology({{"v1", NodeKind::Boundary}, {"v2", NodeKind::Interior}, {"v3", NodeKind::Boundary}},
                         {make_edge("w1", "v1", "v2", area), make_edge("w2", "v2", "v3", area)});
}

bool mentions(const std::vector<std::string>& errs, const std::string& needle) {
  return std::any_of(errs.begin(), errs.end(), [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

}  // namespace

TEST_SUITE("network") {

TEST_CASE("incidence signs on a serial path") {
  const NetworkTopology t = serial();
  CHECK(t.incidence("w1", "v1") == 1.0);
  CHECK(t.incidence("w1", "v2") == -1.0);
  CHECK(t.incidence("w2", "v2") == 1.0);
  CHECK(t.incidence("w2", "v3") == -1.0);
  CHECK_THROWS_AS(t.incidence("w1", "v3"), NetworkError);
  CHECK(validate(t).empty());
}

TEST_CASE("incidence is weighted by the cross-section") {
  const NetworkTopology t = serial(0.5);
  CHECK(t.incidence("w1", "v1") == 0.5);
  CHECK(t.incidence("w1", "v2") == -0.5);
}

TEST_CASE("adjacent edges of a junction") {
  const NetworkTopology t = serial();
  const auto& adj = t.adjacent_edges("v2");
  REQUIRE(adj.size() == 2);
  CHECK(t.edge(adj[0].edge).id == "w1");
  CHECK(adj[0].sign == -1);
  CHECK(t.edge(adj[1].edge).id == "w2");
  CHECK(adj[1].sign == 1);
  CHECK(adj[1].weight == 1.0);
}

TEST_CASE("ports follow id order") {
  const NetworkTopology y = y_network();
  REQUIRE(y.num_ports() == 3);
  CHECK(y.node(y.boundary_nodes()[0]).id == "n1");
  CHECK(y.node(y.boundary_nodes()[1]).id == "n3");
  CHECK(y.node(y.boundary_nodes()[2]).id == "n4");
  CHECK_FALSE(y.port_of(y.node_index("n2")).has_value());
  CHECK(*y.port_of(y.node_index("n4")) == 2);
  CHECK(y.edge(y.boundary_edge(1).edge).id == "w2");
  CHECK(y.boundary_edge(1).sign == -1);
}

TEST_CASE("indexing does not depend on input order") {
  NetworkTopology a({{"b", NodeKind::Boundary}, {"a", NodeKind::Boundary}}, {make_edge("e2", "a", "b")});
  NetworkTopology b({{"a", NodeKind::Boundary}, {"b", NodeKind::Boundary}}, {make_edge("e2", "a", "b")});
  CHECK(a.node(0).id == "a");
  CHECK(a.node_index("b") == b.node_index("b"));
  CHECK(a.incidence(0, 0) == b.incidence(0, 0));
}

TEST_CASE("reversing an edge negates its incidences") {
  const NetworkTopology y = y_network();
  const std::size_t w2 = y.edge_index("w2");
  const NetworkTopology r = y.with_reversed_edge(w2);
  for (const char* v : {"n2", "n3"}) CHECK(r.incidence("w2", v) == -y.incidence("w2", v));
  CHECK_THROWS_AS(r.incidence("w2", "n1"), NetworkError);
  CHECK(r.edge(w2).tail == "n3");
  CHECK(validate(r).empty());
}

TEST_CASE("constructor rejects duplicates and unknown nodes") {
  CHECK_THROWS_AS(NetworkTopology({{"a", NodeKind::Boundary}, {"a", NodeKind::Boundary}}, {}), NetworkError);
  CHECK_THROWS_AS(NetworkTopology({{"a", NodeKind::Boundary}}, {make_edge("w", "a", "zz")}), NetworkError);
  CHECK_THROWS_AS(NetworkTopology({{"a", NodeKind::Boundary}, {"b", NodeKind::Boundary}},
                                  {make_edge("w", "a", "b"), make_edge("w", "b", "a")}),
                  NetworkError);
}

TEST_CASE("validate reports structural violations") {
  SUBCASE("boundary node of degree two") {
    NetworkTopology t({{"a", NodeKind::Boundary}, {"b", NodeKind::Boundary}, {"c", NodeKind::Boundary}},
                      {make_edge("w1", "a", "b"), make_edge("w2", "b", "c")});
    CHECK(mentions(validate(t), "'b'"));
    CHECK_THROWS_AS(require_valid(t), NetworkError);
  }
  SUBCASE("disconnected graph") {
    NetworkTopology t({{"a", NodeKind::Boundary}, {"b", NodeKind::Boundary}, {"c", NodeKind::Boundary},
                       {"d", NodeKind::Boundary}},
                      {make_edge("w1", "a", "b"), make_edge("w2", "c", "d")});
    CHECK_FALSE(validate(t).empty());
  }
  SUBCASE("self loop") {
    NetworkTopology t({{"a", NodeKind::Boundary}, {"j", NodeKind::Interior}, {"b", NodeKind::Boundary}},
                      {make_edge("w1", "a", "j"), make_edge("w2", "j", "j"), make_edge("w3", "j", "b")});
    CHECK_FALSE(validate(t).empty());
  }
  SUBCASE("non-positive geometry") {
    NetworkTopology t({{"a", NodeKind::Boundary}, {"b", NodeKind::Boundary}}, {make_edge("w1", "a", "b", 0.0)});
    CHECK(mentions(validate(t), "w1"));
  }
}

TEST_CASE("parallel edges and loops between junctions are valid") {
  NetworkTopology t({{"a", NodeKind::Boundary}, {"j1", NodeKind::Interior}, {"j2", NodeKind::Interior},
                     {"b", NodeKind::Boundary}},
                    {make_edge("w1", "a", "j1"), make_edge("w2", "j1", "j2"), make_edge("w3", "j1", "j2"),
                     make_edge("w4", "j2", "b")});
  CHECK(validate(t).empty());
  CHECK(validate(pipeline_network()).empty());
}

TEST_CASE("friction diameter falls back to the equivalent circle") {
  Edge e = make_edge("w", "a", "b", circular_area(0.8));
  CHECK(e.friction_diameter() == doctest::Approx(0.8).epsilon(1e-14));
  e.diameter = 0.5;
  CHECK(e.friction_diameter() == 0.5);
}

}
