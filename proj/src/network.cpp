#include "phnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace phnet {

double circular_area(double diameter) {
  return 0.25 * std::numbers::pi * diameter * diameter;
}

double Edge::friction_diameter() const {
  if (diameter) return *diameter;
  return std::sqrt(4.0 * area / std::numbers::pi);
}

NetworkTopology::NetworkTopology(std::vector<Node> nodes, std::vector<Edge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  auto by_id = [](const auto& a, const auto& b) { return a.id < b.id; };
  std::sort(nodes_.begin(), nodes_.end(), by_id);
  std::sort(edges_.begin(), edges_.end(), by_id);
  for (std::size_t i = 1; i < nodes_.size(); ++i)
    if (nodes_[i].id == nodes_[i - 1].id) throw NetworkError("duplicate node id '" + nodes_[i].id + "'");
  for (std::size_t i = 1; i < edges_.size(); ++i)
    if (edges_[i].id == edges_[i - 1].id) throw NetworkError("duplicate edge id '" + edges_[i].id + "'");

  adjacency_.assign(nodes_.size(), {});
  tail_.resize(edges_.size());
  head_.resize(edges_.size());
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    const Edge& e = edges_[k];
    auto t = find_node(e.tail);
    auto h = find_node(e.head);
    if (!t) throw NetworkError("edge '" + e.id + "' references unknown node '" + e.tail + "'");
    if (!h) throw NetworkError("edge '" + e.id + "' references unknown node '" + e.head + "'");
    tail_[k] = *t;
    head_[k] = *h;
    if (*t != *h) {
      adjacency_[*t].push_back({k, +1, e.area});
      adjacency_[*h].push_back({k, -1, -e.area});
    }
  }
  port_.assign(nodes_.size(), std::nullopt);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].kind == NodeKind::Boundary) {
      port_[i] = boundary_.size();
      boundary_.push_back(i);
    } else {
      interior_.push_back(i);
    }
  }
}

std::optional<std::size_t> NetworkTopology::find_node(const std::string& id) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id,
                             [](const Node& n, const std::string& s) { return n.id < s; });
  if (it == nodes_.end() || it->id != id) return std::nullopt;
  return static_cast<std::size_t>(it - nodes_.begin());
}

std::optional<std::size_t> NetworkTopology::find_edge(const std::string& id) const {
  auto it = std::lower_bound(edges_.begin(), edges_.end(), id,
                             [](const Edge& e, const std::string& s) { return e.id < s; });
  if (it == edges_.end() || it->id != id) return std::nullopt;
  return static_cast<std::size_t>(it - edges_.begin());
}

std::size_t NetworkTopology::node_index(const std::string& id) const {
  if (auto i = find_node(id)) return *i;
  throw NetworkError("unknown node '" + id + "'");
}

std::size_t NetworkTopology::edge_index(const std::string& id) const {
  if (auto i = find_edge(id)) return *i;
  throw NetworkError("unknown edge '" + id + "'");
}

std::optional<std::size_t> NetworkTopology::port_of(std::size_t node) const {
  return port_.at(node);
}

double NetworkTopology::incidence(std::size_t edge, std::size_t node) const {
  if (tail_.at(edge) == node) return edges_[edge].area;
  if (head_.at(edge) == node) return -edges_[edge].area;
  throw NetworkError("node '" + nodes_.at(node).id + "' is not adjacent to edge '" +
                     edges_[edge].id + "'");
}

double NetworkTopology::incidence(const std::string& edge, const std::string& node) const {
  return incidence(edge_index(edge), node_index(node));
}

const std::vector<EdgeIncidence>& NetworkTopology::adjacent_edges(std::size_t node) const {
  return adjacency_.at(node);
}

const std::vector<EdgeIncidence>& NetworkTopology::adjacent_edges(const std::string& node) const {
  return adjacency_.at(node_index(node));
}

const EdgeIncidence& NetworkTopology::boundary_edge(std::size_t port) const {
  const auto& adj = adjacency_.at(boundary_.at(port));
  if (adj.size() != 1)
    throw NetworkError("boundary node '" + nodes_[boundary_[port]].id + "' has degree " +
                       std::to_string(adj.size()));
  return adj.front();
}

NetworkTopology NetworkTopology::with_reversed_edge(std::size_t edge) const {
  std::vector<Edge> edges = edges_;
  std::swap(edges.at(edge).tail, edges.at(edge).head);
  return NetworkTopology(nodes_, std::move(edges));
}

std::vector<std::string> validate(const NetworkTopology& topology) {
  std::vector<std::string> out;
  const std::size_t nn = topology.num_nodes();
  if (nn == 0) out.push_back("network has no nodes");
  if (topology.num_edges() == 0) out.push_back("network has no edges");

  for (std::size_t k = 0; k < topology.num_edges(); ++k) {
    const Edge& e = topology.edge(k);
    if (!(e.length > 0.0) || !std::isfinite(e.length))
      out.push_back("edge '" + e.id + "': length must be positive");
    if (!(e.area > 0.0) || !std::isfinite(e.area))
      out.push_back("edge '" + e.id + "': area must be positive");
    if (e.diameter && !(*e.diameter > 0.0))
      out.push_back("edge '" + e.id + "': diameter must be positive");
    if (e.num_elements < 1)
      out.push_back("edge '" + e.id + "': num_elements must be at least 1");
    if (topology.tail_index(k) == topology.head_index(k))
      out.push_back("edge '" + e.id + "': self-loop");
  }

  for (std::size_t i = 0; i < nn; ++i) {
    const Node& n = topology.node(i);
    const auto deg = topology.adjacent_edges(i).size();
    if (n.kind == NodeKind::Boundary && deg != 1) {
      std::ostringstream os;
      os << "boundary node '" << n.id << "': degree " << deg << " != 1";
      out.push_back(os.str());
    }
    if (n.kind == NodeKind::Interior && deg == 0)
      out.push_back("interior node '" + n.id + "' is isolated");
  }

  if (nn > 0) {
    std::vector<char> seen(nn, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      auto v = stack.back();
      stack.pop_back();
      for (const auto& inc : topology.adjacent_edges(v)) {
        auto w = topology.tail_index(inc.edge) == v ? topology.head_index(inc.edge)
                                                     : topology.tail_index(inc.edge);
        if (!seen[w]) {
          seen[w] = 1;
          stack.push_back(w);
        }
      }
    }
    if (std::count(seen.begin(), seen.end(), 0) > 0) out.push_back("network is disconnected");
  }
  return out;
}

void require_valid(const NetworkTopology& topology) {
  auto v = validate(topology);
  if (v.empty()) return;
  std::string msg = "invalid network:";
  for (const auto& s : v) msg += "\n  " + s;
  throw NetworkError(msg);
}

}  // namespace phnet
