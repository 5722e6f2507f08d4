#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "phnet/errors.hpp"

namespace phnet {

enum class NodeKind { Interior, Boundary };

struct Node {
  std::string id;
  NodeKind kind = NodeKind::Interior;
};

/// A pipe. Local coordinate x runs from 0 at the tail to `length` at the head.
struct Edge {
  std::string id;
  std::string tail;
  std::string head;
  double length = 0.0;
  std::optional<double> diameter;  ///< meters; absent for dimensionless setups
  double area = 0.0;               ///< cross-sectional weight A
  int num_elements = 1;

  /// Hydraulic diameter used by the friction term. Falls back to the circle
  /// with the same area when no diameter was given.
  double friction_diameter() const;
};

/// Default cross-section pi/4 * D^2 for a circular pipe.
double circular_area(double diameter);

struct EdgeIncidence {
  std::size_t edge = 0;
  int sign = 0;        ///< +1 if the node is the tail, -1 if it is the head
  double weight = 0.0; ///< sign * A
};

/// Directed graph with per-edge geometry. Nodes and edges are indexed densely
/// in order of ascending id, so assembly order does not depend on file order.
class NetworkTopology {
 public:
  NetworkTopology() = default;
  /// Throws NetworkError for duplicate ids or edges that reference unknown
  /// nodes. All other structural requirements are reported by validate().
  NetworkTopology(std::vector<Node> nodes, std::vector<Edge> edges);

  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Node& node(std::size_t i) const { return nodes_.at(i); }
  const Edge& edge(std::size_t i) const { return edges_.at(i); }

  std::size_t node_index(const std::string& id) const;
  std::size_t edge_index(const std::string& id) const;
  std::optional<std::size_t> find_node(const std::string& id) const;
  std::optional<std::size_t> find_edge(const std::string& id) const;

  std::size_t tail_index(std::size_t edge) const { return tail_.at(edge); }
  std::size_t head_index(std::size_t edge) const { return head_.at(edge); }

  /// Boundary nodes nu_1..nu_p in id order; the position is the port index.
  const std::vector<std::size_t>& boundary_nodes() const { return boundary_; }
  const std::vector<std::size_t>& interior_nodes() const { return interior_; }
  std::size_t num_ports() const { return boundary_.size(); }
  /// Port index of a boundary node, or nullopt for an interior node.
  std::optional<std::size_t> port_of(std::size_t node) const;

  /// Area-weighted incidence n^w[nu]: +A at the tail, -A at the head.
  double incidence(std::size_t edge, std::size_t node) const;
  double incidence(const std::string& edge, const std::string& node) const;

  /// Adjacent edges with their orientation, sorted by edge index.
  const std::vector<EdgeIncidence>& adjacent_edges(std::size_t node) const;
  const std::vector<EdgeIncidence>& adjacent_edges(const std::string& node) const;

  /// The single edge attached to a boundary node.
  const EdgeIncidence& boundary_edge(std::size_t port) const;

  /// Copy with one edge's direction reversed.
  NetworkTopology with_reversed_edge(std::size_t edge) const;

 private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> tail_, head_;
  std::vector<std::vector<EdgeIncidence>> adjacency_;
  std::vector<std::size_t> boundary_, interior_;
  std::vector<std::optional<std::size_t>> port_;
};

/// All violated structural requirements; empty means valid.
std::vector<std::string> validate(const NetworkTopology& topology);

/// Throws NetworkError listing every violation.
void require_valid(const NetworkTopology& topology);

}  // namespace phnet
