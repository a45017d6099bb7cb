#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qubench {

class BinaryQuadraticModel;

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Topology {
  enum class Kind { Pegasus, Lattice3d, Clique, DRegular, Imported };
  Kind kind = Kind::Imported;
  std::vector<int> params;

  std::string describe() const;
  static Topology parse(const std::string& text);
  bool operator==(const Topology&) const = default;
};

/// Undirected simple graph over node ids in [0, capacity).
///
/// Node ids are stable under yield masking: disabling a qubit removes it and
/// its couplers but keeps every other id unchanged. The disabled lists record
/// what was masked relative to the generating topology.
class Graph {
 public:
  Graph() = default;
  Graph(std::size_t capacity, std::vector<Edge> edges, Topology topology = {},
        std::vector<NodeId> disabled_nodes = {});

  std::size_t capacity() const { return present_.size(); }
  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t num_edges() const { return edges_.size(); }

  bool has_node(NodeId v) const { return v < present_.size() && present_[v]; }
  bool has_edge(NodeId u, NodeId v) const;

  std::vector<NodeId> nodes() const;
  const std::vector<Edge>& edges() const { return edges_; }
  std::span<const NodeId> neighbors(NodeId v) const;
  std::size_t degree(NodeId v) const { return neighbors(v).size(); }
  std::size_t max_degree() const;

  const Topology& topology() const { return topology_; }
  const std::vector<NodeId>& disabled_nodes() const { return disabled_nodes_; }
  const std::vector<Edge>& disabled_edges() const { return disabled_edges_; }

  bool operator==(const Graph& other) const;

 private:
  friend Graph apply_yield(const Graph&, std::span<const NodeId>,
                           std::span<const Edge>);

  void build_adjacency();

  std::vector<bool> present_;
  std::size_t num_nodes_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> adjacency_;
  Topology topology_;
  std::vector<NodeId> disabled_nodes_;
  std::vector<Edge> disabled_edges_;
};

using HardwareGraph = Graph;

// Pegasus coordinates (u, w, k, z): u orientation, w perpendicular offset,
// k track within the tile, z position along the qubit's line.
struct PegasusCoord {
  int u = 0, w = 0, k = 0, z = 0;
};

/// Per-track line offsets of the standard Pegasus construction.
extern const int kPegasusVerticalOffsets[12];
extern const int kPegasusHorizontalOffsets[12];

NodeId pegasus_index(int m, const PegasusCoord& c);
PegasusCoord pegasus_coord(int m, NodeId id);

/// Fabric-only Pegasus P_m: 8(m-1)(3m-1) qubits, maximum degree 15.
Graph pegasus(int m);

Graph lattice3d(int x, int y, int z);
NodeId lattice3d_index(int X, int Y, int x, int y, int z);

Graph clique(int k);

/// Random d-regular simple graph via configuration-model pairing.
Graph dreg(int n, int d, std::uint64_t seed, int max_retries = 1000);

/// Removes the listed nodes (with their incident edges) and edges. Ids that
/// are already masked are accepted; ids unknown to the graph are rejected.
Graph apply_yield(const Graph& g, std::span<const NodeId> disabled_nodes,
                  std::span<const Edge> disabled_edges);

/// Keeps each node with probability node_yield; edges between surviving
/// nodes are kept so the expected overall edge fraction is edge_yield.
Graph apply_random_yield(const Graph& g, double node_yield, double edge_yield,
                         std::uint64_t seed);

/// Interaction graph of a model over dense variable ids.
Graph graph_of(const BinaryQuadraticModel& model);

Graph induced_subgraph(const Graph& g, std::span<const NodeId> keep);

// text format: optional "#topology <kind> <params...>", header "q c"
// (q = node-id capacity, c = edge lines), c lines "i j", then optional
// "#disabled_nodes" and "#disabled_edges" sections.
void write_graph(std::ostream& out, const Graph& g);
Graph read_graph(std::istream& in);
void save_graph(const Graph& g, const std::filesystem::path& path);
Graph load_graph(const std::filesystem::path& path);

}  // namespace qubench
