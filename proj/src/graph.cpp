#include "qubench/graph.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "qubench/model.hpp"
#include "qubench/rng.hpp"

namespace qubench {

const int kPegasusVerticalOffsets[12] = {2, 2, 2, 2, 10, 10, 10, 10, 6, 6, 6, 6};
const int kPegasusHorizontalOffsets[12] = {6, 6, 6, 6, 2, 2, 2, 2, 10, 10, 10, 10};

namespace {

Edge normalized(NodeId a, NodeId b) { return a < b ? Edge{a, b} : Edge{b, a}; }

const char* kind_name(Topology::Kind kind) {
  switch (kind) {
    case Topology::Kind::Pegasus: return "pegasus";
    case Topology::Kind::Lattice3d: return "lattice3d";
    case Topology::Kind::Clique: return "clique";
    case Topology::Kind::DRegular: return "dreg";
    case Topology::Kind::Imported: return "imported";
  }
  return "imported";
}

}  // namespace

std::string Topology::describe() const {
  std::string out = kind_name(kind);
  for (int p : params) out += " " + std::to_string(p);
  return out;
}

Topology Topology::parse(const std::string& text) {
  std::istringstream in(text);
  std::string name;
  in >> name;
  Topology t;
  if (name == "pegasus") t.kind = Kind::Pegasus;
  else if (name == "lattice3d") t.kind = Kind::Lattice3d;
  else if (name == "clique") t.kind = Kind::Clique;
  else if (name == "dreg") t.kind = Kind::DRegular;
  else if (name == "imported" || name.empty()) t.kind = Kind::Imported;
  else throw GraphError("unknown topology '" + name + "'");
  int p;
  while (in >> p) t.params.push_back(p);
  return t;
}

Graph::Graph(std::size_t capacity, std::vector<Edge> edges, Topology topology,
             std::vector<NodeId> disabled_nodes)
    : present_(capacity, true), topology_(std::move(topology)) {
  std::sort(disabled_nodes.begin(), disabled_nodes.end());
  disabled_nodes.erase(std::unique(disabled_nodes.begin(), disabled_nodes.end()),
                       disabled_nodes.end());
  for (NodeId v : disabled_nodes) {
    if (v >= capacity) throw GraphError("disabled node " + std::to_string(v) + " out of range");
    present_[v] = false;
  }
  disabled_nodes_ = std::move(disabled_nodes);
  for (auto& e : edges) {
    if (e.first == e.second) throw GraphError("self-loop on node " + std::to_string(e.first));
    e = normalized(e.first, e.second);
    if (e.second >= capacity) throw GraphError("edge endpoint " + std::to_string(e.second) + " out of range");
    if (!present_[e.first] || !present_[e.second])
      throw GraphError("edge (" + std::to_string(e.first) + "," + std::to_string(e.second) +
                       ") references a disabled node");
  }
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
    throw GraphError("duplicate edge");
  edges_ = std::move(edges);
  num_nodes_ = capacity - disabled_nodes_.size();
  build_adjacency();
}

void Graph::build_adjacency() {
  const std::size_t q = present_.size();
  offsets_.assign(q + 1, 0);
  for (auto [a, b] : edges_) {
    ++offsets_[a + 1];
    ++offsets_[b + 1];
  }
  for (std::size_t i = 0; i < q; ++i) offsets_[i + 1] += offsets_[i];
  adjacency_.assign(offsets_[q], 0);
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (auto [a, b] : edges_) {
    adjacency_[fill[a]++] = b;
    adjacency_[fill[b]++] = a;
  }
  for (std::size_t i = 0; i < q; ++i)
    std::sort(adjacency_.begin() + offsets_[i], adjacency_.begin() + offsets_[i + 1]);
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  if (u >= present_.size() || v >= present_.size()) return false;
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

std::vector<NodeId> Graph::nodes() const {
  std::vector<NodeId> out;
  out.reserve(num_nodes_);
  for (NodeId v = 0; v < present_.size(); ++v)
    if (present_[v]) out.push_back(v);
  return out;
}

std::span<const NodeId> Graph::neighbors(NodeId v) const {
  if (v >= present_.size()) return {};
  return {adjacency_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
}

std::size_t Graph::max_degree() const {
  std::size_t d = 0;
  for (NodeId v = 0; v < present_.size(); ++v) d = std::max(d, degree(v));
  return d;
}

bool Graph::operator==(const Graph& other) const {
  return present_ == other.present_ && edges_ == other.edges_ &&
         topology_ == other.topology_ && disabled_edges_ == other.disabled_edges_;
}

NodeId pegasus_index(int m, const PegasusCoord& c) {
  const int m1 = m - 1;
  return static_cast<NodeId>(((c.u * m + c.w) * 12 + c.k) * m1 + c.z);
}

PegasusCoord pegasus_coord(int m, NodeId id) {
  const int m1 = m - 1;
  PegasusCoord c;
  int r = static_cast<int>(id);
  c.z = r % m1;
  r /= m1;
  c.k = r % 12;
  r /= 12;
  c.w = r % m;
  c.u = r / m;
  return c;
}

Graph pegasus(int m) {
  if (m < 2) throw GraphError("pegasus requires m >= 2, got " + std::to_string(m));
  const int m1 = m - 1;
  const auto& off0 = kPegasusVerticalOffsets;
  const auto& off1 = kPegasusHorizontalOffsets;
  const int fs[2] = {*std::min_element(off1, off1 + 12), *std::min_element(off0, off0 + 12)};
  const int fe[2] = {12 - *std::max_element(off1, off1 + 12),
                     12 - *std::max_element(off0, off0 + 12)};
  auto in_fabric = [&](const PegasusCoord& c) {
    if (c.w == 0) return c.k >= fs[c.u];
    if (c.w == m1) return c.k < 12 - fe[c.u];
    return true;
  };

  const std::size_t capacity = static_cast<std::size_t>(24) * m * m1;
  std::vector<Edge> edges;
  auto add = [&](const PegasusCoord& a, const PegasusCoord& b) {
    edges.push_back(normalized(pegasus_index(m, a), pegasus_index(m, b)));
  };

  for (int u = 0; u < 2; ++u) {
    for (int w = 0; w < m; ++w) {
      const int k_lo = w == 0 ? fs[u] : 0;
      const int k_hi = 12 - (w == m1 ? fe[u] : 0);
      for (int k = k_lo; k < k_hi; ++k)
        for (int z = 0; z + 1 < m1; ++z) add({u, w, k, z}, {u, w, k, z + 1});
      for (int k = k_lo; k < k_hi; k += 2)
        for (int z = 0; z < m1; ++z) add({u, w, k, z}, {u, w, k + 1, z});
    }
  }
  for (int w = 0; w < m; ++w) {
    for (int kk = 0; kk < 12; ++kk) {
      const int k_lo = w ? 0 : off1[kk];
      const int k_hi = w < m1 ? 12 : off1[kk];
      for (int k = k_lo; k < k_hi; ++k) {
        for (int z = 0; z < m1; ++z) {
          PegasusCoord a{0, w, k, z};
          PegasusCoord b{1, z + (kk < off0[k] ? 1 : 0), kk, w - (k < off1[kk] ? 1 : 0)};
          if (in_fabric(a) && in_fabric(b)) add(a, b);
        }
      }
    }
  }

  std::vector<bool> used(capacity, false);
  for (auto [a, b] : edges) used[a] = used[b] = true;
  std::vector<NodeId> absent;
  for (NodeId v = 0; v < capacity; ++v)
    if (!used[v]) absent.push_back(v);

  // Coordinates outside the fabric never carry a qubit; they are listed as
  // disabled so that ids stay aligned with the coordinate scheme.
  return Graph(capacity, std::move(edges), Topology{Topology::Kind::Pegasus, {m}},
               std::move(absent));
}

NodeId lattice3d_index(int X, int Y, int x, int y, int z) {
  return static_cast<NodeId>((z * Y + y) * X + x);
}

Graph lattice3d(int X, int Y, int Z) {
  if (X < 2 || Y < 2 || Z < 2)
    throw GraphError("lattice3d dimensions must all be >= 2");
  std::vector<Edge> edges;
  for (int z = 0; z < Z; ++z)
    for (int y = 0; y < Y; ++y)
      for (int x = 0; x < X; ++x) {
        const NodeId v = lattice3d_index(X, Y, x, y, z);
        if (x + 1 < X) edges.emplace_back(v, lattice3d_index(X, Y, x + 1, y, z));
        if (y + 1 < Y) edges.emplace_back(v, lattice3d_index(X, Y, x, y + 1, z));
        if (z + 1 < Z) edges.emplace_back(v, lattice3d_index(X, Y, x, y, z + 1));
      }
  return Graph(static_cast<std::size_t>(X) * Y * Z, std::move(edges),
               Topology{Topology::Kind::Lattice3d, {X, Y, Z}});
}

Graph clique(int k) {
  if (k < 1) throw GraphError("clique requires k >= 1");
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(k) * (k - 1) / 2);
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) edges.emplace_back(i, j);
  return Graph(k, std::move(edges), Topology{Topology::Kind::Clique, {k}});
}

Graph dreg(int n, int d, std::uint64_t seed, int max_retries) {
  if (n < 1 || d < 0 || d >= n || (static_cast<long>(n) * d) % 2 != 0)
    throw GraphError("no simple " + std::to_string(d) + "-regular graph on " +
                     std::to_string(n) + " nodes");
  Rng rng(seed);
  std::vector<NodeId> stubs;
  stubs.reserve(static_cast<std::size_t>(n) * d);
  for (int v = 0; v < n; ++v)
    for (int i = 0; i < d; ++i) stubs.push_back(v);

  for (int attempt = 0; attempt < max_retries; ++attempt) {
    shuffle(stubs, rng);
    std::vector<Edge> edges;
    edges.reserve(stubs.size() / 2);
    bool ok = true;
    for (std::size_t i = 0; i < stubs.size(); i += 2) {
      if (stubs[i] == stubs[i + 1]) {
        ok = false;
        break;
      }
      edges.push_back(normalized(stubs[i], stubs[i + 1]));
    }
    if (!ok) continue;
    std::sort(edges.begin(), edges.end());
    if (std::adjacent_find(edges.begin(), edges.end()) != edges.end()) continue;
    return Graph(n, std::move(edges), Topology{Topology::Kind::DRegular, {n, d}});
  }
  throw GraphError("dreg: no simple pairing found after " + std::to_string(max_retries) +
                   " attempts");
}

Graph apply_yield(const Graph& g, std::span<const NodeId> disabled_nodes,
                  std::span<const Edge> disabled_edges) {
  std::vector<bool> drop_node(g.capacity(), false);
  for (NodeId v : disabled_nodes) {
    if (v >= g.capacity()) throw GraphError("unknown node " + std::to_string(v));
    if (g.has_node(v)) drop_node[v] = true;
  }
  std::vector<Edge> drop_edges;
  const auto& masked = g.disabled_edges();
  for (auto e : disabled_edges) {
    e = normalized(e.first, e.second);
    if (e.second >= g.capacity() || e.first == e.second)
      throw GraphError("unknown edge (" + std::to_string(e.first) + "," +
                       std::to_string(e.second) + ")");
    if (g.has_edge(e.first, e.second)) {
      drop_edges.push_back(e);
      continue;
    }
    const bool previously_masked =
        std::binary_search(masked.begin(), masked.end(), e) || !g.has_node(e.first) ||
        !g.has_node(e.second);
    if (!previously_masked)
      throw GraphError("unknown edge (" + std::to_string(e.first) + "," +
                       std::to_string(e.second) + ")");
  }
  std::sort(drop_edges.begin(), drop_edges.end());

  std::vector<Edge> kept;
  std::vector<Edge> removed = g.disabled_edges();
  for (const auto& e : g.edges()) {
    if (drop_node[e.first] || drop_node[e.second]) continue;
    if (std::binary_search(drop_edges.begin(), drop_edges.end(), e)) {
      removed.push_back(e);
      continue;
    }
    kept.push_back(e);
  }
  std::vector<NodeId> nodes_off = g.disabled_nodes();
  for (NodeId v = 0; v < g.capacity(); ++v)
    if (drop_node[v]) nodes_off.push_back(v);

  Graph out(g.capacity(), std::move(kept), g.topology(), std::move(nodes_off));
  std::sort(removed.begin(), removed.end());
  removed.erase(std::unique(removed.begin(), removed.end()), removed.end());
  // Edges incident to a disabled node are implied by the node list.
  std::erase_if(removed, [&](const Edge& e) {
    return !out.has_node(e.first) || !out.has_node(e.second);
  });
  out.disabled_edges_ = std::move(removed);
  return out;
}

Graph apply_random_yield(const Graph& g, double node_yield, double edge_yield,
                         std::uint64_t seed) {
  if (!(node_yield > 0.0 && node_yield <= 1.0) || !(edge_yield >= 0.0 && edge_yield <= 1.0))
    throw GraphError("yields must lie in (0, 1]");
  Rng rng(seed);
  std::vector<NodeId> off_nodes;
  for (NodeId v : g.nodes())
    if (uniform01(rng) >= node_yield) off_nodes.push_back(v);
  const double keep_edge = std::min(1.0, edge_yield / (node_yield * node_yield));
  std::vector<Edge> off_edges;
  for (const auto& e : g.edges())
    if (uniform01(rng) >= keep_edge) off_edges.push_back(e);
  return apply_yield(g, off_nodes, off_edges);
}

Graph graph_of(const BinaryQuadraticModel& model) {
  std::vector<Edge> edges;
  edges.reserve(model.num_interactions());
  for (const auto& [key, bias] : model.interactions()) edges.push_back(key);
  return Graph(model.num_variables(), std::move(edges));
}

Graph induced_subgraph(const Graph& g, std::span<const NodeId> keep) {
  std::vector<bool> in(g.capacity(), false);
  for (NodeId v : keep) {
    if (!g.has_node(v)) throw GraphError("unknown node " + std::to_string(v));
    in[v] = true;
  }
  std::vector<Edge> edges;
  for (const auto& e : g.edges())
    if (in[e.first] && in[e.second]) edges.push_back(e);
  std::vector<NodeId> off;
  for (NodeId v = 0; v < g.capacity(); ++v)
    if (!in[v]) off.push_back(v);
  return Graph(g.capacity(), std::move(edges), g.topology(), std::move(off));
}

void write_graph(std::ostream& out, const Graph& g) {
  out << "#topology " << g.topology().describe() << "\n";
  out << g.capacity() << " " << g.num_edges() << "\n";
  for (auto [a, b] : g.edges()) out << a << " " << b << "\n";
  if (!g.disabled_nodes().empty()) {
    out << "#disabled_nodes\n";
    for (NodeId v : g.disabled_nodes()) out << v << "\n";
  }
  if (!g.disabled_edges().empty()) {
    out << "#disabled_edges\n";
    for (auto [a, b] : g.disabled_edges()) out << a << " " << b << "\n";
  }
}

Graph read_graph(std::istream& in) {
  Topology topology;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) -> GraphError {
    return GraphError("line " + std::to_string(line_no) + ": " + msg);
  };

  std::size_t capacity = 0, num_edges = 0;
  bool have_header = false;
  enum class Section { Edges, DisabledNodes, DisabledEdges } section = Section::Edges;
  std::vector<Edge> edges, disabled_edges;
  std::vector<NodeId> disabled_nodes;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("#topology", 0) == 0) {
        topology = Topology::parse(line.substr(9));
      } else if (line.rfind("#disabled_nodes", 0) == 0) {
        section = Section::DisabledNodes;
      } else if (line.rfind("#disabled_edges", 0) == 0) {
        section = Section::DisabledEdges;
      }
      continue;
    }
    std::istringstream fields(line);
    if (!have_header) {
      if (!(fields >> capacity >> num_edges)) throw fail("expected header 'q c'");
      have_header = true;
      continue;
    }
    long long a = -1, b = -1;
    if (section == Section::DisabledNodes) {
      if (!(fields >> a) || a < 0) throw fail("expected node id");
      disabled_nodes.push_back(static_cast<NodeId>(a));
      continue;
    }
    if (!(fields >> a >> b) || a < 0 || b < 0) throw fail("expected edge 'i j'");
    if (static_cast<std::size_t>(std::max(a, b)) >= capacity)
      throw fail("node id out of range");
    if (section == Section::Edges)
      edges.emplace_back(static_cast<NodeId>(a), static_cast<NodeId>(b));
    else
      disabled_edges.emplace_back(static_cast<NodeId>(a), static_cast<NodeId>(b));
  }
  if (!have_header) throw GraphError("missing header 'q c'");
  if (edges.size() != num_edges)
    throw GraphError("header declares " + std::to_string(num_edges) + " edges, found " +
                     std::to_string(edges.size()));
  Graph g(capacity, std::move(edges), topology, std::move(disabled_nodes));
  if (disabled_edges.empty()) return g;
  // Re-attach the masked edge list without touching the live edges.
  std::vector<Edge> live = g.edges();
  live.insert(live.end(), disabled_edges.begin(), disabled_edges.end());
  Graph full(capacity, std::move(live), topology, g.disabled_nodes());
  return apply_yield(full, {}, disabled_edges);
}

void save_graph(const Graph& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw GraphError("cannot write " + path.string());
  write_graph(out, g);
}

Graph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw GraphError("cannot read " + path.string());
  try {
    return read_graph(in);
  } catch (const GraphError& e) {
    throw GraphError(path.string() + ": " + e.what());
  }
}

}  // namespace qubench
