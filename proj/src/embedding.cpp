#include "qubench/embedding.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <queue>

namespace qubench {

using nlohmann::json;

std::size_t Embedding::num_qubits() const {
  std::size_t total = 0;
  for (const auto& c : chains) total += c.size();
  return total;
}

std::size_t Embedding::max_chain_length() const {
  std::size_t best = 0;
  for (const auto& c : chains) best = std::max(best, c.size());
  return best;
}

double Embedding::mean_chain_length() const {
  if (chains.empty()) return 0.0;
  return static_cast<double>(num_qubits()) / static_cast<double>(chains.size());
}

namespace {

bool chain_connected(const std::vector<NodeId>& chain, const Graph& hw,
                     std::vector<int>& owner_scratch, int tag) {
  if (chain.empty()) return true;
  for (NodeId q : chain) owner_scratch[q] = tag;
  std::vector<NodeId> stack{chain[0]};
  owner_scratch[chain[0]] = -tag - 2;
  std::size_t seen = 1;
  while (!stack.empty()) {
    const NodeId a = stack.back();
    stack.pop_back();
    for (NodeId b : hw.neighbors(a)) {
      if (owner_scratch[b] == tag) {
        owner_scratch[b] = -tag - 2;
        ++seen;
        stack.push_back(b);
      }
    }
  }
  for (NodeId q : chain) owner_scratch[q] = -1;
  return seen == chain.size();
}

}  // namespace

std::vector<EmbeddingViolation> validate_embedding(const Graph& logical, const Graph& hw,
                                                   const Embedding& e) {
  using Kind = EmbeddingViolation::Kind;
  std::vector<EmbeddingViolation> out;
  if (e.chains.size() < logical.capacity()) {
    for (NodeId v = static_cast<NodeId>(e.chains.size()); v < logical.capacity(); ++v)
      if (logical.has_node(v))
        out.push_back({Kind::EmptyChain, {v}, "logical node " + std::to_string(v) + " has no chain"});
  }
  std::vector<std::int64_t> owner(hw.capacity(), -1);
  for (std::size_t v = 0; v < e.chains.size(); ++v) {
    const auto& chain = e.chains[v];
    if (chain.empty() && logical.has_node(static_cast<NodeId>(v))) {
      out.push_back({Kind::EmptyChain, {static_cast<std::int64_t>(v)},
                     "logical node " + std::to_string(v) + " has an empty chain"});
      continue;
    }
    for (NodeId q : chain) {
      if (!hw.has_node(q)) {
        out.push_back({Kind::UnknownQubit, {static_cast<std::int64_t>(v), q},
                       "chain " + std::to_string(v) + " uses missing qubit " + std::to_string(q)});
        continue;
      }
      if (owner[q] >= 0) {
        out.push_back({Kind::Overlap, {owner[q], static_cast<std::int64_t>(v), q},
                       "chains " + std::to_string(owner[q]) + " and " + std::to_string(v) +
                           " share qubit " + std::to_string(q)});
        continue;
      }
      owner[q] = static_cast<std::int64_t>(v);
    }
  }
  std::vector<int> scratch(hw.capacity(), -1);
  for (std::size_t v = 0; v < e.chains.size(); ++v) {
    std::vector<NodeId> present;
    for (NodeId q : e.chains[v])
      if (hw.has_node(q)) present.push_back(q);
    std::sort(present.begin(), present.end());
    present.erase(std::unique(present.begin(), present.end()), present.end());
    if (!chain_connected(present, hw, scratch, static_cast<int>(v)))
      out.push_back({Kind::Disconnected, {static_cast<std::int64_t>(v)},
                     "chain " + std::to_string(v) + " is not connected"});
  }
  for (auto [a, b] : logical.edges()) {
    bool covered = false;
    if (a < e.chains.size() && b < e.chains.size()) {
      for (NodeId q : e.chains[a]) {
        for (NodeId r : hw.neighbors(q))
          if (owner[r] == static_cast<std::int64_t>(b)) {
            covered = true;
            break;
          }
        if (covered) break;
      }
    }
    if (!covered)
      out.push_back({Kind::MissingCoupler, {a, b},
                     "no coupler between chains " + std::to_string(a) + " and " +
                         std::to_string(b)});
  }
  return out;
}

namespace {

bool is_pegasus(const Graph& hw) {
  return hw.topology().kind == Topology::Kind::Pegasus && hw.topology().params.size() == 1;
}

// Chains for positions p_0 < ... < p_{k-1} along the diagonal of a Pegasus
// graph. Chain j runs vertically over [p_0, p_j] and horizontally over
// [p_j, p_{k-1}].
std::vector<std::vector<NodeId>> clique_chains(int m, const std::vector<int>& positions) {
  const auto& off0 = kPegasusVerticalOffsets;
  const auto& off1 = kPegasusHorizontalOffsets;
  const int k = static_cast<int>(positions.size());
  const int lo = positions.front(), hi = positions.back();
  std::vector<std::vector<NodeId>> chains(k);
  for (int j = 0; j < k; ++j) {
    const int p = positions[j];
    const int w = p / 12, t = p % 12;
    auto& chain = chains[j];
    if (j > 0 || k == 1) {
      for (int z = (lo - off0[t]) / 12; z <= (p - off0[t]) / 12; ++z)
        chain.push_back(pegasus_index(m, {0, w, t, z}));
      if (k == 1) chain.resize(1);
    }
    if (j < k - 1) {
      for (int z = (p - off1[t]) / 12; z <= (hi - off1[t]) / 12; ++z)
        chain.push_back(pegasus_index(m, {1, w, t, z}));
    }
  }
  return chains;
}

constexpr int kCliqueFirstPosition = 10;

// Beyond this size the generic embedder is too slow to be a useful fallback.
constexpr int kHeuristicCliqueLimit = 48;

}  // namespace

int native_clique_limit(int m) { return m < 2 ? 0 : 12 * (m - 1) + 2 - kCliqueFirstPosition; }

Embedding embed_clique(int k, const Graph& hw, std::uint64_t seed) {
  if (k < 1) throw EmbeddingError("clique size must be >= 1");
  const Graph logical = clique(k);
  if (is_pegasus(hw)) {
    const int m = hw.topology().params[0];
    std::vector<int> alive(std::max(0, native_clique_limit(m)));
    std::iota(alive.begin(), alive.end(), kCliqueFirstPosition);
    // Positions whose lines hit a missing qubit or coupler are dropped until a
    // window of k surviving positions validates.
    while (static_cast<int>(alive.size()) >= k) {
      const std::size_t windows = alive.size() - k + 1;
      const std::size_t start = seed % windows;
      std::vector<int> chosen(alive.begin() + start, alive.begin() + start + k);
      Embedding e;
      e.chains = clique_chains(m, chosen);
      const auto violations = validate_embedding(logical, hw, e);
      if (violations.empty()) return e;
      std::vector<bool> dead(k, false);
      for (const auto& v : violations) {
        using Kind = EmbeddingViolation::Kind;
        if (v.kind == Kind::MissingCoupler)
          dead[std::max(v.ids[0], v.ids[1])] = true;
        else if (v.kind == Kind::Overlap)
          dead[v.ids[1]] = true;
        else
          dead[v.ids[0]] = true;
      }
      std::vector<int> next(alive.begin(), alive.begin() + start);
      for (int j = 0; j < k; ++j)
        if (!dead[j]) next.push_back(chosen[j]);
      next.insert(next.end(), alive.begin() + start + k, alive.end());
      alive = std::move(next);
    }
    if (k > kHeuristicCliqueLimit)
      throw EmbeddingNotFound("clique K_" + std::to_string(k) +
                              " not embeddable on this Pegasus graph");
  }
  if (static_cast<std::size_t>(k) > hw.num_nodes())
    throw EmbeddingNotFound("clique K_" + std::to_string(k) + " does not fit the hardware graph");
  try {
    return embed_heuristic(logical, hw, seed);
  } catch (const EmbeddingNotFound&) {
    throw EmbeddingNotFound("clique K_" + std::to_string(k) + " not embeddable on this graph");
  }
}

namespace {

// Site chain (vertical, horizontal) in Pegasus cell (x, y), track t.
bool lattice_chain(const Graph& hw, int m, int x, int y, int t, std::array<NodeId, 2>& out) {
  const auto& off0 = kPegasusVerticalOffsets;
  const auto& off1 = kPegasusHorizontalOffsets;
  const int hw_w = y + (t < off0[t] ? 1 : 0);
  const int hw_z = x - (t < off1[t] ? 1 : 0);
  if (x < 0 || x >= m || y < 0 || y >= m - 1) return false;
  if (hw_w < 0 || hw_w >= m || hw_z < 0 || hw_z >= m - 1) return false;
  const NodeId v = pegasus_index(m, {0, x, t, y});
  const NodeId h = pegasus_index(m, {1, hw_w, t, hw_z});
  if (!hw.has_edge(v, h)) return false;
  out = {v, h};
  return true;
}

// Order of the 12 tracks that forms a path of chain-to-chain couplers within
// one cell.
constexpr std::array<int, 12> kTrackPath = {10, 11, 4, 0, 1, 2, 3, 8, 9, 5, 6, 7};

}  // namespace

Embedding embed_lattice3d(int X, int Y, int Z, const Graph& hw) {
  const Graph logical = lattice3d(X, Y, Z);
  if (!is_pegasus(hw))
    throw EmbeddingError("lattice embedding requires a Pegasus hardware graph");
  const int m = hw.topology().params[0];
  const int dims[3] = {X, Y, Z};
  // Try each assignment of lattice axes to (cell x, cell y, track) and each
  // window offset until one survives the yield mask.
  std::array<int, 3> perm = {0, 1, 2};
  do {
    const int cx = dims[perm[0]], cy = dims[perm[1]], ct = dims[perm[2]];
    if (ct > 12 || cx > m || cy > m - 1) continue;
    for (int t0 = 0; t0 + ct <= 12; ++t0)
      for (int y0 = 0; y0 + cy <= m - 1; ++y0)
        for (int x0 = 0; x0 + cx <= m; ++x0) {
          Embedding e;
          e.chains.resize(logical.capacity());
          bool ok = true;
          for (int z = 0; z < Z && ok; ++z)
            for (int y = 0; y < Y && ok; ++y)
              for (int x = 0; x < X && ok; ++x) {
                const int c[3] = {x, y, z};
                std::array<NodeId, 2> chain;
                ok = lattice_chain(hw, m, x0 + c[perm[0]], y0 + c[perm[1]],
                                   kTrackPath[t0 + c[perm[2]]], chain);
                if (ok) e.chains[lattice3d_index(X, Y, x, y, z)] = {chain[0], chain[1]};
              }
          if (ok && validate_embedding(logical, hw, e).empty()) return e;
        }
  } while (std::next_permutation(perm.begin(), perm.end()));
  throw EmbeddingNotFound("lattice " + std::to_string(X) + "x" + std::to_string(Y) + "x" +
                          std::to_string(Z) + " does not fit the hardware graph");
}

namespace {

class ChainGrower {
 public:
  ChainGrower(const Graph& logical, const Graph& hw, std::uint64_t seed,
              const HeuristicOptions& options)
      : logical_(logical),
        hw_(hw),
        options_(options),
        rng_(seed),
        qubits_(hw.nodes()),
        usage_(hw.capacity(), 0),
        history_(hw.capacity(), 0.0),
        chains_(logical.capacity()) {}

  bool run() {
    std::vector<NodeId> order = logical_.nodes();
    double alpha = 2.0;
    const double alpha_max = std::max<double>(2.0, static_cast<double>(hw_.num_nodes()));
    bool clean = false;
    for (int pass = 0; pass < options_.max_passes; ++pass) {
      if (pass == 0) order = bfs_order();
      else shuffle(order, rng_);
      for (NodeId v : order) place(v, alpha, false);
      for (std::size_t q = 0; q < usage_.size(); ++q)
        if (usage_[q] > 1) history_[q] += 1.0;
      if (overlap_free()) {
        clean = true;
        break;
      }
      alpha = std::min(alpha * 2.0, alpha_max);
    }
    if (!clean) return false;
    for (int pass = 0; pass < options_.refine_passes; ++pass) {
      shuffle(order, rng_);
      for (NodeId v : order) place(v, 2.0, true);
    }
    return true;
  }

  Embedding result() const {
    Embedding e;
    e.chains = chains_;
    for (auto& c : e.chains) std::sort(c.begin(), c.end());
    return e;
  }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  // Breadth-first order from random roots, so early chains stay local.
  std::vector<NodeId> bfs_order() {
    std::vector<NodeId> roots = logical_.nodes();
    shuffle(roots, rng_);
    std::vector<bool> seen(logical_.capacity(), false);
    std::vector<NodeId> order;
    for (NodeId r : roots) {
      if (seen[r]) continue;
      seen[r] = true;
      std::size_t head = order.size();
      order.push_back(r);
      while (head < order.size()) {
        const NodeId a = order[head++];
        std::vector<NodeId> next;
        for (NodeId b : logical_.neighbors(a))
          if (!seen[b]) next.push_back(b);
        shuffle(next, rng_);
        for (NodeId b : next) {
          seen[b] = true;
          order.push_back(b);
        }
      }
    }
    return order;
  }

  bool overlap_free() const {
    return std::all_of(usage_.begin(), usage_.end(), [](int u) { return u <= 1; });
  }

  double weight(NodeId q, double alpha, bool strict) const {
    if (strict) return usage_[q] > 0 ? kInf : 1.0;
    return (1.0 + history_[q]) * std::min(std::pow(alpha, usage_[q]), 1e30);
  }

  void set_chain(NodeId v, std::vector<NodeId> chain) {
    for (NodeId q : chains_[v]) --usage_[q];
    chains_[v] = std::move(chain);
    for (NodeId q : chains_[v]) ++usage_[q];
  }

  // Multi-source Dijkstra from chain(u): dist[q] is the summed weight of path
  // qubits outside chain(u), including q.
  void distances(NodeId u, double alpha, bool strict, std::vector<double>& dist,
                 std::vector<NodeId>& parent) {
    const std::size_t cap = hw_.capacity();
    dist.assign(cap, kInf);
    parent.assign(cap, std::numeric_limits<NodeId>::max());
    using Item = std::pair<double, NodeId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    for (NodeId q : chains_[u]) {
      dist[q] = 0.0;
      heap.emplace(0.0, q);
    }
    while (!heap.empty()) {
      auto [d, a] = heap.top();
      heap.pop();
      if (d > dist[a]) continue;
      for (NodeId b : hw_.neighbors(a)) {
        const double nd = d + weight(b, alpha, strict);
        if (nd < dist[b]) {
          dist[b] = nd;
          parent[b] = a;
          heap.emplace(nd, b);
        }
      }
    }
  }

  void place(NodeId v, double alpha, bool strict) {
    const std::vector<NodeId> old = chains_[v];
    set_chain(v, {});
    std::vector<NodeId> placed;
    for (NodeId u : logical_.neighbors(v))
      if (!chains_[u].empty()) placed.push_back(u);

    if (placed.empty()) {
      std::vector<NodeId> best;
      int least = std::numeric_limits<int>::max();
      for (NodeId q : qubits_) {
        if (usage_[q] < least) {
          least = usage_[q];
          best.clear();
        }
        if (usage_[q] == least) best.push_back(q);
      }
      if (strict && least > 0) {
        set_chain(v, old);
        return;
      }
      set_chain(v, {best[uniform_below(rng_, best.size())]});
      return;
    }

    const std::size_t cap = hw_.capacity();
    std::vector<std::vector<double>> dist(placed.size());
    std::vector<std::vector<NodeId>> parent(placed.size());
    std::vector<double> cost(cap, 0.0);
    for (std::size_t i = 0; i < placed.size(); ++i) {
      distances(placed[i], alpha, strict, dist[i], parent[i]);
      for (NodeId q : chains_[placed[i]]) dist[i][q] = weight(q, alpha, strict);
    }
    double best_cost = kInf;
    std::vector<NodeId> roots;
    for (NodeId q : qubits_) {
      const double w = weight(q, alpha, strict);
      if (w == kInf) continue;
      double c = 0.0;
      for (std::size_t i = 0; i < placed.size(); ++i) c += dist[i][q];
      c -= static_cast<double>(placed.size() - 1) * w;
      if (c < best_cost - 1e-9) {
        best_cost = c;
        roots.assign(1, q);
      } else if (std::abs(c - best_cost) <= 1e-9) {
        roots.push_back(q);
      }
    }
    if (roots.empty() || best_cost == kInf) {
      set_chain(v, old);
      return;
    }
    const NodeId root = roots[uniform_below(rng_, roots.size())];
    std::vector<NodeId> chain{root};
    for (std::size_t i = 0; i < placed.size(); ++i) {
      const auto& target = chains_[placed[i]];
      NodeId q = root;
      while (std::find(target.begin(), target.end(), q) == target.end()) {
        const NodeId p = parent[i][q];
        if (p == std::numeric_limits<NodeId>::max()) break;
        if (std::find(target.begin(), target.end(), p) != target.end()) break;
        chain.push_back(p);
        q = p;
      }
    }
    std::sort(chain.begin(), chain.end());
    chain.erase(std::unique(chain.begin(), chain.end()), chain.end());
    if (strict && !old.empty() && chain.size() > old.size()) {
      set_chain(v, old);
      return;
    }
    set_chain(v, std::move(chain));
  }

  const Graph& logical_;
  const Graph& hw_;
  HeuristicOptions options_;
  Rng rng_;
  std::vector<NodeId> qubits_;
  std::vector<int> usage_;
  std::vector<double> history_;  // passes in which each qubit was overused
  std::vector<std::vector<NodeId>> chains_;
};

}  // namespace

Embedding embed_heuristic(const Graph& logical, const Graph& hw, std::uint64_t seed,
                          const HeuristicOptions& options) {
  if (logical.num_nodes() == 0) return Embedding{};
  if (logical.num_nodes() > hw.num_nodes() || logical.num_edges() > hw.num_edges())
    throw EmbeddingNotFound("logical graph is larger than the hardware graph");
  for (int attempt = 0; attempt < options.max_tries; ++attempt) {
    ChainGrower grower(logical, hw, derive_seed(seed, {"embed", std::to_string(attempt)}),
                       options);
    if (!grower.run()) continue;
    Embedding e = grower.result();
    if (validate_embedding(logical, hw, e).empty()) return e;
  }
  throw EmbeddingNotFound("no embedding found in " + std::to_string(options.max_tries) +
                          " tries");
}

double default_chain_strength(const BQM& model) {
  const BQM spin = model.vartype() == Vartype::Spin ? model : convert(model, Vartype::Spin);
  if (spin.num_interactions() == 0 || spin.num_variables() == 0) return 1.0;
  std::vector<double> sq(spin.num_variables(), 0.0);
  for (const auto& [uv, J] : spin.interactions()) {
    sq[uv.first] += J * J;
    sq[uv.second] += J * J;
  }
  const double mean = std::accumulate(sq.begin(), sq.end(), 0.0) / static_cast<double>(sq.size());
  if (mean == 0.0) return 1.0;
  return 1.5 * std::sqrt(mean);
}

std::vector<std::int64_t> EmbeddedModel::qubit_index(std::size_t capacity) const {
  std::vector<std::int64_t> index(capacity, -1);
  for (std::size_t i = 0; i < qubits.size(); ++i) index[qubits[i]] = static_cast<std::int64_t>(i);
  return index;
}

EmbeddedModel apply_embedding(const BQM& logical_in, const Embedding& e, const Graph& hw,
                              double multiplier) {
  const BQM logical =
      logical_in.vartype() == Vartype::Spin ? logical_in : convert(logical_in, Vartype::Spin);
  const Graph g = graph_of(logical);
  const auto violations = validate_embedding(g, hw, e);
  if (!violations.empty()) throw EmbeddingError("invalid embedding: " + violations[0].message);
  if (!(multiplier > 0.0)) throw EmbeddingError("chain strength multiplier must be positive");

  EmbeddedModel out;
  for (std::size_t v = 0; v < logical.num_variables(); ++v)
    out.qubits.insert(out.qubits.end(), e.chains[v].begin(), e.chains[v].end());
  std::sort(out.qubits.begin(), out.qubits.end());
  const auto index = out.qubit_index(hw.capacity());
  std::vector<std::int64_t> owner(hw.capacity(), -1);
  for (std::size_t v = 0; v < logical.num_variables(); ++v)
    for (NodeId q : e.chains[v]) owner[q] = static_cast<std::int64_t>(v);

  BQM phys(Vartype::Spin, out.qubits.size());
  for (std::size_t v = 0; v < logical.num_variables(); ++v) {
    const auto& chain = e.chains[v];
    const double share = logical.linear(static_cast<VariableId>(v)) / static_cast<double>(chain.size());
    for (NodeId q : chain) phys.add_linear(static_cast<VariableId>(index[q]), share);
  }
  for (const auto& [uv, J] : logical.interactions()) {
    std::vector<std::pair<NodeId, NodeId>> couplers;
    for (NodeId q : e.chains[uv.first])
      for (NodeId r : hw.neighbors(q))
        if (owner[r] == static_cast<std::int64_t>(uv.second)) couplers.emplace_back(q, r);
    const double share = J / static_cast<double>(couplers.size());
    for (auto [q, r] : couplers)
      phys.add_quadratic(static_cast<VariableId>(index[q]), static_cast<VariableId>(index[r]), share);
  }
  out.chain_coupling = multiplier * e.chain_strength;
  for (std::size_t v = 0; v < logical.num_variables(); ++v) {
    for (NodeId q : e.chains[v])
      for (NodeId r : hw.neighbors(q))
        if (q < r && owner[r] == static_cast<std::int64_t>(v)) {
          phys.set_quadratic(static_cast<VariableId>(index[q]), static_cast<VariableId>(index[r]),
                             -out.chain_coupling);
          out.chain_term -= out.chain_coupling;
        }
  }
  phys.set_offset(logical.offset());
  bool identity = true;
  for (std::size_t i = 0; i < out.qubits.size(); ++i)
    if (out.qubits[i] != i) identity = false;
  if (!identity)
    phys.set_variable_labels(std::vector<std::int64_t>(out.qubits.begin(), out.qubits.end()));
  phys.set_label(logical_in.label());
  out.physical = std::move(phys);
  return out;
}

Unembedded unembed(std::span<const std::int8_t> spins, const EmbeddedModel& embedded,
                   const Embedding& e, Rng& rng) {
  if (spins.size() != embedded.qubits.size())
    throw EmbeddingError("physical sample has " + std::to_string(spins.size()) +
                         " values, expected " + std::to_string(embedded.qubits.size()));
  NodeId max_q = 0;
  for (NodeId q : embedded.qubits) max_q = std::max(max_q, q);
  const auto index = embedded.qubit_index(static_cast<std::size_t>(max_q) + 1);
  Unembedded out;
  out.logical.vartype = Vartype::Spin;
  out.logical.values.resize(e.chains.size());
  out.report.broken.assign(e.chains.size(), false);
  for (std::size_t v = 0; v < e.chains.size(); ++v) {
    int up = 0, down = 0;
    for (NodeId q : e.chains[v]) {
      if (q > max_q || index[q] < 0) throw EmbeddingError("chain qubit missing from sample");
      (spins[index[q]] > 0 ? up : down)++;
    }
    if (up > 0 && down > 0) {
      out.report.broken[v] = true;
      ++out.report.num_broken;
    }
    std::int8_t value;
    if (up > down) value = 1;
    else if (down > up) value = -1;
    else value = random_spin(rng);
    out.logical.values[v] = value;
  }
  return out;
}

json to_json(const Embedding& e) {
  json chains = json::array();
  for (std::size_t v = 0; v < e.chains.size(); ++v)
    chains.push_back(json::array({v, e.chains[v]}));
  return json{{"chain_strength", e.chain_strength}, {"chains", std::move(chains)}};
}

Embedding embedding_from_json(const json& doc) {
  if (!doc.is_object()) throw EmbeddingError("embedding JSON must be an object");
  Embedding e;
  if (!doc.contains("chain_strength") || !doc["chain_strength"].is_number())
    throw EmbeddingError("field 'chain_strength': missing or not a number");
  e.chain_strength = doc["chain_strength"].get<double>();
  if (!doc.contains("chains") || !doc["chains"].is_array())
    throw EmbeddingError("field 'chains': missing or not an array");
  for (const auto& entry : doc["chains"]) {
    if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number_unsigned() ||
        !entry[1].is_array())
      throw EmbeddingError("field 'chains': expected [logical_id, [qubit_ids]]");
    const auto v = entry[0].get<std::size_t>();
    if (v >= e.chains.size()) e.chains.resize(v + 1);
    e.chains[v] = entry[1].get<std::vector<NodeId>>();
  }
  return e;
}

void save_embedding(const Embedding& e, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw EmbeddingError("cannot write " + path.string());
  out << to_json(e).dump() << "\n";
}

Embedding load_embedding(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw EmbeddingError("cannot read " + path.string());
  try {
    return embedding_from_json(json::parse(in));
  } catch (const json::exception& ex) {
    throw EmbeddingError(path.string() + ": " + ex.what());
  }
}

}  // namespace qubench
