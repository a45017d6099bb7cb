#include "qubench/generators.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <istream>
#include <iterator>
#include <map>
#include <sstream>
#include <tuple>

#include "qubench/rng.hpp"

namespace qubench {

namespace {

struct ClassInfo {
  ClassTag tag;
  const char* name;
  EmbedKind kind;
};

constexpr std::array<ClassInfo, 14> kClasses = {{
    {ClassTag::NAT1, "NAT1", EmbedKind::Native},
    {ClassTag::NAT7, "NAT7", EmbedKind::Native},
    {ClassTag::CBFM, "CBFM", EmbedKind::Native},
    {ClassTag::TILE, "TILE", EmbedKind::Native},
    {ClassTag::FCL, "FCL", EmbedKind::Native},
    {ClassTag::LAT3D, "LAT3D", EmbedKind::Lattice},
    {ClassTag::DREG03, "DREG03", EmbedKind::Heuristic},
    {ClassTag::SK, "SK", EmbedKind::Clique},
    {ClassTag::CDMA, "CDMA", EmbedKind::Clique},
    {ClassTag::BPSP, "BPSP", EmbedKind::Heuristic},
    {ClassTag::SOCs, "SOCs", EmbedKind::Heuristic},
    {ClassTag::SOCu, "SOCu", EmbedKind::Heuristic},
    {ClassTag::DAIG, "DAIG", EmbedKind::Clique},
    {ClassTag::IMPORT, "IMPORT", EmbedKind::Heuristic},
}};

constexpr std::array<ClassTag, 13> kBenchmarkClasses = {
    ClassTag::CBFM, ClassTag::NAT1, ClassTag::NAT7, ClassTag::TILE, ClassTag::FCL,
    ClassTag::LAT3D, ClassTag::BPSP, ClassTag::DREG03, ClassTag::SOCs, ClassTag::SOCu,
    ClassTag::SK, ClassTag::CDMA, ClassTag::DAIG};

const ClassInfo& info(ClassTag tag) {
  for (const auto& c : kClasses)
    if (c.tag == tag) return c;
  throw GeneratorError("unknown class");
}

Edge ordered(NodeId a, NodeId b) { return a < b ? Edge{a, b} : Edge{b, a}; }

}  // namespace

std::string_view to_string(ClassTag tag) { return info(tag).name; }

ClassTag parse_class_tag(std::string_view text) {
  for (const auto& c : kClasses) {
    std::string_view name = c.name;
    if (name.size() == text.size() &&
        std::equal(name.begin(), name.end(), text.begin(), [](char a, char b) {
          return std::toupper(static_cast<unsigned char>(a)) ==
                 std::toupper(static_cast<unsigned char>(b));
        }))
      return c.tag;
  }
  if (text == "3DLAT") return ClassTag::LAT3D;
  throw GeneratorError("unknown class '" + std::string(text) + "'");
}

EmbedKind embed_kind(ClassTag tag) { return info(tag).kind; }

bool is_native(ClassTag tag) { return embed_kind(tag) == EmbedKind::Native; }

std::span<const ClassTag> benchmark_classes() { return kBenchmarkClasses; }

std::vector<std::int64_t> node_to_variable(const Graph& g) {
  std::vector<std::int64_t> index(g.capacity(), -1);
  std::int64_t next = 0;
  for (NodeId v : g.nodes()) index[v] = next++;
  return index;
}

BQM model_on_graph(const Graph& g, Vartype vartype) {
  BQM model(vartype, g.num_nodes());
  if (g.num_nodes() != g.capacity()) {
    std::vector<std::int64_t> labels;
    labels.reserve(g.num_nodes());
    for (NodeId v : g.nodes()) labels.push_back(v);
    model.set_variable_labels(std::move(labels));
  }
  return model;
}

BQM gen_spin_glass(const Graph& g, std::span<const double> values, std::uint64_t seed) {
  if (values.empty()) throw GeneratorError("spin glass needs a non-empty value set");
  if (g.num_nodes() == 0) throw GeneratorError("spin glass on an empty graph");
  Rng rng(seed);
  BQM model = model_on_graph(g);
  const auto index = node_to_variable(g);
  for (auto [a, b] : g.edges()) {
    const double J = values[uniform_below(rng, values.size())];
    model.set_quadratic(static_cast<VariableId>(index[a]), static_cast<VariableId>(index[b]), J);
  }
  return model;
}

std::vector<double> nat_values(int levels) {
  if (levels < 1) throw GeneratorError("levels must be >= 1");
  std::vector<double> out;
  for (int k = levels; k >= 1; --k) out.push_back(-static_cast<double>(k) / levels);
  for (int k = 1; k <= levels; ++k) out.push_back(static_cast<double>(k) / levels);
  return out;
}

FclInstance gen_fcl_detailed(const Graph& g, double alpha, double ruggedness,
                             std::uint64_t seed, int max_retries) {
  if (!(alpha > 0.0)) throw GeneratorError("FCL alpha must be > 0");
  if (!(ruggedness >= 1.0)) throw GeneratorError("FCL ruggedness must be >= 1");
  const auto nodes = g.nodes();
  bool any_cycle_possible = false;
  for (NodeId v : nodes)
    if (g.degree(v) >= 2) any_cycle_possible = true;
  if (!any_cycle_possible || g.num_edges() < 3)
    throw GeneratorError("graph too small to host a loop");

  Rng rng(seed);
  std::map<Edge, double> J;
  FclInstance out;
  const auto target = static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(nodes.size())));

  auto random_loop = [&]() -> std::vector<NodeId> {
    // Non-backtracking walk until the first revisit; the loop is the cycle
    // that closes at the revisited node.
    for (int tries = 0; tries < 64; ++tries) {
      std::vector<NodeId> walk{nodes[uniform_below(rng, nodes.size())]};
      std::vector<int> position(g.capacity(), -1);
      position[walk[0]] = 0;
      NodeId prev = walk[0];
      bool stuck = false;
      while (true) {
        const NodeId cur = walk.back();
        auto nb = g.neighbors(cur);
        std::vector<NodeId> options;
        for (NodeId x : nb)
          if (walk.size() == 1 || x != prev) options.push_back(x);
        if (options.empty()) {
          stuck = true;
          break;
        }
        const NodeId next = options[uniform_below(rng, options.size())];
        if (position[next] >= 0)
          return {walk.begin() + position[next], walk.end()};
        prev = cur;
        position[next] = static_cast<int>(walk.size());
        walk.push_back(next);
      }
      if (stuck) continue;
    }
    return {};
  };

  while (out.loops.size() < target) {
    bool placed = false;
    for (int attempt = 0; attempt < max_retries && !placed; ++attempt) {
      auto loop = random_loop();
      if (loop.size() < 3) continue;
      const std::size_t plus = uniform_below(rng, loop.size());
      std::map<Edge, double> trial;
      for (std::size_t i = 0; i < loop.size(); ++i) {
        const Edge e = ordered(loop[i], loop[(i + 1) % loop.size()]);
        trial[e] += (i == plus) ? 1.0 : -1.0;
      }
      bool ok = true;
      for (const auto& [e, delta] : trial) {
        auto it = J.find(e);
        const double now = (it == J.end() ? 0.0 : it->second) + delta;
        if (std::abs(now) > ruggedness) ok = false;
      }
      if (!ok) continue;
      for (const auto& [e, delta] : trial) J[e] += delta;
      out.loops.push_back({std::move(loop), plus});
      placed = true;
    }
    if (!placed)
      throw GeneratorError("FCL: retry cap exceeded placing loop " +
                           std::to_string(out.loops.size()));
  }

  out.model = model_on_graph(g);
  const auto index = node_to_variable(g);
  for (const auto& [e, value] : J)
    if (value != 0.0)
      out.model.set_quadratic(static_cast<VariableId>(index[e.first]),
                              static_cast<VariableId>(index[e.second]), value);
  return out;
}

BQM gen_fcl(const Graph& g, double alpha, double ruggedness, std::uint64_t seed) {
  return gen_fcl_detailed(g, alpha, ruggedness, seed).model;
}

BQM gen_cbfm(const Graph& g, const CbfmParams& p, std::uint64_t seed) {
  auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!in_unit(p.p_plus) || !in_unit(p.p_minus) || !in_unit(p.p_field) ||
      p.p_plus + p.p_minus > 1.0)
    throw GeneratorError("CBFM probabilities must lie in [0,1] with p_plus + p_minus <= 1");
  Rng rng(seed);
  BQM model = model_on_graph(g);
  const auto index = node_to_variable(g);
  for (auto [a, b] : g.edges()) {
    const double u = uniform01(rng);
    double J = 0.0;
    if (u < p.p_minus) J = -1.0;
    else if (u < p.p_minus + p.p_plus) J = 1.0;
    if (J != 0.0)
      model.set_quadratic(static_cast<VariableId>(index[a]), static_cast<VariableId>(index[b]), J);
  }
  for (VariableId v = 0; v < model.num_variables(); ++v)
    if (uniform01(rng) < p.p_field) model.set_linear(v, 1.0);
  return model;
}

namespace {

std::vector<std::vector<NodeId>> triangles(const Graph& g) {
  std::vector<std::vector<NodeId>> out;
  for (auto [a, b] : g.edges()) {
    auto na = g.neighbors(a);
    auto nb = g.neighbors(b);
    std::vector<NodeId> common;
    std::set_intersection(na.begin(), na.end(), nb.begin(), nb.end(),
                          std::back_inserter(common));
    for (NodeId c : common)
      if (c > b) out.push_back({a, b, c});
  }
  return out;
}

std::vector<std::vector<NodeId>> squares(const Graph& g) {
  // Each 4-cycle a-b-c-d once, with a the smallest id and b < d.
  std::vector<std::vector<NodeId>> out;
  for (NodeId a : g.nodes()) {
    auto na = g.neighbors(a);
    for (std::size_t i = 0; i < na.size(); ++i) {
      for (std::size_t j = i + 1; j < na.size(); ++j) {
        const NodeId b = na[i], d = na[j];
        if (b < a || d < a) continue;
        auto nb = g.neighbors(b);
        auto nd = g.neighbors(d);
        std::vector<NodeId> common;
        std::set_intersection(nb.begin(), nb.end(), nd.begin(), nd.end(),
                              std::back_inserter(common));
        for (NodeId c : common)
          if (c > a) out.push_back({a, b, c, d});
      }
    }
  }
  return out;
}

}  // namespace

TileInstance gen_tile_detailed(const Graph& g, const TileParams& params, std::uint64_t seed) {
  TileInstance out;
  out.model = model_on_graph(g);
  if (params.max_tiles == 0) return out;

  std::vector<std::vector<NodeId>> cells;
  if (params.cell != TileCell::Square) cells = triangles(g);
  if (params.cell == TileCell::Square || (params.cell == TileCell::Auto && cells.empty()))
    cells = squares(g);
  if (cells.empty()) throw GeneratorError("graph not tileable by the configured cell");

  Rng rng(seed);
  shuffle(cells, rng);
  std::map<Edge, bool> taken;
  const auto index = node_to_variable(g);
  for (auto& cell : cells) {
    if (params.max_tiles > 0 && out.tiles.size() >= static_cast<std::size_t>(params.max_tiles))
      break;
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < cell.size(); ++i)
      edges.push_back(ordered(cell[i], cell[(i + 1) % cell.size()]));
    bool free = std::none_of(edges.begin(), edges.end(),
                             [&](const Edge& e) { return taken.count(e) > 0; });
    if (!free) continue;
    // Random signs, then one flip if needed so the cycle is frustrated: the
    // product of -J over the cycle must be negative.
    std::vector<double> signs(edges.size());
    double product = 1.0;
    for (auto& s : signs) {
      s = random_spin(rng);
      product *= -s;
    }
    if (product > 0) signs[uniform_below(rng, signs.size())] *= -1.0;
    for (std::size_t i = 0; i < edges.size(); ++i) {
      taken[edges[i]] = true;
      out.model.set_quadratic(static_cast<VariableId>(index[edges[i].first]),
                              static_cast<VariableId>(index[edges[i].second]), signs[i]);
    }
    out.tiles.push_back(cell);
  }
  return out;
}

BQM gen_tile(const Graph& g, const TileParams& params, std::uint64_t seed) {
  return gen_tile_detailed(g, params, seed).model;
}

BQM cdma_model(const std::vector<std::vector<double>>& codes, std::span<const double> y) {
  const std::size_t L = codes.size();
  if (L == 0 || y.size() != L) throw GeneratorError("code matrix and signal length differ");
  const std::size_t n = codes[0].size();
  if (n < 2) throw GeneratorError("CDMA needs n >= 2 users");
  for (const auto& row : codes)
    if (row.size() != n) throw GeneratorError("ragged code matrix");

  BQM model(Vartype::Spin, n);
  for (std::size_t i = 0; i < n; ++i) {
    double h = 0.0;
    for (std::size_t l = 0; l < L; ++l) h += codes[l][i] * y[l];
    model.set_linear(static_cast<VariableId>(i), -2.0 * h);
    for (std::size_t j = i + 1; j < n; ++j) {
      double c = 0.0;
      for (std::size_t l = 0; l < L; ++l) c += codes[l][i] * codes[l][j];
      model.set_quadratic(static_cast<VariableId>(i), static_cast<VariableId>(j), 2.0 * c);
    }
  }
  return model;
}

CdmaInstance gen_cdma_detailed(int n, std::uint64_t seed, int code_length, double sigma) {
  if (n < 2) throw GeneratorError("CDMA needs n >= 2 users");
  const int L = code_length > 0 ? code_length : n;
  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(L));
  std::vector<std::vector<double>> codes(L, std::vector<double>(n));
  for (auto& row : codes)
    for (auto& s : row) s = random_spin(rng) * scale;
  CdmaInstance out;
  out.transmitted.resize(n);
  for (auto& b : out.transmitted) b = random_spin(rng);
  std::vector<double> y(L, 0.0);
  for (int l = 0; l < L; ++l) {
    for (int i = 0; i < n; ++i) y[l] += codes[l][i] * out.transmitted[i];
    // Box-Muller keeps instances identical across standard libraries.
    const double u1 = 1.0 - uniform01(rng);
    const double u2 = uniform01(rng);
    y[l] += sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
  out.model = cdma_model(codes, y);
  return out;
}

BQM gen_cdma(int n, std::uint64_t seed, int code_length, double sigma) {
  return gen_cdma_detailed(n, seed, code_length, sigma).model;
}

std::vector<int> bpsp_sequence(int cars, std::uint64_t seed) {
  if (cars < 2) throw GeneratorError("BPSP needs at least 2 cars");
  std::vector<int> seq;
  seq.reserve(2 * static_cast<std::size_t>(cars));
  for (int c = 0; c < cars; ++c) {
    seq.push_back(c);
    seq.push_back(c);
  }
  Rng rng(seed);
  shuffle(seq, rng);
  return seq;
}

namespace {

// +1 at a car's first occurrence, -1 at its second.
std::vector<int> occurrence_signs(std::span<const int> seq, int cars) {
  std::vector<int> seen(cars, 0);
  std::vector<int> sign(seq.size());
  for (std::size_t p = 0; p < seq.size(); ++p) {
    const int c = seq[p];
    if (c < 0 || c >= cars) throw GeneratorError("car id out of range");
    sign[p] = seen[c]++ == 0 ? 1 : -1;
    if (seen[c] > 2) throw GeneratorError("car " + std::to_string(c) + " appears more than twice");
  }
  for (int c = 0; c < cars; ++c)
    if (seen[c] != 2) throw GeneratorError("car " + std::to_string(c) + " must appear twice");
  return sign;
}

}  // namespace

BQM bpsp_model(std::span<const int> seq) {
  if (seq.size() < 4) throw GeneratorError("BPSP needs at least 2 cars");
  const int cars = static_cast<int>(seq.size() / 2);
  const auto sign = occurrence_signs(seq, cars);
  BQM model(Vartype::Spin, cars);
  // A change between positions p and p+1 costs (1 - s_p s_{p+1}) / 2; the
  // model stores twice that so every weight is an integer.
  double offset = 0.0;
  for (std::size_t p = 0; p + 1 < seq.size(); ++p) {
    const int a = seq[p], b = seq[p + 1];
    if (a == b) {
      offset += 2.0;
      continue;
    }
    offset += 1.0;
    model.add_quadratic(a, b, -static_cast<double>(sign[p] * sign[p + 1]));
  }
  model.set_offset(offset);
  return model;
}

int bpsp_paint_changes(std::span<const int> seq, std::span<const std::int8_t> spins) {
  const int cars = static_cast<int>(seq.size() / 2);
  if (spins.size() != static_cast<std::size_t>(cars)) throw GeneratorError("one spin per car");
  const auto sign = occurrence_signs(seq, cars);
  int changes = 0;
  for (std::size_t p = 0; p + 1 < seq.size(); ++p) {
    const int colour_a = sign[p] * spins[seq[p]];
    const int colour_b = sign[p + 1] * spins[seq[p + 1]];
    if (colour_a != colour_b) ++changes;
  }
  return changes;
}

BQM gen_bpsp(int cars, std::uint64_t seed) {
  const auto seq = bpsp_sequence(cars, seed);
  return bpsp_model(seq);
}

BQM import_instance(const std::filesystem::path& path) { return load_bqm(path); }

BQM edge_list_to_bqm(std::istream& in, bool is_signed, const std::string& label) {
  std::map<std::int64_t, VariableId> ids;
  std::vector<std::tuple<std::int64_t, std::int64_t, double>> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line[0] == '%') continue;
    std::istringstream fields(line);
    std::int64_t a, b;
    double sign = 1.0;
    if (!(fields >> a >> b) || (is_signed && !(fields >> sign)))
      throw GeneratorError("line " + std::to_string(line_no) + ": expected '" +
                           (is_signed ? "i j sign'" : "i j'"));
    if (a == b) continue;
    ids.emplace(a, 0);
    ids.emplace(b, 0);
    edges.emplace_back(a, b, sign > 0 ? -1.0 : (sign < 0 ? 1.0 : 0.0));
  }
  VariableId next = 0;
  std::vector<std::int64_t> labels;
  for (auto& [ext, id] : ids) {
    id = next++;
    labels.push_back(ext);
  }
  BQM model(Vartype::Spin, ids.size());
  for (auto [a, b, J] : edges)
    if (J != 0.0) model.set_quadratic(ids[a], ids[b], J);
  bool dense = true;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] != static_cast<std::int64_t>(i)) dense = false;
  if (!dense) model.set_variable_labels(std::move(labels));
  model.set_label(label);
  return model;
}

BQM generate(const InstanceSpec& spec, const Graph* hw) {
  std::optional<Graph> owned;
  auto hardware = [&]() -> const Graph& {
    if (hw) return *hw;
    if (!owned) owned = pegasus(spec.size >= 2 ? spec.size : 16);
    return *owned;
  };
  BQM model;
  switch (spec.tag) {
    case ClassTag::NAT1: {
      const auto v = nat_values(1);
      model = gen_spin_glass(hardware(), v, spec.seed);
      break;
    }
    case ClassTag::NAT7: {
      const auto v = nat_values(7);
      model = gen_spin_glass(hardware(), v, spec.seed);
      break;
    }
    case ClassTag::CBFM:
      model = gen_cbfm(hardware(), CbfmParams{}, spec.seed);
      break;
    case ClassTag::TILE:
      model = gen_tile(hardware(), TileParams{}, spec.seed);
      break;
    case ClassTag::FCL:
      model = gen_fcl(hardware(), 0.2, 3.0, spec.seed);
      break;
    case ClassTag::LAT3D: {
      const auto v = nat_values(1);
      model = gen_spin_glass(lattice3d(spec.size, spec.size, spec.size), v, spec.seed);
      break;
    }
    case ClassTag::DREG03: {
      const auto v = nat_values(1);
      model = gen_spin_glass(dreg(spec.size, 3, splitmix64(spec.seed)), v, spec.seed);
      break;
    }
    case ClassTag::SK: {
      const auto v = nat_values(1);
      model = gen_spin_glass(clique(spec.size), v, spec.seed);
      break;
    }
    case ClassTag::CDMA:
      model = gen_cdma(spec.size, spec.seed);
      break;
    case ClassTag::BPSP:
      model = gen_bpsp(spec.size, spec.seed);
      break;
    case ClassTag::SOCs:
    case ClassTag::SOCu:
    case ClassTag::DAIG:
    case ClassTag::IMPORT:
      if (spec.path.empty())
        throw GeneratorError(std::string(to_string(spec.tag)) + " instances are import-only");
      model = import_instance(spec.path);
      break;
  }
  if (model.label().empty())
    model.set_label(std::string(to_string(spec.tag)) + "_" + std::to_string(spec.size) + "_" +
                    std::to_string(spec.seed));
  return model;
}

}  // namespace qubench
