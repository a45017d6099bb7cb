#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "oracles.hpp"
#include "qubench/embedding.hpp"
#include "qubench/generators.hpp"

using namespace qubench;

namespace {

using Kind = EmbeddingViolation::Kind;

Graph path(std::size_t n) {
  std::vector<Edge> e;
  for (NodeId i = 0; i + 1 < n; ++i) e.push_back({i, i + 1});
  return Graph(n, e);
}

std::vector<Kind> kinds(const Graph& logical, const Graph& hw, std::vector<std::vector<NodeId>> chains) {
  std::vector<Kind> out;
  for (const auto& v : validate_embedding(logical, hw, Embedding{std::move(chains), 1.0}))
    out.push_back(v.kind);
  return out;
}

bool has(const std::vector<Kind>& ks, Kind k) { return std::find(ks.begin(), ks.end(), k) != ks.end(); }

// Physical spins that copy each logical value onto its whole chain.
std::vector<std::int8_t> lift(const std::vector<std::int8_t>& x, const Embedding& e,
                              const EmbeddedModel& em, std::size_t capacity) {
  const auto index = em.qubit_index(capacity);
  std::vector<std::int8_t> p(em.qubits.size());
  for (std::size_t v = 0; v < x.size(); ++v)
    for (NodeId q : e.chains[v]) p[index[q]] = x[v];
  return p;
}

}  // namespace

TEST(Validator, AcceptsValidChains) {
  const Graph logical(2, {{0, 1}});
  EXPECT_TRUE(kinds(logical, path(4), {{0}, {1, 2}}).empty());
}

TEST(Validator, FlagsEachViolationKind) {
  const Graph logical(2, {{0, 1}});
  const Graph hw = path(4);
  EXPECT_TRUE(has(kinds(logical, hw, {{}, {1}}), Kind::EmptyChain));
  EXPECT_TRUE(has(kinds(logical, hw, {{0}, {9}}), Kind::UnknownQubit));
  EXPECT_TRUE(has(kinds(logical, hw, {{0, 1}, {1, 2}}), Kind::Overlap));
  EXPECT_TRUE(has(kinds(logical, hw, {{0, 2}, {3}}), Kind::Disconnected));
  EXPECT_TRUE(has(kinds(logical, hw, {{0}, {2}}), Kind::MissingCoupler));
  EXPECT_FALSE(validate_embedding(logical, hw, Embedding{{{0}}, 1.0}).empty());
}

TEST(Validator, YieldMasksQubits) {
  const Graph logical(2, {{0, 1}});
  const std::vector<NodeId> dead{1};
  const Graph hw = apply_yield(path(4), dead, {});
  EXPECT_TRUE(has(kinds(logical, hw, {{0}, {1}}), Kind::UnknownQubit));
}

TEST(Clique, NativeLimitAndValidity) {
  EXPECT_EQ(native_clique_limit(16), 172);
  const Graph hw = pegasus(6);
  const int limit = native_clique_limit(6);
  for (int k : {2, 5, 17, limit}) {
    const Embedding e = embed_clique(k, hw);
    EXPECT_TRUE(validate_embedding(clique(k), hw, e).empty()) << "k=" << k;
  }
}

TEST(Clique, SurvivesYield) {
  const Graph hw = apply_random_yield(pegasus(6), 0.98, 0.98, 3);
  const Embedding e = embed_clique(12, hw, 1);
  EXPECT_TRUE(validate_embedding(clique(12), hw, e).empty());
}

TEST(Lattice, ValidAndBounded) {
  const Graph hw = pegasus(6);
  const Embedding e = embed_lattice3d(3, 4, 3, hw);
  EXPECT_TRUE(validate_embedding(lattice3d(3, 4, 3), hw, e).empty());
  EXPECT_EQ(e.max_chain_length(), 2u);
  const Graph p16 = pegasus(16);
  const Embedding big = embed_lattice3d(14, 15, 12, p16);
  EXPECT_TRUE(validate_embedding(lattice3d(14, 15, 12), p16, big).empty());
  EXPECT_THROW(embed_lattice3d(12, 14, 16, p16), EmbeddingError);
}

TEST(Heuristic, FindsValidEmbeddings) {
  const Graph hw = pegasus(4);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Graph logical = dreg(20, 3, seed);
    const Embedding e = embed_heuristic(logical, hw, seed);
    EXPECT_TRUE(validate_embedding(logical, hw, e).empty()) << "seed " << seed;
  }
  EXPECT_EQ(embed_heuristic(dreg(12, 3, 1), hw, 4), embed_heuristic(dreg(12, 3, 1), hw, 4));
}

TEST(Heuristic, ReportsImpossibleTargets) {
  EXPECT_THROW(embed_heuristic(clique(6), path(5), 1, 2), EmbeddingNotFound);
}

TEST(ChainStrength, MatchesFormulaAndScalesLinearly) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const BQM m = oracle::random_bqm(8, Vartype::Spin, rng);
    double sum = 0.0;
    const auto q = oracle::dense(m);
    for (std::size_t i = 0; i < 8; ++i)
      for (std::size_t j = 0; j < 8; ++j)
        if (i != j) sum += std::pow(q[std::min(i, j)][std::max(i, j)], 2);
    EXPECT_NEAR(default_chain_strength(m), 1.5 * std::sqrt(sum / 8.0), 1e-12);
    BQM scaled = m;
    for (const auto& [uv, J] : m.interactions()) scaled.set_quadratic(uv.first, uv.second, 3.0 * J);
    EXPECT_NEAR(default_chain_strength(scaled), 3.0 * default_chain_strength(m), 1e-12);
  }
  EXPECT_EQ(default_chain_strength(BQM(Vartype::Spin, 3)), 1.0);
}

TEST(EmbedUnembed, IntactChainsReproduceLogicalEnergies) {
  const Graph hw = pegasus(4);
  Rng rng(8);
  const Graph lg = lattice3d(2, 2, 2);
  BQM m(Vartype::Spin, lg.num_nodes());
  for (VariableId v = 0; v < m.num_variables(); ++v) m.set_linear(v, 2.0 * uniform01(rng) - 1.0);
  for (auto [a, b] : lg.edges()) m.set_quadratic(a, b, 2.0 * uniform01(rng) - 1.0);
  Embedding e = embed_lattice3d(2, 2, 2, hw);
  e.chain_strength = default_chain_strength(m);
  const EmbeddedModel em = apply_embedding(m, e, hw);
  oracle::enumerate(m.num_variables(), Vartype::Spin, [&](const std::vector<std::int8_t>& x) {
    const auto p = lift(x, e, em, hw.capacity());
    ASSERT_NEAR(oracle::energy(em.physical, p), oracle::energy(m, x) + em.chain_term, 1e-9);
    Rng coin(1);
    const Unembedded u = unembed(p, em, e, coin);
    ASSERT_EQ(u.logical.values, x);
    ASSERT_EQ(u.report.num_broken, 0u);
  });
}

TEST(EmbedUnembed, StrongChainsMapPhysicalGroundToLogicalGround) {
  const Graph hw = pegasus(3);
  Rng rng(9);
  for (int trial = 0; trial < 3; ++trial) {
    const BQM m = oracle::random_bqm(4, Vartype::Spin, rng, 1.0);
    Embedding e = embed_clique(4, hw);
    e.chain_strength = 10.0;
    const EmbeddedModel em = apply_embedding(m, e, hw);
    ASSERT_LE(em.physical.num_variables(), 20u);
    const auto phys = oracle::ground(em.physical);
    const auto logical = oracle::ground(m);
    Rng coin(2);
    for (const auto& p : phys.states) {
      const Unembedded u = unembed(p, em, e, coin);
      EXPECT_EQ(u.report.num_broken, 0u);
      EXPECT_NEAR(oracle::energy(m, u.logical.values), logical.energy, 1e-9);
    }
  }
}

TEST(EmbedUnembed, BrokenChainsUseMajorityVote) {
  const Graph hw = path(5);
  const Graph lg(2, {{0, 1}});
  BQM m(Vartype::Spin, 2);
  m.set_quadratic(0, 1, 1.0);
  const Embedding e{{{0, 1, 2}, {3, 4}}, 1.0};
  ASSERT_TRUE(validate_embedding(lg, hw, e).empty());
  const EmbeddedModel em = apply_embedding(m, e, hw);
  Rng coin(3);
  const std::vector<std::int8_t> p{1, -1, 1, -1, -1};
  const Unembedded u = unembed(p, em, e, coin);
  EXPECT_EQ(u.logical.values, (std::vector<std::int8_t>{1, -1}));
  EXPECT_EQ(u.report.num_broken, 1u);
  EXPECT_TRUE(u.report.broken[0]);
  EXPECT_THROW(unembed(std::vector<std::int8_t>{1, 1}, em, e, coin), EmbeddingError);
}

TEST(EmbeddingJson, RoundTrip) {
  const Embedding e = embed_clique(6, pegasus(3));
  EXPECT_EQ(embedding_from_json(to_json(e)), e);
  const auto path = std::filesystem::temp_directory_path() / "qubench_embedding.json";
  save_embedding(e, path);
  EXPECT_EQ(load_embedding(path), e);
  std::filesystem::remove(path);
  EXPECT_THROW(embedding_from_json(nlohmann::json::array()), EmbeddingError);
}
