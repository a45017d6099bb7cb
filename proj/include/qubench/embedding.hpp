#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "qubench/graph.hpp"
#include "qubench/model.hpp"
#include "qubench/rng.hpp"

namespace qubench {

class EmbeddingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No embedding was found within the allowed attempts. This is a legitimate
/// outcome rather than a malformed request.
class EmbeddingNotFound : public EmbeddingError {
 public:
  using EmbeddingError::EmbeddingError;
};

struct Embedding {
  std::vector<std::vector<NodeId>> chains;  // indexed by logical variable
  double chain_strength = 1.0;

  std::size_t num_qubits() const;
  std::size_t max_chain_length() const;
  double mean_chain_length() const;

  bool operator==(const Embedding&) const = default;
};

struct EmbeddingViolation {
  enum class Kind { EmptyChain, UnknownQubit, Overlap, Disconnected, MissingCoupler };
  Kind kind;
  std::vector<std::int64_t> ids;  // logical ids first, then qubit ids where relevant
  std::string message;
};

/// Checks the chain map against the definition of a minor embedding of
/// `logical` into `hw`. An empty result means the embedding is valid.
std::vector<EmbeddingViolation> validate_embedding(const Graph& logical, const Graph& hw,
                                                   const Embedding& e);

/// Clique embedding on a Pegasus graph: each chain is an L-shaped pair of
/// vertical and horizontal qubit lines. Under yield the window is shifted,
/// then the heuristic embedder is tried.
Embedding embed_clique(int k, const Graph& hw, std::uint64_t seed = 0);

/// Largest clique the native Pegasus construction supports on P_m.
int native_clique_limit(int m);

/// Cubic lattice with chains of two qubits per site on a Pegasus graph.
/// Logical ids follow lattice3d_index.
Embedding embed_lattice3d(int X, int Y, int Z, const Graph& hw);

struct HeuristicOptions {
  int max_tries = 10;
  int max_passes = 64;
  int refine_passes = 2;
};

Embedding embed_heuristic(const Graph& logical, const Graph& hw, std::uint64_t seed,
                          const HeuristicOptions& options = {});
inline Embedding embed_heuristic(const Graph& logical, const Graph& hw, std::uint64_t seed,
                                 int max_tries) {
  HeuristicOptions o;
  o.max_tries = max_tries;
  return embed_heuristic(logical, hw, seed, o);
}

/// 1.5 * sqrt(mean over variables of sum_j J_ij^2), on the spin form of the
/// model; 1.0 for a model without couplers.
double default_chain_strength(const BQM& model);

struct EmbeddedModel {
  BQM physical;                 // spin model over `qubits`, in that order
  std::vector<NodeId> qubits;   // sorted qubit ids used by the embedding
  double chain_coupling = 0.0;  // J_chain actually applied (multiplier * strength)
  double chain_term = 0.0;      // energy of all intra-chain couplers when unbroken

  /// Physical variable index of each qubit id, -1 when unused.
  std::vector<std::int64_t> qubit_index(std::size_t capacity) const;
};

EmbeddedModel apply_embedding(const BQM& logical, const Embedding& e, const Graph& hw,
                              double multiplier = 1.0);

struct ChainBreakReport {
  std::size_t num_broken = 0;
  std::vector<bool> broken;  // per logical variable
};

struct Unembedded {
  Assignment logical;  // spin values
  ChainBreakReport report;
};

/// Majority vote per chain; ties are decided by a coin from `rng`. The sample
/// is indexed by the embedded model's physical variables.
Unembedded unembed(std::span<const std::int8_t> physical_spins, const EmbeddedModel& embedded,
                   const Embedding& e, Rng& rng);

nlohmann::json to_json(const Embedding& e);
Embedding embedding_from_json(const nlohmann::json& doc);
void save_embedding(const Embedding& e, const std::filesystem::path& path);
Embedding load_embedding(const std::filesystem::path& path);

}  // namespace qubench
