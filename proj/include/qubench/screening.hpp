#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "qubench/embedding.hpp"
#include "qubench/generators.hpp"
#include "qubench/graph.hpp"
#include "qubench/solvers.hpp"

namespace qubench {

class ScreeningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScreeningOptions {
  // Size search (heuristic-embedded classes only).
  int min_size = 8;
  int max_size = 1024;
  int embed_trials = 3;
  int lmax_low = 15;
  int lmax_high = 20;
  HeuristicOptions embed_options;
  // Fixed size for classes that skip the search; 0 picks a class default.
  int size = 0;

  // Hardness check.
  double solver_time = 0.016;
  int runs = 50;
  double agreement = 0.9;
  TimingMode timing = TimingMode::Wall;
  double seconds_per_op = kDefaultSecondsPerOp;
  std::uint64_t seed = kDefaultMasterSeed;
};

struct SizeProbe {
  int size = 0;
  std::vector<int> lmax;  // one per successful trial
  int failures = 0;
  double median = 0.0;
};

struct AgreementResult {
  double best_energy = 0.0;
  double sgd_agreement = 0.0;  // fraction of runs reaching best_energy
  double sa_agreement = 0.0;
  std::vector<double> sgd_minima;
  std::vector<double> sa_minima;
};

struct ScreeningVerdict {
  bool accept = false;
  std::string class_name;
  int size = 0;
  bool searched = false;  // whether the size search ran
  double median_lmax = 0.0;
  std::vector<SizeProbe> probes;
  AgreementResult agreement;
};

nlohmann::json to_json(const ScreeningVerdict& v);

/// Median over trials of the heuristic embedding's maximum chain length.
SizeProbe probe_size(ClassTag tag, int size, const Graph& hw, const ScreeningOptions& options);

/// Binary search for a size whose median L_max lies in [lmax_low, lmax_high];
/// returns the probe of the chosen size. If no probed size lands in the
/// range, the largest size that embedded is returned. Throws when nothing
/// embeds.
SizeProbe search_size(ClassTag tag, const Graph& hw, const ScreeningOptions& options,
                      std::vector<SizeProbe>* probes = nullptr);

/// Runs SGD and SA `runs` times each for solver_time and measures how often
/// each reaches the lowest energy seen.
AgreementResult measure_agreement(const BQM& model, const ScreeningOptions& options);

/// REJECT when both solvers agree on the minimum in at least the agreement
/// fraction of runs.
bool accept_agreement(const AgreementResult& a, const ScreeningOptions& options);

/// Full procedure for a class on the given hardware graph.
ScreeningVerdict screen_class(ClassTag tag, const Graph& hw, const ScreeningOptions& options = {});

/// Hardness check only, for an instance family given by a generator.
ScreeningVerdict screen_model(const std::string& name, const std::function<BQM(std::uint64_t)>& make,
                              const ScreeningOptions& options = {});

}  // namespace qubench
