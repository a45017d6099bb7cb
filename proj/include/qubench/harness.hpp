#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "qubench/embedding.hpp"
#include "qubench/generators.hpp"
#include "qubench/graph.hpp"
#include "qubench/model.hpp"
#include "qubench/qpu.hpp"
#include "qubench/solvers.hpp"

namespace qubench {

class HarnessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Scenario {
  int s = 1;
  double t = 1.0;

  bool operator==(const Scenario&) const = default;
  auto operator<=>(const Scenario&) const = default;
};

/// Compact decimal form of a time limit, e.g. "0.02" or "1".
std::string format_seconds(double t);
/// "<s>_<t>", as used in output file names.
std::string scenario_key(const Scenario& sc);

struct ScenarioGridConfig {
  std::vector<int> sample_counts{1, 10, 100, 1000};
  std::vector<double> time_limits{0.02, 0.05, 0.1, 0.2, 0.5, 1.0};
  // Scenarios with t/s below the floor are dropped. The explicit exclusions
  // apply only while the floor is positive.
  double floor = 2e-4;
  std::vector<Scenario> exclude{{1000, 0.02}, {1000, 0.05}, {1000, 0.1}, {1000, 0.2}, {100, 0.02}};
};

/// Cross product in (s, t) order minus dropped scenarios. Throws on an
/// empty result.
std::vector<Scenario> scenario_grid(const ScenarioGridConfig& config = {});

/// Solvers whose id starts with "qpu" sample through the QPU client.
bool is_qpu_solver(const std::string& id);

/// Which model the non-QPU solvers read on embedded classes.
enum class Dispatch {
  Physical,  // every solver reads the embedded model (milestone 1)
  Dual,      // logical solvers read the logical model, physical ones the embedded one (milestone 2)
};

std::string_view to_string(Dispatch d);
Dispatch parse_dispatch(std::string_view text);

struct PreparedInstance {
  std::string id;
  ClassTag tag = ClassTag::NAT1;
  int size = 0;
  int index = 0;
  std::uint64_t seed = 0;
  BQM logical;
  std::shared_ptr<const Graph> hw;
  std::optional<Embedding> embedding;
  std::optional<EmbeddedModel> embedded;  // at chain-strength multiplier 1

  bool is_embedded() const { return embedding.has_value(); }
  const BQM& physical() const { return embedded ? embedded->physical : logical; }
};

/// Generates instance `index` of a class and embeds it when the class is
/// not native to `hw`. Import classes read `import_file`.
PreparedInstance prepare_instance(ClassTag tag, int size, int index, std::uint64_t master_seed,
                                  std::shared_ptr<const Graph> hw,
                                  const std::filesystem::path& import_file = {});

struct Calibration {
  double init_seconds = 0.0;         // once per run
  double sample_init_seconds = 0.0;  // once per sample
  double sweep_seconds = 0.0;        // one sweep, including the solver's cost factor
};

/// num_sweeps = floor((t/s - init/s - sample_init) / sweep), at least 1.
int sweeps_for(const Calibration& c, const Scenario& sc);

/// Per (solver, instance, input space) calibration, measured once and
/// reused for every scenario. Thread-safe.
class AutotuneCache {
 public:
  Calibration get(const SolverInfo& solver, const std::string& instance_id, bool physical,
                  const BQM& model, TimingMode mode, double seconds_per_op);
  std::size_t calibrations() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, Calibration> cache_;
  std::size_t calibrations_ = 0;
};

/// Short measured run: time to build the problem, to start a sample and per
/// sweep. Model mode uses the operation counts instead.
Calibration calibrate(const SolverInfo& solver, const BQM& model, TimingMode mode,
                      double seconds_per_op);

struct TestRecord {
  std::string solver_id;
  std::string instance_id;
  std::string class_name;
  Scenario scenario;
  std::vector<double> energies;  // ascending, at most s
  bool complete = false;
  double wall_time = 0.0;
  std::uint64_t work = 0;
  std::string space = "logical";  // space of the recorded energies
  std::string input = "logical";  // model the solver read
  std::uint64_t seed = 0;
  int num_sweeps = 0;
  std::uint64_t num_drawn = 0;
  std::size_t chain_breaks = 0;  // broken chains over the kept samples
  bool mock = false;
  std::string error;  // non-empty when the run crashed

  bool operator==(const TestRecord&) const = default;
};

nlohmann::json to_json(const TestRecord& r);
TestRecord record_from_json(const nlohmann::json& doc);

struct HarnessOptions {
  TimingMode mode = TimingMode::Model;
  double seconds_per_op = kDefaultSecondsPerOp;
  Dispatch dispatch = Dispatch::Dual;
  MockQpuOptions mock;
  std::string qpu_endpoint;  // empty: QUBENCH_QPU_ENDPOINT
  AccessTimeModel access;
};

/// One budgeted solver run. Keeps the s lowest energies; the record is
/// complete when s energies were returned within the limit.
TestRecord run_test(const std::string& solver_id, const PreparedInstance& inst, const Scenario& sc,
                    const HarnessOptions& options, AutotuneCache& cache, std::uint64_t seed);

struct ClassEntry {
  ClassTag tag = ClassTag::NAT1;
  int size = 0;
  std::filesystem::path import_dir;  // import classes: directory of BQM JSON files
};

struct SuiteConfig {
  std::vector<ClassEntry> classes;
  int instances = 3;
  std::vector<std::string> solvers{"random", "sgd", "sa"};
  ScenarioGridConfig grid;
  std::optional<std::vector<Scenario>> scenarios;  // explicit list instead of the grid
  std::string hardware = "pegasus:16";  // "pegasus:<m>" or a graph file
  double node_yield = 1.0;
  double edge_yield = 1.0;
  HarnessOptions harness;
  std::uint64_t master_seed = kDefaultMasterSeed;
  std::filesystem::path output = "results";
  int jobs = 1;

  std::vector<Scenario> resolved_scenarios() const;
};

/// TOML suite description. Relative paths resolve against `base_dir`.
SuiteConfig parse_suite_config(std::string_view text, const std::filesystem::path& base_dir = {});
SuiteConfig load_suite_config(const std::filesystem::path& path);
nlohmann::json to_json(const SuiteConfig& config);

std::shared_ptr<const Graph> build_hardware(const SuiteConfig& config);

struct SuiteResult {
  std::vector<TestRecord> records;  // canonical order
  std::size_t executed = 0;
  std::size_t resumed = 0;
  std::size_t crashed = 0;
  std::filesystem::path results_path;
  std::filesystem::path manifest_path;
};

inline constexpr const char* kResultsFile = "results.jsonl";
inline constexpr const char* kJournalFile = "journal.jsonl";
inline constexpr const char* kManifestFile = "manifest.json";

/// Runs classes x instances x solvers x scenarios. Completed runs are
/// appended to the journal; with `resume` a rerun skips them. The results
/// file lists every record in canonical order.
SuiteResult run_suite(const SuiteConfig& config, bool resume = true, std::ostream* log = nullptr);

std::vector<TestRecord> load_results(const std::filesystem::path& path);
void save_results(const std::vector<TestRecord>& records, const std::filesystem::path& path);

}  // namespace qubench
