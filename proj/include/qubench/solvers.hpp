#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "qubench/model.hpp"
#include "qubench/rng.hpp"
#include "qubench/spin_problem.hpp"

namespace qubench {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TimingMode { Wall, Model };

std::string_view to_string(TimingMode mode);
TimingMode parse_timing_mode(std::string_view text);

/// Default cost of one elementary operation (a bias read, a field update)
/// in model-time mode.
constexpr double kDefaultSecondsPerOp = 5e-9;

/// Elapsed time for budget checks. In model mode time advances only through
/// charge(), so runs are reproducible on any machine.
class BudgetClock {
 public:
  explicit BudgetClock(TimingMode mode = TimingMode::Wall,
                       double seconds_per_op = kDefaultSecondsPerOp);

  void charge(std::uint64_t ops) { ops_ += ops; }
  double elapsed() const;
  std::uint64_t ops() const { return ops_; }
  TimingMode mode() const { return mode_; }
  double seconds_per_op() const { return seconds_per_op_; }

 private:
  TimingMode mode_;
  double seconds_per_op_;
  std::uint64_t ops_ = 0;
  std::chrono::steady_clock::time_point start_;
};

enum class SampleStatus { Complete, Partial };

struct Sample {
  std::vector<std::int8_t> values;  // in the model's vartype
  double energy = 0.0;
  std::uint32_t num_occurrences = 1;
};

struct SampleSet {
  std::string solver_id;
  Vartype vartype = Vartype::Spin;
  std::vector<Sample> samples;  // ascending energy
  std::size_t requested = 0;
  std::uint64_t work = 0;
  double wall_time = 0.0;
  SampleStatus status = SampleStatus::Partial;
  std::uint64_t num_drawn = 0;  // candidate solutions produced before subsampling
  bool mock = false;

  std::vector<double> energies() const;
};

nlohmann::json to_json(const SampleSet& set);

struct SolverConfig {
  std::uint64_t seed = 0;
  int num_sweeps = 1000;
  // PT temperatures, strictly increasing; empty selects the default ladder.
  std::vector<double> temperatures;
  int num_replicas = 16;
  std::uint64_t max_draws = 100000;  // restart cap for Random and SGD
  TimingMode timing = TimingMode::Wall;
  double seconds_per_op = kDefaultSecondsPerOp;
  // Lowers num_sweeps for the remaining samples when a run falls behind.
  bool watchdog = true;
};

/// Geometric inverse-temperature schedule from hot to cold, as used by SA.
std::vector<double> default_beta_schedule(const SpinProblem& p, int num_sweeps);
/// Default PT ladder: 16 (or `count`) temperatures spaced geometrically
/// between the SA cold and hot end points.
std::vector<double> default_temperature_ladder(const SpinProblem& p, int count = 16);

/// Single-spin Metropolis dynamics with cached local fields.
class MetropolisChain {
 public:
  MetropolisChain(const SpinProblem& p, Rng& rng);
  MetropolisChain(const SpinProblem& p, std::vector<std::int8_t> initial);

  /// One pass over all variables at inverse temperature beta; beta may be
  /// +infinity (only non-increasing moves accepted).
  void sweep(double beta, Rng& rng);
  void flip(std::size_t i);

  const std::vector<std::int8_t>& spins() const { return x_; }
  double energy() const { return energy_; }

 private:
  const SpinProblem* p_;
  std::vector<std::int8_t> x_;
  std::vector<double> field_;
  double energy_ = 0.0;
};

/// Steepest single-flip descent to a 1-flip local minimum. Returns the number
/// of flips performed.
std::uint64_t steepest_descent(const SpinProblem& p, std::vector<std::int8_t>& x,
                               std::vector<double>& field);

SampleSet solve_random(const BQM& model, std::size_t s, double t, const SolverConfig& config);
SampleSet solve_sgd(const BQM& model, std::size_t s, double t, const SolverConfig& config);
SampleSet solve_sa(const BQM& model, std::size_t s, double t, const SolverConfig& config);
SampleSet solve_pt(const BQM& model, std::size_t s, double t, const SolverConfig& config);

/// Which problem form a solver reads.
enum class SolverSpace { Logical, Physical, Any };

using SolverFn = std::function<SampleSet(const BQM&, std::size_t, double, const SolverConfig&)>;

struct SolverInfo {
  std::string id;
  SolverSpace space = SolverSpace::Any;
  bool uses_sweeps = false;  // autotuned from the budget
  int sweep_cost_factor = 1;  // passes over the model per sweep (PT: replicas)
  SolverFn fn;
};

/// Built-in ids: random, sgd, sa, pt, sa_native.
SolverInfo find_solver(const std::string& id);
std::vector<std::string> solver_ids();
/// Adds or replaces a solver, e.g. an external sampler.
void register_solver(SolverInfo info);

SampleSet solve(const std::string& id, const BQM& model, std::size_t s, double t,
                const SolverConfig& config);

/// Operations charged once before sampling starts (building the problem).
std::uint64_t init_ops(const SpinProblem& p);
/// Operations to start one sample: a random state and its local fields.
std::uint64_t sample_init_ops(const SpinProblem& p);
/// Operations per sweep of an SA-type solver.
std::uint64_t sweep_ops(const SpinProblem& p);

}  // namespace qubench
