#include "qubench/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <queue>
#include <tuple>

namespace qubench {

using nlohmann::json;

std::string_view to_string(TimingMode mode) { return mode == TimingMode::Wall ? "wall" : "model"; }

TimingMode parse_timing_mode(std::string_view text) {
  if (text == "wall") return TimingMode::Wall;
  if (text == "model" || text == "model-time") return TimingMode::Model;
  throw SolverError("unknown timing mode '" + std::string(text) + "'");
}

BudgetClock::BudgetClock(TimingMode mode, double seconds_per_op)
    : mode_(mode), seconds_per_op_(seconds_per_op), start_(std::chrono::steady_clock::now()) {
  if (!(seconds_per_op > 0.0)) throw SolverError("seconds_per_op must be positive");
}

double BudgetClock::elapsed() const {
  if (mode_ == TimingMode::Model) return static_cast<double>(ops_) * seconds_per_op_;
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
}

std::vector<double> SampleSet::energies() const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples)
    for (std::uint32_t k = 0; k < s.num_occurrences; ++k) out.push_back(s.energy);
  return out;
}

json to_json(const SampleSet& set) {
  json samples = json::array();
  for (const auto& s : set.samples) {
    std::vector<int> values(s.values.begin(), s.values.end());
    samples.push_back({{"values", values}, {"energy", s.energy},
                       {"num_occurrences", s.num_occurrences}});
  }
  return json{{"solver", set.solver_id},
              {"vartype", to_string(set.vartype)},
              {"status", set.status == SampleStatus::Complete ? "complete" : "partial"},
              {"requested", set.requested},
              {"num_drawn", set.num_drawn},
              {"work", set.work},
              {"wall_time", set.wall_time},
              {"mock", set.mock},
              {"samples", std::move(samples)}};
}

std::uint64_t init_ops(const SpinProblem& p) { return p.n + p.m; }
std::uint64_t sample_init_ops(const SpinProblem& p) { return 2 * p.n + 2 * p.m; }
std::uint64_t sweep_ops(const SpinProblem& p) { return p.n + 2 * p.m; }

std::vector<double> default_beta_schedule(const SpinProblem& p, int num_sweeps) {
  if (num_sweeps < 1) throw SolverError("num_sweeps must be >= 1");
  const double max_delta = p.max_flip_delta();
  const double min_bias = p.min_nonzero_bias();
  if (max_delta == 0.0 || min_bias == 0.0) return std::vector<double>(num_sweeps, 1.0);
  const double hot = std::log(2.0) / max_delta;
  const double cold = std::log(100.0) / (2.0 * min_bias);
  std::vector<double> out(num_sweeps);
  if (num_sweeps == 1) {
    out[0] = cold;
    return out;
  }
  for (int k = 0; k < num_sweeps; ++k)
    out[k] = hot * std::pow(cold / hot, static_cast<double>(k) / (num_sweeps - 1));
  return out;
}

std::vector<double> default_temperature_ladder(const SpinProblem& p, int count) {
  if (count < 1) throw SolverError("temperature ladder must not be empty");
  const double max_delta = p.max_flip_delta();
  const double min_bias = p.min_nonzero_bias();
  double t_cold = 1.0, t_hot = 1.0;
  if (max_delta > 0.0 && min_bias > 0.0) {
    t_cold = 2.0 * min_bias / std::log(100.0);
    t_hot = max_delta / std::log(2.0);
  }
  std::vector<double> out(count);
  if (count == 1 || t_hot <= t_cold) {
    for (int k = 0; k < count; ++k) out[k] = t_cold * (1.0 + k);
    return out;
  }
  for (int k = 0; k < count; ++k)
    out[k] = t_cold * std::pow(t_hot / t_cold, static_cast<double>(k) / (count - 1));
  return out;
}

MetropolisChain::MetropolisChain(const SpinProblem& p, Rng& rng) : p_(&p), x_(p.n) {
  for (auto& v : x_) v = random_spin(rng);
  p.local_fields(x_, field_);
  energy_ = p.energy(x_);
}

MetropolisChain::MetropolisChain(const SpinProblem& p, std::vector<std::int8_t> initial)
    : p_(&p), x_(std::move(initial)) {
  if (x_.size() != p.n) throw SolverError("initial state has the wrong length");
  p.local_fields(x_, field_);
  energy_ = p.energy(x_);
}

void MetropolisChain::flip(std::size_t i) {
  const SpinProblem& p = *p_;
  energy_ += -2.0 * x_[i] * field_[i];
  x_[i] = static_cast<std::int8_t>(-x_[i]);
  const double change = 2.0 * x_[i];
  for (std::size_t k = p.row[i]; k < p.row[i + 1]; ++k) field_[p.col[k]] += change * p.weight[k];
}

void MetropolisChain::sweep(double beta, Rng& rng) {
  const bool greedy = std::isinf(beta);
  for (std::size_t i = 0; i < p_->n; ++i) {
    const double delta = -2.0 * x_[i] * field_[i];
    if (delta <= 0.0 || (!greedy && uniform01(rng) < std::exp(-beta * delta))) flip(i);
  }
}

namespace {

double tolerance(const SpinProblem& p) { return 1e-12 * std::max(1.0, p.max_abs_bias()); }

// Runs steepest descent with a per-step callback; stops early when the
// callback returns false. Returns true when a local minimum was reached.
template <typename Step>
bool descend(const SpinProblem& p, std::vector<std::int8_t>& x, std::vector<double>& field,
             std::uint64_t& flips, Step&& step) {
  const double tol = tolerance(p);
  while (true) {
    std::size_t best = p.n;
    double best_delta = -tol;
    for (std::size_t i = 0; i < p.n; ++i) {
      const double delta = -2.0 * x[i] * field[i];
      if (delta < best_delta) {
        best_delta = delta;
        best = i;
      }
    }
    if (best == p.n) return true;
    x[best] = static_cast<std::int8_t>(-x[best]);
    const double change = 2.0 * x[best];
    for (std::size_t k = p.row[best]; k < p.row[best + 1]; ++k)
      field[p.col[k]] += change * p.weight[k];
    ++flips;
    if (!step(best)) return false;
  }
}

// Keeps the s lowest-energy candidates; ties keep the earlier draw.
class BestKeeper {
 public:
  explicit BestKeeper(std::size_t capacity) : capacity_(capacity) {}

  void offer(const std::vector<std::int8_t>& x, double energy) {
    const std::uint64_t seq = next_++;
    if (capacity_ == 0) return;
    if (heap_.size() < capacity_) {
      heap_.push({energy, seq, x});
      return;
    }
    const auto& worst = heap_.top();
    if (std::tie(energy, seq) < std::tie(worst.energy, worst.seq)) {
      heap_.pop();
      heap_.push({energy, seq, x});
    }
  }

  std::vector<std::vector<std::int8_t>> take() {
    std::vector<Entry> all;
    while (!heap_.empty()) {
      all.push_back(heap_.top());
      heap_.pop();
    }
    std::sort(all.begin(), all.end());
    std::vector<std::vector<std::int8_t>> out;
    for (auto& e : all) out.push_back(std::move(e.x));
    return out;
  }

 private:
  struct Entry {
    double energy;
    std::uint64_t seq;
    std::vector<std::int8_t> x;
    bool operator<(const Entry& o) const { return std::tie(energy, seq) < std::tie(o.energy, o.seq); }
  };
  std::size_t capacity_;
  std::uint64_t next_ = 0;
  std::priority_queue<Entry> heap_;
};

SampleSet finish(const std::string& id, const BQM& model, std::size_t s,
                 std::vector<std::vector<std::int8_t>> states, const BudgetClock& clock) {
  SampleSet out;
  out.solver_id = id;
  out.vartype = model.vartype();
  out.requested = s;
  for (auto& spins : states) {
    Sample sample;
    sample.values = to_model_values(model, spins);
    sample.energy = energy(model, std::span<const std::int8_t>(sample.values));
    out.samples.push_back(std::move(sample));
  }
  std::stable_sort(out.samples.begin(), out.samples.end(),
                   [](const Sample& a, const Sample& b) { return a.energy < b.energy; });
  out.status = out.samples.size() >= s ? SampleStatus::Complete : SampleStatus::Partial;
  out.wall_time = clock.elapsed();
  return out;
}

bool over_budget(const BudgetClock& clock, double t, std::uint64_t next_ops) {
  if (clock.mode() == TimingMode::Model)
    return static_cast<double>(clock.ops() + next_ops) * clock.seconds_per_op() > t;
  return clock.elapsed() >= t;
}

void check_request(std::size_t s, double t) {
  if (s < 1) throw SolverError("sample count must be >= 1");
  if (!(t > 0.0)) throw SolverError("time limit must be positive");
}

}  // namespace

std::uint64_t steepest_descent(const SpinProblem& p, std::vector<std::int8_t>& x,
                               std::vector<double>& field) {
  std::uint64_t flips = 0;
  descend(p, x, field, flips, [](std::size_t) { return true; });
  return flips;
}

SampleSet solve_random(const BQM& model, std::size_t s, double t, const SolverConfig& config) {
  check_request(s, t);
  BudgetClock clock(config.timing, config.seconds_per_op);
  const SpinProblem p = SpinProblem::from(model);
  clock.charge(init_ops(p));
  Rng rng(config.seed);
  BestKeeper keep(s);
  std::vector<std::int8_t> x(p.n);
  const std::uint64_t draw_ops = 2 * p.n + p.m;
  std::uint64_t drawn = 0;
  while (drawn < config.max_draws && !over_budget(clock, t, draw_ops)) {
    for (auto& v : x) v = random_spin(rng);
    keep.offer(x, p.energy(x));
    clock.charge(draw_ops);
    ++drawn;
  }
  SampleSet out = finish("random", model, s, keep.take(), clock);
  out.num_drawn = drawn;
  out.work = 0;
  return out;
}

SampleSet solve_sgd(const BQM& model, std::size_t s, double t, const SolverConfig& config) {
  check_request(s, t);
  BudgetClock clock(config.timing, config.seconds_per_op);
  const SpinProblem p = SpinProblem::from(model);
  clock.charge(init_ops(p));
  Rng rng(config.seed);
  BestKeeper keep(s);
  std::vector<std::int8_t> x(p.n);
  std::vector<double> field;
  std::uint64_t drawn = 0, work = 0;
  bool out_of_time = false;
  while (drawn < config.max_draws && !out_of_time &&
         !over_budget(clock, t, sample_init_ops(p))) {
    for (auto& v : x) v = random_spin(rng);
    p.local_fields(x, field);
    clock.charge(sample_init_ops(p));
    std::uint64_t flips = 0;
    std::uint64_t steps = 0;
    const bool done = descend(p, x, field, flips, [&](std::size_t i) {
      const std::uint64_t ops = p.n + p.degree(i);
      if (clock.mode() == TimingMode::Model) {
        if (over_budget(clock, t, ops)) return false;
        clock.charge(ops);
        return true;
      }
      clock.charge(ops);
      return (++steps & 63) != 0 || clock.elapsed() < t;
    });
    work += flips;
    if (!done) {
      out_of_time = true;
      break;
    }
    // The final scan that confirms the local minimum.
    clock.charge(p.n);
    keep.offer(x, p.energy(x));
    ++drawn;
  }
  SampleSet out = finish("sgd", model, s, keep.take(), clock);
  out.num_drawn = drawn;
  out.work = work;
  return out;
}

namespace {

// Shared budget logic for sweep-based solvers: picks the number of sweeps for
// the next sample, or 0 when no further sample fits.
class SweepBudget {
 public:
  SweepBudget(const BudgetClock& clock, double t, std::size_t s, int num_sweeps,
              std::uint64_t start_ops, std::uint64_t per_sweep_ops, bool watchdog)
      : clock_(clock), t_(t), s_(s), num_sweeps_(num_sweeps), start_ops_(start_ops),
        per_sweep_ops_(per_sweep_ops), watchdog_(watchdog) {}

  int next(std::size_t done) {
    const double remaining = t_ - clock_.elapsed();
    if (remaining <= 0.0) return 0;
    const double per_sweep = seconds_per_sweep();
    const double start = static_cast<double>(start_ops_) * clock_.seconds_per_op();
    int sweeps = num_sweeps_;
    if (watchdog_ && per_sweep > 0.0) {
      const double share = remaining / static_cast<double>(s_ - done);
      const double fit = std::floor((share - start) / per_sweep);
      if (fit < sweeps) sweeps = static_cast<int>(std::max(1.0, fit));
    }
    if (clock_.mode() == TimingMode::Model) {
      const double need = start + sweeps * per_sweep;
      if (need > remaining + 1e-15 * t_) return 0;
    }
    return sweeps;
  }

  void record(int sweeps, double seconds) {
    sweeps_done_ += sweeps;
    sweep_seconds_ += seconds;
  }

 private:
  double seconds_per_sweep() const {
    if (clock_.mode() == TimingMode::Model)
      return static_cast<double>(per_sweep_ops_) * clock_.seconds_per_op();
    if (sweeps_done_ == 0) return 0.0;
    return sweep_seconds_ / static_cast<double>(sweeps_done_);
  }

  const BudgetClock& clock_;
  double t_;
  std::size_t s_;
  int num_sweeps_;
  std::uint64_t start_ops_, per_sweep_ops_;
  bool watchdog_;
  std::uint64_t sweeps_done_ = 0;
  double sweep_seconds_ = 0.0;
};

}  // namespace

SampleSet solve_sa(const BQM& model, std::size_t s, double t, const SolverConfig& config) {
  check_request(s, t);
  if (config.num_sweeps < 1) throw SolverError("num_sweeps must be >= 1");
  BudgetClock clock(config.timing, config.seconds_per_op);
  const SpinProblem p = SpinProblem::from(model);
  clock.charge(init_ops(p));
  Rng rng(config.seed);
  SweepBudget budget(clock, t, s, config.num_sweeps, sample_init_ops(p), sweep_ops(p),
                     config.watchdog);
  std::vector<std::vector<std::int8_t>> states;
  std::vector<double> schedule;
  int schedule_len = 0;
  std::uint64_t work = 0;
  for (std::size_t k = 0; k < s; ++k) {
    const int sweeps = budget.next(k);
    if (sweeps == 0) break;
    if (sweeps != schedule_len) {
      schedule = default_beta_schedule(p, sweeps);
      schedule_len = sweeps;
    }
    const double before = clock.elapsed();
    MetropolisChain chain(p, rng);
    clock.charge(sample_init_ops(p));
    for (double beta : schedule) {
      chain.sweep(beta, rng);
      clock.charge(sweep_ops(p));
    }
    budget.record(sweeps, clock.elapsed() - before);
    work += static_cast<std::uint64_t>(p.n) * sweeps;
    states.push_back(chain.spins());
    if (clock.mode() == TimingMode::Wall && clock.elapsed() > t) break;
  }
  SampleSet out = finish("sa", model, s, std::move(states), clock);
  out.num_drawn = out.samples.size();
  out.work = work;
  return out;
}

SampleSet solve_pt(const BQM& model, std::size_t s, double t, const SolverConfig& config) {
  check_request(s, t);
  if (config.num_sweeps < 1) throw SolverError("num_sweeps must be >= 1");
  BudgetClock clock(config.timing, config.seconds_per_op);
  const SpinProblem p = SpinProblem::from(model);
  clock.charge(init_ops(p));
  std::vector<double> temps = config.temperatures;
  if (temps.empty()) temps = default_temperature_ladder(p, config.num_replicas);
  for (std::size_t i = 0; i < temps.size(); ++i) {
    if (!(temps[i] > 0.0)) throw SolverError("temperatures must be positive");
    if (i > 0 && !(temps[i] > temps[i - 1]))
      throw SolverError("temperature ladder must be strictly increasing");
  }
  const std::size_t R = temps.size();
  std::vector<double> beta(R);
  for (std::size_t r = 0; r < R; ++r) beta[r] = 1.0 / temps[r];

  Rng rng(config.seed);
  SweepBudget budget(clock, t, s, config.num_sweeps, R * sample_init_ops(p), R * sweep_ops(p) + R,
                     config.watchdog);
  std::vector<std::vector<std::int8_t>> states;
  std::uint64_t work = 0;
  for (std::size_t k = 0; k < s; ++k) {
    const int rounds = budget.next(k);
    if (rounds == 0) break;
    const double before = clock.elapsed();
    std::vector<MetropolisChain> replicas;
    replicas.reserve(R);
    for (std::size_t r = 0; r < R; ++r) replicas.emplace_back(p, rng);
    clock.charge(R * sample_init_ops(p));
    std::vector<std::int8_t> best = replicas[0].spins();
    double best_energy = replicas[0].energy();
    for (int round = 0; round < rounds; ++round) {
      for (std::size_t r = 0; r < R; ++r) replicas[r].sweep(beta[r], rng);
      clock.charge(R * sweep_ops(p));
      for (std::size_t r = 0; r + 1 < R; ++r) {
        const double exponent =
            (beta[r] - beta[r + 1]) * (replicas[r].energy() - replicas[r + 1].energy());
        if (exponent >= 0.0 || uniform01(rng) < std::exp(exponent))
          std::swap(replicas[r], replicas[r + 1]);
      }
      clock.charge(R);
      if (replicas[0].energy() < best_energy) {
        best_energy = replicas[0].energy();
        best = replicas[0].spins();
      }
    }
    budget.record(rounds, clock.elapsed() - before);
    work += static_cast<std::uint64_t>(R) * p.n * rounds;
    states.push_back(std::move(best));
    if (clock.mode() == TimingMode::Wall && clock.elapsed() > t) break;
  }
  SampleSet out = finish("pt", model, s, std::move(states), clock);
  out.num_drawn = out.samples.size();
  out.work = work;
  return out;
}

namespace {

SampleSet relabel(SampleSet set, const std::string& id) {
  set.solver_id = id;
  return set;
}

struct Registry {
  std::mutex mutex;
  std::vector<SolverInfo> solvers;

  Registry() {
    solvers.push_back({"random", SolverSpace::Logical, false, 1, solve_random});
    solvers.push_back({"sgd", SolverSpace::Logical, false, 1, solve_sgd});
    solvers.push_back({"sa", SolverSpace::Logical, true, 1, solve_sa});
    solvers.push_back({"pt", SolverSpace::Logical, true, 16, solve_pt});
    // Sequential stand-in for the native-graph SA variants: same algorithm,
    // reads the physical (embedded) model.
    solvers.push_back({"sa_native", SolverSpace::Physical, true, 1,
                       [](const BQM& m, std::size_t s, double t, const SolverConfig& c) {
                         return relabel(solve_sa(m, s, t, c), "sa_native");
                       }});
  }
};

Registry& registry() {
  static Registry r;
  return r;
}

}  // namespace

SolverInfo find_solver(const std::string& id) {
  auto& r = registry();
  std::lock_guard lock(r.mutex);
  for (const auto& info : r.solvers)
    if (info.id == id) return info;
  throw SolverError("unknown solver '" + id + "'");
}

std::vector<std::string> solver_ids() {
  auto& r = registry();
  std::lock_guard lock(r.mutex);
  std::vector<std::string> ids;
  for (const auto& info : r.solvers) ids.push_back(info.id);
  return ids;
}

void register_solver(SolverInfo info) {
  if (info.id.empty() || !info.fn) throw SolverError("solver needs an id and a function");
  auto& r = registry();
  std::lock_guard lock(r.mutex);
  for (auto& existing : r.solvers)
    if (existing.id == info.id) {
      existing = std::move(info);
      return;
    }
  r.solvers.push_back(std::move(info));
}

SampleSet solve(const std::string& id, const BQM& model, std::size_t s, double t,
                const SolverConfig& config) {
  return find_solver(id).fn(model, s, t, config);
}

}  // namespace qubench
