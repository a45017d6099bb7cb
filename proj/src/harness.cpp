#include "qubench/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <thread>

namespace qubench {

using nlohmann::json;

std::string format_seconds(double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", t);
  return buf;
}

std::string scenario_key(const Scenario& sc) {
  return std::to_string(sc.s) + "_" + format_seconds(sc.t);
}

std::vector<Scenario> scenario_grid(const ScenarioGridConfig& config) {
  std::vector<Scenario> out;
  for (int s : config.sample_counts) {
    if (s < 1) throw HarnessError("sample counts must be >= 1");
    for (double t : config.time_limits) {
      if (!(t > 0.0)) throw HarnessError("time limits must be positive");
      const Scenario sc{s, t};
      if (config.floor > 0.0) {
        if (t / s < config.floor) continue;
        if (std::find(config.exclude.begin(), config.exclude.end(), sc) != config.exclude.end()) continue;
      }
      out.push_back(sc);
    }
  }
  if (out.empty()) throw HarnessError("scenario grid is empty");
  return out;
}

bool is_qpu_solver(const std::string& id) { return id.rfind("qpu", 0) == 0; }

std::string_view to_string(Dispatch d) { return d == Dispatch::Physical ? "physical" : "dual"; }

Dispatch parse_dispatch(std::string_view text) {
  if (text == "physical") return Dispatch::Physical;
  if (text == "dual") return Dispatch::Dual;
  throw HarnessError("unknown dispatch '" + std::string(text) + "' (expected physical or dual)");
}

PreparedInstance prepare_instance(ClassTag tag, int size, int index, std::uint64_t master_seed,
                                  std::shared_ptr<const Graph> hw,
                                  const std::filesystem::path& import_file) {
  if (!hw) throw HarnessError("hardware graph required");
  PreparedInstance inst;
  inst.tag = tag;
  inst.size = size;
  inst.index = index;
  inst.hw = hw;
  const std::string name(to_string(tag));
  inst.id = name + "_" + std::to_string(size) + "_" + std::to_string(index);
  inst.seed = derive_seed(master_seed, {"instance", name, std::to_string(size), std::to_string(index)});
  inst.logical = generate({tag, size, inst.seed, import_file}, hw.get());
  inst.logical.set_label(inst.id);
  if (is_native(tag)) return inst;

  const Graph logical_graph = graph_of(inst.logical);
  const std::uint64_t embed_seed = derive_seed(inst.seed, {"embed"});
  Embedding e;
  switch (embed_kind(tag)) {
    case EmbedKind::Lattice:
      e = embed_lattice3d(size, size, size, *hw);
      break;
    case EmbedKind::Clique:
      e = embed_clique(static_cast<int>(inst.logical.num_variables()), *hw, embed_seed);
      break;
    default:
      e = embed_heuristic(logical_graph, *hw, embed_seed);
      break;
  }
  e.chain_strength = default_chain_strength(inst.logical);
  inst.embedded = apply_embedding(inst.logical, e, *hw, 1.0);
  inst.embedding = std::move(e);
  return inst;
}

int sweeps_for(const Calibration& c, const Scenario& sc) {
  if (!(c.sweep_seconds > 0.0)) return 1;
  const double per_sample = sc.t / sc.s - c.init_seconds / sc.s - c.sample_init_seconds;
  const double n = std::floor(per_sample / c.sweep_seconds);
  if (!(n >= 1.0)) return 1;
  return n > 1e9 ? 1000000000 : static_cast<int>(n);
}

Calibration calibrate(const SolverInfo& solver, const BQM& model, TimingMode mode,
                      double seconds_per_op) {
  Calibration c;
  const double factor = std::max(1, solver.sweep_cost_factor);
  if (mode == TimingMode::Model) {
    const SpinProblem p = SpinProblem::from(model);
    c.init_seconds = static_cast<double>(init_ops(p)) * seconds_per_op;
    c.sample_init_seconds = factor * static_cast<double>(sample_init_ops(p)) * seconds_per_op;
    c.sweep_seconds = factor * static_cast<double>(sweep_ops(p)) * seconds_per_op;
    return c;
  }
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  const SpinProblem p = SpinProblem::from(model);
  const auto t1 = clock::now();
  Rng rng(0);
  MetropolisChain chain(p, rng);
  const auto t2 = clock::now();
  const auto schedule = default_beta_schedule(p, 16);
  const double beta = schedule[schedule.size() / 2];
  int sweeps = 0;
  auto t3 = t2;
  // Stop after about 0.2 ms or 1000 sweeps, whichever comes first.
  while (sweeps < 1000) {
    chain.sweep(beta, rng);
    ++sweeps;
    t3 = clock::now();
    if (sweeps >= 3 && std::chrono::duration<double>(t3 - t2).count() > 2e-4) break;
  }
  c.init_seconds = std::chrono::duration<double>(t1 - t0).count();
  c.sample_init_seconds = factor * std::chrono::duration<double>(t2 - t1).count();
  c.sweep_seconds = factor * std::chrono::duration<double>(t3 - t2).count() / sweeps;
  return c;
}

Calibration AutotuneCache::get(const SolverInfo& solver, const std::string& instance_id, bool physical,
                               const BQM& model, TimingMode mode, double seconds_per_op) {
  const std::string key = solver.id + "|" + instance_id + "|" + (physical ? "p" : "l");
  {
    std::lock_guard lock(mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  const Calibration c = calibrate(solver, model, mode, seconds_per_op);
  std::lock_guard lock(mutex_);
  auto [it, inserted] = cache_.emplace(key, c);
  if (inserted) ++calibrations_;
  return it->second;
}

std::size_t AutotuneCache::calibrations() const {
  std::lock_guard lock(mutex_);
  return calibrations_;
}

json to_json(const TestRecord& r) {
  return json{{"solver", r.solver_id},
              {"instance", r.instance_id},
              {"class", r.class_name},
              {"s", r.scenario.s},
              {"t", r.scenario.t},
              {"energies", r.energies},
              {"status", r.complete ? "complete" : "fail"},
              {"wall_time", r.wall_time},
              {"work", r.work},
              {"space", r.space},
              {"input", r.input},
              {"seed", r.seed},
              {"num_sweeps", r.num_sweeps},
              {"num_drawn", r.num_drawn},
              {"chain_breaks", r.chain_breaks},
              {"mock", r.mock},
              {"error", r.error}};
}

TestRecord record_from_json(const json& doc) {
  TestRecord r;
  try {
    r.solver_id = doc.at("solver").get<std::string>();
    r.instance_id = doc.at("instance").get<std::string>();
    r.class_name = doc.at("class").get<std::string>();
    r.scenario.s = doc.at("s").get<int>();
    r.scenario.t = doc.at("t").get<double>();
    r.energies = doc.at("energies").get<std::vector<double>>();
    const auto status = doc.at("status").get<std::string>();
    if (status != "complete" && status != "fail") throw HarnessError("unknown status '" + status + "'");
    r.complete = status == "complete";
    r.wall_time = doc.value("wall_time", 0.0);
    r.work = doc.value("work", std::uint64_t{0});
    r.space = doc.value("space", std::string("logical"));
    r.input = doc.value("input", r.space);
    r.seed = doc.value("seed", std::uint64_t{0});
    r.num_sweeps = doc.value("num_sweeps", 0);
    r.num_drawn = doc.value("num_drawn", std::uint64_t{0});
    r.chain_breaks = doc.value("chain_breaks", std::size_t{0});
    r.mock = doc.value("mock", false);
    r.error = doc.value("error", std::string());
  } catch (const json::exception& e) {
    throw HarnessError(std::string("malformed test record: ") + e.what());
  }
  return r;
}

namespace {

struct Scored {
  double energy;
  std::size_t breaks;
};

// Physical spins to a logical energy, or the physical energy itself.
Scored score(const std::vector<std::int8_t>& physical_values, const PreparedInstance& inst,
             bool to_logical, Rng& rng) {
  if (!to_logical) return {energy(inst.physical(), std::span<const std::int8_t>(physical_values)), 0};
  const Unembedded u = unembed(physical_values, *inst.embedded, *inst.embedding, rng);
  const Assignment a = convert(u.logical, inst.logical.vartype());
  return {energy(inst.logical, a), u.report.num_broken};
}

void keep_lowest(std::vector<Scored>& scored, TestRecord& rec) {
  std::stable_sort(scored.begin(), scored.end(),
                   [](const Scored& a, const Scored& b) { return a.energy < b.energy; });
  const std::size_t s = static_cast<std::size_t>(rec.scenario.s);
  if (scored.size() > s) scored.resize(s);
  for (const auto& x : scored) {
    rec.energies.push_back(x.energy);
    rec.chain_breaks += x.breaks;
  }
}

TestRecord run_qpu(const std::string& solver_id, const PreparedInstance& inst, const Scenario& sc,
                   const HarnessOptions& options, TestRecord rec) {
  const bool mock = solver_id == "qpu-mock" || solver_id == "qpu_mock";
  rec.input = "physical";
  const bool to_logical = inst.is_embedded() && options.dispatch == Dispatch::Dual;
  rec.space = inst.is_embedded() && !to_logical ? "physical" : "logical";
  AnnealSchedule sched;
  try {
    sched = plan_schedule(static_cast<std::size_t>(sc.s), sc.t, options.access);
  } catch (const InfeasibleSchedule&) {
    // No schedule returns s reads within t: an honest fail, not a crash.
    rec.complete = false;
    rec.mock = mock;
    return rec;
  }
  QpuJob job;
  job.base = inst.physical().vartype() == Vartype::Spin ? inst.physical()
                                                          : convert(inst.physical(), Vartype::Spin);
  if (inst.is_embedded()) {
    const BQM logical = inst.logical;
    const Embedding e = *inst.embedding;
    const auto hw = inst.hw;
    job.rebuild = [logical, e, hw](double m) { return apply_embedding(logical, e, *hw, m).physical; };
  }
  auto transport = make_transport(mock, options.qpu_endpoint, options.mock);
  const SampleSet set = sample_remote(job, sched, *transport, rec.seed, options.access);
  Rng rng(derive_seed(rec.seed, {"unembed"}));
  std::vector<Scored> scored;
  for (const auto& sample : set.samples) {
    if (to_logical) {
      scored.push_back(score(sample.values, inst, true, rng));
    } else {
      const Assignment a = convert(Assignment{Vartype::Spin, sample.values}, inst.physical().vartype());
      scored.push_back({energy(inst.physical(), a), 0});
    }
  }
  keep_lowest(scored, rec);
  rec.complete = rec.energies.size() == static_cast<std::size_t>(sc.s);
  rec.wall_time = set.wall_time;
  rec.work = set.work;
  rec.num_drawn = set.num_drawn;
  rec.mock = set.mock;
  return rec;
}

}  // namespace

TestRecord run_test(const std::string& solver_id, const PreparedInstance& inst, const Scenario& sc,
                    const HarnessOptions& options, AutotuneCache& cache, std::uint64_t seed) {
  if (sc.s < 1 || !(sc.t > 0.0)) throw HarnessError("invalid scenario");
  TestRecord rec;
  rec.solver_id = solver_id;
  rec.instance_id = inst.id;
  rec.class_name = std::string(to_string(inst.tag));
  rec.scenario = sc;
  rec.seed = seed;
  if (is_qpu_solver(solver_id)) return run_qpu(solver_id, inst, sc, options, std::move(rec));

  const SolverInfo info = find_solver(solver_id);
  bool physical_input = false;
  if (inst.is_embedded()) {
    physical_input = options.dispatch == Dispatch::Physical || info.space == SolverSpace::Physical;
  }
  const bool to_logical = physical_input && options.dispatch == Dispatch::Dual;
  rec.input = physical_input ? "physical" : "logical";
  rec.space = physical_input && !to_logical ? "physical" : "logical";
  const BQM& model = physical_input ? inst.physical() : inst.logical;

  SolverConfig config;
  config.seed = seed;
  config.timing = options.mode;
  config.seconds_per_op = options.seconds_per_op;
  if (info.uses_sweeps) {
    const Calibration c =
        cache.get(info, inst.id, physical_input, model, options.mode, options.seconds_per_op);
    config.num_sweeps = sweeps_for(c, sc);
    rec.num_sweeps = config.num_sweeps;
  }
  const SampleSet set = info.fn(model, static_cast<std::size_t>(sc.s), sc.t, config);
  Rng rng(derive_seed(seed, {"unembed"}));
  std::vector<Scored> scored;
  for (const auto& sample : set.samples) {
    if (to_logical) {
      const Assignment spins = convert(Assignment{model.vartype(), sample.values}, Vartype::Spin);
      scored.push_back(score(spins.values, inst, true, rng));
    } else {
      scored.push_back({sample.energy, 0});
    }
  }
  keep_lowest(scored, rec);
  rec.complete = set.status == SampleStatus::Complete && rec.energies.size() == static_cast<std::size_t>(sc.s);
  rec.wall_time = set.wall_time;
  rec.work = set.work;
  rec.num_drawn = set.num_drawn;
  rec.mock = set.mock;
  return rec;
}

std::vector<Scenario> SuiteConfig::resolved_scenarios() const {
  if (scenarios) {
    if (scenarios->empty()) throw HarnessError("scenario list is empty");
    return *scenarios;
  }
  return scenario_grid(grid);
}

std::shared_ptr<const Graph> build_hardware(const SuiteConfig& config) {
  Graph g;
  const std::string& hw = config.hardware;
  if (hw.rfind("pegasus:", 0) == 0) {
    int m = 0;
    try {
      m = std::stoi(hw.substr(8));
    } catch (const std::exception&) {
      throw HarnessError("bad hardware spec '" + hw + "'");
    }
    g = pegasus(m);
  } else {
    g = load_graph(hw);
  }
  if (config.node_yield < 1.0 || config.edge_yield < 1.0)
    g = apply_random_yield(g, config.node_yield, config.edge_yield,
                           derive_seed(config.master_seed, {"yield"}));
  return std::make_shared<const Graph>(std::move(g));
}

std::vector<TestRecord> load_results(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw HarnessError("cannot open " + path.string());
  std::vector<TestRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(record_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw HarnessError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void save_results(const std::vector<TestRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw HarnessError("cannot write " + path.string());
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

namespace {

struct RunKey {
  std::string solver, instance;
  Scenario sc;
  auto operator<=>(const RunKey&) const = default;
};

struct PlannedRun {
  std::size_t instance;  // index into prepared instances
  std::string solver;
  Scenario sc;
};

std::vector<std::filesystem::path> import_files(const ClassEntry& c) {
  if (c.import_dir.empty())
    throw HarnessError(std::string(to_string(c.tag)) + " needs an import directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(c.import_dir))
    if (entry.is_regular_file()) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw HarnessError("no instance files in " + c.import_dir.string());
  return files;
}

std::string fingerprint(const SuiteConfig& config) {
  json doc = to_json(config);
  doc.erase("jobs");
  return std::to_string(fnv1a(doc.dump()));
}

}  // namespace

SuiteResult run_suite(const SuiteConfig& config, bool resume, std::ostream* log) {
  if (config.classes.empty()) throw HarnessError("suite has no classes");
  if (config.solvers.empty()) throw HarnessError("suite has no solvers");
  if (config.instances < 1) throw HarnessError("instances must be >= 1");
  for (const auto& id : config.solvers)
    if (!is_qpu_solver(id)) find_solver(id);
  const auto scenarios = config.resolved_scenarios();
  const auto hw = build_hardware(config);
  std::filesystem::create_directories(config.output);

  SuiteResult result;
  result.results_path = config.output / kResultsFile;
  result.manifest_path = config.output / kManifestFile;
  const auto journal_path = config.output / kJournalFile;
  const auto fp = fingerprint(config);

  // Journal: records of completed runs from earlier invocations.
  std::map<RunKey, TestRecord> done;
  const auto stamp_path = config.output / "journal.fingerprint";
  if (resume && std::filesystem::exists(journal_path)) {
    std::ifstream stamp(stamp_path);
    std::string old;
    std::getline(stamp, old);
    if (old != fp)
      throw HarnessError("journal in " + config.output.string() +
                         " belongs to a different configuration; rerun without resume");
    for (auto& r : load_results(journal_path))
      done[{r.solver_id, r.instance_id, r.scenario}] = std::move(r);
  } else {
    std::ofstream(journal_path, std::ios::trunc);
  }
  std::ofstream(stamp_path, std::ios::trunc) << fp << '\n';

  // Instances, with preparation failures isolated per instance.
  std::vector<PreparedInstance> instances;
  std::vector<std::string> prep_errors;
  json notes = json::array();
  for (const auto& c : config.classes) {
    std::vector<std::filesystem::path> files;
    const bool imported = c.tag == ClassTag::SOCs || c.tag == ClassTag::SOCu || c.tag == ClassTag::DAIG ||
                          c.tag == ClassTag::IMPORT;
    if (imported) files = import_files(c);
    const int count = imported ? std::min<int>(config.instances, static_cast<int>(files.size())) : config.instances;
    if (count < config.instances)
      notes.push_back(std::string(to_string(c.tag)) + ": only " + std::to_string(count) + " instance files");
    for (int k = 0; k < count; ++k) {
      PreparedInstance inst;
      std::string error;
      try {
        inst = prepare_instance(c.tag, c.size, k, config.master_seed, hw, imported ? files[k] : std::filesystem::path{});
      } catch (const std::exception& e) {
        inst.tag = c.tag;
        inst.size = c.size;
        inst.index = k;
        inst.id = std::string(to_string(c.tag)) + "_" + std::to_string(c.size) + "_" + std::to_string(k);
        error = e.what();
        notes.push_back(inst.id + ": " + error);
      }
      instances.push_back(std::move(inst));
      prep_errors.push_back(std::move(error));
    }
  }

  std::vector<PlannedRun> plan;
  for (std::size_t i = 0; i < instances.size(); ++i)
    for (const auto& solver : config.solvers)
      for (const auto& sc : scenarios) plan.push_back({i, solver, sc});

  std::vector<TestRecord> records(plan.size());
  std::vector<std::size_t> todo;
  for (std::size_t k = 0; k < plan.size(); ++k) {
    auto it = done.find({plan[k].solver, instances[plan[k].instance].id, plan[k].sc});
    if (it != done.end()) {
      records[k] = it->second;
      ++result.resumed;
    } else {
      todo.push_back(k);
    }
  }

  int jobs = std::max(1, config.jobs);
  if (config.harness.mode == TimingMode::Wall && jobs > 1) {
    if (log) *log << "warning: wall-time mode runs timed tests one at a time; ignoring --jobs\n";
    jobs = 1;
  }

  AutotuneCache cache;
  std::mutex journal_mutex;
  std::ofstream journal(journal_path, std::ios::app);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> crashed{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t j = next.fetch_add(1);
      if (j >= todo.size()) return;
      const std::size_t k = todo[j];
      const PlannedRun& run = plan[k];
      const PreparedInstance& inst = instances[run.instance];
      const std::uint64_t seed = derive_seed(config.master_seed,
                                             {"run", inst.id, run.solver, std::to_string(run.sc.s),
                                              format_seconds(run.sc.t)});
      TestRecord rec;
      try {
        if (!prep_errors[run.instance].empty()) throw HarnessError(prep_errors[run.instance]);
        rec = run_test(run.solver, inst, run.sc, config.harness, cache, seed);
      } catch (const std::exception& e) {
        rec = TestRecord{};
        rec.solver_id = run.solver;
        rec.instance_id = inst.id;
        rec.class_name = std::string(to_string(inst.tag));
        rec.scenario = run.sc;
        rec.seed = seed;
        rec.error = e.what();
        ++crashed;
      }
      std::lock_guard lock(journal_mutex);
      journal << to_json(rec).dump() << '\n';
      journal.flush();
      if (log)
        *log << rec.solver_id << ' ' << rec.instance_id << " s=" << rec.scenario.s
             << " t=" << format_seconds(rec.scenario.t) << ' '
             << (rec.error.empty() ? (rec.complete ? "complete" : "fail") : "error: " + rec.error) << '\n';
      records[k] = std::move(rec);
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  journal.close();
  result.executed = todo.size();
  result.crashed = crashed.load();
  save_results(records, result.results_path);

  json classes = json::array();
  for (const auto& inst : instances) {
    json entry{{"instance", inst.id},
               {"class", std::string(to_string(inst.tag))},
               {"size", inst.size},
               {"variables", inst.logical.num_variables()},
               {"embedded", inst.is_embedded()}};
    if (inst.embedding) {
      entry["qubits"] = inst.embedding->num_qubits();
      entry["max_chain_length"] = inst.embedding->max_chain_length();
      entry["chain_strength"] = inst.embedding->chain_strength;
    }
    classes.push_back(std::move(entry));
  }
  json scen = json::array();
  for (const auto& sc : scenarios) scen.push_back({{"s", sc.s}, {"t", sc.t}});
  bool any_mock = false;
  for (const auto& r : records) any_mock = any_mock || r.mock;
  json manifest{{"config", to_json(config)},
                {"fingerprint", fp},
                {"hardware", hw->topology().describe()},
                {"hardware_nodes", hw->num_nodes()},
                {"hardware_edges", hw->num_edges()},
                {"scenarios", std::move(scen)},
                {"instances", std::move(classes)},
                {"records", records.size()},
                {"crashed", result.crashed},
                {"mock", any_mock},
                {"notes", std::move(notes)}};
  std::ofstream(result.manifest_path, std::ios::trunc) << manifest.dump(2) << '\n';
  result.records = std::move(records);
  return result;
}

}  // namespace qubench
