#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <memory>
#include <ostream>
#include <sstream>

#include "qubench/embedding.hpp"
#include "qubench/generators.hpp"
#include "qubench/graph.hpp"
#include "qubench/harness.hpp"
#include "qubench/metrics.hpp"
#include "qubench/model.hpp"
#include "qubench/qpu.hpp"
#include "qubench/screening.hpp"
#include "qubench/solvers.hpp"

namespace qubench::cli {

using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw UsageError(std::string(what) + " is required");
  if (!std::filesystem::exists(path)) throw UsageError(std::string(what) + " not found: " + path);
}

Graph load_hardware(const std::string& hw_path, int pegasus_m) {
  if (!hw_path.empty()) {
    require_file(hw_path, "--hw");
    return load_graph(hw_path);
  }
  return pegasus(pegasus_m);
}

void emit_text(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
}

// ---- topo ----------------------------------------------------------------

struct TopoArgs {
  std::string kind = "pegasus";
  int size = 16;
  std::vector<int> dims;
  int degree = 3;
  std::uint64_t seed = kDefaultMasterSeed;
  double node_yield = 1.0, edge_yield = 1.0;
  std::string out;
};

void add_topo(CLI::App& app, TopoArgs& a) {
  auto* c = app.add_subcommand("topo", "Build a hardware or logical graph");
  c->add_option("--kind", a.kind, "pegasus | lattice3d | clique | dreg")
      ->check(CLI::IsMember({"pegasus", "lattice3d", "clique", "dreg"}));
  c->add_option("--size", a.size, "Pegasus m, clique k, or d-regular n");
  c->add_option("--dims", a.dims, "Lattice dimensions X Y Z")->expected(3);
  c->add_option("--degree", a.degree, "Degree for dreg");
  c->add_option("--seed", a.seed, "Seed for dreg and random yield");
  c->add_option("--node-yield", a.node_yield, "Fraction of working qubits")->check(CLI::Range(0.0, 1.0));
  c->add_option("--edge-yield", a.edge_yield, "Fraction of working couplers")->check(CLI::Range(0.0, 1.0));
  c->add_option("--out,-o", a.out, "Output file (default stdout)");
}

int run_topo(const TopoArgs& a, bool as_json, std::ostream& out) {
  Graph g;
  if (a.kind == "pegasus") g = pegasus(a.size);
  else if (a.kind == "clique") g = clique(a.size);
  else if (a.kind == "dreg") g = dreg(a.size, a.degree, a.seed);
  else {
    if (a.dims.size() != 3) throw UsageError("--dims X Y Z is required for lattice3d");
    g = lattice3d(a.dims[0], a.dims[1], a.dims[2]);
  }
  if (a.node_yield < 1.0 || a.edge_yield < 1.0) g = apply_random_yield(g, a.node_yield, a.edge_yield, a.seed);
  std::ostringstream text;
  write_graph(text, g);
  if (a.out.empty()) {
    out << text.str();
    return kOk;
  }
  emit_text(text.str(), a.out, out);
  json info{{"topology", g.topology().describe()},
            {"nodes", g.num_nodes()},
            {"edges", g.num_edges()},
            {"max_degree", g.max_degree()},
            {"out", a.out}};
  if (as_json) out << info.dump() << '\n';
  else out << info["topology"].get<std::string>() << ": " << g.num_nodes() << " nodes, " << g.num_edges()
           << " edges, max degree " << g.max_degree() << " -> " << a.out << '\n';
  return kOk;
}

// ---- gen -----------------------------------------------------------------

struct GenArgs {
  std::string cls;
  int size = 0;
  std::uint64_t seed = kDefaultMasterSeed;
  std::string hw;
  std::string import_path;
  std::string out;
};

void add_gen(CLI::App& app, GenArgs& a) {
  auto* c = app.add_subcommand("gen", "Generate an instance as BQM JSON");
  c->add_option("--class", a.cls, "Input class, e.g. NAT1, SK, LAT3D")->required();
  c->add_option("--size", a.size, "Class size parameter (Pegasus m for native classes)");
  c->add_option("--seed", a.seed, "Instance seed");
  c->add_option("--hw", a.hw, "Hardware graph file for native classes");
  c->add_option("--import", a.import_path, "Instance file for import-only classes");
  c->add_option("--out,-o", a.out, "Output file (default stdout)");
}

int run_gen(const GenArgs& a, std::ostream& out) {
  ClassTag tag;
  try {
    tag = parse_class_tag(a.cls);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  std::optional<Graph> hw;
  if (!a.hw.empty()) hw = load_hardware(a.hw, 0);
  if (!is_native(tag) && a.size < 1 && a.import_path.empty()) throw UsageError("--size is required for " + a.cls);
  const BQM model = generate({tag, a.size, a.seed, a.import_path}, hw ? &*hw : nullptr);
  emit_text(dump_bqm(model) + "\n", a.out, out);
  return kOk;
}

// ---- embed ---------------------------------------------------------------

struct EmbedArgs {
  std::string method = "heuristic";
  std::string input;
  std::string hw;
  int pegasus_m = 16;
  std::vector<int> dims;
  int clique_k = 0;
  std::uint64_t seed = kDefaultMasterSeed;
  int tries = 10;
  std::string out;
};

void add_embed(CLI::App& app, EmbedArgs& a) {
  auto* c = app.add_subcommand("embed", "Minor-embed a model or graph into hardware");
  c->add_option("--method", a.method, "clique | lattice | heuristic")
      ->check(CLI::IsMember({"clique", "lattice", "heuristic"}));
  c->add_option("input", a.input, "Logical model (BQM JSON)");
  c->add_option("--hw", a.hw, "Hardware graph file (default: full-yield Pegasus)");
  c->add_option("--pegasus", a.pegasus_m, "Pegasus size when --hw is absent");
  c->add_option("--dims", a.dims, "Lattice dimensions X Y Z for --method lattice")->expected(3);
  c->add_option("--k", a.clique_k, "Clique size for --method clique without an input");
  c->add_option("--seed", a.seed, "Embedding seed");
  c->add_option("--tries", a.tries, "Attempts for the heuristic embedder");
  c->add_option("--out,-o", a.out, "Output file (default stdout)");
}

int run_embed(const EmbedArgs& a, bool as_json, std::ostream& out, std::ostream& err) {
  const Graph hw = load_hardware(a.hw, a.pegasus_m);
  std::optional<BQM> model;
  if (!a.input.empty()) {
    require_file(a.input, "input");
    model = load_bqm(a.input);
  }
  Embedding e;
  if (a.method == "lattice") {
    if (a.dims.size() != 3) throw UsageError("--dims X Y Z is required for --method lattice");
    e = embed_lattice3d(a.dims[0], a.dims[1], a.dims[2], hw);
  } else if (a.method == "clique") {
    const int k = model ? static_cast<int>(model->num_variables()) : a.clique_k;
    if (k < 1) throw UsageError("an input model or --k is required for --method clique");
    e = embed_clique(k, hw, a.seed);
  } else {
    if (!model) throw UsageError("an input model is required for --method heuristic");
    e = embed_heuristic(graph_of(*model), hw, a.seed, a.tries);
  }
  if (model) e.chain_strength = default_chain_strength(*model);
  emit_text(to_json(e).dump() + "\n", a.out, out);
  json stats{{"chains", e.chains.size()},
             {"qubits", e.num_qubits()},
             {"max_chain_length", e.max_chain_length()},
             {"mean_chain_length", e.mean_chain_length()},
             {"chain_strength", e.chain_strength}};
  std::ostream& info = a.out.empty() ? err : out;
  if (as_json) info << stats.dump() << '\n';
  else info << "embedded " << e.chains.size() << " variables on " << e.num_qubits() << " qubits, max chain "
            << e.max_chain_length() << ", mean chain " << e.mean_chain_length() << '\n';
  return kOk;
}

// ---- solve ---------------------------------------------------------------

struct SolveArgs {
  std::string solver = "sa";
  std::string input;
  int s = 1;
  double t = 1.0;
  std::uint64_t seed = kDefaultMasterSeed;
  std::string mode = "wall";
  int sweeps = 0;
  std::string embedding;
  std::string hw;
  bool mock = false;
  std::string endpoint;
  std::string out;
};

void add_solve(CLI::App& app, SolveArgs& a) {
  auto* c = app.add_subcommand("solve", "Sample a model with one solver under an (s, t) budget");
  c->add_option("input", a.input, "Model file (BQM JSON)")->required();
  c->add_option("--solver", a.solver, "random | sgd | sa | pt | sa_native | qpu | qpu-mock");
  c->add_option("--s", a.s, "Number of samples")->check(CLI::PositiveNumber);
  c->add_option("--t", a.t, "Time limit in seconds")->check(CLI::PositiveNumber);
  c->add_option("--seed", a.seed, "Run seed");
  c->add_option("--mode", a.mode, "wall | model")->check(CLI::IsMember({"wall", "model", "model-time"}));
  c->add_option("--sweeps", a.sweeps, "Sweeps per sample (default: autotuned)");
  c->add_option("--embedding", a.embedding, "Embedding JSON; physical solvers then read the embedded model");
  c->add_option("--hw", a.hw, "Hardware graph for --embedding (default: full-yield Pegasus 16)");
  c->add_flag("--mock", a.mock, "Use the local mock sampler for qpu");
  c->add_option("--endpoint", a.endpoint, std::string("QPU endpoint URL (default: $") + kQpuEndpointEnv + ")");
  c->add_option("--out,-o", a.out, "Output file (default stdout)");
}

SampleSet keep_lowest(SampleSet set, std::size_t s) {
  std::stable_sort(set.samples.begin(), set.samples.end(),
                   [](const Sample& x, const Sample& y) { return x.energy < y.energy; });
  if (set.samples.size() > s) set.samples.resize(s);
  set.requested = s;
  if (set.samples.size() < s) set.status = SampleStatus::Partial;
  return set;
}

// Physical samples mapped back to the logical model by chain vote.
SampleSet to_logical(const SampleSet& physical, const BQM& logical, const EmbeddedModel& em,
                     const Embedding& e, std::uint64_t seed) {
  Rng rng(derive_seed(seed, {"unembed"}));
  SampleSet out = physical;
  out.vartype = logical.vartype();
  out.samples.clear();
  for (const auto& sample : physical.samples) {
    const Assignment spins = convert(Assignment{physical.vartype, sample.values}, Vartype::Spin);
    const Unembedded u = unembed(spins.values, em, e, rng);
    Sample x;
    x.values = convert(u.logical, logical.vartype()).values;
    x.energy = energy(logical, std::span<const std::int8_t>(x.values));
    out.samples.push_back(std::move(x));
  }
  return out;
}

int run_solve(const SolveArgs& a, std::ostream& out) {
  require_file(a.input, "input");
  const BQM model = load_bqm(a.input);
  const TimingMode mode = parse_timing_mode(a.mode);
  const auto s = static_cast<std::size_t>(a.s);
  std::shared_ptr<const Graph> hw;
  std::optional<Embedding> e;
  std::optional<EmbeddedModel> em;
  if (!a.embedding.empty()) {
    require_file(a.embedding, "--embedding");
    hw = std::make_shared<const Graph>(load_hardware(a.hw, 16));
    e = load_embedding(a.embedding);
    em = apply_embedding(model, *e, *hw, 1.0);
  }
  const std::string solver = a.solver == "qpu" && a.mock ? "qpu-mock" : a.solver;
  if (!is_qpu_solver(solver)) {
    const auto ids = solver_ids();
    if (std::find(ids.begin(), ids.end(), solver) == ids.end()) throw UsageError("unknown solver '" + solver + "'");
  }

  SampleSet set;
  bool physical = false;
  if (is_qpu_solver(solver)) {
    physical = em.has_value();
    const bool mock = solver == "qpu-mock" || solver == "qpu_mock";
    QpuJob job;
    job.base = physical ? em->physical : convert(model, Vartype::Spin);
    if (physical) {
      const Graph& g = *hw;
      const Embedding& emb = *e;
      job.rebuild = [&](double m) { return apply_embedding(model, emb, g, m).physical; };
    }
    auto transport = make_transport(mock, a.endpoint);
    set = sample_remote(job, plan_schedule(s, a.t), *transport, a.seed);
  } else {
    const SolverInfo info = find_solver(solver);
    physical = em && info.space == SolverSpace::Physical;
    const BQM& input = physical ? em->physical : model;
    SolverConfig config;
    config.seed = a.seed;
    config.timing = mode;
    if (info.uses_sweeps)
      config.num_sweeps = a.sweeps > 0 ? a.sweeps
                                       : sweeps_for(calibrate(info, input, mode, config.seconds_per_op), {a.s, a.t});
    set = info.fn(input, s, a.t, config);
  }
  if (physical) set = to_logical(set, model, *em, *e, a.seed);
  else if (set.vartype != model.vartype()) {
    // QPU samples come back as spins.
    for (auto& x : set.samples) {
      x.values = convert(Assignment{set.vartype, x.values}, model.vartype()).values;
      x.energy = energy(model, std::span<const std::int8_t>(x.values));
    }
    set.vartype = model.vartype();
  }
  set = keep_lowest(std::move(set), s);
  json doc = to_json(set);
  if (set.mock) doc["label"] = "MOCK";
  emit_text(doc.dump(2) + "\n", a.out, out);
  return kOk;
}

// ---- suite ---------------------------------------------------------------

struct SuiteArgs {
  std::string config;
  int jobs = 0;
  bool fresh = false;
  std::string output;
  std::string mode;
  std::uint64_t seed = 0;
  bool quiet = false;
};

void add_suite(CLI::App& app, SuiteArgs& a) {
  auto* c = app.add_subcommand("suite", "Run a benchmark suite from a TOML config");
  c->add_option("--config,-c", a.config, "Suite config file")->required();
  c->add_option("--jobs,-j", a.jobs, "Concurrent runs (model-time mode only)");
  c->add_flag("--fresh", a.fresh, "Ignore an existing journal");
  c->add_option("--output", a.output, "Output directory (overrides the config)");
  c->add_option("--mode", a.mode, "wall | model (overrides the config)")
      ->check(CLI::IsMember({"wall", "model", "model-time"}));
  c->add_option("--seed", a.seed, "Master seed (overrides the config)");
  c->add_flag("--quiet,-q", a.quiet, "No per-run progress lines");
}

int run_suite_cmd(const SuiteArgs& a, bool as_json, std::ostream& out, std::ostream& err) {
  require_file(a.config, "--config");
  SuiteConfig config = load_suite_config(a.config);
  if (a.jobs > 0) config.jobs = a.jobs;
  if (!a.output.empty()) config.output = a.output;
  if (!a.mode.empty()) config.harness.mode = parse_timing_mode(a.mode);
  if (a.seed) config.master_seed = a.seed;
  const SuiteResult r = run_suite(config, !a.fresh, a.quiet ? nullptr : &err);
  json info{{"records", r.records.size()},
            {"executed", r.executed},
            {"resumed", r.resumed},
            {"crashed", r.crashed},
            {"results", r.results_path.string()},
            {"manifest", r.manifest_path.string()}};
  if (as_json) out << info.dump() << '\n';
  else out << r.records.size() << " records (" << r.executed << " run, " << r.resumed << " resumed, "
           << r.crashed << " crashed) -> " << r.results_path.string() << '\n';
  return kOk;
}

// ---- analyze -------------------------------------------------------------

struct AnalyzeArgs {
  std::string results = "results";
  std::string out;
  int milestone = 0;
  // Convergence study.
  std::string convergence;
  std::string hw;
  int pegasus_m = 16;
  std::vector<std::string> solvers{"random", "sgd", "sa"};
  double t0 = 0.01, ratio = 2.0;
  int count = 8, trials = 15;
  std::string mode = "wall";
  std::uint64_t seed = kDefaultMasterSeed;
};

void add_analyze(CLI::App& app, AnalyzeArgs& a) {
  auto* c = app.add_subcommand("analyze", "Compute ECD tables, win/fail tables and summaries");
  c->add_option("--results,-r", a.results, "Suite output directory or results file");
  c->add_option("--out,-o", a.out, "Output directory (default: the results directory)");
  c->add_option("--milestone", a.milestone, "1 or 2 (default both)")->check(CLI::IsMember({1, 2}));
  c->add_option("--convergence", a.convergence, "Run a convergence study on CLASS:size instead");
  c->add_option("--hw", a.hw, "Hardware graph for the convergence instance");
  c->add_option("--pegasus", a.pegasus_m, "Pegasus size when --hw is absent");
  c->add_option("--solvers", a.solvers, "Solvers for the convergence study");
  c->add_option("--t0", a.t0, "First time limit")->check(CLI::PositiveNumber);
  c->add_option("--ratio", a.ratio, "Time limit ratio")->check(CLI::PositiveNumber);
  c->add_option("--count", a.count, "Number of time limits")->check(CLI::PositiveNumber);
  c->add_option("--trials", a.trials, "Trials per time limit")->check(CLI::PositiveNumber);
  c->add_option("--mode", a.mode, "wall | model")->check(CLI::IsMember({"wall", "model", "model-time"}));
  c->add_option("--seed", a.seed, "Master seed");
}

int run_analyze(const AnalyzeArgs& a, bool as_json, std::ostream& out) {
  if (!a.convergence.empty()) {
    const auto colon = a.convergence.find(':');
    if (colon == std::string::npos) throw UsageError("--convergence expects CLASS:size");
    ClassTag tag;
    int size = 0;
    try {
      tag = parse_class_tag(a.convergence.substr(0, colon));
      size = std::stoi(a.convergence.substr(colon + 1));
    } catch (const std::exception& e) {
      throw UsageError(std::string("--convergence: ") + e.what());
    }
    auto hw = std::make_shared<const Graph>(load_hardware(a.hw, a.pegasus_m));
    const PreparedInstance inst = prepare_instance(tag, size, 0, a.seed, hw);
    ConvergenceOptions options;
    options.trials = a.trials;
    options.seed = a.seed;
    options.harness.mode = parse_timing_mode(a.mode);
    const auto rows = convergence_study(inst, a.solvers, geometric_grid(a.t0, a.ratio, a.count), options);
    const std::filesystem::path dir = a.out.empty() ? std::filesystem::path(".") : std::filesystem::path(a.out);
    std::filesystem::create_directories(dir);
    const auto path = dir / ("convergence_" + inst.id + ".csv");
    write_convergence_csv(rows, path);
    if (as_json) out << json{{"rows", rows.size()}, {"file", path.string()}}.dump() << '\n';
    else out << rows.size() << " rows -> " << path.string() << '\n';
    return kOk;
  }
  std::filesystem::path results = a.results;
  if (std::filesystem::is_directory(results)) results /= kResultsFile;
  require_file(results.string(), "--results");
  const std::filesystem::path dir = a.out.empty() ? results.parent_path() : std::filesystem::path(a.out);
  const Dataset data = load_results(results);
  std::optional<int> milestone;
  if (a.milestone) milestone = a.milestone;
  const AnalyzeOutputs o = analyze(data, dir.empty() ? "." : dir, milestone);
  if (as_json) {
    out << o.summary.dump(2) << '\n';
    return kOk;
  }
  for (int m : {1, 2}) {
    const std::string key = "milestone" + std::to_string(m);
    if (!o.summary.contains(key)) continue;
    const auto& s = o.summary[key];
    out << "milestone " << m << ": " << s["cells"].get<std::size_t>() << " cells\n";
    for (const auto& [solver, c] : s["counts"].items())
      out << "  " << solver << ": " << c["win"] << " wins (" << c["shared_win"] << " shared), " << c["fail"]
          << " fails, " << c["compete"] << " compete\n";
  }
  if (o.summary.value("mock", false)) out << "note: dataset contains MOCK QPU results\n";
  out << o.files.size() << " files written to " << (dir.empty() ? "." : dir.string()) << '\n';
  return kOk;
}

// ---- screen --------------------------------------------------------------

struct ScreenArgs {
  std::string cls;
  std::string hw;
  int pegasus_m = 16;
  ScreeningOptions options;
  std::string mode = "wall";
};

void add_screen(CLI::App& app, ScreenArgs& a) {
  auto* c = app.add_subcommand("screen", "Screen an input class for hardness");
  c->add_option("--class", a.cls, "Input class")->required();
  c->add_option("--hw", a.hw, "Hardware graph file (default: full-yield Pegasus)");
  c->add_option("--pegasus", a.pegasus_m, "Pegasus size when --hw is absent");
  c->add_option("--min-size", a.options.min_size, "Smallest size probed");
  c->add_option("--max-size", a.options.max_size, "Largest size probed");
  c->add_option("--size", a.options.size, "Fixed size for classes without a size search");
  c->add_option("--trials", a.options.embed_trials, "Embedding trials per probed size");
  c->add_option("--lmax-low", a.options.lmax_low, "Lower bound on the median max chain length");
  c->add_option("--lmax-high", a.options.lmax_high, "Upper bound on the median max chain length");
  c->add_option("--runs", a.options.runs, "Solver runs per solver");
  c->add_option("--time", a.options.solver_time, "Time per solver run in seconds")->check(CLI::PositiveNumber);
  c->add_option("--agreement", a.options.agreement, "Agreement fraction that rejects the class");
  c->add_option("--mode", a.mode, "wall | model")->check(CLI::IsMember({"wall", "model", "model-time"}));
  c->add_option("--seed", a.options.seed, "Screening seed");
}

int run_screen(ScreenArgs a, bool as_json, std::ostream& out) {
  ClassTag tag;
  try {
    tag = parse_class_tag(a.cls);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  a.options.timing = parse_timing_mode(a.mode);
  const Graph hw = load_hardware(a.hw, a.pegasus_m);
  const ScreeningVerdict v = screen_class(tag, hw, a.options);
  if (as_json) {
    out << to_json(v).dump(2) << '\n';
    return kOk;
  }
  out << v.class_name << ": " << (v.accept ? "ACCEPT" : "REJECT") << "\n  size " << v.size;
  if (v.searched) out << ", median L_max " << v.median_lmax << " over " << v.probes.size() << " probed sizes";
  out << "\n  best energy " << v.agreement.best_energy << ", SGD agreement " << v.agreement.sgd_agreement
      << ", SA agreement " << v.agreement.sa_agreement << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Benchmarking harness for Ising and QUBO samplers", "qubench"};
  app.require_subcommand(1);
  bool as_json = false;
  app.add_flag("--json", as_json, "Machine-readable output");

  TopoArgs topo;
  GenArgs gen;
  EmbedArgs embed;
  SolveArgs solve_args;
  SuiteArgs suite;
  AnalyzeArgs analyze_args;
  ScreenArgs screen;
  add_topo(app, topo);
  add_gen(app, gen);
  add_embed(app, embed);
  add_solve(app, solve_args);
  add_suite(app, suite);
  add_analyze(app, analyze_args);
  add_screen(app, screen);
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "topo") return run_topo(topo, as_json, out);
    if (cmd == "gen") return run_gen(gen, out);
    if (cmd == "embed") return run_embed(embed, as_json, out, err);
    if (cmd == "solve") return run_solve(solve_args, out);
    if (cmd == "suite") return run_suite_cmd(suite, as_json, out, err);
    if (cmd == "analyze") return run_analyze(analyze_args, as_json, out);
    if (cmd == "screen") return run_screen(screen, as_json, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\nRun with --help for usage.\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}

}  // namespace qubench::cli
