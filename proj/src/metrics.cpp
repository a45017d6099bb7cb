#include "qubench/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

namespace qubench {

using nlohmann::json;

double median(std::vector<double> v) {
  if (v.empty()) throw MetricsError("median of an empty list");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double median_sample_energy(const TestRecord& r) {
  if (!r.complete) throw MetricsError("median of an incomplete record");
  return median(r.energies);
}

std::map<std::string, double> target_energies(const Dataset& data) {
  std::map<std::string, double> out;
  for (const auto& r : data)
    for (double e : r.energies) {
      auto [it, inserted] = out.emplace(r.instance_id, e);
      if (!inserted) it->second = std::min(it->second, e);
    }
  return out;
}

double target_energy(const Dataset& data, const std::string& instance_id) {
  bool found = false;
  double t = 0.0;
  for (const auto& r : data)
    if (r.instance_id == instance_id)
      for (double e : r.energies) {
        t = found ? std::min(t, e) : e;
        found = true;
      }
  if (!found) throw MetricsError("no energies recorded for instance " + instance_id);
  return t;
}

RelativeError relative_error(double m, double t) {
  RelativeError r;
  r.gap = std::abs(t - m);
  if (t == 0.0) {
    r.defined = false;
    return r;
  }
  r.value = r.gap / std::abs(t);
  return r;
}

std::optional<double> ranking_median(const TestRecord& r) {
  const std::size_t need = r.complete ? static_cast<std::size_t>(r.scenario.s)
                                      : static_cast<std::size_t>((r.scenario.s + 1) / 2);
  if (r.energies.empty() || r.energies.size() < need) return std::nullopt;
  return median(r.energies);
}

bool integer_energies(const Dataset& data) {
  for (const auto& r : data)
    for (double e : r.energies)
      if (e != std::round(e)) return false;
  return true;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Win: return "win";
    case Verdict::Fail: return "fail";
    case Verdict::Compete: return "compete";
  }
  return "compete";
}

namespace {

Dataset slice(const Dataset& data, const std::string& class_name, const Scenario& sc) {
  Dataset out;
  for (const auto& r : data)
    if (r.class_name == class_name && r.scenario == sc) out.push_back(r);
  return out;
}

std::string fmt(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace

ScenarioRanking rank_scenario(const Dataset& data, const std::string& class_name, const Scenario& sc,
                              const RankOptions& options) {
  const Dataset rows = slice(data, class_name, sc);
  if (rows.empty())
    throw MetricsError("no records for " + class_name + " at s=" + std::to_string(sc.s) +
                       " t=" + format_seconds(sc.t));
  const auto targets = target_energies(data);
  std::vector<std::string> solvers, instances;
  for (const auto& r : rows) {
    solvers.push_back(r.solver_id);
    instances.push_back(r.instance_id);
  }
  for (auto* v : {&solvers, &instances}) {
    std::sort(v->begin(), v->end());
    v->erase(std::unique(v->begin(), v->end()), v->end());
  }
  const std::size_t S = solvers.size(), N = instances.size();
  auto sidx = [&](const std::string& id) {
    return static_cast<std::size_t>(std::lower_bound(solvers.begin(), solvers.end(), id) - solvers.begin());
  };
  auto iidx = [&](const std::string& id) {
    return static_cast<std::size_t>(std::lower_bound(instances.begin(), instances.end(), id) - instances.begin());
  };

  ScenarioRanking out;
  // Ranked instances exclude those whose target energy is zero.
  std::vector<bool> ranked(N, true);
  for (std::size_t x = 0; x < N; ++x) {
    auto it = targets.find(instances[x]);
    if (it == targets.end() || it->second == 0.0) {
      ranked[x] = false;
      out.warnings.push_back(instances[x] + ": target energy is " +
                             (it == targets.end() ? std::string("undefined") : std::string("0")) +
                             "; excluded from ranking");
    }
  }
  std::vector<std::vector<std::optional<double>>> R(S, std::vector<std::optional<double>>(N));
  std::vector<int> failed(S, static_cast<int>(N));
  for (const auto& r : rows) {
    const std::size_t a = sidx(r.solver_id), x = iidx(r.instance_id);
    if (r.complete) --failed[a];
    if (!ranked[x]) continue;
    if (auto m = ranking_median(r)) {
      const RelativeError re = relative_error(*m, targets.at(r.instance_id));
      if (re.defined) R[a][x] = re.value;
    }
  }
  const double eps = options.epsilon ? *options.epsilon : (integer_energies(rows) ? 0.0 : 1e-9);
  auto tol = [&](double p, double q) { return eps * std::max({1.0, std::abs(p), std::abs(q)}); };
  auto beats = [&](std::size_t a, std::size_t b, std::size_t x) {
    if (!R[a][x]) return false;
    if (!R[b][x]) return true;
    return *R[a][x] < *R[b][x] - tol(*R[a][x], *R[b][x]);
  };
  auto ties = [&](std::size_t a, std::size_t b, std::size_t x) {
    return R[a][x] && R[b][x] && std::abs(*R[a][x] - *R[b][x]) <= tol(*R[a][x], *R[b][x]);
  };
  std::size_t n_ranked = 0;
  for (bool b : ranked) n_ranked += b;
  const int half_all = static_cast<int>((N + 1) / 2);
  const int half = static_cast<int>((n_ranked + 1) / 2);

  std::vector<std::vector<int>> beat_count(S, std::vector<int>(S, 0)), tie_count(S, std::vector<int>(S, 0));
  for (std::size_t x = 0; x < N; ++x) {
    if (!ranked[x]) continue;
    for (std::size_t a = 0; a < S; ++a)
      for (std::size_t b = 0; b < S; ++b) {
        if (a == b) continue;
        beat_count[a][b] += beats(a, b, x);
        tie_count[a][b] += ties(a, b, x);
      }
  }

  // Largest valid winner set among non-failing solvers.
  std::vector<std::size_t> candidates;
  for (std::size_t a = 0; a < S; ++a)
    if (failed[a] < half_all) candidates.push_back(a);
  std::vector<bool> winner(S, false);
  if (n_ranked > 0 && !candidates.empty()) {
    if (candidates.size() > 20) throw MetricsError("too many solvers to rank");
    const std::size_t K = candidates.size();
    std::size_t best_size = 0, best_count = 0;
    std::uint32_t best_mask = 0;
    for (std::uint32_t mask = 1; mask < (1u << K); ++mask) {
      std::vector<bool> in(S, false);
      std::size_t size = 0;
      for (std::size_t i = 0; i < K; ++i)
        if (mask >> i & 1u) {
          in[candidates[i]] = true;
          ++size;
        }
      if (size < best_size) continue;
      bool ok = true;
      for (std::size_t a = 0; a < S && ok; ++a) {
        if (!in[a]) continue;
        for (std::size_t b = 0; b < S && ok; ++b) {
          if (a == b) continue;
          ok = in[b] ? tie_count[a][b] >= half : beat_count[a][b] >= half;
        }
      }
      if (!ok) continue;
      if (size > best_size) {
        best_size = size;
        best_count = 1;
        best_mask = mask;
      } else {
        ++best_count;
      }
    }
    if (best_count > 1) {
      out.warnings.push_back(class_name + " s=" + std::to_string(sc.s) + " t=" + format_seconds(sc.t) +
                             ": several winner sets qualify; no win awarded");
    } else if (best_count == 1) {
      for (std::size_t i = 0; i < K; ++i)
        if (best_mask >> i & 1u) winner[candidates[i]] = true;
    }
  }
  std::size_t n_winners = static_cast<std::size_t>(std::count(winner.begin(), winner.end(), true));

  for (std::size_t a = 0; a < S; ++a) {
    RankOutcome o;
    o.solver_id = solvers[a];
    o.class_name = class_name;
    o.scenario = sc;
    o.instances = static_cast<int>(N);
    o.failed = failed[a];
    for (std::size_t x = 0; x < N; ++x) {
      if (!ranked[x] || !R[a][x]) continue;
      bool all_beaten = true, at_best = true, shared = false;
      for (std::size_t b = 0; b < S; ++b) {
        if (b == a) continue;
        all_beaten = all_beaten && beats(a, b, x);
        if (beats(b, a, x)) at_best = false;
        if (ties(a, b, x)) shared = true;
      }
      o.dominated += all_beaten;
      o.tied += at_best && shared;
    }
    if (o.failed >= half_all) o.verdict = Verdict::Fail;
    else if (winner[a]) o.verdict = Verdict::Win;
    else o.verdict = Verdict::Compete;
    o.shared = o.verdict == Verdict::Win && n_winners > 1;
    out.outcomes.push_back(std::move(o));
  }
  return out;
}

std::string ecd_file_name(const std::string& class_name, const Scenario& sc) {
  return "ecd_" + class_name + "_" + scenario_key(sc) + ".csv";
}

EcdTable ecd_table(const Dataset& data, const std::string& class_name, const Scenario& sc) {
  const Dataset rows = slice(data, class_name, sc);
  const auto targets = target_energies(data);
  std::map<std::string, std::vector<double>> per_solver;
  std::set<std::string> seen;
  for (const auto& r : rows) {
    seen.insert(r.solver_id);
    if (!r.complete) continue;
    const RelativeError re = relative_error(median_sample_energy(r), targets.at(r.instance_id));
    if (re.defined) per_solver[r.solver_id].push_back(re.value);
  }
  EcdTable table;
  for (const auto& id : seen) {
    auto it = per_solver.find(id);
    if (it == per_solver.end()) {
      table.absent.push_back(id);
      continue;
    }
    auto v = it->second;
    std::sort(v.begin(), v.end());
    for (std::size_t k = 0; k < v.size(); ++k) table.rows.push_back({id, static_cast<int>(k + 1), v[k]});
  }
  return table;
}

void write_ecd_csv(const EcdTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw MetricsError("cannot write " + path.string());
  out << "solver,rank,R\n";
  for (const auto& row : table.rows) out << row.solver_id << ',' << row.rank << ',' << fmt(row.r) << '\n';
}

json MilestoneReport::summary() const {
  json cells_json = json::array();
  for (const auto& cell : cells) {
    json winners = json::array(), fails = json::array();
    for (const auto& o : cell.outcomes) {
      if (o.verdict == Verdict::Win) winners.push_back(o.solver_id);
      if (o.verdict == Verdict::Fail) fails.push_back(o.solver_id);
    }
    cells_json.push_back({{"class", cell.class_name},
                          {"s", cell.scenario.s},
                          {"t", cell.scenario.t},
                          {"winners", std::move(winners)},
                          {"fails", std::move(fails)}});
  }
  json focal = json::object();
  for (const auto& [solver, c] : counts)
    if (is_qpu_solver(solver)) focal[solver] = c;
  return json{{"milestone", milestone},
              {"cells", cells.size()},
              {"counts", counts},
              {"focal", std::move(focal)},
              {"excluded", excluded},
              {"warnings", warnings},
              {"grid", std::move(cells_json)}};
}

MilestoneReport milestone_report(const Dataset& data, int milestone) {
  if (milestone != 1 && milestone != 2) throw MetricsError("milestone must be 1 or 2");
  MilestoneReport rep;
  rep.milestone = milestone;
  std::set<std::string> names;
  for (const auto& r : data) names.insert(r.class_name);
  std::vector<std::string> classes;
  for (ClassTag tag : benchmark_classes()) {
    const std::string n(to_string(tag));
    if (names.erase(n)) classes.push_back(n);
  }
  classes.insert(classes.end(), names.begin(), names.end());

  Dataset used;
  std::vector<std::string> eligible;
  for (const auto& name : classes) {
    bool native = false;
    try {
      native = is_native(parse_class_tag(name));
    } catch (const std::exception&) {
    }
    if (milestone == 2 && native) {
      rep.excluded.push_back(name + ": native class, not embedded");
      continue;
    }
    eligible.push_back(name);
  }
  bool dual_in_m1 = false;
  for (const auto& r : data) {
    if (std::find(eligible.begin(), eligible.end(), r.class_name) == eligible.end()) continue;
    if (milestone == 2 && r.space != "logical") continue;
    if (milestone == 1 && r.input == "logical" && !is_qpu_solver(r.solver_id)) {
      try {
        dual_in_m1 = dual_in_m1 || !is_native(parse_class_tag(r.class_name));
      } catch (const std::exception&) {
      }
    }
    used.push_back(r);
  }
  if (dual_in_m1)
    rep.warnings.push_back("embedded-class records read logical inputs; milestone 1 assumes physical dispatch");

  std::set<Scenario> scenarios;
  for (const auto& r : used) scenarios.insert(r.scenario);
  for (const auto& name : eligible) {
    for (const auto& sc : scenarios) {
      bool any = false;
      for (const auto& r : used)
        if (r.class_name == name && r.scenario == sc) {
          any = true;
          break;
        }
      if (!any) continue;
      ScenarioRanking ranking = rank_scenario(used, name, sc);
      for (auto& w : ranking.warnings) rep.warnings.push_back(std::move(w));
      for (const auto& o : ranking.outcomes) {
        auto& c = rep.counts[o.solver_id];
        c.try_emplace("win", 0);
        c.try_emplace("shared_win", 0);
        c.try_emplace("fail", 0);
        c.try_emplace("compete", 0);
        ++c[std::string(to_string(o.verdict))];
        if (o.shared) ++c["shared_win"];
      }
      rep.cells.push_back({name, sc, std::move(ranking.outcomes)});
    }
  }
  return rep;
}

void write_milestone_csvs(const MilestoneReport& report, const std::filesystem::path& dir) {
  const std::string k = std::to_string(report.milestone);
  std::ofstream wins(dir / ("wins_m" + k + ".csv"), std::ios::trunc);
  std::ofstream fails(dir / ("fails_m" + k + ".csv"), std::ios::trunc);
  if (!wins || !fails) throw MetricsError("cannot write milestone tables in " + dir.string());
  wins << "class,s,t,solver,win,shared,dominated,tied,instances\n";
  fails << "class,s,t,solver,fail,failed,instances\n";
  for (const auto& cell : report.cells)
    for (const auto& o : cell.outcomes) {
      const std::string head = cell.class_name + ',' + std::to_string(cell.scenario.s) + ',' +
                               format_seconds(cell.scenario.t) + ',' + o.solver_id + ',';
      wins << head << (o.verdict == Verdict::Win) << ',' << o.shared << ',' << o.dominated << ',' << o.tied
           << ',' << o.instances << '\n';
      fails << head << (o.verdict == Verdict::Fail) << ',' << o.failed << ',' << o.instances << '\n';
    }
}

AnalyzeOutputs analyze(const Dataset& data, const std::filesystem::path& out_dir,
                       const std::optional<int>& milestone) {
  if (data.empty()) throw MetricsError("empty dataset");
  std::filesystem::create_directories(out_dir);
  AnalyzeOutputs out;
  std::set<std::pair<std::string, Scenario>> cells;
  for (const auto& r : data) cells.insert({r.class_name, r.scenario});
  json absent = json::object();
  for (const auto& [name, sc] : cells) {
    const EcdTable table = ecd_table(data, name, sc);
    const auto path = out_dir / ecd_file_name(name, sc);
    write_ecd_csv(table, path);
    out.files.push_back(path);
    if (!table.absent.empty()) absent[ecd_file_name(name, sc)] = table.absent;
  }
  bool mock = false;
  for (const auto& r : data) mock = mock || r.mock;
  json summary{{"records", data.size()}, {"ecd_absent", std::move(absent)}, {"mock", mock}};
  if (mock) summary["label"] = "MOCK";
  for (int m : {1, 2}) {
    if (milestone && *milestone != m) continue;
    const MilestoneReport rep = milestone_report(data, m);
    write_milestone_csvs(rep, out_dir);
    out.files.push_back(out_dir / ("wins_m" + std::to_string(m) + ".csv"));
    out.files.push_back(out_dir / ("fails_m" + std::to_string(m) + ".csv"));
    summary["milestone" + std::to_string(m)] = rep.summary();
  }
  const auto summary_path = out_dir / "summary.json";
  std::ofstream(summary_path, std::ios::trunc) << summary.dump(2) << '\n';
  out.files.push_back(summary_path);
  out.summary = std::move(summary);
  return out;
}

std::vector<double> geometric_grid(double t0, double ratio, int count) {
  if (!(t0 > 0.0) || !(ratio > 1.0) || count < 1) throw MetricsError("geometric grid needs t0 > 0, ratio > 1, count >= 1");
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i) out[i] = t0 * std::pow(ratio, i);
  return out;
}

std::vector<ConvergenceRow> convergence_study(const PreparedInstance& inst,
                                              const std::vector<std::string>& solvers,
                                              const std::vector<double>& time_grid,
                                              const ConvergenceOptions& options) {
  if (options.trials < 1) throw MetricsError("trials must be >= 1");
  AutotuneCache cache;
  std::vector<ConvergenceRow> rows;
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& solver : solvers)
    for (double t : time_grid)
      for (int trial = 0; trial < options.trials; ++trial) {
        const std::uint64_t seed = derive_seed(
            options.seed, {"convergence", inst.id, solver, format_seconds(t), std::to_string(trial)});
        const TestRecord rec = run_test(solver, inst, {1, t}, options.harness, cache, seed);
        ConvergenceRow row;
        row.solver_id = solver;
        row.t = t;
        row.trial = trial;
        row.complete = !rec.energies.empty();
        row.min_energy = row.complete ? rec.energies.front() : std::numeric_limits<double>::quiet_NaN();
        if (row.complete) lowest = std::min(lowest, row.min_energy);
        rows.push_back(row);
      }
  const double target = options.target ? *options.target : lowest;
  for (auto& row : rows) {
    if (row.complete) row.r = relative_error(row.min_energy, target);
    else row.r.defined = false;
  }
  return rows;
}

double convergence_median(const std::vector<ConvergenceRow>& rows, const std::string& solver, double t) {
  std::vector<double> v;
  for (const auto& row : rows)
    if (row.solver_id == solver && row.t == t && row.r.defined) v.push_back(row.r.value);
  return median(std::move(v));
}

void write_convergence_csv(const std::vector<ConvergenceRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw MetricsError("cannot write " + path.string());
  out << "solver,t,trial,min_energy,R\n";
  for (const auto& row : rows) {
    out << row.solver_id << ',' << format_seconds(row.t) << ',' << row.trial << ',';
    if (row.complete) out << fmt(row.min_energy);
    out << ',';
    if (row.r.defined) out << fmt(row.r.value);
    out << '\n';
  }
}

}  // namespace qubench
