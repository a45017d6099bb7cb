#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "qubench/harness.hpp"

namespace qubench {

class MetricsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Dataset = std::vector<TestRecord>;

/// Median of a non-empty list; mean of the middle two for even sizes.
double median(std::vector<double> values);

/// Median of the record's energies. Requires a complete record.
double median_sample_energy(const TestRecord& record);

/// Lowest energy recorded for the instance over all solvers and scenarios.
double target_energy(const Dataset& data, const std::string& instance_id);
std::map<std::string, double> target_energies(const Dataset& data);

/// |T - M| / |T|. When T = 0 the ratio is undefined and `gap` carries
/// |T - M| instead.
struct RelativeError {
  bool defined = true;
  double value = 0.0;
  double gap = 0.0;
};

RelativeError relative_error(double median_energy, double target);

/// Median used for ranking: the full record, or a partial record with at
/// least ceil(s/2) energies. Empty when the record does not qualify.
std::optional<double> ranking_median(const TestRecord& record);

/// Tolerance for "strictly below": exact when every energy of the slice is
/// an integer, else 1e-9 relative.
bool integer_energies(const Dataset& data);

enum class Verdict { Win, Fail, Compete };
std::string_view to_string(Verdict v);

struct RankOutcome {
  std::string solver_id;
  std::string class_name;
  Scenario scenario;
  Verdict verdict = Verdict::Compete;
  bool shared = false;     // win shared with other solvers
  int instances = 0;       // N
  int dominated = 0;       // instances where the solver beats every other solver
  int tied = 0;            // instances where it ties the best solver
  int failed = 0;          // incomplete records
};

struct RankOptions {
  // Overrides the automatic choice of tolerance when set.
  std::optional<double> epsilon;
};

struct ScenarioRanking {
  std::vector<RankOutcome> outcomes;   // sorted by solver id
  std::vector<std::string> warnings;   // e.g. instances with T = 0
};

/// Win/fail/compete verdicts for every solver tested on (class, scenario).
/// The winner set is the largest set W such that each member beats every
/// non-member on at least ceil(N/2) instances and ties every other member on
/// at least ceil(N/2) instances. Target energies come from `data` as a whole.
ScenarioRanking rank_scenario(const Dataset& data, const std::string& class_name, const Scenario& sc,
                              const RankOptions& options = {});

struct EcdRow {
  std::string solver_id;
  int rank = 0;  // 1-based
  double r = 0.0;
};

/// Per solver, the ascending per-instance relative errors. Solvers without
/// any usable record are listed in `absent`.
struct EcdTable {
  std::vector<EcdRow> rows;
  std::vector<std::string> absent;
};

EcdTable ecd_table(const Dataset& data, const std::string& class_name, const Scenario& sc);
void write_ecd_csv(const EcdTable& table, const std::filesystem::path& path);
/// ecd_<class>_<s>_<t>.csv
std::string ecd_file_name(const std::string& class_name, const Scenario& sc);

struct MilestoneCell {
  std::string class_name;
  Scenario scenario;
  std::vector<RankOutcome> outcomes;
};

struct MilestoneReport {
  int milestone = 1;
  std::vector<MilestoneCell> cells;        // class order, then scenario order
  std::vector<std::string> excluded;       // classes left out, with reasons
  std::vector<std::string> warnings;
  std::map<std::string, std::map<std::string, int>> counts;  // solver -> verdict name -> count

  nlohmann::json summary() const;
};

/// Milestone 1 ranks every class on the records as given. Milestone 2 keeps
/// the embedded classes and logical-space records only.
MilestoneReport milestone_report(const Dataset& data, int milestone);

/// wins_m<k>.csv and fails_m<k>.csv, one row per (class, scenario, solver).
void write_milestone_csvs(const MilestoneReport& report, const std::filesystem::path& dir);

struct AnalyzeOutputs {
  std::vector<std::filesystem::path> files;
  nlohmann::json summary;
};

/// ECD tables for every (class, scenario), both milestone tables and
/// summary.json.
AnalyzeOutputs analyze(const Dataset& data, const std::filesystem::path& out_dir,
                       const std::optional<int>& milestone = std::nullopt);

/// Time limits t0, t0*ratio, ... (count values).
std::vector<double> geometric_grid(double t0, double ratio, int count);

struct ConvergenceRow {
  std::string solver_id;
  double t = 0.0;
  int trial = 0;
  double min_energy = 0.0;
  RelativeError r;
  bool complete = false;
};

struct ConvergenceOptions {
  int trials = 15;
  HarnessOptions harness;
  std::uint64_t seed = kDefaultMasterSeed;
  // Known optimum; otherwise the lowest energy seen in the study.
  std::optional<double> target;
};

/// Each trial is one s = 1 run, so over-producing solvers report the best
/// of their batch.
std::vector<ConvergenceRow> convergence_study(const PreparedInstance& inst,
                                              const std::vector<std::string>& solvers,
                                              const std::vector<double>& time_grid,
                                              const ConvergenceOptions& options = {});

/// Median relative error over trials for one (solver, t).
double convergence_median(const std::vector<ConvergenceRow>& rows, const std::string& solver, double t);

void write_convergence_csv(const std::vector<ConvergenceRow>& rows, const std::filesystem::path& path);

}  // namespace qubench
