#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qubench/harness.hpp"

using namespace qubench;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("qubench_harness_" + name);
  fs::remove_all(dir);
  return dir;
}

SuiteConfig toy_suite(const fs::path& out) {
  SuiteConfig c;
  c.classes = {{ClassTag::NAT1, 0, {}}, {ClassTag::SK, 8, {}}};
  c.instances = 3;
  c.solvers = {"random", "sgd", "sa"};
  c.scenarios = std::vector<Scenario>{{1, 0.002}, {10, 0.002}, {10, 0.005}, {100, 0.01}};
  c.hardware = "pegasus:4";
  c.output = out;
  c.master_seed = 17;
  return c;
}

std::shared_ptr<const Graph> p(int m) { return std::make_shared<const Graph>(pegasus(m)); }

}  // namespace

TEST(Scenarios, DefaultGridHasNineteenCells) {
  const auto grid = scenario_grid();
  EXPECT_EQ(grid.size(), 19u);
  EXPECT_EQ(grid.size() * 13, 247u);
  EXPECT_EQ(grid.size() * 8, 152u);
  for (const Scenario& bad : ScenarioGridConfig{}.exclude)
    EXPECT_EQ(std::find(grid.begin(), grid.end(), bad), grid.end());
  EXPECT_TRUE(std::is_sorted(grid.begin(), grid.end()));
}

TEST(Scenarios, FloorZeroKeepsTheFullCrossProduct) {
  ScenarioGridConfig c;
  c.floor = 0.0;
  EXPECT_EQ(scenario_grid(c).size(), 24u);
  c.sample_counts.clear();
  EXPECT_THROW(scenario_grid(c), HarnessError);
}

TEST(Scenarios, FloorDropsThinCells) {
  ScenarioGridConfig c;
  c.exclude.clear();
  c.floor = 1e-3;
  for (const Scenario& sc : scenario_grid(c)) EXPECT_GE(sc.t / sc.s, 1e-3);
}

TEST(Scenarios, KeysAndFormatting) {
  EXPECT_EQ(format_seconds(0.02), "0.02");
  EXPECT_EQ(format_seconds(1.0), "1");
  EXPECT_EQ(scenario_key({10, 0.5}), "10_0.5");
  EXPECT_TRUE(is_qpu_solver("qpu-mock"));
  EXPECT_TRUE(is_qpu_solver("qpu"));
  EXPECT_FALSE(is_qpu_solver("sa_native"));
  EXPECT_EQ(parse_dispatch(to_string(Dispatch::Physical)), Dispatch::Physical);
}

TEST(Autotune, SweepFormula) {
  const Calibration c{0.001, 0.0001, 0.00001};
  // (0.1/10 - 0.001/10 - 0.0001) / 0.00001 = 980
  EXPECT_EQ(sweeps_for(c, {10, 0.1}), 980);
  EXPECT_EQ(sweeps_for(c, {1000, 0.02}), 1);
  EXPECT_EQ(sweeps_for(Calibration{0, 0, 0.001}, {1, 1.0}), 1000);
}

TEST(Autotune, ModelCalibrationIsLinearInCostFactor) {
  const BQM m = generate({ClassTag::SK, 20, 1});
  const auto sa = calibrate(find_solver("sa"), m, TimingMode::Model, 1e-8);
  const auto pt = calibrate(find_solver("pt"), m, TimingMode::Model, 1e-8);
  EXPECT_GT(sa.sweep_seconds, 0.0);
  EXPECT_NEAR(pt.sweep_seconds / sa.sweep_seconds, 16.0, 1.0);
  const auto twice = calibrate(find_solver("sa"), m, TimingMode::Model, 2e-8);
  EXPECT_DOUBLE_EQ(twice.sweep_seconds, 2 * sa.sweep_seconds);
}

TEST(Autotune, CacheCalibratesOncePerKey) {
  AutotuneCache cache;
  const BQM m = generate({ClassTag::SK, 10, 1});
  const auto info = find_solver("sa");
  const auto a = cache.get(info, "i0", false, m, TimingMode::Model, 5e-9);
  const auto b = cache.get(info, "i0", false, m, TimingMode::Model, 5e-9);
  EXPECT_EQ(cache.calibrations(), 1u);
  EXPECT_EQ(a.sweep_seconds, b.sweep_seconds);
  cache.get(info, "i0", true, m, TimingMode::Model, 5e-9);
  cache.get(info, "i1", false, m, TimingMode::Model, 5e-9);
  EXPECT_EQ(cache.calibrations(), 3u);
}

TEST(Instances, IdsSeedsAndEmbedding) {
  const auto hw = p(4);
  const auto nat = prepare_instance(ClassTag::NAT1, 0, 2, 5, hw);
  EXPECT_EQ(nat.id, "NAT1_0_2");
  EXPECT_FALSE(nat.is_embedded());
  const auto sk = prepare_instance(ClassTag::SK, 8, 0, 5, hw);
  ASSERT_TRUE(sk.is_embedded());
  EXPECT_TRUE(validate_embedding(graph_of(sk.logical), *hw, *sk.embedding).empty());
  EXPECT_EQ(sk.logical, prepare_instance(ClassTag::SK, 8, 0, 5, hw).logical);
  EXPECT_NE(sk.logical, prepare_instance(ClassTag::SK, 8, 1, 5, hw).logical);
  const auto lat = prepare_instance(ClassTag::LAT3D, 3, 0, 5, hw);
  EXPECT_EQ(lat.physical().num_variables(), 54u);
}

TEST(RunTest, RandomCompletesAndSaFailsWhenStarved) {
  const auto hw = p(16);
  const auto inst = prepare_instance(ClassTag::LAT3D, 8, 0, 1, hw);
  AutotuneCache cache;
  const HarnessOptions opts;
  const TestRecord r = run_test("random", inst, {10, 0.02}, opts, cache, 1);
  EXPECT_TRUE(r.complete);
  EXPECT_EQ(r.energies.size(), 10u);
  EXPECT_TRUE(std::is_sorted(r.energies.begin(), r.energies.end()));
  EXPECT_EQ(r.input, "logical");
  const TestRecord f = run_test("sa", inst, {1000, 0.02}, opts, cache, 1);
  EXPECT_FALSE(f.complete);
  EXPECT_LT(f.energies.size(), 1000u);
  EXPECT_TRUE(f.error.empty());
}

TEST(RunTest, PhysicalSolverOnEmbeddedClassReportsLogicalEnergies) {
  const auto hw = p(4);
  const auto inst = prepare_instance(ClassTag::LAT3D, 3, 0, 2, hw);
  AutotuneCache cache;
  const TestRecord r = run_test("sa_native", inst, {10, 0.01}, HarnessOptions{}, cache, 4);
  EXPECT_EQ(r.input, "physical");
  EXPECT_EQ(r.space, "logical");
  ASSERT_TRUE(r.complete);
  // Lattice ground energy is bounded by minus the number of couplers.
  EXPECT_GE(r.energies.front(), -static_cast<double>(inst.logical.num_interactions()));

  HarnessOptions phys;
  phys.dispatch = Dispatch::Physical;
  const TestRecord q = run_test("sa", inst, {10, 0.01}, phys, cache, 4);
  EXPECT_EQ(q.input, "physical");
  EXPECT_EQ(q.space, "physical");
}

TEST(RunTest, MockQpuOnEmbeddedLattice) {
  const auto hw = p(4);
  const auto inst = prepare_instance(ClassTag::LAT3D, 3, 0, 3, hw);
  AutotuneCache cache;
  HarnessOptions opts;
  const TestRecord r = run_test("qpu-mock", inst, {10, 0.05}, opts, cache, 9);
  EXPECT_TRUE(r.mock);
  EXPECT_TRUE(r.complete);
  EXPECT_EQ(r.space, "logical");
  EXPECT_EQ(r.input, "physical");
  EXPECT_EQ(r.energies.size(), 10u);
  EXPECT_DOUBLE_EQ(r.wall_time, access_time(plan_schedule(10, 0.05)));
  const TestRecord bad = run_test("qpu-mock", inst, {1000, 0.02}, opts, cache, 9);
  EXPECT_FALSE(bad.complete);
  EXPECT_TRUE(bad.energies.empty());
  EXPECT_TRUE(bad.error.empty());
}

TEST(Records, JsonRoundTrip) {
  TestRecord r;
  r.solver_id = "sa";
  r.instance_id = "SK_8_0";
  r.class_name = "SK";
  r.scenario = {10, 0.05};
  r.energies = {-3.5, -3.0};
  r.complete = false;
  r.wall_time = 0.04;
  r.work = 12;
  r.seed = 99;
  r.error = "boom";
  EXPECT_EQ(record_from_json(to_json(r)), r);
}

TEST(Suite, ToyRunProducesEveryRecordInOrder) {
  const auto out = scratch("toy");
  const SuiteResult res = run_suite(toy_suite(out));
  EXPECT_EQ(res.records.size(), 72u);
  EXPECT_EQ(res.executed, 72u);
  EXPECT_EQ(res.crashed, 0u);
  EXPECT_TRUE(fs::exists(out / kResultsFile));
  EXPECT_TRUE(fs::exists(out / kManifestFile));
  EXPECT_TRUE(fs::exists(out / kJournalFile));
  EXPECT_EQ(load_results(out / kResultsFile), res.records);
  const auto manifest = nlohmann::json::parse(slurp(out / kManifestFile));
  EXPECT_EQ(manifest.at("records").get<int>(), 72);
  fs::remove_all(out);
}

TEST(Suite, ResultsAreIndependentOfJobCount) {
  const auto a = scratch("det_a"), b = scratch("det_b");
  SuiteConfig ca = toy_suite(a), cb = toy_suite(b);
  ca.jobs = 1;
  cb.jobs = 4;
  run_suite(ca);
  run_suite(cb);
  EXPECT_EQ(slurp(a / kResultsFile), slurp(b / kResultsFile));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Suite, ResumeSkipsJournaledRunsAndRejectsChangedConfig) {
  const auto out = scratch("resume");
  SuiteConfig c = toy_suite(out);
  const auto first = run_suite(c);
  const std::string before = slurp(out / kResultsFile);
  fs::remove(out / kResultsFile);
  const auto second = run_suite(c, true);
  EXPECT_EQ(second.resumed, 72u);
  EXPECT_EQ(second.executed, 0u);
  EXPECT_EQ(slurp(out / kResultsFile), before);
  c.master_seed = 18;
  EXPECT_THROW(run_suite(c, true), HarnessError);
  EXPECT_NO_THROW(run_suite(c, false));
  fs::remove_all(out);
}

TEST(Suite, CrashingSolverIsIsolated) {
  register_solver({"crashy", SolverSpace::Logical, false, 1,
                   [](const BQM&, std::size_t, double, const SolverConfig&) -> SampleSet {
                     throw std::runtime_error("solver exploded");
                   }});
  const auto out = scratch("crash");
  SuiteConfig c = toy_suite(out);
  c.solvers = {"crashy", "random"};
  const auto res = run_suite(c);
  EXPECT_EQ(res.records.size(), 48u);
  EXPECT_EQ(res.crashed, 24u);
  for (const auto& r : res.records) {
    if (r.solver_id == "crashy") {
      EXPECT_FALSE(r.complete);
      EXPECT_NE(r.error.find("exploded"), std::string::npos);
    } else {
      EXPECT_TRUE(r.error.empty());
    }
  }
  fs::remove_all(out);
}

TEST(SuiteConfigToml, ParsesAllSections) {
  const auto c = parse_suite_config(R"(
classes = ["SK:8", {tag = "LAT3D", size = 3}]
instances = 2
solvers = ["sa", "qpu-mock"]
hardware = "pegasus:6"
master_seed = 4
output = "out"
jobs = 3
dispatch = "physical"
[scenarios]
s = [1, 10]
t = [0.1]
[timing]
mode = "wall"
[qpu]
mock_temperature = 0.5
)",
                                    "/base");
  ASSERT_EQ(c.classes.size(), 2u);
  EXPECT_EQ(c.classes[1].tag, ClassTag::LAT3D);
  EXPECT_EQ(c.instances, 2);
  EXPECT_EQ(c.output, fs::path("/base/out"));
  EXPECT_EQ(c.harness.mode, TimingMode::Wall);
  EXPECT_EQ(c.harness.dispatch, Dispatch::Physical);
  EXPECT_DOUBLE_EQ(c.harness.mock.effective_temperature, 0.5);
  EXPECT_EQ(c.resolved_scenarios().size(), 2u);
}

TEST(SuiteConfigToml, RejectsBadInput) {
  EXPECT_THROW(parse_suite_config("bogus = 1\n"), HarnessError);
  EXPECT_THROW(parse_suite_config("classes = [\"SK:x\"]\n"), HarnessError);
  EXPECT_THROW(parse_suite_config("instances = 0\nclasses = [\"SK:8\"]\n"), HarnessError);
  EXPECT_THROW(parse_suite_config("[timing]\nspeed = 2\n"), HarnessError);
  EXPECT_THROW(parse_suite_config("classes = [\n"), HarnessError);
  EXPECT_THROW(load_suite_config("/nonexistent/suite.toml"), HarnessError);
}
