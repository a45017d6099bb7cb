#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "oracles.hpp"
#include "qubench/metrics.hpp"

using namespace qubench;
namespace fs = std::filesystem;

namespace {

const Scenario kSc{1, 0.1};

TestRecord rec(const std::string& solver, int inst, std::vector<double> e, bool complete = true,
               const std::string& cls = "SK", Scenario sc = kSc) {
  TestRecord r;
  r.solver_id = solver;
  r.instance_id = cls + "_8_" + std::to_string(inst);
  r.class_name = cls;
  r.scenario = sc;
  r.energies = std::move(e);
  r.complete = complete;
  return r;
}

std::map<std::string, std::pair<Verdict, bool>> verdicts(const Dataset& d, const std::string& cls = "SK",
                                                         Scenario sc = kSc) {
  std::map<std::string, std::pair<Verdict, bool>> out;
  for (const auto& o : rank_scenario(d, cls, sc).outcomes) out[o.solver_id] = {o.verdict, o.shared};
  return out;
}

// A best everywhere, B second, C third.
Dataset solo_fixture() {
  Dataset d;
  for (int x = 0; x < 25; ++x) {
    d.push_back(rec("A", x, {-10}));
    d.push_back(rec("B", x, {-9}));
    d.push_back(rec("C", x, {-8}));
  }
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Median, OddEvenAndEmpty) {
  EXPECT_EQ(median({3, 1, 2}), 2.0);
  EXPECT_EQ(median({4, 1, 3, 2}), 2.5);
  EXPECT_THROW(median({}), MetricsError);
  EXPECT_THROW(median_sample_energy(rec("A", 0, {1}, false)), MetricsError);
  EXPECT_EQ(median_sample_energy(rec("A", 0, {-3, -2, -1})), -2.0);
}

TEST(Target, LowestEnergyAcrossSolversAndScenarios) {
  Dataset d{rec("A", 0, {-5, -4}), rec("B", 0, {-7}, false, "SK", {10, 1.0}), rec("A", 1, {2})};
  EXPECT_EQ(target_energy(d, "SK_8_0"), -7.0);
  EXPECT_EQ(target_energies(d).at("SK_8_1"), 2.0);
  EXPECT_THROW(target_energy(d, "nope"), MetricsError);
}

TEST(RelativeErrorTest, DefinitionAndZeroTarget) {
  const auto r = relative_error(-90, -100);
  EXPECT_TRUE(r.defined);
  EXPECT_DOUBLE_EQ(r.value, 0.1);
  const auto z = relative_error(3, 0);
  EXPECT_FALSE(z.defined);
  EXPECT_DOUBLE_EQ(z.gap, 3.0);
  EXPECT_DOUBLE_EQ(relative_error(-100, -100).value, 0.0);
}

TEST(RankingMedian, PartialRecordsNeedHalfTheSamples) {
  const Scenario sc{10, 0.1};
  EXPECT_TRUE(ranking_median(rec("A", 0, {1, 2, 3, 4, 5}, false, "SK", sc)).has_value());
  EXPECT_FALSE(ranking_median(rec("A", 0, {1, 2, 3, 4}, false, "SK", sc)).has_value());
  EXPECT_FALSE(ranking_median(rec("A", 0, {}, false, "SK", sc)).has_value());
  EXPECT_EQ(*ranking_median(rec("A", 0, {1, 2, 3}, false, "SK", {5, 0.1})), 2.0);
}

TEST(Ranking, SoloWin) {
  const auto v = verdicts(solo_fixture());
  EXPECT_EQ(v.at("A"), std::pair(Verdict::Win, false));
  EXPECT_EQ(v.at("B").first, Verdict::Compete);
  EXPECT_EQ(v.at("C").first, Verdict::Compete);
  const auto out = rank_scenario(solo_fixture(), "SK", kSc).outcomes;
  EXPECT_EQ(out[0].dominated, 25);
  EXPECT_EQ(out[0].instances, 25);
}

TEST(Ranking, SharedWin) {
  Dataset d;
  for (int x = 0; x < 25; ++x) {
    const double a = x < 13 ? -10 : (x < 19 ? -10 : -9);
    const double b = x < 13 ? -10 : (x < 19 ? -9 : -10);
    d.push_back(rec("A", x, {a}));
    d.push_back(rec("B", x, {b}));
    d.push_back(rec("C", x, {-8}));
  }
  const auto v = verdicts(d);
  EXPECT_EQ(v.at("A"), std::pair(Verdict::Win, true));
  EXPECT_EQ(v.at("B"), std::pair(Verdict::Win, true));
  EXPECT_EQ(v.at("C").first, Verdict::Compete);
}

TEST(Ranking, FailThresholdIsHalfRoundedUp) {
  for (int incomplete : {12, 13}) {
    Dataset d;
    for (int x = 0; x < 25; ++x) {
      d.push_back(x < incomplete ? rec("A", x, {}, false) : rec("A", x, {-10}));
      d.push_back(rec("B", x, {-9}));
    }
    const auto v = verdicts(d);
    EXPECT_EQ(v.at("A").first, incomplete >= 13 ? Verdict::Fail : Verdict::Win) << incomplete;
  }
}

TEST(Ranking, MissingRecordsCountAsFailures) {
  Dataset d;
  for (int x = 0; x < 25; ++x) {
    if (x >= 13) d.push_back(rec("A", x, {-10}));
    d.push_back(rec("B", x, {-9}));
  }
  EXPECT_EQ(verdicts(d).at("A").first, Verdict::Fail);
}

TEST(Ranking, SplitDecisionIsCompete) {
  Dataset d;
  for (int x = 0; x < 25; ++x) {
    d.push_back(rec("A", x, {x < 12 ? -10.0 : (x < 24 ? -9.0 : -10.0)}));
    d.push_back(rec("B", x, {x < 12 ? -9.0 : -10.0}));
  }
  const auto v = verdicts(d);
  EXPECT_EQ(v.at("A").first, Verdict::Compete);
  EXPECT_EQ(v.at("B").first, Verdict::Compete);
}

TEST(Ranking, ZeroTargetInstancesAreExcludedWithWarning) {
  Dataset d = solo_fixture();
  d.push_back(rec("A", 99, {0}));
  d.push_back(rec("B", 99, {1}));
  const auto r = rank_scenario(d, "SK", kSc);
  ASSERT_FALSE(r.warnings.empty());
  EXPECT_NE(r.warnings[0].find("SK_8_99"), std::string::npos);
  EXPECT_EQ(verdicts(d).at("A").first, Verdict::Win);
}

TEST(Ranking, ToleranceSeparatesNearTies) {
  Dataset d;
  for (int x = 0; x < 5; ++x) {
    d.push_back(rec("A", x, {-1.0}));
    d.push_back(rec("B", x, {-1.0 + 1e-12}));
  }
  EXPECT_EQ(verdicts(d).at("A"), std::pair(Verdict::Win, true));
  RankOptions exact;
  exact.epsilon = 0.0;
  const auto r = rank_scenario(d, "SK", kSc, exact);
  EXPECT_EQ(r.outcomes[0].verdict, Verdict::Win);
  EXPECT_FALSE(r.outcomes[0].shared);
  EXPECT_EQ(r.outcomes[1].verdict, Verdict::Compete);
  EXPECT_THROW(rank_scenario(d, "NOPE", kSc), MetricsError);
}

TEST(Ranking, InvariantUnderRelabelingAndScaling) {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(uniform_below(rng, 9));
    const std::vector<std::string> ids{"p", "q", "r", "s"};
    Dataset d;
    for (int x = 0; x < n; ++x)
      for (const auto& id : ids) {
        const bool complete = uniform_below(rng, 5) != 0;
        const double e = -1.0 - static_cast<double>(uniform_below(rng, 4));
        d.push_back(rec(id, x, complete ? std::vector<double>{e} : std::vector<double>{}, complete));
      }
    const auto base = verdicts(d);
    const double scale = trial % 2 ? 2.5 : 7.0;
    Dataset moved = d;
    const std::map<std::string, std::string> rename{{"p", "zz"}, {"q", "aa"}, {"r", "mm"}, {"s", "bb"}};
    for (auto& r : moved) {
      r.solver_id = rename.at(r.solver_id);
      for (auto& e : r.energies) e *= scale;
    }
    const auto after = verdicts(moved);
    for (const auto& [id, v] : base) ASSERT_EQ(after.at(rename.at(id)), v) << "trial " << trial;

    // At most one solo winner, and a winner never fails.
    int wins = 0;
    bool shared = false;
    for (const auto& [id, v] : base) {
      wins += v.first == Verdict::Win;
      shared = shared || v.second;
    }
    if (!shared) ASSERT_LE(wins, 1);
  }
}

TEST(Ecd, RowsSortedAndAbsentSolversListed) {
  Dataset d;
  for (int x = 0; x < 4; ++x) {
    d.push_back(rec("A", x, {-10.0 + x}));
    d.push_back(rec("B", x, {-10}));
    d.push_back(rec("C", x, {}, false));
  }
  const EcdTable t = ecd_table(d, "SK", kSc);
  EXPECT_EQ(t.absent, std::vector<std::string>{"C"});
  std::vector<double> a;
  for (const auto& row : t.rows)
    if (row.solver_id == "A") a.push_back(row.r);
  EXPECT_EQ(a, (std::vector<double>{0.0, 0.1, 0.2, 0.3}));
  EXPECT_EQ(ecd_file_name("SK", {10, 0.5}), "ecd_SK_10_0.5.csv");
  const auto path = fs::temp_directory_path() / "qubench_ecd.csv";
  write_ecd_csv(t, path);
  const std::string csv = slurp(path);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "solver,rank,R");
  EXPECT_NE(csv.find("A,2,0.1\n"), std::string::npos);
  fs::remove(path);
}

TEST(Ecd, PartialRecordsAreLeftOut) {
  Dataset d{rec("A", 0, {-3, -2}, false, "SK", {3, 0.1}), rec("B", 0, {-3, -3, -3}, true, "SK", {3, 0.1})};
  const EcdTable t = ecd_table(d, "SK", {3, 0.1});
  EXPECT_EQ(t.absent, std::vector<std::string>{"A"});
  ASSERT_EQ(t.rows.size(), 1u);
}

TEST(Milestones, NativeClassesOnlyInMilestoneOne) {
  Dataset d = solo_fixture();
  for (int x = 0; x < 3; ++x) {
    d.push_back(rec("A", x, {-5}, true, "NAT1"));
    d.push_back(rec("B", x, {-6}, true, "NAT1"));
  }
  for (auto& r : d) r.input = r.class_name == "SK" ? "physical" : "logical";
  const auto m1 = milestone_report(d, 1);
  EXPECT_EQ(m1.cells.size(), 2u);
  EXPECT_EQ(m1.counts.at("A").at("win"), 1);
  EXPECT_EQ(m1.counts.at("B").at("win"), 1);
  const auto m2 = milestone_report(d, 2);
  EXPECT_EQ(m2.cells.size(), 1u);
  EXPECT_EQ(m2.excluded.size(), 1u);
  EXPECT_EQ(m2.counts.at("A").at("win"), 1);
  EXPECT_THROW(milestone_report(d, 3), MetricsError);

  for (auto& r : d) r.space = "physical";
  EXPECT_TRUE(milestone_report(d, 2).cells.empty());
}

TEST(Milestones, CsvFilesAndAnalyzeOutputs) {
  const auto dir = fs::temp_directory_path() / "qubench_analyze";
  fs::remove_all(dir);
  Dataset d = solo_fixture();
  d.front().mock = true;
  const auto out = analyze(d, dir);
  for (const char* f : {"wins_m1.csv", "fails_m1.csv", "wins_m2.csv", "fails_m2.csv", "summary.json",
                        "ecd_SK_1_0.1.csv"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  const std::string wins = slurp(dir / "wins_m1.csv");
  EXPECT_EQ(wins.substr(0, wins.find('\n')), "class,s,t,solver,win,shared,dominated,tied,instances");
  EXPECT_NE(wins.find("SK,1,0.1,A,1,0,25,0,25"), std::string::npos) << wins;
  const std::string fails = slurp(dir / "fails_m1.csv");
  EXPECT_EQ(fails.substr(0, fails.find('\n')), "class,s,t,solver,fail,failed,instances");
  EXPECT_EQ(nlohmann::json::parse(slurp(dir / "summary.json")).at("label"), "MOCK");
  fs::remove_all(dir);
}

TEST(Convergence, GeometricGrid) {
  const auto g = geometric_grid(0.001, 2.0, 4);
  ASSERT_EQ(g.size(), 4u);
  EXPECT_DOUBLE_EQ(g[3], 0.008);
  EXPECT_THROW(geometric_grid(0.0, 2.0, 3), MetricsError);
}

TEST(Convergence, StudyReachesTheKnownOptimum) {
  const auto hw = std::make_shared<const Graph>(pegasus(4));
  const auto inst = prepare_instance(ClassTag::SK, 8, 0, 3, hw);
  const double ground = oracle::ground(inst.logical).energy;
  ConvergenceOptions o;
  o.trials = 3;
  o.target = ground;
  const auto grid = geometric_grid(0.0005, 4.0, 3);
  const auto rows = convergence_study(inst, {"sa", "random"}, grid, o);
  EXPECT_EQ(rows.size(), 2u * 3u * 3u);
  for (const auto& r : rows) {
    EXPECT_GE(r.min_energy, ground - 1e-9);
    EXPECT_GE(r.r.value, 0.0);
  }
  EXPECT_DOUBLE_EQ(convergence_median(rows, "sa", grid.back()), 0.0);
  const auto path = fs::temp_directory_path() / "qubench_conv.csv";
  write_convergence_csv(rows, path);
  const std::string csv = slurp(path);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "solver,t,trial,min_energy,R");
  fs::remove(path);
}
