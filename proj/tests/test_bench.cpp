#include <gtest/gtest.h>

#include <sstream>

#include "mmr/bench.hpp"
#include "oracles.hpp"

using namespace mmr;

namespace {

std::vector<BenchInstance> small_instances() {
  std::vector<BenchInstance> out;
  for (const GenSpec& spec : grid(Family::I, false, 5, 1)) {
    if (spec.size != 10) continue;
    GenSpec small = spec;
    small.size = 6;
    out.push_back(bench_instance(small));
  }
  for (const GenSpec& spec : grid(Family::J, false, 5, 1)) {
    if (spec.size == 2 && spec.density == 25) out.push_back(bench_instance(spec));
  }
  return out;
}

}  // namespace

TEST(Bench, MethodsAgreeWithBruteForce) {
  MethodBudget budget;
  const auto instances = small_instances();
  const auto rows = run_benchmark(instances, known_methods(), budget, 3);
  ASSERT_EQ(rows.size(), instances.size() * known_methods().size());
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const double truth = oracle::min_regret(instances[i].problem, instances[i].set).value;
    for (std::size_t m = 0; m < known_methods().size(); ++m) {
      const ResultRow& r = rows[i * known_methods().size() + m];
      EXPECT_EQ(r.instance, instances[i].name);
      EXPECT_EQ(r.method, known_methods()[m]);
      if (r.method == "midpoint") {
        EXPECT_EQ(r.status, "heuristic");
        EXPECT_GE(r.regret, truth - 1e-6);
        EXPECT_LE(r.regret, 2.0 * truth + 1e-6);
      } else {
        EXPECT_EQ(r.status, "optimal") << r.method;
        EXPECT_NEAR(r.regret, truth, 1e-6 * std::max(1.0, truth)) << r.method;
      }
    }
  }
}

TEST(Bench, BruteReportsTooLarge) {
  const BenchInstance inst = bench_instance(GenSpec{Family::I, 30, Deviation::Small, 5, 1});
  EXPECT_EQ(run_method(inst, "brute", {}).status, "too_large");
  EXPECT_THROW(run_benchmark({inst}, {"C9-Z"}, {}), InputError);
}

TEST(Bench, CsvRoundTrip) {
  const auto rows = run_benchmark(small_instances(), {"C2-B", "midpoint"}, {}, 2);
  std::stringstream ss;
  write_results_csv(ss, rows);
  const auto back = read_results_csv(ss);
  ASSERT_EQ(back.size(), rows.size());
  std::stringstream again;
  write_results_csv(again, back);
  std::stringstream first;
  write_results_csv(first, rows);
  EXPECT_EQ(first.str(), again.str());
  std::stringstream bad("instance,family\n");
  EXPECT_THROW(read_results_csv(bad), InputError);
}

TEST(Bench, ResultsWithoutTimesAreReproducible) {
  const auto instances = small_instances();
  MethodBudget budget;
  budget.node_limit = 5000;
  std::stringstream a, b;
  write_results_csv(a, run_benchmark(instances, known_methods(), budget, 1), false);
  write_results_csv(b, run_benchmark(instances, known_methods(), budget, 4), false);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Profile, NondecreasingSeriesStartingAtZero) {
  std::vector<ResultRow> rows;
  const double times[] = {3.0, 1.0, 2.0, 5.0};
  const char* statuses[] = {"optimal", "optimal", "time_limit", "optimal"};
  for (int i = 0; i < 4; ++i) {
    ResultRow r;
    r.method = "C2-B";
    r.status = statuses[i];
    r.wall_time = times[i];
    rows.push_back(r);
  }
  ResultRow none;
  none.method = "C1-A";
  none.status = "time_limit";
  rows.push_back(none);
  const auto profile = performance_profile(rows);
  const auto& s = profile.at("C2-B");
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s[0].t, 0.0);
  EXPECT_EQ(s[0].solved, 0);
  for (std::size_t i = 1; i < s.size(); ++i) {
    EXPECT_GE(s[i].t, s[i - 1].t);
    EXPECT_EQ(s[i].solved, s[i - 1].solved + 1);
  }
  EXPECT_EQ(s.back().t, 5.0);
  EXPECT_EQ(profile.at("C1-A").size(), 1u);
}

TEST(ClassTable, SharesSumToHundred) {
  std::vector<ResultRow> rows;
  const double master[] = {1.0, 0.0, 0.5};
  const double sub[] = {3.0, 0.0, 0.5};
  for (int i = 0; i < 3; ++i) {
    ResultRow r;
    r.family = "I";
    r.n = 10;
    r.p = 5;
    r.cls = "s";
    r.method = "C2-B";
    r.status = "optimal";
    r.cuts = 2 + i;
    r.master_time = master[i];
    r.sub_time = sub[i];
    rows.push_back(r);
  }
  const auto table = class_table(rows);
  ASSERT_EQ(table.size(), 1u);
  EXPECT_EQ(table[0].runs, 3);
  EXPECT_EQ(table[0].optimal, 3);
  EXPECT_DOUBLE_EQ(table[0].mean_cuts, 3.0);
  EXPECT_NEAR(table[0].main_pct, (25.0 + 0.0 + 50.0) / 3.0, 1e-12);
  EXPECT_NEAR(table[0].main_pct + table[0].sub_pct, 100.0, 1e-9);
  std::stringstream ss;
  write_class_table_csv(ss, table);
  EXPECT_EQ(ss.str(), "family,n,p,class,method,runs,cuts,opt,main_pct,sub_pct\nI,10,5,s,C2-B,3,3.0,3,25.0,75.0\n");
}

TEST(BenchInstance, FileRoundTripKeepsMetadata) {
  const GenSpec spec{Family::J, 2, Deviation::Medium, 15, 12};
  const Instance inst = generate(spec);
  std::stringstream ss;
  write_instance(ss, inst.problem, inst.set, instance_metadata(spec, inst.center_clamped));
  const BenchInstance back = bench_instance(read_instance(ss), "fallback");
  EXPECT_EQ(back.name, spec.name());
  EXPECT_EQ(back.family, "J");
  EXPECT_EQ(back.size, 2);
  EXPECT_EQ(back.density, 15);
  EXPECT_EQ(back.deviation, "m");
  EXPECT_EQ(back.seed, 12u);
}
