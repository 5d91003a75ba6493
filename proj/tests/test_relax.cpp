#include <gtest/gtest.h>

#include <cmath>

#include "mmr/gadgets.hpp"
#include "mmr/gen.hpp"
#include "mmr/relax.hpp"
#include "oracles.hpp"

using namespace mmr;

namespace {

const char* kMethods[] = {"C1-A", "C1-B", "C2-A", "C2-B"};

double tol_for(double v) { return 1e-6 * std::max(1.0, std::abs(v)); }

}  // namespace

TEST(Relax, SingletonFeasibleSetHasZeroRegret) {
  const auto p = CombinatorialProblem::shortest_path(Digraph(2, {{0, 1}}, 0, 1));
  const GeneralEllipsoid e({5}, Matrix::identity(1));
  for (const char* m : kMethods) {
    const SolveReport r = solve_regret(p, e, relax_config_for(m));
    EXPECT_EQ(r.status, SolveStatus::Optimal);
    EXPECT_NEAR(r.regret, 0.0, 1e-12);
    EXPECT_EQ(r.incumbent.to_string(), "1");
  }
}

TEST(Relax, MethodNames) {
  EXPECT_EQ(relax_config_for("C1-A").cut_type, CutType::Type1);
  EXPECT_EQ(relax_config_for("C1-A").sub_mode, SubMode::LinearizationA);
  EXPECT_EQ(relax_config_for("C2-B").cut_type, CutType::Type2);
  EXPECT_EQ(relax_config_for("C2-B").sub_mode, SubMode::LinearizationB);
  EXPECT_THROW(relax_config_for("C3-B"), InputError);
  EXPECT_THROW(relax_config_for("c1-a"), InputError);
}

TEST(Separate, IntervalWorstCaseUsesBoundsBySelection) {
  const auto p = CombinatorialProblem::unconstrained(3);
  const IntervalSet box({1, -2, 3}, {1, 1, 2});
  SubproblemEngine eng;
  const Separation zero = separate(p, box, BinaryVector::parse("000"), CutType::Type1, eng);
  EXPECT_EQ(zero.record.scenario, (Vector{0, -3, 1}));
  const Separation ones = separate(p, box, BinaryVector::parse("111"), CutType::Type1, eng);
  EXPECT_EQ(ones.record.scenario, (Vector{2, -1, 5}));
  EXPECT_DOUBLE_EQ(zero.regret, 3.0);
  EXPECT_DOUBLE_EQ(ones.regret, 6.0 - (-1.0));
}

// Both cut types generated at x evaluate to Reg(x) at x.
TEST(Separate, CutsAreTightAtTheirOrigin) {
  Rng rng(41);
  for (int t = 0; t < 60; ++t) {
    const bool sp = t % 2 == 0;
    const auto p = sp ? CombinatorialProblem::shortest_path(layered_graph(2))
                      : CombinatorialProblem::unconstrained(6);
    const UncertaintySet set = t % 3 == 0 ? UncertaintySet(oracle::random_interval(rng, p.dimension(), sp))
                                          : UncertaintySet(oracle::random_ellipsoid(rng, p.dimension(), 30, sp));
    const auto sols = oracle::all_solutions(p);
    const BinaryVector x = sols[static_cast<std::size_t>(rng.uniform(0, static_cast<std::int64_t>(sols.size()) - 1))];
    const double reg = oracle::regret(p, set, x);
    SubproblemEngine eng;
    const Separation s1 = separate(p, set, x, CutType::Type1, eng);
    const Separation s2 = separate(p, set, x, CutType::Type2, eng);
    EXPECT_NEAR(s1.regret, reg, tol_for(reg));
    EXPECT_NEAR(cut_value(set, s1.cut, x), reg, tol_for(reg));
    EXPECT_NEAR(cut_value(set, s2.cut, x), reg, tol_for(reg));
    // cuts are valid lower bounds elsewhere
    for (const auto& other : sols) {
      const double r = oracle::regret(p, set, other);
      EXPECT_LE(cut_value(set, s1.cut, other), r + tol_for(r));
      EXPECT_LE(cut_value(set, s2.cut, other), r + tol_for(r));
    }
  }
}

TEST(SolveFinite, PartitionGadget) {
  const SolveGadget g = gadget_finite_solve({1, 2, 3});
  const SolveReport r = solve_finite(g.problem, std::get<FiniteSet>(g.set));
  EXPECT_EQ(r.status, SolveStatus::Optimal);
  EXPECT_NEAR(r.regret, 3.0, 1e-9);
  EXPECT_NEAR(r.lower_bound, 3.0, 1e-9);
  EXPECT_EQ(r.cuts.size(), 2u);
}

TEST(SolveFinite, DegenerateLineMatchesTwoScenarios) {
  Rng rng(42);
  for (int t = 0; t < 20; ++t) {
    const auto a = oracle::random_partition_list(rng, 8, 20);
    const SolveGadget fin = gadget_finite_solve(a);
    const SolveGadget line = gadget_line_ellipsoid(a);
    const double v_fin = solve_finite(fin.problem, std::get<FiniteSet>(fin.set)).regret;
    const double v_line = solve_regret(line.problem, line.set).regret;
    EXPECT_NEAR(v_fin, v_line, 1e-6 * fin.total);
    EXPECT_NEAR(v_fin, oracle::min_regret(fin.problem, fin.set).value, 1e-9);
    if (oracle::has_equal_split(a)) {
      EXPECT_NEAR(v_fin, fin.threshold, 1e-9);
    } else {
      EXPECT_GT(v_fin, fin.threshold);
    }
  }
}

TEST(SolveRegret, AllMethodsMatchEnumeration) {
  Rng rng(43);
  for (int t = 0; t < 40; ++t) {
    const bool sp = t % 2 == 1;
    const auto p = sp ? CombinatorialProblem::shortest_path(layered_graph(static_cast<int>(rng.uniform(1, 2))))
                      : CombinatorialProblem::unconstrained(static_cast<std::size_t>(rng.uniform(2, 8)));
    auto draw = [&]() -> UncertaintySet {
      switch (t % 4) {
        case 0: return oracle::random_interval(rng, p.dimension(), sp);
        case 1: return oracle::random_axis(rng, p.dimension(), sp);
        default: return oracle::random_ellipsoid(rng, p.dimension(), 40, sp);
      }
    };
    const UncertaintySet set = draw();
    const auto truth = oracle::min_regret(p, set);
    for (const char* m : kMethods) {
      for (MasterMode mode : {MasterMode::BranchAndBound, MasterMode::Enumeration}) {
        RelaxConfig cfg = relax_config_for(m);
        cfg.master_mode = mode;
        const SolveReport r = solve_regret(p, set, cfg);
        EXPECT_EQ(r.status, SolveStatus::Optimal) << m;
        EXPECT_NEAR(r.regret, truth.value, tol_for(truth.value)) << m;
        EXPECT_NEAR(oracle::regret(p, set, r.incumbent), truth.value, tol_for(truth.value)) << m;
        EXPECT_LE(r.lower_bound, r.regret + 1e-9);
      }
    }
  }
}

TEST(SolveRegret, TraceLowerBoundsAreMonotone) {
  Rng rng(44);
  for (int t = 0; t < 10; ++t) {
    const auto p = CombinatorialProblem::unconstrained(10);
    const auto ell = oracle::random_ellipsoid(rng, 10, 25);
    const SolveReport r = solve_regret(p, ell, relax_config_for("C1-B"));
    ASSERT_FALSE(r.trace.empty());
    for (std::size_t i = 1; i < r.trace.size(); ++i) {
      EXPECT_GE(r.trace[i].z_lower, r.trace[i - 1].z_lower);
      EXPECT_LE(r.trace[i].upper, r.trace[i - 1].upper);
    }
    EXPECT_GE(r.separations.size(), r.cuts.size());
  }
}

TEST(SolveRegret, SeparationRecordsAreConsistent) {
  Rng rng(45);
  for (int t = 0; t < 10; ++t) {
    const auto p = CombinatorialProblem::shortest_path(layered_graph(2));
    const auto ell = oracle::random_ellipsoid(rng, p.dimension(), 25, true);
    const SolveReport r = solve_regret(p, ell, relax_config_for("C2-B"));
    for (const SeparationRecord& rec : r.separations) {
      const double reg = oracle::support(ell, oracle::diff(rec.x, rec.rival));
      EXPECT_NEAR(rec.x.dot(rec.scenario) - rec.nominal_opt, reg, 1e-9 * std::max(1.0, reg));
      EXPECT_NEAR(rec.rival.dot(rec.scenario), rec.nominal_opt, 1e-9 * std::max(1.0, reg));
    }
  }
}

TEST(SolveRegret, NodeLimitStopsWithValidBounds) {
  const Instance inst = generate({Family::I, 30, Deviation::Large, 25, 5});
  RelaxConfig cfg = relax_config_for("C2-A");
  cfg.node_limit = 2;
  const SolveReport r = solve_regret(inst.problem, inst.set, cfg);
  EXPECT_EQ(r.status, SolveStatus::TimeLimit);
  EXPECT_LE(r.lower_bound, r.regret);
  EXPECT_TRUE(std::isfinite(r.regret));
}

TEST(SolveRegret, RecordTraceOff) {
  const Instance inst = generate({Family::I, 6, Deviation::Small, 15, 3});
  RelaxConfig cfg;
  cfg.record_trace = false;
  const SolveReport r = solve_regret(inst.problem, inst.set, cfg);
  EXPECT_TRUE(r.trace.empty());
  EXPECT_EQ(r.status, SolveStatus::Optimal);
}

TEST(SolveRegret, ShortestPathNeedsNonnegativeCenter) {
  const auto p = CombinatorialProblem::shortest_path(layered_graph(1));
  Vector c(p.dimension(), 1.0);
  c[0] = -1.0;
  EXPECT_THROW(solve_regret(p, GeneralEllipsoid(c, Matrix::identity(p.dimension()))), InputError);
  EXPECT_THROW(solve_regret(p, IntervalSet(c, Vector(p.dimension(), 0.0))), InputError);
}

TEST(SolveRegret, RejectsBadConfig) {
  const auto p = CombinatorialProblem::unconstrained(2);
  RelaxConfig cfg;
  cfg.gap = 0.0;
  EXPECT_THROW(solve_regret(p, IntervalSet({0, 0}, {1, 1}), cfg), InputError);
  EXPECT_THROW(solve_regret(p, IntervalSet({0, 0, 0}, {1, 1, 1})), InputError);
}
