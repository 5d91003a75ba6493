#include <gtest/gtest.h>

#include "mmr/gadgets.hpp"
#include "mmr/gen.hpp"
#include "mmr/regret_eval.hpp"
#include "oracles.hpp"

using namespace mmr;

namespace {

SubproblemEngine engine_for(SubMode m) {
  SubproblemEngine e;
  e.mode = m;
  return e;
}

BinaryVector random_solution(Rng& rng, const CombinatorialProblem& p) {
  const auto all = oracle::all_solutions(p);
  return all[static_cast<std::size_t>(rng.uniform(0, static_cast<std::int64_t>(all.size()) - 1))];
}

}  // namespace

TEST(EvalInterval, SmallExampleAgainstExtremeScenarios) {
  const auto p = CombinatorialProblem::unconstrained(2);
  const IntervalSet box({1, -1}, {1, 1});
  const BinaryVector x = BinaryVector::parse("10");
  // brute force: 4 extreme scenarios x 4 rivals
  double best = -1e300;
  for (int s = 0; s < 4; ++s) {
    const Vector c{(s & 1) ? 2.0 : 0.0, (s & 2) ? 0.0 : -2.0};
    double opt = 1e300;
    for (const auto& y : oracle::all_solutions(p)) opt = std::min(opt, y.dot(c));
    best = std::max(best, x.dot(c) - opt);
  }
  EXPECT_DOUBLE_EQ(best, 4.0);
  EXPECT_DOUBLE_EQ(eval_interval(p, box, x), 4.0);
}

TEST(EvalInterval, NoUncertaintyAtNominalArgmin) {
  Rng rng(2);
  const auto p = CombinatorialProblem::shortest_path(layered_graph(2));
  const Vector c = oracle::random_vector(rng, p.dimension(), 0, 100);
  const IntervalSet box(c, Vector(c.size(), 0.0));
  EXPECT_NEAR(eval_interval(p, box, nominal_opt(p, c).argmin), 0.0, 1e-12);
}

TEST(EvalInterval, ShortestPathMatchesBruteForce) {
  Rng rng(3);
  const auto p = CombinatorialProblem::shortest_path(layered_graph(2));
  for (int t = 0; t < 50; ++t) {
    const auto box = oracle::random_interval(rng, p.dimension(), true);
    const BinaryVector x = random_solution(rng, p);
    EXPECT_NEAR(eval_interval(p, box, x), oracle::regret(p, box, x), 1e-6);
  }
}

TEST(EvalInterval, RejectsInfeasibleSolution) {
  const auto p = CombinatorialProblem::shortest_path(layered_graph(2));
  EXPECT_THROW(eval_interval(p, IntervalSet(Vector(p.dimension(), 1.0), Vector(p.dimension(), 0.0)),
                             BinaryVector(p.dimension())),
               InputError);
}

TEST(EvalFinite, TwoScenarioPartitionExample) {
  const SolveGadget g = gadget_finite_solve({1, 2, 3});
  const auto& fin = std::get<FiniteSet>(g.set);
  EXPECT_DOUBLE_EQ(eval_finite(g.problem, fin, BinaryVector::parse("001")), 3.0);
  double best = 1e300;
  for (const auto& x : oracle::all_solutions(g.problem)) {
    best = std::min(best, oracle::regret_finite_definition(g.problem, fin, x));
  }
  EXPECT_DOUBLE_EQ(best, 3.0);
}

TEST(EvalFinite, SingleScenario) {
  const auto p = CombinatorialProblem::unconstrained(3);
  const FiniteSet one({{1, -2, 4}});
  EXPECT_DOUBLE_EQ(eval_finite(p, one, BinaryVector::parse("111")), 3.0 - (-2.0));
  EXPECT_DOUBLE_EQ(eval_finite(p, one, BinaryVector::parse("010")), 0.0);
}

TEST(EvalFinite, RandomMatchesDefinition) {
  Rng rng(5);
  const auto p = CombinatorialProblem::unconstrained(10);
  for (int t = 0; t < 20; ++t) {
    const auto fin = oracle::random_finite(rng, 10, 3);
    const BinaryVector x = random_solution(rng, p);
    EXPECT_NEAR(eval_finite(p, fin, x), oracle::regret_finite_definition(p, fin, x), 1e-9);
  }
}

TEST(EvalEllipsoid, SingletonFeasibleSet) {
  // a single s-t arc
  const auto p = CombinatorialProblem::shortest_path(Digraph(2, {{0, 1}}, 0, 1));
  const GeneralEllipsoid e({4}, Matrix::identity(1));
  for (SubMode m : {SubMode::BruteForce, SubMode::LinearizationA, SubMode::LinearizationB}) {
    SubproblemEngine eng = engine_for(m);
    EXPECT_NEAR(eval_ellipsoid(p, e, BinaryVector::parse("1"), eng), 0.0, 1e-12);
  }
}

TEST(EvalEllipsoid, PartitionGadgetYesAndNo) {
  for (SubMode m : {SubMode::BruteForce, SubMode::LinearizationA, SubMode::LinearizationB}) {
    SubproblemEngine eng = engine_for(m);
    const EvalGadget yes = gadget_up_eval({1, 1});
    const auto ye = as_general_ellipsoid(std::get<AxisParallelEllipsoid>(yes.set));
    EXPECT_NEAR(eval_ellipsoid(yes.problem, ye, yes.x, eng), 2.0, 1e-9);
    EXPECT_NEAR(oracle::regret(yes.problem, yes.set, yes.x), 2.0, 1e-9);

    const EvalGadget no = gadget_up_eval({1, 3});
    const auto ne = as_general_ellipsoid(std::get<AxisParallelEllipsoid>(no.set));
    EXPECT_LT(eval_ellipsoid(no.problem, ne, no.x, eng), 4.0 - 1e-6);
    EXPECT_LT(oracle::regret(no.problem, no.set, no.x), 4.0 - 1e-6);
  }
}

TEST(EvalBruteForce, MatchesEveryEvaluator) {
  Rng rng(6);
  for (int t = 0; t < 60; ++t) {
    const std::size_t n = static_cast<std::size_t>(rng.uniform(2, 9));
    const auto p = CombinatorialProblem::unconstrained(n);
    const BinaryVector x = random_solution(rng, p);
    const auto box = oracle::random_interval(rng, n);
    const auto fin = oracle::random_finite(rng, n, 3);
    const auto ell = oracle::random_ellipsoid(rng, n, 25);
    EXPECT_NEAR(eval_bruteforce(p, box, x), eval_interval(p, box, x), 1e-6);
    EXPECT_NEAR(eval_bruteforce(p, fin, x), eval_finite(p, fin, x), 1e-6);
    EXPECT_NEAR(eval_bruteforce(p, ell, x), oracle::regret(p, ell, x), 1e-6);
    for (SubMode m : {SubMode::LinearizationA, SubMode::LinearizationB}) {
      SubproblemEngine eng = engine_for(m);
      EXPECT_NEAR(eval_ellipsoid(p, ell, x, eng), eval_bruteforce(p, ell, x), 1e-6);
    }
  }
}

TEST(EvalProperties, NonnegativeAndMonotoneInSetSize) {
  Rng rng(7);
  for (int t = 0; t < 50; ++t) {
    const auto p = CombinatorialProblem::unconstrained(6);
    const BinaryVector x = random_solution(rng, p);
    const auto ell = oracle::random_ellipsoid(rng, 6, 25);
    const GeneralEllipsoid smaller(ell.center(), ell.shape().scaled(0.5));
    const double full = eval_bruteforce(p, ell, x);
    EXPECT_GE(full, -1e-9);
    EXPECT_LE(eval_bruteforce(p, smaller, x), full + 1e-9);

    const auto box = oracle::random_interval(rng, 6);
    Vector half = box.halfwidth();
    for (double& d : half) d *= 0.5;
    EXPECT_LE(eval_interval(p, IntervalSet(box.center(), half), x), eval_interval(p, box, x) + 1e-9);
  }
}

TEST(MinRegretBruteForce, MatchesIndependentDoubleEnumeration) {
  Rng rng(8);
  for (int t = 0; t < 30; ++t) {
    const auto p = CombinatorialProblem::unconstrained(5);
    const auto ell = oracle::random_ellipsoid(rng, 5, 25);
    EXPECT_NEAR(min_regret_bruteforce(p, ell).regret, oracle::min_regret(p, ell).value, 1e-9);
  }
  EXPECT_THROW(min_regret_bruteforce(CombinatorialProblem::unconstrained(13), IntervalSet(Vector(13, 0.0), Vector(13, 1.0))),
               EnumerationOverflow);
}
