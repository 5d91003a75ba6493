/**
 * @file regret_eval.hpp
 * @brief Reg(x, U) = max_{c in U} (c^T x - opt(c)) for every set class.
 */

#ifndef MMR_REGRET_EVAL_HPP
#define MMR_REGRET_EVAL_HPP

#include <cstdint>
#include <limits>
#include <vector>

#include "mmr/core.hpp"
#include "mmr/oracle.hpp"
#include "mmr/subproblem.hpp"
#include "mmr/uncert.hpp"

namespace mmr {

/// Worst-case scenario of an interval set for x: upper bounds on x, lower elsewhere.
inline Vector interval_worst_scenario(const IntervalSet& set, const BinaryVector& x) {
  Vector c(set.dimension());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = x[i] ? set.upper(i) : set.lower(i);
  return c;
}

/// Closed form for intervals; one nominal solve at the worst-case scenario.
inline double eval_interval(const CombinatorialProblem& problem, const IntervalSet& set,
                            const BinaryVector& x) {
  detail::require_dim(set.dimension(), problem.dimension(), "interval set");
  problem.require_feasible(x);
  const Vector c = interval_worst_scenario(set, x);
  if (problem.is_unconstrained()) {
    double reg = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (x[i]) reg += c[i];
      reg -= std::min(0.0, c[i]);
    }
    return reg;
  }
  return x.dot(c) - nominal_opt(problem, c).value;
}

/// max_j (c_j^T x - opt(c_j)).
inline double eval_finite(const CombinatorialProblem& problem, const FiniteSet& set,
                          const BinaryVector& x) {
  detail::require_dim(set.dimension(), problem.dimension(), "finite set");
  problem.require_feasible(x);
  double best = -std::numeric_limits<double>::infinity();
  for (const Vector& c : set.scenarios()) {
    best = std::max(best, x.dot(c) - nominal_opt(problem, c).value);
  }
  return best;
}

/// Regret under an ellipsoid through the configured (SUB) engine.
inline double eval_ellipsoid(const CombinatorialProblem& problem, const GeneralEllipsoid& set,
                             const BinaryVector& x, SubproblemEngine& engine) {
  return solve_sub(engine, problem, set, x).value;
}

/// Independent oracle: max over all feasible rivals y of support(U, x - y).
inline double eval_bruteforce(const CombinatorialProblem& problem, const UncertaintySet& set,
                              const BinaryVector& x,
                              std::uint64_t limit = kDefaultEnumerationLimit) {
  detail::require_dim(dimension(set), problem.dimension(), "uncertainty set");
  problem.require_feasible(x);
  double best = -std::numeric_limits<double>::infinity();
  for_each_feasible(problem, limit, [&](const BinaryVector& y) {
    best = std::max(best, support(set, x.minus(y)).value);
  });
  return best;
}

/// Dispatches to the evaluator matching the set class.
inline double eval_regret(const CombinatorialProblem& problem, const UncertaintySet& set,
                          const BinaryVector& x, SubproblemEngine& engine) {
  if (const auto* box = std::get_if<IntervalSet>(&set)) return eval_interval(problem, *box, x);
  if (const auto* fin = std::get_if<FiniteSet>(&set)) return eval_finite(problem, *fin, x);
  if (const auto* axis = std::get_if<AxisParallelEllipsoid>(&set)) {
    return eval_ellipsoid(problem, as_general_ellipsoid(*axis), x, engine);
  }
  return eval_ellipsoid(problem, std::get<GeneralEllipsoid>(set), x, engine);
}

struct BruteForceOptimum {
  BinaryVector x;
  double regret = std::numeric_limits<double>::infinity();
};

/**
 * Minimum regret over all of X by pairwise enumeration (|X|^2 support
 * evaluations). Ties keep the first x in enumeration order. Throws
 * EnumerationOverflow if |X| exceeds `limit`.
 */
inline BruteForceOptimum min_regret_bruteforce(const CombinatorialProblem& problem,
                                               const UncertaintySet& set,
                                               std::uint64_t limit = std::uint64_t{1} << 12) {
  detail::require_dim(dimension(set), problem.dimension(), "uncertainty set");
  const std::vector<BinaryVector> all = enumerate_feasible(problem, limit);
  if (all.empty()) throw InfeasibleError("feasible set is empty");
  BruteForceOptimum best;
  for (const BinaryVector& x : all) {
    double reg = -std::numeric_limits<double>::infinity();
    for (const BinaryVector& y : all) reg = std::max(reg, support(set, x.minus(y)).value);
    if (reg < best.regret) {
      best.regret = reg;
      best.x = x;
    }
  }
  return best;
}

}  // namespace mmr

#endif  // MMR_REGRET_EVAL_HPP
