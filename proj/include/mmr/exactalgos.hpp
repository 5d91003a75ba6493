/**
 * @file exactalgos.hpp
 * @brief The midpoint solution: optimal for axis-symmetric sets on the
 * unconstrained problem, and a 2-approximation for ellipsoids.
 */

#ifndef MMR_EXACTALGOS_HPP
#define MMR_EXACTALGOS_HPP

#include <cmath>
#include <limits>

#include "mmr/core.hpp"
#include "mmr/oracle.hpp"
#include "mmr/regret_eval.hpp"
#include "mmr/subproblem.hpp"
#include "mmr/uncert.hpp"

namespace mmr {

/// Nominal minimizer at the center of U. On the unconstrained problem
/// x_i = 1 iff c_i <= 0; finite sets use the scenario mean.
inline BinaryVector midpoint_solution(const CombinatorialProblem& problem,
                                      const UncertaintySet& set) {
  detail::require_dim(dimension(set), problem.dimension(), "uncertainty set");
  const Vector center = center_of(set);
  if (problem.is_unconstrained()) {
    BinaryVector x(center.size());
    for (std::size_t i = 0; i < center.size(); ++i) x.set(i, center[i] <= 0.0);
    return x;
  }
  return nominal_opt(problem, center).argmin;
}

struct MidpointResult {
  BinaryVector x;
  double regret = 0.0;
};

/**
 * Optimal solution of the unconstrained problem under an axis-symmetric set.
 * The regret is evaluated exactly: closed form for intervals, through
 * `engine` for ellipsoids.
 */
inline MidpointResult solve_up_axis_symmetric(const UncertaintySet& set,
                                              SubproblemEngine& engine) {
  if (!is_axis_symmetric(set)) throw InputError("uncertainty set is not axis-symmetric");
  const auto problem = CombinatorialProblem::unconstrained(dimension(set));
  MidpointResult out;
  out.x = midpoint_solution(problem, set);
  out.regret = eval_regret(problem, set, out.x, engine);
  return out;
}

inline MidpointResult solve_up_axis_symmetric(const UncertaintySet& set) {
  SubproblemEngine engine;
  engine.mode = SubMode::BruteForce;
  return solve_up_axis_symmetric(set, engine);
}

struct MidpointBound {
  BinaryVector x;
  /// Reg(x); at most twice the minimum regret.
  double upper = 0.0;
  double guarantee = 2.0;
};

inline MidpointBound midpoint_bound(const CombinatorialProblem& problem,
                                    const GeneralEllipsoid& set, SubproblemEngine& engine) {
  MidpointBound out;
  out.x = midpoint_solution(problem, set);
  out.upper = eval_ellipsoid(problem, set, out.x, engine);
  return out;
}

/// Reg(midpoint) / OPT, defined as 1 when OPT = 0.
inline double approximation_ratio(double midpoint_regret, double optimum) {
  if (std::abs(optimum) <= kOptTol) {
    return std::abs(midpoint_regret) <= kOptTol ? 1.0 : std::numeric_limits<double>::infinity();
  }
  return midpoint_regret / optimum;
}

}  // namespace mmr

#endif  // MMR_EXACTALGOS_HPP
