/**
 * @file subproblem.hpp
 * @brief The separation problem max_{y in X} c^T(x-y) + ||C^T(x-y)||_2 for
 * ellipsoidal sets: brute force plus the two 0-1 linearizations.
 */

#ifndef MMR_SUBPROBLEM_HPP
#define MMR_SUBPROBLEM_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mmr/bip.hpp"
#include "mmr/core.hpp"
#include "mmr/oracle.hpp"
#include "mmr/uncert.hpp"

namespace mmr {

enum class SubMode { BruteForce, LinearizationA, LinearizationB };

inline const char* to_string(SubMode m) {
  switch (m) {
    case SubMode::BruteForce: return "brute";
    case SubMode::LinearizationA: return "A";
    case SubMode::LinearizationB: return "B";
  }
  return "unknown";
}

/// Per-caller solver configuration. Holds mutable counters; one per worker.
struct SubproblemEngine {
  SubMode mode = SubMode::LinearizationB;
  bip::Budget budget;
  bip::Options options;
  std::uint64_t enumeration_limit = kDefaultEnumerationLimit;
  /// Incremented whenever a linearized optimum disagreed with the exact
  /// objective by more than 1e-5 and had to be re-solved.
  int stability_incidents = 0;
};

struct SubResult {
  /// Objective at `rival` (a lower bound on Reg(x) if not Optimal).
  double value = 0.0;
  BinaryVector rival;
  Vector scenario;
  SolveStatus status = SolveStatus::Optimal;
  /// Proven upper bound on Reg(x).
  double bound = 0.0;
};

/// c^T(x - y) + ||C^T(x - y)||_2, the support function of the set at x - y.
inline double sub_objective(const GeneralEllipsoid& set, const BinaryVector& x,
                            const BinaryVector& y) {
  const Vector v = x.minus(y);
  return dot(set.center(), v) + norm2(set.shape().transpose_times(v));
}

namespace detail {

inline void attach_path_hook(bip::BinaryProgram& prog, const CombinatorialProblem& problem,
                             const std::vector<std::size_t>& y_vars) {
  if (problem.is_shortest_path()) prog.set_path_hook({problem.graph(), y_vars});
}

}  // namespace detail

/**
 * Linearization with pairwise product variables alpha_jk = y_j y_k (j < k).
 * Variables 0..n-1 are y, followed by the alphas in (j, k) lexicographic order.
 * The program maximizes c^T(x - y) + sqrt(vQv) with vQv expanded linearly.
 */
inline bip::BinaryProgram build_linearization_A(const CombinatorialProblem& problem,
                                                const GeneralEllipsoid& set,
                                                const BinaryVector& x) {
  const std::size_t n = problem.dimension();
  detail::require_dim(set.dimension(), n, "ellipsoid");
  detail::require_dim(x.size(), n, "solution");
  const Matrix& q = set.gram();
  const Vector& c = set.center();

  bip::BinaryProgram prog;
  std::vector<std::size_t> y(n);
  for (std::size_t j = 0; j < n; ++j) y[j] = prog.add_binary(1);

  bip::Objective& obj = prog.objective();
  obj.sense = bip::Sense::Maximize;
  obj.linear.constant = x.dot(c);
  for (std::size_t j = 0; j < n; ++j) obj.linear.add(y[j], -c[j]);

  bip::SqrtTerm root;
  bip::AffineExpr& arg = root.argument;
  for (std::size_t j = 0; j < n; ++j) {
    // diagonal: (x_j - y_j)^2 = x_j - 2 x_j y_j + y_j
    arg.constant += q(j, j) * x[j];
    double coef = q(j, j) * (1.0 - 2.0 * x[j]);
    for (std::size_t k = 0; k < n; ++k) {
      if (k != j) coef -= 2.0 * q(j, k) * x[k];
    }
    arg.add(y[j], coef);
  }
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = j + 1; k < n; ++k) {
      const std::size_t alpha = prog.add_binary(0);
      arg.constant += 2.0 * q(j, k) * x[j] * x[k];
      arg.add(alpha, 2.0 * q(j, k));

      bip::Constraint upper;  // y_j + y_k <= 1 + alpha
      upper.lhs.add(y[j], 1.0);
      upper.lhs.add(y[k], 1.0);
      upper.lhs.add(alpha, -1.0);
      upper.rhs = 1.0;
      prog.add_constraint(upper);

      bip::Constraint lower;  // 2 alpha <= y_j + y_k
      lower.lhs.add(alpha, 2.0);
      lower.lhs.add(y[j], -1.0);
      lower.lhs.add(y[k], -1.0);
      lower.rhs = 0.0;
      prog.add_constraint(lower);
    }
  }
  root.nonnegative = true;
  obj.roots.push_back(std::move(root));
  detail::attach_path_hook(prog, problem, y);
  return prog;
}

/**
 * Linearization with one envelope variable h_j = v_j (Qv)_j per index.
 * Variables 0..n-1 are y, n..2n-1 are h. The big-M constants are the
 * tightest bounds of (Qv)_j over v in x - {0,1}^n; for Q >= 0 they reduce
 * to M+_j = sum_i q_ji x_i and M-_j = sum_i q_ji (1 - x_i).
 */
inline bip::BinaryProgram build_linearization_B(const CombinatorialProblem& problem,
                                                const GeneralEllipsoid& set,
                                                const BinaryVector& x) {
  const std::size_t n = problem.dimension();
  detail::require_dim(set.dimension(), n, "ellipsoid");
  detail::require_dim(x.size(), n, "solution");
  const Matrix& q = set.gram();
  const Vector& c = set.center();
  constexpr double inf = std::numeric_limits<double>::infinity();

  bip::BinaryProgram prog;
  std::vector<std::size_t> y(n), h(n);
  for (std::size_t j = 0; j < n; ++j) y[j] = prog.add_binary(1);
  for (std::size_t j = 0; j < n; ++j) h[j] = prog.add_continuous(-inf, inf);

  bip::Objective& obj = prog.objective();
  obj.sense = bip::Sense::Maximize;
  obj.linear.constant = x.dot(c);
  for (std::size_t j = 0; j < n; ++j) obj.linear.add(y[j], -c[j]);
  bip::SqrtTerm root;
  for (std::size_t j = 0; j < n; ++j) root.argument.add(h[j], 1.0);
  root.nonnegative = true;
  obj.roots.push_back(std::move(root));

  for (std::size_t j = 0; j < n; ++j) {
    double m_plus = 0.0, m_minus = 0.0, qx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double qji = q(j, i);
      qx += qji * x[i];
      if (x[i]) {
        m_plus += std::max(qji, 0.0);
        m_minus += std::max(-qji, 0.0);
      } else {
        m_plus += std::max(-qji, 0.0);
        m_minus += std::max(qji, 0.0);
      }
    }
    bip::Constraint first, second;
    first.lhs.add(h[j], 1.0);
    second.lhs.add(h[j], 1.0);
    if (x[j]) {
      // h_j <= (Qv)_j + M-_j (1 - v_j),  h_j <= M+_j v_j
      for (std::size_t i = 0; i < n; ++i) first.lhs.add(y[i], q(j, i));
      first.lhs.add(y[j], -m_minus);
      first.rhs = qx;
      second.lhs.add(y[j], m_plus);
      second.rhs = m_plus;
    } else {
      // h_j <= -(Qv)_j + M+_j (1 + v_j),  h_j <= -M-_j v_j
      for (std::size_t i = 0; i < n; ++i) first.lhs.add(y[i], -q(j, i));
      first.lhs.add(y[j], m_plus);
      first.rhs = m_plus - qx;
      second.lhs.add(y[j], -m_minus);
      second.rhs = 0.0;
    }
    prog.add_constraint(std::move(first));
    prog.add_constraint(std::move(second));
  }
  detail::attach_path_hook(prog, problem, y);
  return prog;
}

namespace detail {

inline SubResult sub_bruteforce(const CombinatorialProblem& problem, const GeneralEllipsoid& set,
                                const BinaryVector& x, std::uint64_t limit) {
  SubResult out;
  out.value = -std::numeric_limits<double>::infinity();
  for_each_feasible(problem, limit, [&](const BinaryVector& y) {
    const double v = sub_objective(set, x, y);
    if (v > out.value) {
      out.value = v;
      out.rival = y;
    }
  });
  out.bound = out.value;
  return out;
}

inline BinaryVector rival_from(const std::vector<double>& assignment, std::size_t n) {
  BinaryVector y(n);
  for (std::size_t j = 0; j < n; ++j) y.set(j, assignment[j] > 0.5);
  return y;
}

}  // namespace detail

/**
 * Solves (SUB) at x. The returned scenario c* = c + C xi* with
 * xi* = C^T(x - y*) / ||C^T(x - y*)|| attains c*^T(x - y*) = value.
 */
inline SubResult solve_sub(SubproblemEngine& engine, const CombinatorialProblem& problem,
                           const GeneralEllipsoid& set, const BinaryVector& x) {
  const std::size_t n = problem.dimension();
  detail::require_dim(set.dimension(), n, "ellipsoid");
  problem.require_feasible(x);

  SubResult out;
  if (engine.mode == SubMode::BruteForce) {
    out = detail::sub_bruteforce(problem, set, x, engine.enumeration_limit);
  } else {
    const bip::BinaryProgram prog = engine.mode == SubMode::LinearizationA
                                        ? build_linearization_A(problem, set, x)
                                        : build_linearization_B(problem, set, x);
    const bip::Result res = bip::solve(prog, engine.budget, engine.options);
    if (res.status == SolveStatus::Infeasible) {
      throw InfeasibleError("subproblem has no feasible rival");
    }
    out.status = res.status;
    // stopped before any incumbent: y = x is feasible and gives the trivial value 0
    out.rival = res.assignment.empty() ? x : detail::rival_from(res.assignment, n);
    out.value = sub_objective(set, x, out.rival);
    out.bound = std::max(res.bound, out.value);
    if (res.status == SolveStatus::Optimal && std::abs(out.value - res.value) > 1e-5) {
      ++engine.stability_incidents;
      out = detail::sub_bruteforce(problem, set, x, engine.enumeration_limit);
    }
  }
  out.scenario = support(set, x.minus(out.rival)).scenario;
  return out;
}

}  // namespace mmr

#endif  // MMR_SUBPROBLEM_HPP
