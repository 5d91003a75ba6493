/**
 * @file gadgets.hpp
 * @brief Partition-based hardness instances and the subset-sum oracle used
 * to check their yes/no behaviour.
 */

#ifndef MMR_GADGETS_HPP
#define MMR_GADGETS_HPP

#include <cstdint>
#include <numeric>
#include <vector>

#include "mmr/core.hpp"

namespace mmr {

using PartitionList = std::vector<std::int64_t>;

namespace detail {

inline std::int64_t checked_total(const PartitionList& a) {
  detail::require(!a.empty(), "partition list must be nonempty");
  std::int64_t total = 0;
  for (std::int64_t v : a) {
    detail::require(v >= 1, "partition entries must be positive integers");
    total += v;
  }
  return total;
}

}  // namespace detail

/// Whether a splits into two halves of equal sum (subset-sum DP).
inline bool partition_oracle(const PartitionList& a) {
  const std::int64_t total = detail::checked_total(a);
  if (total % 2 != 0) return false;
  const auto target = static_cast<std::size_t>(total / 2);
  std::vector<std::uint8_t> reach(target + 1, 0);
  reach[0] = 1;
  for (std::int64_t v : a) {
    const auto w = static_cast<std::size_t>(v);
    if (w > target) continue;
    for (std::size_t s = target; s >= w; --s) {
      if (reach[s - w]) reach[s] = 1;
      if (s == w) break;
    }
  }
  return reach[target] != 0;
}

/// An evaluation instance whose regret at x reaches `threshold` iff the
/// partition instance is a yes-instance.
struct EvalGadget {
  CombinatorialProblem problem;
  UncertaintySet set;
  BinaryVector x;
  double threshold;
  /// Sum of the partition list; scales the comparison tolerance.
  double total;
};

/// A solve instance whose minimum regret equals `threshold` iff yes, and
/// exceeds it otherwise.
struct SolveGadget {
  CombinatorialProblem problem;
  UncertaintySet set;
  double threshold;
  double total;
};

/// value >= threshold up to 1e-6 * A.
inline bool reaches_threshold(double value, double threshold, double total) {
  return value >= threshold - 1e-6 * total;
}

/**
 * Unconstrained problem, axis-parallel ellipsoid with center 2a_i and
 * squared radii 8 A a_i, x = 0; threshold A.
 */
inline EvalGadget gadget_up_eval(const PartitionList& a) {
  const std::int64_t total = detail::checked_total(a);
  const std::size_t n = a.size();
  Vector center(n), radii_sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    center[i] = static_cast<double>(2 * a[i]);
    radii_sq[i] = static_cast<double>(8 * total * a[i]);
  }
  return {CombinatorialProblem::unconstrained(n),
          AxisParallelEllipsoid::from_inverse_diag(std::move(center), radii_sq),
          BinaryVector(n), static_cast<double>(total), static_cast<double>(total)};
}

/// Two scenarios a and -a on the unconstrained problem; threshold A/2.
inline SolveGadget gadget_finite_solve(const PartitionList& a) {
  const std::int64_t total = detail::checked_total(a);
  Vector plus(a.size()), minus(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    plus[i] = static_cast<double>(a[i]);
    minus[i] = -plus[i];
  }
  return {CombinatorialProblem::unconstrained(a.size()),
          FiniteSet({std::move(plus), std::move(minus)}), 0.5 * static_cast<double>(total),
          static_cast<double>(total)};
}

/// The segment between a and -a as a degenerate ellipsoid: center 0 and
/// shape a e_1^T.
inline SolveGadget gadget_line_ellipsoid(const PartitionList& a) {
  const std::int64_t total = detail::checked_total(a);
  const std::size_t n = a.size();
  Matrix shape(n, n);
  for (std::size_t i = 0; i < n; ++i) shape(i, 0) = static_cast<double>(a[i]);
  return {CombinatorialProblem::unconstrained(n), GeneralEllipsoid(Vector(n, 0.0), shape),
          0.5 * static_cast<double>(total), static_cast<double>(total)};
}

/// Default bypass cost 30 A^2 + 1.
inline std::int64_t default_gadget_m(const PartitionList& a) {
  const std::int64_t total = detail::checked_total(a);
  return 30 * total * total + 1;
}

/**
 * Shortest-path gadget. Nodes 0..n with s = 0 and t = n; arc 0 is the
 * bypass s -> t with (c, d) = (M, A); item k contributes two parallel arcs
 * k-1 -> k (arcs 2k-1 and 2k) with (28Aa_k + 3a_k, 28Aa_k - a_k) and
 * (28Aa_k, 4Aa_k - a_k). Squared radii are d, x is the bypass, and the
 * threshold is M - 28A^2 + 2.5A.
 */
inline EvalGadget gadget_sp_eval(const PartitionList& a, std::int64_t m) {
  const std::int64_t total = detail::checked_total(a);
  detail::require(m > 28 * total * total, "bypass cost M must exceed 28 A^2");
  const std::size_t n = a.size();
  std::vector<Arc> arcs;
  std::vector<std::int64_t> center, spread;
  arcs.push_back({0, n});
  center.push_back(m);
  spread.push_back(total);
  for (std::size_t k = 0; k < n; ++k) {
    const std::int64_t ak = a[k];
    arcs.push_back({k, k + 1});
    center.push_back(28 * total * ak + 3 * ak);
    spread.push_back(28 * total * ak - ak);
    arcs.push_back({k, k + 1});
    center.push_back(28 * total * ak);
    spread.push_back(4 * total * ak - ak);
  }
  Vector c(center.size()), d(center.size());
  for (std::size_t e = 0; e < center.size(); ++e) {
    if (!(center[e] >= spread[e] && spread[e] >= 1)) {
      throw std::logic_error("gadget arc data violates c_e >= d_e >= 1");
    }
    c[e] = static_cast<double>(center[e]);
    d[e] = static_cast<double>(spread[e]);
  }
  BinaryVector x(arcs.size());
  x.set(0, true);
  auto problem = CombinatorialProblem::shortest_path(Digraph(n + 1, std::move(arcs), 0, n));
  // (2M - 56A^2 + 5A) / 2 is exact in double
  const double threshold = static_cast<double>(2 * m - 56 * total * total + 5 * total) / 2.0;
  return {std::move(problem), AxisParallelEllipsoid::from_inverse_diag(std::move(c), d),
          std::move(x), threshold, static_cast<double>(total)};
}

inline EvalGadget gadget_sp_eval(const PartitionList& a) {
  return gadget_sp_eval(a, default_gadget_m(a));
}

}  // namespace mmr

#endif  // MMR_GADGETS_HPP
