/**
 * @file oracle.hpp
 * @brief Nominal solvers opt(c) and feasible-set enumeration for the
 * unconstrained problem and for s-t paths.
 */

#ifndef MMR_ORACLE_HPP
#define MMR_ORACLE_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "mmr/core.hpp"

namespace mmr {

struct NominalResult {
  double value = 0.0;
  BinaryVector argmin;
};

/// Default cap for brute-force enumeration of X.
inline constexpr std::uint64_t kDefaultEnumerationLimit = std::uint64_t{1} << 22;

namespace detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Label-setting distances from `root` along (forward) or against (backward) arcs.
inline Vector dijkstra(const Digraph& g, const Vector& c, std::size_t root, bool forward) {
  Vector dist(g.num_nodes(), kInf);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[root] = 0.0;
  heap.emplace(0.0, root);
  while (!heap.empty()) {
    const auto [d, v] = heap.top();
    heap.pop();
    if (d > dist[v]) continue;
    const auto& arcs = forward ? g.out_arcs(v) : g.in_arcs(v);
    for (std::size_t k : arcs) {
      const std::size_t w = forward ? g.arc(k).head : g.arc(k).tail;
      const double nd = d + c[k];
      if (nd < dist[w]) {
        dist[w] = nd;
        heap.emplace(nd, w);
      }
    }
  }
  return dist;
}

inline Vector dag_distances(const Digraph& g, const Vector& c, std::size_t root, bool forward) {
  Vector dist(g.num_nodes(), kInf);
  dist[root] = 0.0;
  const auto& order = *g.topological_order();
  auto relax = [&](std::size_t v) {
    if (dist[v] == kInf) return;
    const auto& arcs = forward ? g.out_arcs(v) : g.in_arcs(v);
    for (std::size_t k : arcs) {
      const std::size_t w = forward ? g.arc(k).head : g.arc(k).tail;
      dist[w] = std::min(dist[w], dist[v] + c[k]);
    }
  };
  if (forward) {
    for (std::size_t v : order) relax(v);
  } else {
    for (auto it = order.rbegin(); it != order.rend(); ++it) relax(*it);
  }
  return dist;
}

// Among the arcs lying on some shortest path, drop arcs in index order while
// s-t connectivity survives; what remains is the lexicographically smallest
// shortest path incidence vector.
inline BinaryVector lexmin_shortest_path(const Digraph& g, const Vector& c, const Vector& from_s,
                                         const Vector& to_t) {
  const double best = from_s[g.sink()];
  double scale = 1.0;
  for (double v : from_s) {
    if (std::isfinite(v)) scale = std::max(scale, std::abs(v));
  }
  const double tol = 1e-9 * scale;
  std::vector<std::uint8_t> allowed(g.num_arcs(), 0);
  for (std::size_t k = 0; k < g.num_arcs(); ++k) {
    const Arc& a = g.arc(k);
    if (!std::isfinite(from_s[a.tail]) || !std::isfinite(to_t[a.head])) continue;
    if (std::abs(from_s[a.tail] + c[k] + to_t[a.head] - best) <= tol) allowed[k] = 1;
  }
  for (std::size_t k = 0; k < g.num_arcs(); ++k) {
    if (!allowed[k]) continue;
    allowed[k] = 0;
    if (!g.connected(allowed)) allowed[k] = 1;
  }
  return BinaryVector(std::move(allowed));
}

}  // namespace detail

/**
 * opt(c) = min_{y in X} c^T y and its minimizer.
 *
 * Unconstrained: y_i = 1 iff c_i < 0. Shortest path: label setting for
 * nonnegative costs, topological relaxation on acyclic graphs otherwise.
 * Ties resolve to the lexicographically smallest incidence vector.
 */
inline NominalResult nominal_opt(const CombinatorialProblem& problem, const Vector& c) {
  detail::require_dim(c.size(), problem.dimension(), "nominal cost vector");
  if (problem.is_unconstrained()) {
    NominalResult out{0.0, BinaryVector(c.size())};
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (c[i] < 0.0) {
        out.argmin.set(i, true);
        out.value += c[i];
      }
    }
    return out;
  }
  const Digraph& g = problem.graph();
  const bool nonnegative = std::all_of(c.begin(), c.end(), [](double v) { return v >= 0.0; });
  Vector from_s, to_t;
  if (nonnegative) {
    from_s = detail::dijkstra(g, c, g.source(), true);
    to_t = detail::dijkstra(g, c, g.sink(), false);
  } else if (g.acyclic()) {
    from_s = detail::dag_distances(g, c, g.source(), true);
    to_t = detail::dag_distances(g, c, g.sink(), false);
  } else {
    throw UnsupportedInput("negative arc cost on a graph with cycles");
  }
  if (!std::isfinite(from_s[g.sink()])) throw InfeasibleError("no s-t path");
  NominalResult out;
  out.argmin = detail::lexmin_shortest_path(g, c, from_s, to_t);
  out.value = out.argmin.dot(c);
  return out;
}

/// Number of s-t paths of an acyclic graph (saturating at UINT64_MAX).
inline std::uint64_t count_paths(const Digraph& g) {
  const auto& order = g.topological_order();
  if (!order) throw UnsupportedInput("path counting requires an acyclic graph");
  std::vector<std::uint64_t> ways(g.num_nodes(), 0);
  ways[g.source()] = 1;
  constexpr std::uint64_t cap = std::numeric_limits<std::uint64_t>::max();
  for (std::size_t v : *order) {
    if (ways[v] == 0) continue;
    for (std::size_t k : g.out_arcs(v)) {
      std::uint64_t& w = ways[g.arc(k).head];
      w = (w > cap - ways[v]) ? cap : w + ways[v];
    }
  }
  return ways[g.sink()];
}

/**
 * Calls visit(y) once for every y in X. Unconstrained: binary counting with
 * bit i taken from bit i of the counter. Shortest path: depth-first over
 * simple s-t paths, arcs explored in index order.
 *
 * Throws EnumerationOverflow if |X| > limit.
 */
template <typename Visitor>
void for_each_feasible(const CombinatorialProblem& problem, std::uint64_t limit, Visitor&& visit) {
  const std::size_t n = problem.dimension();
  if (problem.is_unconstrained()) {
    if (n >= 63 || (std::uint64_t{1} << n) > limit) {
      throw EnumerationOverflow("2^" + std::to_string(n) + " solutions exceed the limit");
    }
    const std::uint64_t total = std::uint64_t{1} << n;
    BinaryVector y(n);
    for (std::uint64_t k = 0; k < total; ++k) {
      for (std::size_t i = 0; i < n; ++i) y.set(i, (k >> i) & 1U);
      visit(static_cast<const BinaryVector&>(y));
    }
    return;
  }
  const Digraph& g = problem.graph();
  if (g.acyclic() && count_paths(g) > limit) {
    throw EnumerationOverflow("number of s-t paths exceeds the limit");
  }
  std::vector<std::uint8_t> on_path(g.num_nodes(), 0);
  BinaryVector y(n);
  std::uint64_t produced = 0;
  // iterative DFS: stack of (node, next out-arc position)
  std::vector<std::pair<std::size_t, std::size_t>> stack;
  std::vector<std::size_t> path_arcs;
  stack.emplace_back(g.source(), 0);
  on_path[g.source()] = 1;
  while (!stack.empty()) {
    auto& [v, pos] = stack.back();
    if (v == g.sink()) {
      if (++produced > limit) throw EnumerationOverflow("number of s-t paths exceeds the limit");
      visit(static_cast<const BinaryVector&>(y));
      on_path[v] = 0;
      stack.pop_back();
      if (!path_arcs.empty()) {
        y.set(path_arcs.back(), false);
        path_arcs.pop_back();
      }
      continue;
    }
    const auto& arcs = g.out_arcs(v);
    if (pos == arcs.size()) {
      on_path[v] = 0;
      stack.pop_back();
      if (!path_arcs.empty()) {
        y.set(path_arcs.back(), false);
        path_arcs.pop_back();
      }
      continue;
    }
    const std::size_t k = arcs[pos++];
    const std::size_t w = g.arc(k).head;
    if (on_path[w]) continue;
    on_path[w] = 1;
    y.set(k, true);
    path_arcs.push_back(k);
    stack.emplace_back(w, 0);
  }
}

inline std::vector<BinaryVector> enumerate_feasible(const CombinatorialProblem& problem,
                                                    std::uint64_t limit) {
  std::vector<BinaryVector> out;
  for_each_feasible(problem, limit, [&](const BinaryVector& y) { out.push_back(y); });
  return out;
}

}  // namespace mmr

#endif  // MMR_ORACLE_HPP
