/**
 * @file gen.hpp
 * @brief Random instances: unconstrained family I and layered shortest-path
 * family J with dense-ish ellipsoidal uncertainty.
 *
 * Randomness comes from std::mt19937_64 (fully specified by the standard)
 * and a rejection-sampled integer draw, so instances are identical across
 * platforms. Each instance index gets its own substream seed.
 */

#ifndef MMR_GEN_HPP
#define MMR_GEN_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mmr/core.hpp"

namespace mmr {

enum class Family { I, J };
enum class Deviation { Small, Medium, Large };

inline char to_char(Family f) { return f == Family::I ? 'I' : 'J'; }
inline char to_char(Deviation d) {
  switch (d) {
    case Deviation::Small: return 's';
    case Deviation::Medium: return 'm';
    case Deviation::Large: return 'l';
  }
  return '?';
}

inline Family parse_family(const std::string& s) {
  if (s == "I") return Family::I;
  if (s == "J") return Family::J;
  throw InputError("family must be I or J");
}

inline Deviation parse_deviation(const std::string& s) {
  if (s == "s") return Deviation::Small;
  if (s == "m") return Deviation::Medium;
  if (s == "l") return Deviation::Large;
  throw InputError("deviation class must be s, m or l");
}

struct GenSpec {
  Family family = Family::I;
  /// Items for I, layers for J.
  int size = 10;
  Deviation deviation = Deviation::Small;
  /// Off-diagonal presence probability in percent.
  int density = 5;
  std::uint64_t seed = 0;

  /// Outside the full benchmark grid (other sizes or densities).
  bool extended() const {
    const bool paper_density = density == 5 || density == 15 || density == 25;
    if (family == Family::I) return !paper_density || size < 10 || size > 150 || (size - 10) % 20 != 0;
    return !paper_density || size < 2 || size > 9;
  }

  std::string name() const {
    return std::string(1, to_char(family)) + "_n" + std::to_string(size) + "_p" +
           std::to_string(density) + "_" + to_char(deviation) + "_s" + std::to_string(seed);
  }
};

struct Instance {
  CombinatorialProblem problem;
  GeneralEllipsoid set;
  /// Whether negative nominal costs were raised to zero (family J).
  bool center_clamped = false;
};

/// SplitMix64 finalizer; derives independent substream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master ^ splitmix64(index));
}

/// Seeded generator with a portable uniform integer draw.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform integer in [lo, hi].
  std::int64_t uniform(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t r;
    do {
      r = engine_();
    } while (r >= limit);
    return lo + static_cast<std::int64_t>(r % span);
  }

  /// True with probability percent / 100.
  bool chance(int percent) { return uniform(0, 99) < percent; }

 private:
  std::mt19937_64 engine_;
};

/// Layered graph: s, `layers` layers of `width` nodes, t; all forward arcs
/// between consecutive layers. Arcs ordered s-arcs, layer pairs, t-arcs.
inline Digraph layered_graph(int layers, int width = 4) {
  detail::require(layers >= 1 && width >= 1, "layered graph needs positive sizes");
  const auto L = static_cast<std::size_t>(layers), W = static_cast<std::size_t>(width);
  const std::size_t s = 0, t = 1 + L * W;
  auto node = [&](std::size_t layer, std::size_t j) { return 1 + layer * W + j; };
  std::vector<Arc> arcs;
  for (std::size_t j = 0; j < W; ++j) arcs.push_back({s, node(0, j)});
  for (std::size_t l = 0; l + 1 < L; ++l) {
    for (std::size_t a = 0; a < W; ++a) {
      for (std::size_t b = 0; b < W; ++b) arcs.push_back({node(l, a), node(l + 1, b)});
    }
  }
  for (std::size_t j = 0; j < W; ++j) arcs.push_back({node(L - 1, j), t});
  return Digraph(t + 1, std::move(arcs), s, t);
}

/**
 * Draw order: all nominal costs in {-100..100}, then C row by row with
 * diagonal entries in {50..150} and each off-diagonal entry present with
 * probability p, valued by the deviation class (small {1..50}, large
 * {50..200}, medium small w.p. 75% else large).
 */
inline Instance generate(const GenSpec& spec) {
  detail::require(spec.size >= 1, "instance size must be positive");
  detail::require(spec.density >= 0 && spec.density <= 100, "density must be a percentage");
  Rng rng(spec.seed);
  auto problem = spec.family == Family::I
                     ? CombinatorialProblem::unconstrained(static_cast<std::size_t>(spec.size))
                     : CombinatorialProblem::shortest_path(layered_graph(spec.size));
  const std::size_t n = problem.dimension();
  Vector center(n);
  bool clamped = false;
  for (std::size_t i = 0; i < n; ++i) {
    auto v = rng.uniform(-100, 100);
    if (spec.family == Family::J && v < 0) {
      v = 0;
      clamped = true;
    }
    center[i] = static_cast<double>(v);
  }
  Matrix shape(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) {
        shape(i, j) = static_cast<double>(rng.uniform(50, 150));
        continue;
      }
      if (!rng.chance(spec.density)) continue;
      bool large = spec.deviation == Deviation::Large;
      if (spec.deviation == Deviation::Medium) large = !rng.chance(75);
      shape(i, j) = static_cast<double>(large ? rng.uniform(50, 200) : rng.uniform(1, 50));
    }
  }
  return {std::move(problem), GeneralEllipsoid(std::move(center), std::move(shape)), clamped};
}

/**
 * Benchmark grid: every (n, p, class) combination with 10 seeds. The full
 * grid uses I with n in {10, 30, ..., 150} and J with 2..9 layers;
 * the desk grid uses I with n in {10, 30} and J with 2..4 layers.
 */
inline std::vector<GenSpec> grid(Family family, bool paper_scale, std::uint64_t master_seed = 1,
                                 int seeds_per_set = 10) {
  std::vector<int> sizes;
  if (family == Family::I) {
    sizes = paper_scale ? std::vector<int>{10, 30, 50, 70, 90, 110, 130, 150}
                        : std::vector<int>{10, 30};
  } else {
    sizes = paper_scale ? std::vector<int>{2, 3, 4, 5, 6, 7, 8, 9} : std::vector<int>{2, 3, 4};
  }
  std::vector<GenSpec> out;
  std::uint64_t index = 0;
  for (int n : sizes) {
    for (int p : {5, 15, 25}) {
      for (Deviation d : {Deviation::Small, Deviation::Medium, Deviation::Large}) {
        for (int k = 0; k < seeds_per_set; ++k) {
          out.push_back({family, n, d, p, substream_seed(master_seed, index++)});
        }
      }
    }
  }
  return out;
}

}  // namespace mmr

#endif  // MMR_GEN_HPP
