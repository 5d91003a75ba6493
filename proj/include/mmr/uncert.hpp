/**
 * @file uncert.hpp
 * @brief Support functions, worst-case scenarios and membership tests for
 * the four uncertainty-set classes.
 */

#ifndef MMR_UNCERT_HPP
#define MMR_UNCERT_HPP

#include <cmath>
#include <optional>

#include "mmr/core.hpp"

namespace mmr {

/// max_{c in U} c^T w together with a maximizer.
struct WorstCase {
  double value = 0.0;
  Vector scenario;
};

namespace detail {

inline WorstCase support_of(const IntervalSet& set, const Vector& w) {
  WorstCase out{0.0, set.center()};
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double d = set.halfwidth()[i];
    out.value += set.center()[i] * w[i] + d * std::abs(w[i]);
    if (w[i] > 0.0) {
      out.scenario[i] += d;
    } else if (w[i] < 0.0) {
      out.scenario[i] -= d;
    }
  }
  return out;
}

inline WorstCase support_of(const FiniteSet& set, const Vector& w) {
  std::size_t best = 0;
  double best_value = dot(set[0], w);
  for (std::size_t j = 1; j < set.size(); ++j) {
    const double v = dot(set[j], w);
    if (v > best_value) {
      best_value = v;
      best = j;
    }
  }
  return {best_value, set[best]};
}

inline WorstCase support_of(const AxisParallelEllipsoid& set, const Vector& w) {
  double quad = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) quad += set.inverse_diag()[i] * w[i] * w[i];
  const double radius = std::sqrt(quad);
  WorstCase out{dot(set.center(), w) + radius, set.center()};
  if (radius > 0.0) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      out.scenario[i] += set.inverse_diag()[i] * w[i] / radius;
    }
  }
  return out;
}

inline WorstCase support_of(const GeneralEllipsoid& set, const Vector& w) {
  Vector xi = set.shape().transpose_times(w);
  const double radius = norm2(xi);
  WorstCase out{dot(set.center(), w) + radius, set.center()};
  if (radius > 0.0) {
    for (double& v : xi) v /= radius;
    const Vector shift = set.shape().times(xi);
    for (std::size_t i = 0; i < w.size(); ++i) out.scenario[i] += shift[i];
  }
  return out;
}

/// Smallest ||xi|| with C xi = r, or nullopt when r leaves the range of C.
inline std::optional<double> min_norm_preimage(const GeneralEllipsoid& set, const Vector& r,
                                               double tol) {
  const PivotedCholesky& f = set.gram_factor();
  const std::size_t n = r.size();
  Vector rp(n);
  double scale = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    rp[k] = r[f.perm[k]];
    scale = std::max(scale, std::abs(rp[k]));
  }
  Vector s(f.rank, 0.0);
  for (std::size_t k = 0; k < f.rank; ++k) {
    double acc = rp[k];
    for (std::size_t j = 0; j < k; ++j) acc -= f.factor(k, j) * s[j];
    s[k] = acc / f.factor(k, k);
  }
  for (std::size_t i = f.rank; i < n; ++i) {
    double acc = rp[i];
    for (std::size_t j = 0; j < f.rank; ++j) acc -= f.factor(i, j) * s[j];
    if (std::abs(acc) > tol * scale + 1e-9 * scale) return std::nullopt;
  }
  return norm2(s);
}

}  // namespace detail

/// Support function of U in direction w (worst case of c^T w).
inline WorstCase support(const UncertaintySet& set, const Vector& w) {
  detail::require_dim(w.size(), dimension(set), "support direction");
  return std::visit([&](const auto& s) { return detail::support_of(s, w); }, set);
}

/// Whether c satisfies the defining inequality of U up to tol.
inline bool membership(const UncertaintySet& set, const Vector& c, double tol) {
  detail::require_dim(c.size(), dimension(set), "membership point");
  if (const auto* box = std::get_if<IntervalSet>(&set)) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (c[i] < box->lower(i) - tol || c[i] > box->upper(i) + tol) return false;
    }
    return true;
  }
  if (const auto* fin = std::get_if<FiniteSet>(&set)) {
    for (const auto& s : fin->scenarios()) {
      bool same = true;
      for (std::size_t i = 0; i < c.size() && same; ++i) same = std::abs(s[i] - c[i]) <= tol;
      if (same) return true;
    }
    return false;
  }
  if (const auto* axis = std::get_if<AxisParallelEllipsoid>(&set)) {
    double q = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      const double r = c[i] - axis->center()[i];
      q += axis->diag()[i] * r * r;
    }
    return q <= 1.0 + tol;
  }
  const auto& ell = std::get<GeneralEllipsoid>(set);
  Vector r(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) r[i] = c[i] - ell.center()[i];
  const auto xi = detail::min_norm_preimage(ell, r, tol);
  return xi.has_value() && *xi <= 1.0 + tol;
}

/**
 * Axis symmetry: U is closed under reflecting any single coordinate about
 * the returned center. Intervals and axis-parallel ellipsoids always are;
 * general ellipsoids iff C C^T is diagonal; finite sets only as singletons.
 */
inline std::optional<Vector> is_axis_symmetric(const UncertaintySet& set) {
  if (const auto* box = std::get_if<IntervalSet>(&set)) return box->center();
  if (const auto* axis = std::get_if<AxisParallelEllipsoid>(&set)) return axis->center();
  if (const auto* fin = std::get_if<FiniteSet>(&set)) {
    if (fin->size() == 1) return (*fin)[0];
    return std::nullopt;
  }
  const auto& ell = std::get<GeneralEllipsoid>(set);
  const Matrix& q = ell.gram();
  for (std::size_t i = 0; i < q.rows(); ++i) {
    for (std::size_t j = 0; j < q.cols(); ++j) {
      if (i != j && std::abs(q(i, j)) > 1e-10) return std::nullopt;
    }
  }
  return ell.center();
}

/// The symmetry point used by the midpoint heuristics (mean for finite sets).
inline Vector center_of(const UncertaintySet& set) {
  if (const auto* fin = std::get_if<FiniteSet>(&set)) return fin->mean();
  return std::visit(
      [](const auto& s) -> Vector {
        if constexpr (requires { s.center(); }) {
          return s.center();
        } else {
          return {};
        }
      },
      set);
}

}  // namespace mmr

#endif  // MMR_UNCERT_HPP
