/**
 * @file core.hpp
 * @brief Domain types shared by the regret solvers: binary solutions,
 * uncertainty sets, combinatorial problems, cuts and solve reports.
 */

#ifndef MMR_CORE_HPP
#define MMR_CORE_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace mmr {

/// Absolute tolerance behind every "equals" comparison of objective values.
inline constexpr double kOptTol = 1e-6;

using Vector = std::vector<double>;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Malformed or inconsistent caller input (dimension mismatch, bad values).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input that is well formed but outside what the algorithms support,
/// e.g. negative arc costs on a cyclic graph.
class UnsupportedInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The feasible set is empty for the requested operation.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An enumeration would exceed the caller-supplied limit.
class EnumerationOverflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw InputError(what);
}

inline void require_dim(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw InputError(std::string(what) + ": dimension " + std::to_string(got) +
                     " does not match " + std::to_string(want));
  }
}

inline bool all_finite(const Vector& v) {
  return std::all_of(v.begin(), v.end(), [](double d) { return std::isfinite(d); });
}

}  // namespace detail

inline double dot(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vector& a) { return std::sqrt(dot(a, a)); }

// ---------------------------------------------------------------------------
// Matrix
// ---------------------------------------------------------------------------

/// Dense row-major matrix. Small (n up to a few hundred) by construction.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix diagonal(const Vector& d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  static Matrix from_rows(const std::vector<Vector>& rows) {
    if (rows.empty()) return {};
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      detail::require_dim(rows[i].size(), m.cols_, "matrix row");
      std::copy(rows[i].begin(), rows[i].end(), m.data_.begin() + i * m.cols_);
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  Vector row(std::size_t i) const {
    return Vector(data_.begin() + i * cols_, data_.begin() + (i + 1) * cols_);
  }

  /// this * v
  Vector times(const Vector& v) const {
    detail::require_dim(v.size(), cols_, "matrix-vector product");
    Vector out(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j) * v[j];
      out[i] = s;
    }
    return out;
  }

  /// this^T * v
  Vector transpose_times(const Vector& v) const {
    detail::require_dim(v.size(), rows_, "transposed matrix-vector product");
    Vector out(cols_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
      const double vi = v[i];
      if (vi == 0.0) continue;
      for (std::size_t j = 0; j < cols_; ++j) out[j] += (*this)(i, j) * vi;
    }
    return out;
  }

  /// this * this^T
  Matrix gram() const {
    Matrix q(rows_, rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < cols_; ++k) s += (*this)(i, k) * (*this)(j, k);
        q(i, j) = s;
        q(j, i) = s;
      }
    }
    return q;
  }

  Matrix scaled(double alpha) const {
    Matrix m = *this;
    for (double& d : m.data_) d *= alpha;
    return m;
  }

  const std::vector<double>& data() const { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/**
 * Result of a diagonally pivoted Cholesky factorization Q = P L L^T P^T.
 *
 * `factor` is n x rank and lower trapezoidal in pivot order; `perm[k]` is the
 * original index of the k-th pivot. A rank-deficient Q is allowed.
 */
struct PivotedCholesky {
  std::vector<std::size_t> perm;
  Matrix factor;
  std::size_t rank = 0;
  bool psd = true;
};

/// Factorizes a symmetric matrix; pivots below 1e-10 * max-diagonal end the
/// factorization, a pivot below minus that tolerance marks the input as not PSD.
inline PivotedCholesky pivoted_cholesky(const Matrix& q) {
  const std::size_t n = q.rows();
  PivotedCholesky out;
  out.perm.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.perm[i] = i;
  out.factor = Matrix(n, n);

  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(q(i, i)));
  const double tol = 1e-10 * std::max(max_diag, 1e-300);

  Matrix a = q;  // working copy, permuted in place
  std::vector<std::size_t>& p = out.perm;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t best = k;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (a(i, i) > a(best, best)) best = i;
    }
    if (a(best, best) <= tol) {
      for (std::size_t i = k; i < n; ++i) {
        if (a(i, i) < -tol) out.psd = false;
      }
      break;
    }
    if (best != k) {
      std::swap(p[k], p[best]);
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(best, j));
      for (std::size_t i = 0; i < n; ++i) std::swap(a(i, k), a(i, best));
      for (std::size_t j = 0; j < k; ++j) std::swap(out.factor(k, j), out.factor(best, j));
    }
    const double pivot = std::sqrt(a(k, k));
    out.factor(k, k) = pivot;
    for (std::size_t i = k + 1; i < n; ++i) out.factor(i, k) = a(i, k) / pivot;
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j <= i; ++j) {
        a(i, j) -= out.factor(i, k) * out.factor(j, k);
        a(j, i) = a(i, j);
      }
    }
    out.rank = k + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// BinaryVector
// ---------------------------------------------------------------------------

/// A point of {0,1}^n; houses both candidate solutions x and rivals y.
class BinaryVector {
 public:
  BinaryVector() = default;
  explicit BinaryVector(std::size_t n) : bits_(n, 0) {}
  explicit BinaryVector(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
    for (auto b : bits_) detail::require(b <= 1, "binary vector entries must be 0 or 1");
  }
  BinaryVector(std::initializer_list<int> bits) {
    bits_.reserve(bits.size());
    for (int b : bits) {
      detail::require(b == 0 || b == 1, "binary vector entries must be 0 or 1");
      bits_.push_back(static_cast<std::uint8_t>(b));
    }
  }

  static BinaryVector zeros(std::size_t n) { return BinaryVector(n); }
  static BinaryVector ones(std::size_t n) {
    return BinaryVector(std::vector<std::uint8_t>(n, 1));
  }

  /// Parses a string of '0'/'1' characters.
  static BinaryVector parse(const std::string& s) {
    std::vector<std::uint8_t> bits;
    for (char ch : s) {
      detail::require(ch == '0' || ch == '1', "binary string must contain only 0/1");
      bits.push_back(static_cast<std::uint8_t>(ch - '0'));
    }
    return BinaryVector(std::move(bits));
  }

  std::size_t size() const { return bits_.size(); }
  int operator[](std::size_t i) const { return bits_[i]; }
  void set(std::size_t i, bool value) { bits_[i] = value ? 1 : 0; }
  void flip(std::size_t i) { bits_[i] ^= 1U; }

  std::size_t count() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
  }

  /// x - y as a real vector; entries lie in {-1, 0, 1}.
  Vector minus(const BinaryVector& y) const {
    detail::require_dim(y.size(), size(), "binary difference");
    Vector v(size());
    for (std::size_t i = 0; i < size(); ++i) {
      v[i] = static_cast<double>(bits_[i]) - static_cast<double>(y.bits_[i]);
    }
    return v;
  }

  Vector as_real() const { return Vector(bits_.begin(), bits_.end()); }

  double dot(const Vector& c) const {
    detail::require_dim(c.size(), size(), "binary dot product");
    double s = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
      if (bits_[i]) s += c[i];
    }
    return s;
  }

  std::string to_string() const {
    std::string s(size(), '0');
    for (std::size_t i = 0; i < size(); ++i) s[i] = bits_[i] ? '1' : '0';
    return s;
  }

  const std::vector<std::uint8_t>& bits() const { return bits_; }

  friend bool operator==(const BinaryVector&, const BinaryVector&) = default;
  friend auto operator<=>(const BinaryVector&, const BinaryVector&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

// ---------------------------------------------------------------------------
// Uncertainty sets
// ---------------------------------------------------------------------------

/// Box [c - d, c + d].
class IntervalSet {
 public:
  IntervalSet(Vector center, Vector halfwidth)
      : center_(std::move(center)), halfwidth_(std::move(halfwidth)) {
    detail::require_dim(halfwidth_.size(), center_.size(), "interval halfwidth");
    detail::require(detail::all_finite(center_) && detail::all_finite(halfwidth_),
                    "interval data must be finite");
    for (double d : halfwidth_) detail::require(d >= 0.0, "interval halfwidth must be >= 0");
  }

  /// Builds the box from explicit bounds lower <= upper.
  static IntervalSet from_bounds(const Vector& lower, const Vector& upper) {
    detail::require_dim(upper.size(), lower.size(), "interval bounds");
    Vector c(lower.size()), d(lower.size());
    for (std::size_t i = 0; i < lower.size(); ++i) {
      detail::require(lower[i] <= upper[i], "interval lower bound exceeds upper bound");
      c[i] = 0.5 * (lower[i] + upper[i]);
      d[i] = 0.5 * (upper[i] - lower[i]);
    }
    return {std::move(c), std::move(d)};
  }

  std::size_t dimension() const { return center_.size(); }
  const Vector& center() const { return center_; }
  const Vector& halfwidth() const { return halfwidth_; }
  double lower(std::size_t i) const { return center_[i] - halfwidth_[i]; }
  double upper(std::size_t i) const { return center_[i] + halfwidth_[i]; }

 private:
  Vector center_;
  Vector halfwidth_;
};

/// Explicit list of k >= 1 scenarios.
class FiniteSet {
 public:
  explicit FiniteSet(std::vector<Vector> scenarios) : scenarios_(std::move(scenarios)) {
    detail::require(!scenarios_.empty(), "finite set needs at least one scenario");
    for (const auto& s : scenarios_) {
      detail::require_dim(s.size(), scenarios_.front().size(), "finite scenario");
      detail::require(detail::all_finite(s), "scenario entries must be finite");
    }
  }

  std::size_t dimension() const { return scenarios_.front().size(); }
  std::size_t size() const { return scenarios_.size(); }
  const std::vector<Vector>& scenarios() const { return scenarios_; }
  const Vector& operator[](std::size_t j) const { return scenarios_[j]; }

  Vector mean() const {
    Vector m(dimension(), 0.0);
    for (const auto& s : scenarios_) {
      for (std::size_t i = 0; i < m.size(); ++i) m[i] += s[i];
    }
    for (double& v : m) v /= static_cast<double>(scenarios_.size());
    return m;
  }

 private:
  std::vector<Vector> scenarios_;
};

/// {c : (c - center)^T D (c - center) <= 1} with D positive diagonal.
class AxisParallelEllipsoid {
 public:
  AxisParallelEllipsoid(Vector center, Vector diag)
      : center_(std::move(center)), diag_(std::move(diag)) {
    detail::require_dim(diag_.size(), center_.size(), "ellipsoid diagonal");
    inverse_diag_.resize(diag_.size());
    for (std::size_t i = 0; i < diag_.size(); ++i) {
      detail::require(std::isfinite(diag_[i]) && diag_[i] > 0.0,
                      "axis-parallel ellipsoid needs a positive diagonal");
      inverse_diag_[i] = 1.0 / diag_[i];
    }
    detail::require(detail::all_finite(center_), "ellipsoid center must be finite");
  }

  /// Builds the set from the squared semi-axes D^{-1}_ii directly, keeping
  /// them exact (the hardness gadgets specify D through its inverse).
  static AxisParallelEllipsoid from_inverse_diag(Vector center, const Vector& inverse_diag) {
    Vector diag(inverse_diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) {
      detail::require(std::isfinite(inverse_diag[i]) && inverse_diag[i] > 0.0,
                      "axis-parallel ellipsoid needs positive squared radii");
      diag[i] = 1.0 / inverse_diag[i];
    }
    AxisParallelEllipsoid e(std::move(center), std::move(diag));
    e.inverse_diag_ = inverse_diag;
    return e;
  }

  std::size_t dimension() const { return center_.size(); }
  const Vector& center() const { return center_; }
  const Vector& diag() const { return diag_; }
  const Vector& inverse_diag() const { return inverse_diag_; }

 private:
  Vector center_;
  Vector diag_;
  Vector inverse_diag_;
};

/// {center + C xi : ||xi||_2 <= 1}; C may be rank deficient.
class GeneralEllipsoid {
 public:
  GeneralEllipsoid(Vector center, Matrix shape)
      : center_(std::move(center)), shape_(std::move(shape)) {
    detail::require(shape_.rows() == center_.size() && shape_.cols() == center_.size(),
                    "ellipsoid shape must be n x n");
    detail::require(detail::all_finite(center_) && detail::all_finite(shape_.data()),
                    "ellipsoid data must be finite");
    gram_ = shape_.gram();
    factor_ = pivoted_cholesky(gram_);
    if (!factor_.psd) throw InputError("C C^T failed the positive semidefinite check");
  }

  std::size_t dimension() const { return center_.size(); }
  const Vector& center() const { return center_; }
  const Matrix& shape() const { return shape_; }
  /// Q = C C^T.
  const Matrix& gram() const { return gram_; }
  const PivotedCholesky& gram_factor() const { return factor_; }

 private:
  Vector center_;
  Matrix shape_;
  Matrix gram_;
  PivotedCholesky factor_;
};

using UncertaintySet =
    std::variant<IntervalSet, FiniteSet, AxisParallelEllipsoid, GeneralEllipsoid>;

inline std::size_t dimension(const UncertaintySet& set) {
  return std::visit([](const auto& s) { return s.dimension(); }, set);
}

inline GeneralEllipsoid as_general_ellipsoid(const AxisParallelEllipsoid& set) {
  Vector radii(set.dimension());
  for (std::size_t i = 0; i < radii.size(); ++i) radii[i] = std::sqrt(set.inverse_diag()[i]);
  return {set.center(), Matrix::diagonal(radii)};
}

// ---------------------------------------------------------------------------
// Combinatorial problems
// ---------------------------------------------------------------------------

struct Arc {
  std::size_t tail;
  std::size_t head;
  friend bool operator==(const Arc&, const Arc&) = default;
};

/// Directed multigraph whose arc k is decision variable k.
class Digraph {
 public:
  Digraph(std::size_t num_nodes, std::vector<Arc> arcs, std::size_t source, std::size_t sink)
      : num_nodes_(num_nodes), arcs_(std::move(arcs)), source_(source), sink_(sink) {
    detail::require(source_ < num_nodes_ && sink_ < num_nodes_, "source/sink out of range");
    detail::require(source_ != sink_, "source and sink must differ");
    out_.resize(num_nodes_);
    in_.resize(num_nodes_);
    for (std::size_t k = 0; k < arcs_.size(); ++k) {
      detail::require(arcs_[k].tail < num_nodes_ && arcs_[k].head < num_nodes_,
                      "arc endpoint out of range");
      detail::require(arcs_[k].tail != arcs_[k].head, "self loops are not allowed");
      out_[arcs_[k].tail].push_back(k);
      in_[arcs_[k].head].push_back(k);
    }
    compute_topological_order();
  }

  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t num_arcs() const { return arcs_.size(); }
  const std::vector<Arc>& arcs() const { return arcs_; }
  const Arc& arc(std::size_t k) const { return arcs_[k]; }
  std::size_t source() const { return source_; }
  std::size_t sink() const { return sink_; }
  const std::vector<std::size_t>& out_arcs(std::size_t v) const { return out_[v]; }
  const std::vector<std::size_t>& in_arcs(std::size_t v) const { return in_[v]; }
  bool acyclic() const { return topo_.has_value(); }
  /// Topological node order; empty optional for cyclic graphs.
  const std::optional<std::vector<std::size_t>>& topological_order() const { return topo_; }

  /// True if t is reachable from s using only arcs with allowed[k] != 0.
  bool connected(const std::vector<std::uint8_t>& allowed) const {
    std::vector<std::uint8_t> seen(num_nodes_, 0);
    std::vector<std::size_t> stack{source_};
    seen[source_] = 1;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      if (v == sink_) return true;
      for (std::size_t k : out_[v]) {
        if (!allowed[k]) continue;
        const std::size_t w = arcs_[k].head;
        if (!seen[w]) {
          seen[w] = 1;
          stack.push_back(w);
        }
      }
    }
    return false;
  }

 private:
  void compute_topological_order() {
    std::vector<std::size_t> indeg(num_nodes_, 0);
    for (const Arc& a : arcs_) ++indeg[a.head];
    std::vector<std::size_t> order;
    std::vector<std::size_t> ready;
    for (std::size_t v = num_nodes_; v-- > 0;) {
      if (indeg[v] == 0) ready.push_back(v);
    }
    while (!ready.empty()) {
      const std::size_t v = ready.back();
      ready.pop_back();
      order.push_back(v);
      for (std::size_t k : out_[v]) {
        if (--indeg[arcs_[k].head] == 0) ready.push_back(arcs_[k].head);
      }
    }
    if (order.size() == num_nodes_) topo_ = std::move(order);
  }

  std::size_t num_nodes_;
  std::vector<Arc> arcs_;
  std::size_t source_;
  std::size_t sink_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> in_;
  std::optional<std::vector<std::size_t>> topo_;
};

struct Unconstrained {};

struct ShortestPath {
  Digraph graph;
};

/// Ground set {0..n-1} plus the feasible set X: all of {0,1}^n, or s-t paths.
class CombinatorialProblem {
 public:
  static CombinatorialProblem unconstrained(std::size_t n) {
    return CombinatorialProblem(n, Unconstrained{});
  }

  static CombinatorialProblem shortest_path(Digraph graph) {
    std::vector<std::uint8_t> all(graph.num_arcs(), 1);
    if (!graph.connected(all)) throw InputError("graph has no s-t path");
    const std::size_t n = graph.num_arcs();
    return CombinatorialProblem(n, ShortestPath{std::move(graph)});
  }

  std::size_t dimension() const { return n_; }
  bool is_unconstrained() const { return std::holds_alternative<Unconstrained>(structure_); }
  bool is_shortest_path() const { return std::holds_alternative<ShortestPath>(structure_); }
  const Digraph& graph() const { return std::get<ShortestPath>(structure_).graph; }

  /// Membership test for X.
  bool feasible(const BinaryVector& x) const {
    if (x.size() != n_) return false;
    if (is_unconstrained()) return true;
    const Digraph& g = graph();
    // exactly one simple s-t path and nothing else
    std::vector<int> out_deg(g.num_nodes(), 0), in_deg(g.num_nodes(), 0);
    std::vector<std::size_t> next(g.num_nodes(), g.num_nodes());
    for (std::size_t k = 0; k < n_; ++k) {
      if (!x[k]) continue;
      ++out_deg[g.arc(k).tail];
      ++in_deg[g.arc(k).head];
      next[g.arc(k).tail] = g.arc(k).head;
    }
    std::size_t v = g.source();
    if (in_deg[v] != 0) return false;
    std::size_t used = 0;
    while (v != g.sink()) {
      if (out_deg[v] != 1) return false;
      const std::size_t w = next[v];
      if (in_deg[w] != 1) return false;
      ++used;
      v = w;
      if (used > n_) return false;
    }
    return out_deg[g.sink()] == 0 && used == x.count();
  }

  void require_feasible(const BinaryVector& x) const {
    if (!feasible(x)) throw InputError("solution " + x.to_string() + " is not feasible");
  }

 private:
  CombinatorialProblem(std::size_t n, std::variant<Unconstrained, ShortestPath> s)
      : n_(n), structure_(std::move(s)) {}

  std::size_t n_;
  std::variant<Unconstrained, ShortestPath> structure_;
};

// ---------------------------------------------------------------------------
// Cuts and reports
// ---------------------------------------------------------------------------

/// z >= c^T x - opt(c) for a fixed scenario.
struct ScenarioCut {
  Vector scenario;
  double nominal_opt;
};

/// z >= max_{c in U} c^T (x - y) for a fixed rival solution.
struct RivalCut {
  BinaryVector rival;
};

struct Cut {
  std::variant<ScenarioCut, RivalCut> kind;
  int creation_iteration = 0;

  bool is_type1() const { return std::holds_alternative<ScenarioCut>(kind); }
  bool is_type2() const { return std::holds_alternative<RivalCut>(kind); }
};

/// Scenario and rival found by one separation at the solution x that produced them.
struct SeparationRecord {
  BinaryVector x;
  Vector scenario;
  double nominal_opt = 0.0;
  BinaryVector rival;
};

enum class SolveStatus { Optimal, TimeLimit, Infeasible };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::TimeLimit: return "time_limit";
    case SolveStatus::Infeasible: return "infeasible";
  }
  return "unknown";
}

using Seconds = std::chrono::duration<double>;

/// One row of the per-iteration trace.
struct TraceRecord {
  int iteration = 0;
  double z_lower = 0.0;
  double upper = 0.0;
  std::string cut_kind;
  double master_seconds = 0.0;
  double sub_seconds = 0.0;
};

struct SolveReport {
  double regret = std::numeric_limits<double>::quiet_NaN();
  double lower_bound = -std::numeric_limits<double>::infinity();
  BinaryVector incumbent;
  std::vector<Cut> cuts;
  int iterations = 0;
  Seconds master_time{0};
  Seconds sub_time{0};
  SolveStatus status = SolveStatus::Infeasible;
  int stability_incidents = 0;
  std::vector<TraceRecord> trace;
  std::vector<SeparationRecord> separations;
};

}  // namespace mmr

#endif  // MMR_CORE_HPP
