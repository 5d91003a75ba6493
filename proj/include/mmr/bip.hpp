/**
 * @file bip.hpp
 * @brief Exact 0-1 optimizer for the master problems and subproblem
 * linearizations: depth-first branch-and-bound with interval bounds,
 * activity propagation, and a Gray-code enumeration fallback.
 *
 * A BinaryProgram has binary variables plus "implied" continuous variables.
 * Each continuous variable appears in at most one position per constraint
 * and the objective is monotone in it, so once all binaries are fixed its
 * optimal value is the tightest bound its constraints allow. This covers
 * epigraph variables (z >= cut_k(x)) and the envelope variables h_j of the
 * big-M linearization without an LP engine.
 */

#ifndef MMR_BIP_HPP
#define MMR_BIP_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mmr/core.hpp"

namespace mmr::bip {

enum class Sense { Minimize, Maximize };
enum class Relation { LessEqual, Equal, GreaterEqual };
enum class VarKind { Binary, Continuous };

struct Variable {
  VarKind kind = VarKind::Binary;
  double lower = 0.0;
  double upper = 1.0;
  /// Higher priority binaries are branched on first.
  int priority = 0;
};

struct Term {
  std::size_t var;
  double coef;
};

struct AffineExpr {
  std::vector<Term> terms;
  double constant = 0.0;

  void add(std::size_t var, double coef) {
    if (coef != 0.0) terms.push_back({var, coef});
  }
};

/// weight * ||(e_1(x), ..., e_m(x))||_2 over binary variables.
struct NormTerm {
  double weight = 1.0;
  std::vector<AffineExpr> components;
};

/// weight * sqrt(max(0, argument(x))).
struct SqrtTerm {
  double weight = 1.0;
  AffineExpr argument;
  /// Caller guarantees argument >= 0 at every feasible point (continuous
  /// variables at their implied values); enables the stronger node bound.
  bool nonnegative = false;
};

struct Objective {
  Sense sense = Sense::Minimize;
  AffineExpr linear;
  std::vector<NormTerm> norms;
  std::vector<SqrtTerm> roots;
};

/// lhs(x) [+ cone(x)] relation rhs.
struct Constraint {
  AffineExpr lhs;
  std::optional<NormTerm> cone;
  Relation relation = Relation::LessEqual;
  double rhs = 0.0;
};

/// Restricts a subset of binaries (one per arc) to incidence vectors of
/// simple s-t paths; enforced by path-extension branching.
struct PathHook {
  Digraph graph;
  std::vector<std::size_t> arc_variable;
};

class BinaryProgram {
 public:
  std::size_t add_binary(int priority = 0) {
    vars_.push_back({VarKind::Binary, 0.0, 1.0, priority});
    return vars_.size() - 1;
  }

  std::size_t add_continuous(double lower, double upper) {
    vars_.push_back({VarKind::Continuous, lower, upper, 0});
    return vars_.size() - 1;
  }

  void add_constraint(Constraint c) { constraints_.push_back(std::move(c)); }
  void set_path_hook(PathHook hook) { hook_ = std::move(hook); }

  Objective& objective() { return objective_; }
  const Objective& objective() const { return objective_; }
  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const std::optional<PathHook>& path_hook() const { return hook_; }

  std::size_t num_vars() const { return vars_.size(); }
  std::size_t num_binaries() const {
    return static_cast<std::size_t>(std::count_if(
        vars_.begin(), vars_.end(), [](const Variable& v) { return v.kind == VarKind::Binary; }));
  }

 private:
  std::vector<Variable> vars_;
  Objective objective_;
  std::vector<Constraint> constraints_;
  std::optional<PathHook> hook_;
};

struct Budget {
  double seconds = std::numeric_limits<double>::infinity();
  std::uint64_t max_nodes = std::numeric_limits<std::uint64_t>::max();
};

struct Options {
  bool allow_enumeration = true;
  std::size_t enumeration_threshold = 20;
  /// Nodes whose bound is within this of the incumbent are pruned.
  double prune_tol = 1e-7;
  int lagrangian_root_iterations = 60;
  int lagrangian_iterations = 10;
};

struct Result {
  SolveStatus status = SolveStatus::Infeasible;
  /// Objective value in the program's own sense; NaN without an incumbent.
  double value = std::numeric_limits<double>::quiet_NaN();
  /// Proven bound on the optimum (lower for min, upper for max).
  double bound = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> assignment;
  std::uint64_t nodes = 0;
  bool enumerated = false;
};

/// -1 = free, 0 / 1 = fixed; indexed by binary position (not variable id).
using Domain = std::vector<std::int8_t>;

class Solver {
 public:
  explicit Solver(const BinaryProgram& prog, Options opts = {}) : opts_(opts) { compile(prog); }

  Result solve(const Budget& budget = {}) {
    start_ = std::chrono::steady_clock::now();
    budget_ = budget;
    incumbent_ = kInf;
    best_bin_.clear();
    nodes_ = 0;
    stopped_ = false;
    const bool enumerate = opts_.allow_enumeration && !hook_ &&
                           num_bin_ <= opts_.enumeration_threshold;
    Result out;
    double bound = enumerate ? run_enumeration() : run_branch_and_bound();
    out.nodes = nodes_;
    out.enumerated = enumerate;
    if (best_bin_.empty() && incumbent_ == kInf) {
      out.status = stopped_ ? SolveStatus::TimeLimit : SolveStatus::Infeasible;
      out.bound = sign_ * bound;
      return out;
    }
    out.status = stopped_ ? SolveStatus::TimeLimit : SolveStatus::Optimal;
    out.value = sign_ * incumbent_;
    out.bound = sign_ * (stopped_ ? std::min(bound, incumbent_) : incumbent_);
    out.assignment = expand(best_bin_);
    return out;
  }

  /// Bound over all completions of a partial assignment given per original
  /// variable (-1 free; continuous entries ignored). Lower bound for
  /// minimization, upper bound for maximization; +/-inf if provably infeasible.
  double node_bound(const std::vector<int>& partial) {
    Domain dom(num_bin_, -1);
    for (std::size_t b = 0; b < num_bin_; ++b) {
      const int v = partial.at(bin_var_[b]);
      if (v == 0 || v == 1) dom[b] = static_cast<std::int8_t>(v);
    }
    incumbent_ = kInf;
    Vector dual;
    const double internal = bound(dom, dual);
    return sign_ * internal;
  }

  /// Exact objective (program's sense) at a full binary assignment, or
  /// nullopt if infeasible.
  std::optional<double> evaluate(const std::vector<int>& binaries_by_var) {
    Domain dom(num_bin_);
    for (std::size_t b = 0; b < num_bin_; ++b) {
      dom[b] = static_cast<std::int8_t>(binaries_by_var.at(bin_var_[b]));
    }
    Vector slots = slot_values(dom);
    auto v = leaf_value(slots, nullptr);
    if (!v) return std::nullopt;
    return sign_ * *v;
  }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  struct BinTerm {
    std::size_t bin;
    double coef;
  };

  // Canonical row: bin(x) + cont_coef * cont + norm(x) <= rhs.
  struct Row {
    std::size_t slot;
    int cont = -1;
    double cont_coef = 0.0;
    int norm = -1;
    double rhs = 0.0;
    bool pure = false;  // binary-only linear row, used for propagation
    std::vector<BinTerm> terms;
  };

  struct Norm {
    double weight;
    std::vector<std::size_t> slots;  // one per component
  };

  struct Root {
    double weight;
    bool nonnegative = false;
    std::size_t slot;  // binary part incl. constant
    std::vector<std::pair<std::size_t, double>> cont;
  };

  struct Cont {
    double lower = 0.0;
    double upper = 0.0;
    double obj = 0.0;
    int direction = 1;  // +1: objective grows with it (pushed down), -1: pushed up
    std::vector<std::size_t> lower_rows, upper_rows;
    bool in_root = false;
  };

  // Every affine expression over binaries is a "slot"; column lists drive
  // incremental updates during enumeration.
  struct Slot {
    double constant = 0.0;
    std::vector<BinTerm> terms;
  };

  void compile(const BinaryProgram& prog) {
    const auto& vars = prog.variables();
    var_bin_.assign(vars.size(), -1);
    var_cont_.assign(vars.size(), -1);
    for (std::size_t v = 0; v < vars.size(); ++v) {
      if (vars[v].kind == VarKind::Binary) {
        var_bin_[v] = static_cast<int>(bin_var_.size());
        bin_var_.push_back(v);
        bin_priority_.push_back(vars[v].priority);
      } else {
        detail::require(vars[v].lower <= vars[v].upper, "continuous variable with empty range");
        var_cont_[v] = static_cast<int>(cont_var_.size());
        cont_var_.push_back(v);
        Cont ct;
        ct.lower = vars[v].lower;
        ct.upper = vars[v].upper;
        conts_.push_back(std::move(ct));
      }
    }
    num_bin_ = bin_var_.size();
    num_vars_ = vars.size();

    const Objective& obj = prog.objective();
    sign_ = obj.sense == Sense::Minimize ? 1.0 : -1.0;

    obj_lin_.assign(num_bin_, 0.0);
    obj_const_ = sign_ * obj.linear.constant;
    for (const Term& t : obj.linear.terms) {
      check_var(t.var);
      if (var_bin_[t.var] >= 0) {
        obj_lin_[var_bin_[t.var]] += sign_ * t.coef;
      } else {
        conts_[var_cont_[t.var]].obj += sign_ * t.coef;
      }
    }
    {
      Slot s;
      s.constant = obj_const_;
      for (std::size_t b = 0; b < num_bin_; ++b) {
        if (obj_lin_[b] != 0.0) s.terms.push_back({b, obj_lin_[b]});
      }
      obj_slot_ = add_slot(std::move(s));
    }
    for (const NormTerm& nt : obj.norms) obj_norms_.push_back(add_norm(nt, sign_));
    for (const SqrtTerm& st : obj.roots) {
      Root r;
      r.weight = sign_ * st.weight;
      r.nonnegative = st.nonnegative;
      Slot s;
      s.constant = st.argument.constant;
      for (const Term& t : st.argument.terms) {
        check_var(t.var);
        if (var_bin_[t.var] >= 0) {
          s.terms.push_back({static_cast<std::size_t>(var_bin_[t.var]), t.coef});
        } else {
          r.cont.emplace_back(var_cont_[t.var], t.coef);
          conts_[var_cont_[t.var]].in_root = true;
        }
      }
      r.slot = add_slot(std::move(s));
      roots_.push_back(std::move(r));
    }

    for (const Constraint& c : prog.constraints()) {
      if (c.relation == Relation::LessEqual || c.relation == Relation::Equal) add_row(c, 1.0);
      if (c.relation == Relation::GreaterEqual || c.relation == Relation::Equal) add_row(c, -1.0);
    }

    // monotonicity of the objective in each continuous variable
    for (std::size_t k = 0; k < conts_.size(); ++k) {
      Cont& ct = conts_[k];
      int pos = ct.obj > 0 ? 1 : 0, neg = ct.obj < 0 ? 1 : 0;
      for (const Root& r : roots_) {
        for (const auto& [idx, coef] : r.cont) {
          if (idx != k) continue;
          const double s = r.weight * coef;
          pos += s > 0;
          neg += s < 0;
        }
      }
      if (pos && neg) throw InputError("objective is not monotone in a continuous variable");
      if (neg) {
        ct.direction = -1;
      } else if (pos) {
        ct.direction = 1;
      } else {
        ct.direction = (!ct.lower_rows.empty() || std::isfinite(ct.lower)) ? 1 : -1;
      }
      const bool bounded = ct.direction > 0
                               ? (!ct.lower_rows.empty() || std::isfinite(ct.lower))
                               : (!ct.upper_rows.empty() || std::isfinite(ct.upper));
      if (!bounded) throw InputError("continuous variable is unbounded in its objective direction");
    }

    if (prog.path_hook()) {
      const PathHook& h = *prog.path_hook();
      detail::require_dim(h.arc_variable.size(), h.graph.num_arcs(), "path hook arcs");
      hook_.emplace(h.graph);
      hook_arc_bin_.resize(h.arc_variable.size());
      for (std::size_t k = 0; k < h.arc_variable.size(); ++k) {
        check_var(h.arc_variable[k]);
        detail::require(var_bin_[h.arc_variable[k]] >= 0, "path hook arcs must be binaries");
        hook_arc_bin_[k] = static_cast<std::size_t>(var_bin_[h.arc_variable[k]]);
      }
      // Flow conservation holds on every s-t path. The rows only feed
      // propagation and the bound; paths are still enforced by branching.
      std::vector<Constraint> flow(h.graph.num_nodes());
      for (std::size_t k = 0; k < h.graph.num_arcs(); ++k) {
        flow[h.graph.arc(k).tail].lhs.add(h.arc_variable[k], 1.0);
        flow[h.graph.arc(k).head].lhs.add(h.arc_variable[k], -1.0);
      }
      for (std::size_t v = 0; v < flow.size(); ++v) {
        if (flow[v].lhs.terms.empty()) continue;
        flow[v].relation = Relation::Equal;
        flow[v].rhs = v == h.graph.source() ? 1.0 : v == h.graph.sink() ? -1.0 : 0.0;
        add_row(flow[v], 1.0);
        add_row(flow[v], -1.0);
      }
    }

    build_columns();
    build_branch_order();
    prepare_lagrangian();
  }

  void check_var(std::size_t v) const {
    if (v >= num_vars_) throw InputError("variable index out of range");
  }

  std::size_t add_slot(Slot s) {
    slots_.push_back(std::move(s));
    return slots_.size() - 1;
  }

  int add_norm(const NormTerm& nt, double scale) {
    Norm n;
    n.weight = scale * nt.weight;
    for (const AffineExpr& e : nt.components) {
      Slot s;
      s.constant = e.constant;
      for (const Term& t : e.terms) {
        check_var(t.var);
        if (var_bin_[t.var] < 0) throw InputError("norm arguments must be binary");
        s.terms.push_back({static_cast<std::size_t>(var_bin_[t.var]), t.coef});
      }
      n.slots.push_back(add_slot(std::move(s)));
    }
    norms_.push_back(std::move(n));
    return static_cast<int>(norms_.size() - 1);
  }

  void add_row(const Constraint& c, double scale) {
    Row row;
    Slot s;
    s.constant = 0.0;
    for (const Term& t : c.lhs.terms) {
      check_var(t.var);
      if (var_bin_[t.var] >= 0) {
        s.terms.push_back({static_cast<std::size_t>(var_bin_[t.var]), scale * t.coef});
      } else {
        const int k = var_cont_[t.var];
        if (row.cont >= 0 && row.cont != k) {
          throw InputError("a constraint may involve at most one continuous variable");
        }
        row.cont = k;
        row.cont_coef += scale * t.coef;
      }
    }
    row.rhs = scale * (c.rhs - c.lhs.constant);
    if (c.cone) row.norm = add_norm(*c.cone, scale);
    row.pure = row.cont < 0 && row.norm < 0;
    row.terms = s.terms;
    row.slot = add_slot(std::move(s));
    if (row.cont >= 0 && row.cont_coef != 0.0) {
      auto& ct = conts_[row.cont];
      (row.cont_coef < 0 ? ct.lower_rows : ct.upper_rows).push_back(rows_.size());
    } else {
      row.cont = -1;
      row.pure = row.norm < 0;
    }
    rows_.push_back(std::move(row));
  }

  void build_columns() {
    columns_.assign(num_bin_, {});
    for (std::size_t s = 0; s < slots_.size(); ++s) {
      for (const BinTerm& t : slots_[s].terms) columns_[t.bin].push_back({s, t.coef});
    }
  }

  void build_branch_order() {
    // static score: weight of the variable in the objective, directly or
    // through the rows of objective-carrying continuous variables
    Vector score(num_bin_, 0.0);
    for (std::size_t b = 0; b < num_bin_; ++b) score[b] += std::abs(obj_lin_[b]);
    auto norm_column_weight = [&](const Norm& n, double factor) {
      Vector acc(num_bin_, 0.0);
      for (std::size_t s : n.slots) {
        for (const BinTerm& t : slots_[s].terms) acc[t.bin] += t.coef * t.coef;
      }
      for (std::size_t b = 0; b < num_bin_; ++b) score[b] += factor * std::sqrt(acc[b]);
    };
    for (int ni : obj_norms_) norm_column_weight(norms_[ni], std::abs(norms_[ni].weight));
    for (const Root& r : roots_) {
      for (const BinTerm& t : slots_[r.slot].terms) score[t.bin] += std::abs(r.weight * t.coef);
    }
    for (const Row& row : rows_) {
      if (row.cont < 0) continue;
      const Cont& ct = conts_[row.cont];
      const double factor = std::abs(ct.obj / row.cont_coef);
      if (factor == 0.0) continue;
      for (const BinTerm& t : slots_[row.slot].terms) score[t.bin] += factor * std::abs(t.coef);
      if (row.norm >= 0) norm_column_weight(norms_[row.norm], factor * std::abs(norms_[row.norm].weight));
    }
    order_.resize(num_bin_);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
      if (bin_priority_[a] != bin_priority_[b]) return bin_priority_[a] > bin_priority_[b];
      return score[a] > score[b];
    });
  }

  // The Lagrangian bound needs every concave square root to promise a
  // nonnegative argument (AM-GM minorant) and every continuous variable that
  // influences the objective to have at least one usable limiting row.
  void prepare_lagrangian() {
    lagrangian_ok_ = true;
    for (std::size_t r = 0; r < roots_.size(); ++r) {
      if (roots_[r].weight >= 0.0) continue;
      if (!roots_[r].nonnegative) lagrangian_ok_ = false;
      concave_roots_.push_back(r);
    }
    auto usable = [&](const Row& row) { return row.norm < 0 || norms_[row.norm].weight >= 0.0; };
    std::vector<std::uint8_t> in_concave(conts_.size(), 0);
    for (std::size_t r : concave_roots_) {
      for (const auto& [k, coef] : roots_[r].cont) in_concave[k] = 1;
    }
    for (std::size_t k = 0; k < conts_.size(); ++k) {
      const Cont& ct = conts_[k];
      if (ct.obj == 0.0 && !in_concave[k]) continue;
      PieceGroup g;
      g.cont = k;
      const auto& candidates = ct.direction > 0 ? ct.lower_rows : ct.upper_rows;
      for (std::size_t r : candidates) {
        if (usable(rows_[r])) g.rows.push_back(static_cast<int>(r));
      }
      const double bound = ct.direction > 0 ? ct.lower : ct.upper;
      if (std::isfinite(bound)) g.rows.push_back(-1);
      if (g.rows.empty()) lagrangian_ok_ = false;
      num_pieces_ += g.rows.size();
      groups_.push_back(std::move(g));
    }
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      if (rows_[r].cont < 0 && usable(rows_[r])) relax_rows_.push_back(r);
    }
    if (relax_rows_.empty() && groups_.empty() && concave_roots_.empty()) lagrangian_ok_ = false;
    dual_size_ = relax_rows_.size() + num_pieces_ + concave_roots_.size();
  }

  // ------------------------------------------------------------------
  // Evaluation helpers
  // ------------------------------------------------------------------

  Vector slot_values(const Domain& dom) const {
    Vector vals(slots_.size());
    for (std::size_t s = 0; s < slots_.size(); ++s) {
      double v = slots_[s].constant;
      for (const BinTerm& t : slots_[s].terms) {
        if (dom[t.bin] == 1) v += t.coef;
      }
      vals[s] = v;
    }
    return vals;
  }

  std::pair<double, double> slot_range(std::size_t s, const Domain& dom) const {
    double lo = slots_[s].constant, hi = lo;
    for (const BinTerm& t : slots_[s].terms) {
      const auto d = dom[t.bin];
      if (d == 1) {
        lo += t.coef;
        hi += t.coef;
      } else if (d < 0) {
        (t.coef < 0 ? lo : hi) += t.coef;
      }
    }
    return {lo, hi};
  }

  double norm_value(const Norm& n, const Vector& vals) const {
    double sq = 0.0;
    for (std::size_t s : n.slots) sq += vals[s] * vals[s];
    return n.weight * std::sqrt(sq);
  }

  /// Range of weight * ||.|| over completions.
  std::pair<double, double> norm_range(const Norm& n, const Domain& dom) const {
    double lo_sq = 0.0, hi_sq = 0.0;
    for (std::size_t s : n.slots) {
      const auto [lo, hi] = slot_range(s, dom);
      const double near = (lo <= 0.0 && hi >= 0.0) ? 0.0 : std::min(std::abs(lo), std::abs(hi));
      lo_sq += near * near;
      hi_sq += std::max(lo * lo, hi * hi);
    }
    const double a = n.weight * std::sqrt(lo_sq), b = n.weight * std::sqrt(hi_sq);
    return {std::min(a, b), std::max(a, b)};
  }

  double feas_tol(double rhs, double lhs) const {
    return 1e-7 * std::max({1.0, std::abs(rhs), std::abs(lhs)});
  }

  // Optimal continuous values and internal objective at a full assignment
  // whose slot values are `vals`.
  std::optional<double> leaf_value(const Vector& vals, Vector* cont_out) const {
    Vector cont(conts_.size());
    for (std::size_t k = 0; k < conts_.size(); ++k) {
      const Cont& ct = conts_[k];
      double lo = ct.lower, hi = ct.upper;
      for (std::size_t r : ct.lower_rows) lo = std::max(lo, row_limit(rows_[r], vals));
      for (std::size_t r : ct.upper_rows) hi = std::min(hi, row_limit(rows_[r], vals));
      if (lo > hi + feas_tol(lo, hi)) return std::nullopt;
      cont[k] = ct.direction > 0 ? lo : hi;
      if (!std::isfinite(cont[k])) return std::nullopt;
    }
    for (const Row& row : rows_) {
      if (row.cont >= 0) continue;  // satisfied by construction of cont values
      double lhs = vals[row.slot];
      if (row.norm >= 0) lhs += norm_value(norms_[row.norm], vals);
      if (lhs > row.rhs + feas_tol(row.rhs, lhs)) return std::nullopt;
    }
    double value = vals[obj_slot_];
    for (std::size_t k = 0; k < conts_.size(); ++k) value += conts_[k].obj * cont[k];
    for (int ni : obj_norms_) value += norm_value(norms_[ni], vals);
    for (const Root& r : roots_) {
      double arg = vals[r.slot];
      for (const auto& [k, coef] : r.cont) arg += coef * cont[k];
      value += r.weight * std::sqrt(std::max(0.0, arg));
    }
    if (cont_out) *cont_out = std::move(cont);
    return value;
  }

  // The bound a row places on its continuous variable at fixed binaries.
  double row_limit(const Row& row, const Vector& vals) const {
    double rest = vals[row.slot];
    if (row.norm >= 0) rest += norm_value(norms_[row.norm], vals);
    return (row.rhs - rest) / row.cont_coef;
  }

  // ------------------------------------------------------------------
  // Propagation and bounding
  // ------------------------------------------------------------------

  bool fix(Domain& dom, std::size_t b, std::int8_t v) const {
    if (dom[b] == v) return true;
    if (dom[b] >= 0) return false;
    dom[b] = v;
    return true;
  }

  /// Activity-based fixing on binary-only linear rows; false if infeasible.
  bool propagate(Domain& dom) const {
    bool changed = true;
    int passes = 0;
    while (changed && passes++ < 50) {
      changed = false;
      for (const Row& row : rows_) {
        if (!row.pure) continue;
        double min_act = slots_[row.slot].constant;
        for (const BinTerm& t : row.terms) {
          const auto d = dom[t.bin];
          if (d == 1) {
            min_act += t.coef;
          } else if (d < 0 && t.coef < 0) {
            min_act += t.coef;
          }
        }
        const double tol = feas_tol(row.rhs, min_act);
        if (min_act > row.rhs + tol) return false;
        for (const BinTerm& t : row.terms) {
          if (dom[t.bin] >= 0) continue;
          if (min_act + std::abs(t.coef) > row.rhs + tol) {
            dom[t.bin] = t.coef > 0 ? 0 : 1;
            changed = true;
          }
        }
      }
    }
    return true;
  }

  struct ContRange {
    double favorable;  // value used in the objective bound
    bool infeasible;
  };

  ContRange cont_range(std::size_t k, const Domain& dom) const {
    const Cont& ct = conts_[k];
    double lo = ct.lower, hi = ct.upper;
    // loosest limits over completions
    for (std::size_t r : ct.lower_rows) {
      const Row& row = rows_[r];
      double rest_lo = slot_range(row.slot, dom).first;
      if (row.norm >= 0) rest_lo += norm_range(norms_[row.norm], dom).first;
      lo = std::max(lo, (row.rhs - rest_lo) / row.cont_coef);
    }
    for (std::size_t r : ct.upper_rows) {
      const Row& row = rows_[r];
      double rest_lo = slot_range(row.slot, dom).first;
      if (row.norm >= 0) rest_lo += norm_range(norms_[row.norm], dom).first;
      hi = std::min(hi, (row.rhs - rest_lo) / row.cont_coef);
    }
    return {ct.direction > 0 ? lo : hi, lo > hi + feas_tol(lo, hi)};
  }

  /// Internal (minimization) lower bound over completions; +inf if
  /// infeasible. `dual` carries Lagrangian multipliers between nodes.
  double bound(const Domain& dom, Vector& dual) {
    for (const Row& row : rows_) {
      if (row.cont >= 0 || row.pure) continue;
      double lo = slot_range(row.slot, dom).first + norm_range(norms_[row.norm], dom).first;
      if (lo > row.rhs + feas_tol(row.rhs, lo)) return kInf;
    }
    Vector fav(conts_.size());
    for (std::size_t k = 0; k < conts_.size(); ++k) {
      const ContRange cr = cont_range(k, dom);
      if (cr.infeasible) return kInf;
      fav[k] = cr.favorable;
    }
    double norms_part = 0.0;
    for (int ni : obj_norms_) norms_part += norm_range(norms_[ni], dom).first;
    double convex_roots = 0.0, concave_part = 0.0;
    for (const Root& r : roots_) {
      const auto [lo, hi] = slot_range(r.slot, dom);
      double extra = 0.0;
      for (const auto& [k, coef] : r.cont) extra += coef * fav[k];
      const double arg = (r.weight >= 0 ? lo : hi) + extra;
      (r.weight >= 0 ? convex_roots : concave_part) += r.weight * std::sqrt(std::max(0.0, arg));
    }
    const double linear = slot_range(obj_slot_, dom).first;
    double cont_part = 0.0;
    for (std::size_t k = 0; k < conts_.size(); ++k) {
      if (conts_[k].obj != 0.0) cont_part += conts_[k].obj * fav[k];
    }
    double simple = linear + cont_part + norms_part + convex_roots + concave_part;
    if (std::isnan(simple)) simple = -kInf;
    if (!lagrangian_ok_ || simple >= incumbent_ - opts_.prune_tol) return simple;
    return std::max(simple, lagrangian_bound(dom, dual, fav, norms_part + convex_roots));
  }

  struct Form {
    std::size_t begin;
    std::size_t end;
    double constant;
  };

  // Appends scale * (bin(x) + w u^T(N x + n0) - rhs) for row r restricted to
  // free binaries; u is the unit direction of the cone argument at `ref`.
  void build_form(std::size_t r, const Domain& dom, const Vector& ref, double scale) {
    const Row& row = rows_[r];
    Form f{form_terms_.size(), 0, 0.0};
    double cst = slots_[row.slot].constant - row.rhs;
    auto push = [&](std::size_t b, double c) {
      if (dom[b] < 0) {
        form_terms_.push_back({b, c * scale});
      } else if (dom[b] == 1) {
        cst += c;
      }
    };
    for (const BinTerm& t : slots_[row.slot].terms) push(t.bin, t.coef);
    if (row.norm >= 0) {
      const Norm& nm = norms_[row.norm];
      comp_.resize(nm.slots.size());
      double len = 0.0;
      for (std::size_t i = 0; i < nm.slots.size(); ++i) {
        const Slot& sl = slots_[nm.slots[i]];
        double v = sl.constant;
        for (const BinTerm& t : sl.terms) v += t.coef * ref[t.bin];
        comp_[i] = v;
        len += v * v;
      }
      len = std::sqrt(len);
      if (len > 0.0) {
        for (std::size_t i = 0; i < nm.slots.size(); ++i) {
          const double u = nm.weight * comp_[i] / len;
          if (u == 0.0) continue;
          const Slot& sl = slots_[nm.slots[i]];
          cst += u * sl.constant;
          for (const BinTerm& t : sl.terms) push(t.bin, u * t.coef);
        }
      }
    }
    f.end = form_terms_.size();
    f.constant = cst * scale;
    forms_.push_back(f);
  }

  double form_value(const Form& f, const std::vector<std::uint8_t>& xs) const {
    double v = f.constant;
    for (std::size_t i = f.begin; i < f.end; ++i) {
      if (xs[form_terms_[i].bin]) v += form_terms_[i].coef;
    }
    return v;
  }

  /**
   * Lagrangian relaxation over the free binaries. Concave roots w sqrt(q)
   * are minorized by w (q / 2t + t / 2); each continuous variable is replaced
   * by a convex combination (lambda) of its limiting rows; rows without
   * continuous variables enter with multipliers mu >= 0. Cone terms are
   * minorized by their tangent u^T(.) at the node midpoint. Every iterate is
   * a valid bound; (mu, lambda) follow projected subgradient steps with a
   * Polyak step toward the incumbent and t tracks sqrt(q) at the minimizer.
   */
  double lagrangian_bound(const Domain& dom, Vector& dual, const Vector& fav, double others) {
    const bool fresh = dual.size() != dual_size_;
    const std::size_t mu0 = 0, lam0 = relax_rows_.size(), t0 = lam0 + num_pieces_;
    if (fresh) {
      dual.assign(dual_size_, 0.0);
      std::size_t pos = lam0;
      for (const PieceGroup& g : groups_) {
        for (std::size_t p = 0; p < g.rows.size(); ++p) dual[pos++] = 1.0 / static_cast<double>(g.rows.size());
      }
      for (std::size_t i = 0; i < concave_roots_.size(); ++i) {
        const Root& r = roots_[concave_roots_[i]];
        double arg = slot_range(r.slot, dom).second;
        for (const auto& [k, coef] : r.cont) arg += coef * fav[k];
        dual[t0 + i] = std::sqrt(std::max(1.0, arg));
      }
    }

    ref_.resize(num_bin_);
    free_.clear();
    for (std::size_t b = 0; b < num_bin_; ++b) {
      ref_[b] = dom[b] < 0 ? 0.5 : dom[b];
      if (dom[b] < 0) free_.push_back(b);
    }
    forms_.clear();
    form_terms_.clear();
    for (std::size_t r : relax_rows_) build_form(r, dom, ref_, 1.0);
    for (const PieceGroup& g : groups_) {
      const Cont& ct = conts_[g.cont];
      for (int r : g.rows) {
        if (r >= 0) {
          build_form(static_cast<std::size_t>(r), dom, ref_, 1.0 / (-rows_[r].cont_coef));
        } else {
          forms_.push_back({form_terms_.size(), form_terms_.size(),
                            ct.direction > 0 ? ct.lower : ct.upper});
        }
      }
    }
    // concave roots: fixed part of the argument and its free terms
    const std::size_t root_forms = forms_.size();
    for (std::size_t ri : concave_roots_) {
      const Slot& sl = slots_[roots_[ri].slot];
      Form f{form_terms_.size(), 0, sl.constant};
      for (const BinTerm& t : sl.terms) {
        if (dom[t.bin] < 0) {
          form_terms_.push_back(t);
        } else if (dom[t.bin] == 1) {
          f.constant += t.coef;
        }
      }
      f.end = form_terms_.size();
      forms_.push_back(f);
    }

    double base = obj_const_ + others;
    for (std::size_t b = 0; b < num_bin_; ++b) {
      if (dom[b] == 1) base += obj_lin_[b];
    }

    coef_.assign(num_bin_, 0.0);
    xs_.assign(num_bin_, 0);
    kap_.resize(conts_.size());
    est_.resize(conts_.size());
    grad_.resize(dual_size_);
    best_dual_ = dual;
    double best = -kInf, theta = 1.0;
    int stall = 0;
    const int iterations = fresh ? opts_.lagrangian_root_iterations : opts_.lagrangian_iterations;
    for (int it = 0; it < iterations; ++it) {
      double value = base;
      for (std::size_t b : free_) coef_[b] = obj_lin_[b];
      for (std::size_t k = 0; k < conts_.size(); ++k) kap_[k] = conts_[k].obj;
      for (std::size_t i = 0; i < concave_roots_.size(); ++i) {
        const Root& r = roots_[concave_roots_[i]];
        const double t = dual[t0 + i];
        const double factor = r.weight / (2.0 * t);
        const Form& f = forms_[root_forms + i];
        value += r.weight * t / 2.0 + factor * f.constant;
        for (std::size_t j = f.begin; j < f.end; ++j) coef_[form_terms_[j].bin] += factor * form_terms_[j].coef;
        for (const auto& [k, c] : r.cont) kap_[k] += factor * c;
      }
      for (std::size_t i = 0; i < relax_rows_.size(); ++i) {
        const double mu = dual[mu0 + i];
        if (mu == 0.0) continue;
        const Form& f = forms_[i];
        value += mu * f.constant;
        for (std::size_t j = f.begin; j < f.end; ++j) coef_[form_terms_[j].bin] += mu * form_terms_[j].coef;
      }
      std::size_t piece = 0;
      for (const PieceGroup& g : groups_) {
        const double kap = kap_[g.cont];
        for (std::size_t p = 0; p < g.rows.size(); ++p, ++piece) {
          const double w = kap * dual[lam0 + piece];
          if (w == 0.0) continue;
          const Form& f = forms_[relax_rows_.size() + piece];
          value += w * f.constant;
          for (std::size_t j = f.begin; j < f.end; ++j) coef_[form_terms_[j].bin] += w * form_terms_[j].coef;
        }
      }
      for (std::size_t b : free_) {
        const bool take = coef_[b] < 0.0;
        xs_[b] = take ? 1 : 0;
        if (take) value += coef_[b];
      }
      if (value > best) {
        best = value;
        best_dual_ = dual;
        stall = 0;
      } else if (++stall >= 3) {
        theta *= 0.5;
        stall = 0;
      }
      if (best >= incumbent_ - opts_.prune_tol) break;

      // subgradient at the minimizer
      double gsq = 0.0;
      for (std::size_t i = 0; i < relax_rows_.size(); ++i) {
        double g = form_value(forms_[i], xs_);
        if (dual[mu0 + i] <= 0.0 && g < 0.0) g = 0.0;
        grad_[mu0 + i] = g;
        gsq += g * g;
      }
      piece = 0;
      for (const PieceGroup& g : groups_) {
        const double kap = kap_[g.cont];
        double mean = 0.0, est = 0.0;
        const std::size_t first = piece;
        for (std::size_t p = 0; p < g.rows.size(); ++p, ++piece) {
          const double v = form_value(forms_[relax_rows_.size() + piece], xs_);
          est += dual[lam0 + piece] * v;
          grad_[lam0 + piece] = kap * v;
          mean += kap * v;
        }
        est_[g.cont] = est;
        mean /= static_cast<double>(g.rows.size());
        for (std::size_t p = first; p < piece; ++p) {
          grad_[lam0 + p] -= mean;
          gsq += grad_[lam0 + p] * grad_[lam0 + p];
        }
      }
      // tangent points follow sqrt(q) at the minimizer
      for (std::size_t i = 0; i < concave_roots_.size(); ++i) {
        const Root& r = roots_[concave_roots_[i]];
        double q = form_value(forms_[root_forms + i], xs_);
        for (const auto& [k, c] : r.cont) q += c * est_[k];
        dual[t0 + i] = std::sqrt(std::max(q, 1e-6));
      }
      if (gsq < 1e-18) continue;
      const double target =
          std::isfinite(incumbent_) ? incumbent_ : value + 0.1 * std::max(1.0, std::abs(value));
      const double step = theta * std::max(target - value, 1e-9) / gsq;
      for (std::size_t i = 0; i < relax_rows_.size(); ++i) {
        dual[mu0 + i] = std::max(0.0, dual[mu0 + i] + step * grad_[mu0 + i]);
      }
      piece = 0;
      for (const PieceGroup& g : groups_) {
        simplex_buf_.assign(dual.begin() + static_cast<std::ptrdiff_t>(lam0 + piece),
                            dual.begin() + static_cast<std::ptrdiff_t>(lam0 + piece + g.rows.size()));
        for (std::size_t p = 0; p < g.rows.size(); ++p) simplex_buf_[p] += step * grad_[lam0 + piece + p];
        project_simplex(simplex_buf_);
        for (std::size_t p = 0; p < g.rows.size(); ++p) dual[lam0 + piece + p] = simplex_buf_[p];
        piece += g.rows.size();
      }
    }
    dual = best_dual_;
    for (std::size_t b : free_) xs_[b] = 0;
    return best;
  }

  static void project_simplex(Vector& v) {
    Vector u = v;
    std::sort(u.begin(), u.end(), std::greater<>());
    double cum = 0.0, theta = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      cum += u[i];
      const double t = (cum - 1.0) / static_cast<double>(i + 1);
      if (u[i] - t > 0.0) theta = t;
    }
    for (double& x : v) x = std::max(0.0, x - theta);
  }

  // ------------------------------------------------------------------
  // Search
  // ------------------------------------------------------------------

  struct Node {
    Domain dom;
    double bound;
    std::size_t path_end;
    std::vector<std::uint8_t> visited;
    Vector dual;
  };

  bool out_of_budget() {
    if (nodes_ >= budget_.max_nodes) return true;
    if ((nodes_ & 63U) == 0 && std::isfinite(budget_.seconds)) {
      const Seconds elapsed = std::chrono::steady_clock::now() - start_;
      if (elapsed.count() > budget_.seconds) return true;
    }
    return false;
  }

  void offer(const Domain& dom, double value) {
    if (value < incumbent_) {
      incumbent_ = value;
      best_bin_ = dom;
    }
  }

  double run_branch_and_bound() {
    Node root;
    root.dom.assign(num_bin_, -1);
    if (hook_) {
      root.path_end = hook_->source();
      root.visited.assign(hook_->num_nodes(), 0);
      root.visited[root.path_end] = 1;
      if (!hook_root_fixings(root.dom)) return kInf;
    }
    if (!propagate(root.dom)) return kInf;
    root.bound = bound(root.dom, root.dual);
    if (root.bound == kInf) return kInf;
    const double root_bound = root.bound;

    std::vector<Node> stack;
    stack.push_back(std::move(root));
    std::vector<Node> children;
    while (!stack.empty()) {
      if (out_of_budget()) {
        stopped_ = true;
        double open = kInf;
        for (const Node& nd : stack) open = std::min(open, nd.bound);
        return std::max(root_bound, open);
      }
      Node node = std::move(stack.back());
      stack.pop_back();
      ++nodes_;
      if (node.bound >= incumbent_ - opts_.prune_tol) continue;

      children.clear();
      const bool path_open = hook_ && node.path_end != hook_->sink();
      if (path_open) {
        extend_path(node, children);
      } else {
        std::size_t pick = num_bin_;
        for (std::size_t b : order_) {
          if (node.dom[b] < 0) {
            pick = b;
            break;
          }
        }
        if (pick == num_bin_) {
          Vector vals = slot_values(node.dom);
          if (auto v = leaf_value(vals, nullptr)) offer(node.dom, *v);
          continue;
        }
        for (std::int8_t val : {std::int8_t{0}, std::int8_t{1}}) {
          Node child{node.dom, 0.0, node.path_end, node.visited, node.dual};
          child.dom[pick] = val;
          if (!propagate(child.dom)) continue;
          children.push_back(std::move(child));
        }
      }
      for (Node& child : children) {
        if (is_complete(child.dom) && !(hook_ && child.path_end != hook_->sink())) {
          Vector vals = slot_values(child.dom);
          child.bound = kInf;
          if (auto v = leaf_value(vals, nullptr)) {
            offer(child.dom, *v);
          }
          continue;
        }
        child.bound = bound(child.dom, child.dual);
      }
      // explore the most promising child first
      std::stable_sort(children.begin(), children.end(),
                       [](const Node& a, const Node& b) { return a.bound > b.bound; });
      for (Node& child : children) {
        if (child.bound < incumbent_ - opts_.prune_tol) stack.push_back(std::move(child));
      }
    }
    return std::min(root_bound, incumbent_) == kInf ? kInf : incumbent_;
  }

  bool is_complete(const Domain& dom) const {
    return std::none_of(dom.begin(), dom.end(), [](std::int8_t d) { return d < 0; });
  }

  // Arcs into s, out of t, or off every s-t path can never be chosen.
  bool hook_root_fixings(Domain& dom) const {
    const Digraph& g = *hook_;
    std::vector<std::uint8_t> from_s(g.num_nodes(), 0), to_t(g.num_nodes(), 0);
    std::vector<std::size_t> stack{g.source()};
    from_s[g.source()] = 1;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      for (std::size_t k : g.out_arcs(v)) {
        const std::size_t w = g.arc(k).head;
        if (!from_s[w]) {
          from_s[w] = 1;
          stack.push_back(w);
        }
      }
    }
    stack = {g.sink()};
    to_t[g.sink()] = 1;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      for (std::size_t k : g.in_arcs(v)) {
        const std::size_t w = g.arc(k).tail;
        if (!to_t[w]) {
          to_t[w] = 1;
          stack.push_back(w);
        }
      }
    }
    for (std::size_t k = 0; k < g.num_arcs(); ++k) {
      const Arc& a = g.arc(k);
      const bool usable = from_s[a.tail] && to_t[a.head] && a.head != g.source() &&
                          a.tail != g.sink();
      if (!usable && !fix(dom, hook_arc_bin_[k], 0)) return false;
    }
    return true;
  }

  void extend_path(const Node& node, std::vector<Node>& children) {
    const Digraph& g = *hook_;
    const std::size_t u = node.path_end;
    for (std::size_t e : g.out_arcs(u)) {
      const std::size_t v = g.arc(e).head;
      if (node.visited[v] || node.dom[hook_arc_bin_[e]] == 0) continue;
      Node child{node.dom, 0.0, v, node.visited, node.dual};
      child.visited[v] = 1;
      bool ok = fix(child.dom, hook_arc_bin_[e], 1);
      for (std::size_t f : g.out_arcs(u)) {
        if (f != e) ok = ok && fix(child.dom, hook_arc_bin_[f], 0);
      }
      for (std::size_t f : g.in_arcs(v)) {
        if (f != e) ok = ok && fix(child.dom, hook_arc_bin_[f], 0);
      }
      for (std::size_t f : g.out_arcs(v)) {
        if (child.visited[g.arc(f).head]) ok = ok && fix(child.dom, hook_arc_bin_[f], 0);
      }
      if (v == g.sink()) {
        for (std::size_t k = 0; k < g.num_arcs(); ++k) {
          if (child.dom[hook_arc_bin_[k]] < 0) ok = ok && fix(child.dom, hook_arc_bin_[k], 0);
        }
      } else {
        ok = ok && sink_reachable(child);
      }
      ok = ok && propagate(child.dom);
      if (ok) children.push_back(std::move(child));
    }
  }

  bool sink_reachable(const Node& node) const {
    const Digraph& g = *hook_;
    std::vector<std::uint8_t> seen(g.num_nodes(), 0);
    std::vector<std::size_t> stack{node.path_end};
    seen[node.path_end] = 1;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      if (v == g.sink()) return true;
      for (std::size_t k : g.out_arcs(v)) {
        const std::size_t w = g.arc(k).head;
        if (seen[w] || node.visited[w] || node.dom[hook_arc_bin_[k]] == 0) continue;
        seen[w] = 1;
        stack.push_back(w);
      }
    }
    return false;
  }

  double run_enumeration() {
    Domain dom(num_bin_, 0);
    Vector vals = slot_values(dom);
    const std::uint64_t total = std::uint64_t{1} << num_bin_;
    for (std::uint64_t k = 0; k < total; ++k) {
      if (k > 0) {
        // Gray code: flip the lowest set bit position of k
        const auto b = static_cast<std::size_t>(__builtin_ctzll(k));
        const double delta = dom[b] == 0 ? 1.0 : -1.0;
        dom[b] = static_cast<std::int8_t>(1 - dom[b]);
        for (const auto& [s, coef] : columns_[b]) vals[s] += delta * coef;
      }
      ++nodes_;
      if ((k & 4095U) == 0 && k > 0 && out_of_budget()) {
        stopped_ = true;
        return -kInf;
      }
      if (auto v = leaf_value(vals, nullptr); v && *v < incumbent_) {
        // recompute from scratch to avoid accumulated drift in the report
        Vector exact = slot_values(dom);
        if (auto w = leaf_value(exact, nullptr)) offer(dom, *w);
      }
    }
    return incumbent_;
  }

  std::vector<double> expand(const Domain& dom) const {
    std::vector<double> out(num_vars_, 0.0);
    for (std::size_t b = 0; b < num_bin_; ++b) out[bin_var_[b]] = dom[b] == 1 ? 1.0 : 0.0;
    Vector vals = slot_values(dom);
    Vector cont;
    leaf_value(vals, &cont);
    for (std::size_t k = 0; k < cont.size(); ++k) out[cont_var_[k]] = cont[k];
    return out;
  }

  Options opts_;
  Budget budget_;
  std::chrono::steady_clock::time_point start_;
  double sign_ = 1.0;
  std::size_t num_bin_ = 0;
  std::size_t num_vars_ = 0;
  std::vector<int> var_bin_, var_cont_;
  std::vector<std::size_t> bin_var_, cont_var_;
  std::vector<int> bin_priority_;
  std::vector<Slot> slots_;
  std::vector<std::vector<std::pair<std::size_t, double>>> columns_;
  std::vector<Row> rows_;
  std::vector<Norm> norms_;
  std::vector<Root> roots_;
  std::vector<Cont> conts_;
  std::vector<int> obj_norms_;
  Vector obj_lin_;
  double obj_const_ = 0.0;
  std::size_t obj_slot_ = 0;
  std::vector<std::size_t> order_;
  std::optional<Digraph> hook_;
  std::vector<std::size_t> hook_arc_bin_;
  struct PieceGroup {
    std::size_t cont;
    std::vector<int> rows;  // -1 = the variable's own bound
  };
  bool lagrangian_ok_ = false;
  std::vector<std::size_t> relax_rows_;
  std::vector<PieceGroup> groups_;
  std::vector<std::size_t> concave_roots_;
  std::size_t num_pieces_ = 0;
  std::size_t dual_size_ = 0;
  // scratch for lagrangian_bound
  std::vector<Form> forms_;
  std::vector<BinTerm> form_terms_;
  std::vector<std::size_t> free_;
  std::vector<std::uint8_t> xs_;
  Vector ref_, coef_, kap_, est_, grad_, comp_, best_dual_, simplex_buf_;

  double incumbent_ = kInf;
  Domain best_bin_;
  std::uint64_t nodes_ = 0;
  bool stopped_ = false;
};

/// Convenience wrapper around Solver.
inline Result solve(const BinaryProgram& prog, const Budget& budget = {}, Options opts = {}) {
  Solver s(prog, opts);
  return s.solve(budget);
}

/// Bound over all completions of `partial` (-1 = free), see Solver::node_bound.
inline double node_bound(const BinaryProgram& prog, const std::vector<int>& partial) {
  Solver s(prog);
  return s.node_bound(partial);
}

}  // namespace mmr::bip

#endif  // MMR_BIP_HPP
