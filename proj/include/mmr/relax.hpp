/**
 * @file relax.hpp
 * @brief Scenario relaxation for min-max regret: a master problem over a
 * growing cut set, alternated with separation until the bounds meet.
 */

#ifndef MMR_RELAX_HPP
#define MMR_RELAX_HPP

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "mmr/bip.hpp"
#include "mmr/core.hpp"
#include "mmr/exactalgos.hpp"
#include "mmr/oracle.hpp"
#include "mmr/regret_eval.hpp"
#include "mmr/subproblem.hpp"
#include "mmr/uncert.hpp"

namespace mmr {

enum class CutType { Type1, Type2 };
enum class MasterMode { Enumeration, BranchAndBound };

struct RelaxConfig {
  CutType cut_type = CutType::Type2;
  SubMode sub_mode = SubMode::LinearizationB;
  MasterMode master_mode = MasterMode::BranchAndBound;
  double gap = 1e-6;
  double time_limit = 900.0;
  /// Node cap per bip call; finite values make runs reproducible under load.
  std::uint64_t node_limit = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t enumeration_limit = kDefaultEnumerationLimit;
  bool record_trace = true;
};

/// Parses "C1-A", "C1-B", "C2-A" or "C2-B".
inline RelaxConfig relax_config_for(const std::string& method) {
  RelaxConfig cfg;
  if (method.size() != 4 || method[0] != 'C' || method[2] != '-') {
    throw InputError("unknown method '" + method + "'");
  }
  if (method[1] == '1') {
    cfg.cut_type = CutType::Type1;
  } else if (method[1] == '2') {
    cfg.cut_type = CutType::Type2;
  } else {
    throw InputError("unknown method '" + method + "'");
  }
  if (method[3] == 'A') {
    cfg.sub_mode = SubMode::LinearizationA;
  } else if (method[3] == 'B') {
    cfg.sub_mode = SubMode::LinearizationB;
  } else {
    throw InputError("unknown method '" + method + "'");
  }
  return cfg;
}

/// Right-hand side of a cut at x (the lower bound it places on z).
inline double cut_value(const UncertaintySet& set, const Cut& cut, const BinaryVector& x) {
  if (const auto* sc = std::get_if<ScenarioCut>(&cut.kind)) return x.dot(sc->scenario) - sc->nominal_opt;
  return support(set, x.minus(std::get<RivalCut>(cut.kind).rival)).value;
}

struct MasterResult {
  double z_lower = 0.0;
  BinaryVector x;
  SolveStatus status = SolveStatus::Optimal;
};

namespace detail {

inline void add_cut_row(bip::BinaryProgram& prog, const std::vector<std::size_t>& xv,
                        std::size_t z, const UncertaintySet& set, const Cut& cut) {
  const std::size_t n = xv.size();
  bip::Constraint row;
  row.lhs.add(z, -1.0);
  if (const auto* sc = std::get_if<ScenarioCut>(&cut.kind)) {
    // c^T x - z <= opt(c)
    for (std::size_t i = 0; i < n; ++i) row.lhs.add(xv[i], sc->scenario[i]);
    row.rhs = sc->nominal_opt;
    prog.add_constraint(std::move(row));
    return;
  }
  const BinaryVector& y = std::get<RivalCut>(cut.kind).rival;
  if (const auto* box = std::get_if<IntervalSet>(&set)) {
    // z >= sum_i c_i (x_i - y_i) + d_i |x_i - y_i|, linear for binary y
    double cst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = box->center()[i], d = box->halfwidth()[i];
      cst -= c * y[i];
      if (y[i]) {
        row.lhs.add(xv[i], c - d);
        cst += d;
      } else {
        row.lhs.add(xv[i], c + d);
      }
    }
    row.rhs = -cst;
    prog.add_constraint(std::move(row));
    return;
  }
  // c^T x - z + ||C^T x - C^T y|| <= c^T y
  const auto& ell = std::get<GeneralEllipsoid>(set);
  const Matrix& cm = ell.shape();
  for (std::size_t i = 0; i < n; ++i) row.lhs.add(xv[i], ell.center()[i]);
  row.rhs = y.dot(ell.center());
  const Vector cty = cm.transpose_times(y.as_real());
  bip::NormTerm cone;
  for (std::size_t k = 0; k < cm.cols(); ++k) {
    bip::AffineExpr comp;
    comp.constant = -cty[k];
    for (std::size_t i = 0; i < n; ++i) comp.add(xv[i], cm(i, k));
    if (comp.terms.empty() && comp.constant == 0.0) continue;
    cone.components.push_back(std::move(comp));
  }
  if (!cone.components.empty()) row.cone = std::move(cone);
  prog.add_constraint(std::move(row));
}

}  // namespace detail

/**
 * min z s.t. z >= cut(x) for every cut, x in X. `set` must be an interval
 * or general ellipsoid (rival cuts are evaluated against it).
 */
inline MasterResult master_solve(const CombinatorialProblem& problem, const std::vector<Cut>& cuts,
                                 const UncertaintySet& set, MasterMode mode,
                                 const bip::Budget& budget = {},
                                 std::uint64_t enumeration_limit = kDefaultEnumerationLimit) {
  detail::require(!cuts.empty(), "master problem needs at least one cut");
  const std::size_t n = problem.dimension();
  MasterResult out;
  if (mode == MasterMode::Enumeration) {
    out.z_lower = std::numeric_limits<double>::infinity();
    for_each_feasible(problem, enumeration_limit, [&](const BinaryVector& x) {
      double z = -std::numeric_limits<double>::infinity();
      for (const Cut& cut : cuts) {
        z = std::max(z, cut_value(set, cut, x));
        if (z >= out.z_lower) return;
      }
      if (z < out.z_lower) {
        out.z_lower = z;
        out.x = x;
      }
    });
    return out;
  }

  bip::BinaryProgram prog;
  std::vector<std::size_t> xv(n);
  for (std::size_t i = 0; i < n; ++i) xv[i] = prog.add_binary();
  const double inf = std::numeric_limits<double>::infinity();
  const std::size_t z = prog.add_continuous(-inf, inf);
  prog.objective().sense = bip::Sense::Minimize;
  prog.objective().linear.add(z, 1.0);
  for (const Cut& cut : cuts) detail::add_cut_row(prog, xv, z, set, cut);
  if (problem.is_shortest_path()) prog.set_path_hook({problem.graph(), xv});

  const bip::Result res = bip::solve(prog, budget);
  if (res.status == SolveStatus::Infeasible) throw InfeasibleError("master problem infeasible");
  out.status = res.status;
  out.x = BinaryVector(n);
  if (res.assignment.empty()) {
    out.z_lower = res.bound;  // stopped without an incumbent; x is not meaningful
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) out.x.set(i, res.assignment[xv[i]] > 0.5);
  if (res.status == SolveStatus::Optimal) {
    // report the exact max over cuts at the chosen point
    double zx = -inf;
    for (const Cut& cut : cuts) zx = std::max(zx, cut_value(set, cut, out.x));
    out.z_lower = zx;
  } else {
    out.z_lower = res.bound;
  }
  return out;
}

struct Separation {
  Cut cut;
  /// Upper bound on Reg(x) (exact when status is Optimal).
  double regret = 0.0;
  SolveStatus status = SolveStatus::Optimal;
  SeparationRecord record;
};

/// Generates the cut at x: the worst-case scenario (type 1) or rival (type 2).
inline Separation separate(const CombinatorialProblem& problem, const UncertaintySet& set,
                           const BinaryVector& x, CutType type, SubproblemEngine& engine) {
  Separation out;
  out.record.x = x;
  if (const auto* box = std::get_if<IntervalSet>(&set)) {
    problem.require_feasible(x);
    Vector c = interval_worst_scenario(*box, x);
    const NominalResult opt = nominal_opt(problem, c);
    out.regret = x.dot(c) - opt.value;
    out.record.scenario = c;
    out.record.nominal_opt = opt.value;
    out.record.rival = opt.argmin;
  } else {
    const auto& ell = std::get<GeneralEllipsoid>(set);
    const SubResult sub = solve_sub(engine, problem, ell, x);
    const NominalResult opt = nominal_opt(problem, sub.scenario);
    out.status = sub.status;
    out.regret = sub.status == SolveStatus::Optimal ? sub.value : sub.bound;
    out.record.scenario = sub.scenario;
    out.record.nominal_opt = opt.value;
    out.record.rival = sub.rival;
  }
  if (type == CutType::Type1) {
    out.cut.kind = ScenarioCut{out.record.scenario, out.record.nominal_opt};
  } else {
    out.cut.kind = RivalCut{out.record.rival};
  }
  return out;
}

namespace detail {

inline bool same_cut(const Cut& a, const Cut& b) {
  if (a.is_type1() != b.is_type1()) return false;
  if (a.is_type1()) {
    const auto& sa = std::get<ScenarioCut>(a.kind);
    const auto& sb = std::get<ScenarioCut>(b.kind);
    return sa.scenario == sb.scenario && sa.nominal_opt == sb.nominal_opt;
  }
  return std::get<RivalCut>(a.kind).rival == std::get<RivalCut>(b.kind).rival;
}

// (SP) relies on nominal solves at scenarios of U: require a nonnegative
// center, and on cyclic graphs every scenario must be nonnegative.
inline void check_sp_nonnegativity(const CombinatorialProblem& problem, const UncertaintySet& set) {
  if (!problem.is_shortest_path()) return;
  const Vector center = center_of(set);
  for (double c : center) {
    if (c < 0.0) throw InputError("shortest path instances need nonnegative nominal costs");
  }
  if (problem.graph().acyclic()) return;
  const std::size_t n = problem.dimension();
  for (std::size_t i = 0; i < n; ++i) {
    Vector e(n, 0.0);
    e[i] = -1.0;
    if (-support(set, e).value < 0.0) {
      throw InputError("cyclic shortest path instances need a nonnegative uncertainty set");
    }
  }
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return Seconds(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

/// Exact min-max regret for a finite scenario set: min z, z >= c_j^T x - opt(c_j).
inline SolveReport solve_finite(const CombinatorialProblem& problem, const FiniteSet& set,
                                const RelaxConfig& cfg = {}) {
  detail::require_dim(set.dimension(), problem.dimension(), "finite set");
  const auto t0 = std::chrono::steady_clock::now();
  SolveReport report;
  for (const Vector& c : set.scenarios()) {
    Cut cut;
    cut.kind = ScenarioCut{c, nominal_opt(problem, c).value};
    report.cuts.push_back(std::move(cut));
  }
  const UncertaintySet as_set = set;
  const bip::Budget budget{cfg.time_limit, cfg.node_limit};
  const MasterResult m =
      master_solve(problem, report.cuts, as_set, cfg.master_mode, budget, cfg.enumeration_limit);
  report.master_time = Seconds(detail::seconds_since(t0));
  report.iterations = 1;
  report.incumbent = m.x;
  report.regret = eval_finite(problem, set, m.x);
  report.lower_bound = m.z_lower;
  report.status = m.status;
  if (cfg.record_trace) {
    report.trace.push_back({1, m.z_lower, report.regret, "scenario",
                            report.master_time.count(), 0.0});
  }
  return report;
}

/**
 * Min-max regret by scenario relaxation. Iteration 0 separates at the
 * midpoint solution (nominal argmin at the center); each further iteration
 * solves the master, stops once upper - z <= gap, else separates at the
 * master solution and adds the new cut. Axis-parallel ellipsoids are
 * handled as general ellipsoids; finite sets go to solve_finite.
 */
inline SolveReport solve_regret(const CombinatorialProblem& problem, const UncertaintySet& input,
                                const RelaxConfig& cfg = {}) {
  detail::require(cfg.gap > 0.0, "gap tolerance must be positive");
  detail::require_dim(dimension(input), problem.dimension(), "uncertainty set");
  if (const auto* fin = std::get_if<FiniteSet>(&input)) return solve_finite(problem, *fin, cfg);
  const UncertaintySet set = std::holds_alternative<AxisParallelEllipsoid>(input)
                                 ? UncertaintySet(as_general_ellipsoid(
                                       std::get<AxisParallelEllipsoid>(input)))
                                 : input;
  detail::check_sp_nonnegativity(problem, set);

  const auto t0 = std::chrono::steady_clock::now();
  SubproblemEngine engine;
  engine.mode = cfg.sub_mode;
  engine.enumeration_limit = cfg.enumeration_limit;
  engine.budget.max_nodes = cfg.node_limit;

  auto remaining = [&] { return cfg.time_limit - detail::seconds_since(t0); };
  const char* kind = cfg.cut_type == CutType::Type1 ? "type1" : "type2";

  SolveReport report;
  double upper = std::numeric_limits<double>::infinity();
  double lower = 0.0;  // regret is never negative

  auto run_separation = [&](const BinaryVector& x, int iteration) {
    const auto ts = std::chrono::steady_clock::now();
    engine.budget.seconds = std::max(remaining(), 0.0);
    Separation sep = separate(problem, set, x, cfg.cut_type, engine);
    const double secs = detail::seconds_since(ts);
    report.sub_time += Seconds(secs);
    if (sep.regret < upper) {
      upper = sep.regret;
      report.incumbent = x;
    }
    sep.cut.creation_iteration = iteration;
    report.separations.push_back(sep.record);
    return std::pair<Separation, double>{std::move(sep), secs};
  };

  const BinaryVector seed = midpoint_solution(problem, set);
  auto [first, first_secs] = run_separation(seed, 0);
  report.cuts.push_back(first.cut);
  if (cfg.record_trace) report.trace.push_back({0, lower, upper, kind, 0.0, first_secs});
  SolveStatus status = first.status == SolveStatus::Optimal ? SolveStatus::Optimal
                                                             : SolveStatus::TimeLimit;

  for (int it = 1; status == SolveStatus::Optimal; ++it) {
    if (remaining() <= 0.0) {
      status = SolveStatus::TimeLimit;
      break;
    }
    const auto tm = std::chrono::steady_clock::now();
    const bip::Budget budget{std::max(remaining(), 0.0), cfg.node_limit};
    const MasterResult m =
        master_solve(problem, report.cuts, set, cfg.master_mode, budget, cfg.enumeration_limit);
    const double master_secs = detail::seconds_since(tm);
    report.master_time += Seconds(master_secs);
    report.iterations = it;
    lower = std::max(lower, m.z_lower);
    if (m.status != SolveStatus::Optimal) {
      status = SolveStatus::TimeLimit;
      if (cfg.record_trace) report.trace.push_back({it, lower, upper, "", master_secs, 0.0});
      break;
    }
    if (upper - m.z_lower <= cfg.gap) {
      if (cfg.record_trace) report.trace.push_back({it, lower, upper, "", master_secs, 0.0});
      break;
    }
    auto [sep, sub_secs] = run_separation(m.x, it);
    const bool duplicate = std::any_of(report.cuts.begin(), report.cuts.end(),
                                       [&](const Cut& c) { return detail::same_cut(c, sep.cut); });
    const bool closed = upper - m.z_lower <= cfg.gap;
    if (cfg.record_trace) {
      report.trace.push_back({it, lower, upper, closed || duplicate ? "" : kind, master_secs,
                              sub_secs});
    }
    if (sep.status != SolveStatus::Optimal) {
      status = SolveStatus::TimeLimit;
      report.cuts.push_back(sep.cut);
      break;
    }
    // a repeated cut means the master value already equals Reg(x) up to rounding
    if (closed || duplicate) break;
    report.cuts.push_back(sep.cut);
  }

  report.regret = upper;
  report.lower_bound = std::min(lower, upper);
  report.status = status;
  report.stability_incidents = engine.stability_incidents;
  return report;
}

/// Writes the per-iteration trace as CSV.
inline void write_trace_csv(std::ostream& os, const SolveReport& report) {
  os << "iteration,z_lower,upper,cut_kind,master_seconds,sub_seconds\n";
  for (const TraceRecord& t : report.trace) {
    os << t.iteration << ',' << t.z_lower << ',' << t.upper << ',' << t.cut_kind << ','
       << t.master_seconds << ',' << t.sub_seconds << '\n';
  }
}

}  // namespace mmr

#endif  // MMR_RELAX_HPP
