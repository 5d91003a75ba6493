// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance            run every criterion
//   acceptance 1 4 11     run only the listed criteria
//
// Exit status is 0 iff every selected criterion passed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mmr/bench.hpp"
#include "mmr/exactalgos.hpp"
#include "mmr/gadgets.hpp"
#include "mmr/gen.hpp"
#include "mmr/regret_eval.hpp"
#include "mmr/relax.hpp"
#include "oracles.hpp"

using namespace mmr;

namespace {

// Pinned tolerances.
constexpr double kSolveTol = 1e-6;      // criteria 1, 2, 7, 8 (absolute)
constexpr double kCutTol = 1e-9;        // criterion 3
constexpr double kRatioTol = 1e-9;      // criterion 9
constexpr double kSupportTol = 1e-7;    // criterion 10, relative to the magnitude involved

const std::vector<std::string> kExact = {"C1-A", "C1-B", "C2-A", "C2-B"};

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct SolveCase {
  CombinatorialProblem problem;
  GeneralEllipsoid set;
  double optimum = 0.0;
};

// Criterion 1 instances and records, shared with criteria 3 and 9.
std::vector<SolveCase> g_cases;
std::vector<std::pair<SeparationRecord, const SolveCase*>> g_records;
bool g_solved = false;

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

BinaryVector random_member(Rng& rng, const CombinatorialProblem& p) {
  const auto all = oracle::all_solutions(p);
  return all[static_cast<std::size_t>(rng.uniform(0, static_cast<std::int64_t>(all.size()) - 1))];
}

Outcome criterion1() {
  g_cases.clear();
  g_records.clear();
  Rng rng(1001);
  const Deviation devs[] = {Deviation::Small, Deviation::Medium, Deviation::Large};
  const int dens[] = {5, 15, 25};
  for (int k = 0; k < 200; ++k) {
    const GenSpec spec{Family::I, static_cast<int>(rng.uniform(2, 10)), devs[k % 3], dens[(k / 3) % 3],
                       substream_seed(11, static_cast<std::uint64_t>(k))};
    Instance inst = generate(spec);
    g_cases.push_back({std::move(inst.problem), std::move(inst.set), 0.0});
  }
  for (int k = 0; k < 100; ++k) {
    const GenSpec spec{Family::J, static_cast<int>(rng.uniform(1, 3)), devs[k % 3], dens[(k / 3) % 3],
                       substream_seed(12, static_cast<std::uint64_t>(k))};
    Instance inst = generate(spec);
    g_cases.push_back({std::move(inst.problem), std::move(inst.set), 0.0});
  }
  Outcome out;
  int mismatches = 0;
  double worst = 0.0;
  for (SolveCase& c : g_cases) {
    c.optimum = min_regret_bruteforce(c.problem, c.set).regret;
    for (const std::string& m : kExact) {
      const SolveReport r = solve_regret(c.problem, c.set, relax_config_for(m));
      const double err = std::abs(r.regret - c.optimum);
      worst = std::max(worst, err);
      if (r.status != SolveStatus::Optimal || !(err <= kSolveTol)) ++mismatches;
      for (const SeparationRecord& rec : r.separations) g_records.emplace_back(rec, &c);
    }
  }
  g_solved = true;
  out.pass = mismatches == 0;
  out.detail = std::to_string(g_cases.size()) + " instances x 4 methods, " + std::to_string(mismatches) +
               " mismatches, max |diff| " + fmt("%.2e", worst);
  return out;
}

Outcome criterion2() {
  Rng rng(2002);
  int bad = 0;
  double worst = 0.0;
  auto check = [&](double got, double want) {
    const double err = std::abs(got - want);
    worst = std::max(worst, err);
    if (!(err <= kSolveTol)) ++bad;
  };
  for (int k = 0; k < 200; ++k) {
    const bool sp = k % 4 == 3;
    const auto p = sp ? CombinatorialProblem::shortest_path(layered_graph(static_cast<int>(rng.uniform(1, 3))))
                      : CombinatorialProblem::unconstrained(static_cast<std::size_t>(rng.uniform(1, 10)));
    const std::size_t n = p.dimension();
    const BinaryVector x = random_member(rng, p);
    const auto box = oracle::random_interval(rng, n, sp);
    const auto fin = oracle::random_finite(rng, n, static_cast<std::size_t>(rng.uniform(1, 5)), sp);
    const auto ell = oracle::random_ellipsoid(rng, n, static_cast<int>(rng.uniform(0, 50)), sp);
    check(eval_interval(p, box, x), eval_bruteforce(p, box, x));
    check(eval_finite(p, fin, x), eval_bruteforce(p, fin, x));
    const double ref = eval_bruteforce(p, ell, x);
    for (SubMode m : {SubMode::LinearizationA, SubMode::LinearizationB, SubMode::BruteForce}) {
      SubproblemEngine eng;
      eng.mode = m;
      check(eval_ellipsoid(p, ell, x, eng), ref);
    }
  }
  return {bad == 0, "200 instances x 5 evaluators, " + std::to_string(bad) + " mismatches, max |diff| " +
                        fmt("%.2e", worst)};
}

Outcome criterion3() {
  if (!g_solved) criterion1();
  int violations = 0;
  double worst = -1e300;
  for (const auto& [rec, c] : g_records) {
    const double lhs = rec.x.dot(rec.scenario) - nominal_opt(c->problem, rec.scenario).value;
    const double rhs = oracle::support(c->set, oracle::diff(rec.x, rec.rival));
    worst = std::max(worst, lhs - rhs);
    if (lhs > rhs + kCutTol) ++violations;
  }
  return {violations == 0, std::to_string(g_records.size()) + " cut pairs, " + std::to_string(violations) +
                               " violations, max lhs-rhs " + fmt("%.2e", worst)};
}

double median(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

Outcome criterion4() {
  int two = 0;
  for (int k = 0; k < 30; ++k) {
    const GenSpec spec{Family::I, k < 15 ? 10 : 30, Deviation::Large, 25, substream_seed(44, static_cast<std::uint64_t>(k))};
    const Instance inst = generate(spec);
    RelaxConfig cfg = relax_config_for("C2-B");
    cfg.record_trace = false;
    const SolveReport r = solve_regret(inst.problem, inst.set, cfg);
    if (r.status == SolveStatus::Optimal && r.cuts.size() == 2) ++two;
  }
  std::vector<int> c1, c2;
  std::uint64_t index = 0;
  for (int n : {10, 30}) {
    for (int p : {5, 15, 25}) {
      for (Deviation d : {Deviation::Small, Deviation::Medium, Deviation::Large}) {
        for (int s = 0; s < 3; ++s) {
          const Instance inst = generate({Family::I, n, d, p, substream_seed(45, index++)});
          for (const char* m : {"C1-B", "C2-B"}) {
            RelaxConfig cfg = relax_config_for(m);
            cfg.record_trace = false;
            cfg.node_limit = 5000;
            const SolveReport r = solve_regret(inst.problem, inst.set, cfg);
            (m[1] == '1' ? c1 : c2).push_back(static_cast<int>(r.cuts.size()));
          }
        }
      }
    }
  }
  const double m1 = median(c1), m2 = median(c2);
  return {two >= 27 && m2 < m1, std::to_string(two) + "/30 dense large-deviation runs with 2 cuts; median cuts C1 " +
                                    fmt("%.1f", m1) + " vs C2 " + fmt("%.1f", m2) + " over 54 instances"};
}

Outcome gadget_criterion(bool shortest_path) {
  Rng rng(shortest_path ? 6006 : 5005);
  int disagree = 0, yes = 0;
  for (int k = 0; k < 200; ++k) {
    const auto a = oracle::random_partition_list(rng, shortest_path ? 8 : 12, 50);
    const EvalGadget g = shortest_path ? gadget_sp_eval(a) : gadget_up_eval(a);
    SubproblemEngine eng;
    const double reg = eval_regret(g.problem, g.set, g.x, eng);
    const bool oracle_yes = partition_oracle(a);
    yes += oracle_yes;
    if (reaches_threshold(reg, g.threshold, g.total) != oracle_yes) ++disagree;
  }
  return {disagree == 0, "200 lists (" + std::to_string(yes) + " yes), " + std::to_string(disagree) + " disagreements"};
}

Outcome criterion7() {
  Rng rng(7007);
  int bad = 0, yes = 0;
  for (int k = 0; k < 100; ++k) {
    const auto a = oracle::random_partition_list(rng, 10, 50);
    const SolveGadget fin = gadget_finite_solve(a);
    const SolveGadget line = gadget_line_ellipsoid(a);
    const double v_fin = solve_regret(fin.problem, fin.set).regret;
    const double v_line = solve_regret(line.problem, line.set).regret;
    const bool oracle_yes = partition_oracle(a);
    yes += oracle_yes;
    const bool equal = std::abs(v_fin - v_line) <= kSolveTol;
    const bool at_half = v_fin == fin.threshold;
    if (!equal || at_half != oracle_yes) ++bad;
  }
  return {bad == 0, "100 lists (" + std::to_string(yes) + " yes), " + std::to_string(bad) + " failures"};
}

Outcome criterion8() {
  Rng rng(8008);
  int bad = 0;
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const std::size_t n = static_cast<std::size_t>(rng.uniform(1, 12));
    const UncertaintySet set = k % 2 ? UncertaintySet(oracle::random_interval(rng, n))
                                     : UncertaintySet(oracle::random_axis(rng, n));
    const MidpointResult r = solve_up_axis_symmetric(set);
    const double opt = oracle::min_regret(CombinatorialProblem::unconstrained(n), set).value;
    const double err = std::abs(r.regret - opt);
    worst = std::max(worst, err);
    if (!(err <= kSolveTol)) ++bad;
  }
  return {bad == 0, "200 instances, " + std::to_string(bad) + " mismatches, max |diff| " + fmt("%.2e", worst)};
}

Outcome criterion9() {
  if (!g_solved) criterion1();
  int bad = 0;
  double worst = 0.0;
  for (const SolveCase& c : g_cases) {
    const BinaryVector x = midpoint_solution(c.problem, c.set);
    const double ratio = approximation_ratio(eval_bruteforce(c.problem, c.set, x), c.optimum);
    worst = std::max(worst, ratio);
    if (!(ratio <= 2.0 + kRatioTol)) ++bad;
  }
  return {bad == 0, std::to_string(g_cases.size()) + " instances, max ratio " + fmt("%.4f", worst)};
}

/// A point of the closed unit ball (cube draw, projected when outside).
Vector random_unit_ball(Rng& rng, std::size_t n) {
  Vector v(n);
  double sq = 0.0;
  for (double& x : v) {
    x = static_cast<double>(rng.uniform(-1000000, 1000000)) / 1e6;
    sq += x * x;
  }
  if (sq > 1.0) {
    const double s = std::sqrt(sq);
    for (double& x : v) x /= s;
  }
  return v;
}

/// A point of U drawn independently of the support routine.
Vector sample_member(Rng& rng, const UncertaintySet& set) {
  const std::size_t n = dimension(set);
  if (const auto* box = std::get_if<IntervalSet>(&set)) {
    Vector c(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(rng.uniform(0, 1000)) / 1000.0;
      c[i] = box->lower(i) + t * (box->upper(i) - box->lower(i));
    }
    return c;
  }
  if (const auto* fin = std::get_if<FiniteSet>(&set)) {
    return (*fin)[static_cast<std::size_t>(rng.uniform(0, static_cast<std::int64_t>(fin->size()) - 1))];
  }
  const Vector xi = random_unit_ball(rng, n);
  if (const auto* ax = std::get_if<AxisParallelEllipsoid>(&set)) {
    Vector c = ax->center();
    for (std::size_t i = 0; i < n; ++i) c[i] += std::sqrt(ax->inverse_diag()[i]) * xi[i];
    return c;
  }
  const auto& ell = std::get<GeneralEllipsoid>(set);
  Vector c = ell.center();
  const Matrix& m = ell.shape();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < m.cols(); ++k) c[i] += m(i, k) * xi[k];
  }
  return c;
}

Outcome criterion10() {
  Rng rng(10010);
  int bad = 0;
  const char* names[] = {"interval", "finite", "axis", "general"};
  std::string detail;
  for (int cls = 0; cls < 4; ++cls) {
    int cls_bad = 0;
    for (int t = 0; t < 1000; ++t) {
      const std::size_t n = static_cast<std::size_t>(rng.uniform(1, 8));
      auto draw = [&]() -> UncertaintySet {
        switch (cls) {
          case 0: return oracle::random_interval(rng, n);
          case 1: return oracle::random_finite(rng, n, static_cast<std::size_t>(rng.uniform(1, 6)));
          case 2: return oracle::random_axis(rng, n);
          default: return oracle::random_ellipsoid(rng, n, static_cast<int>(rng.uniform(0, 60)));
        }
      };
      const UncertaintySet set = draw();
      const Vector w = oracle::random_vector(rng, n, -5, 5);
      const WorstCase wc = support(set, w);
      const double scale = 1.0 + std::abs(wc.value) + oracle::dot(w, w) * 200.0;
      bool ok = std::abs(wc.value - oracle::support(set, w)) <= kSupportTol * scale;
      // attainment: the maximizer lies in U and achieves the value
      ok = ok && membership(set, wc.scenario, 1e-7 * (1.0 + oracle::dot(wc.scenario, wc.scenario)));
      ok = ok && std::abs(oracle::dot(w, wc.scenario) - wc.value) <= kSupportTol * scale;
      // dominance over independently drawn members
      for (int s = 0; s < 5 && ok; ++s) {
        ok = oracle::dot(w, sample_member(rng, set)) <= wc.value + kSupportTol * scale;
      }
      // positive homogeneity
      const double lambda = static_cast<double>(rng.uniform(1, 40)) / 8.0;
      Vector lw = w;
      for (double& v : lw) v *= lambda;
      ok = ok && std::abs(support(set, lw).value - lambda * wc.value) <= kSupportTol * lambda * scale;
      if (!ok) ++cls_bad;
    }
    bad += cls_bad;
    detail += std::string(cls ? ", " : "") + names[cls] + " " + std::to_string(1000 - cls_bad) + "/1000";
  }
  return {bad == 0, detail};
}

std::string desk_results_without_times() {
  std::vector<BenchInstance> instances;
  for (Family f : {Family::I, Family::J}) {
    for (const GenSpec& spec : grid(f, false)) instances.push_back(bench_instance(spec));
  }
  MethodBudget budget;
  budget.time_limit = 900.0;
  budget.node_limit = 5000;
  std::ostringstream os;
  write_results_csv(os, run_benchmark(instances, known_methods(), budget, 1), false);
  return os.str();
}

Outcome criterion11() {
  const std::string a = desk_results_without_times();
  const std::string b = desk_results_without_times();
  const auto lines = std::count(a.begin(), a.end(), '\n');
  return {a == b && lines > 1, std::to_string(lines - 1) + " rows per run, " +
                                   (a == b ? std::string("identical") : std::string("different"))};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"solve methods agree with brute force", criterion1},
      {"regret evaluators agree with brute force", criterion2},
      {"scenario cuts never exceed rival cuts at their origin", criterion3},
      {"two-cut termination on dense large-deviation instances", criterion4},
      {"unconstrained evaluation gadget matches partition", [] { return gadget_criterion(false); }},
      {"shortest path evaluation gadget matches partition", [] { return gadget_criterion(true); }},
      {"two-scenario and segment instances share min regret", criterion7},
      {"midpoint optimal under axis-symmetric sets", criterion8},
      {"midpoint within factor two", criterion9},
      {"support function properties", criterion10},
      {"desk benchmark reproducible", criterion11},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  bool all = true;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k + 1);
    if (!selected.empty() && !selected.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %d: %s (%s; %.1f s)\n", o.pass ? "PASS" : "FAIL", id,
                criteria[k].first.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
