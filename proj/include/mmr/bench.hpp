/**
 * @file bench.hpp
 * @brief Method x instance experiments, result CSVs, performance profiles
 * and per-class summary tables.
 */

#ifndef MMR_BENCH_HPP
#define MMR_BENCH_HPP

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <istream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "mmr/core.hpp"
#include "mmr/exactalgos.hpp"
#include "mmr/gen.hpp"
#include "mmr/instance_io.hpp"
#include "mmr/regret_eval.hpp"
#include "mmr/relax.hpp"

namespace mmr {

/// An instance plus the grid coordinates it is reported under.
struct BenchInstance {
  std::string name;
  std::string family = "-";
  int size = 0;
  int density = 0;
  std::string deviation = "-";
  std::uint64_t seed = 0;
  CombinatorialProblem problem;
  UncertaintySet set;
};

inline BenchInstance bench_instance(const GenSpec& spec) {
  Instance inst = generate(spec);
  return {spec.name(), std::string(1, to_char(spec.family)), spec.size, spec.density,
          std::string(1, to_char(spec.deviation)), spec.seed, std::move(inst.problem),
          std::move(inst.set)};
}

/// Metadata written by `generate` for an instance file.
inline std::map<std::string, std::string> instance_metadata(const GenSpec& spec,
                                                            bool center_clamped) {
  return {{"name", spec.name()},
          {"family", std::string(1, to_char(spec.family))},
          {"size", std::to_string(spec.size)},
          {"density", std::to_string(spec.density)},
          {"deviation", std::string(1, to_char(spec.deviation))},
          {"seed", std::to_string(spec.seed)},
          {"center_clamped", center_clamped ? "1" : "0"},
          {"extended", spec.extended() ? "1" : "0"}};
}

/// Builds a bench instance from a loaded file; missing metadata falls back
/// to `fallback_name` and neutral grid coordinates.
inline BenchInstance bench_instance(InstanceFile file, const std::string& fallback_name) {
  auto get = [&](const char* key, const std::string& dflt) {
    const auto it = file.metadata.find(key);
    return it == file.metadata.end() ? dflt : it->second;
  };
  BenchInstance out{get("name", fallback_name), get("family", "-"), 0, 0,
                    get("deviation", "-"), 0, std::move(file.problem), std::move(file.set)};
  try {
    out.size = std::stoi(get("size", "0"));
    out.density = std::stoi(get("density", "0"));
    out.seed = std::stoull(get("seed", "0"));
  } catch (const std::exception&) {
    throw InputError("instance " + out.name + ": malformed grid metadata");
  }
  return out;
}

inline const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> methods{"C1-A", "C1-B", "C2-A", "C2-B", "brute",
                                                "midpoint"};
  return methods;
}

inline bool is_known_method(const std::string& m) {
  const auto& all = known_methods();
  return std::find(all.begin(), all.end(), m) != all.end();
}

struct MethodBudget {
  /// Seconds per (instance, method).
  double time_limit = 900.0;
  /// Nodes per branch-and-bound call; a finite cap makes results independent of machine load.
  std::uint64_t node_limit = std::numeric_limits<std::uint64_t>::max();
  /// Largest |X| the brute-force method will enumerate.
  std::uint64_t brute_limit = std::uint64_t{1} << 12;
};

struct ResultRow {
  std::string instance;
  std::string family;
  int n = 0;
  int p = 0;
  std::string cls;
  std::uint64_t seed = 0;
  std::string method;
  /// optimal, time_limit, heuristic (midpoint), too_large (brute) or error.
  std::string status;
  double regret = std::numeric_limits<double>::quiet_NaN();
  double lower_bound = std::numeric_limits<double>::quiet_NaN();
  int cuts = 0;
  int iterations = 0;
  double master_time = 0.0;
  double sub_time = 0.0;
  double wall_time = 0.0;
};

namespace bench_detail {

inline double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline void run_midpoint(const BenchInstance& inst, const MethodBudget& budget, ResultRow& row) {
  const BinaryVector x = midpoint_solution(inst.problem, inst.set);
  SubproblemEngine engine;
  engine.budget = {budget.time_limit, budget.node_limit};
  row.status = "heuristic";
  const GeneralEllipsoid* ell = std::get_if<GeneralEllipsoid>(&inst.set);
  std::optional<GeneralEllipsoid> converted;
  if (const auto* axis = std::get_if<AxisParallelEllipsoid>(&inst.set)) {
    converted = as_general_ellipsoid(*axis);
    ell = &*converted;
  }
  if (ell) {
    const SubResult sub = solve_sub(engine, inst.problem, *ell, x);
    row.regret = sub.value;
    if (sub.status != SolveStatus::Optimal) row.status = to_string(sub.status);
  } else {
    row.regret = eval_regret(inst.problem, inst.set, x, engine);
  }
}

}  // namespace bench_detail

/// Runs one method on one instance. Solver exceptions become status "error".
inline ResultRow run_method(const BenchInstance& inst, const std::string& method,
                            const MethodBudget& budget) {
  ResultRow row;
  row.instance = inst.name;
  row.family = inst.family;
  row.n = inst.size;
  row.p = inst.density;
  row.cls = inst.deviation;
  row.seed = inst.seed;
  row.method = method;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    if (method == "brute") {
      const BruteForceOptimum opt = min_regret_bruteforce(inst.problem, inst.set, budget.brute_limit);
      row.status = "optimal";
      row.regret = opt.regret;
      row.lower_bound = opt.regret;
    } else if (method == "midpoint") {
      bench_detail::run_midpoint(inst, budget, row);
      row.sub_time = bench_detail::elapsed(t0);
    } else {
      RelaxConfig cfg = relax_config_for(method);
      cfg.time_limit = budget.time_limit;
      cfg.node_limit = budget.node_limit;
      cfg.record_trace = false;
      const SolveReport rep = solve_regret(inst.problem, inst.set, cfg);
      row.status = to_string(rep.status);
      row.regret = rep.regret;
      row.lower_bound = rep.lower_bound;
      row.cuts = static_cast<int>(rep.cuts.size());
      row.iterations = rep.iterations;
      row.master_time = rep.master_time.count();
      row.sub_time = rep.sub_time.count();
    }
  } catch (const EnumerationOverflow&) {
    row.status = "too_large";
  } catch (const std::exception&) {
    row.status = "error";
  }
  row.wall_time = bench_detail::elapsed(t0);
  return row;
}

/**
 * Runs every (instance, method) pair on `jobs` worker threads, each job
 * single-threaded. Rows come back in job order (instance-major); `on_done`
 * is called under a lock as jobs finish.
 */
inline std::vector<ResultRow> run_benchmark(const std::vector<BenchInstance>& instances,
                                            const std::vector<std::string>& methods,
                                            const MethodBudget& budget, int jobs = 1,
                                            const std::function<void(const ResultRow&)>& on_done = {}) {
  for (const std::string& m : methods) {
    if (!is_known_method(m)) throw InputError("unknown method '" + m + "'");
  }
  const std::size_t total = instances.size() * methods.size();
  std::vector<ResultRow> rows(total);
  std::atomic<std::size_t> next{0};
  std::mutex done_mutex;
  auto worker = [&] {
    for (std::size_t k = next++; k < total; k = next++) {
      rows[k] = run_method(instances[k / methods.size()], methods[k % methods.size()], budget);
      if (on_done) {
        const std::lock_guard<std::mutex> lock(done_mutex);
        on_done(rows[k]);
      }
    }
  };
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(std::max<std::size_t>(total, 1))));
  if (workers == 1) {
    worker();
    return rows;
  }
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  return rows;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline const std::string& results_header() {
  static const std::string h =
      "instance,family,n,p,class,seed,method,status,regret,lower_bound,cuts,iterations,"
      "master_time,sub_time,wall_time";
  return h;
}

/// Writes rows in the given order. With `with_times` false the three timing
/// columns are left out, which is the form compared for reproducibility.
inline void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows,
                              bool with_times = true) {
  if (with_times) {
    os << results_header() << '\n';
  } else {
    os << "instance,family,n,p,class,seed,method,status,regret,lower_bound,cuts,iterations\n";
  }
  for (const ResultRow& r : rows) {
    os << r.instance << ',' << r.family << ',' << r.n << ',' << r.p << ',' << r.cls << ','
       << r.seed << ',' << r.method << ',' << r.status << ','
       << io_detail::format_number(r.regret) << ',' << io_detail::format_number(r.lower_bound)
       << ',' << r.cuts << ',' << r.iterations;
    if (with_times) {
      os << ',' << io_detail::format_number(r.master_time) << ','
         << io_detail::format_number(r.sub_time) << ',' << io_detail::format_number(r.wall_time);
    }
    os << '\n';
  }
}

inline std::vector<ResultRow> read_results_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InputError("results file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != results_header()) throw InputError("results file has an unexpected header");
  std::vector<ResultRow> rows;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 15) {
      throw InputError("results line " + std::to_string(line_no) + ": expected 15 fields");
    }
    auto num = [&](const std::string& s) {
      double v = 0.0;
      const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw InputError("results line " + std::to_string(line_no) + ": bad number '" + s + "'");
      }
      return v;
    };
    ResultRow r;
    r.instance = f[0];
    r.family = f[1];
    r.n = static_cast<int>(num(f[2]));
    r.p = static_cast<int>(num(f[3]));
    r.cls = f[4];
    r.seed = std::stoull(f[5]);
    r.method = f[6];
    r.status = f[7];
    r.regret = num(f[8]);
    r.lower_bound = num(f[9]);
    r.cuts = static_cast<int>(num(f[10]));
    r.iterations = static_cast<int>(num(f[11]));
    r.master_time = num(f[12]);
    r.sub_time = num(f[13]);
    r.wall_time = num(f[14]);
    rows.push_back(std::move(r));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Profiles and tables
// ---------------------------------------------------------------------------

struct ProfilePoint {
  double t = 0.0;
  int solved = 0;
};

/// Per method: number of instances solved to optimality within t seconds,
/// as a step series starting at (0, 0).
inline std::map<std::string, std::vector<ProfilePoint>> performance_profile(
    const std::vector<ResultRow>& rows) {
  std::map<std::string, std::vector<double>> times;
  for (const ResultRow& r : rows) {
    times[r.method];
    if (r.status == "optimal") times[r.method].push_back(r.wall_time);
  }
  std::map<std::string, std::vector<ProfilePoint>> out;
  for (auto& [method, ts] : times) {
    std::sort(ts.begin(), ts.end());
    std::vector<ProfilePoint>& series = out[method];
    series.push_back({0.0, 0});
    for (std::size_t i = 0; i < ts.size(); ++i) series.push_back({ts[i], static_cast<int>(i + 1)});
  }
  return out;
}

inline void write_profile_csv(std::ostream& os,
                              const std::map<std::string, std::vector<ProfilePoint>>& profile) {
  os << "method,t,solved\n";
  for (const auto& [method, series] : profile) {
    for (const ProfilePoint& p : series) {
      os << method << ',' << io_detail::format_number(p.t) << ',' << p.solved << '\n';
    }
  }
}

struct ClassSummary {
  std::string family;
  int n = 0;
  int p = 0;
  std::string cls;
  std::string method;
  int runs = 0;
  double mean_cuts = 0.0;
  int optimal = 0;
  /// Mean share of master time in master + sub time, in percent.
  double main_pct = 0.0;
  double sub_pct = 0.0;
};

/**
 * Aggregates rows per (family, n, p, class, method). Runs with zero measured
 * solver time count as 100% SUB, so Main + SUB is 100 on every row.
 */
inline std::vector<ClassSummary> class_table(const std::vector<ResultRow>& rows) {
  using Key = std::tuple<std::string, int, int, std::string, std::string>;
  std::map<Key, ClassSummary> groups;
  for (const ResultRow& r : rows) {
    ClassSummary& g = groups[{r.family, r.n, r.p, r.cls, r.method}];
    g.family = r.family;
    g.n = r.n;
    g.p = r.p;
    g.cls = r.cls;
    g.method = r.method;
    ++g.runs;
    g.mean_cuts += r.cuts;
    if (r.status == "optimal") ++g.optimal;
    const double total = r.master_time + r.sub_time;
    const double main = total > 0.0 ? 100.0 * r.master_time / total : 0.0;
    g.main_pct += main;
    g.sub_pct += 100.0 - main;
  }
  std::vector<ClassSummary> out;
  for (auto& [key, g] : groups) {
    g.mean_cuts /= g.runs;
    g.main_pct /= g.runs;
    g.sub_pct /= g.runs;
    out.push_back(g);
  }
  return out;
}

inline void write_class_table_csv(std::ostream& os, const std::vector<ClassSummary>& table) {
  os << "family,n,p,class,method,runs,cuts,opt,main_pct,sub_pct\n";
  for (const ClassSummary& g : table) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.1f,%d,%.1f,%.1f", g.mean_cuts, g.optimal, g.main_pct,
                  g.sub_pct);
    os << g.family << ',' << g.n << ',' << g.p << ',' << g.cls << ',' << g.method << ','
       << g.runs << ',' << buf << '\n';
  }
}

}  // namespace mmr

#endif  // MMR_BENCH_HPP
