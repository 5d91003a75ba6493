// Command-line harness: generate grids, run experiments, evaluate
// solutions, build profiles and check the hardness gadgets.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "mmr/bench.hpp"
#include "mmr/gadgets.hpp"
#include "mmr/gen.hpp"
#include "mmr/instance_io.hpp"
#include "mmr/regret_eval.hpp"
#include "mmr/relax.hpp"

namespace fs = std::filesystem;
using namespace mmr;

namespace {

/// Bad combination of otherwise valid flags; exits with the usage code.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GenerateArgs {
  std::string family;
  bool paper_scale = false;
  std::uint64_t seed = 1;
  std::vector<int> sizes;
  int seeds_per_set = 10;
  std::string out;
};

struct SolveArgs {
  std::vector<std::string> instances;
  std::string manifest;
  std::vector<std::string> methods{"C2-B"};
  double time_limit = 900.0;
  std::uint64_t node_limit = std::numeric_limits<std::uint64_t>::max();
  int jobs = 1;
  std::string out;
};

struct EvalArgs {
  std::string instance;
  std::string x;
  std::string engine = "B";
  std::uint64_t node_limit = std::numeric_limits<std::uint64_t>::max();
  double time_limit = 900.0;
};

struct ProfileArgs {
  std::vector<std::string> inputs;
  std::string out;
};

struct GadgetArgs {
  int count = 200;
  std::uint64_t seed = 1;
  int max_items = 12;
  int max_sp_items = 8;
  int max_value = 50;
};

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  return f;
}

int cmd_generate(const GenerateArgs& a) {
  const Family family = parse_family(a.family);
  std::vector<GenSpec> specs = grid(family, a.paper_scale, a.seed, a.seeds_per_set);
  if (!a.sizes.empty()) {
    std::erase_if(specs, [&](const GenSpec& s) {
      return std::find(a.sizes.begin(), a.sizes.end(), s.size) == a.sizes.end();
    });
  }
  fs::create_directories(a.out);
  std::ofstream manifest = open_out((fs::path(a.out) / "manifest.csv").string());
  manifest << "family,n,p,class,seed,path\n";
  for (const GenSpec& spec : specs) {
    const Instance inst = generate(spec);
    const std::string file = spec.name() + ".inst";
    save_instance((fs::path(a.out) / file).string(), inst.problem, inst.set,
                  instance_metadata(spec, inst.center_clamped));
    manifest << to_char(spec.family) << ',' << spec.size << ',' << spec.density << ','
             << to_char(spec.deviation) << ',' << spec.seed << ',' << file << '\n';
  }
  std::cerr << "wrote " << specs.size() << " instances to " << a.out << '\n';
  return 0;
}

std::vector<std::string> manifest_paths(const std::string& manifest) {
  std::ifstream f(manifest);
  if (!f) throw std::runtime_error("cannot open manifest " + manifest);
  std::string line;
  std::getline(f, line);
  std::vector<std::string> out;
  const fs::path base = fs::path(manifest).parent_path();
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const auto comma = line.rfind(',');
    out.push_back((base / line.substr(comma + 1)).string());
  }
  return out;
}

int cmd_solve(const SolveArgs& a) {
  std::vector<std::string> paths = a.instances;
  if (!a.manifest.empty()) {
    const auto more = manifest_paths(a.manifest);
    paths.insert(paths.end(), more.begin(), more.end());
  }
  if (paths.empty()) throw UsageError("no instances given");
  std::vector<BenchInstance> instances;
  for (const std::string& p : paths) {
    instances.push_back(bench_instance(load_instance(p), fs::path(p).stem().string()));
  }
  MethodBudget budget;
  budget.time_limit = a.time_limit;
  budget.node_limit = a.node_limit;
  const auto rows = run_benchmark(instances, a.methods, budget, a.jobs, [](const ResultRow& r) {
    std::cerr << r.instance << ' ' << r.method << ' ' << r.status << ' ' << r.regret << '\n';
  });
  if (a.out.empty()) {
    write_results_csv(std::cout, rows);
  } else {
    std::ofstream f = open_out(a.out);
    write_results_csv(f, rows);
  }
  return 0;
}

int cmd_eval(const EvalArgs& a) {
  const InstanceFile file = load_instance(a.instance);
  BinaryVector x;
  if (a.x.empty()) {
    x = midpoint_solution(file.problem, file.set);
  } else {
    if (a.x.size() != file.problem.dimension()) throw UsageError("--x length must equal dim");
    x = BinaryVector(a.x.size());
    for (std::size_t i = 0; i < a.x.size(); ++i) {
      if (a.x[i] != '0' && a.x[i] != '1') throw UsageError("--x must be a 0/1 string");
      x.set(i, a.x[i] == '1');
    }
  }
  double regret = 0.0;
  if (a.engine == "brute") {
    regret = eval_bruteforce(file.problem, file.set, x);
  } else {
    SubproblemEngine engine;
    engine.mode = a.engine == "A" ? SubMode::LinearizationA : SubMode::LinearizationB;
    engine.budget = {a.time_limit, a.node_limit};
    regret = eval_regret(file.problem, file.set, x, engine);
  }
  std::cout << "x=" << x.to_string() << " regret=" << io_detail::format_number(regret) << '\n';
  return 0;
}

int cmd_profile(const ProfileArgs& a) {
  std::vector<ResultRow> rows;
  for (const std::string& p : a.inputs) {
    std::ifstream f(p);
    if (!f) throw std::runtime_error("cannot open " + p);
    auto more = read_results_csv(f);
    rows.insert(rows.end(), more.begin(), more.end());
  }
  if (rows.empty()) throw std::runtime_error("no result rows to profile");
  const auto profile = performance_profile(rows);
  const auto table = class_table(rows);
  if (a.out.empty()) {
    write_profile_csv(std::cout, profile);
    std::cout << '\n';
    write_class_table_csv(std::cout, table);
    return 0;
  }
  fs::create_directories(a.out);
  std::ofstream pf = open_out((fs::path(a.out) / "profile.csv").string());
  write_profile_csv(pf, profile);
  std::ofstream tf = open_out((fs::path(a.out) / "classes.csv").string());
  write_class_table_csv(tf, table);
  return 0;
}

PartitionList random_list(Rng& rng, int max_items, int max_value) {
  PartitionList a(static_cast<std::size_t>(rng.uniform(1, max_items)));
  for (auto& v : a) v = rng.uniform(1, max_value);
  return a;
}

int cmd_gadget_check(const GadgetArgs& a) {
  Rng rng(a.seed);
  int up_bad = 0, sp_bad = 0, yes = 0;
  for (int k = 0; k < a.count; ++k) {
    const PartitionList list = random_list(rng, a.max_items, a.max_value);
    const bool answer = partition_oracle(list);
    yes += answer;
    const EvalGadget up = gadget_up_eval(list);
    const double reg = eval_bruteforce(up.problem, up.set, up.x);
    if (reaches_threshold(reg, up.threshold, up.total) != answer) ++up_bad;

    const auto keep = std::min(list.size(), static_cast<std::size_t>(a.max_sp_items));
    const PartitionList short_list(list.begin(), list.begin() + static_cast<std::ptrdiff_t>(keep));
    const EvalGadget sp = gadget_sp_eval(short_list);
    const double sp_reg = eval_bruteforce(sp.problem, sp.set, sp.x);
    if (reaches_threshold(sp_reg, sp.threshold, sp.total) != partition_oracle(short_list)) ++sp_bad;
  }
  std::cout << "lists=" << a.count << " yes=" << yes << " up_mismatch=" << up_bad
            << " sp_mismatch=" << sp_bad << '\n';
  return up_bad + sp_bad == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"min-max regret experiments"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file; [subcommand] sections or sub.key names");

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "write an instance grid and manifest");
  g->add_option("--family", gen.family, "I or J")->required()->check(CLI::IsMember({"I", "J"}));
  auto* desk = g->add_flag("--desk", "desk-scale grid (default)");
  g->add_flag("--paper-scale", gen.paper_scale, "full benchmark grid")->excludes(desk);
  g->add_option("--seed", gen.seed, "master seed");
  g->add_option("--layers,--size", gen.sizes, "keep only these sizes (layers for J, items for I)");
  g->add_option("--seeds-per-set", gen.seeds_per_set)->check(CLI::PositiveNumber);
  g->add_option("--out", gen.out, "output directory")->required();

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "run methods on instances, CSV rows per pair");
  s->add_option("instances", solve.instances, "instance files");
  s->add_option("--manifest", solve.manifest, "manifest.csv from generate");
  s->add_option("--method", solve.methods, "C1-A, C1-B, C2-A, C2-B, brute, midpoint")
      ->delimiter(',')
      ->check(CLI::IsMember(known_methods()));
  s->add_option("--time-limit", solve.time_limit, "seconds per instance and method")
      ->check(CLI::PositiveNumber);
  s->add_option("--node-limit", solve.node_limit, "nodes per branch-and-bound call");
  s->add_option("--jobs", solve.jobs, "worker threads")->check(CLI::PositiveNumber);
  s->add_option("--out", solve.out, "results CSV (default stdout)");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "regret of one solution");
  e->add_option("--instance", ev.instance)->required();
  e->add_option("--x", ev.x, "0/1 string; default the midpoint solution");
  e->add_option("--engine", ev.engine, "brute, A or B")->check(CLI::IsMember({"brute", "A", "B"}));
  e->add_option("--node-limit", ev.node_limit);
  e->add_option("--time-limit", ev.time_limit)->check(CLI::PositiveNumber);

  ProfileArgs prof;
  auto* p = app.add_subcommand("profile", "performance profile and per-class table");
  p->add_option("results", prof.inputs, "result CSVs")->required();
  p->add_option("--out", prof.out, "directory for profile.csv and classes.csv");

  GadgetArgs gad;
  auto* gc = app.add_subcommand("gadget-check", "random partition lists against both gadgets");
  gc->add_option("--count", gad.count)->check(CLI::PositiveNumber);
  gc->add_option("--seed", gad.seed);
  gc->add_option("--max-items", gad.max_items)->check(CLI::Range(1, 16));
  gc->add_option("--max-sp-items", gad.max_sp_items)->check(CLI::Range(1, 12));
  gc->add_option("--max-value", gad.max_value)->check(CLI::Range(1, 1000));

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& ok) {
    return app.exit(ok);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return 2;
  }

  try {
    if (g->parsed()) return cmd_generate(gen);
    if (s->parsed()) return cmd_solve(solve);
    if (e->parsed()) return cmd_eval(ev);
    if (p->parsed()) return cmd_profile(prof);
    return cmd_gadget_check(gad);
  } catch (const UsageError& err) {
    std::cerr << "usage error: " << err.what() << '\n';
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
}
