// Solves one generated instance of each family with every exact method and
// compares against the midpoint heuristic.
#include <cstdio>

#include "mmr/exactalgos.hpp"
#include "mmr/gen.hpp"
#include "mmr/relax.hpp"

int main() {
  using namespace mmr;
  for (const GenSpec& spec : {GenSpec{Family::I, 12, Deviation::Medium, 25, 7},
                              GenSpec{Family::J, 2, Deviation::Large, 15, 7}}) {
    const Instance inst = generate(spec);
    std::printf("%s (%zu variables)\n", spec.name().c_str(), inst.problem.dimension());
    for (const char* method : {"C1-A", "C1-B", "C2-A", "C2-B"}) {
      const SolveReport r = solve_regret(inst.problem, inst.set, relax_config_for(method));
      std::printf("  %-5s regret %10.4f  cuts %2zu  %s  x=%s\n", method, r.regret, r.cuts.size(),
                  to_string(r.status), r.incumbent.to_string().c_str());
    }
    SubproblemEngine engine;
    const MidpointBound mid = midpoint_bound(inst.problem, inst.set, engine);
    std::printf("  midpoint regret %10.4f\n", mid.upper);
  }
  return 0;
}
