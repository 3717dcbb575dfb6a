#include <cstdio>
#include "hedge/primal.hpp"
#include "../tests/support.hpp"
using namespace hedge;
using testsupport::Rng;
int main() {
    Rng rng(0xE5D1A);
    const std::vector<double> lambdas{0.0, 0.01, 0.05, 0.2};
    for (int trial = 0; trial < 200; ++trial) {
        const ModelFamily fam = testsupport::random_family(rng, lambdas[trial % 4], trial % 2 == 0);
        const ClaimFamily claims = testsupport::random_claims(rng, fam);
        try {
            (void)solve_superhedge(fam, claims).price;
        } catch (const FreeLunch&) {
        } catch (const SolverFailure& e) {
            std::printf("trial %d threw: %s (lambda=%g nodes=%d models=%d wild=%d)\n",
                        trial, e.what(), fam.lambda(), fam.tree().size(), fam.num_models(), trial % 2 == 0);
            auto prog = build_primal(fam, claims);
            auto sol = lp::solve(prog.problem);
            std::printf("  lp status=%d obj=%.12g\n", (int)sol.status, sol.objective);
            if (sol.status == lp::LpStatus::optimal) {
                auto rep = lp::verify_solution(prog.problem, sol);
                double maxvar = 0; for (double v : sol.primal) maxvar = std::max(maxvar, std::abs(v));
                std::printf("  pres=%.3g dres=%.3g gap=%.3g maxvar=%.3g\n", rep.max_primal_residual,
                            rep.max_dual_residual, rep.duality_gap, maxvar);
                auto exact = lp::solve_rational(prog.problem, 1<<30);
                std::printf("  exact status=%d obj=%.12g\n", (int)exact.status,
                            exact.status == lp::LpStatus::optimal ? to_double(exact.objective) : 0.0);
            }
        }
    }
    std::printf("done\n");
    return 0;
}
