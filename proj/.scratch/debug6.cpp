#include <cstdio>
#include "hedge/primal.hpp"
#include "../tests/support.hpp"
using namespace hedge;
using testsupport::Rng;
int main() {
    // replicate "scaling and translation" generator: seed 43, nice, lambda cycle {0,.05,.2}
    Rng rng(43);
    for (int trial = 0; trial < 15; ++trial) {
        const double lambda = std::vector<double>{0.0, 0.05, 0.2}[trial % 3];
        const ModelFamily fam = testsupport::random_family(rng, lambda, false);
        const ClaimFamily claims = testsupport::random_claims(rng, fam, 0.0, 50.0);
        auto prog = build_primal(fam, claims);
        auto sol = lp::solve(prog.problem);
        std::printf("trial %d lambda=%g nodes=%d models=%d -> status=%d obj=%.10g", trial,
                    fam.lambda(), fam.tree().size(), fam.num_models(), (int)sol.status, sol.objective);
        if (sol.status == lp::LpStatus::unbounded) {
            auto rr = lp::verify_ray(prog.problem, sol.ray);
            std::printf("  rayvalid=%d res=%.3g impr=%.3g", (int)rr.valid, rr.max_direction_residual, rr.improvement);
            auto ex = lp::solve_rational(prog.problem, 1 << 30);
            std::printf("  exact=%d", (int)ex.status);
            if (ex.status == lp::LpStatus::optimal) std::printf(" exobj=%.10g", to_double(ex.objective));
        }
        // skip the scaled/shifted solves; just consume the rng the same way
        (void)rng.uniform(0.0, 3.0);
        std::printf("\n");
    }
    return 0;
}
