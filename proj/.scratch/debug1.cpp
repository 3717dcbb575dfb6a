#include <cstdio>
#include <random>
#include "hedge/primal.hpp"
using namespace hedge;
// replicate the sweep's generator up to the failing trial, then inspect
#include "sweep_gen.inc"
int main() {
    const double lambdas[4] = {0.0, 0.01, 0.05, 0.2};
    Rng rng(0xC0FFEE);
    for (int trial = 0; trial < 200; ++trial) {
        ScenarioTree tree = random_tree(rng);
        const int nmodels = rng.uniform_int(1, 3);
        std::vector<PriceField> fields;
        for (int m = 0; m < nmodels; ++m) {
            const std::string theta = "theta" + std::to_string(m);
            fields.push_back(trial % 2 ? wild_prices(rng, tree, theta) : nice_prices(rng, tree, theta));
        }
        ModelFamily fam(std::move(tree), std::move(fields), lambdas[trial % 4]);
        std::vector<std::vector<double>> cl(nmodels);
        for (int m = 0; m < nmodels; ++m) { cl[m].resize(fam.tree().num_leaves()); for (double& g : cl[m]) g = rng.uniform(-50.0, 100.0); }
        ClaimFamily claims(fam, std::move(cl));
        try {
            auto prog = build_primal(fam, claims);
            auto sol = lp::solve(prog.problem);
            if (sol.status != lp::LpStatus::optimal) continue;
            auto rep = lp::verify_solution(prog.problem, sol);
            double maxabs = 0; for (double v : sol.primal) maxabs = std::max(maxabs, std::abs(v));
            if (rep.max_primal_residual > 1e-9 || maxabs > 1e6)
                std::printf("trial %d: lambda=%g models=%d nodes=%d pres=%.3g dres=%.3g gap=%.3g maxvar=%.3g obj=%.6g\n",
                            trial, fam.lambda(), nmodels, fam.tree().size(), rep.max_primal_residual,
                            rep.max_dual_residual, rep.duality_gap, maxabs, sol.objective);
            (void)solve_superhedge(fam, claims);
        } catch (const Error& e) {
            std::printf("trial %d threw: %s\n", trial, e.what());
        }
    }
    return 0;
}
