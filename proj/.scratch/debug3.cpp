#include <cstdio>
#include <random>
#include "hedge/primal.hpp"
using namespace hedge;
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
            (void)sol;
        } catch (const SolverFailure& e) {
            std::printf("primal trial %d: %s (lambda=%g nodes=%d models=%d)\n", trial, e.what(), fam.lambda(), fam.tree().size(), nmodels);
        } catch (const Error&) {}
        try {
            auto prog = build_dual(fam, claims);
            auto sol = lp::solve(prog.problem);
            (void)sol;
        } catch (const SolverFailure& e) {
            std::printf("dual trial %d: %s (lambda=%g nodes=%d models=%d rows=%d)\n", trial, e.what(), fam.lambda(), fam.tree().size(), nmodels, build_dual(fam, claims).problem.num_rows());
        } catch (const Error&) {}
    }
    std::printf("done\n");
    return 0;
}
