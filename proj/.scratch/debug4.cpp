#include <cstdio>
#include <random>
#include "hedge/primal.hpp"
using namespace hedge;
#include "sweep_gen.inc"
int main() {
    const double lambdas[4] = {0.0, 0.01, 0.05, 0.2};
    Rng rng(0xC0FFEE);
    for (int trial = 0; trial <= 39; ++trial) {
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
        if (trial != 39) continue;
        auto prog = build_dual(fam, claims);
        std::printf("dual trial 39: rows=%d cols=%d nnz=%d\n", prog.problem.num_rows(), prog.problem.num_vars(), prog.problem.num_entries());
        try {
            auto ex = lp::solve_rational(prog.problem, 1 << 30);
            std::printf("exact: status=%d obj=%.12g\n", (int)ex.status, ex.status == lp::LpStatus::optimal ? to_double(ex.objective) : 0.0);
        } catch (const Error& e) { std::printf("exact threw: %s\n", e.what()); }
        try {
            auto sol = lp::solve(prog.problem);
            std::printf("double: status=%d obj=%.12g\n", (int)sol.status, sol.objective);
        } catch (const Error& e) { std::printf("double threw: %s\n", e.what()); }
    }
    return 0;
}
