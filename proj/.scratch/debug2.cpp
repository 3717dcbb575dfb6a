#include <cstdio>
#include <random>
#include "hedge/primal.hpp"
using namespace hedge;
#include "sweep_gen.inc"
int main() {
    const double lambdas[4] = {0.0, 0.01, 0.05, 0.2};
    Rng rng(0xC0FFEE);
    for (int trial = 0; trial < 42; ++trial) {
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
        if (trial != 14 && trial != 41) continue;
        auto prog = build_primal(fam, claims);
        std::printf("trial %d: rows=%d cols=%d nnz=%d lambda=%g\n", trial, prog.problem.num_rows(),
                    prog.problem.num_vars(), prog.problem.num_entries(), fam.lambda());
        // exact solve for truth (may be slow if big)
        if (prog.problem.num_entries() <= 3000) {
            try {
                auto ex = lp::solve_rational(prog.problem, 1 << 30);
                std::printf("  exact: status=%d obj=%.12g\n", (int)ex.status,
                            ex.status == lp::LpStatus::optimal ? to_double(ex.objective) : 0.0);
            } catch (const Error& e) { std::printf("  exact threw: %s\n", e.what()); }
        }
        auto sol = lp::solve(prog.problem);
        std::printf("  double: status=%d obj=%.12g\n", (int)sol.status, sol.objective);
        if (sol.status == lp::LpStatus::optimal) {
            auto rep = lp::verify_solution(prog.problem, sol);
            std::printf("  pres=%.3g dres=%.3g gap=%.3g\n", rep.max_primal_residual, rep.max_dual_residual, rep.duality_gap);
        }
    }
    return 0;
}
