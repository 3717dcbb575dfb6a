#include <chrono>
#include <cstdio>
#include <random>

#include "hedge/primal.hpp"

using namespace hedge;

struct Rng {
    std::mt19937_64 gen;
    explicit Rng(std::uint64_t seed) : gen(seed) {}
    double uniform(double a, double b) {
        return a + (b - a) * (double)(gen() >> 11) / 9007199254740992.0;
    }
    int uniform_int(int a, int b) { return a + (int)(gen() % (std::uint64_t)(b - a + 1)); }
};

// Random tree: depth <= 4, branching <= 3; probabilities bounded away from 0.
static ScenarioTree random_tree(Rng& rng, int max_depth = 4, int max_branch = 3) {
    const int depth = rng.uniform_int(1, max_depth);
    std::vector<ScenarioTree::NodeSpec> specs;
    specs.push_back({"n0", std::nullopt, 0, 1.0});
    std::vector<int> frontier{0};
    int next_id = 1;
    for (int t = 1; t <= depth; ++t) {
        std::vector<int> next;
        for (int par : frontier) {
            const int k = rng.uniform_int(1, max_branch);
            std::vector<double> w(k);
            double sum = 0.0;
            for (int j = 0; j < k; ++j) {
                w[j] = rng.uniform(0.1, 1.0);
                sum += w[j];
            }
            for (int j = 0; j < k; ++j) {
                const int id = next_id++;
                specs.push_back({"n" + std::to_string(id), "n" + std::to_string(par), t,
                                 k == 1 ? 1.0 : w[j] / sum});
                next.push_back(id);
            }
        }
        frontier = std::move(next);
    }
    return ScenarioTree(depth, std::move(specs));
}

static PriceField wild_prices(Rng& rng, const ScenarioTree& tree, const std::string& theta) {
    std::vector<double> v(tree.size());
    for (int i = 0; i < tree.size(); ++i) v[i] = rng.uniform(50.0, 200.0);
    return PriceField(tree, theta, std::move(v));
}

static PriceField nice_prices(Rng& rng, const ScenarioTree& tree, const std::string& theta) {
    std::vector<double> v(tree.size(), 0.0);
    v[tree.root()] = rng.uniform(80.0, 120.0);
    for (int t = 0; t < tree.horizon(); ++t)
        for (int i = 0; i < tree.size(); ++i) {
            if (tree.time(i) != t || tree.is_leaf(i)) continue;
            const auto& ch = tree.children(i);
            std::vector<double> f(ch.size());
            for (std::size_t j = 0; j < ch.size(); ++j) f[j] = rng.uniform(0.75, 1.35);
            if (ch.size() == 1) f[0] = 1.0;
            else {
                double mn = f[0], mx = f[0];
                for (double x : f) { mn = std::min(mn, x); mx = std::max(mx, x); }
                if (mn > 0.98) f[0] = rng.uniform(0.8, 0.98);
                if (mx < 1.02) f[ch.size() - 1] = rng.uniform(1.02, 1.3);
            }
            for (std::size_t j = 0; j < ch.size(); ++j) v[ch[j]] = v[i] * f[j];
        }
    return PriceField(tree, theta, std::move(v));
}

int main() {
    const double lambdas[4] = {0.0, 0.01, 0.05, 0.2};
    Rng rng(0xC0FFEE);
    int optimal = 0, lunches = 0, mismatches = 0;
    double worst_gap = 0.0;
    const auto t0 = std::chrono::steady_clock::now();
    for (int trial = 0; trial < 200; ++trial) {
        ScenarioTree tree = random_tree(rng);
        const int nmodels = rng.uniform_int(1, 3);
        std::vector<PriceField> fields;
        for (int m = 0; m < nmodels; ++m) {
            const std::string theta = "theta" + std::to_string(m);
            fields.push_back(trial % 2 ? wild_prices(rng, tree, theta)
                                       : nice_prices(rng, tree, theta));
        }
        ModelFamily fam(std::move(tree), std::move(fields), lambdas[trial % 4]);
        std::vector<std::vector<double>> cl(nmodels);
        for (int m = 0; m < nmodels; ++m) {
            cl[m].resize(fam.tree().num_leaves());
            for (double& g : cl[m]) g = rng.uniform(-50.0, 100.0);
        }
        ClaimFamily claims(fam, std::move(cl));

        bool primal_lunch = false;
        double zp = 0.0;
        try {
            zp = solve_superhedge(fam, claims).price;
        } catch (const FreeLunch&) {
            primal_lunch = true;
        }
        bool dual_lunch = false;
        double zd = 0.0;
        try {
            zd = solve_dual_cps(fam, claims).value;
        } catch (const FreeLunch&) {
            dual_lunch = true;
        }
        if (primal_lunch != dual_lunch) {
            ++mismatches;
            std::printf("MISMATCH trial %d: primal_lunch=%d dual_lunch=%d\n", trial,
                        (int)primal_lunch, (int)dual_lunch);
            continue;
        }
        if (primal_lunch) { ++lunches; continue; }
        ++optimal;
        const double gap = std::abs(zp - zd);
        worst_gap = std::max(worst_gap, gap);
        if (gap > 1e-6) std::printf("GAP trial %d: %.3g (zp=%.12g zd=%.12g)\n", trial, gap, zp, zd);
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("sweep: optimal=%d lunches=%d mismatches=%d worst_gap=%.3g time=%.2fs\n", optimal,
                lunches, mismatches, worst_gap, secs);

    // Frictionless oracle: binomial, lambda 0, z* == backward induction.
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const int levels = rng.uniform_int(1, 5);
        const double u = rng.uniform(1.05, 1.5), d = rng.uniform(0.55, 0.95);
        const double s0 = rng.uniform(50.0, 150.0), pu = rng.uniform(0.2, 0.8);
        auto [tree, field] = build_binomial(levels, s0, u, d, pu, "b");
        ModelFamily fam(tree, {field}, 0.0);
        std::vector<std::vector<double>> cl(1);
        cl[0].resize(fam.tree().num_leaves());
        for (double& g : cl[0]) g = rng.uniform(0.0, 100.0);
        ClaimFamily claims(fam, cl);
        const double zp = solve_superhedge(fam, claims).price;
        // independent oracle: q-weighted backward induction on the tree
        const double q = (1.0 - d) / (u - d);
        std::vector<double> v(fam.tree().size(), 0.0);
        for (int k = 0; k < fam.tree().num_leaves(); ++k)
            v[fam.tree().leaves()[k]] = cl[0][k];
        for (int t = fam.tree().horizon() - 1; t >= 0; --t)
            for (int i = 0; i < fam.tree().size(); ++i) {
                if (fam.tree().time(i) != t || fam.tree().is_leaf(i)) continue;
                // children emitted up-first by the builder
                v[i] = q * v[fam.tree().children(i)[0]] + (1.0 - q) * v[fam.tree().children(i)[1]];
            }
        worst = std::max(worst, std::abs(zp - v[fam.tree().root()]));
    }
    std::printf("frictionless oracle worst |z - bi|: %.3g\n", worst);
    return mismatches > 0 || worst_gap > 1e-6 || worst > 1e-8;
}
