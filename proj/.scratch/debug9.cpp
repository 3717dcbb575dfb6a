#include <cstdio>
#include "../tests/support.hpp"
using namespace hedge;
using testsupport::Rng;
int main() {
    Rng rng(43);
    for (int trial = 0; trial < 4; ++trial) {
        const double lambda = std::vector<double>{0.0, 0.05, 0.2}[trial % 3];
        // inline random_family with instrumentation
        ScenarioTree tree = testsupport::random_tree(rng);
        const int nmodels = rng.uniform_int(1, 3);
        std::vector<PriceField> fields;
        for (int m = 0; m < nmodels; ++m) {
            const std::string theta = "theta" + std::to_string(m);
            // copy of nice_prices with printing
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
                        if (*std::min_element(f.begin(), f.end()) > 0.98) f[0] = rng.uniform(0.8, 0.98);
                        if (*std::max_element(f.begin(), f.end()) < 1.02) f[ch.size()-1] = rng.uniform(1.02, 1.3);
                    }
                    if (trial == 3) {
                        std::printf("trial3 node %s factors:", tree.id(i).c_str());
                        for (double x : f) std::printf(" %.6f", x);
                        std::printf("\n");
                    }
                    for (std::size_t j = 0; j < ch.size(); ++j) v[ch[j]] = v[i] * f[j];
                }
            fields.push_back(PriceField(tree, theta, std::move(v)));
        }
        ModelFamily fam(std::move(tree), std::move(fields), lambda);
        (void)testsupport::random_claims(rng, fam, 0.0, 50.0);
        (void)rng.uniform(0.0, 3.0);
        if (trial == 3)
            for (int i = 0; i < fam.tree().size(); ++i)
                std::printf("trial3 node %s price %.6f\n", fam.tree().id(i).c_str(), fam.field(0).at(i));
    }
    return 0;
}
