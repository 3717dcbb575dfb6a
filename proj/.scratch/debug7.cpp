#include <cstdio>
#include "hedge/primal.hpp"
#include "../tests/support.hpp"
using namespace hedge;
using testsupport::Rng;
int main() {
    Rng rng(43);
    for (int trial = 0; trial < 4; ++trial) {
        const double lambda = std::vector<double>{0.0, 0.05, 0.2}[trial % 3];
        const ModelFamily fam = testsupport::random_family(rng, lambda, false);
        const ClaimFamily claims = testsupport::random_claims(rng, fam, 0.0, 50.0);
        (void)claims;
        if (trial == 3) {
            const auto& tree = fam.tree();
            for (int i = 0; i < tree.size(); ++i) {
                std::printf("node %s t=%d p=%.4f parent=%s prices:", tree.id(i).c_str(),
                            tree.time(i), tree.branch_prob(i),
                            tree.parent(i) < 0 ? "-" : tree.id(tree.parent(i)).c_str());
                for (int m = 0; m < fam.num_models(); ++m) std::printf(" %.6f", fam.field(m).at(i));
                std::printf("\n");
            }
        }
        (void)rng.uniform(0.0, 3.0);
    }
    return 0;
}
