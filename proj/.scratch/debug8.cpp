#include <cstdio>
#include "../tests/support.hpp"
using namespace hedge;
using testsupport::Rng;
int main() {
    // replay the exact stream: random_family consumes tree rng first
    Rng rng(43);
    // trials 0..2 consume; we re-run the generator and instrument trial 3 manually
    for (int trial = 0; trial < 3; ++trial) {
        (void)testsupport::random_family(rng, std::vector<double>{0.0,0.05,0.2}[trial%3], false);
        (void)testsupport::random_claims(rng, testsupport::e2_family(), 0.0, 50.0); // WRONG shape; see below
    }
    return 0;
}
