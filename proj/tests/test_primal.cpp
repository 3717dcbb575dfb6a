#include <catch2/catch_amalgamated.hpp>

#include "hedge/primal.hpp"
#include "support.hpp"

using namespace hedge;
using testsupport::Rng;

TEST_CASE("one-step call at 5% cost prices to 290/19") {
    const ModelFamily fam = testsupport::e2_family();
    const ClaimFamily claims = testsupport::e2_claims(fam);
    const auto cert = solve_superhedge(fam, claims);
    CHECK(cert.price == Catch::Approx(290.0 / 19.0).margin(1e-9));
    CHECK(cert.strategy.h0 == Catch::Approx(10.0 / 19.0).margin(1e-9));
    CHECK(cert.floor == Catch::Approx(290.0 / 19.0).margin(1e-9));
    for (const auto& [theta, leaf_map] : cert.slacks)
        for (const auto& [leaf, slack] : leaf_map) CHECK(slack >= -1e-9);
    CHECK(check_admissible(fam, cert.strategy, cert.floor).robust);
}

TEST_CASE("at 10% the spread swallows the hedge and z* is the claim's maximum") {
    const ModelFamily fam = testsupport::e2_family(0.10);
    const ClaimFamily claims = testsupport::e2_claims(fam);
    const auto cert = solve_superhedge(fam, claims);
    CHECK(cert.price == Catch::Approx(20.0).margin(1e-9));
    CHECK(cert.strategy.h0 == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("robust two-model price exceeds both individual prices") {
    const ModelFamily fam = testsupport::e3_family();
    const ClaimFamily claims = testsupport::e3_claims(fam);
    const auto cert = solve_superhedge(fam, claims);
    CHECK(cert.price == Catch::Approx(12.0).margin(1e-9));
    CHECK(cert.strategy.h0 == Catch::Approx(0.6).margin(1e-9));

    const ModelFamily f1 = fam.restricted_to({"theta1"});
    const ModelFamily f2 = fam.restricted_to({"theta2"});
    const double z1 = solve_superhedge(f1, ClaimFamily(f1, {claims.for_model(0)})).price;
    const double z2 = solve_superhedge(f2, ClaimFamily(f2, {claims.for_model(1)})).price;
    CHECK(z1 == Catch::Approx(10.0).margin(1e-9));
    CHECK(z2 == Catch::Approx(7.5).margin(1e-9));
    CHECK(cert.price > std::max(z1, z2));
}

TEST_CASE("the zero claim has zero superhedging price") {
    const ModelFamily fam = testsupport::e2_family();
    const ClaimFamily claims(fam, {{std::vector<double>{0.0, 0.0}}});
    CHECK(solve_superhedge(fam, claims).price == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("scaling and translation act linearly on the price") {
    Rng rng(43);
    for (int trial = 0; trial < 15; ++trial) {
        const double lambda = std::vector<double>{0.0, 0.05, 0.2}[trial % 3];
        const ModelFamily fam = testsupport::random_family(rng, lambda, false);
        const ClaimFamily claims = testsupport::random_claims(rng, fam, 0.0, 50.0);
        const double z = solve_superhedge(fam, claims).price;

        const double c = rng.uniform(0.0, 3.0);
        std::vector<std::vector<double>> scaled(fam.num_models()), shifted(fam.num_models());
        for (int m = 0; m < fam.num_models(); ++m) {
            for (int k = 0; k < fam.tree().num_leaves(); ++k) {
                scaled[m].push_back(c * claims.at(m, k));
                shifted[m].push_back(claims.at(m, k) + c);
            }
        }
        const double zs = solve_superhedge(fam, ClaimFamily(fam, scaled)).price;
        const double zt = solve_superhedge(fam, ClaimFamily(fam, shifted)).price;
        CHECK(zs == Catch::Approx(c * z).margin(1e-7 * (1.0 + std::abs(c * z))));
        CHECK(zt == Catch::Approx(z + c).margin(1e-7 * (1.0 + std::abs(z + c))));
    }
}

TEST_CASE("price is non-decreasing in lambda") {
    Rng rng(47);
    const std::vector<double> grid{0.0, 0.02, 0.05, 0.1, 0.2};
    for (int trial = 0; trial < 10; ++trial) {
        const ModelFamily base = testsupport::random_family(rng, 0.0, trial % 2 == 0);
        const ClaimFamily claims = testsupport::random_claims(rng, base);
        double prev = -std::numeric_limits<double>::infinity();
        for (const double lam : grid) {
            double z;
            try {
                z = solve_superhedge(base.with_lambda(lam), claims).price;
            } catch (const FreeLunch&) {
                z = -std::numeric_limits<double>::infinity();
            }
            CHECK(z >= prev - 1e-7 * (1.0 + std::abs(z)));
            prev = z;
        }
    }
}

TEST_CASE("price is non-decreasing under model enlargement") {
    Rng rng(53);
    for (int trial = 0; trial < 10; ++trial) {
        const double lambda = std::vector<double>{0.0, 0.05, 0.2}[trial % 3];
        ModelFamily fam = testsupport::random_family(rng, lambda, trial % 2 == 0, 3);
        if (fam.num_models() < 2) continue;
        const ClaimFamily claims = testsupport::random_claims(rng, fam);
        auto price_of = [&](const std::vector<std::string>& thetas,
                            const std::vector<int>& models) {
            const ModelFamily sub = fam.restricted_to(thetas);
            std::vector<std::vector<double>> values;
            for (int m : models) values.push_back(claims.for_model(m));
            try {
                return solve_superhedge(sub, ClaimFamily(sub, values)).price;
            } catch (const FreeLunch&) {
                return -std::numeric_limits<double>::infinity();
            }
        };
        std::vector<std::string> thetas;
        std::vector<int> models;
        double prev = -std::numeric_limits<double>::infinity();
        for (int m = 0; m < fam.num_models(); ++m) {
            thetas.push_back(fam.field(m).theta());
            models.push_back(m);
            const double z = price_of(thetas, models);
            CHECK(z >= prev - 1e-7 * (1.0 + std::abs(z)));
            prev = z;
        }
    }
}

TEST_CASE("frictionless binomial matches backward-induction pricing") {
    Rng rng(59);
    for (int trial = 0; trial < 10; ++trial) {
        const int levels = rng.uniform_int(1, 5);
        const double up = rng.uniform(1.05, 1.5), down = rng.uniform(0.55, 0.95);
        auto [tree, field] =
            build_binomial(levels, rng.uniform(50.0, 150.0), up, down, rng.uniform(0.2, 0.8), "b");
        const ModelFamily fam(tree, {field}, 0.0);
        std::vector<double> g(fam.tree().num_leaves());
        for (double& v : g) v = rng.uniform(0.0, 100.0);
        const ClaimFamily claims(fam, {g});
        const double z = solve_superhedge(fam, claims).price;
        const double oracle = testsupport::backward_induction_price(fam.tree(), up, down, g);
        CHECK(z == Catch::Approx(oracle).margin(1e-8));
    }
}

TEST_CASE("certificate slacks agree with the LP row activities") {
    Rng rng(61);
    for (int trial = 0; trial < 10; ++trial) {
        const double lambda = std::vector<double>{0.0, 0.05, 0.2}[trial % 3];
        const ModelFamily fam = testsupport::random_family(rng, lambda, false);
        const ClaimFamily claims = testsupport::random_claims(rng, fam, 0.0, 80.0);
        const auto prog = build_primal(fam, claims);
        const auto sol = lp::solve(prog.problem);
        REQUIRE(sol.status == lp::LpStatus::optimal);

        // activities straight from the matrix
        std::vector<double> act(prog.problem.num_rows(), 0.0);
        for (const auto& e : prog.problem.entries) act[e.row] += e.value * sol.primal[e.col];

        // raw wealth evaluation of the uncleaned LP point, both closing sides
        const auto& tree = fam.tree();
        for (int m = 0; m < fam.num_models(); ++m) {
            const auto& prices = fam.field(m);
            const double lam = fam.lambda();
            const double s0 = prices.at(tree.root());
            for (int k = 0; k < tree.num_leaves(); ++k) {
                const int leaf = tree.leaves()[k];
                double cash = sol.primal[prog.layout.var_z] -
                              sol.primal[prog.layout.var_h0p] * s0 * (1.0 + lam) +
                              sol.primal[prog.layout.var_h0m] * s0 * (1.0 - lam);
                double phi = sol.primal[prog.layout.var_h0p] - sol.primal[prog.layout.var_h0m];
                tree.for_each_ancestor(leaf, [&](int u) {
                    cash += -(1.0 + lam) * prices.at(u) * sol.primal[prog.layout.buy_index(u)] +
                            (1.0 - lam) * prices.at(u) * sol.primal[prog.layout.sell_index(u)];
                    phi += sol.primal[prog.layout.buy_index(u)] -
                           sol.primal[prog.layout.sell_index(u)];
                });
                const double w_lo = cash + phi * (1.0 - lam) * prices.at(leaf);
                const double w_hi = cash + phi * (1.0 + lam) * prices.at(leaf);
                CHECK(act[prog.layout.domination_row(m, k, 0)] ==
                      Catch::Approx(w_lo).margin(1e-9 * (1.0 + std::abs(w_lo))));
                CHECK(act[prog.layout.domination_row(m, k, 1)] ==
                      Catch::Approx(w_hi).margin(1e-9 * (1.0 + std::abs(w_hi))));
            }
        }

        // and the cleaned certificate never loses wealth
        const auto cert = solve_superhedge(fam, claims);
        const auto rep = wealth_report(fam, cert.strategy, cert.price);
        for (int m = 0; m < fam.num_models(); ++m)
            for (int k = 0; k < tree.num_leaves(); ++k) {
                const double w = rep.values[m][tree.leaves()[k]];
                const double lp_w = std::min(act[prog.layout.domination_row(m, k, 0)],
                                             act[prog.layout.domination_row(m, k, 1)]);
                CHECK(w >= lp_w - 1e-9 * (1.0 + std::abs(lp_w)));
            }
    }
}

TEST_CASE("intermediate floor rows at x = z* leave the optimum unchanged") {
    Rng rng(67);
    int tested = 0;
    for (int trial = 0; trial < 40 && tested < 12; ++trial) {
        const double lambda = std::vector<double>{0.01, 0.05, 0.2}[trial % 3];
        const ModelFamily fam = testsupport::random_family(rng, lambda, trial % 2 == 0);
        bool clean = true;
        for (int m = 0; m < fam.num_models() && clean; ++m)
            clean = !detect_free_lunch(fam, fam.field(m).theta()).free_lunch;
        if (!clean) continue;
        const ClaimFamily claims = testsupport::random_claims(rng, fam, 0.0, 80.0);
        const double z = solve_superhedge(fam, claims).price;
        PrimalOptions opt;
        opt.floor_rows = true;
        opt.floor_x = std::max(z, 0.0);
        const double z2 = solve_superhedge(fam, claims, {}, opt).price;
        CHECK(z2 == Catch::Approx(z).margin(1e-8 * (1.0 + std::abs(z))));
        ++tested;
    }
    CHECK(tested >= 5);
}

TEST_CASE("missing claims are rejected") {
    const ModelFamily fam = testsupport::e3_family();
    CHECK_THROWS_AS(ClaimFamily::from_maps(fam, {{"theta1", {{"ru", 1.0}, {"rd", 0.0}}}}),
                    CoverageError);
    CHECK_THROWS_AS(ClaimFamily(fam, {{std::vector<double>{1.0, 0.0}}}), CoverageError);
}

TEST_CASE("sure-up prices admit a free lunch that costs vanish") {
    const ModelFamily fam = testsupport::one_step_family(130.0, 125.0, 0.05);
    const auto v = detect_free_lunch(fam, "theta1");
    REQUIRE(v.free_lunch);
    REQUIRE(v.strategy.has_value());
    const auto rep = wealth_report(fam, *v.strategy, 0.0);
    double best = 0.0;
    for (int k = 0; k < fam.tree().num_leaves(); ++k) {
        const double w = rep.values[0][fam.tree().leaves()[k]];
        CHECK(w >= -1e-9);
        best = std::max(best, w);
    }
    CHECK(best > 1e-6);

    SECTION("widening the spread restores a consistent price system") {
        const auto v2 = detect_free_lunch(fam.with_lambda(0.2), "theta1");
        CHECK(!v2.free_lunch);
        REQUIRE(v2.cps.has_value());
        for (const auto& [leaf, z] : v2.cps->z_terminal) CHECK(z >= 1.0 - 1e-9);
    }
}

TEST_CASE("binomial trees straddling one never admit a free lunch") {
    for (const double lambda : {0.0, 0.05, 0.3}) {
        const ModelFamily fam = testsupport::e2_family(lambda);
        CHECK(!detect_free_lunch(fam, "theta1").free_lunch);
    }
}

TEST_CASE("free-lunch detection validates the model name") {
    const ModelFamily fam = testsupport::e2_family();
    CHECK_THROWS_AS(detect_free_lunch(fam, "nope"), UnknownModel);
}
