#include <cstdio>

#include "hedge/primal.hpp"

using namespace hedge;

static int fails = 0;
#define CHECK(cond)                                                     \
    do {                                                                \
        if (!(cond)) {                                                  \
            ++fails;                                                    \
            std::printf("FAIL %s:%d: %s\n", __FILE__, __LINE__, #cond); \
        }                                                               \
    } while (0)
#define CHECK_NEAR(a, b, tol)                                                          \
    do {                                                                               \
        const double va = (a), vb = (b);                                               \
        if (!(std::abs(va - vb) <= (tol))) {                                           \
            ++fails;                                                                   \
            std::printf("FAIL %s:%d: %s=%.12g vs %s=%.12g\n", __FILE__, __LINE__, #a, \
                        va, #b, vb);                                                   \
        }                                                                              \
    } while (0)

static ModelFamily one_step(double s_up, double s_down, double lambda, double p_up = 0.5) {
    ScenarioTree tree(1, {{"r", std::nullopt, 0, 1.0},
                          {"ru", std::string("r"), 1, p_up},
                          {"rd", std::string("r"), 1, 1.0 - p_up}});
    PriceField field = PriceField::from_map(tree, "theta1",
                                            {{"r", 100.0}, {"ru", s_up}, {"rd", s_down}});
    return ModelFamily(std::move(tree), {std::move(field)}, lambda);
}

int main() {
    // --- E2: one-step 120/80 tree, lambda 0.05, call at 100 ---
    {
        ModelFamily fam = one_step(120, 80, 0.05);
        ClaimFamily claims = ClaimFamily::from_maps(
            fam, {{"theta1", {{"ru", 20.0}, {"rd", 0.0}}}});
        auto cert = solve_superhedge(fam, claims);
        std::printf("E2: z*=%.12g h0=%.12g floor=%.12g\n", cert.price, cert.strategy.h0, cert.floor);
        CHECK_NEAR(cert.price, 290.0 / 19.0, 1e-9);
        CHECK_NEAR(cert.strategy.h0, 10.0 / 19.0, 1e-9);
        CHECK_NEAR(cert.floor, 290.0 / 19.0, 1e-9);

        // exact mode
        auto prog = build_primal(fam, claims);
        auto ex = lp::solve_rational(prog.problem);
        CHECK(ex.status == lp::LpStatus::optimal);
        CHECK(ex.objective == rational_frac(290, 19));

        // wealth at the optimum: 20 up, 0 down
        CHECK_NEAR(liquidation_value(fam, cert.strategy, cert.price, "theta1", "ru"), 20.0, 1e-9);
        CHECK_NEAR(liquidation_value(fam, cert.strategy, cert.price, "theta1", "rd"), 0.0, 1e-9);

        // dual matches
        auto dual = solve_dual_cps(fam, claims);
        std::printf("E2 dual: %.12g resid=%g\n", dual.value, dual.normalization_residual);
        CHECK_NEAR(dual.value, 290.0 / 19.0, 1e-8);
        CHECK(dual.normalization_residual <= 1e-9);
        auto rep = validate_cps(fam, dual.cps);
        CHECK(rep.valid);
        auto weak = weak_duality_check(fam, claims, cert.strategy, cert.price, dual.cps);
        std::printf("E2 weak: E[ZW]=%g E[ZG]=%g mass=%g\n", weak.wealth_expectation,
                    weak.claim_expectation, weak.mass);
        CHECK(weak.wealth_ok && weak.price_ok);
        CHECK_NEAR(weak.wealth_expectation, 0.0, 1e-9);
        CHECK_NEAR(weak.claim_expectation, 290.0 / 19.0, 1e-8);

        // lambda 0.1 variant: z* = 20, h0 = 0
        ModelFamily fam2 = fam.with_lambda(0.10);
        auto cert2 = solve_superhedge(fam2, claims);
        std::printf("E2@0.1: z*=%.12g h0=%.12g\n", cert2.price, cert2.strategy.h0);
        CHECK_NEAR(cert2.price, 20.0, 1e-9);
        CHECK_NEAR(cert2.strategy.h0, 0.0, 1e-9);
        auto dual2 = solve_dual_cps(fam2, claims);
        CHECK_NEAR(dual2.value, 20.0, 1e-8);
    }

    // --- E3: robust two-model, lambda 0 ---
    {
        auto [tree, f1] = build_binomial(1, 100.0, 1.2, 0.8, 0.5, "theta1");
        PriceField f2 = PriceField::from_map(tree, "theta2",
                                             {{"r", 100.0}, {"ru", 130.0}, {"rd", 90.0}});
        ModelFamily fam(tree, {f1, f2}, 0.0);
        ClaimFamily claims = ClaimFamily::from_maps(
            fam, {{"theta1", {{"ru", 20.0}, {"rd", 0.0}}},
                  {"theta2", {{"ru", 30.0}, {"rd", 0.0}}}});
        auto cert = solve_superhedge(fam, claims);
        std::printf("E3: z*=%.12g h0=%.12g\n", cert.price, cert.strategy.h0);
        CHECK_NEAR(cert.price, 12.0, 1e-9);
        CHECK_NEAR(cert.strategy.h0, 0.6, 1e-9);

        auto dual = solve_dual_cps(fam, claims);
        std::printf("E3 dual: %.12g\n", dual.value);
        CHECK_NEAR(dual.value, 12.0, 1e-8);
        CHECK(validate_cps(fam, dual.cps).valid);

        // individual prices 10 and 7.5
        auto c1 = solve_superhedge(fam.restricted_to({"theta1"}),
                                   ClaimFamily::from_maps(fam.restricted_to({"theta1"}),
                                                          {{"theta1", {{"ru", 20.0}, {"rd", 0.0}}}}));
        auto c2 = solve_superhedge(fam.restricted_to({"theta2"}),
                                   ClaimFamily::from_maps(fam.restricted_to({"theta2"}),
                                                          {{"theta2", {{"ru", 30.0}, {"rd", 0.0}}}}));
        std::printf("E3 individual: %.12g %.12g\n", c1.price, c2.price);
        CHECK_NEAR(c1.price, 10.0, 1e-9);
        CHECK_NEAR(c2.price, 7.5, 1e-9);
        CHECK(cert.price > std::max(c1.price, c2.price) + 1.0);

        // pasted CPS from frictionless risk-neutral parts: dual value 8.75
        // theta1: q = 0.5 (120/80); theta2: q = 0.25 (130/90)
        SingleModelCps part1, part2;
        part1.z_terminal = {{"ru", 0.5 / 0.5}, {"rd", 0.5 / 0.5}};
        part1.m = {{"r", 100.0}, {"ru", 120.0}, {"rd", 80.0}};
        part2.z_terminal = {{"ru", 0.25 / 0.5}, {"rd", 0.75 / 0.5}};
        part2.m = {{"r", 100.0}, {"ru", 0.5 * 130.0}, {"rd", 1.5 * 90.0}};
        auto pasted = paste_cps(fam, {{"theta1", part1}, {"theta2", part2}},
                                {{"theta1", 0.5}, {"theta2", 0.5}});
        CHECK(validate_cps(fam, pasted).valid);
        auto weak = weak_duality_check(fam, claims, cert.strategy, cert.price, pasted);
        std::printf("E3 pasted: E[ZG]=%.12g\n", weak.claim_expectation);
        CHECK_NEAR(weak.claim_expectation, 8.75, 1e-9);
        CHECK(weak.wealth_ok && weak.price_ok);

        auto pasted1 = paste_cps(fam, {{"theta1", part1}, {"theta2", part2}},
                                 {{"theta1", 1.0}, {"theta2", 0.0}});
        auto weak1 = weak_duality_check(fam, claims, cert.strategy, cert.price, pasted1);
        CHECK_NEAR(weak1.claim_expectation, 10.0, 1e-9);
    }

    // --- G == 0 -> z* = 0, dual 0 ---
    {
        ModelFamily fam = one_step(120, 80, 0.05);
        ClaimFamily claims = ClaimFamily::from_maps(fam, {{"theta1", {{"ru", 0.0}, {"rd", 0.0}}}});
        auto cert = solve_superhedge(fam, claims);
        CHECK_NEAR(cert.price, 0.0, 1e-12);
        auto dual = solve_dual_cps(fam, claims);
        CHECK_NEAR(dual.value, 0.0, 1e-12);
    }

    // --- free lunch: sure-up 130/125 at lambda 0.05; flips at 0.2 ---
    {
        ModelFamily fam = one_step(130, 125, 0.05);
        auto v = detect_free_lunch(fam, "theta1");
        CHECK(v.free_lunch);
        CHECK(v.strategy.has_value());
        auto wr = wealth_report(fam, *v.strategy, 0.0);
        double minleaf = 1e300, maxleaf = -1e300;
        for (int k = 0; k < fam.tree().num_leaves(); ++k) {
            const double w = wr.values[0][fam.tree().leaves()[k]];
            minleaf = std::min(minleaf, w);
            maxleaf = std::max(maxleaf, w);
        }
        std::printf("free lunch: gain=%g leaf wealth in [%g, %g] h0=%g\n", v.gain, minleaf,
                    maxleaf, v.strategy->h0);
        CHECK(minleaf >= -1e-9 && maxleaf > 1e-6);

        ModelFamily fam2 = fam.with_lambda(0.2);
        auto v2 = detect_free_lunch(fam2, "theta1");
        CHECK(!v2.free_lunch);
        CHECK(v2.cps.has_value());

        // binomial down<1<up: never a free lunch
        ModelFamily fam3 = one_step(120, 80, 0.0);
        CHECK(!detect_free_lunch(fam3, "theta1").free_lunch);
        ModelFamily fam4 = one_step(120, 80, 0.3);
        CHECK(!detect_free_lunch(fam4, "theta1").free_lunch);
    }

    // --- sandwich fitter ---
    {
        auto [tree, field] = build_binomial(1, 100.0, 1.2, 0.8, 0.5);
        (void)field;
        std::map<std::string, double> lo{{"r", 95.0}, {"ru", 114.0}, {"rd", 76.0}};
        std::map<std::string, double> hi{{"r", 105.0}, {"ru", 126.0}, {"rd", 84.0}};
        auto fit = fit_sandwich_martingale(tree, lo, hi);
        CHECK(fit.feasible);
        CHECK_NEAR(fit.m.at("r"), 100.0, 1e-12);
        CHECK_NEAR(fit.m.at("r"), 0.5 * fit.m.at("ru") + 0.5 * fit.m.at("rd"), 1e-12);

        std::map<std::string, double> lo2{{"r", 95.0}, {"ru", 118.75}, {"rd", 118.75}};
        std::map<std::string, double> hi2{{"r", 105.0}, {"ru", 131.25}, {"rd", 131.25}};
        auto fit2 = fit_sandwich_martingale(tree, lo2, hi2);
        CHECK(!fit2.feasible);
        CHECK(fit2.witness_node == "r");

        std::map<std::string, double> c{{"r", 7.0}, {"ru", 7.0}, {"rd", 7.0}};
        auto fit3 = fit_sandwich_martingale(tree, c, c);
        CHECK(fit3.feasible);
        CHECK_NEAR(fit3.m.at("ru"), 7.0, 1e-12);
    }

    // --- wealth identities on E2 numbers from the spec ---
    {
        ModelFamily fam = one_step(120, 80, 0.05);
        Strategy s;
        s.h0 = 10.0 / 19.0;
        CHECK_NEAR(liquidation_value(fam, s, 290.0 / 19.0, "theta1", "ru"), 20.0, 1e-12);
        CHECK_NEAR(liquidation_value(fam, s, 290.0 / 19.0, "theta1", "rd"), 0.0, 1e-12);
        auto adm = check_admissible(fam, s, 290.0 / 19.0);
        CHECK(adm.robust);
        auto adm2 = check_admissible(fam, s, 290.0 / 19.0 - 0.01);
        CHECK(!adm2.robust);

        Strategy h1;
        h1.h0 = 1.0;
        auto adm3 = check_admissible(fam, h1, 0.0);
        CHECK(!adm3.robust);
        CHECK(adm3.per_model[0].witness.value() == "r");
        CHECK_NEAR(liquidation_value(fam, h1, 0.0, "theta1", "r"), -10.0, 1e-12);

        // short: W = z + 0.95 S0 - 1.05 S
        Strategy sh;
        sh.h0 = -1.0;
        CHECK_NEAR(liquidation_value(fam, sh, 5.0, "theta1", "ru"),
                   5.0 + 0.95 * 100.0 - 1.05 * 120.0, 1e-12);

        CHECK_NEAR(total_variation(fam.tree(), s, "ru"), 10.0 / 19.0, 1e-15);
        Strategy rr;
        rr.buys = {{"r", 3.0}};
        rr.sells = {{"r", 3.0}};
        auto cleaned = remove_redundancy(rr);
        CHECK(cleaned.buys.empty() && cleaned.sells.empty());
        Strategy rr2;
        rr2.buys = {{"r", 5.0}};
        rr2.sells = {{"r", 2.0}};
        auto cleaned2 = remove_redundancy(rr2);
        CHECK_NEAR(cleaned2.buys.at("r"), 3.0, 1e-15);
        CHECK(cleaned2.sells.empty());
    }

    // --- kernel model checks ---
    {
        auto [tree, field] = build_kernel_model(
            3, {0.0, 0.0, 0.0}, [](int, int) { return 1.0; }, 0.1,
            PriceTransform::exponential, "k");
        auto [tree2, field2] = build_binomial(3, 1.0, std::exp(0.1), std::exp(-0.1), 0.5, "b");
        CHECK(tree.size() == 15);
        double maxrel = 0.0;
        for (int i = 0; i < tree.size(); ++i)
            maxrel = std::max(maxrel, std::abs(field.at(i) / field2.at(i) - 1.0));
        std::printf("kernel-vs-binomial max rel: %g\n", maxrel);
        CHECK(maxrel <= 1e-12);

        auto [tree3, field3] = build_kernel_model(
            2, {0.1, 0.1}, [](int, int) { return 0.0; }, 0.1,
            PriceTransform::exponential, "k");
        for (int i = 0; i < tree3.size(); ++i)
            CHECK_NEAR(field3.at(i), std::exp(0.1 * tree3.time(i) * 0.5), 1e-15);
    }

    std::printf("%s (%d failures)\n", fails == 0 ? "ALL OK" : "FAILURES", fails);
    return fails != 0;
}
