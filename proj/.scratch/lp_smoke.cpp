#include <cstdio>
#include <random>

#include "hedge/lp.hpp"

using namespace hedge;
using namespace hedge::lp;

static int fails = 0;
#define CHECK(cond)                                                  \
    do {                                                             \
        if (!(cond)) {                                               \
            ++fails;                                                 \
            std::printf("FAIL %s:%d: %s\n", __FILE__, __LINE__, #cond); \
        }                                                            \
    } while (0)

int main() {
    {
        // min x s.t. x >= 3
        LpProblem p;
        p.add_variable(0, kInf, 1.0);
        p.add_row(Relation::ge, 3.0, {{0, 1.0}});
        auto s = solve(p);
        CHECK(s.status == LpStatus::optimal);
        CHECK(std::abs(s.primal[0] - 3.0) < 1e-12);
        CHECK(std::abs(s.objective - 3.0) < 1e-12);
        auto rep = verify_solution(p, s);
        std::printf("ex1: obj=%.17g primres=%g dualres=%g gap=%g dual0=%g\n", s.objective,
                    rep.max_primal_residual, rep.max_dual_residual, rep.duality_gap, s.dual[0]);
        CHECK(rep.max_primal_residual < 1e-9 && rep.max_dual_residual < 1e-9 && rep.duality_gap < 1e-9);
    }
    {
        // min 0 s.t. x <= -1, x >= 0 -> infeasible
        LpProblem p;
        p.add_variable(0, kInf, 0.0);
        p.add_row(Relation::le, -1.0, {{0, 1.0}});
        auto s = solve(p);
        CHECK(s.status == LpStatus::infeasible);
        auto fr = verify_farkas(p, s.farkas);
        std::printf("ex2: farkas margin=%g valid=%d\n", fr.margin, (int)fr.valid);
        CHECK(fr.valid);
    }
    {
        // max x s.t. x >= 0 -> unbounded, ray (1)
        LpProblem p;
        p.add_variable(0, kInf, 1.0);
        p.sense = Sense::maximize;
        p.add_row(Relation::ge, 0.0, {{0, 1.0}});
        auto s = solve(p);
        CHECK(s.status == LpStatus::unbounded);
        auto rr = verify_ray(p, s.ray);
        std::printf("ex3: ray=%g improvement=%g valid=%d\n", s.ray[0], rr.improvement, (int)rr.valid);
        CHECK(rr.valid && std::abs(s.ray[0] - 1.0) < 1e-12);
    }
    {
        // E2: min z s.t. z + 9h >= 20, z - 29h >= 0, h >= 0 -> z = 290/19, h = 10/19
        LpProblem p;
        int z = p.add_variable(-kInf, kInf, 1.0);
        int h = p.add_variable(0, kInf, 0.0);
        p.add_row(Relation::ge, 20.0, {{z, 1.0}, {h, 9.0}});
        p.add_row(Relation::ge, 0.0, {{z, 1.0}, {h, -29.0}});
        auto s = solve(p);
        CHECK(s.status == LpStatus::optimal);
        std::printf("E2: z=%.17g h=%.17g (want %.17g %.17g)\n", s.primal[0], s.primal[1],
                    290.0 / 19.0, 10.0 / 19.0);
        CHECK(std::abs(s.primal[0] - 290.0 / 19.0) < 1e-9);
        CHECK(std::abs(s.primal[1] - 10.0 / 19.0) < 1e-9);
        auto rep = verify_solution(p, s);
        CHECK(rep.max_primal_residual < 1e-9 && rep.max_dual_residual < 1e-9 && rep.duality_gap < 1e-7);

        auto rs = solve_rational(p);
        CHECK(rs.status == LpStatus::optimal);
        CHECK(rs.objective == rational_frac(290, 19));
        CHECK(rs.primal[1] == rational_frac(10, 19));
        std::printf("E2 exact ok\n");
    }

    // Randomized stress: solve, then verify whichever certificate came back.
    std::mt19937_64 rng(20260809);
    auto urand = [&](double a, double b) {
        return a + (b - a) * (double)(rng() >> 11) / 9007199254740992.0;
    };
    int counts[3] = {0, 0, 0};
    for (int trial = 0; trial < 500; ++trial) {
        const int n = 1 + (int)(rng() % 30);
        const int m = 1 + (int)(rng() % 30);
        LpProblem p;
        p.sense = rng() % 2 ? Sense::minimize : Sense::maximize;
        for (int j = 0; j < n; ++j) {
            double lo = 0.0, hi = kInf;
            const int kind = (int)(rng() % 4);
            if (kind == 1) { lo = -kInf; }
            else if (kind == 2) { hi = urand(0.5, 10.0); lo = -hi * (rng() % 2); }
            else if (kind == 3) { lo = urand(-5, 0); hi = lo + urand(0, 10); }
            p.add_variable(lo, hi, urand(-10, 10));
        }
        for (int i = 0; i < m; ++i) {
            std::vector<std::pair<int, double>> terms;
            bool nonzero = false;
            for (int j = 0; j < n; ++j) {
                if (rng() % 3 == 0) {
                    double c = urand(-10, 10);
                    if (c != 0.0) { terms.push_back({j, c}); nonzero = true; }
                }
            }
            if (!nonzero) terms.push_back({(int)(rng() % n), urand(1, 10)});
            Relation rel = (Relation)(rng() % 3);
            p.add_row(rel, urand(-10, 10), terms);
        }
        p.validate();
        LpSolution s;
        try {
            s = solve(p);
        } catch (const SolverFailure& e) {
            ++fails;
            std::printf("FAIL trial %d: %s\n", trial, e.what());
            continue;
        }
        if (s.status == LpStatus::optimal) {
            ++counts[0];
            auto rep = verify_solution(p, s);
            if (!(rep.max_primal_residual <= 1e-9 && rep.max_dual_residual <= 1e-7 &&
                  rep.duality_gap <= 1e-7 * (1 + std::abs(rep.primal_objective)))) {
                ++fails;
                std::printf("FAIL trial %d verify: pres=%g dres=%g gap=%g\n", trial,
                            rep.max_primal_residual, rep.max_dual_residual, rep.duality_gap);
            }
        } else if (s.status == LpStatus::infeasible) {
            ++counts[1];
            auto fr = verify_farkas(p, s.farkas);
            if (!fr.valid) {
                ++fails;
                std::printf("FAIL trial %d farkas margin=%g\n", trial, fr.margin);
            }
        } else {
            ++counts[2];
            auto rr = verify_ray(p, s.ray);
            if (!rr.valid) {
                ++fails;
                std::printf("FAIL trial %d ray res=%g impr=%g\n", trial, rr.max_direction_residual,
                            rr.improvement);
            }
        }
    }
    std::printf("random: optimal=%d infeasible=%d unbounded=%d\n", counts[0], counts[1], counts[2]);
    std::printf("%s (%d failures)\n", fails == 0 ? "ALL OK" : "FAILURES", fails);
    return fails != 0;
}
