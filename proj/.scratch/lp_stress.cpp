#include <cstdio>
#include <random>
#include "hedge/lp.hpp"
using namespace hedge;
using namespace hedge::lp;
int main() {
    std::mt19937_64 rng(987654321);
    auto urand = [&](double a, double b) { return a + (b - a) * (double)(rng() >> 11) / 9007199254740992.0; };
    int fails = 0, counts[3] = {0,0,0}, cross = 0, crossfail = 0;
    for (int trial = 0; trial < 5000; ++trial) {
        const int n = 1 + (int)(rng() % 30);
        const int m = 1 + (int)(rng() % 30);
        LpProblem p;
        p.sense = rng() % 2 ? Sense::minimize : Sense::maximize;
        for (int j = 0; j < n; ++j) {
            double lo = 0.0, hi = kInf;
            const int kind = (int)(rng() % 4);
            if (kind == 1) lo = -kInf;
            else if (kind == 2) { hi = urand(0.5, 10.0); lo = -hi * (rng() % 2); }
            else if (kind == 3) { lo = urand(-5, 0); hi = lo + urand(0, 10); }
            p.add_variable(lo, hi, urand(-10, 10));
        }
        for (int i = 0; i < m; ++i) {
            std::vector<std::pair<int,double>> terms; bool nz = false;
            for (int j = 0; j < n; ++j) if (rng() % 3 == 0) { double c = urand(-10,10); if (c != 0) { terms.push_back({j,c}); nz = true; } }
            if (!nz) terms.push_back({(int)(rng() % n), urand(1,10)});
            p.add_row((Relation)(rng()%3), urand(-10,10), terms);
        }
        LpSolution s;
        try { s = solve(p); } catch (const SolverFailure& e) { ++fails; std::printf("FAIL %d solver: %s\n", trial, e.what()); continue; }
        if (s.status == LpStatus::optimal) {
            ++counts[0];
            auto rep = verify_solution(p, s);
            if (!(rep.max_primal_residual <= 1e-9 && rep.max_dual_residual <= 1e-8 && rep.duality_gap <= 1e-7*(1+std::abs(rep.primal_objective))))
                { ++fails; std::printf("FAIL %d verify pres=%g dres=%g gap=%g\n", trial, rep.max_primal_residual, rep.max_dual_residual, rep.duality_gap); }
        } else if (s.status == LpStatus::infeasible) {
            ++counts[1];
            auto fr = verify_farkas(p, s.farkas);
            if (!fr.valid) { ++fails; std::printf("FAIL %d farkas m=%g\n", trial, fr.margin); }
        } else {
            ++counts[2];
            auto rr = verify_ray(p, s.ray);
            if (!rr.valid) { ++fails; std::printf("FAIL %d ray res=%g imp=%g\n", trial, rr.max_direction_residual, rr.improvement); }
        }
        if (p.num_entries() <= 200 && trial % 7 == 0) {
            ++cross;
            auto rs = solve_rational(p);
            if (rs.status != s.status) { ++crossfail; std::printf("CROSS %d status %d vs %d\n", trial, (int)s.status, (int)rs.status); }
            else if (s.status == LpStatus::optimal && std::abs(to_double(rs.objective) - s.objective) > 1e-6*(1+std::abs(s.objective)))
                { ++crossfail; std::printf("CROSS %d obj %.12g vs %.12g\n", trial, s.objective, to_double(rs.objective)); }
        }
    }
    std::printf("opt=%d inf=%d unb=%d cross=%d crossfail=%d fails=%d\n", counts[0], counts[1], counts[2], cross, crossfail, fails);
    return fails + crossfail != 0;
}
