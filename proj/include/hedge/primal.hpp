#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hedge/dual.hpp"
#include "hedge/lp.hpp"
#include "hedge/wealth.hpp"

namespace hedge {

struct PrimalOptions {
    // Intermediate floor rows W^0(node) >= -floor_x for every model and node.
    // Off by default: on a finite tree they never move the optimum, which is
    // itself a tested property.
    bool floor_rows = false;
    double floor_x = 0.0;
};

struct PrimalLayout {
    int var_z = 0, var_h0p = 1, var_h0m = 2, trade_base = 3;
    int num_models = 0, num_leaves = 0;
    int buy_index(int node) const { return trade_base + 2 * node; }
    int sell_index(int node) const { return trade_base + 2 * node + 1; }
    // Domination rows come first, two per (model, leaf): side 0 closes the
    // position at the bid, side 1 at the ask.
    int domination_row(int model, int leaf_ordinal, int side) const {
        return (model * num_leaves + leaf_ordinal) * 2 + side;
    }
};

struct PrimalProgram {
    lp::LpProblem problem;
    PrimalLayout layout;
};

// Superhedging LP: minimize z subject to both linearizations of the terminal
// liquidation value dominating the claim at every (model, leaf).
inline PrimalProgram build_primal(const ModelFamily& family, const ClaimFamily& claims,
                                  const PrimalOptions& options = {}) {
    if (claims.num_models() != family.num_models())
        throw CoverageError("claims do not cover the family");
    if (options.floor_rows && !(options.floor_x >= 0.0))
        throw ParamOutOfRange("floor must be >= 0");

    const auto& tree = family.tree();
    const double lam = family.lambda();

    PrimalProgram out;
    out.layout.num_models = family.num_models();
    out.layout.num_leaves = tree.num_leaves();

    lp::LpProblem& p = out.problem;
    p.add_variable(-lp::kInf, lp::kInf, 1.0);  // z
    p.add_variable(0.0, lp::kInf, 0.0);        // h0+
    p.add_variable(0.0, lp::kInf, 0.0);        // h0-
    for (int i = 0; i < tree.size(); ++i) {
        p.add_variable(0.0, lp::kInf, 0.0);  // buy at node i
        p.add_variable(0.0, lp::kInf, 0.0);  // sell at node i
    }

    // Coefficients of W at `node` under model m, liquidating at (1 -/+ lam)S.
    auto wealth_terms = [&](int m, int node, int side, bool with_z) {
        const PriceField& prices = family.field(m);
        const double s0 = prices.at(tree.root());
        const double close = (side == 0 ? 1.0 - lam : 1.0 + lam) * prices.at(node);
        std::vector<std::pair<int, double>> terms;
        if (with_z) terms.push_back({out.layout.var_z, 1.0});
        terms.push_back({out.layout.var_h0p, -s0 * (1.0 + lam) + close});
        terms.push_back({out.layout.var_h0m, s0 * (1.0 - lam) - close});
        tree.for_each_ancestor(node, [&](int u) {
            terms.push_back({out.layout.buy_index(u), -(1.0 + lam) * prices.at(u) + close});
            terms.push_back({out.layout.sell_index(u), (1.0 - lam) * prices.at(u) - close});
        });
        return terms;
    };

    for (int m = 0; m < family.num_models(); ++m)
        for (int k = 0; k < tree.num_leaves(); ++k)
            for (int side = 0; side < 2; ++side)
                p.add_row(lp::Relation::ge, claims.at(m, k),
                          wealth_terms(m, tree.leaves()[k], side, true));

    if (options.floor_rows) {
        for (int m = 0; m < family.num_models(); ++m) {
            for (int i = 0; i < tree.size(); ++i) {
                for (int side = 0; side < 2; ++side) {
                    auto terms = wealth_terms(m, i, side, false);
                    double maxc = 0.0;
                    for (const auto& [col, c] : terms) maxc = std::max(maxc, std::abs(c));
                    if (maxc == 0.0) continue;  // frictionless root row is vacuous
                    p.add_row(lp::Relation::ge, -options.floor_x, terms);
                }
            }
        }
    }
    return out;
}

struct PrimalCertificate {
    double price = 0.0;
    Strategy strategy;
    std::map<std::string, std::map<std::string, double>> slacks;  // theta -> leaf -> W - G
    double floor = 0.0;  // smallest x for which the strategy is robust-admissible
};

inline Strategy decode_primal_strategy(const ScenarioTree& tree, const PrimalLayout& layout,
                                       const std::vector<double>& x) {
    auto clean = [](double v) {
        if (v < 0.0) {
            if (v < -1e-9) throw SolverFailure("negative trade volume in LP solution");
            return 0.0;
        }
        return v;
    };
    Strategy s;
    s.h0 = clean(x[layout.var_h0p]) - clean(x[layout.var_h0m]);
    for (int i = 0; i < tree.size(); ++i) {
        const double b = clean(x[layout.buy_index(i)]);
        const double v = clean(x[layout.sell_index(i)]);
        if (b > 0.0) s.buys[tree.id(i)] = b;
        if (v > 0.0) s.sells[tree.id(i)] = v;
    }
    return remove_redundancy(s);
}

// Solves the superhedging LP and re-verifies the certificate by direct wealth
// evaluation, independently of the LP row activities.
inline PrimalCertificate solve_superhedge(const ModelFamily& family, const ClaimFamily& claims,
                                          const lp::SolveOptions& opts = {},
                                          const PrimalOptions& build = {}) {
    const PrimalProgram prog = build_primal(family, claims, build);
    const lp::LpSolution sol = lp::solve_with(prog.problem, opts);
    if (sol.status == lp::LpStatus::unbounded)
        throw FreeLunch("superhedging cost unbounded below: the family admits a free lunch");
    if (sol.status == lp::LpStatus::infeasible)
        throw SolverFailure("superhedging LP infeasible; finite claims always admit a hedge");

    PrimalCertificate cert;
    cert.price = sol.objective;
    cert.strategy = decode_primal_strategy(family.tree(), prog.layout, sol.primal);

    const auto& tree = family.tree();
    const auto report = wealth_report(family, cert.strategy, cert.price);
    const auto zero_report = wealth_report(family, cert.strategy, 0.0);
    // attainable slack precision scales with the traded volume
    double volume = std::abs(cert.strategy.h0);
    for (const auto& [id, v] : cert.strategy.buys) volume += v;
    for (const auto& [id, v] : cert.strategy.sells) volume += v;
    double pmax = 0.0;
    for (int m = 0; m < family.num_models(); ++m)
        for (int i = 0; i < tree.size(); ++i) pmax = std::max(pmax, family.field(m).at(i));
    double floor = 0.0;
    for (int m = 0; m < family.num_models(); ++m) {
        auto& side = cert.slacks[report.thetas[m]];
        for (int k = 0; k < tree.num_leaves(); ++k) {
            const int leaf = tree.leaves()[k];
            const double slack = report.values[m][leaf] - claims.at(m, k);
            const double tol = 1e-7 * (1.0 + std::abs(claims.at(m, k))) + 1e-11 * volume * pmax;
            if (slack < -tol)
                throw SolverFailure("certificate slack negative at '" + tree.id(leaf) + "'");
            side[tree.id(leaf)] = slack;
        }
        floor = std::max(floor, -zero_report.running_min[m]);
    }
    cert.floor = std::max(floor, 0.0);
    return cert;
}

// Free-lunch detection for one model. The verdict is tied to strict CPS
// existence; when none exists the certificate strategy comes from maximizing
// expected terminal wealth over unit-variation strategies with nonnegative
// terminal liquidation value everywhere.
struct FreeLunchResult {
    bool free_lunch = false;
    std::optional<Strategy> strategy;      // when free_lunch
    std::optional<SingleModelCps> cps;     // when no free lunch
    double gain = 0.0;                     // E[W^0_T] of the certificate strategy
};

inline FreeLunchResult detect_free_lunch(const ModelFamily& family, const std::string& theta) {
    ModelFamily single = family.restricted_to({theta});
    FreeLunchResult out;
    auto fit = fit_positive_cps(single, theta);
    if (fit.cps) {
        out.cps = std::move(fit.cps);
        return out;
    }

    const auto& tree = single.tree();
    const double lam = single.lambda();
    const PriceField& prices = single.field(0);
    const double s0 = prices.at(tree.root());

    lp::LpProblem p;
    p.sense = lp::Sense::maximize;
    const int h0p = p.add_variable(0.0, lp::kInf, 0.0);
    const int h0m = p.add_variable(0.0, lp::kInf, 0.0);
    const int trade_base = p.num_vars();
    for (int i = 0; i < tree.size(); ++i) {
        p.add_variable(0.0, lp::kInf, 0.0);
        p.add_variable(0.0, lp::kInf, 0.0);
    }
    const int w_base = p.num_vars();
    for (int k = 0; k < tree.num_leaves(); ++k)
        p.add_variable(0.0, lp::kInf, tree.prob(tree.leaves()[k]));

    for (int k = 0; k < tree.num_leaves(); ++k) {
        const int leaf = tree.leaves()[k];
        for (int side = 0; side < 2; ++side) {
            const double close = (side == 0 ? 1.0 - lam : 1.0 + lam) * prices.at(leaf);
            std::vector<std::pair<int, double>> terms{{w_base + k, -1.0}};
            terms.push_back({h0p, -s0 * (1.0 + lam) + close});
            terms.push_back({h0m, s0 * (1.0 - lam) - close});
            tree.for_each_ancestor(leaf, [&](int u) {
                terms.push_back({trade_base + 2 * u, -(1.0 + lam) * prices.at(u) + close});
                terms.push_back({trade_base + 2 * u + 1, (1.0 - lam) * prices.at(u) - close});
            });
            p.add_row(lp::Relation::ge, 0.0, terms);
        }
    }
    {
        std::vector<std::pair<int, double>> budget{{h0p, 1.0}, {h0m, 1.0}};
        for (int i = 0; i < tree.size(); ++i) {
            budget.push_back({trade_base + 2 * i, 1.0});
            budget.push_back({trade_base + 2 * i + 1, 1.0});
        }
        p.add_row(lp::Relation::le, 1.0, budget);
    }

    const lp::LpSolution sol = lp::solve(p);
    if (sol.status != lp::LpStatus::optimal || !(sol.objective > 1e-9))
        throw SolverFailure("model '" + theta +
                            "' has no positive CPS yet no terminal arbitrage was found");
    auto clean = [](double v) { return v > 0.0 ? v : 0.0; };
    Strategy s;
    s.h0 = clean(sol.primal[h0p]) - clean(sol.primal[h0m]);
    for (int i = 0; i < tree.size(); ++i) {
        const double b = clean(sol.primal[trade_base + 2 * i]);
        const double v = clean(sol.primal[trade_base + 2 * i + 1]);
        if (b > 0.0) s.buys[tree.id(i)] = b;
        if (v > 0.0) s.sells[tree.id(i)] = v;
    }
    out.free_lunch = true;
    out.strategy = remove_redundancy(s);
    out.gain = sol.objective;
    return out;
}

} // namespace hedge
