#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hedge/tree.hpp"

namespace hedge {

// Trading strategy: scalar initial transfer plus nonnegative buy/sell transfer
// increments attached to nodes. Omitted nodes trade nothing. The position at a
// node is h0 plus the increments along the path from the root.
struct Strategy {
    double h0 = 0.0;
    std::map<std::string, double> buys;
    std::map<std::string, double> sells;

    void validate() const {
        if (!std::isfinite(h0)) throw InvariantViolation("strategy h0 not finite");
        for (const auto* side : {&buys, &sells})
            for (const auto& [id, v] : *side)
                if (!(v >= 0.0) || !std::isfinite(v))
                    throw InvariantViolation("strategy increment at '" + id + "' must be >= 0");
    }
};

namespace detail {

struct DenseStrategy {
    double h0 = 0.0;
    std::vector<double> buys, sells;  // per node index
};

inline DenseStrategy densify(const ScenarioTree& tree, const Strategy& s) {
    s.validate();
    DenseStrategy d;
    d.h0 = s.h0;
    d.buys.assign(tree.size(), 0.0);
    d.sells.assign(tree.size(), 0.0);
    for (const auto& [id, v] : s.buys) d.buys[tree.index(id)] = v;
    for (const auto& [id, v] : s.sells) d.sells[tree.index(id)] = v;
    return d;
}

} // namespace detail

// Liquidation value per the transfer-cost ledger: initial capital, the initial
// transfer crossing the spread at the root price, every increment crossing the
// spread at its node price, and the terminal position closed at bid (long) or
// ask (short).
inline double liquidation_value(const ModelFamily& family, const Strategy& strategy, double z,
                                const std::string& theta, const std::string& node_id) {
    const auto& tree = family.tree();
    const PriceField& prices = family.field(family.theta_index(theta));
    const int node = tree.index(node_id);
    const double lam = family.lambda();
    const double s0 = prices.at(tree.root());

    const auto d = detail::densify(tree, strategy);
    double w = z - std::max(d.h0, 0.0) * s0 * (1.0 + lam) + std::max(-d.h0, 0.0) * s0 * (1.0 - lam);
    double phi = d.h0;
    tree.for_each_ancestor(node, [&](int u) {
        w += -(1.0 + lam) * prices.at(u) * d.buys[u] + (1.0 - lam) * prices.at(u) * d.sells[u];
        phi += d.buys[u] - d.sells[u];
    });
    w += std::max(phi, 0.0) * (1.0 - lam) * prices.at(node) -
         std::max(-phi, 0.0) * (1.0 + lam) * prices.at(node);
    return w;
}

// Per-theta liquidation values at every node, running minima, and the total
// variation |h0| + sum(buys + sells) along each root-to-leaf path.
struct WealthReport {
    std::vector<std::string> thetas;
    std::vector<std::vector<double>> values;  // [model][node]
    std::vector<double> running_min;          // [model]
    std::vector<double> variation;            // [leaf ordinal]
};

inline WealthReport wealth_report(const ModelFamily& family, const Strategy& strategy, double z) {
    const auto& tree = family.tree();
    const auto d = detail::densify(tree, strategy);
    WealthReport rep;
    rep.variation.assign(tree.num_leaves(), 0.0);

    // cash (without liquidation) and position, accumulated along paths
    std::vector<double> phi(tree.size(), 0.0), var(tree.size(), 0.0);
    for (int m = 0; m < family.num_models(); ++m) {
        const PriceField& prices = family.field(m);
        const double lam = family.lambda();
        const double s0 = prices.at(tree.root());
        std::vector<double> cash(tree.size(), 0.0);
        std::vector<double> w(tree.size(), 0.0);
        const double cash_root = z - std::max(d.h0, 0.0) * s0 * (1.0 + lam) +
                                 std::max(-d.h0, 0.0) * s0 * (1.0 - lam);
        double worst = std::numeric_limits<double>::infinity();
        for (int t = 0; t <= tree.horizon(); ++t) {
            for (int i = 0; i < tree.size(); ++i) {
                if (tree.time(i) != t) continue;
                const int p = tree.parent(i);
                const double base_cash = p < 0 ? cash_root : cash[p];
                const double base_phi = p < 0 ? d.h0 : phi[p];
                const double base_var = p < 0 ? std::abs(d.h0) : var[p];
                cash[i] = base_cash - (1.0 + lam) * prices.at(i) * d.buys[i] +
                          (1.0 - lam) * prices.at(i) * d.sells[i];
                phi[i] = base_phi + d.buys[i] - d.sells[i];
                var[i] = base_var + d.buys[i] + d.sells[i];
                const double s = prices.at(i);
                w[i] = cash[i] + std::min(phi[i] * (1.0 - lam) * s, phi[i] * (1.0 + lam) * s);
                worst = std::min(worst, w[i]);
            }
        }
        rep.thetas.push_back(prices.theta());
        rep.values.push_back(std::move(w));
        rep.running_min.push_back(worst);
    }
    for (int k = 0; k < tree.num_leaves(); ++k) rep.variation[k] = var[tree.leaves()[k]];
    return rep;
}

struct AdmissibilityEntry {
    std::string theta;
    bool admissible = true;
    std::optional<std::string> witness;  // a node where the floor is breached
};

struct AdmissibilityReport {
    bool robust = true;
    std::vector<AdmissibilityEntry> per_model;
};

// x-admissibility: the zero-capital liquidation value stays >= -x at every
// node, for every model; robust means admissible under all of them.
inline AdmissibilityReport check_admissible(const ModelFamily& family, const Strategy& strategy,
                                            double x, double tol = 1e-12) {
    const auto rep = wealth_report(family, strategy, 0.0);
    const auto& tree = family.tree();
    AdmissibilityReport out;
    for (int m = 0; m < family.num_models(); ++m) {
        AdmissibilityEntry e;
        e.theta = rep.thetas[m];
        for (int i = 0; i < tree.size(); ++i) {
            if (rep.values[m][i] < -x - tol) {
                e.admissible = false;
                e.witness = tree.id(i);
                break;
            }
        }
        out.robust = out.robust && e.admissible;
        out.per_model.push_back(std::move(e));
    }
    return out;
}

// Cancels simultaneous buy and sell volume at each node. Positions are
// unchanged and liquidation values never decrease.
inline Strategy remove_redundancy(const Strategy& strategy) {
    strategy.validate();
    Strategy out;
    out.h0 = strategy.h0;
    for (const auto& [id, b] : strategy.buys) {
        const auto it = strategy.sells.find(id);
        const double s = it == strategy.sells.end() ? 0.0 : it->second;
        const double cancel = std::min(b, s);
        if (b - cancel > 0.0) out.buys[id] = b - cancel;
    }
    for (const auto& [id, s] : strategy.sells) {
        const auto it = strategy.buys.find(id);
        const double b = it == strategy.buys.end() ? 0.0 : it->second;
        const double cancel = std::min(b, s);
        if (s - cancel > 0.0) out.sells[id] = s - cancel;
    }
    return out;
}

inline double total_variation(const ScenarioTree& tree, const Strategy& strategy,
                              const std::string& leaf_id) {
    const int node = tree.index(leaf_id);
    const auto d = detail::densify(tree, strategy);
    double tv = std::abs(d.h0);
    tree.for_each_ancestor(node, [&](int u) { tv += d.buys[u] + d.sells[u]; });
    return tv;
}

} // namespace hedge
