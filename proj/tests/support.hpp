#pragma once

// Test-only generators and independent oracles. Everything here recomputes
// expected values through code paths separate from the library's solvers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hedge/dual.hpp"
#include "hedge/primal.hpp"
#include "hedge/tree.hpp"
#include "hedge/wealth.hpp"

namespace testsupport {

using namespace hedge;

// Thin deterministic wrapper; avoids std::uniform_real_distribution whose
// streams differ across standard libraries.
struct Rng {
    std::mt19937_64 gen;
    explicit Rng(std::uint64_t seed) : gen(seed) {}
    double uniform(double a, double b) {
        return a + (b - a) * static_cast<double>(gen() >> 11) / 9007199254740992.0;
    }
    int uniform_int(int a, int b) {
        return a + static_cast<int>(gen() % static_cast<std::uint64_t>(b - a + 1));
    }
    bool chance(double p) { return uniform(0.0, 1.0) < p; }
};

// ---------------------------------------------------------------------------
// Families.

inline ScenarioTree random_tree(Rng& rng, int max_depth = 4, int max_branch = 3) {
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

// Independent prices per node: plenty of embedded arbitrage.
inline PriceField wild_prices(Rng& rng, const ScenarioTree& tree, const std::string& theta) {
    std::vector<double> v(tree.size());
    for (int i = 0; i < tree.size(); ++i) v[i] = rng.uniform(50.0, 200.0);
    return PriceField(tree, theta, std::move(v));
}

// Multiplicative steps straddling 1: mostly arbitrage-free.
inline PriceField nice_prices(Rng& rng, const ScenarioTree& tree, const std::string& theta) {
    std::vector<double> v(tree.size(), 0.0);
    v[tree.root()] = rng.uniform(80.0, 120.0);
    for (int t = 0; t < tree.horizon(); ++t)
        for (int i = 0; i < tree.size(); ++i) {
            if (tree.time(i) != t || tree.is_leaf(i)) continue;
            const auto& ch = tree.children(i);
            std::vector<double> f(ch.size());
            for (std::size_t j = 0; j < ch.size(); ++j) f[j] = rng.uniform(0.75, 1.35);
            if (ch.size() == 1) {
                f[0] = 1.0;
            } else {
                // first and last child pin the straddle around 1 so a
                // risk-neutral measure exists at every node
                f[0] = rng.uniform(0.8, 0.98);
                f[ch.size() - 1] = rng.uniform(1.02, 1.3);
            }
            for (std::size_t j = 0; j < ch.size(); ++j) v[ch[j]] = v[i] * f[j];
        }
    return PriceField(tree, theta, std::move(v));
}

inline ModelFamily random_family(Rng& rng, double lambda, bool wild, int max_models = 3,
                                 int max_depth = 4, int max_branch = 3) {
    ScenarioTree tree = random_tree(rng, max_depth, max_branch);
    const int nmodels = rng.uniform_int(1, max_models);
    std::vector<PriceField> fields;
    for (int m = 0; m < nmodels; ++m) {
        const std::string theta = "theta" + std::to_string(m);
        fields.push_back(wild ? wild_prices(rng, tree, theta) : nice_prices(rng, tree, theta));
    }
    return ModelFamily(std::move(tree), std::move(fields), lambda);
}

inline ClaimFamily random_claims(Rng& rng, const ModelFamily& family, double lo = -50.0,
                                 double hi = 100.0) {
    std::vector<std::vector<double>> values(family.num_models());
    for (int m = 0; m < family.num_models(); ++m) {
        values[m].resize(family.tree().num_leaves());
        for (double& g : values[m]) g = rng.uniform(lo, hi);
    }
    return ClaimFamily(family, std::move(values));
}

inline ModelFamily one_step_family(double s_up, double s_down, double lambda, double p_up = 0.5,
                                   const std::string& theta = "theta1") {
    ScenarioTree tree(1, {{"r", std::nullopt, 0, 1.0},
                          {"ru", std::string("r"), 1, p_up},
                          {"rd", std::string("r"), 1, 1.0 - p_up}});
    PriceField field =
        PriceField::from_map(tree, theta, {{"r", 100.0}, {"ru", s_up}, {"rd", s_down}});
    return ModelFamily(std::move(tree), {std::move(field)}, lambda);
}

// One-step 120/80 tree with a call at 100.
inline ModelFamily e2_family(double lambda = 0.05) { return one_step_family(120.0, 80.0, lambda); }

inline ClaimFamily e2_claims(const ModelFamily& family) {
    return ClaimFamily::from_maps(family, {{"theta1", {{"ru", 20.0}, {"rd", 0.0}}}});
}

// Two models on one tree, frictionless, calls at 100.
inline ModelFamily e3_family() {
    ScenarioTree tree(1, {{"r", std::nullopt, 0, 1.0},
                          {"ru", std::string("r"), 1, 0.5},
                          {"rd", std::string("r"), 1, 0.5}});
    PriceField f1 = PriceField::from_map(tree, "theta1", {{"r", 100.0}, {"ru", 120.0}, {"rd", 80.0}});
    PriceField f2 = PriceField::from_map(tree, "theta2", {{"r", 100.0}, {"ru", 130.0}, {"rd", 90.0}});
    return ModelFamily(std::move(tree), {std::move(f1), std::move(f2)}, 0.0);
}

inline ClaimFamily e3_claims(const ModelFamily& family) {
    return ClaimFamily::from_maps(family, {{"theta1", {{"ru", 20.0}, {"rd", 0.0}}},
                                           {"theta2", {{"ru", 30.0}, {"rd", 0.0}}}});
}

// ---------------------------------------------------------------------------
// Oracles.

// Risk-neutral backward induction on a binary up/down tree (children emitted
// up-first by the builders). Independent of the LP path.
inline double backward_induction_price(const ScenarioTree& tree, double up, double down,
                                       const std::vector<double>& leaf_claims) {
    const double q = (1.0 - down) / (up - down);
    std::vector<double> v(tree.size(), 0.0);
    for (int k = 0; k < tree.num_leaves(); ++k) v[tree.leaves()[k]] = leaf_claims[k];
    for (int t = tree.horizon() - 1; t >= 0; --t)
        for (int i = 0; i < tree.size(); ++i) {
            if (tree.time(i) != t || tree.is_leaf(i)) continue;
            v[i] = q * v[tree.children(i)[0]] + (1.0 - q) * v[tree.children(i)[1]];
        }
    return v[tree.root()];
}

// Kernel price oracle: walks parents to collect the path signs, then sums the
// double sum directly (no reliance on the builder's id encoding).
inline double kernel_price_oracle(const ScenarioTree& tree, int node,
                                  const std::vector<double>& mu,
                                  const std::function<double(int, int)>& kernel, double increment,
                                  bool exponential) {
    std::vector<int> path;  // child index at each step, root first
    for (int u = node; tree.parent(u) >= 0; u = tree.parent(u)) {
        const auto& siblings = tree.children(tree.parent(u));
        path.push_back(u == siblings[0] ? +1 : -1);
    }
    std::reverse(path.begin(), path.end());
    const int t = static_cast<int>(path.size());
    const double dt = 1.0 / tree.horizon();
    double x = 0.0;
    for (int s = 1; s <= t; ++s) x += mu[s - 1] * dt + kernel(t, s) * path[s - 1] * increment;
    return exponential ? std::exp(x) : 1.0 + x;
}

// ---------------------------------------------------------------------------
// Random strategies, corridors and consistent price systems.

inline Strategy random_strategy(Rng& rng, const ScenarioTree& tree) {
    Strategy s;
    s.h0 = rng.uniform(-2.0, 2.0);
    for (int i = 0; i < tree.size(); ++i) {
        if (rng.chance(0.4)) s.buys[tree.id(i)] = rng.uniform(0.0, 3.0);
        if (rng.chance(0.4)) s.sells[tree.id(i)] = rng.uniform(0.0, 3.0);
    }
    return s;
}

struct CorridorMaps {
    std::map<std::string, double> lower, upper;
};

// Corridor mids follow a multiplicative walk so both verdicts show up often.
inline CorridorMaps random_corridor(Rng& rng, const ScenarioTree& tree) {
    CorridorMaps c;
    std::vector<double> mid(tree.size(), 0.0);
    for (int t = 0; t <= tree.horizon(); ++t)
        for (int i = 0; i < tree.size(); ++i) {
            if (tree.time(i) != t) continue;
            mid[i] = tree.parent(i) < 0 ? rng.uniform(80.0, 120.0)
                                        : mid[tree.parent(i)] * rng.uniform(0.9, 1.12);
            const double w = rng.uniform(0.0, 25.0);
            c.lower[tree.id(i)] = mid[i] - 0.5 * w;
            c.upper[tree.id(i)] = mid[i] + 0.5 * w;
        }
    return c;
}

// Scales a single-model system to unit mass E[Z_T] = 1.
inline SingleModelCps normalize_part(const ScenarioTree& tree, const SingleModelCps& part) {
    double mass = 0.0;
    for (const auto& [leaf, z] : part.z_terminal) mass += tree.prob(tree.index(leaf)) * z;
    SingleModelCps out;
    for (const auto& [leaf, z] : part.z_terminal) out.z_terminal[leaf] = z / mass;
    for (const auto& [node, m] : part.m) out.m[node] = m / mass;
    return out;
}

// Pastes normalized per-model systems with random convex weights over the
// models that admit one; nullopt when no model does.
inline std::optional<ConsistentPriceSystem> random_valid_cps(Rng& rng, const ModelFamily& family) {
    std::map<std::string, SingleModelCps> parts;
    for (int m = 0; m < family.num_models(); ++m) {
        const std::string theta = family.field(m).theta();
        auto fit = fit_positive_cps(family.restricted_to({theta}), theta);
        if (fit.cps) parts[theta] = normalize_part(family.tree(), *fit.cps);
    }
    if (parts.empty()) return std::nullopt;
    std::map<std::string, double> weights;
    double sum = 0.0;
    for (const auto& [theta, part] : parts) {
        const double w = rng.uniform(0.05, 1.0);
        weights[theta] = w;
        sum += w;
    }
    for (auto& [theta, w] : weights) w /= sum;
    return paste_cps(family, parts, weights);
}

} // namespace testsupport
