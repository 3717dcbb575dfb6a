#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hedge/errors.hpp"

namespace hedge {

// Finite event tree carrying the filtration: one root at time 0, every leaf at
// the horizon, child branch probabilities summing to one under each parent.
class ScenarioTree {
public:
    struct NodeSpec {
        std::string id;
        std::optional<std::string> parent;
        int t = 0;
        double p = 1.0;
    };

    ScenarioTree(int horizon, std::vector<NodeSpec> specs) : horizon_(horizon) {
        if (horizon_ < 1) throw InvariantViolation("horizon must be >= 1");
        if (specs.empty()) throw InvariantViolation("tree has no nodes");
        const int n = static_cast<int>(specs.size());
        ids_.reserve(n);
        for (int i = 0; i < n; ++i) {
            if (specs[i].id.empty()) throw InvariantViolation("empty node id");
            if (!index_.emplace(specs[i].id, i).second)
                throw InvariantViolation("duplicate node id '" + specs[i].id + "'");
            ids_.push_back(specs[i].id);
        }
        parent_.assign(n, -1);
        time_.assign(n, 0);
        branch_prob_.assign(n, 1.0);
        children_.assign(n, {});
        for (int i = 0; i < n; ++i) {
            const auto& s = specs[i];
            time_[i] = s.t;
            branch_prob_[i] = s.p;
            if (s.t < 0 || s.t > horizon_)
                throw InvariantViolation("node '" + s.id + "': time index " + std::to_string(s.t) +
                                         " outside 0.." + std::to_string(horizon_));
            if (!(s.p > 0.0 && s.p <= 1.0) || std::isnan(s.p))
                throw InvariantViolation("node '" + s.id + "': branch probability must be in (0,1]");
            if (s.parent) {
                const auto it = index_.find(*s.parent);
                if (it == index_.end())
                    throw InvariantViolation("node '" + s.id + "': unknown parent '" + *s.parent + "'");
                parent_[i] = it->second;
            } else {
                if (root_ >= 0)
                    throw InvariantViolation("multiple roots: '" + ids_[root_] + "' and '" + s.id + "'");
                root_ = i;
            }
        }
        if (root_ < 0) throw InvariantViolation("no root node");
        if (time_[root_] != 0) throw InvariantViolation("root must have time index 0");
        if (std::abs(branch_prob_[root_] - 1.0) > 1e-12)
            throw InvariantViolation("root branch probability must be 1");
        for (int i = 0; i < n; ++i) {
            if (parent_[i] < 0) continue;
            if (time_[i] != time_[parent_[i]] + 1)
                throw InvariantViolation("node '" + ids_[i] + "': time index must be parent's + 1");
            children_[parent_[i]].push_back(i);
        }
        for (int i = 0; i < n; ++i) {
            if (!children_[i].empty()) {
                double sum = 0.0;
                for (int c : children_[i]) sum += branch_prob_[c];
                if (std::abs(sum - 1.0) > 1e-12)
                    throw InvariantViolation("children of '" + ids_[i] + "' have probabilities summing to " +
                                             std::to_string(sum));
            } else if (time_[i] != horizon_) {
                throw InvariantViolation("leaf '" + ids_[i] + "' at time " + std::to_string(time_[i]) +
                                         " before the horizon");
            }
        }
        prob_.assign(n, 0.0);
        // DFS from the root fixes the leaf ordering and the subtree leaf ranges.
        leaf_begin_.assign(n, 0);
        leaf_end_.assign(n, 0);
        std::vector<std::pair<int, int>> stack{{root_, 0}};
        std::vector<int> order;
        order.reserve(n);
        prob_[root_] = 1.0;
        while (!stack.empty()) {
            auto& [node, next] = stack.back();
            if (next == 0) {
                order.push_back(node);
                leaf_begin_[node] = static_cast<int>(leaves_.size());
                if (children_[node].empty()) leaves_.push_back(node);
            }
            if (next < static_cast<int>(children_[node].size())) {
                const int c = children_[node][next++];
                prob_[c] = prob_[node] * branch_prob_[c];
                stack.push_back({c, 0});
            } else {
                leaf_end_[node] = static_cast<int>(leaves_.size());
                stack.pop_back();
            }
        }
        if (static_cast<int>(order.size()) != n)
            throw InvariantViolation("disconnected nodes present");
        double mass = 0.0;
        for (int l : leaves_) mass += prob_[l];
        if (std::abs(mass - 1.0) > 1e-9)
            throw InvariantViolation("leaf probabilities sum to " + std::to_string(mass));
        leaf_ordinal_.assign(n, -1);
        for (int k = 0; k < static_cast<int>(leaves_.size()); ++k) leaf_ordinal_[leaves_[k]] = k;
    }

    int size() const { return static_cast<int>(ids_.size()); }
    int horizon() const { return horizon_; }
    int root() const { return root_; }
    int num_leaves() const { return static_cast<int>(leaves_.size()); }
    const std::vector<int>& leaves() const { return leaves_; }
    const std::vector<int>& children(int i) const { return children_[i]; }
    int parent(int i) const { return parent_[i]; }
    int time(int i) const { return time_[i]; }
    double branch_prob(int i) const { return branch_prob_[i]; }
    double prob(int i) const { return prob_[i]; }
    bool is_leaf(int i) const { return children_[i].empty(); }
    const std::string& id(int i) const { return ids_[i]; }
    int leaf_ordinal(int i) const { return leaf_ordinal_[i]; }

    int index(const std::string& id) const {
        const auto it = index_.find(id);
        if (it == index_.end()) throw UnknownNode("unknown node '" + id + "'");
        return it->second;
    }

    // Leaf ordinals [begin, end) lying under node i.
    std::pair<int, int> leaf_range(int i) const { return {leaf_begin_[i], leaf_end_[i]}; }

    template <class F>
    void for_each_ancestor(int node, F&& f) const {  // node itself up to and including the root
        for (int u = node; u >= 0; u = parent_[u]) f(u);
    }

    // E[X | F] at every node for a leaf labeling X (indexed by leaf ordinal).
    std::vector<double> expect_at_nodes(std::span<const double> leaf_values) const {
        std::vector<double> v(size(), 0.0);
        for (int k = 0; k < num_leaves(); ++k) v[leaves_[k]] = leaf_values[k];
        // children precede parents nowhere in general; walk times backward
        for (int t = horizon_ - 1; t >= 0; --t)
            for (int i = 0; i < size(); ++i)
                if (time_[i] == t && !children_[i].empty()) {
                    double acc = 0.0;
                    for (int c : children_[i]) acc += branch_prob_[c] * v[c];
                    v[i] = acc;
                }
        return v;
    }

private:
    int horizon_;
    int root_ = -1;
    std::vector<std::string> ids_;
    std::unordered_map<std::string, int> index_;
    std::vector<int> parent_, time_;
    std::vector<double> branch_prob_, prob_;
    std::vector<std::vector<int>> children_;
    std::vector<int> leaves_, leaf_ordinal_, leaf_begin_, leaf_end_;
};

// Positive price labeling of a tree for one model parameter.
class PriceField {
public:
    PriceField(const ScenarioTree& tree, std::string theta, std::vector<double> prices)
        : theta_(std::move(theta)), prices_(std::move(prices)) {
        if (static_cast<int>(prices_.size()) != tree.size())
            throw InvariantViolation("model '" + theta_ + "': price count does not match tree");
        for (int i = 0; i < tree.size(); ++i)
            if (!(prices_[i] > 0.0) || !std::isfinite(prices_[i]))
                throw InvariantViolation("model '" + theta_ + "': price at node '" + tree.id(i) +
                                         "' must be strictly positive and finite");
    }

    static PriceField from_map(const ScenarioTree& tree, const std::string& theta,
                               const std::map<std::string, double>& prices) {
        std::vector<double> v(tree.size());
        std::vector<bool> seen(tree.size(), false);
        for (const auto& [id, price] : prices) {
            const int i = tree.index(id);
            v[i] = price;
            seen[i] = true;
        }
        for (int i = 0; i < tree.size(); ++i)
            if (!seen[i])
                throw InvariantViolation("model '" + theta + "': missing price at node '" + tree.id(i) + "'");
        return PriceField(tree, theta, std::move(v));
    }

    const std::string& theta() const { return theta_; }
    double at(int node) const { return prices_[node]; }
    const std::vector<double>& values() const { return prices_; }

private:
    std::string theta_;
    std::vector<double> prices_;
};

// One shared tree, one price field per model, one proportional cost lambda.
// lambda = 0 is admitted for frictionless oracle runs and flagged in reports.
class ModelFamily {
public:
    ModelFamily(ScenarioTree tree, std::vector<PriceField> fields, double lambda)
        : tree_(std::move(tree)), fields_(std::move(fields)), lambda_(lambda) {
        if (!(lambda_ >= 0.0 && lambda_ < 1.0))
            throw InvariantViolation("lambda must lie in [0, 1), got " + std::to_string(lambda_));
        if (fields_.empty()) throw InvariantViolation("family has no models");
        for (std::size_t i = 0; i < fields_.size(); ++i) {
            if (static_cast<int>(fields_[i].values().size()) != tree_.size())
                throw InvariantViolation("model '" + fields_[i].theta() + "' labels a different tree");
            if (!theta_index_.emplace(fields_[i].theta(), static_cast<int>(i)).second)
                throw InvariantViolation("duplicate model id '" + fields_[i].theta() + "'");
        }
    }

    const ScenarioTree& tree() const { return tree_; }
    double lambda() const { return lambda_; }
    bool frictionless() const { return lambda_ == 0.0; }
    int num_models() const { return static_cast<int>(fields_.size()); }
    const PriceField& field(int i) const { return fields_[i]; }
    const std::vector<PriceField>& fields() const { return fields_; }

    int theta_index(const std::string& theta) const {
        const auto it = theta_index_.find(theta);
        if (it == theta_index_.end()) throw UnknownModel("unknown model '" + theta + "'");
        return it->second;
    }

    ModelFamily restricted_to(const std::vector<std::string>& thetas) const {
        std::vector<PriceField> sub;
        for (const auto& th : thetas) sub.push_back(fields_[theta_index(th)]);
        return ModelFamily(tree_, std::move(sub), lambda_);
    }

    ModelFamily with_lambda(double lambda) const { return ModelFamily(tree_, fields_, lambda); }

private:
    ScenarioTree tree_;
    std::vector<PriceField> fields_;
    double lambda_;
    std::map<std::string, int> theta_index_;
};

// Claim G^theta per model and leaf; values indexed by the tree's leaf ordinals.
class ClaimFamily {
public:
    ClaimFamily(const ModelFamily& family, std::vector<std::vector<double>> values)
        : values_(std::move(values)) {
        if (static_cast<int>(values_.size()) != family.num_models())
            throw CoverageError("claim family must cover every model");
        for (int m = 0; m < family.num_models(); ++m) {
            if (static_cast<int>(values_[m].size()) != family.tree().num_leaves())
                throw CoverageError("claims for model '" + family.field(m).theta() +
                                    "' must cover every leaf");
            for (double v : values_[m]) {
                if (!std::isfinite(v))
                    throw CoverageError("claims for model '" + family.field(m).theta() +
                                        "' contain a non-finite value");
                if (v < 0.0) nonnegative_ = false;
            }
        }
    }

    static ClaimFamily from_maps(const ModelFamily& family,
                                 const std::map<std::string, std::map<std::string, double>>& maps) {
        const auto& tree = family.tree();
        std::vector<std::vector<double>> values(family.num_models());
        std::vector<bool> covered(family.num_models(), false);
        for (const auto& [theta, leaf_map] : maps) {
            const int m = family.theta_index(theta);  // throws UnknownModel on extras
            covered[m] = true;
            std::vector<double> v(tree.num_leaves());
            std::vector<bool> seen(tree.num_leaves(), false);
            for (const auto& [leaf_id, value] : leaf_map) {
                const int node = tree.index(leaf_id);
                if (!tree.is_leaf(node))
                    throw CoverageError("claim for model '" + theta + "' names non-leaf node '" + leaf_id + "'");
                v[tree.leaf_ordinal(node)] = value;
                seen[tree.leaf_ordinal(node)] = true;
            }
            for (int k = 0; k < tree.num_leaves(); ++k)
                if (!seen[k])
                    throw CoverageError("claim for model '" + theta + "' missing leaf '" +
                                        tree.id(tree.leaves()[k]) + "'");
            values[m] = std::move(v);
        }
        for (int m = 0; m < family.num_models(); ++m)
            if (!covered[m])
                throw CoverageError("no claim given for model '" + family.field(m).theta() + "'");
        return ClaimFamily(family, std::move(values));
    }

    double at(int model, int leaf_ordinal) const { return values_[model][leaf_ordinal]; }
    const std::vector<double>& for_model(int model) const { return values_[model]; }
    int num_models() const { return static_cast<int>(values_.size()); }
    bool nonnegative() const { return nonnegative_; }

private:
    std::vector<std::vector<double>> values_;
    bool nonnegative_ = true;
};

// ---------------------------------------------------------------------------
// Generators.

namespace detail {

inline std::vector<ScenarioTree::NodeSpec> binary_specs(int levels, double p_up) {
    // children emitted up-first; ids encode the path, e.g. "rud"
    std::vector<ScenarioTree::NodeSpec> specs;
    specs.push_back({"r", std::nullopt, 0, 1.0});
    std::vector<std::string> frontier{"r"};
    for (int t = 1; t <= levels; ++t) {
        std::vector<std::string> next;
        for (const auto& par : frontier) {
            specs.push_back({par + "u", par, t, p_up});
            specs.push_back({par + "d", par, t, 1.0 - p_up});
            next.push_back(par + "u");
            next.push_back(par + "d");
        }
        frontier = std::move(next);
    }
    return specs;
}

} // namespace detail

// Binary path tree of the given depth (ids "r", "ru", "rd", ...).
inline ScenarioTree build_binary_tree(int levels, double p_up = 0.5) {
    if (levels < 1) throw ParamOutOfRange("levels must be >= 1");
    if (!(p_up > 0.0 && p_up < 1.0)) throw ParamOutOfRange("p_up must lie in (0,1)");
    return ScenarioTree(levels, detail::binary_specs(levels, p_up));
}

// Prices for a path tree built by build_binary_tree.
inline PriceField binomial_prices(const ScenarioTree& tree, double s0, double up, double down,
                                  const std::string& theta) {
    if (!(s0 > 0.0)) throw ParamOutOfRange("s0 must be positive");
    if (!(up > 1.0)) throw ParamOutOfRange("up factor must exceed 1");
    if (!(down > 0.0 && down < 1.0)) throw ParamOutOfRange("down factor must lie in (0,1)");
    std::vector<double> prices(tree.size());
    for (int i = 0; i < tree.size(); ++i) {
        const std::string& id = tree.id(i);
        int ups = 0, downs = 0;
        for (char c : id) {
            if (c == 'u') ++ups;
            if (c == 'd') ++downs;
        }
        prices[i] = s0 * std::pow(up, ups) * std::pow(down, downs);
    }
    return PriceField(tree, theta, std::move(prices));
}

enum class PriceTransform { exponential, shifted_identity };

// Kernel-driven prices S_t = F(sum mu ds + sum K(t,s) e_s h) on a binary +-1
// walk; the kernel re-weights all past steps at every t.
inline PriceField kernel_prices(const ScenarioTree& tree, const std::vector<double>& mu,
                                const std::function<double(int, int)>& kernel, double increment,
                                PriceTransform transform, const std::string& theta) {
    const int levels = tree.horizon();
    if (!(increment > 0.0)) throw ParamOutOfRange("increment must be positive");
    if (static_cast<int>(mu.size()) != levels)
        throw ParamOutOfRange("mu must have one entry per step");
    if (!kernel) throw ParamOutOfRange("kernel must be callable");
    const double dt = 1.0 / levels;
    std::vector<double> prices(tree.size());
    for (int i = 0; i < tree.size(); ++i) {
        const std::string& id = tree.id(i);
        const int t = tree.time(i);
        double x = 0.0;
        for (int s = 1; s <= t; ++s) {
            const double k = kernel(t, s);
            if (!std::isfinite(k)) throw ParamOutOfRange("kernel not finite at (t,s)");
            const double step = id[s] == 'u' ? 1.0 : -1.0;  // id = 'r' + path
            x += mu[s - 1] * dt + k * step * increment;
        }
        const double price = transform == PriceTransform::exponential ? std::exp(x) : 1.0 + x;
        if (!(price > 0.0))
            throw NonPositivePrice("transform yields non-positive price at node '" + id + "'");
        prices[i] = price;
    }
    return PriceField(tree, theta, std::move(prices));
}

inline std::pair<ScenarioTree, PriceField> build_binomial(int levels, double s0, double up,
                                                          double down, double p_up,
                                                          const std::string& theta = "model") {
    ScenarioTree tree = build_binary_tree(levels, p_up);
    PriceField field = binomial_prices(tree, s0, up, down, theta);
    return {std::move(tree), std::move(field)};
}

inline std::pair<ScenarioTree, PriceField> build_kernel_model(
    int levels, const std::vector<double>& mu, const std::function<double(int, int)>& kernel,
    double increment, PriceTransform transform, const std::string& theta = "model",
    double p_up = 0.5) {
    ScenarioTree tree = build_binary_tree(levels, p_up);
    PriceField field = kernel_prices(tree, mu, kernel, increment, transform, theta);
    return {std::move(tree), std::move(field)};
}

} // namespace hedge
