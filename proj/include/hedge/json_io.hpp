#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hedge/dual.hpp"
#include "hedge/tree.hpp"
#include "hedge/wealth.hpp"

namespace hedge::io {

using json = nlohmann::json;

namespace detail {

inline const json& require(const json& j, const char* key, const std::string& where) {
    const auto it = j.find(key);
    if (it == j.end()) throw SchemaError(where + ": missing key '" + key + "'");
    return *it;
}

inline double number_at(const json& j, const std::string& where) {
    if (!j.is_number()) throw SchemaError(where + ": expected a number");
    return j.get<double>();
}

inline std::string string_at(const json& j, const std::string& where) {
    if (!j.is_string()) throw SchemaError(where + ": expected a string");
    return j.get<std::string>();
}

inline std::map<std::string, double> number_map(const json& j, const std::string& where) {
    if (!j.is_object()) throw SchemaError(where + ": expected an object");
    std::map<std::string, double> out;
    for (const auto& [key, value] : j.items()) out[key] = number_at(value, where + "." + key);
    return out;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Family document: tree + price fields + lambda (+ optional claims).

struct FamilyDocument {
    ModelFamily family;
    std::optional<ClaimFamily> claims;
};

inline FamilyDocument parse_family(const json& doc) {
    using detail::number_at;
    using detail::require;
    using detail::string_at;
    if (!doc.is_object()) throw SchemaError("$: family document must be an object");

    const json& jh = require(doc, "horizon", "$");
    if (!jh.is_number_integer()) throw SchemaError("$.horizon: expected an integer");
    const int horizon = jh.get<int>();
    const double lambda = number_at(require(doc, "lambda", "$"), "$.lambda");

    const json& jnodes = require(doc, "nodes", "$");
    if (!jnodes.is_array()) throw SchemaError("$.nodes: expected an array");
    std::vector<ScenarioTree::NodeSpec> specs;
    for (std::size_t i = 0; i < jnodes.size(); ++i) {
        const std::string where = "$.nodes[" + std::to_string(i) + "]";
        const json& jn = jnodes[i];
        if (!jn.is_object()) throw SchemaError(where + ": expected an object");
        ScenarioTree::NodeSpec spec;
        spec.id = string_at(require(jn, "id", where), where + ".id");
        const json& jp = require(jn, "parent", where);
        if (jp.is_null()) spec.parent = std::nullopt;
        else spec.parent = string_at(jp, where + ".parent");
        const json& jt = require(jn, "t", where);
        if (!jt.is_number_integer()) throw SchemaError(where + ".t: expected an integer");
        spec.t = jt.get<int>();
        spec.p = number_at(require(jn, "p", where), where + ".p");
        specs.push_back(std::move(spec));
    }
    ScenarioTree tree(horizon, std::move(specs));

    const json& jmodels = require(doc, "models", "$");
    if (!jmodels.is_array() || jmodels.empty())
        throw SchemaError("$.models: expected a non-empty array");
    std::vector<PriceField> fields;
    for (std::size_t i = 0; i < jmodels.size(); ++i) {
        const std::string where = "$.models[" + std::to_string(i) + "]";
        const json& jm = jmodels[i];
        const std::string theta = string_at(require(jm, "theta", where), where + ".theta");
        const auto prices = detail::number_map(require(jm, "prices", where), where + ".prices");
        fields.push_back(PriceField::from_map(tree, theta, prices));
    }
    ModelFamily family(std::move(tree), std::move(fields), lambda);

    FamilyDocument out{std::move(family), std::nullopt};
    if (const auto it = doc.find("claims"); it != doc.end() && !it->is_null()) {
        if (!it->is_object()) throw SchemaError("$.claims: expected an object");
        std::map<std::string, std::map<std::string, double>> maps;
        for (const auto& [theta, leaf_map] : it->items())
            maps[theta] = detail::number_map(leaf_map, "$.claims." + theta);
        out.claims = ClaimFamily::from_maps(out.family, maps);
    }
    return out;
}

inline FamilyDocument load_family(const std::string& bytes) {
    json doc;
    try {
        doc = json::parse(bytes);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("invalid JSON: ") + e.what());
    }
    return parse_family(doc);
}

inline json family_to_json(const FamilyDocument& doc) {
    const auto& tree = doc.family.tree();
    json out;
    out["horizon"] = tree.horizon();
    out["lambda"] = doc.family.lambda();
    json nodes = json::array();
    for (int i = 0; i < tree.size(); ++i) {
        json n;
        n["id"] = tree.id(i);
        n["parent"] = tree.parent(i) < 0 ? json() : json(tree.id(tree.parent(i)));
        n["t"] = tree.time(i);
        n["p"] = tree.branch_prob(i);
        nodes.push_back(std::move(n));
    }
    out["nodes"] = std::move(nodes);
    json models = json::array();
    for (int m = 0; m < doc.family.num_models(); ++m) {
        json jm;
        jm["theta"] = doc.family.field(m).theta();
        json prices;
        for (int i = 0; i < tree.size(); ++i) prices[tree.id(i)] = doc.family.field(m).at(i);
        jm["prices"] = std::move(prices);
        models.push_back(std::move(jm));
    }
    out["models"] = std::move(models);
    if (doc.claims) {
        json claims;
        for (int m = 0; m < doc.family.num_models(); ++m) {
            json leafs;
            for (int k = 0; k < tree.num_leaves(); ++k)
                leafs[tree.id(tree.leaves()[k])] = doc.claims->at(m, k);
            claims[doc.family.field(m).theta()] = std::move(leafs);
        }
        out["claims"] = std::move(claims);
    }
    return out;
}

inline std::string save_family(const FamilyDocument& doc) { return family_to_json(doc).dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Strategy: {"h0": real, "buys": {node: real}, "sells": {node: real}};
// omitted nodes trade nothing.

inline Strategy parse_strategy(const json& j) {
    if (!j.is_object()) throw SchemaError("$: strategy must be an object");
    Strategy s;
    s.h0 = detail::number_at(detail::require(j, "h0", "$"), "$.h0");
    if (const auto it = j.find("buys"); it != j.end() && !it->is_null())
        s.buys = detail::number_map(*it, "$.buys");
    if (const auto it = j.find("sells"); it != j.end() && !it->is_null())
        s.sells = detail::number_map(*it, "$.sells");
    s.validate();
    return s;
}

inline json strategy_to_json(const Strategy& s) {
    json out;
    out["h0"] = s.h0;
    out["buys"] = json::object();
    out["sells"] = json::object();
    for (const auto& [id, v] : s.buys) out["buys"][id] = v;
    for (const auto& [id, v] : s.sells) out["sells"][id] = v;
    return out;
}

// ---------------------------------------------------------------------------
// Consistent price system:
// {"z": {theta: {leaf: real}}, "m": {node: real},
//  "witness": {"theta": str, "leaves": [str]}}

inline ConsistentPriceSystem parse_cps(const json& j) {
    if (!j.is_object()) throw SchemaError("$: cps must be an object");
    ConsistentPriceSystem cps;
    const json& jz = detail::require(j, "z", "$");
    if (!jz.is_object()) throw SchemaError("$.z: expected an object");
    for (const auto& [theta, leaf_map] : jz.items())
        cps.z_terminal[theta] = detail::number_map(leaf_map, "$.z." + theta);
    cps.m = detail::number_map(detail::require(j, "m", "$"), "$.m");
    const json& jw = detail::require(j, "witness", "$");
    cps.witness.theta = detail::string_at(detail::require(jw, "theta", "$.witness"), "$.witness.theta");
    const json& jl = detail::require(jw, "leaves", "$.witness");
    if (!jl.is_array()) throw SchemaError("$.witness.leaves: expected an array");
    for (const auto& l : jl) cps.witness.leaves.push_back(detail::string_at(l, "$.witness.leaves[]"));
    return cps;
}

inline json cps_to_json(const ConsistentPriceSystem& cps) {
    json out;
    out["z"] = json::object();
    for (const auto& [theta, leaf_map] : cps.z_terminal) {
        json jm;
        for (const auto& [leaf, v] : leaf_map) jm[leaf] = v;
        out["z"][theta] = std::move(jm);
    }
    out["m"] = json::object();
    for (const auto& [id, v] : cps.m) out["m"][id] = v;
    out["witness"]["theta"] = cps.witness.theta;
    out["witness"]["leaves"] = cps.witness.leaves;
    return out;
}

} // namespace hedge::io
