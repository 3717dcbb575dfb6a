#pragma once

// Configuration-driven end-to-end runs: load or generate a family, solve both
// sides, cross-verify the certificates, and emit report and certificate files.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hedge/json_io.hpp"
#include "hedge/primal.hpp"

namespace hedge::harness {

using io::json;

enum class RunMode { solve, generate, detect_arbitrage, check_cps, fit_sandwich };

struct GeneratorSpec {
    struct ModelSpec {
        std::string theta;
        std::string kind;  // "binomial" | "kernel"
        double s0 = 100.0, up = 1.2, down = 0.8;
        double hurst = 0.5;
        std::vector<double> mu;  // broadcast to one entry per step when size 1
        double increment = 0.1;
        PriceTransform transform = PriceTransform::exponential;
    };
    struct ClaimSpec {
        std::string kind;  // "call" | "put" | "zero"
        double strike = 100.0;
    };
    int levels = 1;
    double p_up = 0.5;
    double lambda = 0.05;
    std::vector<ModelSpec> models;
    std::optional<ClaimSpec> claim;
};

struct Corridor {
    std::map<std::string, double> lower, upper;
    std::optional<std::string> from_model;  // build [(1-l)S, (1+l)S] instead
};

struct RunConfig {
    std::optional<std::string> input;  // family JSON path
    std::optional<GeneratorSpec> generator;
    std::optional<double> lambda_override;
    std::string out_dir = ".";
    double tol_feas = lp::kTolFeas;
    double tol_gap = lp::kTolGap;
    bool exact = false;  // rational LP engine (HEDGE_EXACT=1)
    std::optional<std::string> cps_path;
    std::optional<Corridor> corridor;
    bool floor_rows = false;
    double floor_x = 0.0;
    std::string config_dir = ".";  // relative input paths resolve against the config file

    void validate(RunMode mode) const {
        if (input.has_value() == generator.has_value())
            throw SchemaError("config: exactly one of 'input' and 'generator' is required");
        if (mode == RunMode::generate && !generator)
            throw SchemaError("config: generate needs a 'generator' spec");
        if (mode == RunMode::check_cps && !cps_path)
            throw SchemaError("config: check-cps needs a 'cps' path");
        if (mode == RunMode::fit_sandwich && !corridor)
            throw SchemaError("config: fit-sandwich needs a 'corridor'");
        if (!(tol_feas > 0.0) || !(tol_gap > 0.0))
            throw SchemaError("config: tolerances must be positive");
    }
};

struct DualityReport {
    double primal = std::numeric_limits<double>::quiet_NaN();
    double dual = std::numeric_limits<double>::quiet_NaN();
    double gap = std::numeric_limits<double>::quiet_NaN();
    std::map<std::string, double> individual;  // -inf marks an unbounded (free-lunch) model
    std::map<std::string, std::string> arbitrage;
    double time_primal_s = 0.0, time_dual_s = 0.0, time_total_s = 0.0;
    double tol_feas = lp::kTolFeas, tol_gap = lp::kTolGap;
    bool frictionless = false;
    bool fail = false;
    std::vector<std::string> notes;
};

struct RunResult {
    int exit_code = 0;
    std::optional<DualityReport> report;
    json payload;  // mode-specific result document
};

// ---------------------------------------------------------------------------
// Config parsing.

namespace detail {

inline GeneratorSpec parse_generator(const json& j) {
    using io::detail::number_at;
    using io::detail::require;
    using io::detail::string_at;
    GeneratorSpec spec;
    const json& jl = require(j, "levels", "$.generator");
    if (!jl.is_number_integer()) throw SchemaError("$.generator.levels: expected an integer");
    spec.levels = jl.get<int>();
    if (const auto it = j.find("p_up"); it != j.end()) spec.p_up = number_at(*it, "$.generator.p_up");
    spec.lambda = number_at(require(j, "lambda", "$.generator"), "$.generator.lambda");
    const json& jm = require(j, "models", "$.generator");
    if (!jm.is_array() || jm.empty())
        throw SchemaError("$.generator.models: expected a non-empty array");
    for (std::size_t i = 0; i < jm.size(); ++i) {
        const std::string where = "$.generator.models[" + std::to_string(i) + "]";
        const json& m = jm[i];
        GeneratorSpec::ModelSpec ms;
        ms.theta = string_at(require(m, "theta", where), where + ".theta");
        ms.kind = string_at(require(m, "kind", where), where + ".kind");
        if (ms.kind == "binomial") {
            if (const auto it = m.find("s0"); it != m.end()) ms.s0 = number_at(*it, where + ".s0");
            if (const auto it = m.find("up"); it != m.end()) ms.up = number_at(*it, where + ".up");
            if (const auto it = m.find("down"); it != m.end()) ms.down = number_at(*it, where + ".down");
        } else if (ms.kind == "kernel") {
            if (const auto it = m.find("hurst"); it != m.end()) ms.hurst = number_at(*it, where + ".hurst");
            if (const auto it = m.find("increment"); it != m.end())
                ms.increment = number_at(*it, where + ".increment");
            if (const auto it = m.find("mu"); it != m.end()) {
                if (it->is_array())
                    for (const auto& v : *it) ms.mu.push_back(number_at(v, where + ".mu[]"));
                else
                    ms.mu.push_back(number_at(*it, where + ".mu"));
            }
            if (const auto it = m.find("transform"); it != m.end()) {
                const std::string t = string_at(*it, where + ".transform");
                if (t == "exp") ms.transform = PriceTransform::exponential;
                else if (t == "shifted-identity") ms.transform = PriceTransform::shifted_identity;
                else throw SchemaError(where + ".transform: expected 'exp' or 'shifted-identity'");
            }
        } else {
            throw SchemaError(where + ".kind: expected 'binomial' or 'kernel'");
        }
        spec.models.push_back(std::move(ms));
    }
    if (const auto it = j.find("claim"); it != j.end() && !it->is_null()) {
        GeneratorSpec::ClaimSpec cs;
        cs.kind = string_at(require(*it, "kind", "$.generator.claim"), "$.generator.claim.kind");
        if (cs.kind != "call" && cs.kind != "put" && cs.kind != "zero")
            throw SchemaError("$.generator.claim.kind: expected 'call', 'put' or 'zero'");
        if (const auto k = it->find("strike"); k != it->end())
            cs.strike = number_at(*k, "$.generator.claim.strike");
        spec.claim = cs;
    }
    return spec;
}

inline Corridor parse_corridor(const json& j) {
    Corridor c;
    if (const auto it = j.find("from_model"); it != j.end()) {
        c.from_model = io::detail::string_at(*it, "$.corridor.from_model");
        return c;
    }
    c.lower = io::detail::number_map(io::detail::require(j, "lower", "$.corridor"), "$.corridor.lower");
    c.upper = io::detail::number_map(io::detail::require(j, "upper", "$.corridor"), "$.corridor.upper");
    return c;
}

} // namespace detail

inline RunConfig parse_config(const std::string& bytes, const std::string& config_dir = ".") {
    json j;
    try {
        j = json::parse(bytes);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw SchemaError("config: expected an object");
    RunConfig cfg;
    cfg.config_dir = config_dir;
    if (const auto it = j.find("input"); it != j.end() && !it->is_null())
        cfg.input = io::detail::string_at(*it, "$.input");
    if (const auto it = j.find("generator"); it != j.end() && !it->is_null())
        cfg.generator = detail::parse_generator(*it);
    if (const auto it = j.find("lambda"); it != j.end() && !it->is_null())
        cfg.lambda_override = io::detail::number_at(*it, "$.lambda");
    if (const auto it = j.find("out"); it != j.end() && !it->is_null())
        cfg.out_dir = io::detail::string_at(*it, "$.out");
    if (const auto it = j.find("tolerances"); it != j.end() && !it->is_null()) {
        if (const auto f = it->find("tol_feas"); f != it->end())
            cfg.tol_feas = io::detail::number_at(*f, "$.tolerances.tol_feas");
        if (const auto g = it->find("tol_gap"); g != it->end())
            cfg.tol_gap = io::detail::number_at(*g, "$.tolerances.tol_gap");
    }
    if (const auto it = j.find("cps"); it != j.end() && !it->is_null())
        cfg.cps_path = io::detail::string_at(*it, "$.cps");
    if (const auto it = j.find("corridor"); it != j.end() && !it->is_null())
        cfg.corridor = detail::parse_corridor(*it);
    if (const auto it = j.find("floor_rows"); it != j.end() && it->is_boolean())
        cfg.floor_rows = it->get<bool>();
    if (const auto it = j.find("floor_x"); it != j.end() && it->is_number())
        cfg.floor_x = it->get<double>();
    return cfg;
}

// ---------------------------------------------------------------------------
// Generation.

inline io::FamilyDocument generate_family(const GeneratorSpec& spec) {
    ScenarioTree tree = build_binary_tree(spec.levels, spec.p_up);
    std::vector<PriceField> fields;
    for (const auto& ms : spec.models) {
        if (ms.kind == "binomial") {
            fields.push_back(binomial_prices(tree, ms.s0, ms.up, ms.down, ms.theta));
        } else {
            std::vector<double> mu = ms.mu;
            if (mu.empty()) mu.assign(spec.levels, 0.0);
            if (mu.size() == 1) mu.assign(spec.levels, mu[0]);
            const double h = ms.hurst;
            if (!(h > 0.0 && h < 1.0)) throw ParamOutOfRange("hurst must lie in (0,1)");
            auto kernel = [h](int t, int s) { return std::pow(double(t - s + 1), h - 0.5); };
            fields.push_back(kernel_prices(tree, mu, kernel, ms.increment, ms.transform, ms.theta));
        }
    }
    ModelFamily family(std::move(tree), std::move(fields), spec.lambda);
    io::FamilyDocument doc{std::move(family), std::nullopt};
    if (spec.claim) {
        const auto& t = doc.family.tree();
        std::vector<std::vector<double>> values(doc.family.num_models());
        for (int m = 0; m < doc.family.num_models(); ++m) {
            values[m].resize(t.num_leaves());
            for (int k = 0; k < t.num_leaves(); ++k) {
                const double s = doc.family.field(m).at(t.leaves()[k]);
                if (spec.claim->kind == "call") values[m][k] = std::max(s - spec.claim->strike, 0.0);
                else if (spec.claim->kind == "put") values[m][k] = std::max(spec.claim->strike - s, 0.0);
                else values[m][k] = 0.0;
            }
        }
        doc.claims = ClaimFamily(doc.family, std::move(values));
    }
    return doc;
}

// ---------------------------------------------------------------------------
// File plumbing.

namespace detail {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// write-then-rename so partial output never lands under the final name
inline void atomic_write(const std::filesystem::path& path, const std::string& bytes) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw SchemaError("cannot write '" + tmp.string() + "'");
        out << bytes;
    }
    std::filesystem::rename(tmp, path);
}

inline std::string resolve(const RunConfig& cfg, const std::string& path) {
    const std::filesystem::path p(path);
    if (p.is_absolute()) return path;
    return (std::filesystem::path(cfg.config_dir) / p).string();
}

inline io::FamilyDocument obtain_family(const RunConfig& cfg) {
    io::FamilyDocument doc = cfg.input ? io::load_family(read_file(resolve(cfg, *cfg.input)))
                                       : generate_family(*cfg.generator);
    if (cfg.lambda_override) {
        ModelFamily fam = doc.family.with_lambda(*cfg.lambda_override);
        doc.family = std::move(fam);
    }
    return doc;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Modes.

inline json report_to_json(const DualityReport& r) {
    json j;
    auto put = [](json& dst, const char* key, double v) {
        if (std::isnan(v)) dst[key] = nullptr;
        else dst[key] = v;
    };
    put(j, "primal", r.primal);
    put(j, "dual", r.dual);
    put(j, "gap", r.gap);
    j["individual"] = json::object();
    for (const auto& [theta, v] : r.individual)
        j["individual"][theta] = std::isfinite(v) ? json(v) : json();
    j["arbitrage"] = r.arbitrage;
    j["times"] = {{"primal_s", r.time_primal_s}, {"dual_s", r.time_dual_s}, {"total_s", r.time_total_s}};
    j["tolerances"] = {{"tol_feas", r.tol_feas}, {"tol_gap", r.tol_gap}};
    j["frictionless"] = r.frictionless;
    j["status"] = r.fail ? "FAIL" : "OK";
    j["notes"] = r.notes;
    return j;
}

inline RunResult run_solve(const RunConfig& cfg) {
    namespace fs = std::filesystem;
    const auto t0 = std::chrono::steady_clock::now();
    io::FamilyDocument doc = detail::obtain_family(cfg);
    if (!doc.claims) throw CoverageError("solve needs claims in the family document or generator");
    const ModelFamily& fam = doc.family;
    const ClaimFamily& claims = *doc.claims;

    DualityReport rep;
    rep.tol_feas = cfg.tol_feas;
    rep.tol_gap = cfg.tol_gap;
    rep.frictionless = fam.frictionless();
    if (rep.frictionless) rep.notes.push_back("lambda = 0: frictionless oracle mode");

    lp::SolveOptions opts;
    opts.exact = cfg.exact;
    PrimalOptions build;
    build.floor_rows = cfg.floor_rows;
    build.floor_x = cfg.floor_x;

    // Per-model verdicts and individual prices.
    for (int m = 0; m < fam.num_models(); ++m) {
        const std::string theta = fam.field(m).theta();
        const auto verdict = detect_free_lunch(fam, theta);
        rep.arbitrage[theta] = verdict.free_lunch ? "free_lunch" : "no_free_lunch";
        ModelFamily single = fam.restricted_to({theta});
        ClaimFamily single_claims(single, {claims.for_model(m)});
        try {
            rep.individual[theta] = solve_superhedge(single, single_claims, opts, build).price;
        } catch (const FreeLunch&) {
            rep.individual[theta] = -std::numeric_limits<double>::infinity();
        }
    }

    const auto t1 = std::chrono::steady_clock::now();
    PrimalCertificate primal = solve_superhedge(fam, claims, opts, build);
    const auto t2 = std::chrono::steady_clock::now();
    DualCertificate dual = solve_dual_cps(fam, claims, opts);
    const auto t3 = std::chrono::steady_clock::now();

    // Cross-verification, never trusting solver-reported numbers alone:
    // primal slacks were recomputed through wealth evaluation inside
    // solve_superhedge; the dual value is recomputed from the decoded CPS.
    const auto cps_check = validate_cps(fam, dual.cps, cfg.tol_feas);
    if (!cps_check.valid) {
        rep.fail = true;
        rep.notes.push_back("dual certificate failed validate_cps");
    }
    if (dual.normalization_residual > cfg.tol_feas) {
        rep.fail = true;
        rep.notes.push_back("dual certificate normalization residual above tol_feas");
    }
    double dual_value = 0.0;
    {
        const auto z = hedge::detail::cps_densities(fam, dual.cps);
        const auto& tree = fam.tree();
        for (int m = 0; m < fam.num_models(); ++m)
            for (int k = 0; k < tree.num_leaves(); ++k)
                dual_value += tree.prob(tree.leaves()[k]) * z[m][tree.leaves()[k]] * claims.at(m, k);
    }
    const auto adm = check_admissible(fam, primal.strategy, primal.floor, 1e-9);
    if (!adm.robust) {
        rep.fail = true;
        rep.notes.push_back("primal strategy not admissible at its recorded floor");
    }

    rep.primal = primal.price;
    rep.dual = dual_value;
    rep.gap = std::abs(rep.primal - rep.dual);
    if (rep.gap > cfg.tol_gap) {
        rep.fail = true;
        rep.notes.push_back("duality gap above tol_gap");
    }
    rep.time_primal_s = std::chrono::duration<double>(t2 - t1).count();
    rep.time_dual_s = std::chrono::duration<double>(t3 - t2).count();
    rep.time_total_s = std::chrono::duration<double>(t3 - t0).count();

    json primal_json;
    primal_json["price"] = primal.price;
    primal_json["strategy"] = io::strategy_to_json(primal.strategy);
    primal_json["slacks"] = json::object();
    for (const auto& [theta, leaf_map] : primal.slacks) {
        json jm;
        for (const auto& [leaf, v] : leaf_map) jm[leaf] = v;
        primal_json["slacks"][theta] = std::move(jm);
    }
    primal_json["floor"] = primal.floor;

    json dual_json;
    dual_json["value"] = dual_value;
    dual_json["cps"] = io::cps_to_json(dual.cps);
    dual_json["normalization_residual"] = dual.normalization_residual;

    const fs::path out(cfg.out_dir);
    detail::atomic_write(out / "report.json", report_to_json(rep).dump(2) + "\n");
    detail::atomic_write(out / "primal_cert.json", primal_json.dump(2) + "\n");
    detail::atomic_write(out / "dual_cert.json", dual_json.dump(2) + "\n");

    RunResult res;
    res.exit_code = rep.fail ? 1 : 0;
    res.payload = report_to_json(rep);
    res.report = std::move(rep);
    return res;
}

inline RunResult run_generate(const RunConfig& cfg) {
    const io::FamilyDocument doc = generate_family(*cfg.generator);
    const std::string bytes = io::save_family(doc);
    detail::atomic_write(std::filesystem::path(cfg.out_dir) / "family.json", bytes);
    RunResult res;
    res.payload = io::family_to_json(doc);
    return res;
}

inline RunResult run_detect_arbitrage(const RunConfig& cfg) {
    const io::FamilyDocument doc = detail::obtain_family(cfg);
    const ModelFamily& fam = doc.family;
    json verdicts = json::object(), certs = json::object();
    bool any = false;
    for (int m = 0; m < fam.num_models(); ++m) {
        const std::string theta = fam.field(m).theta();
        const auto v = detect_free_lunch(fam, theta);
        verdicts[theta] = v.free_lunch ? "free_lunch" : "no_free_lunch";
        if (v.free_lunch) {
            any = true;
            certs[theta] = {{"kind", "strategy"},
                            {"strategy", io::strategy_to_json(*v.strategy)},
                            {"expected_gain", v.gain}};
        } else {
            json zc = json::object(), mc = json::object();
            for (const auto& [leaf, z] : v.cps->z_terminal) zc[leaf] = z;
            for (const auto& [node, mm] : v.cps->m) mc[node] = mm;
            certs[theta] = {{"kind", "cps"}, {"z", std::move(zc)}, {"m", std::move(mc)}};
        }
    }
    json payload;
    payload["verdicts"] = std::move(verdicts);
    payload["certificates"] = std::move(certs);
    detail::atomic_write(std::filesystem::path(cfg.out_dir) / "arbitrage.json",
                         payload.dump(2) + "\n");
    RunResult res;
    res.exit_code = any ? 1 : 0;
    res.payload = std::move(payload);
    return res;
}

inline RunResult run_check_cps(const RunConfig& cfg) {
    const io::FamilyDocument doc = detail::obtain_family(cfg);
    json cps_doc;
    try {
        cps_doc = json::parse(detail::read_file(detail::resolve(cfg, *cfg.cps_path)));
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("cps: invalid JSON: ") + e.what());
    }
    const ConsistentPriceSystem cps = io::parse_cps(cps_doc);
    const auto rep = validate_cps(doc.family, cps, cfg.tol_feas);
    json payload;
    payload["valid"] = rep.valid;
    payload["mass"] = rep.mass;
    payload["violations"] = json::array();
    for (const auto& v : rep.violations)
        payload["violations"].push_back(
            {{"kind", v.kind}, {"theta", v.theta}, {"node", v.node}, {"amount", v.amount}});
    detail::atomic_write(std::filesystem::path(cfg.out_dir) / "cps_check.json",
                         payload.dump(2) + "\n");
    RunResult res;
    res.exit_code = rep.valid ? 0 : 1;
    res.payload = std::move(payload);
    return res;
}

inline RunResult run_fit_sandwich(const RunConfig& cfg) {
    const io::FamilyDocument doc = detail::obtain_family(cfg);
    const auto& tree = doc.family.tree();
    std::map<std::string, double> lower, upper;
    if (cfg.corridor->from_model) {
        const PriceField& f = doc.family.field(doc.family.theta_index(*cfg.corridor->from_model));
        for (int i = 0; i < tree.size(); ++i) {
            lower[tree.id(i)] = (1.0 - doc.family.lambda()) * f.at(i);
            upper[tree.id(i)] = (1.0 + doc.family.lambda()) * f.at(i);
        }
    } else {
        lower = cfg.corridor->lower;
        upper = cfg.corridor->upper;
    }
    const auto fit = fit_sandwich_martingale(tree, lower, upper);
    json payload;
    payload["feasible"] = fit.feasible;
    if (fit.feasible) {
        json jm;
        for (const auto& [id, v] : fit.m) jm[id] = v;
        payload["m"] = std::move(jm);
    } else {
        payload["witness_node"] = fit.witness_node;
    }
    detail::atomic_write(std::filesystem::path(cfg.out_dir) / "sandwich.json",
                         payload.dump(2) + "\n");
    RunResult res;
    res.exit_code = fit.feasible ? 0 : 1;
    res.payload = std::move(payload);
    return res;
}

inline RunResult run(RunMode mode, const RunConfig& cfg) {
    cfg.validate(mode);
    switch (mode) {
        case RunMode::solve: return run_solve(cfg);
        case RunMode::generate: return run_generate(cfg);
        case RunMode::detect_arbitrage: return run_detect_arbitrage(cfg);
        case RunMode::check_cps: return run_check_cps(cfg);
        case RunMode::fit_sandwich: return run_fit_sandwich(cfg);
    }
    throw SchemaError("unknown mode");
}

// Exit-code wrapper: 0 success, 1 FAIL verdict, 2 schema/input error,
// 3 solver failure. Diagnostics go to the error stream.
inline int run_cli(RunMode mode, const RunConfig& cfg, std::ostream& err = std::cerr) {
    try {
        return run(mode, cfg).exit_code;
    } catch (const SolverFailure& e) {
        err << "solver failure: " << e.what() << "\n";
        return 3;
    } catch (const FreeLunch& e) {
        err << "free lunch: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace hedge::harness
