// hedge: robust superhedging prices under proportional transaction costs on
// finite scenario trees, with machine-checkable primal/dual certificates.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hedge/harness.hpp"

namespace {

struct ModeSpec {
    const char* name;
    const char* help;
    hedge::harness::RunMode mode;
};

constexpr ModeSpec kModes[] = {
    {"solve", "solve primal and dual, verify certificates, emit a duality report",
     hedge::harness::RunMode::solve},
    {"generate", "emit a family JSON from a generator spec", hedge::harness::RunMode::generate},
    {"detect-arbitrage", "per-model free-lunch verdicts with certificates",
     hedge::harness::RunMode::detect_arbitrage},
    {"check-cps", "validate a consistent price system against a family",
     hedge::harness::RunMode::check_cps},
    {"fit-sandwich", "fit a martingale into a node-wise corridor",
     hedge::harness::RunMode::fit_sandwich},
};

void print_summary(hedge::harness::RunMode mode, const hedge::harness::RunResult& res) {
    using hedge::harness::RunMode;
    const auto& p = res.payload;
    switch (mode) {
        case RunMode::solve:
            std::cout << "primal " << p["primal"].dump() << "  dual " << p["dual"].dump()
                      << "  gap " << p["gap"].dump() << "  status "
                      << p["status"].get<std::string>() << "\n";
            std::cout << "individual " << p["individual"].dump() << "\n";
            std::cout << "arbitrage " << p["arbitrage"].dump() << "\n";
            break;
        case RunMode::generate:
            std::cout << "family with " << p["nodes"].size() << " nodes, " << p["models"].size()
                      << " model(s) written\n";
            break;
        case RunMode::detect_arbitrage:
            std::cout << "verdicts " << p["verdicts"].dump() << "\n";
            break;
        case RunMode::check_cps:
            std::cout << (p["valid"].get<bool>() ? "valid" : "INVALID") << ", "
                      << p["violations"].size() << " violation(s)\n";
            break;
        case RunMode::fit_sandwich:
            if (p["feasible"].get<bool>()) std::cout << "feasible\n";
            else std::cout << "infeasible at node " << p["witness_node"].get<std::string>() << "\n";
            break;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"robust superhedging under proportional transaction costs"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    double lambda = std::numeric_limits<double>::quiet_NaN();
    double tol_gap = std::numeric_limits<double>::quiet_NaN();

    for (const auto& spec : kModes) {
        CLI::App* sub = app.add_subcommand(spec.name, spec.help);
        sub->add_option("--config", config_path, "run configuration (JSON)")->required();
        sub->add_option("--out", out_dir, "output directory (overrides config)");
        sub->add_option("--lambda", lambda, "transaction cost override");
        sub->add_option("--tol-gap", tol_gap, "duality gap tolerance override");
    }

    CLI11_PARSE(app, argc, argv);

    hedge::harness::RunMode mode{};
    for (const auto& spec : kModes)
        if (app.got_subcommand(spec.name)) mode = spec.mode;

    hedge::harness::RunConfig cfg;
    try {
        const std::string dir = std::filesystem::path(config_path).parent_path().string();
        cfg = hedge::harness::parse_config(hedge::harness::detail::read_file(config_path),
                                           dir.empty() ? "." : dir);
    } catch (const hedge::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (!std::isnan(lambda)) cfg.lambda_override = lambda;
    if (!std::isnan(tol_gap)) cfg.tol_gap = tol_gap;
    if (const char* exact = std::getenv("HEDGE_EXACT"); exact && std::string(exact) == "1")
        cfg.exact = true;

    try {
        cfg.validate(mode);
        const auto res = hedge::harness::run(mode, cfg);
        print_summary(mode, res);
        return res.exit_code;
    } catch (const hedge::SolverFailure& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 3;
    } catch (const hedge::FreeLunch& e) {
        std::cerr << "free lunch: " << e.what() << "\n";
        return 1;
    } catch (const hedge::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
