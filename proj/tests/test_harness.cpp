#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "hedge/harness.hpp"
#include "support.hpp"

using namespace hedge;
using namespace hedge::harness;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("hedge_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& p, const std::string& body) {
    std::ofstream out(p);
    out << body;
}

const char* kE3Doc = R"({
  "horizon": 1, "lambda": 0.0,
  "nodes": [
    {"id": "r", "parent": null, "t": 0, "p": 1.0},
    {"id": "ru", "parent": "r", "t": 1, "p": 0.5},
    {"id": "rd", "parent": "r", "t": 1, "p": 0.5}
  ],
  "models": [
    {"theta": "theta1", "prices": {"r": 100, "ru": 120, "rd": 80}},
    {"theta": "theta2", "prices": {"r": 100, "ru": 130, "rd": 90}}
  ],
  "claims": {"theta1": {"ru": 20, "rd": 0}, "theta2": {"ru": 30, "rd": 0}}
})";

} // namespace

TEST_CASE("solve mode reports the two-model duality and writes certificates") {
    const fs::path dir = temp_dir("solve");
    write_file(dir / "family.json", kE3Doc);
    RunConfig cfg;
    cfg.input = (dir / "family.json").string();
    cfg.out_dir = (dir / "out").string();
    const auto res = run(RunMode::solve, cfg);
    CHECK(res.exit_code == 0);
    REQUIRE(res.report.has_value());
    CHECK(res.report->primal == Catch::Approx(12.0).margin(1e-6));
    CHECK(res.report->dual == Catch::Approx(12.0).margin(1e-6));
    CHECK(res.report->gap <= 1e-7);
    CHECK(res.report->individual.at("theta1") == Catch::Approx(10.0).margin(1e-6));
    CHECK(res.report->individual.at("theta2") == Catch::Approx(7.5).margin(1e-6));
    CHECK(res.report->arbitrage.at("theta1") == "no_free_lunch");
    CHECK(!res.report->fail);

    for (const char* name : {"report.json", "primal_cert.json", "dual_cert.json"})
        CHECK(fs::exists(dir / "out" / name));

    // saved certificates re-verify: load them back and check independently
    const auto family = io::load_family(kE3Doc);
    const auto cps_doc = io::json::parse(std::ifstream(dir / "out" / "dual_cert.json"));
    const auto cps = io::parse_cps(cps_doc.at("cps"));
    CHECK(validate_cps(family.family, cps).valid);
    const auto primal_doc = io::json::parse(std::ifstream(dir / "out" / "primal_cert.json"));
    const Strategy strategy = io::parse_strategy(primal_doc.at("strategy"));
    const double price = primal_doc.at("price").get<double>();
    const auto wr = wealth_report(family.family, strategy, price);
    const auto& tree = family.family.tree();
    for (int m = 0; m < family.family.num_models(); ++m)
        for (int k = 0; k < tree.num_leaves(); ++k)
            CHECK(wr.values[m][tree.leaves()[k]] >= family.claims->at(m, k) - 1e-9);

    // idempotence: a second run returns the same verdict and report values
    const auto res2 = run(RunMode::solve, cfg);
    CHECK(res2.exit_code == res.exit_code);
    CHECK(res2.report->primal == Catch::Approx(res.report->primal));
}

TEST_CASE("solve without claims exits 2 naming the problem") {
    const fs::path dir = temp_dir("noclaims");
    auto body = io::json::parse(kE3Doc);
    body.erase("claims");
    write_file(dir / "family.json", body.dump());
    RunConfig cfg;
    cfg.input = (dir / "family.json").string();
    cfg.out_dir = (dir / "out").string();
    std::ostringstream err;
    CHECK(run_cli(RunMode::solve, cfg, err) == 2);
    CHECK(err.str().find("claims") != std::string::npos);
}

TEST_CASE("a claim missing one leaf exits 2 and names the leaf") {
    const fs::path dir = temp_dir("missingleaf");
    auto body = io::json::parse(kE3Doc);
    body["claims"]["theta2"].erase("rd");
    write_file(dir / "family.json", body.dump());
    RunConfig cfg;
    cfg.input = (dir / "family.json").string();
    std::ostringstream err;
    CHECK(run_cli(RunMode::solve, cfg, err) == 2);
    CHECK(err.str().find("'rd'") != std::string::npos);
}

TEST_CASE("detect-arbitrage flags the sure-up market and exits 1") {
    const fs::path dir = temp_dir("arb");
    write_file(dir / "family.json", R"({
      "horizon": 1, "lambda": 0.05,
      "nodes": [
        {"id": "r", "parent": null, "t": 0, "p": 1.0},
        {"id": "ru", "parent": "r", "t": 1, "p": 0.5},
        {"id": "rd", "parent": "r", "t": 1, "p": 0.5}
      ],
      "models": [{"theta": "theta1", "prices": {"r": 100, "ru": 130, "rd": 125}}]
    })");
    RunConfig cfg;
    cfg.input = (dir / "family.json").string();
    cfg.out_dir = (dir / "out").string();
    const auto res = run(RunMode::detect_arbitrage, cfg);
    CHECK(res.exit_code == 1);
    CHECK(res.payload["verdicts"]["theta1"] == "free_lunch");
    CHECK(fs::exists(dir / "out" / "arbitrage.json"));

    SECTION("lambda override flips the verdict") {
        cfg.lambda_override = 0.2;
        const auto res2 = run(RunMode::detect_arbitrage, cfg);
        CHECK(res2.exit_code == 0);
        CHECK(res2.payload["verdicts"]["theta1"] == "no_free_lunch");
    }
}

TEST_CASE("generate emits a loadable binomial family that round-trips") {
    const fs::path dir = temp_dir("genbin");
    RunConfig cfg;
    GeneratorSpec spec;
    spec.levels = 3;
    spec.lambda = 0.05;
    GeneratorSpec::ModelSpec ms;
    ms.theta = "b";
    ms.kind = "binomial";
    spec.models.push_back(ms);
    spec.claim = GeneratorSpec::ClaimSpec{"call", 100.0};
    cfg.generator = spec;
    cfg.out_dir = dir.string();
    const auto res = run(RunMode::generate, cfg);
    CHECK(res.exit_code == 0);
    const auto loaded = io::load_family(harness::detail::read_file((dir / "family.json").string()));
    CHECK(loaded.family.tree().size() == 15);
    REQUIRE(loaded.claims.has_value());
    CHECK(io::save_family(loaded) ==
          harness::detail::read_file((dir / "family.json").string()));
}

TEST_CASE("generated kernel prices match the independent oracle") {
    const fs::path dir = temp_dir("genker");
    RunConfig cfg;
    GeneratorSpec spec;
    spec.levels = 3;
    spec.lambda = 0.05;
    GeneratorSpec::ModelSpec ms;
    ms.theta = "k";
    ms.kind = "kernel";
    ms.hurst = 0.7;
    ms.increment = 0.1;
    spec.models.push_back(ms);
    cfg.generator = spec;
    cfg.out_dir = dir.string();
    run(RunMode::generate, cfg);
    const auto loaded = io::load_family(harness::detail::read_file((dir / "family.json").string()));
    const auto& tree = loaded.family.tree();
    auto kernel = [](int t, int s) { return std::pow(double(t - s + 1), 0.2); };
    const std::vector<double> mu(3, 0.0);
    for (int i = 0; i < tree.size(); ++i)
        CHECK(loaded.family.field(0).at(i) ==
              Catch::Approx(testsupport::kernel_price_oracle(tree, i, mu, kernel, 0.1, true))
                  .epsilon(1e-10));
}

TEST_CASE("a two-model generator shares one tree") {
    RunConfig cfg;
    GeneratorSpec spec;
    spec.levels = 2;
    spec.lambda = 0.05;
    GeneratorSpec::ModelSpec m1, m2;
    m1.theta = "b";
    m1.kind = "binomial";
    m2.theta = "k";
    m2.kind = "kernel";
    m2.hurst = 0.6;
    spec.models = {m1, m2};
    const auto doc = generate_family(spec);
    CHECK(doc.family.num_models() == 2);
    CHECK(doc.family.tree().size() == 7);
}

TEST_CASE("fit-sandwich mode resolves corridors") {
    const fs::path dir = temp_dir("sandwich");
    write_file(dir / "family.json", kE3Doc);
    RunConfig cfg;
    cfg.input = (dir / "family.json").string();
    cfg.out_dir = (dir / "out").string();
    Corridor c;
    c.from_model = "theta1";
    cfg.corridor = c;
    const auto res = run(RunMode::fit_sandwich, cfg);
    CHECK(res.exit_code == 0);  // frictionless corridor around a binomial price
    CHECK(res.payload["feasible"].get<bool>());

    Corridor tight;
    tight.lower = {{"r", 95.0}, {"ru", 118.75}, {"rd", 118.75}};
    tight.upper = {{"r", 105.0}, {"ru", 131.25}, {"rd", 131.25}};
    cfg.corridor = tight;
    const auto res2 = run(RunMode::fit_sandwich, cfg);
    CHECK(res2.exit_code == 1);
    CHECK(res2.payload["witness_node"] == "r");
}

TEST_CASE("check-cps mode validates and rejects") {
    const fs::path dir = temp_dir("checkcps");
    write_file(dir / "family.json", kE3Doc);
    write_file(dir / "good.json", R"({
      "z": {"theta1": {"ru": 1.0, "rd": 1.0}},
      "m": {"r": 100.0, "ru": 120.0, "rd": 80.0},
      "witness": {"theta": "theta1", "leaves": ["ru", "rd"]}
    })");
    write_file(dir / "bad.json", R"({
      "z": {"theta1": {"ru": 1.0, "rd": 1.0}},
      "m": {"r": 100.0, "ru": 999.0, "rd": 80.0},
      "witness": {"theta": "theta1", "leaves": ["ru", "rd"]}
    })");
    RunConfig cfg;
    cfg.input = (dir / "family.json").string();
    cfg.out_dir = (dir / "out").string();
    cfg.cps_path = (dir / "good.json").string();
    CHECK(run(RunMode::check_cps, cfg).exit_code == 0);
    cfg.cps_path = (dir / "bad.json").string();
    const auto res = run(RunMode::check_cps, cfg);
    CHECK(res.exit_code == 1);
    CHECK(res.payload["violations"].size() >= 1);
}

TEST_CASE("config validation") {
    RunConfig cfg;
    CHECK_THROWS_AS(cfg.validate(RunMode::solve), SchemaError);  // neither input nor generator
    cfg.input = "x.json";
    cfg.generator = GeneratorSpec{};
    CHECK_THROWS_AS(cfg.validate(RunMode::solve), SchemaError);  // both
    cfg.generator.reset();
    CHECK_THROWS_AS(cfg.validate(RunMode::check_cps), SchemaError);   // cps path missing
    CHECK_THROWS_AS(cfg.validate(RunMode::fit_sandwich), SchemaError);
    CHECK_NOTHROW(cfg.validate(RunMode::solve));
}

TEST_CASE("config parsing resolves relative inputs against the config directory") {
    const fs::path dir = temp_dir("cfgrel");
    write_file(dir / "family.json", kE3Doc);
    write_file(dir / "run.json", R"({"input": "family.json"})");
    const auto cfg = parse_config(harness::detail::read_file((dir / "run.json").string()),
                                  dir.string());
    CHECK(cfg.input.value() == "family.json");
    const auto res = run(RunMode::detect_arbitrage,
                         [&] {
                             RunConfig c = cfg;
                             c.out_dir = (dir / "out").string();
                             return c;
                         }());
    CHECK(res.exit_code == 0);
}
