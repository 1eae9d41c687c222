#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "availsim/pipeline.hpp"
#include "test_support.hpp"

using namespace availsim;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kArtifacts = {
    "graph.json",          "predictions.json",          "exact.json",
    "live.csv",            "run_metadata.json",         "reports/bias.csv",
    "reports/errors.csv",  "reports/deltas.csv",        "reports/summary.json",
    "reports/charts/availability.svg", "reports/charts/deltas.svg",
    "reports/charts/errors.svg",
};

int run_cli(const std::string& args, const fs::path& stdout_file, const fs::path& stderr_file) {
    std::string cmd = std::string(AVAILSIM_CLI_PATH) + " " + args + " > \"" +
                      stdout_file.string() + "\" 2> \"" + stderr_file.string() + "\"";
    int status = std::system(cmd.c_str());
    if (!WIFEXITED(status)) return -1;
    return WEXITSTATUS(status);
}

} // namespace

TEST_CASE("pipeline config parses every section", "[pipeline]") {
    auto cfg = parse_pipeline_config(R"({
      "discover": {"infra": "infra.txt", "min_span_micros": 250, "brokers": ["kafka", "pulsar"]},
      "simulate": {"fractions": [0.2, 0.4], "trials": 5000, "seed": 9, "crn": false},
      "oracle": {"enabled": false, "budget": 123},
      "chaos": {"fractions": [0.5], "chunks": 2, "windows": 3, "probes": 4, "seed": 11,
                "rescue": 0.05, "gray": 0.1},
      "report": {"weights": "weights.json"},
      "disallowlist": "never.txt"
    })");
    CHECK(cfg.infra_file == "infra.txt");
    CHECK(cfg.min_span_micros == 250);
    CHECK(cfg.broker_systems == std::set<std::string>{"kafka", "pulsar"});
    CHECK(cfg.fractions == std::vector<double>{0.2, 0.4});
    CHECK(cfg.trials == 5000);
    CHECK(cfg.simulate_seed == 9);
    CHECK_FALSE(cfg.crn);
    CHECK_FALSE(cfg.oracle_enabled);
    CHECK(cfg.oracle_budget == 123);
    CHECK(cfg.chaos_fractions == std::vector<double>{0.5});
    CHECK(cfg.chunks == 2);
    CHECK(cfg.windows == 3);
    CHECK(cfg.probes == 4);
    CHECK(cfg.chaos_seed == 11);
    CHECK(cfg.rescue == 0.05);
    CHECK(cfg.gray == 0.1);
    CHECK(cfg.weights_file == "weights.json");
    CHECK(cfg.disallowlist_file == "never.txt");
}

TEST_CASE("pipeline config defaults hold for an empty document", "[pipeline]") {
    auto cfg = parse_pipeline_config("{}");
    CHECK(cfg.fractions == std::vector<double>{0.1, 0.3, 0.5, 0.7, 0.9});
    CHECK(cfg.trials == 100000);
    CHECK(cfg.simulate_seed == 42);
    CHECK(cfg.crn);
    CHECK(cfg.oracle_enabled);
    CHECK(cfg.oracle_budget == kDefaultOracleBudget);
    CHECK(cfg.chaos_fractions.empty());
    CHECK(cfg.chunks == 50);
    CHECK(cfg.windows == 100);
    CHECK(cfg.probes == 100);
    CHECK(cfg.chaos_seed == 7);
    CHECK(cfg.rescue == 0.0);
    CHECK(cfg.gray == 0.0);
    CHECK(cfg.broker_systems == std::set<std::string>{"kafka"});
    CHECK(cfg.disallowlist_file == "disallowlist.txt");
    CHECK(cfg.infra_file.empty());
    CHECK(cfg.weights_file.empty());
}

TEST_CASE("pipeline config rejects unknown keys", "[pipeline]") {
    CHECK_THROWS_WITH(parse_pipeline_config(R"({"simulte": {}})"),
                      Catch::Matchers::ContainsSubstring("unknown key 'simulte'"));
    CHECK_THROWS_WITH(parse_pipeline_config(R"({"simulate": {"seeds": 1}})"),
                      Catch::Matchers::ContainsSubstring("unknown key 'seeds'"));
    CHECK_THROWS_WITH(parse_pipeline_config(R"({"chaos": {"fractions": []}})"),
                      Catch::Matchers::ContainsSubstring("non-empty array"));
    CHECK_THROWS_AS(parse_pipeline_config("[]"), ValidationError);
    CHECK_THROWS_AS(parse_pipeline_config("not json"), ValidationError);
}

TEST_CASE("weights files are validated", "[pipeline]") {
    auto weights = load_weights(R"({"GET /a": 3, "GET /b": 1.5})");
    CHECK(weights.size() == 2);
    CHECK(weights.at("GET /a") == 3.0);
    CHECK_THROWS_AS(load_weights("[]"), ValidationError);
    CHECK_THROWS_WITH(load_weights(R"({"GET /a": "lots"})"),
                      Catch::Matchers::ContainsSubstring("must be a number"));
    CHECK_THROWS_WITH(load_weights(R"({"GET /a": -1})"),
                      Catch::Matchers::ContainsSubstring(">= 0"));
    CHECK_THROWS_WITH(load_weights("{}"), Catch::Matchers::ContainsSubstring("no routes"));
}

TEST_CASE("the demo workspace runs end to end", "[pipeline]") {
    auto ws = testsupport::make_demo_workspace("availsim-pipe");
    auto result = run_pipeline_from_files(ws.string(), (ws / "pipeline.json").string());

    CHECK(result.warnings.empty());
    for (const auto& rel : kArtifacts) CHECK(fs::exists(ws / rel));
    REQUIRE(result.exact_path.has_value());

    CHECK(read_file(result.graph_path) ==
          read_file((testsupport::fixture_dir() / "demo" / "graph.golden.json").string()));

    auto metadata = nlohmann::json::parse(read_file(result.metadata_path));
    CHECK(metadata["tool"] == "availsim");
    CHECK(metadata["version"] == kVersion);
    CHECK(metadata["seeds"]["simulate"] == 42);
    CHECK(metadata["seeds"]["chaos"] == 7);
    CHECK(metadata["config_hash"] ==
          hex64(fnv1a64(read_file((ws / "pipeline.json").string()))));
    CHECK(metadata["warnings"].empty());

    auto summary = nlohmann::json::parse(read_file(result.reports.summary_json));
    REQUIRE(summary.contains("oracle_check"));
    CHECK(summary["oracle_check"]["all_within_4_std_errors"] == true);
    CHECK(summary["oracle_check"]["strata_compared"] == 40);
    CHECK(summary["metadata"]["config_hash"] == metadata["config_hash"]);

    fs::remove_all(ws);
}

TEST_CASE("a missing targets file fails the simulate stage", "[pipeline]") {
    auto ws = testsupport::make_demo_workspace("availsim-notargets");
    fs::remove(ws / "targets.json");
    try {
        run_pipeline_from_files(ws.string(), (ws / "pipeline.json").string());
        FAIL("expected a StageError");
    } catch (const StageError& e) {
        CHECK(e.stage() == "simulate");
        CHECK(e.code() == ExitCode::io);
        CHECK(std::string(e.what()).find("targets.json") != std::string::npos);
    }
    fs::remove_all(ws);
}

TEST_CASE("an over-budget oracle is skipped with a warning", "[pipeline]") {
    auto ws = testsupport::make_demo_workspace("availsim-budget");
    write_file((ws / "pipeline.json").string(), R"({
      "discover": {"infra": "infra_services.txt"},
      "simulate": {"fractions": [0.5], "trials": 2000},
      "oracle": {"budget": 10},
      "chaos": {"chunks": 2, "windows": 10, "probes": 10},
      "disallowlist": "disallowlist.txt"
    })");
    auto result = run_pipeline_from_files(ws.string(), (ws / "pipeline.json").string());
    REQUIRE(result.warnings.size() == 1);
    CHECK(result.warnings[0].find("exceeds budget 10") != std::string::npos);
    CHECK_FALSE(result.exact_path.has_value());
    CHECK_FALSE(fs::exists(ws / "exact.json"));
    CHECK(fs::exists(ws / "reports" / "summary.json"));

    auto summary = nlohmann::json::parse(read_file((ws / "reports" / "summary.json").string()));
    CHECK_FALSE(summary.contains("oracle_check"));
    auto metadata = nlohmann::json::parse(read_file((ws / "run_metadata.json").string()));
    REQUIRE(metadata["warnings"].size() == 1);

    fs::remove_all(ws);
}

TEST_CASE("worker count never changes pipeline artifacts", "[pipeline]") {
    const char* config = R"({
      "discover": {"infra": "infra_services.txt"},
      "simulate": {"fractions": [0.3, 0.7], "trials": 20000},
      "chaos": {"chunks": 2, "windows": 20, "probes": 20},
      "disallowlist": "disallowlist.txt"
    })";
    auto ws1 = testsupport::make_demo_workspace("availsim-w1");
    auto ws2 = testsupport::make_demo_workspace("availsim-w2");
    write_file((ws1 / "pipeline.json").string(), config);
    write_file((ws2 / "pipeline.json").string(), config);

    run_pipeline_from_files(ws1.string(), (ws1 / "pipeline.json").string(), 1);
    run_pipeline_from_files(ws2.string(), (ws2 / "pipeline.json").string(), 2);

    for (const auto& rel : kArtifacts) {
        INFO(rel);
        REQUIRE(fs::exists(ws1 / rel));
        REQUIRE(fs::exists(ws2 / rel));
        CHECK(read_file((ws1 / rel).string()) == read_file((ws2 / rel).string()));
    }

    fs::remove_all(ws1);
    fs::remove_all(ws2);
}

TEST_CASE("the CLI honours its exit code contract", "[pipeline][cli]") {
    auto dir = testsupport::make_temp_dir("availsim-cli");
    auto out = dir / "out.txt";
    auto err = dir / "err.txt";

    CHECK(run_cli("--version", out, err) == 0);
    CHECK(read_file(out.string()).find("availsim 0.1.0") != std::string::npos);

    CHECK(run_cli("simulate --no-such-flag", out, err) == 1);
    CHECK(run_cli("definitely-not-a-subcommand", out, err) == 1);

    CHECK(run_cli("simulate --graph " + (dir / "nope.json").string() + " --targets " +
                      (dir / "nope2.json").string(),
                  out, err) == 3);

    auto empty_ws = dir / "empty";
    fs::create_directories(empty_ws);
    CHECK(run_cli("pipeline " + empty_ws.string(), out, err) == 3);
    auto err_text = read_file(err.string());
    CHECK(err_text.find("\"stage\":\"discover\"") != std::string::npos);
    CHECK(err_text.find("\"exit_code\":3") != std::string::npos);

    fs::remove_all(dir);
}
