#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "availsim/chaos.hpp"
#include "availsim/errors.hpp"
#include "availsim/oracle.hpp"
#include "availsim/report.hpp"
#include "availsim/simulate.hpp"
#include "availsim/trace_ingest.hpp"
#include "availsim/version.hpp"

namespace availsim {

struct PipelineConfig {
    // discover
    std::string infra_file;
    std::uint64_t min_span_micros = 0;
    std::set<std::string> broker_systems = {"kafka"};
    // simulate
    std::vector<double> fractions = {0.1, 0.3, 0.5, 0.7, 0.9};
    std::uint64_t trials = 100000;
    std::uint64_t simulate_seed = 42;
    bool crn = true;
    // oracle
    bool oracle_enabled = true;
    std::uint64_t oracle_budget = kDefaultOracleBudget;
    // chaos
    std::vector<double> chaos_fractions; // empty = same as simulate
    int chunks = 50;
    int windows = 100;
    int probes = 100;
    std::uint64_t chaos_seed = 7;
    double rescue = 0.0;
    double gray = 0.0;
    // shared inputs
    std::string disallowlist_file = "disallowlist.txt";
    std::string weights_file;
};

inline std::map<std::string, double> load_weights(const std::string& document) {
    nlohmann::json doc = detail::parse_json(document, "weights");
    if (!doc.is_object()) throw ValidationError("weights: top level must be an object");
    std::map<std::string, double> out;
    for (const auto& [route, value] : doc.items()) {
        if (!value.is_number()) throw ValidationError("weights: '" + route + "' must be a number");
        double w = value.get<double>();
        if (w < 0.0) throw ValidationError("weights: '" + route + "' must be >= 0");
        out[route] = w;
    }
    if (out.empty()) throw ValidationError("weights: no routes");
    return out;
}

namespace detail {

inline std::vector<double> parse_fraction_array(const nlohmann::json& arr, const std::string& where) {
    if (!arr.is_array() || arr.empty()) {
        throw ValidationError(where + ": must be a non-empty array of numbers");
    }
    std::vector<double> out;
    for (const auto& v : arr) {
        if (!v.is_number()) throw ValidationError(where + ": fractions must be numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

} // namespace detail

inline PipelineConfig parse_pipeline_config(const std::string& document) {
    nlohmann::json doc = detail::parse_json(document, "pipeline config");
    if (!doc.is_object()) throw ValidationError("pipeline config: top level must be an object");
    detail::reject_unknown_keys(doc, {"discover", "simulate", "oracle", "chaos", "report",
                                      "disallowlist"},
                                "pipeline config");

    PipelineConfig cfg;
    if (doc.contains("disallowlist")) {
        cfg.disallowlist_file = doc["disallowlist"].get<std::string>();
    }

    if (doc.contains("discover")) {
        const auto& d = doc["discover"];
        detail::reject_unknown_keys(d, {"infra", "min_span_micros", "brokers"},
                                    "pipeline config: discover");
        if (d.contains("infra")) cfg.infra_file = d["infra"].get<std::string>();
        if (d.contains("min_span_micros")) {
            cfg.min_span_micros = d["min_span_micros"].get<std::uint64_t>();
        }
        if (d.contains("brokers")) {
            cfg.broker_systems.clear();
            for (const auto& b : d["brokers"]) cfg.broker_systems.insert(b.get<std::string>());
        }
    }

    if (doc.contains("simulate")) {
        const auto& s = doc["simulate"];
        detail::reject_unknown_keys(s, {"fractions", "trials", "seed", "crn"},
                                    "pipeline config: simulate");
        if (s.contains("fractions")) {
            cfg.fractions = detail::parse_fraction_array(s["fractions"],
                                                         "pipeline config: simulate.fractions");
        }
        if (s.contains("trials")) cfg.trials = s["trials"].get<std::uint64_t>();
        if (s.contains("seed")) cfg.simulate_seed = s["seed"].get<std::uint64_t>();
        if (s.contains("crn")) cfg.crn = s["crn"].get<bool>();
    }

    if (doc.contains("oracle")) {
        const auto& o = doc["oracle"];
        detail::reject_unknown_keys(o, {"enabled", "budget"}, "pipeline config: oracle");
        if (o.contains("enabled")) cfg.oracle_enabled = o["enabled"].get<bool>();
        if (o.contains("budget")) cfg.oracle_budget = o["budget"].get<std::uint64_t>();
    }

    if (doc.contains("chaos")) {
        const auto& c = doc["chaos"];
        detail::reject_unknown_keys(
            c, {"fractions", "chunks", "windows", "probes", "seed", "rescue", "gray"},
            "pipeline config: chaos");
        if (c.contains("fractions")) {
            cfg.chaos_fractions = detail::parse_fraction_array(c["fractions"],
                                                               "pipeline config: chaos.fractions");
        }
        if (c.contains("chunks")) cfg.chunks = c["chunks"].get<int>();
        if (c.contains("windows")) cfg.windows = c["windows"].get<int>();
        if (c.contains("probes")) cfg.probes = c["probes"].get<int>();
        if (c.contains("seed")) cfg.chaos_seed = c["seed"].get<std::uint64_t>();
        if (c.contains("rescue")) cfg.rescue = c["rescue"].get<double>();
        if (c.contains("gray")) cfg.gray = c["gray"].get<double>();
    }

    if (doc.contains("report")) {
        const auto& r = doc["report"];
        detail::reject_unknown_keys(r, {"weights"}, "pipeline config: report");
        if (r.contains("weights")) cfg.weights_file = r["weights"].get<std::string>();
    }

    return cfg;
}

struct PipelineResult {
    std::string graph_path;
    std::string predictions_path;
    std::optional<std::string> exact_path;
    std::string live_path;
    ReportPaths reports;
    std::string metadata_path;
    std::vector<std::string> warnings;
};

namespace detail {

template <typename Fn>
auto run_stage(const char* stage, Fn&& fn) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const ValidationError& e) {
        throw StageError(stage, e.what(), ExitCode::validation);
    } catch (const IoError& e) {
        throw StageError(stage, e.what(), ExitCode::io);
    } catch (const std::exception& e) {
        throw StageError(stage, e.what(), ExitCode::stage_failure);
    }
}

inline std::vector<std::string> sorted_trace_files(const std::string& dir) {
    namespace fs = std::filesystem;
    std::vector<std::string> files;
    if (!fs::is_directory(dir)) throw IoError("trace directory not found: " + dir);
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            files.push_back(entry.path().string());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ValidationError("no .json trace files in " + dir);
    return files;
}

} // namespace detail

// Runs discover → simulate → oracle → chaos → report on a workspace
// directory. Any stage failure surfaces as a StageError naming the stage; an
// over-budget oracle is skipped with a warning rather than failing the run.
inline PipelineResult run_pipeline(const std::string& workspace, const PipelineConfig& cfg,
                                   unsigned workers = 0, const std::string& config_hash = "") {
    namespace fs = std::filesystem;
    PipelineResult result;
    auto ws = [&](const std::string& rel) { return workspace + "/" + rel; };

    // discover (or load prebuilt graph.json)
    ServiceGraph graph = detail::run_stage("discover", [&] {
        result.graph_path = ws("graph.json");
        if (fs::exists(result.graph_path)) {
            return load_graph(read_file(result.graph_path));
        }
        IngestConfig ingest;
        ingest.min_span_duration_micros = cfg.min_span_micros;
        ingest.broker_systems = cfg.broker_systems;
        if (!cfg.infra_file.empty()) {
            auto names = parse_name_list(read_file(ws(cfg.infra_file)));
            ingest.infra_services = {names.begin(), names.end()};
        }
        std::vector<SpanRecord> spans;
        for (const auto& file : detail::sorted_trace_files(ws("traces"))) {
            auto batch = parse_trace_export(read_file(file));
            spans.insert(spans.end(), std::make_move_iterator(batch.begin()),
                         std::make_move_iterator(batch.end()));
        }
        ServiceGraph g = build_dependency_graph(spans, ingest);
        write_file(result.graph_path, save_graph(g));
        return g;
    });

    std::vector<EndpointSpec> endpoints = detail::run_stage("simulate", [&] {
        auto eps = load_targets(read_file(ws("targets.json")));
        bind_endpoints(eps, graph);
        return eps;
    });
    std::set<std::string> disallow = detail::run_stage("simulate", [&] {
        auto names = parse_name_list(read_file(ws(cfg.disallowlist_file)));
        return std::set<std::string>(names.begin(), names.end());
    });
    std::map<std::string, double> weights;
    if (!cfg.weights_file.empty()) {
        weights = detail::run_stage("report", [&] { return load_weights(read_file(ws(cfg.weights_file))); });
    }

    std::vector<EstimateRecord> predictions = detail::run_stage("simulate", [&] {
        SimulationConfig sim;
        sim.failure_fractions = cfg.fractions;
        sim.trials = cfg.trials;
        sim.master_seed = cfg.simulate_seed;
        sim.disallowlist = disallow;
        sim.common_random_numbers = cfg.crn;
        auto records = estimate_availability(graph, endpoints, sim, workers);
        result.predictions_path = ws("predictions.json");
        write_file(result.predictions_path, save_records(records));
        return records;
    });

    std::optional<std::vector<EstimateRecord>> exact;
    detail::run_stage("oracle", [&] {
        if (!cfg.oracle_enabled) {
            result.warnings.push_back("oracle: disabled in config");
            return 0;
        }
        std::vector<std::string> eligible = eligible_set(graph, disallow);
        const auto n = static_cast<std::uint64_t>(eligible.size());
        for (double p : cfg.fractions) {
            auto k = static_cast<std::uint64_t>(kill_count(p, static_cast<int>(n)));
            if (!binomial_within(n, k, cfg.oracle_budget)) {
                result.warnings.push_back("oracle: skipped, C(" + std::to_string(n) + ", " +
                                          std::to_string(k) + ") exceeds budget " +
                                          std::to_string(cfg.oracle_budget));
                return 0;
            }
        }
        exact = oracle_records(graph, endpoints, cfg.fractions, disallow, cfg.oracle_budget);
        result.exact_path = ws("exact.json");
        write_file(*result.exact_path, save_records(*exact));
        return 0;
    });

    ChaosResult live = detail::run_stage("chaos", [&] {
        ChaosConfig chaos;
        chaos.failure_fractions = cfg.chaos_fractions.empty() ? cfg.fractions : cfg.chaos_fractions;
        chaos.chunks = cfg.chunks;
        chaos.windows_per_chunk = cfg.windows;
        chaos.probes_per_window = cfg.probes;
        chaos.probe_weights = weights;
        chaos.retry_rescue_prob = cfg.rescue;
        chaos.gray_failure_prob = cfg.gray;
        chaos.master_seed = cfg.chaos_seed;
        ChaosResult res = run_chaos(graph, endpoints, chaos, disallow, workers);
        result.live_path = ws("live.csv");
        write_file(result.live_path, save_live_csv(res));
        return res;
    });

    nlohmann::ordered_json metadata;
    metadata["tool"] = kToolName;
    metadata["version"] = kVersion;
    metadata["seeds"]["simulate"] = cfg.simulate_seed;
    metadata["seeds"]["chaos"] = cfg.chaos_seed;
    metadata["config_hash"] = config_hash.empty() ? hex64(fnv1a64("")) : config_hash;
    metadata["warnings"] = result.warnings;

    detail::run_stage("report", [&] {
        result.reports = write_reports(ws("reports"), predictions, live,
                                       exact ? &*exact : nullptr, weights, &metadata);
        return 0;
    });

    result.metadata_path = ws("run_metadata.json");
    write_file(result.metadata_path, metadata.dump(2) + "\n");
    return result;
}

// Convenience entry: config file is optional; its raw bytes are hashed into
// the metadata block so artifact provenance is checkable.
inline PipelineResult run_pipeline_from_files(const std::string& workspace,
                                              const std::string& config_path, unsigned workers = 0) {
    PipelineConfig cfg;
    std::string config_hash;
    if (!config_path.empty()) {
        std::string raw = detail::run_stage("config", [&] { return read_file(config_path); });
        cfg = detail::run_stage("config", [&] { return parse_pipeline_config(raw); });
        config_hash = hex64(fnv1a64(raw));
    }
    return run_pipeline(workspace, cfg, workers, config_hash);
}

} // namespace availsim
