#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <availsim/pipeline.hpp>

namespace {

using namespace availsim;

std::vector<std::string> expand_trace_inputs(const std::vector<std::string>& inputs) {
    namespace fs = std::filesystem;
    std::vector<std::string> files;
    for (const auto& input : inputs) {
        if (fs::is_directory(input)) {
            std::vector<std::string> dir_files;
            for (const auto& entry : fs::directory_iterator(input)) {
                if (entry.is_regular_file() && entry.path().extension() == ".json") {
                    dir_files.push_back(entry.path().string());
                }
            }
            std::sort(dir_files.begin(), dir_files.end());
            files.insert(files.end(), dir_files.begin(), dir_files.end());
        } else if (fs::is_regular_file(input)) {
            files.push_back(input);
        } else {
            throw IoError("trace input not found: " + input);
        }
    }
    if (files.empty()) throw ValidationError("no trace files given");
    return files;
}

std::set<std::string> load_name_file(const std::string& path) {
    if (path.empty()) return {};
    auto names = parse_name_list(read_file(path));
    return {names.begin(), names.end()};
}

void check_fractions(const std::vector<double>& fractions) {
    if (fractions.empty()) throw ValidationError("no failure fractions given");
}

int run_discover(const std::vector<std::string>& traces, const std::string& infra,
                 const std::string& deployed, std::uint64_t min_span_micros,
                 const std::string& out) {
    IngestConfig config;
    config.infra_services = load_name_file(infra);
    config.min_span_duration_micros = min_span_micros;

    std::vector<SpanRecord> spans;
    for (const auto& file : expand_trace_inputs(traces)) {
        auto batch = parse_trace_export(read_file(file));
        spans.insert(spans.end(), std::make_move_iterator(batch.begin()),
                     std::make_move_iterator(batch.end()));
    }
    ServiceGraph graph = build_dependency_graph(spans, config);

    if (!deployed.empty()) {
        for (const auto& warning : sanity_check(graph, load_name_file(deployed))) {
            std::cerr << "warning: " << warning << "\n";
        }
    }
    write_file(out, save_graph(graph));
    std::cout << "graph: " << graph.services().size() << " services, " << graph.edges().size()
              << " edges (" << graph.async_edge_count() << " async) -> " << out << "\n";
    return 0;
}

int run_simulate(const std::string& graph_path, const std::string& targets_path,
                 const std::vector<double>& fractions, std::uint64_t trials, std::uint64_t seed,
                 const std::string& disallowlist, bool no_crn, unsigned workers,
                 const std::string& out) {
    check_fractions(fractions);
    ServiceGraph graph = load_graph(read_file(graph_path));
    std::vector<EndpointSpec> endpoints = load_targets(read_file(targets_path));

    SimulationConfig config;
    config.failure_fractions = fractions;
    config.trials = trials;
    config.master_seed = seed;
    config.disallowlist = load_name_file(disallowlist);
    config.common_random_numbers = !no_crn;

    std::vector<EstimateRecord> records = estimate_availability(graph, endpoints, config, workers);
    write_file(out, save_records(records));
    std::cout << "predictions: " << records.size() << " records -> " << out << "\n";
    return 0;
}

int run_oracle(const std::string& graph_path, const std::string& targets_path,
               const std::vector<double>& fractions, const std::string& disallowlist,
               std::uint64_t budget, const std::string& out) {
    check_fractions(fractions);
    ServiceGraph graph = load_graph(read_file(graph_path));
    std::vector<EndpointSpec> endpoints = load_targets(read_file(targets_path));

    std::vector<EstimateRecord> records =
        oracle_records(graph, endpoints, fractions, load_name_file(disallowlist), budget);
    write_file(out, save_records(records));
    std::cout << "exact: " << records.size() << " records -> " << out << "\n";
    return 0;
}

int run_chaos_cmd(const std::string& graph_path, const std::string& targets_path,
                  const std::vector<double>& fractions, int chunks, int windows, int probes,
                  std::uint64_t seed, double rescue, double gray, const std::string& weights_path,
                  const std::string& disallowlist, unsigned workers, const std::string& out) {
    check_fractions(fractions);
    ServiceGraph graph = load_graph(read_file(graph_path));
    std::vector<EndpointSpec> endpoints = load_targets(read_file(targets_path));

    ChaosConfig config;
    config.failure_fractions = fractions;
    config.chunks = chunks;
    config.windows_per_chunk = windows;
    config.probes_per_window = probes;
    config.master_seed = seed;
    config.retry_rescue_prob = rescue;
    config.gray_failure_prob = gray;
    if (!weights_path.empty()) config.probe_weights = load_weights(read_file(weights_path));

    ChaosResult result = run_chaos(graph, endpoints, config, load_name_file(disallowlist), workers);
    write_file(out, save_live_csv(result));
    std::cout << "live: " << result.outcomes.size() << " probes -> " << out << "\n";
    return 0;
}

int run_report(const std::string& predictions_path, const std::string& live_path,
               const std::string& exact_path, const std::string& weights_path,
               const std::string& out_dir) {
    std::vector<EstimateRecord> predictions = load_records(read_file(predictions_path));
    ChaosResult live = load_live_csv(read_file(live_path));

    std::vector<EstimateRecord> exact;
    bool have_exact = !exact_path.empty();
    if (have_exact) exact = load_records(read_file(exact_path));

    std::map<std::string, double> weights;
    if (!weights_path.empty()) weights = load_weights(read_file(weights_path));

    ReportPaths paths = write_reports(out_dir, predictions, live, have_exact ? &exact : nullptr,
                                      weights, nullptr);
    std::cout << "reports: " << out_dir << "/{bias.csv, errors.csv, deltas.csv, summary.json, charts}"
              << "\n";
    (void)paths;
    return 0;
}

int run_pipeline_cmd(const std::string& workspace, const std::string& config_path,
                     unsigned workers) {
    PipelineResult result = run_pipeline_from_files(workspace, config_path, workers);
    for (const auto& warning : result.warnings) std::cerr << "warning: " << warning << "\n";
    std::cout << "pipeline: artifacts in " << workspace << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Service-graph availability prediction toolkit"};
    app.set_version_flag("--version", std::string(availsim::kToolName) + " " + availsim::kVersion);
    app.require_subcommand(1);

    unsigned workers = 0;
    app.add_option("--workers", workers, "Worker thread cap (0 = hardware parallelism)")
        ->capture_default_str();

    // discover
    auto* discover = app.add_subcommand("discover", "Mine a service graph from trace exports");
    std::vector<std::string> traces;
    std::string infra, deployed, graph_out = "graph.json";
    std::uint64_t min_span_micros = 0;
    discover->add_option("--traces", traces, "Trace export files or directories")->required();
    discover->add_option("--infra", infra, "Infrastructure service disallowlist file");
    discover->add_option("--deployed", deployed, "Deployed-services file for sanity warnings");
    discover->add_option("--min-span-micros", min_span_micros,
                         "Drop internal spans shorter than this");
    discover->add_option("--out", graph_out, "Output graph path")->capture_default_str();

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo availability estimates");
    std::string sim_graph, sim_targets, sim_disallow, sim_out = "predictions.json";
    std::vector<double> sim_fractions = {0.1, 0.3, 0.5, 0.7, 0.9};
    std::uint64_t trials = 100000, sim_seed = 42;
    bool no_crn = false;
    simulate->add_option("--graph", sim_graph, "Graph JSON")->required();
    simulate->add_option("--targets", sim_targets, "Endpoint targets JSON")->required();
    simulate->add_option("--fractions", sim_fractions, "Failure fractions")->delimiter(',');
    simulate->add_option("--trials", trials, "Trials per fraction")->capture_default_str();
    simulate->add_option("--seed", sim_seed, "Master seed")->capture_default_str();
    simulate->add_option("--disallowlist", sim_disallow, "Services that are never killed");
    simulate->add_flag("--no-crn", no_crn, "Independent samples per semantics");
    simulate->add_option("--out", sim_out, "Output path")->capture_default_str();

    // oracle
    auto* oracle = app.add_subcommand("oracle", "Exact availability by subset enumeration");
    std::string ora_graph, ora_targets, ora_disallow, ora_out = "exact.json";
    std::vector<double> ora_fractions = {0.1, 0.3, 0.5, 0.7, 0.9};
    std::uint64_t budget = availsim::kDefaultOracleBudget;
    oracle->add_option("--graph", ora_graph, "Graph JSON")->required();
    oracle->add_option("--targets", ora_targets, "Endpoint targets JSON")->required();
    oracle->add_option("--fractions", ora_fractions, "Failure fractions")->delimiter(',');
    oracle->add_option("--disallowlist", ora_disallow, "Services that are never killed");
    oracle->add_option("--budget", budget, "Scenario budget")->capture_default_str();
    oracle->add_option("--out", ora_out, "Output path")->capture_default_str();

    // chaos
    auto* chaos = app.add_subcommand("chaos", "Emulated kill/stabilize/probe experiment");
    std::string cha_graph, cha_targets, cha_weights, cha_disallow, cha_out = "live.csv";
    std::vector<double> cha_fractions = {0.1, 0.3, 0.5, 0.7, 0.9};
    int chunks = 50, windows = 100, probes = 100;
    std::uint64_t cha_seed = 7;
    double rescue = 0.0, gray = 0.0;
    chaos->add_option("--graph", cha_graph, "Ground-truth graph JSON")->required();
    chaos->add_option("--targets", cha_targets, "Endpoint targets JSON")->required();
    chaos->add_option("--fractions", cha_fractions, "Failure fractions")->delimiter(',');
    chaos->add_option("--chunks", chunks, "Chunks per fraction")->capture_default_str();
    chaos->add_option("--windows", windows, "Windows per chunk")->capture_default_str();
    chaos->add_option("--probes", probes, "Probes per window")->capture_default_str();
    chaos->add_option("--seed", cha_seed, "Master seed")->capture_default_str();
    chaos->add_option("--rescue", rescue, "Retry/fallback rescue probability")
        ->capture_default_str();
    chaos->add_option("--gray", gray, "Gray failure probability")->capture_default_str();
    chaos->add_option("--weights", cha_weights, "Probe weights JSON (route -> weight)");
    chaos->add_option("--disallowlist", cha_disallow, "Services that are never killed");
    chaos->add_option("--out", cha_out, "Output CSV path")->capture_default_str();

    // report
    auto* report = app.add_subcommand("report", "Join predictions, oracle, and live data");
    std::string rep_predictions, rep_live, rep_exact, rep_weights, rep_out = "reports";
    report->add_option("--predictions", rep_predictions, "predictions JSON")->required();
    report->add_option("--live", rep_live, "live CSV")->required();
    report->add_option("--exact", rep_exact, "exact oracle JSON");
    report->add_option("--weights", rep_weights, "Probe weights JSON");
    report->add_option("--out-dir", rep_out, "Report directory")->capture_default_str();

    // pipeline
    auto* pipeline = app.add_subcommand("pipeline", "Run every stage on a workspace directory");
    std::string workspace, pipeline_config;
    pipeline->add_option("workspace", workspace, "Workspace directory")->required();
    pipeline->add_option("--config", pipeline_config, "Pipeline config JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return static_cast<int>(availsim::ExitCode::validation);
    }

    try {
        if (*discover) {
            return run_discover(traces, infra, deployed, min_span_micros, graph_out);
        }
        if (*simulate) {
            return run_simulate(sim_graph, sim_targets, sim_fractions, trials, sim_seed,
                                sim_disallow, no_crn, workers, sim_out);
        }
        if (*oracle) {
            return run_oracle(ora_graph, ora_targets, ora_fractions, ora_disallow, budget, ora_out);
        }
        if (*chaos) {
            return run_chaos_cmd(cha_graph, cha_targets, cha_fractions, chunks, windows, probes,
                                 cha_seed, rescue, gray, cha_weights, cha_disallow, workers,
                                 cha_out);
        }
        if (*report) {
            return run_report(rep_predictions, rep_live, rep_exact, rep_weights, rep_out);
        }
        if (*pipeline) {
            return run_pipeline_cmd(workspace, pipeline_config, workers);
        }
    } catch (const availsim::StageError& e) {
        nlohmann::ordered_json err;
        err["error"]["stage"] = e.stage();
        err["error"]["message"] = e.what();
        err["error"]["exit_code"] = static_cast<int>(e.code());
        std::cerr << err.dump() << "\n";
        return static_cast<int>(e.code());
    } catch (const availsim::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(availsim::ExitCode::validation);
    } catch (const availsim::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(availsim::ExitCode::io);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(availsim::ExitCode::stage_failure);
    }
    return 0;
}
