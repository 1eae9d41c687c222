#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "availsim/availability.hpp"
#include "availsim/sampling.hpp"
#include "availsim/util.hpp"

namespace availsim {

struct ChaosConfig {
    std::vector<double> failure_fractions = {0.1, 0.3, 0.5, 0.7, 0.9};
    int chunks = 50;
    int windows_per_chunk = 100;
    int probes_per_window = 100;
    std::map<std::string, double> probe_weights; // empty = uniform
    double retry_rescue_prob = 0.0;
    double gray_failure_prob = 0.0;
    std::uint64_t master_seed = 7;
    // Recorded for report parity with the live harness; the emulator never
    // sleeps.
    double window_seconds = 60.0;
    double stabilize_seconds = 15.0;
};

struct ProbeOutcome {
    std::int32_t fraction = 0; // index into ChaosResult::fractions
    std::int32_t chunk = 0;
    std::int32_t window = 0;
    std::int32_t probe_index = 0;
    std::int32_t route = 0; // index into ChaosResult::routes
    bool structural_success = false;
    bool recorded_success = false;
};

struct ChaosResult {
    std::vector<std::string> routes;
    std::vector<double> fractions;
    std::vector<ProbeOutcome> outcomes;
};

namespace detail {

// Integer probe counts per route for one window: largest-remainder split of
// probes_per_window across normalized weights. Ties go to the earlier route.
inline std::vector<int> apportion_probes(const std::vector<double>& weights, int probes) {
    double sum = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw ValidationError("probe weights must be >= 0");
        sum += w;
    }
    if (!(sum > 0.0)) throw ValidationError("probe weights must have a positive sum");

    std::vector<int> counts(weights.size(), 0);
    std::vector<std::pair<double, size_t>> remainders;
    int assigned = 0;
    for (size_t i = 0; i < weights.size(); ++i) {
        double quota = weights[i] / sum * probes;
        counts[i] = static_cast<int>(quota);
        assigned += counts[i];
        remainders.emplace_back(quota - counts[i], i);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (int i = 0; i < probes - assigned; ++i) {
        counts[remainders[static_cast<size_t>(i)].second]++;
    }
    return counts;
}

// Smooth weighted round-robin: over one cycle of sum(counts) picks, route i
// appears exactly counts[i] times, interleaved. The sequence is the per-window
// probe routing order.
inline std::vector<int> route_sequence(const std::vector<int>& counts, int probes) {
    std::vector<long long> current(counts.size(), 0);
    long long total = 0;
    for (int c : counts) total += c;
    std::vector<int> seq;
    seq.reserve(static_cast<size_t>(probes));
    for (int p = 0; p < probes; ++p) {
        size_t best = counts.size();
        for (size_t i = 0; i < counts.size(); ++i) {
            if (counts[i] == 0) continue;
            current[i] += counts[i];
            if (best == counts.size() || current[i] > current[best]) best = i;
        }
        current[best] -= total;
        seq.push_back(static_cast<int>(best));
    }
    return seq;
}

} // namespace detail

inline void validate_chaos_config(const ChaosConfig& config) {
    if (config.chunks < 1 || config.windows_per_chunk < 1 || config.probes_per_window < 1) {
        throw ValidationError("chaos counts must be >= 1");
    }
    if (config.retry_rescue_prob < 0.0 || config.retry_rescue_prob > 1.0 ||
        config.gray_failure_prob < 0.0 || config.gray_failure_prob > 1.0) {
        throw ValidationError("noise probabilities must be in [0, 1]");
    }
    if (config.failure_fractions.empty()) throw ValidationError("no failure fractions given");
    for (double p : config.failure_fractions) {
        if (!(p > 0.0 && p < 1.0)) throw ValidationError("failure fraction must be in (0, 1)");
    }
}

// Emulated kill/stabilize/probe experiment. One failure scenario per
// (fraction, chunk, window); probe routes follow a fixed weighted round-robin
// sequence; structural success is the all_blocking predicate on the ground
// truth graph; rescue/gray noise flips recorded_success via one uniform draw
// per probe. Outcomes come back sorted by (p_fail, chunk, window, probe).
inline ChaosResult run_chaos(const ServiceGraph& graph, const std::vector<EndpointSpec>& endpoints,
                             const ChaosConfig& config, const std::set<std::string>& disallowlist,
                             unsigned workers = 0) {
    validate_chaos_config(config);
    if (endpoints.empty()) throw ValidationError("no endpoints given");

    ReachabilityIndex ix(graph);
    std::vector<BoundEndpoint> bound = bind_endpoints(endpoints, ix);
    std::vector<std::string> eligible = eligible_set(graph, disallowlist);
    std::vector<int> eligible_idx;
    eligible_idx.reserve(eligible.size());
    for (const auto& name : eligible) eligible_idx.push_back(ix.index_of(name));
    const int n_elig = static_cast<int>(eligible.size());

    ChaosResult result;
    result.fractions = config.failure_fractions;
    std::vector<double> weights;
    for (const auto& ep : bound) {
        result.routes.push_back(ep.route);
        if (config.probe_weights.empty()) {
            weights.push_back(1.0);
        } else {
            auto it = config.probe_weights.find(ep.route);
            if (it == config.probe_weights.end()) {
                throw ValidationError("missing probe weight for route '" + ep.route + "'");
            }
            weights.push_back(it->second);
        }
    }

    std::vector<int> counts = detail::apportion_probes(weights, config.probes_per_window);
    std::vector<int> seq = detail::route_sequence(counts, config.probes_per_window);

    const std::uint64_t probes_per_window = static_cast<std::uint64_t>(config.probes_per_window);
    const std::uint64_t windows = static_cast<std::uint64_t>(config.windows_per_chunk);
    const std::uint64_t chunks = static_cast<std::uint64_t>(config.chunks);
    const std::uint64_t per_chunk = windows * probes_per_window;
    const std::uint64_t per_fraction = chunks * per_chunk;
    result.outcomes.resize(config.failure_fractions.size() * per_fraction);

    std::vector<int> kills;
    for (double p : config.failure_fractions) kills.push_back(kill_count(p, n_elig));

    auto run_chunk = [&](size_t fi, std::uint64_t chunk) {
        const int k = kills[fi];
        Bitset killed(ix.size());
        Bitset reach(ix.size()), frontier(ix.size()), next(ix.size());
        std::vector<int> scratch, chosen;
        std::vector<char> structural(bound.size());
        ProbeOutcome* out = result.outcomes.data() + fi * per_fraction + chunk * per_chunk;

        for (std::uint64_t window = 0; window < windows; ++window) {
            std::uint64_t window_counter = (fi * chunks + chunk) * windows + window;
            chosen.clear();
            SplitMix64 rng = stream_rng(config.master_seed, streams::chaos_scenario, window_counter);
            sample_index_subset(n_elig, k, rng, scratch, chosen);
            killed.clear();
            for (int c : chosen) killed.set(eligible_idx[static_cast<size_t>(c)]);

            for (size_t e = 0; e < bound.size(); ++e) {
                if (killed.test(bound[e].entry)) {
                    structural[e] = 0;
                    continue;
                }
                ix.reach_into(bound[e].entry, killed, Semantics::all_blocking, reach, frontier, next);
                structural[e] = rule_holds(bound[e], reach) ? 1 : 0;
            }

            for (std::uint64_t probe = 0; probe < probes_per_window; ++probe) {
                int route = seq[static_cast<size_t>(probe)];
                bool s = structural[static_cast<size_t>(route)] != 0;
                bool recorded = s;
                if (config.gray_failure_prob > 0.0 || config.retry_rescue_prob > 0.0) {
                    std::uint64_t probe_counter = window_counter * probes_per_window + probe;
                    double u = stream_rng(config.master_seed, streams::chaos_noise, probe_counter)
                                   .next_unit();
                    recorded = s ? u >= config.gray_failure_prob : u < config.retry_rescue_prob;
                }
                ProbeOutcome& po = out[window * probes_per_window + probe];
                po.fraction = static_cast<std::int32_t>(fi);
                po.chunk = static_cast<std::int32_t>(chunk);
                po.window = static_cast<std::int32_t>(window);
                po.probe_index = static_cast<std::int32_t>(probe);
                po.route = route;
                po.structural_success = s;
                po.recorded_success = recorded;
            }
        }
    };

    std::vector<std::pair<size_t, std::uint64_t>> jobs;
    for (size_t fi = 0; fi < config.failure_fractions.size(); ++fi) {
        for (std::uint64_t chunk = 0; chunk < chunks; ++chunk) jobs.emplace_back(fi, chunk);
    }
    unsigned n_workers = std::min<unsigned>(resolve_workers(workers), static_cast<unsigned>(jobs.size()));
    if (n_workers <= 1) {
        for (const auto& [fi, chunk] : jobs) run_chunk(fi, chunk);
    } else {
        std::atomic<size_t> next_job{0};
        std::vector<std::thread> threads;
        for (unsigned w = 0; w < n_workers; ++w) {
            threads.emplace_back([&] {
                while (true) {
                    size_t j = next_job.fetch_add(1);
                    if (j >= jobs.size()) break;
                    run_chunk(jobs[j].first, jobs[j].second);
                }
            });
        }
        for (auto& t : threads) t.join();
    }

    return result;
}

struct LiveStat {
    std::string route; // "aggregate" pools every route
    double p_fail = 0.0;
    std::uint64_t successes = 0;
    std::uint64_t probes = 0;
    double estimate = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

// Recorded-success fraction per (route, p_fail) plus the pooled aggregate per
// p_fail, with 95% normal-approximation intervals clamped to [0, 1]. Probe
// counts already realize the configured weights, so pooling is the
// probe-weighted aggregate.
inline std::vector<LiveStat> live_availability(const ChaosResult& result) {
    if (result.outcomes.empty()) throw ValidationError("no probe outcomes");
    const size_t n_routes = result.routes.size();
    const size_t n_fracs = result.fractions.size();

    std::vector<std::uint64_t> succ(n_fracs * (n_routes + 1), 0);
    std::vector<std::uint64_t> total(n_fracs * (n_routes + 1), 0);

    for (const auto& po : result.outcomes) {
        if (po.fraction < 0 || static_cast<size_t>(po.fraction) >= n_fracs) {
            throw ValidationError("probe outcome references an unknown failure fraction");
        }
        size_t fi = static_cast<size_t>(po.fraction);
        size_t route_cell = fi * (n_routes + 1) + static_cast<size_t>(po.route);
        size_t agg_cell = fi * (n_routes + 1) + n_routes;
        total[route_cell]++;
        total[agg_cell]++;
        if (po.recorded_success) {
            succ[route_cell]++;
            succ[agg_cell]++;
        }
    }

    std::vector<LiveStat> stats;
    for (size_t fi = 0; fi < n_fracs; ++fi) {
        for (size_t r = 0; r <= n_routes; ++r) {
            size_t cell = fi * (n_routes + 1) + r;
            if (total[cell] == 0) {
                if (r < n_routes) continue; // zero-weight route: no stratum
                throw ValidationError("empty aggregate stratum");
            }
            LiveStat st;
            st.route = r < n_routes ? result.routes[r] : "aggregate";
            st.p_fail = result.fractions[fi];
            st.successes = succ[cell];
            st.probes = total[cell];
            st.estimate = static_cast<double>(st.successes) / static_cast<double>(st.probes);
            double half = 1.96 * std::sqrt(st.estimate * (1.0 - st.estimate) /
                                           static_cast<double>(st.probes));
            st.ci_low = std::max(0.0, st.estimate - half);
            st.ci_high = std::min(1.0, st.estimate + half);
            stats.push_back(std::move(st));
        }
    }
    std::sort(stats.begin(), stats.end(), [](const LiveStat& a, const LiveStat& b) {
        if (a.p_fail != b.p_fail) return a.p_fail < b.p_fail;
        return a.route < b.route;
    });
    return stats;
}

inline constexpr const char* kLiveCsvHeader =
    "p_fail,chunk,window,probe_index,route,structural_success,recorded_success";

inline std::string save_live_csv(const ChaosResult& result) {
    std::string out = kLiveCsvHeader;
    out += "\n";
    for (const auto& po : result.outcomes) {
        out += fmt_double(result.fractions[static_cast<size_t>(po.fraction)]);
        out += ",";
        out += std::to_string(po.chunk);
        out += ",";
        out += std::to_string(po.window);
        out += ",";
        out += std::to_string(po.probe_index);
        out += ",";
        out += result.routes[static_cast<size_t>(po.route)];
        out += ",";
        out += po.structural_success ? "1" : "0";
        out += ",";
        out += po.recorded_success ? "1" : "0";
        out += "\n";
    }
    return out;
}

inline ChaosResult load_live_csv(const std::string& document) {
    std::vector<std::string> lines = split(document, '\n');
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty() || lines[0] != kLiveCsvHeader) {
        throw ValidationError("live.csv: missing or malformed header");
    }

    ChaosResult result;
    std::map<std::string, int> route_ids;
    std::vector<double> seen_fracs;
    for (size_t li = 1; li < lines.size(); ++li) {
        std::vector<std::string> cols = split(lines[li], ',');
        if (cols.size() != 7) {
            throw ValidationError("live.csv: line " + std::to_string(li + 1) + ": expected 7 columns");
        }
        ProbeOutcome po;
        try {
            double p = parse_double(cols[0]);
            auto fit = std::find(seen_fracs.begin(), seen_fracs.end(), p);
            if (fit == seen_fracs.end()) {
                seen_fracs.push_back(p);
                po.fraction = static_cast<std::int32_t>(seen_fracs.size() - 1);
            } else {
                po.fraction = static_cast<std::int32_t>(fit - seen_fracs.begin());
            }
            po.chunk = std::stoi(cols[1]);
            po.window = std::stoi(cols[2]);
            po.probe_index = std::stoi(cols[3]);
        } catch (const std::exception&) {
            throw ValidationError("live.csv: line " + std::to_string(li + 1) + ": bad numeric field");
        }
        if (po.chunk < 0 || po.window < 0 || po.probe_index < 0) {
            throw ValidationError("live.csv: line " + std::to_string(li + 1) + ": negative index");
        }
        if (cols[4].empty()) {
            throw ValidationError("live.csv: line " + std::to_string(li + 1) + ": empty route");
        }
        auto [it, inserted] = route_ids.try_emplace(cols[4], static_cast<int>(result.routes.size()));
        if (inserted) result.routes.push_back(cols[4]);
        po.route = it->second;
        for (int f = 5; f <= 6; ++f) {
            if (cols[static_cast<size_t>(f)] != "0" && cols[static_cast<size_t>(f)] != "1") {
                throw ValidationError("live.csv: line " + std::to_string(li + 1) +
                                      ": success flags must be 0 or 1");
            }
        }
        po.structural_success = cols[5] == "1";
        po.recorded_success = cols[6] == "1";
        result.outcomes.push_back(po);
    }

    // canonical ascending fraction order, matching run_chaos output
    std::vector<double> sorted_fracs = seen_fracs;
    std::sort(sorted_fracs.begin(), sorted_fracs.end());
    std::vector<std::int32_t> remap(seen_fracs.size());
    for (size_t i = 0; i < seen_fracs.size(); ++i) {
        remap[i] = static_cast<std::int32_t>(
            std::find(sorted_fracs.begin(), sorted_fracs.end(), seen_fracs[i]) -
            sorted_fracs.begin());
    }
    for (auto& po : result.outcomes) po.fraction = remap[static_cast<size_t>(po.fraction)];
    result.fractions = std::move(sorted_fracs);
    return result;
}

} // namespace availsim
