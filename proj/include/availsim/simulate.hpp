#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "availsim/availability.hpp"
#include "availsim/sampling.hpp"
#include "availsim/util.hpp"

namespace availsim {

struct SimulationConfig {
    std::vector<double> failure_fractions = {0.1, 0.3, 0.5, 0.7, 0.9};
    std::uint64_t trials = 100000;
    std::uint64_t master_seed = 42;
    std::set<std::string> disallowlist;
    bool common_random_numbers = true;
};

struct EstimateRecord {
    std::string route;
    Semantics semantics = Semantics::all_blocking;
    double p_fail = 0.0;
    double estimate = 0.0;
    double std_error = 0.0;
    std::uint64_t trials = 0;
    int k_used = 0;
    std::uint64_t seed = 0;

    friend bool operator==(const EstimateRecord&, const EstimateRecord&) = default;
};

inline double binomial_std_error(double estimate, std::uint64_t trials) {
    return std::sqrt(estimate * (1.0 - estimate) / static_cast<double>(trials));
}

inline void sort_records(std::vector<EstimateRecord>& records) {
    std::sort(records.begin(), records.end(), [](const EstimateRecord& a, const EstimateRecord& b) {
        if (a.route != b.route) return a.route < b.route;
        if (a.p_fail != b.p_fail) return a.p_fail < b.p_fail;
        return static_cast<int>(a.semantics) < static_cast<int>(b.semantics);
    });
}

// Monte Carlo availability per (endpoint, fraction, semantics). Trials are
// split into contiguous ranges per worker; a trial's failure set depends only
// on (master_seed, stream, trial_index), and the merge is a sum of success
// counts, so the result is identical for any worker count.
inline std::vector<EstimateRecord> estimate_availability(const ServiceGraph& graph,
                                                         const std::vector<EndpointSpec>& endpoints,
                                                         const SimulationConfig& config,
                                                         unsigned workers = 0) {
    if (config.trials < 1) throw ValidationError("trials must be >= 1");
    if (endpoints.empty()) throw ValidationError("no endpoints given");
    for (double p : config.failure_fractions) {
        if (!(p > 0.0 && p < 1.0)) throw ValidationError("failure fraction must be in (0, 1)");
    }

    ReachabilityIndex ix(graph);
    std::vector<BoundEndpoint> bound = bind_endpoints(endpoints, ix);
    std::vector<std::string> eligible = eligible_set(graph, config.disallowlist);
    std::vector<int> eligible_idx;
    eligible_idx.reserve(eligible.size());
    for (const auto& name : eligible) eligible_idx.push_back(ix.index_of(name));

    const int n_elig = static_cast<int>(eligible.size());
    const size_t n_ep = bound.size();
    const unsigned n_workers = resolve_workers(workers);

    // distinct entries share one reachability pass per scenario
    std::vector<int> entry_of(n_ep);
    std::vector<int> distinct_entries;
    for (size_t e = 0; e < n_ep; ++e) {
        int ent = bound[e].entry;
        auto it = std::find(distinct_entries.begin(), distinct_entries.end(), ent);
        if (it == distinct_entries.end()) {
            entry_of[e] = static_cast<int>(distinct_entries.size());
            distinct_entries.push_back(ent);
        } else {
            entry_of[e] = static_cast<int>(it - distinct_entries.begin());
        }
    }

    std::vector<EstimateRecord> records;
    const Semantics all_sems[2] = {Semantics::all_blocking, Semantics::async};

    for (double p : config.failure_fractions) {
        const int k = kill_count(p, n_elig);

        // success counts [endpoint][semantics], summed across workers
        std::vector<std::uint64_t> counts(n_ep * 2, 0);

        auto run_range = [&](std::uint64_t lo, std::uint64_t hi, std::vector<std::uint64_t>& local) {
            Bitset killed(ix.size());
            Bitset reach(ix.size()), frontier(ix.size()), next(ix.size());
            std::vector<int> scratch, chosen;
            for (std::uint64_t i = lo; i < hi; ++i) {
                if (config.common_random_numbers) {
                    chosen.clear();
                    SplitMix64 rng = stream_rng(config.master_seed, streams::scenario, i);
                    sample_index_subset(n_elig, k, rng, scratch, chosen);
                    killed.clear();
                    for (int c : chosen) killed.set(eligible_idx[static_cast<size_t>(c)]);
                    for (Semantics sem : all_sems) {
                        for (size_t de = 0; de < distinct_entries.size(); ++de) {
                            ix.reach_into(distinct_entries[de], killed, sem, reach, frontier, next);
                            for (size_t e = 0; e < n_ep; ++e) {
                                if (entry_of[e] != static_cast<int>(de)) continue;
                                if (!killed.test(bound[e].entry) && rule_holds(bound[e], reach)) {
                                    local[e * 2 + (sem == Semantics::async ? 1 : 0)]++;
                                }
                            }
                        }
                    }
                } else {
                    for (Semantics sem : all_sems) {
                        std::uint64_t stream = sem == Semantics::async ? streams::scenario_async
                                                                       : streams::scenario_all;
                        chosen.clear();
                        SplitMix64 rng = stream_rng(config.master_seed, stream, i);
                        sample_index_subset(n_elig, k, rng, scratch, chosen);
                        killed.clear();
                        for (int c : chosen) killed.set(eligible_idx[static_cast<size_t>(c)]);
                        for (size_t de = 0; de < distinct_entries.size(); ++de) {
                            ix.reach_into(distinct_entries[de], killed, sem, reach, frontier, next);
                            for (size_t e = 0; e < n_ep; ++e) {
                                if (entry_of[e] != static_cast<int>(de)) continue;
                                if (!killed.test(bound[e].entry) && rule_holds(bound[e], reach)) {
                                    local[e * 2 + (sem == Semantics::async ? 1 : 0)]++;
                                }
                            }
                        }
                    }
                }
            }
        };

        if (n_workers <= 1 || config.trials < 2 * n_workers) {
            run_range(0, config.trials, counts);
        } else {
            std::vector<std::vector<std::uint64_t>> partials(
                n_workers, std::vector<std::uint64_t>(n_ep * 2, 0));
            std::vector<std::thread> threads;
            std::uint64_t chunk = config.trials / n_workers;
            for (unsigned w = 0; w < n_workers; ++w) {
                std::uint64_t lo = w * chunk;
                std::uint64_t hi = w + 1 == n_workers ? config.trials : lo + chunk;
                threads.emplace_back([&, lo, hi, w] { run_range(lo, hi, partials[w]); });
            }
            for (auto& t : threads) t.join();
            for (const auto& part : partials) {
                for (size_t j = 0; j < counts.size(); ++j) counts[j] += part[j];
            }
        }

        for (size_t e = 0; e < n_ep; ++e) {
            for (Semantics sem : all_sems) {
                EstimateRecord rec;
                rec.route = bound[e].route;
                rec.semantics = sem;
                rec.p_fail = p;
                rec.trials = config.trials;
                rec.k_used = k;
                rec.seed = config.master_seed;
                std::uint64_t succ = counts[e * 2 + (sem == Semantics::async ? 1 : 0)];
                rec.estimate = static_cast<double>(succ) / static_cast<double>(config.trials);
                rec.std_error = binomial_std_error(rec.estimate, config.trials);
                records.push_back(std::move(rec));
            }
        }
    }

    sort_records(records);
    return records;
}

struct AggregateRecord {
    double p_fail = 0.0;
    Semantics semantics = Semantics::all_blocking;
    double estimate = 0.0;
};

// Probe-weighted mean of per-endpoint estimates, one row per
// (p_fail, semantics). Weights are keyed by route; pass {} for uniform.
inline std::vector<AggregateRecord> aggregate_availability(
    const std::vector<EstimateRecord>& records, const std::map<std::string, double>& weights) {
    std::map<std::pair<std::string, std::string>, std::pair<double, double>> acc; // (p,sem) -> (wsum, wx)
    std::map<std::pair<std::string, std::string>, std::pair<double, Semantics>> keys;
    for (const auto& rec : records) {
        double w = 1.0;
        if (!weights.empty()) {
            auto it = weights.find(rec.route);
            if (it == weights.end()) {
                throw ValidationError("missing weight for route '" + rec.route + "'");
            }
            if (it->second < 0.0) throw ValidationError("negative weight for route '" + rec.route + "'");
            w = it->second;
        }
        auto key = std::make_pair(fmt_double(rec.p_fail), std::string(semantics_name(rec.semantics)));
        acc[key].first += w;
        acc[key].second += w * rec.estimate;
        keys[key] = {rec.p_fail, rec.semantics};
    }
    std::vector<AggregateRecord> out;
    for (const auto& [key, sums] : acc) {
        if (sums.first <= 0.0) throw ValidationError("weights must have a positive sum");
        out.push_back({keys[key].first, keys[key].second, sums.second / sums.first});
    }
    std::sort(out.begin(), out.end(), [](const AggregateRecord& a, const AggregateRecord& b) {
        if (a.p_fail != b.p_fail) return a.p_fail < b.p_fail;
        return static_cast<int>(a.semantics) < static_cast<int>(b.semantics);
    });
    return out;
}

// ---- predictions.json ----

inline nlohmann::ordered_json record_to_json(const EstimateRecord& rec) {
    nlohmann::ordered_json j;
    j["route"] = rec.route;
    j["semantics"] = semantics_name(rec.semantics);
    j["p_fail"] = rec.p_fail;
    j["estimate"] = rec.estimate;
    j["std_error"] = rec.std_error;
    j["trials"] = rec.trials;
    j["k_used"] = rec.k_used;
    j["seed"] = rec.seed;
    return j;
}

inline std::string save_records(const std::vector<EstimateRecord>& records) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& rec : records) arr.push_back(record_to_json(rec));
    return arr.dump(2) + "\n";
}

inline std::vector<EstimateRecord> load_records(const std::string& document) {
    nlohmann::json doc = detail::parse_json(document, "predictions.json");
    if (!doc.is_array()) throw ValidationError("predictions.json: top level must be an array");
    std::vector<EstimateRecord> records;
    for (const auto& j : doc) {
        if (!j.is_object()) throw ValidationError("predictions.json: records must be objects");
        EstimateRecord rec;
        try {
            rec.route = j.at("route").get<std::string>();
            rec.semantics = parse_semantics(j.at("semantics").get<std::string>());
            rec.p_fail = j.at("p_fail").get<double>();
            rec.estimate = j.at("estimate").get<double>();
            rec.std_error = j.at("std_error").get<double>();
            rec.trials = j.at("trials").get<std::uint64_t>();
            rec.k_used = j.at("k_used").get<int>();
            rec.seed = j.at("seed").get<std::uint64_t>();
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(std::string("predictions.json: bad record: ") + e.what());
        }
        records.push_back(std::move(rec));
    }
    return records;
}

} // namespace availsim
