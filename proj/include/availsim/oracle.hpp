#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "availsim/availability.hpp"
#include "availsim/sampling.hpp"
#include "availsim/simulate.hpp"

namespace availsim {

struct ExactResult {
    std::uint64_t successes = 0;
    std::uint64_t total = 0;

    double value() const { return static_cast<double>(successes) / static_cast<double>(total); }
};

// C(n, k) with overflow and budget guards. Returns nullopt if the count
// exceeds `budget` (or uint64 range), so callers can refuse early instead of
// starting an enumeration that will never finish.
inline std::optional<std::uint64_t> binomial_within(std::uint64_t n, std::uint64_t k,
                                                    std::uint64_t budget) {
    if (k > n) return 0;
    if (k > n - k) k = n - k;
    std::uint64_t result = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        std::uint64_t num = n - k + i;
        // result * num / i is always integral at this point
        if (result > std::numeric_limits<std::uint64_t>::max() / num) return std::nullopt;
        result = result * num / i;
        if (result > budget) return std::nullopt;
    }
    return result;
}

constexpr std::uint64_t kDefaultOracleBudget = 10000000;

// Enumerates every k-subset of the eligible set in lexicographic order and
// counts endpoint successes exactly. Integer counts, no accumulated float
// error; total == C(n_eligible, k).
inline std::vector<ExactResult> exact_counts(const ServiceGraph& graph,
                                             const std::vector<EndpointSpec>& endpoints,
                                             const std::set<std::string>& disallowlist, int k,
                                             Semantics sem,
                                             std::uint64_t budget = kDefaultOracleBudget) {
    ReachabilityIndex ix(graph);
    std::vector<BoundEndpoint> bound = bind_endpoints(endpoints, ix);
    std::vector<std::string> eligible = eligible_set(graph, disallowlist);
    const int n = static_cast<int>(eligible.size());
    if (k < 1 || k > n) throw ValidationError("kill count out of range for exact enumeration");

    auto combos = binomial_within(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(k), budget);
    if (!combos) {
        throw ValidationError("exact enumeration would exceed the scenario budget (" +
                              std::to_string(budget) + "); reduce k or raise the budget");
    }

    std::vector<int> eligible_idx;
    eligible_idx.reserve(eligible.size());
    for (const auto& name : eligible) eligible_idx.push_back(ix.index_of(name));

    std::vector<ExactResult> results(bound.size());
    for (auto& r : results) r.total = *combos;

    std::vector<int> comb(k);
    for (int i = 0; i < k; ++i) comb[i] = i;

    Bitset killed(ix.size());
    Bitset reach(ix.size()), frontier(ix.size()), next(ix.size());

    while (true) {
        killed.clear();
        for (int c : comb) killed.set(eligible_idx[static_cast<size_t>(c)]);
        for (size_t e = 0; e < bound.size(); ++e) {
            if (killed.test(bound[e].entry)) continue;
            ix.reach_into(bound[e].entry, killed, sem, reach, frontier, next);
            if (rule_holds(bound[e], reach)) results[e].successes++;
        }

        // next combination in lexicographic order
        int i = k - 1;
        while (i >= 0 && comb[i] == n - k + i) --i;
        if (i < 0) break;
        comb[i]++;
        for (int j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
    }

    return results;
}

inline ExactResult exact_availability(const ServiceGraph& graph, const EndpointSpec& endpoint,
                                      const std::set<std::string>& disallowlist, int k,
                                      Semantics sem,
                                      std::uint64_t budget = kDefaultOracleBudget) {
    return exact_counts(graph, {endpoint}, disallowlist, k, sem, budget)[0];
}

// Exact async minus all_blocking availability for one endpoint and kill
// count. Never positive: removing async edges can only lose reachability.
inline double exact_delta(const ServiceGraph& graph, const EndpointSpec& endpoint,
                          const std::set<std::string>& disallowlist, int k,
                          std::uint64_t budget = kDefaultOracleBudget) {
    ExactResult all = exact_availability(graph, endpoint, disallowlist, k, Semantics::all_blocking, budget);
    ExactResult async = exact_availability(graph, endpoint, disallowlist, k, Semantics::async, budget);
    return async.value() - all.value();
}

// Exact analogue of estimate_availability: same record shape, std_error = 0,
// trials = C(n, k), seed = 0 (the oracle draws nothing).
inline std::vector<EstimateRecord> oracle_records(const ServiceGraph& graph,
                                                  const std::vector<EndpointSpec>& endpoints,
                                                  const std::vector<double>& failure_fractions,
                                                  const std::set<std::string>& disallowlist,
                                                  std::uint64_t budget = kDefaultOracleBudget) {
    if (endpoints.empty()) throw ValidationError("no endpoints given");
    std::vector<std::string> eligible = eligible_set(graph, disallowlist);
    const int n = static_cast<int>(eligible.size());

    std::vector<EstimateRecord> records;
    for (double p : failure_fractions) {
        const int k = kill_count(p, n);
        for (Semantics sem : {Semantics::all_blocking, Semantics::async}) {
            std::vector<ExactResult> exact = exact_counts(graph, endpoints, disallowlist, k, sem, budget);
            for (size_t e = 0; e < endpoints.size(); ++e) {
                EstimateRecord rec;
                rec.route = endpoints[e].route;
                rec.semantics = sem;
                rec.p_fail = p;
                rec.estimate = exact[e].value();
                rec.std_error = 0.0;
                rec.trials = exact[e].total;
                rec.k_used = k;
                rec.seed = 0;
                records.push_back(std::move(rec));
            }
        }
    }
    sort_records(records);
    return records;
}

} // namespace availsim
