#pragma once

#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "availsim/graph.hpp"
#include "availsim/rng.hpp"

namespace availsim {

// Services that may be killed, lexicographically ordered.
inline std::vector<std::string> eligible_set(const ServiceGraph& graph,
                                             const std::set<std::string>& disallowlist) {
    std::vector<std::string> out;
    for (const auto& s : graph.services()) {
        if (!disallowlist.count(s.name)) out.push_back(s.name);
    }
    if (out.empty()) throw ValidationError("no eligible services (disallowlist covers the graph)");
    return out;
}

// Kill-set size for a failure fraction: round-half-up of p*n with a floor of
// one. The 1e-9 nudge absorbs binary representation error so decimal half
// cases (0.3 * 15 = 4.5) round up as intended.
inline int kill_count(double p_fail, int n_eligible) {
    if (!(p_fail > 0.0 && p_fail < 1.0)) {
        throw ValidationError("failure fraction must be in (0, 1)");
    }
    if (n_eligible < 1) throw ValidationError("eligible set must be non-empty");
    int k = static_cast<int>(std::floor(p_fail * n_eligible + 0.5 + 1e-9));
    if (k < 1) k = 1;
    if (k > n_eligible) k = n_eligible;
    return k;
}

// Uniform k-subset of the eligible set, fully determined by
// (master_seed, stream, trial_index). Returned indices are sorted.
inline std::vector<int> sample_failure_indices(int n_eligible, int k, std::uint64_t master_seed,
                                               std::uint64_t stream, std::uint64_t trial_index) {
    if (k < 1 || k > n_eligible) throw ValidationError("subset size out of range");
    SplitMix64 rng = stream_rng(master_seed, stream, trial_index);
    std::vector<int> scratch, out;
    out.reserve(static_cast<size_t>(k));
    sample_index_subset(n_eligible, k, rng, scratch, out);
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<std::string> sample_failure_set(const std::vector<std::string>& eligible,
                                                   int k, std::uint64_t master_seed,
                                                   std::uint64_t trial_index) {
    auto idx = sample_failure_indices(static_cast<int>(eligible.size()), k, master_seed,
                                      streams::scenario, trial_index);
    std::vector<std::string> out;
    out.reserve(idx.size());
    for (int i : idx) out.push_back(eligible[static_cast<size_t>(i)]);
    return out;
}

} // namespace availsim
