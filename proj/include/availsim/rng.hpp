#pragma once

#include <cstdint>
#include <vector>

namespace availsim {

// Counter-based randomness. Every sampled object is a pure function of
// (master_seed, stream, counter), so trials can be partitioned across any
// number of workers without changing results. The generator is SplitMix64
// (Steele et al. finalizer); its output sequence is part of the tool's
// compatibility contract and must not change between releases.

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, bound), unbiased via rejection of the wrap-around band.
    std::uint64_t next_below(std::uint64_t bound) {
        std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            std::uint64_t x = next();
            if (x >= threshold) return x % bound;
        }
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

// Stream ids keep scenario sampling, independent-semantics resampling and
// probe-noise draws on disjoint substreams of the same master seed.
namespace streams {
inline constexpr std::uint64_t scenario = 0;          // CRN scenario stream
inline constexpr std::uint64_t scenario_all = 1;      // independent sampling, all-blocking
inline constexpr std::uint64_t scenario_async = 2;    // independent sampling, async
inline constexpr std::uint64_t chaos_scenario = 16;
inline constexpr std::uint64_t chaos_noise = 17;
} // namespace streams

inline SplitMix64 stream_rng(std::uint64_t master_seed, std::uint64_t stream,
                             std::uint64_t counter) {
    return SplitMix64(mix64(mix64(mix64(master_seed) ^ stream) ^ counter));
}

// First k cells of a Fisher-Yates shuffle of [0, n): a uniform k-subset.
// Appends the chosen indices (unsorted) to `out`.
inline void sample_index_subset(int n, int k, SplitMix64& rng, std::vector<int>& scratch,
                                std::vector<int>& out) {
    scratch.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) scratch[static_cast<size_t>(i)] = i;
    for (int j = 0; j < k; ++j) {
        std::uint64_t r = rng.next_below(static_cast<std::uint64_t>(n - j));
        std::swap(scratch[static_cast<size_t>(j)], scratch[static_cast<size_t>(j) + r]);
        out.push_back(scratch[static_cast<size_t>(j)]);
    }
}

} // namespace availsim
