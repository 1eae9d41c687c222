#pragma once

#include <bit>
#include <cstdint>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "availsim/endpoint.hpp"
#include "availsim/graph.hpp"

namespace availsim {

enum class Semantics { all_blocking, async };

inline const char* semantics_name(Semantics s) {
    return s == Semantics::all_blocking ? "all_blocking" : "async";
}

inline Semantics parse_semantics(const std::string& s) {
    if (s == "all_blocking") return Semantics::all_blocking;
    if (s == "async") return Semantics::async;
    throw ValidationError("unknown semantics: '" + s + "'");
}

struct FailureScenario {
    std::set<std::string> killed;
};

// Word-packed dynamic bitset sized for graphs, not generality.
class Bitset {
public:
    Bitset() = default;
    explicit Bitset(int nbits) : nbits_(nbits), words_(word_count(nbits), 0) {}

    int size() const { return nbits_; }
    void set(int i) { words_[static_cast<size_t>(i >> 6)] |= 1ULL << (i & 63); }
    void reset(int i) { words_[static_cast<size_t>(i >> 6)] &= ~(1ULL << (i & 63)); }
    bool test(int i) const { return (words_[static_cast<size_t>(i >> 6)] >> (i & 63)) & 1ULL; }

    void clear() { std::fill(words_.begin(), words_.end(), 0); }

    bool any() const {
        for (auto w : words_) if (w) return true;
        return false;
    }

    int count() const {
        int n = 0;
        for (auto w : words_) n += std::popcount(w);
        return n;
    }

    int count_and(const Bitset& other) const {
        int n = 0;
        for (size_t i = 0; i < words_.size(); ++i) n += std::popcount(words_[i] & other.words_[i]);
        return n;
    }

    bool intersects(const Bitset& other) const {
        for (size_t i = 0; i < words_.size(); ++i) {
            if (words_[i] & other.words_[i]) return true;
        }
        return false;
    }

    // this ⊆ other
    bool subset_of(const Bitset& other) const {
        for (size_t i = 0; i < words_.size(); ++i) {
            if (words_[i] & ~other.words_[i]) return false;
        }
        return true;
    }

    void or_with(const Bitset& other) {
        for (size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
    }

    void and_with(const Bitset& other) {
        for (size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
    }

    void and_not(const Bitset& other) {
        for (size_t i = 0; i < words_.size(); ++i) words_[i] &= ~other.words_[i];
    }

    template <typename Fn>
    void for_each(Fn&& fn) const {
        for (size_t wi = 0; wi < words_.size(); ++wi) {
            std::uint64_t w = words_[wi];
            while (w) {
                int bit = std::countr_zero(w);
                fn(static_cast<int>(wi * 64) + bit);
                w &= w - 1;
            }
        }
    }

    friend bool operator==(const Bitset&, const Bitset&) = default;

private:
    static size_t word_count(int nbits) { return static_cast<size_t>(nbits + 63) / 64; }

    int nbits_ = 0;
    std::vector<std::uint64_t> words_;
};

// Index-based view of a ServiceGraph for repeated reachability queries.
// Adjacency is stored as per-node bitsets, once with all edges and once with
// async edges excluded; a query picks the set matching its semantics.
class ReachabilityIndex {
public:
    explicit ReachabilityIndex(const ServiceGraph& graph) {
        names_.reserve(graph.services().size());
        for (const auto& s : graph.services()) {
            index_.emplace(s.name, static_cast<int>(names_.size()));
            names_.push_back(s.name);
        }
        int n = size();
        adj_all_.assign(static_cast<size_t>(n), Bitset(n));
        adj_sync_.assign(static_cast<size_t>(n), Bitset(n));
        for (const auto& e : graph.edges()) {
            int s = index_.at(e.source);
            int t = index_.at(e.target);
            adj_all_[static_cast<size_t>(s)].set(t);
            if (!e.is_async) adj_sync_[static_cast<size_t>(s)].set(t);
        }
    }

    int size() const { return static_cast<int>(names_.size()); }
    const std::vector<std::string>& names() const { return names_; }

    int index_of(const std::string& name) const {
        auto it = index_.find(name);
        return it == index_.end() ? -1 : it->second;
    }

    // Directed reachability from `entry` over services not in `killed`,
    // including entry itself. Caller provides scratch buffers so hot loops
    // stay allocation-free.
    void reach_into(int entry, const Bitset& killed, Semantics sem, Bitset& out,
                    Bitset& frontier, Bitset& next) const {
        out.clear();
        if (entry < 0 || killed.test(entry)) return;
        const auto& adj = sem == Semantics::async ? adj_sync_ : adj_all_;
        out.set(entry);
        frontier.clear();
        frontier.set(entry);
        while (frontier.any()) {
            next.clear();
            frontier.for_each([&](int u) { next.or_with(adj[static_cast<size_t>(u)]); });
            next.and_not(killed);
            next.and_not(out);
            out.or_with(next);
            std::swap(frontier, next);
        }
    }

    Bitset reach(int entry, const Bitset& killed, Semantics sem) const {
        Bitset out(size()), frontier(size()), next(size());
        reach_into(entry, killed, sem, out, frontier, next);
        return out;
    }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, int> index_;
    std::vector<Bitset> adj_all_;
    std::vector<Bitset> adj_sync_;
};

// Endpoint resolved against a ReachabilityIndex.
struct BoundEndpoint {
    std::string route;
    int entry = -1;
    Bitset targets;
    int n_targets = 0;
    RuleType rule = RuleType::all_of;
    int k = 0;
};

inline BoundEndpoint bind_endpoint(const EndpointSpec& ep, const ReachabilityIndex& ix) {
    BoundEndpoint b;
    b.route = ep.route;
    b.entry = ix.index_of(ep.entry);
    if (b.entry < 0) {
        throw ValidationError("endpoint '" + ep.route + "': entry service '" + ep.entry +
                              "' not in graph");
    }
    b.targets = Bitset(ix.size());
    for (const auto& t : ep.targets) {
        int ti = ix.index_of(t);
        if (ti < 0) {
            throw ValidationError("endpoint '" + ep.route + "': target service '" + t +
                                  "' not in graph");
        }
        b.targets.set(ti);
    }
    b.n_targets = b.targets.count();
    b.rule = ep.rule;
    b.k = ep.rule == RuleType::all_of   ? b.n_targets
          : ep.rule == RuleType::any_of ? 1
                                        : ep.k;
    return b;
}

inline std::vector<BoundEndpoint> bind_endpoints(const std::vector<EndpointSpec>& eps,
                                                 const ReachabilityIndex& ix) {
    std::vector<BoundEndpoint> out;
    out.reserve(eps.size());
    for (const auto& ep : eps) out.push_back(bind_endpoint(ep, ix));
    return out;
}

// Every rule reduces to "at least k distinct targets reachable".
inline bool rule_holds(const BoundEndpoint& ep, const Bitset& reach) {
    return ep.targets.count_and(reach) >= ep.k;
}

inline bool endpoint_success(const ReachabilityIndex& ix, const BoundEndpoint& ep,
                             const Bitset& killed, Semantics sem) {
    if (killed.test(ep.entry)) return false;
    return rule_holds(ep, ix.reach(ep.entry, killed, sem));
}

// ---- graph-level operations ----

inline void validate_scenario(const ServiceGraph& graph, const FailureScenario& scenario) {
    for (const auto& name : scenario.killed) {
        if (!graph.has_service(name)) {
            throw ValidationError("killed service '" + name + "' not in graph");
        }
    }
}

// Removes the killed services (with their incident edges) and, under async
// semantics, every async edge.
inline ServiceGraph alive_graph(const ServiceGraph& graph, const FailureScenario& scenario,
                                Semantics sem) {
    validate_scenario(graph, scenario);
    std::vector<ServiceNode> services;
    for (const auto& s : graph.services()) {
        if (!scenario.killed.count(s.name)) services.push_back(s);
    }
    std::vector<Edge> edges;
    for (const auto& e : graph.edges()) {
        if (scenario.killed.count(e.source) || scenario.killed.count(e.target)) continue;
        if (sem == Semantics::async && e.is_async) continue;
        edges.push_back(e);
    }
    return ServiceGraph::create(std::move(services), std::move(edges));
}

// BFS over the graph as given; an absent start yields the empty set.
inline std::set<std::string> reachable_from(const ServiceGraph& graph, const std::string& start) {
    if (!graph.has_service(start)) return {};
    ReachabilityIndex ix(graph);
    Bitset none(ix.size());
    Bitset r = ix.reach(ix.index_of(start), none, Semantics::all_blocking);
    std::set<std::string> out;
    r.for_each([&](int i) { out.insert(ix.names()[static_cast<size_t>(i)]); });
    return out;
}

inline bool endpoint_success(const ServiceGraph& graph, const EndpointSpec& endpoint,
                             const FailureScenario& scenario, Semantics sem) {
    if (scenario.killed.count(endpoint.entry)) return false;
    ServiceGraph alive = alive_graph(graph, scenario, sem);
    std::set<std::string> reach = reachable_from(alive, endpoint.entry);
    int hit = 0;
    for (const auto& t : endpoint.targets) hit += reach.count(t) ? 1 : 0;
    switch (endpoint.rule) {
        case RuleType::all_of: return hit == static_cast<int>(endpoint.targets.size());
        case RuleType::any_of: return hit >= 1;
        case RuleType::k_of_n: return hit >= endpoint.k;
    }
    return false;
}

} // namespace availsim
