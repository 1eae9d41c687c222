#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "availsim/errors.hpp"

namespace availsim {

struct ServiceNode {
    std::string name;
    int replicas = 1;

    friend bool operator==(const ServiceNode&, const ServiceNode&) = default;
};

struct Edge {
    std::string source;
    std::string target;
    bool is_async = false;

    friend bool operator==(const Edge&, const Edge&) = default;
};

// Immutable service dependency graph. Services are kept sorted by name and
// edges by (source, target); construction validates all invariants, so any
// live instance is well-formed.
class ServiceGraph {
public:
    ServiceGraph() = default;

    static ServiceGraph create(std::vector<ServiceNode> services, std::vector<Edge> edges) {
        std::sort(services.begin(), services.end(),
                  [](const ServiceNode& a, const ServiceNode& b) { return a.name < b.name; });
        std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
            return std::tie(a.source, a.target) < std::tie(b.source, b.target);
        });

        std::set<std::string> names;
        for (const auto& s : services) {
            if (s.name.empty()) throw ValidationError("service name must be non-empty");
            if (s.replicas < 1) {
                throw ValidationError("service '" + s.name + "': replicas must be >= 1");
            }
            if (!names.insert(s.name).second) {
                throw ValidationError("duplicate service name: '" + s.name + "'");
            }
        }
        for (size_t i = 0; i + 1 < edges.size(); ++i) {
            if (edges[i].source == edges[i + 1].source && edges[i].target == edges[i + 1].target) {
                throw ValidationError("duplicate edge: " + edges[i].source + " -> " +
                                      edges[i].target);
            }
        }
        for (const auto& e : edges) {
            if (!names.count(e.source)) throw ValidationError("unknown edge source: '" + e.source + "'");
            if (!names.count(e.target)) throw ValidationError("unknown edge target: '" + e.target + "'");
            if (e.source == e.target) throw ValidationError("self-loop edge on '" + e.source + "'");
        }

        ServiceGraph g;
        g.services_ = std::move(services);
        g.edges_ = std::move(edges);
        return g;
    }

    const std::vector<ServiceNode>& services() const { return services_; }
    const std::vector<Edge>& edges() const { return edges_; }

    bool has_service(const std::string& name) const {
        return std::binary_search(
            services_.begin(), services_.end(), name,
            [](const auto& a, const auto& b) { return service_name(a) < service_name(b); });
    }

    size_t async_edge_count() const {
        size_t n = 0;
        for (const auto& e : edges_) n += e.is_async ? 1 : 0;
        return n;
    }

    friend bool operator==(const ServiceGraph&, const ServiceGraph&) = default;

private:
    static const std::string& service_name(const ServiceNode& s) { return s.name; }
    static const std::string& service_name(const std::string& s) { return s; }

    std::vector<ServiceNode> services_;
    std::vector<Edge> edges_;
};

// Accumulates services and an edge multiset, then dedups into a ServiceGraph.
// When the same (source, target) pair is seen both sync and async, the merged
// edge is synchronous: a blocking dependency observed anywhere gates success.
class GraphBuilder {
public:
    void add_service(const std::string& name, int replicas = 1) {
        auto [it, inserted] = replicas_.emplace(name, replicas);
        if (!inserted && replicas > it->second) it->second = replicas;
    }

    void add_edge(const std::string& source, const std::string& target, bool is_async) {
        if (source == target) return; // same-service pairs carry no dependency
        add_service(source);
        add_service(target);
        auto [it, inserted] = async_.emplace(std::make_pair(source, target), is_async);
        if (!inserted) it->second = it->second && is_async;
    }

    bool empty() const { return replicas_.empty(); }

    ServiceGraph build() const {
        std::vector<ServiceNode> services;
        services.reserve(replicas_.size());
        for (const auto& [name, r] : replicas_) services.push_back({name, r});
        std::vector<Edge> edges;
        edges.reserve(async_.size());
        for (const auto& [key, is_async] : async_) edges.push_back({key.first, key.second, is_async});
        return ServiceGraph::create(std::move(services), std::move(edges));
    }

private:
    std::map<std::string, int> replicas_;
    std::map<std::pair<std::string, std::string>, bool> async_;
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                                const char* context) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed) {
            if (it.key() == k) { known = true; break; }
        }
        if (!known) {
            throw ValidationError(std::string(context) + ": unknown key '" + it.key() + "'");
        }
    }
}

inline nlohmann::json parse_json(const std::string& text, const char* what) {
    if (text.size() >= 3 && static_cast<unsigned char>(text[0]) == 0xEF &&
        static_cast<unsigned char>(text[1]) == 0xBB && static_cast<unsigned char>(text[2]) == 0xBF) {
        throw ValidationError(std::string(what) + ": UTF-8 BOM not allowed");
    }
    nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw ValidationError(std::string(what) + ": malformed JSON");
    return doc;
}

} // namespace detail

// Parses and validates a graph.json document. Strict: unknown keys are
// rejected and replicas > 1, while legal in the schema, is not simulatable
// and is refused here.
inline ServiceGraph load_graph(const std::string& document) {
    nlohmann::json doc = detail::parse_json(document, "graph.json");
    if (!doc.is_object()) throw ValidationError("graph.json: top level must be an object");
    detail::reject_unknown_keys(doc, {"services", "edges"}, "graph.json");
    if (!doc.contains("services") || !doc["services"].is_array()) {
        throw ValidationError("graph.json: missing 'services' array");
    }
    if (!doc.contains("edges") || !doc["edges"].is_array()) {
        throw ValidationError("graph.json: missing 'edges' array");
    }

    std::vector<ServiceNode> services;
    for (const auto& s : doc["services"]) {
        if (!s.is_object()) throw ValidationError("graph.json: service entries must be objects");
        detail::reject_unknown_keys(s, {"name", "replicas"}, "graph.json service");
        if (!s.contains("name") || !s["name"].is_string()) {
            throw ValidationError("graph.json: service missing string 'name'");
        }
        ServiceNode node;
        node.name = s["name"].get<std::string>();
        if (s.contains("replicas")) {
            if (!s["replicas"].is_number_integer()) {
                throw ValidationError("graph.json: 'replicas' must be an integer");
            }
            node.replicas = s["replicas"].get<int>();
        }
        if (node.replicas > 1) {
            throw ValidationError("service '" + node.name +
                                  "': replicas > 1 not supported (failure semantics undefined)");
        }
        services.push_back(std::move(node));
    }

    std::vector<Edge> edges;
    for (const auto& e : doc["edges"]) {
        if (!e.is_object()) throw ValidationError("graph.json: edge entries must be objects");
        detail::reject_unknown_keys(e, {"source", "target", "async"}, "graph.json edge");
        if (!e.contains("source") || !e["source"].is_string() || !e.contains("target") ||
            !e["target"].is_string()) {
            throw ValidationError("graph.json: edge missing string 'source'/'target'");
        }
        Edge edge;
        edge.source = e["source"].get<std::string>();
        edge.target = e["target"].get<std::string>();
        if (e.contains("async")) {
            if (!e["async"].is_boolean()) throw ValidationError("graph.json: 'async' must be a boolean");
            edge.is_async = e["async"].get<bool>();
        }
        edges.push_back(std::move(edge));
    }

    return ServiceGraph::create(std::move(services), std::move(edges));
}

// Serializes in canonical order (services by name, edges by (source, target)),
// so equal graphs produce byte-identical documents.
inline std::string save_graph(const ServiceGraph& graph) {
    nlohmann::ordered_json doc;
    doc["services"] = nlohmann::ordered_json::array();
    for (const auto& s : graph.services()) {
        doc["services"].push_back({{"name", s.name}, {"replicas", s.replicas}});
    }
    doc["edges"] = nlohmann::ordered_json::array();
    for (const auto& e : graph.edges()) {
        doc["edges"].push_back({{"source", e.source}, {"target", e.target}, {"async", e.is_async}});
    }
    return doc.dump(2) + "\n";
}

} // namespace availsim
