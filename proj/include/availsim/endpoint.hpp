#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "availsim/graph.hpp"

namespace availsim {

enum class RuleType { all_of, any_of, k_of_n };

inline const char* rule_name(RuleType t) {
    switch (t) {
        case RuleType::all_of: return "all_of";
        case RuleType::any_of: return "any_of";
        case RuleType::k_of_n: return "k_of_n";
    }
    return "?";
}

struct EndpointSpec {
    std::string route;                 // e.g. "GET /api/cart"
    std::string entry;                 // service receiving the request
    std::vector<std::string> targets;  // distinct, sorted
    RuleType rule = RuleType::all_of;
    int k = 0;                         // meaningful for k_of_n only

    friend bool operator==(const EndpointSpec&, const EndpointSpec&) = default;
};

// Normalizes targets (duplicates collapse; k_of_n counts distinct services)
// and checks rule arity. Graph membership is checked separately at bind time.
inline void normalize_endpoint(EndpointSpec& ep) {
    if (ep.route.empty()) throw ValidationError("endpoint route must be non-empty");
    if (ep.entry.empty()) throw ValidationError("endpoint '" + ep.route + "': empty entry");
    std::sort(ep.targets.begin(), ep.targets.end());
    ep.targets.erase(std::unique(ep.targets.begin(), ep.targets.end()), ep.targets.end());
    if (ep.targets.empty()) throw ValidationError("endpoint '" + ep.route + "': empty target set");
    if (ep.rule == RuleType::k_of_n) {
        if (ep.k < 1 || ep.k > static_cast<int>(ep.targets.size())) {
            throw ValidationError("endpoint '" + ep.route + "': k must be in [1, " +
                                  std::to_string(ep.targets.size()) + "]");
        }
    }
}

inline void bind_endpoints(const std::vector<EndpointSpec>& endpoints, const ServiceGraph& graph) {
    for (const auto& ep : endpoints) {
        if (!graph.has_service(ep.entry)) {
            throw ValidationError("endpoint '" + ep.route + "': entry service '" + ep.entry +
                                  "' not in graph");
        }
        for (const auto& t : ep.targets) {
            if (!graph.has_service(t)) {
                throw ValidationError("endpoint '" + ep.route + "': target service '" + t +
                                      "' not in graph");
            }
        }
    }
}

// targets.json: { "<route>": { "entry": ..., "targets": [...],
//                              "rule": {"type": ..., "k": <iff k_of_n>} } }
// Returned endpoints are sorted by route so downstream output is stable.
inline std::vector<EndpointSpec> load_targets(const std::string& document) {
    nlohmann::json doc = detail::parse_json(document, "targets.json");
    if (!doc.is_object()) throw ValidationError("targets.json: top level must be an object");

    std::vector<EndpointSpec> endpoints;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        const auto& body = it.value();
        if (!body.is_object()) throw ValidationError("targets.json: route '" + it.key() + "' must map to an object");
        detail::reject_unknown_keys(body, {"entry", "targets", "rule"}, "targets.json route");
        if (!body.contains("entry") || !body["entry"].is_string()) {
            throw ValidationError("targets.json: route '" + it.key() + "' missing string 'entry'");
        }
        if (!body.contains("targets") || !body["targets"].is_array()) {
            throw ValidationError("targets.json: route '" + it.key() + "' missing 'targets' array");
        }
        if (!body.contains("rule") || !body["rule"].is_object()) {
            throw ValidationError("targets.json: route '" + it.key() + "' missing 'rule' object");
        }

        EndpointSpec ep;
        ep.route = it.key();
        ep.entry = body["entry"].get<std::string>();
        for (const auto& t : body["targets"]) {
            if (!t.is_string()) throw ValidationError("targets.json: targets must be strings");
            ep.targets.push_back(t.get<std::string>());
        }

        const auto& rule = body["rule"];
        detail::reject_unknown_keys(rule, {"type", "k"}, "targets.json rule");
        if (!rule.contains("type") || !rule["type"].is_string()) {
            throw ValidationError("targets.json: route '" + it.key() + "' rule missing 'type'");
        }
        std::string type = rule["type"].get<std::string>();
        if (type == "all_of") ep.rule = RuleType::all_of;
        else if (type == "any_of") ep.rule = RuleType::any_of;
        else if (type == "k_of_n") ep.rule = RuleType::k_of_n;
        else throw ValidationError("targets.json: unknown rule type '" + type + "'");

        if (ep.rule == RuleType::k_of_n) {
            if (!rule.contains("k") || !rule["k"].is_number_integer()) {
                throw ValidationError("targets.json: route '" + it.key() + "' k_of_n needs integer 'k'");
            }
            ep.k = rule["k"].get<int>();
        } else if (rule.contains("k")) {
            throw ValidationError("targets.json: route '" + it.key() + "': 'k' is only valid for k_of_n");
        }

        normalize_endpoint(ep);
        endpoints.push_back(std::move(ep));
    }

    std::sort(endpoints.begin(), endpoints.end(),
              [](const EndpointSpec& a, const EndpointSpec& b) { return a.route < b.route; });
    return endpoints;
}

} // namespace availsim
