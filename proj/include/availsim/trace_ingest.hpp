#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "availsim/graph.hpp"

namespace availsim {

enum class SpanKind { internal, server, client, producer, consumer, unspecified };

inline SpanKind parse_span_kind(const std::string& s) {
    if (s == "internal") return SpanKind::internal;
    if (s == "server") return SpanKind::server;
    if (s == "client") return SpanKind::client;
    if (s == "producer") return SpanKind::producer;
    if (s == "consumer") return SpanKind::consumer;
    return SpanKind::unspecified;
}

struct SpanRecord {
    std::string trace_id;
    std::string span_id;
    std::optional<std::string> parent_span_id; // resolved within the trace, else empty
    std::string service_name;
    SpanKind kind = SpanKind::unspecified;
    std::map<std::string, std::string> attributes;
    std::uint64_t duration_micros = 0;
};

struct IngestConfig {
    std::set<std::string> infra_services;
    std::uint64_t min_span_duration_micros = 0;
    std::set<std::string> broker_systems = {"kafka"};
};

namespace detail {

inline std::string tag_value_to_string(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    if (v.is_number()) return nlohmann::json(v).dump();
    return v.dump();
}

} // namespace detail

// Parses a Jaeger-style trace export. Reads the keys it understands and
// ignores the rest (real exports carry operationName, startTime, logs, ...).
// A CHILD_OF reference is resolved within its own trace; a dangling reference
// leaves the span parentless, so downstream treats it as a root.
inline std::vector<SpanRecord> parse_trace_export(const std::string& document) {
    nlohmann::json doc = detail::parse_json(document, "trace export");
    if (!doc.is_object() || !doc.contains("data") || !doc["data"].is_array()) {
        throw ValidationError("trace export: missing 'data' array");
    }

    std::vector<SpanRecord> records;
    for (const auto& trace : doc["data"]) {
        if (!trace.is_object()) throw ValidationError("trace export: trace entries must be objects");
        std::string trace_id =
            trace.contains("traceID") && trace["traceID"].is_string() ? trace["traceID"].get<std::string>() : "";

        std::unordered_map<std::string, std::string> process_service;
        if (trace.contains("processes") && trace["processes"].is_object()) {
            for (auto it = trace["processes"].begin(); it != trace["processes"].end(); ++it) {
                if (it.value().is_object() && it.value().contains("serviceName") &&
                    it.value()["serviceName"].is_string()) {
                    process_service[it.key()] = it.value()["serviceName"].get<std::string>();
                }
            }
        }

        if (!trace.contains("spans") || !trace["spans"].is_array()) continue;

        std::unordered_set<std::string> span_ids;
        size_t first = records.size();
        for (const auto& span : trace["spans"]) {
            if (!span.is_object() || !span.contains("spanID") || !span["spanID"].is_string()) {
                throw ValidationError("trace export: span missing string 'spanID'");
            }
            SpanRecord rec;
            rec.trace_id = trace_id;
            rec.span_id = span["spanID"].get<std::string>();
            if (!span_ids.insert(rec.span_id).second) {
                throw ValidationError("trace " + trace_id + ": duplicate spanID '" + rec.span_id + "'");
            }

            if (!span.contains("processID") || !span["processID"].is_string()) {
                throw ValidationError("trace " + trace_id + ": span '" + rec.span_id +
                                      "' missing 'processID'");
            }
            auto proc = process_service.find(span["processID"].get<std::string>());
            if (proc == process_service.end()) {
                throw ValidationError("trace " + trace_id + ": span '" + rec.span_id +
                                      "' references unknown process '" +
                                      span["processID"].get<std::string>() + "'");
            }
            rec.service_name = proc->second;

            if (span.contains("duration") && span["duration"].is_number_integer()) {
                auto d = span["duration"].get<std::int64_t>();
                rec.duration_micros = d > 0 ? static_cast<std::uint64_t>(d) : 0;
            }

            if (span.contains("references") && span["references"].is_array()) {
                for (const auto& ref : span["references"]) {
                    if (ref.is_object() && ref.contains("refType") && ref["refType"] == "CHILD_OF" &&
                        ref.contains("spanID") && ref["spanID"].is_string()) {
                        rec.parent_span_id = ref["spanID"].get<std::string>();
                        break;
                    }
                }
            }

            if (span.contains("tags") && span["tags"].is_array()) {
                for (const auto& tag : span["tags"]) {
                    if (tag.is_object() && tag.contains("key") && tag["key"].is_string() &&
                        tag.contains("value")) {
                        rec.attributes[tag["key"].get<std::string>()] =
                            detail::tag_value_to_string(tag["value"]);
                    }
                }
            }
            auto kind_it = rec.attributes.find("span.kind");
            rec.kind = kind_it != rec.attributes.end() ? parse_span_kind(kind_it->second)
                                                       : SpanKind::unspecified;
            records.push_back(std::move(rec));
        }

        // orphan policy: a parent reference that never resolves is dropped
        for (size_t i = first; i < records.size(); ++i) {
            if (records[i].parent_span_id && !span_ids.count(*records[i].parent_span_id)) {
                records[i].parent_span_id.reset();
            }
        }
    }
    return records;
}

// Service-level projection of a span corpus. Parent-child pairs across
// distinct services become sync edges; producer/consumer spans carrying a
// broker messaging.system attribute become async edges through a broker node
// named after the attribute value.
inline ServiceGraph build_dependency_graph(const std::vector<SpanRecord>& spans,
                                           const IngestConfig& config) {
    auto filtered_out = [&](const SpanRecord& s) {
        if (config.infra_services.count(s.service_name)) return true;
        if (s.kind == SpanKind::internal && s.duration_micros < config.min_span_duration_micros) {
            return true;
        }
        return false;
    };

    // (trace_id, span_id) -> record, for parent resolution
    std::map<std::pair<std::string, std::string>, const SpanRecord*> by_id;
    for (const auto& s : spans) by_id[{s.trace_id, s.span_id}] = &s;

    GraphBuilder builder;
    for (const auto& span : spans) {
        if (filtered_out(span)) continue;
        builder.add_service(span.service_name);

        if (span.parent_span_id) {
            auto parent = by_id.find({span.trace_id, *span.parent_span_id});
            if (parent != by_id.end() && !filtered_out(*parent->second) &&
                parent->second->service_name != span.service_name) {
                builder.add_edge(parent->second->service_name, span.service_name, false);
            }
        }

        if (span.kind == SpanKind::producer || span.kind == SpanKind::consumer) {
            auto ms = span.attributes.find("messaging.system");
            if (ms != span.attributes.end() && config.broker_systems.count(ms->second) &&
                ms->second != span.service_name) {
                if (span.kind == SpanKind::producer) {
                    builder.add_edge(span.service_name, ms->second, true);
                } else {
                    builder.add_edge(ms->second, span.service_name, true);
                }
            }
        }
    }
    if (builder.empty()) return ServiceGraph();
    return builder.build();
}

// Non-fatal post-discovery checks: services missing from the deployed set and
// isolated vertices.
inline std::vector<std::string> sanity_check(const ServiceGraph& graph,
                                             const std::set<std::string>& deployed) {
    std::vector<std::string> warnings;
    std::set<std::string> touched;
    for (const auto& e : graph.edges()) {
        touched.insert(e.source);
        touched.insert(e.target);
    }
    for (const auto& s : graph.services()) {
        if (!deployed.count(s.name)) {
            warnings.push_back("service '" + s.name + "' not in deployed set");
        }
        if (!touched.count(s.name)) {
            warnings.push_back("service '" + s.name + "' is isolated (no incident edges)");
        }
    }
    return warnings;
}

} // namespace availsim
