#include <catch2/catch_amalgamated.hpp>

#include "availsim/graph.hpp"
#include "test_support.hpp"

using namespace availsim;

TEST_CASE("ServiceGraph::create sorts services and edges", "[graph]") {
    auto g = ServiceGraph::create({{"b", 1}, {"a", 1}, {"c", 1}},
                                  {{"c", "a", false}, {"a", "b", true}, {"b", "c", false}});
    REQUIRE(g.services().size() == 3);
    CHECK(g.services()[0].name == "a");
    CHECK(g.services()[2].name == "c");
    CHECK(g.edges()[0].source == "a");
    CHECK(g.edges()[0].target == "b");
    CHECK(g.edges()[0].is_async);
    CHECK(g.async_edge_count() == 1);
    CHECK(g.has_service("b"));
    CHECK_FALSE(g.has_service("d"));
}

TEST_CASE("ServiceGraph::create rejects malformed input", "[graph]") {
    CHECK_THROWS_AS(ServiceGraph::create({{"a", 1}, {"a", 1}}, {}), ValidationError);
    CHECK_THROWS_AS(ServiceGraph::create({{"", 1}}, {}), ValidationError);
    CHECK_THROWS_AS(ServiceGraph::create({{"a", 0}}, {}), ValidationError);
    CHECK_THROWS_AS(
        ServiceGraph::create({{"a", 1}, {"b", 1}}, {{"a", "b", false}, {"a", "b", true}}),
        ValidationError);
    CHECK_THROWS_AS(ServiceGraph::create({{"a", 1}}, {{"a", "a", false}}), ValidationError);
    CHECK_THROWS_AS(ServiceGraph::create({{"a", 1}}, {{"a", "x", false}}), ValidationError);
    CHECK_THROWS_AS(ServiceGraph::create({{"a", 1}}, {{"x", "a", false}}), ValidationError);
}

TEST_CASE("GraphBuilder merges duplicates, sync dominates async", "[graph]") {
    GraphBuilder b;
    CHECK(b.empty());
    b.add_edge("x", "y", true);
    b.add_edge("x", "y", false);
    b.add_edge("y", "z", false);
    b.add_edge("y", "z", true);
    b.add_edge("z", "w", true);
    b.add_edge("z", "w", true);
    b.add_edge("q", "q", false); // same-service pair, dropped
    CHECK_FALSE(b.empty());

    auto g = b.build();
    REQUIRE(g.edges().size() == 3);
    CHECK_FALSE(g.has_service("q"));
    for (const auto& e : g.edges()) {
        if (e.source == "z") CHECK(e.is_async);
        else CHECK_FALSE(e.is_async);
    }
}

TEST_CASE("GraphBuilder keeps the max replica count", "[graph]") {
    GraphBuilder b;
    b.add_service("a", 1);
    b.add_service("a", 3);
    b.add_service("a", 2);
    auto g = b.build();
    REQUIRE(g.services().size() == 1);
    CHECK(g.services()[0].replicas == 3);
}

TEST_CASE("load_graph and save_graph round trip canonically", "[graph]") {
    std::string doc = R"({
  "services": [
    {
      "name": "a",
      "replicas": 1
    },
    {
      "name": "b",
      "replicas": 1
    }
  ],
  "edges": [
    {
      "source": "a",
      "target": "b",
      "async": true
    }
  ]
})"
                      "\n";
    ServiceGraph g = load_graph(doc);
    CHECK(save_graph(g) == doc);
    CHECK(g.async_edge_count() == 1);

    // non-canonical input serializes to the canonical form
    ServiceGraph g2 = load_graph(R"({"edges":[{"target":"b","source":"a","async":true}],
                                     "services":[{"name":"b"},{"name":"a"}]})");
    CHECK(save_graph(g2) == doc);
    CHECK(g == g2);
}

TEST_CASE("load_graph is strict", "[graph]") {
    CHECK_THROWS_AS(load_graph("not json"), ValidationError);
    CHECK_THROWS_AS(load_graph("[]"), ValidationError);
    CHECK_THROWS_AS(load_graph(R"({"services": []})"), ValidationError);
    CHECK_THROWS_AS(load_graph(R"({"services": [], "edges": [], "extra": 1})"), ValidationError);
    CHECK_THROWS_AS(load_graph(R"({"services": [{"name": "a", "color": "red"}], "edges": []})"),
                    ValidationError);
    CHECK_THROWS_AS(load_graph(R"({"services": [{"replicas": 2}], "edges": []})"), ValidationError);
    CHECK_THROWS_AS(load_graph(R"({"services": [{"name": "a", "replicas": 2}], "edges": []})"),
                    ValidationError);
    CHECK_THROWS_AS(load_graph(R"({"services": [{"name": "a"}], "edges": [{"source": "a"}]})"),
                    ValidationError);
    CHECK_THROWS_AS(load_graph("\xEF\xBB\xBF{}"), ValidationError);
}
