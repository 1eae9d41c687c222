#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "availsim/oracle.hpp"
#include "availsim/util.hpp"
#include "test_support.hpp"

using namespace availsim;
using testsupport::endpoint;
using testsupport::g0;

TEST_CASE("binomial_within computes exact counts under the budget", "[oracle]") {
    CHECK(binomial_within(15, 2, 1000000) == 105);
    CHECK(binomial_within(15, 8, 1000000) == 6435);
    CHECK(binomial_within(15, 14, 1000000) == 15);
    CHECK(binomial_within(10, 0, 100) == 1);
    CHECK(binomial_within(4, 6, 100) == 0);

    CHECK_FALSE(binomial_within(30, 15, kDefaultOracleBudget).has_value());
    CHECK(binomial_within(30, 15, 200000000) == 155117520);
    CHECK_FALSE(binomial_within(70, 35, std::numeric_limits<std::uint64_t>::max()).has_value());
}

TEST_CASE("exact availability on the tiny graph matches hand counts", "[oracle]") {
    auto g = g0();
    std::set<std::string> disallow = {"F"}; // eligible {A, B, C, Kf}, k = 1

    auto a = exact_availability(g, endpoint("a", "F", {"A"}), disallow, 1,
                                Semantics::all_blocking);
    CHECK(a.successes == 3);
    CHECK(a.total == 4);
    CHECK(a.value() == 0.75);

    auto any = exact_availability(g, endpoint("ab", "F", {"A", "B"}, RuleType::any_of), disallow,
                                  1, Semantics::all_blocking);
    CHECK(any.value() == 1.0);

    auto c_all = exact_availability(g, endpoint("c", "F", {"C"}), disallow, 1,
                                    Semantics::all_blocking);
    CHECK(c_all.value() == 0.25);
    auto c_async = exact_availability(g, endpoint("c", "F", {"C"}), disallow, 1, Semantics::async);
    CHECK(c_async.value() == 0.0);

    CHECK(exact_delta(g, endpoint("c", "F", {"C"}), disallow, 1) == -0.25);
    CHECK(exact_delta(g, endpoint("a", "F", {"A"}), disallow, 1) == 0.0);
}

TEST_CASE("exact counts agree with the naive enumeration oracle", "[oracle]") {
    SplitMix64 rng(7777);
    int checked = 0;
    for (int iter = 0; iter < 40; ++iter) {
        auto rc = testsupport::random_case(rng);
        int n = static_cast<int>(rc.services.size());
        int k = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
        for (Semantics sem : {Semantics::all_blocking, Semantics::async}) {
            auto got = exact_counts(rc.graph, {rc.endpoint}, {}, k, sem)[0];
            auto [succ, total] = testsupport::naive_exact_counts(rc.graph, rc.endpoint, {}, k, sem);
            CHECK(got.successes == succ);
            CHECK(got.total == total);
            checked++;
        }
    }
    CHECK(checked == 80);
}

TEST_CASE("demo fixture availabilities match closed-form binomial ratios", "[oracle]") {
    auto demo = testsupport::fixture_dir() / "demo";
    auto g = load_graph(read_file(demo / "graph.golden.json"));
    auto eps = load_targets(read_file(demo / "targets.json"));
    std::set<std::string> disallow = {"frontend"};

    // 15 eligible services; single-target routes succeed iff the target
    // survives (C(14,k) of C(15,k) subsets), the checkout route needs 4 fixed
    // services alive (C(11,k) of C(15,k))
    struct Row {
        int k;
        std::uint64_t total;
        std::uint64_t single;
        std::uint64_t checkout;
    } rows[] = {
        {2, 105, 91, 55},     {5, 3003, 2002, 462}, {8, 6435, 3003, 165},
        {11, 1365, 364, 1},   {14, 15, 1, 0},
    };

    for (const auto& row : rows) {
        for (Semantics sem : {Semantics::all_blocking, Semantics::async}) {
            auto counts = exact_counts(g, eps, disallow, row.k, sem);
            REQUIRE(counts.size() == 4);
            for (size_t e = 0; e < eps.size(); ++e) {
                CHECK(counts[e].total == row.total);
                std::uint64_t want =
                    eps[e].route == "POST /api/checkout" ? row.checkout : row.single;
                CHECK(counts[e].successes == want);
            }
        }
    }
}

TEST_CASE("exact deltas are zero on the demo fixture", "[oracle]") {
    auto demo = testsupport::fixture_dir() / "demo";
    auto g = load_graph(read_file(demo / "graph.golden.json"));
    auto eps = load_targets(read_file(demo / "targets.json"));
    std::set<std::string> disallow = {"frontend"};

    for (int k : {2, 5, 8, 11, 14}) {
        for (const auto& ep : eps) {
            CHECK(exact_delta(g, ep, disallow, k) == 0.0);
        }
    }
}

TEST_CASE("exact availability never increases with k", "[oracle]") {
    auto demo = testsupport::fixture_dir() / "demo";
    auto g = load_graph(read_file(demo / "graph.golden.json"));
    auto eps = load_targets(read_file(demo / "targets.json"));
    std::set<std::string> disallow = {"frontend"};

    for (const auto& ep : eps) {
        for (Semantics sem : {Semantics::all_blocking, Semantics::async}) {
            double prev = 1.0;
            for (int k = 1; k <= 15; ++k) {
                double v = exact_availability(g, ep, disallow, k, sem).value();
                CHECK(v <= prev + 1e-15);
                prev = v;
            }
        }
    }
}

TEST_CASE("the budget guard refuses oversized enumerations", "[oracle]") {
    auto g = g0();
    CHECK_THROWS_WITH(
        exact_counts(g, {endpoint("a", "F", {"A"})}, {}, 2, Semantics::all_blocking, 5),
        Catch::Matchers::ContainsSubstring("budget"));
    CHECK_THROWS_AS(exact_counts(g, {endpoint("a", "F", {"A"})}, {}, 0, Semantics::all_blocking),
                    ValidationError);
    CHECK_THROWS_AS(exact_counts(g, {endpoint("a", "F", {"A"})}, {}, 6, Semantics::all_blocking),
                    ValidationError);
}

TEST_CASE("oracle_records mirror the prediction record shape", "[oracle]") {
    auto demo = testsupport::fixture_dir() / "demo";
    auto g = load_graph(read_file(demo / "graph.golden.json"));
    auto eps = load_targets(read_file(demo / "targets.json"));
    std::set<std::string> disallow = {"frontend"};

    auto records = oracle_records(g, eps, {0.1, 0.3, 0.5, 0.7, 0.9}, disallow);
    REQUIRE(records.size() == 40);

    int expected_k[] = {2, 5, 8, 11, 14};
    std::uint64_t expected_total[] = {105, 3003, 6435, 1365, 15};
    for (const auto& rec : records) {
        CHECK(rec.std_error == 0.0);
        CHECK(rec.seed == 0);
        bool known = false;
        for (int i = 0; i < 5; ++i) {
            if (rec.k_used == expected_k[i]) {
                CHECK(rec.trials == expected_total[i]);
                known = true;
            }
        }
        CHECK(known);
    }

    // sorted like predictions: route, then fraction, then semantics
    auto sorted = records;
    sort_records(sorted);
    CHECK(sorted == records);

    // round trips through the same serializer
    CHECK(load_records(save_records(records)) == records);
}
