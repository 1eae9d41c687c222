#include <catch2/catch_amalgamated.hpp>

#include "availsim/sampling.hpp"
#include "test_support.hpp"

using namespace availsim;

TEST_CASE("eligible_set is the sorted complement of the disallowlist", "[sampling]") {
    auto g = testsupport::g0();
    CHECK(eligible_set(g, {}) == std::vector<std::string>{"A", "B", "C", "F", "Kf"});
    CHECK(eligible_set(g, {"F"}) == std::vector<std::string>{"A", "B", "C", "Kf"});
    CHECK(eligible_set(g, {"F", "ghost"}) == std::vector<std::string>{"A", "B", "C", "Kf"});
    CHECK_THROWS_AS(eligible_set(g, {"A", "B", "C", "F", "Kf"}), ValidationError);
}

TEST_CASE("kill_count rounds half up with a floor of one", "[sampling]") {
    // the demo scale: 15 eligible services
    CHECK(kill_count(0.1, 15) == 2);
    CHECK(kill_count(0.3, 15) == 5);
    CHECK(kill_count(0.5, 15) == 8);
    CHECK(kill_count(0.7, 15) == 11);
    CHECK(kill_count(0.9, 15) == 14);

    CHECK(kill_count(0.5, 10) == 5);
    CHECK(kill_count(0.25, 10) == 3); // 2.5 rounds up
    CHECK(kill_count(0.24, 10) == 2);
    CHECK(kill_count(0.01, 15) == 1); // floor of one
    CHECK(kill_count(0.99, 4) == 4);  // clamped to n
    CHECK(kill_count(0.5, 1) == 1);
}

TEST_CASE("kill_count validates inputs", "[sampling]") {
    CHECK_THROWS_AS(kill_count(0.0, 10), ValidationError);
    CHECK_THROWS_AS(kill_count(1.0, 10), ValidationError);
    CHECK_THROWS_AS(kill_count(-0.1, 10), ValidationError);
    CHECK_THROWS_AS(kill_count(0.5, 0), ValidationError);
}

TEST_CASE("sampled failure sets cover the eligible range uniformly", "[sampling]") {
    auto g = testsupport::g0();
    auto eligible = eligible_set(g, {"F"});
    std::map<std::string, int> hits;
    const int trials = 20000;
    for (int t = 0; t < trials; ++t) {
        auto killed = sample_failure_set(eligible, 1, 99, static_cast<std::uint64_t>(t));
        REQUIRE(killed.size() == 1);
        hits[killed[0]]++;
    }
    for (const auto& name : eligible) {
        double freq = static_cast<double>(hits[name]) / trials;
        CHECK(freq == Catch::Approx(0.25).margin(0.02));
    }
}
