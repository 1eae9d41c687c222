#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <filesystem>

#include "availsim/util.hpp"
#include "test_support.hpp"

using namespace availsim;

TEST_CASE("fmt_double emits shortest round-trip form", "[util]") {
    CHECK(fmt_double(0.1) == "0.1");
    CHECK(fmt_double(0.25) == "0.25");
    CHECK(fmt_double(1.0) == "1");
    CHECK(fmt_double(0.0) == "0");
    CHECK(fmt_double(-0.5) == "-0.5");

    for (double v : {0.1, 0.3, 0.53846153846153844, 2.2360679774997898e-4, 1e300, -1e-300}) {
        CHECK(parse_double(fmt_double(v)) == v);
    }
}

TEST_CASE("parse_double rejects non-numbers", "[util]") {
    CHECK_THROWS_AS(parse_double(""), ValidationError);
    CHECK_THROWS_AS(parse_double("abc"), ValidationError);
    CHECK_THROWS_AS(parse_double("1.2x"), ValidationError);
    CHECK(parse_double("-0.75") == -0.75);
}

TEST_CASE("trim and split", "[util]") {
    CHECK(trim("  a b \t\n") == "a b");
    CHECK(trim("\r\n") == "");
    CHECK(split("a,b,,c", ',') == std::vector<std::string>{"a", "b", "", "c"});
    CHECK(split("", ',') == std::vector<std::string>{""});
    CHECK(split("x", ',') == std::vector<std::string>{"x"});
}

TEST_CASE("parse_name_list strips comments and blanks", "[util]") {
    auto names = parse_name_list("# header\nfrontend\n\n  cart  # trailing\n#only comment\nvalkey");
    CHECK(names == std::vector<std::string>{"frontend", "cart", "valkey"});
    CHECK(parse_name_list("").empty());
    CHECK(parse_name_list("# nothing\n\n").empty());
}

TEST_CASE("read_file and write_file round trip, creating parents", "[util]") {
    auto dir = testsupport::make_temp_dir("availsim-util");
    auto path = dir / "a" / "b" / "out.txt";
    write_file(path, "payload\n");
    CHECK(read_file(path) == "payload\n");
    CHECK_THROWS_AS(read_file(dir / "missing.txt"), IoError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("fnv1a64 matches reference vectors", "[util]") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("availsim") == 0xc489ca538856c747ULL);
    CHECK(hex64(0) == "0000000000000000");
    CHECK(hex64(0xcbf29ce484222325ULL) == "cbf29ce484222325");
    CHECK(hex64(0xdeadbeefULL) == "00000000deadbeef");
}

TEST_CASE("resolve_workers", "[util]") {
    CHECK(resolve_workers(5) == 5);
    CHECK(resolve_workers(1) == 1);
    CHECK(resolve_workers(0) >= 1);
}
