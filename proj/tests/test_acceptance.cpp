#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sbundle/acceptance.hpp>

#include <cstdio>

// Runs the full acceptance suite and prints one pass/fail line per check.

TEST_CASE("acceptance suite") {
    const auto results = sbundle::acceptance::run_checks(42);
    REQUIRE(results.size() == 10);
    for (const auto& r : results) {
        std::printf("[%s] %-22s %s (expected: %s) [%.2fs]\n", r.pass ? "PASS" : "FAIL",
                    r.name.c_str(), r.measured.c_str(), r.expected.c_str(), r.seconds);
        std::fflush(stdout);
        CHECK_MESSAGE(r.pass, r.name, ": ", r.measured);
    }
}
