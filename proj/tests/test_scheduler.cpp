#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cenet/error.hpp"
#include "cenet/scheduler.hpp"

using namespace cenet;

TEST_CASE("cosine schedule closed form") {
    const LrSchedule s(0.01, 1e-4, 1000);
    for (std::int64_t t = 0; t < 1000; t += 37) {
        const double want = 1e-4 + 0.5 * (0.01 - 1e-4) * (1 + std::cos(std::numbers::pi * t / 1000.0));
        CHECK(s.at(t) == doctest::Approx(want).epsilon(1e-14));
    }
    CHECK(s.at(0) == 0.01);
    CHECK(s.at(1000) == 1e-4);
    CHECK(s.at(5000) == 1e-4);
    CHECK(s.at(500) == doctest::Approx((0.01 + 1e-4) / 2));
    for (std::int64_t t = 1; t < 1000; ++t) CHECK(s.at(t) <= s.at(t - 1));
}

TEST_CASE("cyclic schedule restarts at every cycle boundary") {
    const LrSchedule s(1e-3, 1e-5, 900, 3);
    CHECK(s.cycle_steps() == 300);
    for (std::int64_t t = 0; t < 300; t += 13) {
        CHECK(s.at(t) == s.at(t + 300));
        CHECK(s.at(t) == s.at(t + 600));
    }
    CHECK(s.at(300) == 1e-3);
    CHECK(s.at(299) < 1.1e-5);
    CHECK(s.at(900) == 1e-5);
}

TEST_CASE("schedule arguments are checked") {
    CHECK_THROWS_AS(LrSchedule(0.1, 0.0, 0), ConfigError);
    CHECK_THROWS_AS(LrSchedule(0.1, 0.0, 10, 3), ConfigError);
}
