#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "snell/step_path.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace snell;

namespace {
const StepPath indicator_half({0.0, 0.5}, {0.0, 1.0}, 1.0);
}

TEST_CASE("time grid invariants") {
    CHECK_THROWS_AS(TimeGrid({0.5, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(TimeGrid({0.0, 0.5, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(TimeGrid(std::vector<double>{}), std::invalid_argument);
    const TimeGrid g({0.0, 0.25, 1.0});
    CHECK(g.mesh() == doctest::Approx(0.75));
    CHECK(g.index_of(0.25, 1e-12).value() == 1);
    CHECK(!g.index_of(0.3, 1e-12));
    CHECK(g.contains(TimeGrid({0.0, 1.0}), 1e-12));
    CHECK(!TimeGrid({0.0, 1.0}).contains(g, 1e-12));
}

TEST_CASE("eval is right-continuous and validates its domain") {
    CHECK(indicator_half.eval(0.4) == 0.0);
    CHECK(indicator_half.eval(0.5) == 1.0);  // right-continuity at the jump
    CHECK(indicator_half.eval(1.0) == 1.0);
    CHECK(StepPath::constant(3.25, 1.0).eval(0.7) == 3.25);
    CHECK_THROWS_AS(indicator_half.eval(-0.1), std::invalid_argument);
    CHECK_THROWS_AS(indicator_half.eval(1.1), std::invalid_argument);
}

TEST_CASE("eval agrees with limits from the right on a grid") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 20; ++i) {
        const StepPath path = testing::random_step_path(rng, 5);
        for (double t : {0.0, 0.3, 0.5, 0.9}) {
            const double here = path.eval(t);
            double from_right = path.eval(std::min(1.0, t + 1e-13));
            CHECK(here == from_right);
        }
    }
}

TEST_CASE("canonical form drops zero-size jumps") {
    const StepPath path({0.0, 0.3, 0.6}, {1.0, 1.0, 2.0}, 1.0);
    CHECK(path.jump_count() == 1);
    CHECK(path.jump_times() == std::vector<double>{0.0, 0.6});
    CHECK(path == StepPath({0.0, 0.6}, {1.0, 2.0}, 1.0));
}

TEST_CASE("step path invariants are enforced") {
    CHECK_THROWS_AS(StepPath({0.1}, {1.0}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(StepPath({0.0, 0.5, 0.4}, {0.0, 1.0, 2.0}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(StepPath({0.0, 1.5}, {0.0, 1.0}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(StepPath({0.0}, {1.0}, -1.0), std::invalid_argument);
}

TEST_CASE("uniform distance") {
    CHECK(uniform_distance(indicator_half, indicator_half) == 0.0);
    const StepPath shifted({0.0, 0.75}, {0.0, 1.0}, 1.0);
    CHECK(uniform_distance(indicator_half, shifted) == 1.0);
    CHECK(uniform_distance(StepPath::constant(2.0, 1.0), StepPath::constant(0.0, 1.0)) == 2.0);
    CHECK_THROWS_AS(uniform_distance(indicator_half, StepPath::constant(0.0, 2.0)),
                    std::invalid_argument);
}

TEST_CASE("skorokhod distance on the shifted-jump pair") {
    CHECK(skorokhod_distance(indicator_half, indicator_half) == 0.0);
    const int n = 8;
    const StepPath shifted({0.0, 0.5 + 1.0 / n}, {0.0, 1.0}, 1.0);
    CHECK(skorokhod_distance(indicator_half, shifted) == doctest::Approx(1.0 / n).epsilon(1e-14));
    CHECK(skorokhod_distance(StepPath::constant(0.0, 1.0), indicator_half) == 1.0);
    CHECK_THROWS_AS(skorokhod_distance(indicator_half, StepPath::constant(0.0, 2.0)),
                    std::invalid_argument);
}

TEST_CASE("jumps at the horizon are pinned") {
    // A jump at T cannot be aligned with an interior jump by any time change.
    const StepPath at_horizon({0.0, 1.0}, {0.0, 9.0}, 1.0);
    const StepPath inside({0.0, 0.9}, {0.0, 9.0}, 1.0);
    CHECK(skorokhod_distance(at_horizon, inside) == 9.0);
    CHECK(skorokhod_distance(inside, at_horizon) == 9.0);
    CHECK(skorokhod_distance(at_horizon, at_horizon) == 0.0);
}

TEST_CASE("dp equals exhaustive matching enumeration on random pairs") {
    std::mt19937_64 rng(20240901);
    for (int i = 0; i < 200; ++i) {
        const StepPath a = testing::random_step_path(rng, 6);
        const StepPath b = testing::random_step_path(rng, 6);
        const double dp = skorokhod_distance(a, b);
        const double enumerated = testing::j1_enumerate(a, b);
        CHECK(dp == enumerated);
    }
}

TEST_CASE("metric properties on random pairs") {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 100; ++i) {
        const StepPath a = testing::random_step_path(rng, 5);
        const StepPath b = testing::random_step_path(rng, 5);
        const double d = skorokhod_distance(a, b);
        CHECK(d >= 0.0);
        CHECK(d <= uniform_distance(a, b) + 1e-15);
        CHECK(d == skorokhod_distance(b, a));
        CHECK(skorokhod_distance(a, a) == 0.0);
        if (a == b) CHECK(d == 0.0);
        if (d == 0.0) CHECK(a == b);
    }
}

TEST_CASE("shifting one interior jump moves the distance by at most the shift") {
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> h_dist(0.0, 0.05);
    for (int i = 0; i < 100; ++i) {
        StepPath a = testing::random_step_path(rng, 4);
        if (a.jump_count() == 0) continue;
        std::uniform_int_distribution<std::size_t> pick(1, a.jump_count());
        const std::size_t j = pick(rng);
        std::vector<double> times = a.jump_times();
        if (times[j] == 1.0) continue;  // a jump at the horizon is pinned
        const double lo = times[j - 1];
        const double hi = (j + 1 < times.size()) ? times[j + 1] : 1.0;
        const double h = h_dist(rng);
        const double shifted = std::min(std::max(times[j] + h, lo + 1e-6), hi - 1e-6);
        if (shifted <= lo || shifted >= hi) continue;
        const double moved = std::abs(shifted - times[j]);
        times[j] = shifted;
        const StepPath b(times, a.values(), 1.0);
        CHECK(skorokhod_distance(a, b) <= moved + 1e-15);
    }
}
