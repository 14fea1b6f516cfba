#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "snell/procgen.hpp"
#include "snell/step_path.hpp"

using namespace snell;

namespace {

CrrParams params(double s0, double lambda, double sigma, double horizon, int steps) {
    CrrParams p;
    p.s0 = s0;
    p.lambda = lambda;
    p.sigma = sigma;
    p.horizon = horizon;
    p.steps = steps;
    return p;
}

// Terminal second moment of the scaled walk on its recombining lattice:
// backward recursion over positions j*h, exact when h is dyadic.
double walk_terminal_second_moment(int steps, double horizon) {
    const double h = walk_increment(steps, horizon);
    std::vector<double> v(2 * static_cast<std::size_t>(steps) + 1);
    for (int j = -steps; j <= steps; ++j)
        v[static_cast<std::size_t>(j + steps)] = (j * h) * (j * h);
    for (int k = steps - 1; k >= 0; --k) {
        std::vector<double> prev = v;
        for (int j = -k; j <= k; ++j)
            v[static_cast<std::size_t>(j + steps)] =
                0.5 * (prev[static_cast<std::size_t>(j + steps + 1)] +
                       prev[static_cast<std::size_t>(j + steps - 1)]);
    }
    return v[static_cast<std::size_t>(steps)];
}

}  // namespace

TEST_CASE("one-step price tree") {
    const CoupledSpace space = gen_crr(params(1.0, 0.0, 0.1, 1.0, 1));
    REQUIRE(space.tree().leaf_count() == 2);
    CHECK(space.value_at("S", 0, 1) == doctest::Approx(1.1).epsilon(1e-15));
    CHECK(space.value_at("S", 1, 1) == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(space.tree().leaf_weight(0) == 0.5);
    CHECK(space.tree().leaf_weight(1) == 0.5);
}

TEST_CASE("price is a martingale for zero drift") {
    const CoupledSpace space = gen_crr(params(1.0, 0.0, 0.25, 2.0, 2));
    // Terminal mean is the initial price.
    const double mean = expectation(space, [&](int li) { return space.value_at("S", li, 2); });
    CHECK(mean == doctest::Approx(1.0).epsilon(1e-14));
    // One-step conditional means reproduce the current price at every index.
    for (int k = 0; k < 2; ++k) {
        std::vector<double> next(static_cast<std::size_t>(space.tree().leaf_count()));
        for (int li = 0; li < space.tree().leaf_count(); ++li)
            next[static_cast<std::size_t>(li)] = space.value_at("S", li, k + 1);
        const std::vector<double> h = cond_expectation(space, next, "S", k);
        for (int li = 0; li < space.tree().leaf_count(); ++li)
            CHECK(h[static_cast<std::size_t>(li)] ==
                  doctest::Approx(space.value_at("S", li, k)).epsilon(1e-12));
    }
}

TEST_CASE("terminal mean grows by the per-step factor") {
    for (int n : {1, 2, 5, 10}) {
        const double lambda = 0.3;
        const CoupledSpace space = gen_crr(params(2.0, lambda, 0.2, 1.0, n));
        const double mean =
            expectation(space, [&](int li) { return space.value_at("S", li, n); });
        CHECK(mean == doctest::Approx(2.0 * std::pow(1.0 + lambda / n, n)).epsilon(1e-12));
    }
}

TEST_CASE("submartingale signs follow the drift sign") {
    for (double lambda : {0.2, -0.2}) {
        const CoupledSpace space = gen_crr(params(1.0, lambda, 0.2, 1.0, 2));
        std::vector<double> next(static_cast<std::size_t>(space.tree().leaf_count()));
        for (int li = 0; li < space.tree().leaf_count(); ++li)
            next[static_cast<std::size_t>(li)] = space.value_at("S", li, 1);
        const std::vector<double> h = cond_expectation(space, next, "S", 0);
        for (int li = 0; li < space.tree().leaf_count(); ++li) {
            if (lambda > 0.0) CHECK(h[static_cast<std::size_t>(li)] > 1.0);
            else CHECK(h[static_cast<std::size_t>(li)] < 1.0);
        }
    }
}

TEST_CASE("price positivity is validated") {
    CHECK_THROWS_AS(gen_crr(params(1.0, 0.0, 1.5, 1.0, 1)), std::invalid_argument);
    CHECK_THROWS_AS(gen_crr(params(-1.0, 0.0, 0.2, 1.0, 1)), std::invalid_argument);
    CHECK_THROWS_AS(gen_crr(params(1.0, 0.0, 0.2, 1.0, 0)), std::invalid_argument);
}

TEST_CASE("scaled walk") {
    const CoupledSpace w1 = gen_random_walk(1, 1.0);
    CHECK(w1.value_at("B", 0, 1) == 1.0);
    CHECK(w1.value_at("B", 1, 1) == -1.0);

    const CoupledSpace w4 = gen_random_walk(4, 1.0);
    const double mean = expectation(w4, [&](int li) { return w4.value_at("B", li, 4); });
    const double second = expectation(w4, [&](int li) {
        const double b = w4.value_at("B", li, 4);
        return b * b;
    });
    CHECK(mean == 0.0);
    CHECK(second == doctest::Approx(1.0).epsilon(1e-14));

    CHECK(walk_increment(2, 2.0) == 1.0);
}

TEST_CASE("walk second moment is exact at dyadic increments") {
    CHECK(walk_terminal_second_moment(64, 1.0) == 1.0);
    CHECK(walk_terminal_second_moment(256, 1.0) == 1.0);
}

TEST_CASE("discretization: identity, total coarsening, atom transfer") {
    const CoupledSpace walk = gen_random_walk(2, 1.0);

    const CoupledSpace full = discretize_process(walk, "B", TimeGrid({0.0, 0.5, 1.0}), "Bf");
    CHECK(full.observable("Bf") == full.observable("B"));

    const CoupledSpace flat = discretize_process(walk, "B", TimeGrid({0.0}), "B0");
    for (double v : flat.observable("B0")) CHECK(v == 0.0);

    // grid = {0, t1}: atoms at the final index equal the source atoms at 1.
    const CoupledSpace part = discretize_process(walk, "B", TimeGrid({0.0, 0.5}), "B1");
    const AtomPartition coarse = atom_partition(part, "B1", 2);
    const AtomPartition fine = atom_partition(part, "B", 1);
    auto canon = [](std::vector<std::vector<int>> groups) {
        for (auto& g : groups) std::sort(g.begin(), g.end());
        std::sort(groups.begin(), groups.end());
        return groups;
    };
    CHECK(canon(coarse.atoms) == canon(fine.atoms));

    CHECK_THROWS_AS(discretize_process(walk, "B", TimeGrid({0.0, 0.3}), "bad"),
                    std::invalid_argument);
}

TEST_CASE("discretization is idempotent on grid-valued observables") {
    const CoupledSpace walk = gen_random_walk(3, 1.0);
    const TimeGrid g2 = TimeGrid({0.0, walk.tree().times()[1], 1.0});
    const CoupledSpace once = discretize_process(walk, "B", g2, "Bg");
    const CoupledSpace twice = discretize_process(once, "Bg", g2, "Bgg");
    CHECK(twice.observable("Bgg") == twice.observable("Bg"));
}

TEST_CASE("counterexample pair") {
    const auto [x, xn] = gen_counterexample(4);
    CHECK(xn.jump_times() == std::vector<double>{0.0, 0.75});
    CHECK(x.eval(0.5) == 1.0);
    CHECK(xn.eval(0.5) == 0.0);
    for (int n : {4, 8, 16}) {
        const auto [a, b] = gen_counterexample(n);
        CHECK(skorokhod_distance(a, b) == doctest::Approx(1.0 / n).epsilon(1e-14));
    }
    CHECK_THROWS_AS(gen_counterexample(2), std::invalid_argument);
}

TEST_CASE("single-scenario space from a deterministic path") {
    const auto [x, xn] = gen_counterexample(4);
    const CoupledSpace space = space_from_path(x, TimeGrid({0.0, 0.5, 1.0}), "X");
    CHECK(space.tree().leaf_count() == 1);
    CHECK(space.tree().leaf_weight(0) == 1.0);
    CHECK(space.value_at("X", 0, 0) == 0.0);
    CHECK(space.value_at("X", 0, 1) == 1.0);
    const auto scenarios = leaf_scenarios(space);
    CHECK(scenarios[0].paths.at("X") == x);
}
