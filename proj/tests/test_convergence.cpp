#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "snell/convergence.hpp"
#include "snell/experiments.hpp"
#include "snell/procgen.hpp"
#include "snell/snell.hpp"

using namespace snell;

namespace {

// Single-scenario space on [0,1] carrying the deterministic pair as two
// observables on a common grid.
CoupledSpace pair_space(int n) {
    const auto [x, xn] = gen_counterexample(n);
    const TimeGrid grid({0.0, 0.5, 0.5 + 1.0 / n, 1.0});
    CoupledSpace space = space_from_path(x, grid, "X");
    std::vector<double> xn_values;
    for (double t : grid.points()) xn_values.push_back(xn.eval(t));
    return space.with_observable("Xn", xn_values);
}

std::vector<int> all_leaves(const CoupledSpace& space) {
    std::vector<int> out;
    for (int li = 0; li < space.tree().leaf_count(); ++li) out.push_back(li);
    return out;
}

}  // namespace

TEST_CASE("path-gap on the deterministic pair") {
    for (int n : {4, 8, 16}) {
        const CoupledSpace space = pair_space(n);
        CHECK(paths_in_prob_gap(space, "X", "X", 0.01) == 0.0);
        CHECK(paths_in_prob_gap(space, "X", "Xn", 2.0 / n) == 0.0);   // d = 1/n < eps
        CHECK(paths_in_prob_gap(space, "X", "Xn", 0.5 / n) == 1.0);   // d = 1/n >= eps
    }
    CHECK_THROWS_AS(paths_in_prob_gap(pair_space(4), "X", "Xn", 0.0), std::invalid_argument);
}

TEST_CASE("sigma-field gap: full information, no information") {
    const CoupledSpace walk = gen_random_walk(2, 1.0);
    const std::vector<int> A{0, 2};  // one leaf from each side: P[A] = 1/2
    CHECK(sigma_field_gap(walk, A, "B", 2, 0.25) == 0.0);  // atoms = leaves

    const CoupledSpace flat = discretize_process(walk, "B", TimeGrid({0.0}), "B0");
    // Conditioning on nothing: |1/2 - 1_A| = 1/2 >= 1/4 everywhere.
    CHECK(sigma_field_gap(flat, A, "B0", 2, 0.25) == 1.0);
    CHECK(sigma_field_gap(flat, A, "B0", 2, 0.75) == 0.0);
}

TEST_CASE("sigma-field gap shrinks along the discretization ladder") {
    CoupledSpace space = gen_random_walk(4, 1.0);
    std::vector<std::string> names;
    for (int size : {2, 3, 5}) {
        std::vector<double> pts;
        for (int j = 0; j < size; ++j)
            pts.push_back(space.tree().times()[static_cast<std::size_t>(j * 4 / (size - 1))]);
        const std::string name = "B" + std::to_string(size);
        space = discretize_process(space, "B", TimeGrid(pts), name);
        names.push_back(name);
    }
    // A fixed at an early source time: the first-step atom {B_1 = +h}.
    const std::vector<int> A = atom_partition(space, "B", 1).atoms.front();
    for (double eps : {0.5, 0.25}) {
        double prev = 2.0;
        for (const std::string& name : names) {
            const double gap = sigma_field_gap(space, A, name, 4, eps);
            CHECK(gap <= prev + 1e-12);
            prev = gap;
        }
        CHECK(prev == 0.0);  // full grid: exact indicator
    }
}

TEST_CASE("filtration gap vanishes when both arguments coincide") {
    const CoupledSpace walk = gen_random_walk(3, 1.0);
    const std::vector<int> A = atom_partition(walk, "B", 3).atoms.front();
    CHECK(filtration_weak_gap(walk, A, "B", "B", 0.01) == 0.0);
}

TEST_CASE("filtration gap on the two-step walk with terminal-only information") {
    CoupledSpace walk = gen_random_walk(2, 1.0);
    walk = discretize_process(walk, "B", TimeGrid({0.0, 1.0}), "Bc");
    // A = {first step up}: union of the two leaves below the up node.
    const std::vector<int> A = atom_partition(walk, "B", 1).atoms.front();

    // The fine martingale jumps to the indicator at t1; the coarse one stays
    // at 1/2 until the terminal time and only reaches the indicator on the
    // extreme scenarios. The per-leaf J1 distance is 1/2 on every leaf.
    CHECK(filtration_weak_gap(walk, A, "Bc", "B", 0.49) == 1.0);
    CHECK(filtration_weak_gap(walk, A, "Bc", "B", 0.51) == 0.0);
}

TEST_CASE("filtration gap vanishes along the refinement ladder") {
    CoupledSpace space = gen_random_walk(4, 1.0);
    std::vector<std::string> names;
    for (int size : {3, 5}) {
        std::vector<double> pts;
        for (int j = 0; j < size; ++j)
            pts.push_back(space.tree().times()[static_cast<std::size_t>(j * 4 / (size - 1))]);
        const std::string name = "B" + std::to_string(size);
        space = discretize_process(space, "B", TimeGrid(pts), name);
        names.push_back(name);
    }
    const std::vector<int> A = atom_partition(space, "B", 4).atoms.front();
    const double gap_coarse = filtration_weak_gap(space, A, names[0], "B", 0.25);
    const double gap_fine = filtration_weak_gap(space, A, names[1], "B", 0.25);
    CHECK(gap_fine <= gap_coarse + 1e-12);
}

TEST_CASE("baxter-chacon gap: constants and a two-point separation") {
    const CoupledSpace one = gen_random_walk(1, 1.0);
    const RandomizedStoppingRule at_root =
        randomized_from_pure(one, stop_at_root(one, "B", 1.0));
    const RandomizedStoppingRule at_end =
        randomized_from_pure(one, never_stop_early(one, "B", 1.0));

    const auto fns = default_bc_test_functions(1.0);
    const auto sets = std::vector<std::vector<int>>{all_leaves(one)};

    const auto zero = bc_gap(one, {at_root, at_root}, at_root, fns, sets);
    for (const auto& [n, g] : zero) CHECK(g == 0.0);

    // f(t) = t separates stop-at-t1 from stop-at-0 with gap t1 = 1.
    const std::vector<BcTestFunction> linear{{"t", [](double t) { return t; }}};
    const auto sep = bc_gap(one, {at_end}, at_root, linear, sets);
    CHECK(sep[0].second == 1.0);

    CHECK_THROWS_AS(bc_gap(one, {at_end}, at_root, {}, sets), std::invalid_argument);
    CHECK_THROWS_AS(bc_gap(one, {at_end}, at_root, fns, {}), std::invalid_argument);
}

TEST_CASE("baxter-chacon gap of a transported rule sequence vanishes at the finest grid") {
    CoupledSpace space = gen_random_walk(4, 1.0);
    std::vector<std::string> names;
    for (int size : {2, 3, 5}) {
        std::vector<double> pts;
        for (int j = 0; j < size; ++j)
            pts.push_back(space.tree().times()[static_cast<std::size_t>(j * 4 / (size - 1))]);
        const std::string name = "Bn" + std::to_string(size);
        space = discretize_process(space, "B", TimeGrid(pts), name);
        names.push_back(name);
    }
    const Payoff payoff = make_payoff("arctan");
    const StoppingRule tau = *snell_value(space, "B", payoff, 1.0).rule;
    std::vector<RandomizedStoppingRule> seq;
    for (const std::string& name : names)
        seq.push_back(randomized_from_pure(space, lemma_tn(space, tau, name)));
    const auto gaps = bc_gap(space, seq, randomized_from_pure(space, tau),
                             default_bc_test_functions(1.0),
                             atom_partition(space, "B", 4).atoms);
    CHECK(gaps.back().second == 0.0);
    for (const auto& [n, g] : gaps) CHECK(g <= 2.0);
}

TEST_CASE("convergence report monotone flag") {
    ConvergenceReport report;
    report.mode = "sigma-field";
    report.gaps = {{2, 0.5}, {3, 0.25}, {5, 0.25}, {9, 0.0}};
    CHECK(report.monotone_nonincreasing());
    CHECK(report.final_gap() == 0.0);
    report.gaps.push_back({17, 0.125});
    report.gaps.push_back({33, 0.5});
    CHECK(!report.monotone_nonincreasing());
}

TEST_CASE("convergence sweep produces the documented schema") {
    ConvergenceSweepConfig cfg;
    cfg.walk_depth = 4;
    cfg.grid_sizes = {2, 3, 5};
    cfg.eps_list = {0.5};
    const auto rows = run_convergence_sweep(cfg);
    CHECK(!rows.empty());
    const std::string csv = convergence_sweep_csv(rows);
    CHECK(csv.rfind("mode,n,eps,gap\n", 0) == 0);
    bool saw_paths = false, saw_bc = false;
    for (const auto& r : rows) {
        if (r.mode == "paths-in-probability") saw_paths = true;
        if (r.mode == "baxter-chacon") saw_bc = true;
        CHECK(r.gap >= 0.0);
    }
    CHECK(saw_paths);
    CHECK(saw_bc);
}
