// Acceptance suite: end-to-end checks of the laboratory's guarantees, one
// printed line per criterion. Exit code 0 iff every criterion holds within
// its stated tolerance and time budget.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "snell/convergence.hpp"
#include "snell/experiments.hpp"
#include "snell/procgen.hpp"
#include "snell/snell.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace snell;

namespace {

int failures = 0;

struct Criterion {
    std::string name;
    double budget_s;
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [" << what << "]";
        }
    }
};

void run(int index, const std::string& name, double budget_s,
         const std::function<void(Criterion&)>& body) {
    Criterion c{name, budget_s};
    const auto start = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.pass = false;
        c.detail << " [exception: " << e.what() << "]";
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (elapsed >= budget_s) {
        c.pass = false;
        c.detail << " [over time budget " << budget_s << "s]";
    }
    if (!c.pass) ++failures;
    std::printf("[%s] criterion %d: %s (%.2fs / %.0fs)%s\n", c.pass ? "PASS" : "FAIL", index,
                name.c_str(), elapsed, budget_s, c.detail.str().c_str());
    std::fflush(stdout);
}

}  // namespace

int main() {
    // 1. Exact values of the deterministic pair at L = 1/2.
    run(1, "counterexample exactness", 1.0, [](Criterion& c) {
        ExperimentConfig cfg = default_config("counterexample");
        cfg.n_ladder = {4, 8, 16, 32};
        const ExperimentReport report = run_counterexample(cfg);
        c.require(report.passed(), "experiment assertions");
        for (const auto& row : report.rows) {
            c.require(row[1] == "0", "gamma_n must be exactly 0");
            c.require(row[2] == "1", "gamma must be exactly 1");
        }
    });

    // 2. Backward induction equals frontier enumeration on random trees.
    run(2, "optimal value equals brute-force enumeration", 30.0, [](Criterion& c) {
        std::mt19937_64 payoff_rng(4242);
        int checked = 0;
        for (std::uint64_t seed = 0; seed < 200; ++seed) {
            const CoupledSpace space = random_fixture_space(1000 + seed, 4, 16, 1000);
            for (int p = 0; p < 3; ++p) {
                const Payoff payoff = testing::random_payoff(payoff_rng, static_cast<int>(seed));
                const double dp = snell_value(space, "X", payoff, 1.0).value;
                const double brute = testing::best_stopping_value(space, "X", payoff, 1.0);
                c.require(std::abs(dp - brute) <= 1e-10, "tree seed " + std::to_string(seed));
                ++checked;
            }
        }
        c.require(checked == 600, "600 tree/payoff pairs");
    });

    // 3. Binomial identity and convergence to the exponential limit.
    run(3, "binomial closed form and limit", 10.0, [](Criterion& c) {
        const Payoff diagnostic = make_payoff("identity");
        const double lambda = 0.1, T = 1.0, s0 = 1.0;
        std::vector<int> ladder{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 50, 100, 200};
        double gap100 = 0.0, gap200 = 0.0;
        for (int n : ladder) {
            CrrParams p;
            p.s0 = s0;
            p.lambda = lambda;
            p.sigma = 0.3;
            p.horizon = T;
            p.steps = n;
            const double value = crr_snell_value(p, diagnostic, T).value;
            const double closed = s0 * std::pow(1.0 + lambda * T / n, n);
            c.require(std::abs(value - closed) <= 1e-12, "closed form at n=" + std::to_string(n));
            const double limit_gap = std::abs(value - s0 * std::exp(lambda * T));
            if (n == 100) gap100 = limit_gap;
            if (n == 200) gap200 = limit_gap;
        }
        c.require(gap200 < 3e-5, "limit gap at n=200");
        const double ratio = gap200 / gap100;
        c.require(ratio >= 0.4 && ratio <= 0.6, "gap must halve from n=100 to n=200");
    });

    // 4. Restricted-grid values increase to the unrestricted value.
    run(4, "grid-refinement monotonicity", 10.0, [](Criterion& c) {
        const CoupledSpace walk = gen_random_walk(16, 1.0);
        const Payoff payoff = make_payoff("arctan");
        const double gamma = snell_value(walk, "B", payoff, 1.0).value;
        double prev = -1e300;
        double finest = 0.0;
        for (int level = 1; level <= 4; ++level) {
            const int size = (1 << level) + 1;
            std::vector<double> pts;
            for (int j = 0; j < size; ++j)
                pts.push_back(walk.tree().times()[static_cast<std::size_t>(j * 16 / (size - 1))]);
            const double value = gamma_pi(walk, "B", payoff, TimeGrid(pts), 1.0).value;
            c.require(value >= prev - 1e-10, "nondecreasing at level " + std::to_string(level));
            prev = value;
            finest = value;
        }
        c.require(finest == gamma, "full grid must reproduce gamma exactly");
    });

    // 5. Randomized stopping cannot beat pure stopping; a corner attains it.
    run(5, "randomized grid search never exceeds the pure optimum", 60.0, [](Criterion& c) {
        ExperimentConfig cfg = default_config("randomized");
        cfg.seed = 7;
        const ExperimentReport report = run_randomized(cfg);
        for (const Assertion& a : report.assertions)
            c.require(a.pass, a.name + ": " + a.detail);
        int grid_rows = 0;
        for (const auto& row : report.rows)
            if (row[0] == "grid") ++grid_rows;
        c.require(grid_rows >= 8, "at least eight fixture trees");
    });

    // 6. Transported rules converge along the discretization ladder.
    run(6, "rule transport on the discretization ladder", 30.0, [](Criterion& c) {
        const ExperimentReport report = run_lemma_tn(default_config("lemma-tn"));
        c.require(report.config.walk_depth == 8, "depth-8 driver");
        c.require(report.config.n_ladder == std::vector<int>{2, 3, 5, 9}, "grid sizes 2,3,5,9");
        for (const Assertion& a : report.assertions)
            c.require(a.pass, a.name + ": " + a.detail);
    });

    // 7. Tightness statistic separates the two families.
    run(7, "tightness dichotomy", 60.0, [](Criterion& c) {
        ExperimentConfig cfg = default_config("aldous");
        cfg.n_ladder = {4, 8, 16};
        const ExperimentReport report = run_aldous(cfg);
        for (const Assertion& a : report.assertions)
            c.require(a.pass, a.name + ": " + a.detail);
        for (const auto& row : report.rows) {
            if (row[0] == "jump") c.require(row[4] == "1", "jump-family sup must be 1");
        }
    });

    // 8. Exact path distance against matching enumeration.
    run(8, "path distance equals matching enumeration", 10.0, [](Criterion& c) {
        std::mt19937_64 rng(20240902);
        for (int i = 0; i < 500; ++i) {
            const StepPath a = testing::random_step_path(rng, 6);
            const StepPath b = testing::random_step_path(rng, 6);
            c.require(std::abs(skorokhod_distance(a, b) - testing::j1_enumerate(a, b)) <= 1e-12,
                      "pair " + std::to_string(i));
        }
        for (int n : {4, 8, 16}) {
            const auto [x, xn] = gen_counterexample(n);
            c.require(std::abs(skorokhod_distance(x, xn) - 1.0 / n) <= 1e-12,
                      "pair distance must be 1/n");
        }
    });

    // 9. Conditional expectations: tower, mean preservation, atom nesting.
    run(9, "conditional-expectation laws", 10.0, [](Criterion& c) {
        std::mt19937_64 rng(99);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const CoupledSpace space = random_fixture_space(5000 + seed, 5, 24, 10000);
            const int n = space.tree().leaf_count();
            std::vector<double> f(static_cast<std::size_t>(n));
            for (double& v : f) v = dist(rng);
            const double mean = expectation(space, f);
            for (int k = 0; k <= space.depth(); ++k) {
                const std::vector<double> hk = cond_expectation(space, f, "X", k);
                c.require(std::abs(expectation(space, hk) - mean) <= 1e-10,
                          "mean preservation, seed " + std::to_string(seed));
                for (int kp = k; kp <= space.depth(); ++kp) {
                    const std::vector<double> tower =
                        cond_expectation(space, cond_expectation(space, f, "X", kp), "X", k);
                    for (std::size_t li = 0; li < tower.size(); ++li)
                        c.require(std::abs(tower[li] - hk[li]) <= 1e-10,
                                  "tower, seed " + std::to_string(seed));
                }
            }
            for (int k = 0; k < space.depth(); ++k) {
                const AtomPartition coarse = atom_partition(space, "X", k);
                const AtomPartition fine = atom_partition(space, "X", k + 1);
                for (const auto& atom : fine.atoms) {
                    bool nested = false;
                    for (const auto& holder : coarse.atoms)
                        if (std::includes(holder.begin(), holder.end(), atom.begin(), atom.end()))
                            nested = true;
                    c.require(nested, "atom nesting, seed " + std::to_string(seed));
                }
            }
        }
    });

    if (failures == 0) {
        std::printf("acceptance: all criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d criterion(s) failed\n", failures);
    return 1;
}
