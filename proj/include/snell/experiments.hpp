#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "snell/scenario.hpp"

namespace snell {

// Experiment configuration, mirrored one-to-one by the JSON config format.
// Ladder semantics depend on the experiment: jump indices (counterexample,
// aldous jump family), dyadic refinement levels (grid-refine), stopping-grid
// sizes (lemma-tn, discretize), binomial steps (crr), walk depths (aldous
// walk family).
struct ExperimentConfig {
    std::string experiment;
    std::vector<int> n_ladder;
    double horizon = 1.0;
    double bound_L = 1.0;
    std::string payoff = "capped-identity";
    // binomial price parameters (crr)
    double s0 = 1.0;
    double lambda = 0.1;
    double sigma = 0.3;
    double cap = 3.0;  // cap of the bounded companion payoff in crr
    int walk_depth = 8;
    std::vector<double> eps_list;
    std::vector<double> delta_list;
    std::uint64_t seed = 20240901;
    std::string out_dir;
    bool sequential = false;

    void validate() const;
};

ExperimentConfig default_config(const std::string& experiment);
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

struct Assertion {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct ExperimentReport {
    std::string experiment;
    ExperimentConfig config;
    std::string version;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::vector<Assertion> assertions;
    double wall_ms = 0.0;

    bool passed() const;
    std::string csv() const;
    nlohmann::json to_json() const;
    // Writes <experiment>.csv and <experiment>.json when out_dir is set.
    void write_outputs() const;
};

// The deterministic pair x = 1 from 1/2, x_n = 1 from 1/2 + 1/n: the value at
// L = 1/2 is 1 for the limit path and 0 for every member of the ladder.
ExperimentReport run_counterexample(const ExperimentConfig& cfg);

// Values restricted to nested dyadic stopping grids are nondecreasing and
// reach the unrestricted value at the full grid.
ExperimentReport run_grid_refine(const ExperimentConfig& cfg);

// Transports the optimal rule of the fine walk onto a ladder of discretized
// copies; reports P[tau_n != tau], the mean payoff gap and the
// Baxter-Chacon gap of the induced randomized rules.
ExperimentReport run_lemma_tn(const ExperimentConfig& cfg);

// Optimal values of discretized copies against the fine reference, with the
// filtration inclusion checked structurally per ladder member.
ExperimentReport run_discretize(const ExperimentConfig& cfg);

// Binomial price values: the diagnostic payoff obeys the closed form
// s0 * (1 + lambda*T/n)^n for lambda >= 0 (s0 for lambda < 0) and converges
// to s0 * exp(lambda*T); a capped companion payoff is reported alongside.
ExperimentReport run_crr(const ExperimentConfig& cfg);

// The tightness statistic on two families: scaled walks (vanishes at one-step
// delta, nonincreasing in delta) and paths with a fixed jump (equal to 1 at
// every ladder point).
ExperimentReport run_aldous(const ExperimentConfig& cfg);

// Grid search over per-atom stop probabilities {0, 1/4, 1/2, 3/4, 1} on small
// fixture trees: no randomized rule beats the optimal pure value, and a pure
// corner attains it. Also reports Baxter-Chacon gaps of a transported rule
// sequence.
ExperimentReport run_randomized(const ExperimentConfig& cfg);

// Dispatch on cfg.experiment.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// Seeded random scenario space for fixture sets: depth in [2, max_depth],
// at most max_leaves leaves, at most max_cells decision cells (atoms at
// levels below the last), branching 1..3 with non-uniform probabilities and
// a cumulative observable "X" with occasional value collisions.
CoupledSpace random_fixture_space(std::uint64_t seed, int max_depth, int max_leaves,
                                  int max_cells);

// Gap sweep across all four convergence modes on a discretization ladder;
// rows are (mode, n, eps, gap) matching the `converge` CSV schema. The test
// set A is an atom of the fine filtration at a_time_index (default: index 1,
// so A is fixed at an early source time); the sigma-field mode conditions the
// ladder observables at the terminal index.
struct ConvergenceSweepConfig {
    int walk_depth = 8;
    std::vector<int> grid_sizes = {2, 3, 5, 9};
    std::vector<double> eps_list = {0.5, 0.25};
    int a_time_index = -1;  // -1 = index 1
    int a_atom = -1;        // -1 = first atom
    std::string payoff = "arctan";  // payoff of the transported rule (bc mode)
    std::string out_dir;
};

struct ConvergenceSweepRow {
    std::string mode;
    int n = 0;
    double eps = 0.0;
    double gap = 0.0;
};

std::vector<ConvergenceSweepRow> run_convergence_sweep(const ConvergenceSweepConfig& cfg);
std::string convergence_sweep_csv(const std::vector<ConvergenceSweepRow>& rows);

inline const char* kVersion = "0.1.0";

}  // namespace snell
