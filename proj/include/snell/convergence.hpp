#pragma once

#include <functional>
#include <string>
#include <vector>

#include "snell/scenario.hpp"
#include "snell/stopping.hpp"

namespace snell {

// P[ d_J1(path of coarse, path of fine) >= eps ], computed exactly over the
// leaves of a common space.
double paths_in_prob_gap(const CoupledSpace& space, const std::string& fine,
                         const std::string& coarse, double eps);

// P[ |E[1_A | F^obs_k] - 1_A| >= eps ] for a leaf-set A.
double sigma_field_gap(const CoupledSpace& space, const std::vector<int>& A_leaves,
                       const std::string& observable, int time_index, double eps);

// Per leaf, the two conditional-expectation martingale step paths
// t -> E[1_A | F^coarse_t] and t -> E[1_A | F^fine_t] over the tree grid;
// returns P[ d_J1 between them >= eps ].
double filtration_weak_gap(const CoupledSpace& space, const std::vector<int>& A_leaves,
                           const std::string& coarse, const std::string& fine, double eps);

struct BcTestFunction {
    std::string name;
    std::function<double(double)> f;  // bounded continuous function of time
};

// f in {1, t/T, cos(pi k t / T), k = 1..4}: a small separating family on a
// finite grid.
std::vector<BcTestFunction> default_bc_test_functions(double horizon);

// Convergence statistic for randomized stopping rules:
//   gap(n) = max over (f, B) of | E[1_B f(tau_n)] - E[1_B f(tau)] |,
// expectations over leaves and stop-time mixture. Returns one (n, gap) pair
// per rule of the sequence. Throws std::invalid_argument on empty families.
std::vector<std::pair<int, double>> bc_gap(const CoupledSpace& space,
                                           const std::vector<RandomizedStoppingRule>& seq,
                                           const RandomizedStoppingRule& limit,
                                           const std::vector<BcTestFunction>& test_fns,
                                           const std::vector<std::vector<int>>& test_sets);

struct ConvergenceReport {
    std::string mode;  // paths-in-probability | sigma-field | filtration-weak | baxter-chacon
    double eps = 0.0;
    std::vector<std::pair<int, double>> gaps;  // (n, gap)
    bool monotone_nonincreasing() const;
    double final_gap() const { return gaps.empty() ? 0.0 : gaps.back().second; }
};

}  // namespace snell
