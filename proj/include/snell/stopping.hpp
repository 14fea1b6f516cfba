#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "snell/scenario.hpp"

namespace snell {

// Adapted stop/continue decisions, constant on the atoms of the declared
// observable at every time index (adaptedness is structural). decisions[k]
// is indexed by the atom index of the observable's filtration at level k.
// Any scenario not stopped earlier stops at the last grid time <= bound.
struct StoppingRule {
    std::string observable;
    double bound = 0.0;  // L
    std::vector<std::vector<std::uint8_t>> decisions;  // [time index][atom] -> 1 = stop
};

// Behavioral randomized rule: stop_prob[k][atom] is the probability of
// stopping at time index k given the rule has not stopped before. Whatever
// mass is left stops at the last grid time <= bound, so the cumulative stop
// probability reaches 1 on every scenario.
struct RandomizedStoppingRule {
    std::string observable;
    double bound = 0.0;
    std::vector<std::vector<double>> stop_prob;  // [time index][atom] in [0, 1]
};

// Index of the last tree time <= bound (within 1e-12); throws
// std::invalid_argument when no grid time qualifies.
int horizon_index(const ScenarioTree& tree, double bound);

// Realized stopping time per leaf: the first grid time along the leaf's atom
// chain whose decision is stop, else the last grid time <= bound.
std::vector<int> realized_indices(const CoupledSpace& space, const StoppingRule& rule);
double realized_time(const CoupledSpace& space, const StoppingRule& rule, int leaf_index);

// Builds the rule realizing the given per-leaf stopping indices. Validates
// that {tau <= t_k} is a union of atoms at every level (throws
// std::logic_error otherwise: the indices are not adapted to the observable).
StoppingRule rule_from_realized_indices(const CoupledSpace& space, const std::string& observable,
                                        const std::vector<int>& stop_index, double bound);

// Stop-everywhere / stop-at-bound rules.
StoppingRule stop_at_root(const CoupledSpace& space, const std::string& observable, double bound);
StoppingRule never_stop_early(const CoupledSpace& space, const std::string& observable, double bound);

// Approximation of a stopping rule on a coarser information flow. For each
// value t_j taken by tau, with A_j = {tau = t_j}, the transported time is
//   tau_n = min{ t_j : E[1_{A_j} | F^target_{t_j}] > 1/2 },
// with ties (conditional expectation exactly 1/2) not selected, and
// tau_n = max{t_j} on the (typically small) event where no index qualifies.
// The result is adapted to `target` and bounded by tau's bound.
StoppingRule lemma_tn(const CoupledSpace& space, const StoppingRule& tau,
                      const std::string& target);

// Rounds realized times up to the grid: a realized time in (g_i, g_{i+1}]
// maps to g_{i+1}; grid values stay fixed. The grid must contain the rule's
// bound and its points must match tree times within 1e-12. The result is
// adapted to the same observable, >= tau pointwise and <= the bound.
StoppingRule grid_round_up(const CoupledSpace& space, const StoppingRule& tau,
                           const TimeGrid& grid);

// Pure rule obtained by thresholding the cumulative stop probability along
// each scenario at level v in [0, 1]: stop at the first k with C_k >= v
// (for v = 0, the first k with C_k > 0, so that embedded pure rules are
// recovered for every v).
StoppingRule sample_randomized(const CoupledSpace& space, const RandomizedStoppingRule& rule,
                               double v);

// Embedding of a pure rule as a randomized one (stop probabilities 0/1).
RandomizedStoppingRule randomized_from_pure(const CoupledSpace& space, const StoppingRule& rule);

// Probability mass P[stop at time index k | leaf] for k = 0..horizon index.
std::vector<std::vector<double>> stop_mass_by_leaf(const CoupledSpace& space,
                                                   const RandomizedStoppingRule& rule);

}  // namespace snell
