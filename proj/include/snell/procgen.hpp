#pragma once

#include <string>
#include <utility>

#include "snell/scenario.hpp"
#include "snell/step_path.hpp"

namespace snell {

// Parameters of the binomial price recursion
//   S_{k+1} = S_k * (1 + lambda*T/n + sigma * dB_{k+1}),  dB = +-sqrt(T/n),
// on a uniform binary tree with branch probabilities 1/2.
struct CrrParams {
    double s0 = 1.0;      // initial price, > 0
    double lambda = 0.0;  // drift per unit time
    double sigma = 0.2;   // volatility, > 0
    double horizon = 1.0;
    int steps = 1;

    void validate() const;  // throws std::invalid_argument
    double up_factor() const;
    double down_factor() const;
};

// Full binary scenario tree with observables "B" (scaled coin-flip walk) and
// "S" (price). The node count is 2^(steps+1)-1; steps above 20 are rejected,
// use crr_snell_value for large lattices.
CoupledSpace gen_crr(const CrrParams& p);

// Uniform binary tree with observable "B": B_k = sqrt(T/n) * sum of +-1 coin
// flips, extended as a step path constant on [kT/n, (k+1)T/n).
CoupledSpace gen_random_walk(int steps, double horizon);

// Scaled increment of the n-step walk on [0, T].
double walk_increment(int steps, double horizon);

// New space with an added observable equal at every node to the source value
// at the largest grid point <= the node's time. Grid points must match tree
// times within 1e-12. The new observable's filtration is coarser than (or
// equal to) the source's.
CoupledSpace discretize_process(const CoupledSpace& space, const std::string& source,
                                const TimeGrid& grid, const std::string& new_name);

// Default name "<source>@<k>pts".
std::string discretized_name(const std::string& source, const TimeGrid& grid);

// The deterministic pair on [0,1]: x jumps to 1 at 1/2, xn at 1/2 + 1/n.
// Requires n >= 3 so that the shifted jump stays inside (0, 1).
std::pair<StepPath, StepPath> gen_counterexample(int n);

// Single-scenario space (one weight-1 chain) realizing a deterministic path
// sampled on the given grid, as observable `name`.
CoupledSpace space_from_path(const StepPath& path, const TimeGrid& grid, const std::string& name);

}  // namespace snell
