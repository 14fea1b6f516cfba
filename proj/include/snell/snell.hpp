#pragma once

#include <functional>
#include <optional>
#include <string>

#include "snell/procgen.hpp"
#include "snell/scenario.hpp"
#include "snell/stopping.hpp"

namespace snell {

// A named gain function gamma(t, x) with a recorded bound (sup |gamma|,
// infinity for unbounded diagnostics). Finite bounds are spot-checked on a
// 100x100 sample grid at construction.
class Payoff {
public:
    Payoff(std::string name, std::function<double(double, double)> gamma, double bound,
           std::string note, double t_max = 10.0, double x_min = 0.0, double x_max = 10.0);

    double operator()(double t, double x) const { return gamma_(t, x); }
    const std::string& name() const { return name_; }
    double bound() const { return bound_; }
    bool bounded() const;
    const std::string& note() const { return note_; }

private:
    std::string name_;
    std::function<double(double, double)> gamma_;
    double bound_;
    std::string note_;
};

// Registry lookup by name: "capped-identity" (x ^ 2), "identity" (unbounded
// diagnostic), "arctan", "capped:<C>" (x ^ C). Throws std::invalid_argument
// for unknown names.
Payoff make_payoff(const std::string& name);

struct ValueReport {
    double value = 0.0;
    std::optional<StoppingRule> rule;       // earliest-optimal rule, when available
    std::optional<TimeGrid> restriction;    // stopping grid, for restricted problems
    std::string observable;
    std::string payoff;
    double bound_L = 0.0;
    std::string tree_id;
    bool unbounded_payoff = false;  // diagnostic payoffs void the boundedness assumption
    double wall_ms = 0.0;
};

// E[gamma(tau, X_tau)] of a pure rule.
double stopped_value(const CoupledSpace& space, const std::string& observable,
                     const Payoff& payoff, const StoppingRule& rule);

// Optimal stopping value sup E[gamma(tau, X_tau)] over all adapted rules
// bounded by L, by backward induction on the observable's filtration atoms
// over grid times <= L. Ties between stopping and continuing stop (the
// reported rule is the earliest optimal one).
ValueReport snell_value(const CoupledSpace& space, const std::string& observable,
                        const Payoff& payoff, double L);

// Same, with stopping restricted to the grid pi (which must contain L and be
// a subset of the tree times); between allowed times the induction takes pure
// continuation.
ValueReport gamma_pi(const CoupledSpace& space, const std::string& observable,
                     const Payoff& payoff, const TimeGrid& pi, double L);

// Expectation over leaves and over the rule's stop-time mixture; linear in
// each atom's stop probability.
double randomized_value(const CoupledSpace& space, const std::string& observable,
                        const Payoff& payoff, const RandomizedStoppingRule& rule);

// Exact value of
//   sup { P[|X_S - X_T| >= eps] : S, T adapted stopping times,
//         S <= T <= S + delta, T <= L }
// by nested backward induction: for each atom at time t the inner recursion
// optimizes T over [t, min(t + delta, L)] against the atom's value, and the
// outer recursion optimizes S.
double aldous_sup(const CoupledSpace& space, const std::string& observable, double delta,
                  double eps, double L);

// Optimal stopping value of the binomial price model on its recombining
// lattice, valid for any number of steps (the price is Markov for its natural
// filtration, so the atom recursion collapses to the lattice). Reports the
// value only; no rule is extracted.
ValueReport crr_snell_value(const CrrParams& params, const Payoff& payoff, double L);

// Short content fingerprint of a space (times, structure, observables).
std::string tree_fingerprint(const CoupledSpace& space);

}  // namespace snell
