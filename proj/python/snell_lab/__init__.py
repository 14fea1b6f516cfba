"""Optimal stopping values on finite filtered scenario spaces.

Thin python surface over the C++ core: scenario trees, exact Snell values,
stopping-rule transformations, path distances and the ladder experiments.
"""

from ._core import (  # noqa: F401
    CoupledSpace,
    CrrParams,
    Payoff,
    RandomizedStoppingRule,
    StepPath,
    StoppingRule,
    TimeGrid,
    __version__,
    aldous_sup,
    crr_snell_value,
    default_config_json,
    discretize_process,
    filtration_weak_gap,
    gamma_pi,
    gen_counterexample,
    gen_crr,
    gen_random_walk,
    grid_round_up,
    lemma_tn,
    make_payoff,
    never_stop_early,
    paths_in_prob_gap,
    randomized_from_pure,
    randomized_value,
    realized_times,
    rule_from_json,
    run_experiment,
    sample_randomized,
    sigma_field_gap,
    skorokhod_distance,
    snell_value,
    space_from_json,
    space_from_path,
    stop_at_root,
    stopped_value,
    uniform_distance,
    walk_increment,
)
