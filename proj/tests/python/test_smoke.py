import math

import pytest

import snell_lab as sl


def test_counterexample_values():
    x, xn = sl.gen_counterexample(8)
    assert x.eval(0.5) == 1.0
    assert xn.eval(0.5) == 0.0
    assert sl.skorokhod_distance(x, xn) == pytest.approx(1.0 / 8, abs=1e-14)
    assert sl.uniform_distance(x, xn) == 1.0

    grid = sl.TimeGrid([0.0, 0.5, 0.5 + 1.0 / 8, 1.0])
    space = sl.space_from_path(xn, grid, "X")
    report = sl.snell_value(space, "X", "capped-identity", 0.5)
    assert report["value"] == 0.0
    report = sl.snell_value(space, "X", "capped-identity", 1.0)
    assert report["value"] == 1.0


def test_crr_identity_and_martingale():
    params = sl.CrrParams(s0=1.0, lambda_=0.1, sigma=0.3, horizon=1.0, steps=100)
    report = sl.crr_snell_value(params, "identity", 1.0)
    assert report["value"] == pytest.approx((1.0 + 0.1 / 100) ** 100, abs=1e-12)
    assert report["unbounded_payoff"]

    flat = sl.CrrParams(s0=1.0, lambda_=0.0, sigma=0.2, horizon=1.0, steps=4)
    space = sl.gen_crr(flat)
    terminal = [space.value_at("S", leaf, 4) for leaf in range(space.leaf_count)]
    assert space.expectation(terminal) == pytest.approx(1.0, abs=1e-12)


def test_snell_value_and_rule_round_trip():
    walk = sl.gen_random_walk(3, 1.0)
    report = sl.snell_value(walk, "B", "arctan", 1.0)
    rule = report["rule"]
    assert sl.stopped_value(walk, "B", "arctan", rule) == pytest.approx(
        report["value"], abs=1e-10
    )
    again = sl.rule_from_json(rule.to_json())
    assert sl.realized_times(walk, again) == sl.realized_times(walk, rule)


def test_custom_python_payoff():
    walk = sl.gen_random_walk(2, 1.0)
    payoff = sl.Payoff("pyramid", lambda t, x: -abs(x), 10.0)
    report = sl.snell_value(walk, "B", payoff, 1.0)
    assert report["value"] == 0.0  # stop at the root where the walk is 0


def test_randomized_value_interpolates():
    one = sl.gen_random_walk(1, 1.0)
    rule = sl.RandomizedStoppingRule("B", 1.0, [[0.5]])
    value = sl.randomized_value(one, "B", "arctan", rule)
    at_root = sl.stopped_value(one, "B", "arctan", sl.stop_at_root(one, "B", 1.0))
    at_end = sl.stopped_value(one, "B", "arctan", sl.never_stop_early(one, "B", 1.0))
    assert value == pytest.approx(0.5 * at_root + 0.5 * at_end, abs=1e-14)


def test_gaps_and_aldous():
    walk = sl.gen_random_walk(4, 1.0)
    grid = sl.TimeGrid([0.0, 0.5, 1.0])
    space = sl.discretize_process(walk, "B", grid, "Bc")
    assert sl.paths_in_prob_gap(space, "B", "B", 0.1) == 0.0
    A = space.atom_partition("B", 4)[0]
    assert sl.sigma_field_gap(space, A, "B", 4, 0.25) == 0.0
    assert sl.filtration_weak_gap(space, A, "Bc", "B", 1e-9) > 0.0

    h = sl.walk_increment(4, 1.0)
    assert sl.aldous_sup(walk, "B", 0.25, 3.0 * h, 1.0) == 0.0


def test_conditional_expectation_tower():
    space = sl.gen_random_walk(3, 1.0)
    f = [float(i) for i in range(space.leaf_count)]
    inner = space.cond_expectation(f, "B", 2)
    outer = space.cond_expectation(inner, "B", 1)
    direct = space.cond_expectation(f, "B", 1)
    assert outer == pytest.approx(direct, abs=1e-12)


def test_run_experiment_by_name_and_dict():
    report = sl.run_experiment("counterexample")
    assert report["passed"]
    assert report["columns"] == ["n", "gamma_n", "gamma"]

    cfg = {"experiment": "crr", "n_ladder": [1, 2, 4], "crr": {"lambda": 0.0}}
    report = sl.run_experiment(cfg)
    assert report["passed"]


def test_space_json_round_trip():
    walk = sl.gen_random_walk(2, 1.0)
    back = sl.space_from_json(walk.to_json())
    assert back.leaf_count == walk.leaf_count
    assert back.observables == walk.observables
