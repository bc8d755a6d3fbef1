import math

import numpy as np
import pytest
from scipy import integrate, special

from qoffload._diagnostics import (
    bellman_residual,
    build_tiny_instance,
    evaluate_policy,
    exp_integral_e1,
    finite_diff_check,
    gradcheck,
    greedy_policy,
    oracle_compare,
    power_rollout_cost,
    prop1_bound,
    prop1_monitor,
    random_instance,
    rollout_cost,
    table_evaluator,
    tiny_config,
    value_iteration_oracle,
)
from qoffload._diagnostics.oracle import COST_GAP_TOLERANCE
from qoffload._util.errors import OracleConvergenceError
from qoffload.codes import GradTarget


@pytest.fixture(name="instance", scope="module")
def fixture_instance():
    return build_tiny_instance()


@pytest.fixture(name="solution", scope="module")
def fixture_solution(instance):
    return value_iteration_oracle(instance)


# exponential integral


def test_e1_matches_scipy():
    for x in np.logspace(-3.0, 1.0, 50):
        assert exp_integral_e1(x) == pytest.approx(special.exp1(x), rel=1e-12)


def test_e1_matches_quadrature():
    for x in np.logspace(-3.0, 1.0, 50):
        value, _ = integrate.quad(lambda t: math.exp(-t) / t, x, np.inf, epsabs=0.0, epsrel=1e-11, limit=200)
        assert exp_integral_e1(x) == pytest.approx(value, rel=1e-8)


def test_e1_reference_values():
    assert exp_integral_e1(1.0) == pytest.approx(0.21938393439552, rel=1e-12)
    assert exp_integral_e1(math.log(1.0 / 0.9)) == pytest.approx(1.7758, rel=1e-4)


def test_e1_upper_bound():
    for x in np.logspace(-3.0, 1.5, 40):
        assert exp_integral_e1(x) < math.exp(-x) / x


@pytest.mark.parametrize("x", [0.0, -1.0])
def test_e1_rejects_nonpositive(x):
    with pytest.raises(ValueError):
        exp_integral_e1(x)


# stationarity bound


def test_prop1_bound_examples():
    assert prop1_bound(0.0, 0.9) == 0.0
    assert prop1_bound(10.0, 0.9) == pytest.approx(5.6312, rel=1e-4)
    assert prop1_bound(10.0, 0.9) == pytest.approx(10.0 / special.exp1(math.log(1.0 / 0.9)), rel=1e-12)


def test_prop1_bound_decreases_with_discount():
    bounds = [prop1_bound(1.0, gamma) for gamma in (0.5, 0.7, 0.9, 0.99)]
    assert all(a > b for a, b in zip(bounds, bounds[1:]))


def test_prop1_bound_rejects_bad_arguments():
    with pytest.raises(ValueError):
        prop1_bound(1.0, 1.0)
    with pytest.raises(ValueError):
        prop1_bound(-1.0, 0.9)


def test_prop1_monitor_running_min():
    report = prop1_monitor([4.0, 2.0], [[3.0, 1.0, 2.0], [1.0, 1.0, 0.0, 9.0]], 0.9)
    np.testing.assert_allclose(report.running_min, [5.0, 1.0, 1.0])
    assert report.bound == pytest.approx(prop1_bound(3.0, 0.9))
    assert report.final_min == 1.0
    assert report.satisfied == (1.0 <= report.bound)


def test_prop1_monitor_without_blocks():
    report = prop1_monitor([1.0], [[]], 0.9)
    assert report.running_min.size == 0
    assert not report.satisfied


# gradient check


def test_gradcheck_passes():
    report = gradcheck(trials=10, seed=0)
    assert set(report.max_errors) == {target.value for target in GradTarget}
    assert report.passed, report.max_errors
    assert report.to_dict()["passed"]


def test_gradcheck_is_reproducible():
    first = gradcheck(trials=3, seed=4)
    second = gradcheck(trials=3, seed=4)
    assert first.max_errors == second.max_errors


@pytest.mark.parametrize("target", list(GradTarget))
def test_finite_diff_check_rejects_mismatched_target(target):
    instance = random_instance(target, np.random.default_rng(0))
    other = next(t for t in GradTarget if t is not target)
    with pytest.raises(ValueError):
        finite_diff_check(other, instance)


def test_gradcheck_rejects_zero_trials():
    with pytest.raises(ValueError):
        gradcheck(trials=0)


# tiny MDP oracle


def test_tiny_instance_shape(instance):
    assert instance.num_states == 9 * 2 * 2
    assert instance.num_actions == 5
    assert instance.powers[0] == 0.0
    assert np.all(np.diff(instance.powers) > 0.0)


def test_tiny_config_rejects_more_devices():
    with pytest.raises(ValueError):
        build_tiny_instance(tiny_config(num_wds=2, arrival_prob=0.4))


def test_value_iteration_converges(instance, solution):
    assert solution.change <= 1e-9
    assert bellman_residual(table_evaluator(solution.q_table), instance, 500, np.random.default_rng(0)) <= 1e-8


def test_value_iteration_matches_policy_evaluation(instance, solution):
    np.testing.assert_allclose(evaluate_policy(instance, solution.policy), solution.values, atol=1e-6)


def test_greedy_policy_of_table(instance, solution):
    np.testing.assert_array_equal(greedy_policy(instance, table_evaluator(solution.q_table)), solution.policy)


def test_optimal_policy_beats_every_constant_policy(instance, solution):
    for a in range(instance.num_actions):
        constant = evaluate_policy(instance, np.full(instance.num_states, a))
        assert np.all(solution.values <= constant + 1e-6)


def test_no_arrivals_keeps_empty_queue_free():
    instance = build_tiny_instance(tiny_config(arrival_prob=0.0))
    solution = value_iteration_oracle(instance)
    for gain_index in range(2):
        assert solution.values[instance.state_index(0, gain_index, 0)] == 0.0


def test_value_iteration_reports_non_convergence(instance):
    with pytest.raises(OracleConvergenceError):
        value_iteration_oracle(instance, max_sweeps=1)


def test_rollout_is_reproducible(instance, solution):
    first = rollout_cost(instance, solution.policy, np.random.default_rng(3), episodes=5, horizon=50)
    second = rollout_cost(instance, solution.policy, np.random.default_rng(3), episodes=5, horizon=50)
    assert first == second
    assert first >= 0.0


def test_oracle_compare_report():
    report = oracle_compare(num_seeds=2, master_seed=1, blocks=100, residual_samples=50)
    summary = report.to_dict()
    assert summary["num_seeds"] == 2
    assert len(summary["seeds"]) == 2
    assert report.oracle_residual <= 1e-8
    assert all(math.isfinite(r.learned_cost) for r in report.results)
    assert all(math.isfinite(r.greedy_cost) for r in report.results)
    assert summary["greedy_cost"] == report.greedy_cost


def test_oracle_compare_rejects_zero_seeds():
    with pytest.raises(ValueError):
        oracle_compare(num_seeds=0)


def test_strong_channel_offloads_at_whole_task_power(instance):
    # queue of one task, strong channel, with and without an arrival
    for s in (instance.state_index(4, 1, 0), instance.state_index(4, 1, 1)):
        assert instance.executed_power[s, instance.num_actions - 1] > 0.0
        assert instance.next_queue[s, instance.num_actions - 1] == 4 * instance.decode(s)[2]


def test_power_rollout_matches_grid_rollout(instance):
    for a in range(instance.num_actions):
        policy = np.full(instance.num_states, a)
        grid = rollout_cost(instance, policy, np.random.default_rng(9), episodes=5, horizon=60)
        power = power_rollout_cost(
            instance, float(instance.powers[a]), np.random.default_rng(9), episodes=5, horizon=60
        )
        assert power == grid


@pytest.mark.slow
def test_learned_power_is_close_to_optimal():
    report = oracle_compare(num_seeds=3, master_seed=0, blocks=2000, residual_samples=500)
    assert report.cost_gap <= COST_GAP_TOLERANCE, report.to_dict()
    assert report.improved_seeds >= 2
