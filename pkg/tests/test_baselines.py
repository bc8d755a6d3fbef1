import numpy as np
import pytest

from qoffload._baselines import (
    baseline_decide,
    binary_offload_decide,
    even_allocation_decide,
    head_of_line,
    local_only,
    random_offload_decide,
)
from qoffload._env_model import SystemConfig, WdState, required_power
from qoffload.codes import PolicyKind

W = 1e10


@pytest.fixture(name="config")
def fixture_config():
    return SystemConfig().validate()


@pytest.fixture(name="wide_config")
def fixture_wide_config():
    # one block of local compute covers exactly one task
    return SystemConfig(f_max_wd=2e10).validate()


def test_head_of_line(config):
    assert head_of_line(0.0, config) == 0.0
    assert head_of_line(2.5 * W, config) == pytest.approx(0.5 * W)
    assert head_of_line(2 * W, config) == W


@pytest.mark.parametrize("kind", [PolicyKind.BINARY, PolicyKind.EVEN, PolicyKind.RANDOM])
def test_empty_queue_is_idle(config, kind):
    action = baseline_decide(kind, WdState(0.0, 1e3, np.ones(5)), config, np.random.default_rng(0))
    assert action.power == 0.0
    assert action.offload_cycles == 0.0
    np.testing.assert_array_equal(action.cpu_rates, np.zeros(5))


def test_local_only_runs_at_capacity(config):
    action = local_only(WdState(2 * W, 1e3, np.zeros(5)), config)
    np.testing.assert_allclose(action.cpu_rates, np.full(5, config.f_max_wd))
    assert action.power == 0.0


def test_binary_offloads_on_strong_channel(config):
    state = WdState(1.5 * W, 1e6, np.zeros(5))
    action = binary_offload_decide(state, config)
    assert action.offload_cycles == head_of_line(state.queue_cycles, config)
    np.testing.assert_array_equal(action.cpu_rates, np.zeros(5))
    expected = required_power(config.bits_per_cycle * action.offload_cycles, 1e6, config)
    assert action.power == expected


def test_binary_stays_local_on_weak_channel(config):
    action = binary_offload_decide(WdState(W, 1e-6, np.zeros(5)), config)
    assert action.offload_cycles == 0.0
    assert action.power == 0.0
    assert np.all(action.cpu_rates > 0.0)


def test_binary_ships_whole_tasks_only(config):
    rng = np.random.default_rng(1)
    for _ in range(500):
        state = WdState(rng.uniform(0.0, 3.0) * W, 1e3 * rng.exponential(), np.zeros(5))
        action = binary_offload_decide(state, config)
        assert action.offload_cycles in (0.0, head_of_line(state.queue_cycles, config))


def test_even_with_zero_fraction_never_transmits():
    config = SystemConfig(even_fraction=0.0).validate()
    rng = np.random.default_rng(2)
    for _ in range(200):
        state = WdState(rng.uniform(0.0, 3.0) * W, 1e3 * rng.exponential(), np.zeros(5))
        assert even_allocation_decide(state, config).power == 0.0


def test_even_offloads_half_of_a_task(wide_config):
    state = WdState(W, 1e3, np.zeros(5))
    action = even_allocation_decide(state, wide_config)
    assert action.offload_cycles == pytest.approx(0.5 * W, rel=1e-9)
    expected = required_power(0.5 * wide_config.bits_per_cycle * W, 1e3, wide_config)
    assert action.power == pytest.approx(expected, rel=1e-9)


def test_random_is_reproducible(config):
    states = [WdState(q * W, 1e3, np.zeros(5)) for q in (0.3, 1.0, 0.0, 2.7)]
    first = [random_offload_decide(s, config, np.random.default_rng(5)) for s in states]
    second = [random_offload_decide(s, config, np.random.default_rng(5)) for s in states]
    for a, b in zip(first, second):
        assert a.power == b.power
        assert a.offload_cycles == b.offload_cycles
        np.testing.assert_array_equal(a.cpu_rates, b.cpu_rates)


def test_random_draws_even_when_idle(config):
    rng = np.random.default_rng(6)
    reference = np.random.default_rng(6)
    random_offload_decide(WdState(0.0, 1e3, np.zeros(5)), config, rng)
    reference.random()
    assert rng.random() == reference.random()


def test_random_fraction_is_uniform(wide_config):
    rng = np.random.default_rng(7)
    state = WdState(W, 1e3, np.zeros(5))
    fractions = np.array(
        [random_offload_decide(state, wide_config, rng).offload_cycles / W for _ in range(20_000)]
    )
    assert np.all((fractions >= 0.0) & (fractions <= 1.0))
    assert abs(fractions.mean() - 0.5) < 0.01


@pytest.mark.parametrize("kind", [PolicyKind.BINARY, PolicyKind.EVEN, PolicyKind.RANDOM])
def test_actions_are_feasible(config, kind):
    rng = np.random.default_rng(8)
    for _ in range(300):
        state = WdState(rng.uniform(0.0, 3.0) * W, 1e3 * rng.exponential(), np.zeros(5))
        action = baseline_decide(kind, state, config, rng)
        assert action.power >= 0.0
        assert np.all(action.cpu_rates >= 0.0)
        assert np.all(action.cpu_rates <= config.f_max_wd)
        assert 0.0 <= action.offload_cycles <= state.queue_cycles


def test_proposed_is_not_a_baseline(config):
    with pytest.raises(ValueError):
        baseline_decide(PolicyKind.PROPOSED, WdState(W, 1e3, np.zeros(5)), config, np.random.default_rng(0))
