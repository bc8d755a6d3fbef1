import math

import numpy as np
import pytest

from qoffload._diagnostics import finite_diff_check, random_instance
from qoffload._env_model import (
    SystemConfig,
    WdAction,
    WdState,
    achievable_bits,
    local_energy,
    offload_energy,
    required_power,
    residual_cycles,
)
from qoffload._qfunc import FeatureBank, features
from qoffload._util.errors import LearnerDivergenceError
from qoffload._wd_agent import (
    WdLearner,
    WdUpdate,
    algorithm1_block,
    gd_step_wd,
    grad_power,
    grad_theta,
    local_workload,
    project_action,
    td_error_wd,
    wd_feature_scales,
    wd_reward,
)
from qoffload.codes import GradTarget

W = 1e10
MEAN_GAIN = 1e3


@pytest.fixture(name="config")
def fixture_config():
    return SystemConfig().validate()


@pytest.fixture(name="learner")
def fixture_learner(config):
    return WdLearner.create(config, MEAN_GAIN, seed=3)


@pytest.fixture(name="unit_learner")
def fixture_unit_learner():
    # p_ref = 1 W and the power steps with theta
    config = SystemConfig(power_ref=1.0, action_step_scale=1.0).validate()
    return WdLearner.create(config, MEAN_GAIN, seed=3)


def random_state(rng, config, max_tasks=3.0):
    return WdState(
        rng.uniform(0.0, max_tasks) * W,
        MEAN_GAIN * rng.exponential(),
        (rng.random(config.slots_per_block) < 0.4).astype(float),
    )


# reward and TD error


def test_wd_reward_zero(config):
    assert wd_reward(0.0, np.zeros(5), 0.0, config) == 0.0


def test_wd_reward_one_task_in_queue(config):
    assert wd_reward(W, np.zeros(5), 0.0, config) == 1.0


def test_wd_reward_matches_stage_cost(config):
    rng = np.random.default_rng(0)
    for _ in range(200):
        q = rng.uniform(0.0, 3.0) * W
        rates = rng.uniform(0.0, 1e9, 5)
        power = rng.uniform(0.0, 2.0)
        expected = q / W + (local_energy(rates, config) + offload_energy(power, config))
        assert wd_reward(q, rates, power, config) == expected


def test_td_error_examples():
    phi_t = np.array([0.25, 0.25])
    phi_next = np.array([1.5, 0.5])
    assert td_error_wd(3.0, np.zeros(2), phi_t, phi_next, 0.9) == 3.0
    assert td_error_wd(1.0, np.array([1.0, 1.0]), phi_t, phi_next, 0.9) == pytest.approx(2.3, rel=1e-12)
    # fixed point: gamma = 0 and theta . phi_t = r
    assert td_error_wd(0.5, np.array([1.0, 1.0]), phi_t, phi_next, 0.0) == 0.0


def test_td_error_rejects_length_mismatch():
    with pytest.raises(ValueError):
        td_error_wd(1.0, np.zeros(3), np.zeros(2), np.zeros(2), 0.9)


# gradients


def test_grad_power_examples(config):
    bank = FeatureBank.create(5, config.feature_dim, wd_feature_scales(config, MEAN_GAIN))
    rng = np.random.default_rng(1)
    phi_t, phi_next = rng.random(config.feature_dim), rng.random(config.feature_dim)
    theta = rng.standard_normal(config.feature_dim)
    assert grad_power(2.0, np.zeros(config.feature_dim), bank, phi_t, phi_next, config) == pytest.approx(
        2.0 * config.slot_seconds
    )
    assert grad_power(0.0, theta, bank, phi_t, phi_next, config) == 0.0


def test_grad_theta_examples():
    phi_t = np.array([0.2, 0.7, 0.4])
    phi_next = np.array([0.9, 0.1, 0.5])
    np.testing.assert_array_equal(grad_theta(0.0, phi_t, phi_next, 0.9), np.zeros(3))
    np.testing.assert_allclose(grad_theta(1.5, phi_t, phi_next, 0.0), -1.5 * phi_t)


@pytest.mark.parametrize("target", [GradTarget.GRAD_POWER, GradTarget.GRAD_THETA])
def test_gradients_match_finite_differences(target):
    rng = np.random.default_rng(7)
    for _ in range(20):
        instance = random_instance(target, rng)
        assert finite_diff_check(target, instance, 1e-6) <= 1e-5


def test_grad_theta_exact_at_zero_parameters():
    rng = np.random.default_rng(8)
    for _ in range(10):
        instance = random_instance(GradTarget.GRAD_THETA, rng, zero_params=True)
        assert finite_diff_check(GradTarget.GRAD_THETA, instance, 1e-6) <= 1e-7


def test_feature_scales(config):
    whole_task = required_power(config.bits_per_cycle * W, MEAN_GAIN, config)
    scales = wd_feature_scales(config, MEAN_GAIN)
    np.testing.assert_array_equal(scales, [whole_task, W, MEAN_GAIN, 1.0, 1.0, 1.0, 1.0, 1.0])
    fixed = wd_feature_scales(config.replace(power_ref=1.0), MEAN_GAIN)
    assert fixed[0] == 1.0


# gradient step


def test_gd_step_projects_power_to_zero(unit_learner):
    unit_learner.power = 0.1
    gd_step_wd(unit_learner, 10.0, np.zeros(unit_learner.theta.shape), 0.05)
    assert unit_learner.power == 0.0


def test_gd_step_scales_the_power_step(learner):
    learner.power = 1.0
    p_ref = learner.power_ref
    gd_step_wd(learner, -2.0, np.zeros(learner.theta.shape), 0.05)
    assert learner.power == pytest.approx(1.0 + 0.05 * learner.step_scale * p_ref * p_ref * 2.0)
    assert learner.step_scale == 0.01


def test_gd_step_zero_gradient_keeps_state(learner):
    learner.power = 0.7
    learner.theta = np.linspace(-1.0, 1.0, learner.theta.shape[0])
    before = learner.theta.copy()
    gd_step_wd(learner, 0.0, np.zeros(learner.theta.shape), 0.01)
    assert learner.power == 0.7
    np.testing.assert_array_equal(learner.theta, before)
    assert learner.step == 1
    assert learner.last_rel_change == 0.0
    assert learner.converged_at == 1


def test_gd_step_theta_update_is_exact(learner):
    rng = np.random.default_rng(2)
    learner.theta = rng.standard_normal(learner.theta.shape[0])
    gradient = rng.standard_normal(learner.theta.shape[0])
    expected = learner.theta - 0.03 * gradient
    gd_step_wd(learner, 0.0, gradient, 0.03)
    np.testing.assert_array_equal(learner.theta, expected)


def test_gd_step_relative_change_from_zero_is_infinite(learner):
    gd_step_wd(learner, 0.0, np.ones(learner.theta.shape), 0.01)
    assert learner.last_rel_change == math.inf
    assert not learner.converged


def test_gd_step_rejects_non_finite_gradient(learner):
    with pytest.raises(LearnerDivergenceError) as info:
        gd_step_wd(learner, math.nan, np.zeros(learner.theta.shape), 0.01, block=12)
    assert info.value.learner == "wd0"
    assert info.value.block == 12


def test_gd_step_rejects_overflowing_power(unit_learner):
    unit_learner.power = 1.0
    with pytest.raises(LearnerDivergenceError, match="overflowed"):
        gd_step_wd(unit_learner, -1e308, np.zeros(unit_learner.theta.shape), 1e10, block=4)
    assert unit_learner.power == 1.0
    assert unit_learner.step == 0


def test_grad_norm_of_huge_gradient_is_finite(config):
    update = WdUpdate(
        action=WdAction.idle(config),
        reward=0.0,
        td_error=0.0,
        power_gradient=1e200,
        theta_gradient=np.full(config.feature_dim, 1e200),
        rel_change=0.0,
    )
    assert update.grad_norm == pytest.approx(1e200 * math.sqrt(config.feature_dim + 1))


def test_grad_norm_examples(config):
    update = WdUpdate(WdAction.idle(config), 0.0, 0.0, 3.0, np.array([4.0, 0.0]), 0.0)
    assert update.grad_norm == 5.0
    update = WdUpdate(WdAction.idle(config), 0.0, 0.0, 0.0, np.zeros(2), 0.0)
    assert update.grad_norm == 0.0


def test_gd_step_rejects_negative_step(learner):
    with pytest.raises(ValueError):
        gd_step_wd(learner, 0.0, np.zeros(learner.theta.shape), -0.1)


def test_step_schedule(learner):
    assert learner.step_size() == learner.alpha0
    learner.step = int(learner.tau0)
    assert learner.step_size() == pytest.approx(learner.alpha0 / 2.0)


# projection


def test_project_action_empty_queue(config):
    action = project_action(1.0, WdState(0.0, MEAN_GAIN, np.zeros(5)), config)
    assert action.power == 0.0
    np.testing.assert_array_equal(action.cpu_rates, np.zeros(5))
    assert action.offload_cycles == 0.0


def test_project_action_half_task():
    config = SystemConfig(f_max_wd=2e10).validate()
    state = WdState(W, MEAN_GAIN, np.zeros(5))
    target = required_power(0.5 * config.bits_per_cycle * W, MEAN_GAIN, config)
    action = project_action(target, state, config)
    n, tau = config.slots_per_block, config.slot_seconds
    np.testing.assert_allclose(action.cpu_rates, np.full(n, 0.5 * W / (n * tau)), rtol=1e-9)
    assert action.offload_cycles == pytest.approx(0.5 * W, rel=1e-9)
    assert action.power == pytest.approx(target, rel=1e-9)


def test_project_action_rejects_negative_power(config):
    with pytest.raises(ValueError):
        project_action(-0.1, WdState(W, MEAN_GAIN, np.zeros(5)), config)


def test_project_action_is_always_feasible(config):
    rng = np.random.default_rng(3)
    f_max = config.wd_params(0).f_max_wd
    for _ in range(2000):
        state = random_state(rng, config)
        action = project_action(rng.uniform(0.0, 0.01), state, config)
        assert np.all(action.cpu_rates >= 0.0)
        assert np.all(action.cpu_rates <= f_max)
        assert action.power >= 0.0
        assert action.offload_cycles == residual_cycles(state.queue_cycles, action.cpu_rates, config)
        bits = achievable_bits(action.power, state.channel_gain, config)
        assert bits == pytest.approx(config.bits_per_cycle * action.offload_cycles, rel=1e-9, abs=1e-6)


# online iteration


def test_frozen_learner_td_error_is_reward(config, learner):
    learner.alpha0 = 0.0
    rng = np.random.default_rng(4)
    state = random_state(rng, config)
    for block in range(5):
        next_state = random_state(rng, config)
        update = algorithm1_block(learner, state, next_state, config, block=block)
        assert update.td_error == update.reward
        state = next_state
    np.testing.assert_array_equal(learner.theta, np.zeros(config.feature_dim))


def test_frozen_learner_with_fixed_theta(config, learner):
    learner.alpha0 = 0.0
    learner.theta = np.random.default_rng(5).standard_normal(config.feature_dim)
    theta = learner.theta.copy()
    rng = np.random.default_rng(6)
    state = random_state(rng, config)
    learner.act(state, config)
    for block in range(5):
        next_state = random_state(rng, config)
        power = learner.action.power
        phi_t = features(learner.bank, learner.action_state(power, state))
        phi_next = features(learner.bank, learner.action_state(power, next_state))
        update = algorithm1_block(learner, state, next_state, config, block=block)
        assert update.td_error == td_error_wd(update.reward, theta, phi_t, phi_next, config.discount)
        state = next_state
    np.testing.assert_array_equal(learner.theta, theta)


def test_power_stays_nonnegative(config, learner):
    rng = np.random.default_rng(9)
    state = random_state(rng, config)
    for block in range(300):
        next_state = random_state(rng, config)
        update = algorithm1_block(learner, state, next_state, config, block=block)
        assert learner.power >= 0.0
        assert update.action.power >= 0.0
        assert np.isfinite(update.grad_norm)
        state = next_state
    assert learner.step == 300
    assert learner.first_sq_td_error is not None


def test_checkpoint_round_trip(tmp_path, config, learner):
    rng = np.random.default_rng(10)
    state = random_state(rng, config)
    for block in range(20):
        next_state = random_state(rng, config)
        algorithm1_block(learner, state, next_state, config, block=block)
        state = next_state
    path = learner.save(tmp_path / "wd0.json")
    restored = WdLearner.load(path)
    np.testing.assert_array_equal(restored.theta, learner.theta)
    np.testing.assert_array_equal(restored.bank.weights, learner.bank.weights)
    assert restored.power == learner.power
    assert restored.step == learner.step
    assert restored.step_scale == learner.step_scale == config.action_step_scale
    assert restored.converged_at == learner.converged_at


def test_initial_power_offloads_half_a_task(config, learner):
    expected = required_power(0.5 * config.bits_per_cycle * W, MEAN_GAIN, config)
    assert learner.power == pytest.approx(expected)
    assert learner.power > 0.0
    action = learner.act(WdState(W, MEAN_GAIN, np.zeros(5)), config)
    assert action.offload_cycles == pytest.approx(0.95 * W)


def test_explicit_power_settings_override_defaults():
    config = SystemConfig(power_ref=2.0, initial_power=0.3).validate()
    learner = WdLearner.create(config, MEAN_GAIN, seed=3)
    assert learner.power == 0.3
    assert learner.power_ref == 2.0


def test_idle_block_keeps_the_power_iterate(config, learner):
    iterate = learner.power
    action = learner.act(WdState(0.0, MEAN_GAIN, np.zeros(5)), config)
    assert action.power == 0.0
    assert learner.power == iterate


def test_power_iterate_survives_idle_blocks(config, learner):
    empty = WdState(0.0, MEAN_GAIN, np.zeros(5))
    for block in range(50):
        update = algorithm1_block(learner, empty, empty, config, block=block)
        assert update.td_error == 0.0
        assert update.action.power == 0.0
    assert learner.power > 0.0
    action = learner.act(WdState(W, MEAN_GAIN, np.zeros(5)), config)
    assert action.power > 0.0
    assert action.offload_cycles > 0.0


# offload volume against power


def test_local_workload_rounds_the_residual_up(config):
    assert local_workload(1.5 * W, 0.3 * W, config) == pytest.approx(0.05 * W)
    assert local_workload(1.5 * W, 0.47 * W, config) == pytest.approx(0.03 * W)
    assert local_workload(1.5 * W, 0.6 * W, config) == 0.0


@pytest.mark.parametrize("queue_tasks", [1.0, 1.5, 2.0, 3.3, 0.3])
@pytest.mark.parametrize("gain", [MEAN_GAIN, 50.0])
def test_offload_volume_is_nondecreasing_in_power(config, queue_tasks, gain):
    state = WdState(queue_tasks * W, gain, np.zeros(5))
    offloaded = [project_action(p, state, config).offload_cycles for p in np.geomspace(1e-7, 10.0, 400)]
    assert np.all(np.diff(offloaded) >= -1.0)
    assert offloaded[-1] > 0.0


def test_strong_channel_offloads_nearly_a_task(config):
    state = WdState(W, 500.0, np.zeros(5))
    offloaded = [project_action(p, state, config).offload_cycles for p in (0.002, 0.003, 0.01, 1.0)]
    assert all(volume >= 0.95 * W - 1.0 for volume in offloaded)
    assert np.all(np.diff(offloaded) >= -1.0)
