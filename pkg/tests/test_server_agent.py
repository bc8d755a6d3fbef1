import dataclasses

import numpy as np
import pytest

from qoffload._env_model import ServerState, SystemConfig, server_energy
from qoffload._qfunc import FeatureBank
from qoffload._server_agent import (
    ServerLearner,
    ServerUpdate,
    algorithm2_block,
    gd_step_ser,
    grad_eta,
    grad_rate,
    server_feature_scales,
    server_reward,
    td_error_ser,
)
from qoffload._util.errors import LearnerDivergenceError

W = 1e10


@pytest.fixture(name="config")
def fixture_config():
    return SystemConfig().validate()


@pytest.fixture(name="learner")
def fixture_learner(config):
    return ServerLearner.create(config, seed=11)


def random_server_state(rng, config):
    return ServerState(rng.uniform(0.0, 3.0) * W, rng.uniform(0.0, 3.0, config.num_wds) * W)


def test_server_reward_zero(config):
    assert server_reward(0.0, np.zeros(5), config) == 0.0


def test_server_reward_one_task(config):
    assert server_reward(W, np.zeros(5), config) == 1.0


def test_server_reward_matches_stage_cost(config):
    rng = np.random.default_rng(0)
    for _ in range(100):
        q = rng.uniform(0.0, 3.0) * W
        rates = rng.uniform(0.0, 1.0, 5) * config.f_max_ser
        assert server_reward(q, rates, config) == q / W + server_energy(rates, config)


def test_td_error_example():
    one = np.ones(1)
    assert td_error_ser(2.0, one, one, one, 0.5) == 1.5


def test_grad_rate_examples(config):
    bank = FeatureBank.create(1, config.feature_dim, server_feature_scales(config))
    rng = np.random.default_rng(1)
    phi_t, phi_next = rng.random(config.feature_dim), rng.random(config.feature_dim)
    rate = 0.5 * config.f_max_ser
    expected = 1.5 * 3.0 * config.slot_seconds * config.cap_ser * rate**2
    eta0 = np.zeros(config.feature_dim)
    assert grad_rate(1.5, eta0, bank, phi_t, phi_next, rate, 0, config) == pytest.approx(expected)
    eta = rng.standard_normal(config.feature_dim)
    assert grad_rate(0.0, eta, bank, phi_t, phi_next, rate, 2, config) == 0.0
    with pytest.raises(ValueError):
        grad_rate(1.0, eta, bank, phi_t, phi_next, rate, config.slots_per_block, config)


def test_grad_eta_examples():
    phi_t = np.array([0.3, 0.6])
    phi_next = np.array([0.8, 0.1])
    np.testing.assert_array_equal(grad_eta(0.0, phi_t, phi_next, 0.9), np.zeros(2))
    np.testing.assert_allclose(grad_eta(2.0, phi_t, phi_next, 0.0), -2.0 * phi_t)


def test_feature_scales(config):
    scales = server_feature_scales(config)
    assert scales.shape == (config.slots_per_block + 1 + config.num_wds,)
    np.testing.assert_array_equal(scales[:5], np.full(5, config.f_max_ser))
    np.testing.assert_array_equal(scales[5:], np.full(config.num_wds + 1, W))


def test_learner_starts_at_half_rate(config, learner):
    np.testing.assert_array_equal(learner.rates, np.full(5, config.f_max_ser / 2.0))
    np.testing.assert_array_equal(learner.eta, np.zeros(config.feature_dim))


def test_rates_clamp_at_f_max(learner):
    learner.rates = np.full(5, 0.9 * learner.f_max)
    gd_step_ser(learner, np.full(5, -1.0), np.zeros(learner.eta.shape), 0.01)
    np.testing.assert_array_equal(learner.rates, np.full(5, learner.f_max))


def test_rates_clamp_at_zero(learner):
    gd_step_ser(learner, np.full(5, 1.0), np.zeros(learner.eta.shape), 0.01)
    np.testing.assert_array_equal(learner.rates, np.zeros(5))


def test_zero_gradient_keeps_state(learner):
    learner.eta = np.linspace(0.5, 1.5, learner.eta.shape[0])
    eta, rates = learner.eta.copy(), learner.rates.copy()
    gd_step_ser(learner, np.zeros(5), np.zeros(learner.eta.shape), 0.01)
    np.testing.assert_array_equal(learner.eta, eta)
    np.testing.assert_array_equal(learner.rates, rates)
    assert learner.converged_at == 1


def test_gd_step_rejects_non_finite_gradient(learner):
    gradient = np.zeros(5)
    gradient[3] = np.inf
    with pytest.raises(LearnerDivergenceError) as info:
        gd_step_ser(learner, gradient, np.zeros(learner.eta.shape), 0.01, block=4)
    assert info.value.learner == "server"
    assert info.value.block == 4


def test_frozen_learner_does_not_move(config, learner):
    learner.alpha0 = 0.0
    rng = np.random.default_rng(2)
    state = random_server_state(rng, config)
    rates = learner.rates.copy()
    for block in range(10):
        next_state = random_server_state(rng, config)
        update = algorithm2_block(learner, state, next_state, config, block=block)
        assert update.td_error == update.reward
        state = next_state
    np.testing.assert_array_equal(learner.rates, rates)
    np.testing.assert_array_equal(learner.eta, np.zeros(config.feature_dim))


def test_rates_stay_in_range(config, learner):
    rng = np.random.default_rng(3)
    state = random_server_state(rng, config)
    for block in range(300):
        next_state = random_server_state(rng, config)
        update = algorithm2_block(learner, state, next_state, config, block=block)
        assert np.all(update.rates >= 0.0)
        assert np.all(update.rates <= config.f_max_ser)
        assert np.isfinite(update.grad_norm)
        state = next_state
    assert learner.step == 300


def test_server_sees_queues_only():
    names = {f.name for f in dataclasses.fields(ServerState)}
    assert names == {"queue_cycles", "wd_queues"}
    learner_fields = {f.name for f in dataclasses.fields(ServerLearner)}
    assert not any("gain" in name or "arrival" in name for name in learner_fields)


def test_checkpoint_round_trip(tmp_path, config, learner):
    rng = np.random.default_rng(4)
    state = random_server_state(rng, config)
    for block in range(20):
        next_state = random_server_state(rng, config)
        algorithm2_block(learner, state, next_state, config, block=block)
        state = next_state
    restored = ServerLearner.load(learner.save(tmp_path / "server.json"))
    np.testing.assert_array_equal(restored.eta, learner.eta)
    np.testing.assert_array_equal(restored.rates, learner.rates)
    assert restored.step == learner.step
    assert restored.f_max == learner.f_max
    assert restored.step_scale == learner.step_scale == config.action_step_scale


def test_rate_step_is_scaled(config, learner):
    rates = learner.rates.copy()
    gradient = np.array([1e-12, 0.0, -1e-12, 0.0, 0.0])
    gd_step_ser(learner, gradient, np.zeros(learner.eta.shape), 0.05)
    expected = rates - 0.05 * config.action_step_scale * learner.f_max**2 * gradient
    np.testing.assert_allclose(learner.rates, expected, rtol=1e-12)


def test_gd_step_rejects_overflowing_rates(learner):
    rates = learner.rates.copy()
    with pytest.raises(LearnerDivergenceError, match="overflowed"):
        gd_step_ser(learner, np.full(5, 1e300), np.zeros(learner.eta.shape), 1.0, block=7)
    np.testing.assert_array_equal(learner.rates, rates)
    assert learner.step == 0


def test_grad_norm_of_huge_gradient_is_finite(config):
    update = ServerUpdate(
        rates=np.zeros(5),
        reward=0.0,
        td_error=0.0,
        rate_gradient=np.full(5, 1e250),
        eta_gradient=np.full(config.feature_dim, -1e250),
        rel_change=0.0,
    )
    assert update.grad_norm == pytest.approx(1e250 * np.sqrt(5 + config.feature_dim))
