import math

import numpy as np
import pytest

from qoffload._qfunc import FeatureBank, features, q_value, sigmoid


@pytest.fixture(name="bank")
def fixture_bank():
    return FeatureBank.create(seed=17, num_features=30, scales=np.ones(8))


def test_sigmoid_examples():
    assert sigmoid(0.0) == 0.5
    assert sigmoid(math.log(3.0)) == pytest.approx(0.75, rel=1e-15)


def test_sigmoid_symmetry():
    for x in np.random.default_rng(0).uniform(-50.0, 50.0, 1000):
        assert abs(sigmoid(x) + sigmoid(-x) - 1.0) <= 1e-15


def test_sigmoid_is_stable_for_large_arguments():
    assert sigmoid(700.0) == 1.0
    assert 0.0 <= sigmoid(-700.0) < 1e-300
    assert math.isfinite(sigmoid(-745.0))


def test_sigmoid_derivative_matches_finite_difference():
    step = 1e-5
    for x in np.random.default_rng(1).uniform(-6.0, 6.0, 200):
        phi = sigmoid(x)
        numeric = (sigmoid(x + step) - sigmoid(x - step)) / (2 * step)
        assert phi * (1 - phi) == pytest.approx(numeric, rel=1e-8)


def test_features_zero_bank():
    bank = FeatureBank(weights=np.zeros((4, 3)), scales=np.ones(3))
    np.testing.assert_array_equal(features(bank, [1.0, -2.0, 3.0]), np.full(4, 0.5))


def test_features_unit_direction():
    weights = np.zeros((2, 3))
    weights[0, 0] = 1.0
    bank = FeatureBank(weights=weights, scales=np.ones(3))
    phi = features(bank, [math.log(3.0), 0.0, 0.0])
    assert phi[0] == pytest.approx(0.75, rel=1e-15)
    assert phi[1] == 0.5


def test_features_range_and_determinism(bank):
    rng = np.random.default_rng(2)
    for _ in range(10_000):
        x = rng.normal(scale=3.0, size=bank.dim)
        phi = features(bank, x)
        assert np.all((phi > 0.0) & (phi < 1.0))
    x = rng.normal(size=bank.dim)
    np.testing.assert_array_equal(features(bank, x), features(bank, x))


def test_features_dimension_mismatch(bank):
    with pytest.raises(ValueError):
        features(bank, np.zeros(bank.dim + 1))


def test_bank_is_seeded(bank):
    again = FeatureBank.create(seed=17, num_features=30, scales=np.ones(8))
    np.testing.assert_array_equal(bank.weights, again.weights)
    other = FeatureBank.create(seed=18, num_features=30, scales=np.ones(8))
    assert not np.array_equal(bank.weights, other.weights)


def test_bank_normalize_divides_by_scales():
    bank = FeatureBank.create(seed=1, num_features=3, scales=[1.0, 1e10, 500.0])
    np.testing.assert_allclose(bank.normalize([0.5, 2e10, 250.0]), [0.5, 2.0, 0.5])


def test_bank_serialization_restores_weights(bank):
    restored = FeatureBank.from_dict(bank.to_dict())
    np.testing.assert_array_equal(restored.weights, bank.weights)
    np.testing.assert_array_equal(restored.scales, bank.scales)
    explicit = FeatureBank(weights=np.eye(2), scales=[2.0, 3.0])
    np.testing.assert_array_equal(FeatureBank.from_dict(explicit.to_dict()).weights, np.eye(2))


def test_bank_rejects_non_finite_weights():
    with pytest.raises(ValueError):
        FeatureBank(weights=np.array([[np.nan]]), scales=[1.0])


def test_q_value_examples():
    assert q_value(np.zeros(3), [0.2, 0.4, 0.6]) == 0.0
    assert q_value([0.0, 1.0, 0.0], [0.2, 0.4, 0.6]) == 0.4
    assert q_value([1.0, 2.0], [0.5, 0.25]) == 1.0


def test_q_value_is_linear():
    rng = np.random.default_rng(4)
    for _ in range(100):
        theta1, theta2, phi = rng.normal(size=(3, 30))
        a, b = rng.normal(size=2)
        combined = q_value(a * theta1 + b * theta2, phi)
        assert combined == pytest.approx(
            a * q_value(theta1, phi) + b * q_value(theta2, phi), abs=1e-12
        )


def test_q_value_length_mismatch():
    with pytest.raises(ValueError):
        q_value(np.zeros(2), np.zeros(3))
