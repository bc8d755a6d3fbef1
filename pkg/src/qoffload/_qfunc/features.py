import math
from dataclasses import dataclass
from typing import Any

import numpy as np
from numba import njit  # type: ignore[attr-defined]


@njit
def sigmoid_kernel(x: float) -> float:
    """Logistic function, evaluated on the side that cannot overflow."""
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


@njit
def features_kernel(weights: np.ndarray, action_state: np.ndarray) -> np.ndarray:
    """phi[i] = sigmoid(mu_i . s) for every row mu_i of `weights`."""
    num_features, dim = weights.shape
    phi = np.empty(num_features)
    for i in range(num_features):
        dot = 0.0
        for j in range(dim):
            dot += weights[i, j] * action_state[j]
        phi[i] = sigmoid_kernel(dot)
    return phi


@njit
def q_value_kernel(params: np.ndarray, phi: np.ndarray) -> float:
    total = 0.0
    for i in range(params.shape[0]):
        total += params[i] * phi[i]
    return total


def sigmoid(x: float) -> float:
    return float(sigmoid_kernel(float(x)))


@dataclass(frozen=True, eq=False)
class FeatureBank:
    """Fixed sigmoid basis over normalized action-state vectors.

    Attributes:
        weights: (M, dim) matrix whose rows are the feature directions.
        scales: Per-coordinate divisor applied by `normalize`.
        seed: Seed the weights were drawn from, or None for explicit weights.
    """

    weights: np.ndarray
    scales: np.ndarray
    seed: int | None = None

    def __post_init__(self) -> None:
        weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        scales = np.ascontiguousarray(self.scales, dtype=np.float64).reshape(-1)
        if weights.ndim != 2 or weights.shape[0] < 1:
            raise ValueError("feature weights must be a non-empty (M, dim) matrix")
        if weights.shape[1] != scales.shape[0]:
            raise ValueError(
                f"{weights.shape[1]} weight columns but {scales.shape[0]} scales"
            )
        if not np.all(np.isfinite(weights)):
            raise ValueError("feature weights must be finite")
        if not np.all(scales > 0):
            raise ValueError("normalization scales must be positive")
        weights.setflags(write=False)
        scales.setflags(write=False)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "scales", scales)

    @classmethod
    def create(cls, seed: int, num_features: int, scales) -> "FeatureBank":
        """Draw i.i.d. N(0, 1/dim) directions from `seed`."""
        scales = np.asarray(scales, dtype=np.float64)
        dim = scales.shape[0]
        rng = np.random.default_rng(seed)
        weights = rng.standard_normal((num_features, dim)) / math.sqrt(dim)
        return cls(weights=weights, scales=scales, seed=seed)

    @property
    def num_features(self) -> int:
        return int(self.weights.shape[0])

    @property
    def dim(self) -> int:
        return int(self.weights.shape[1])

    def normalize(self, raw_action_state) -> np.ndarray:
        raw = np.asarray(raw_action_state, dtype=np.float64).reshape(-1)
        if raw.shape[0] != self.dim:
            raise ValueError(f"action-state has {raw.shape[0]} entries, bank expects {self.dim}")
        return raw / self.scales

    def to_dict(self) -> dict[str, Any]:
        payload: dict[str, Any] = {
            "seed": self.seed,
            "num_features": self.num_features,
            "scales": self.scales.tolist(),
        }
        if self.seed is None:
            payload["weights"] = self.weights.tolist()
        return payload

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> "FeatureBank":
        if payload.get("seed") is None:
            return cls(weights=np.asarray(payload["weights"]), scales=payload["scales"])
        return cls.create(int(payload["seed"]), int(payload["num_features"]), payload["scales"])


def features(bank: FeatureBank, action_state) -> np.ndarray:
    """Feature vector of an already normalized action-state."""
    x = np.ascontiguousarray(action_state, dtype=np.float64).reshape(-1)
    if x.shape[0] != bank.dim:
        raise ValueError(f"action-state has {x.shape[0]} entries, bank expects {bank.dim}")
    return features_kernel(bank.weights, x)


def q_value(params, phi) -> float:
    """Linear Q estimate theta . phi."""
    theta = np.ascontiguousarray(params, dtype=np.float64).reshape(-1)
    phi = np.ascontiguousarray(phi, dtype=np.float64).reshape(-1)
    if theta.shape != phi.shape:
        raise ValueError(f"{theta.shape[0]} parameters but {phi.shape[0]} features")
    return float(q_value_kernel(theta, phi))
