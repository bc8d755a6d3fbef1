import math
from dataclasses import dataclass

import numpy as np
from numba import njit  # type: ignore[attr-defined]

from qoffload._util.constants import E1_EPSILON, E1_MAX_TERMS, E1_SERIES_CUTOFF

EULER_GAMMA = 0.5772156649015329
TINY = 1e-300


@njit
def e1_series_kernel(x: float) -> float:
    """-gamma - ln x - sum_k (-x)^k / (k k!), for small x."""
    total = -math.log(x) - EULER_GAMMA
    term = 1.0
    for k in range(1, E1_MAX_TERMS + 1):
        term *= -x / k
        delta = -term / k
        total += delta
        if abs(delta) < abs(total) * E1_EPSILON:
            break
    return total


@njit
def e1_continued_fraction_kernel(x: float) -> float:
    """Modified Lentz evaluation of the continued fraction for large x."""
    b = x + 1.0
    c = 1.0 / TINY
    d = 1.0 / b
    h = d
    for i in range(1, E1_MAX_TERMS + 1):
        a = -float(i * i)
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < E1_EPSILON:
            break
    return h * math.exp(-x)


@njit
def e1_kernel(x: float) -> float:
    if x <= E1_SERIES_CUTOFF:
        return e1_series_kernel(x)
    return e1_continued_fraction_kernel(x)


def exp_integral_e1(x: float) -> float:
    """Exponential integral E1(x), the integral of exp(-t)/t from x to infinity.

    Raises:
        ValueError: If x is not positive.
    """
    if not x > 0.0:
        raise ValueError(f"E1 is only defined for x > 0, got {x}")
    return float(e1_kernel(float(x)))


def prop1_bound(first_sq_td_error: float, discount: float) -> float:
    """Neighborhood bound E[delta^2 at the first block] / E1(ln(1/gamma))."""
    if not 0.0 < discount < 1.0:
        raise ValueError(f"discount must lie in (0, 1), got {discount}")
    if first_sq_td_error < 0.0:
        raise ValueError("the squared TD error estimate must be >= 0")
    return first_sq_td_error / exp_integral_e1(math.log(1.0 / discount))


@dataclass(frozen=True, eq=False)
class Prop1Report:
    """Stationarity monitor of one learner kind over a set of seeds.

    Attributes:
        bound: Bound computed from the seed-averaged first squared TD error.
        running_min: Running minimum over blocks of the seed-averaged squared
            gradient norm.
    """

    bound: float
    running_min: np.ndarray

    @property
    def final_min(self) -> float:
        return float(self.running_min[-1]) if self.running_min.size else math.inf

    @property
    def satisfied(self) -> bool:
        return self.final_min <= self.bound

    def to_dict(self) -> dict:
        return {
            "bound": self.bound,
            "running_min": self.final_min,
            "satisfied": self.satisfied,
        }


def prop1_monitor(first_sq_td_errors, grad_norm_traces, discount: float) -> Prop1Report:
    """Compare recorded gradient norms with the stationarity bound.

    Args:
        first_sq_td_errors: First-block squared TD error of each seed.
        grad_norm_traces: (seeds, blocks) gradient norms; traces of unequal
            length are cut to the shortest.
        discount: Discount factor gamma.
    """
    estimate = float(np.mean(first_sq_td_errors))
    traces = [np.asarray(t, dtype=np.float64) for t in grad_norm_traces]
    length = min((t.shape[0] for t in traces), default=0)
    if length == 0:
        return Prop1Report(bound=prop1_bound(estimate, discount), running_min=np.zeros(0))
    squared = np.stack([t[:length] ** 2 for t in traces])
    running_min = np.minimum.accumulate(squared.mean(axis=0))
    return Prop1Report(bound=prop1_bound(estimate, discount), running_min=running_min)
