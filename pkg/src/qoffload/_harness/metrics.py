import math
from dataclasses import dataclass

import numpy as np


def discounted_sum(costs, discount: float) -> float:
    """Sum of discount**t * costs[t], accumulated in block order."""
    if not 0.0 < discount < 1.0:
        raise ValueError(f"discount must lie in (0, 1), got {discount}")
    total = 0.0
    weight = 1.0
    for cost in costs:
        total += weight * float(cost)
        weight *= discount
    return total


def tail_bound(max_cost: float, discount: float, horizon: int) -> float:
    """Largest possible contribution of the blocks after a horizon of `horizon` blocks."""
    if not 0.0 < discount < 1.0:
        raise ValueError(f"discount must lie in (0, 1), got {discount}")
    return discount**horizon * max_cost / (1.0 - discount)


def moving_average(values, window: int) -> np.ndarray:
    """Trailing mean over the last `window` entries (fewer at the start)."""
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        return values.copy()
    csum = np.concatenate(([0.0], np.cumsum(values)))
    ends = np.arange(1, values.size + 1)
    starts = np.maximum(ends - window, 0)
    return (csum[ends] - csum[starts]) / (ends - starts)


@dataclass(frozen=True, eq=False)
class BlockMetrics:
    """Everything recorded about one block.

    Learner columns (TD error, gradient norm, relative change) are NaN for
    devices that run a comparison scheme and for a fixed-rate server.
    """

    block: int
    wd_costs: np.ndarray
    wd_local_energy: np.ndarray
    wd_offload_energy: np.ndarray
    wd_queues: np.ndarray
    wd_td_errors: np.ndarray
    wd_grad_norms: np.ndarray
    wd_rel_changes: np.ndarray
    server_cost: float
    server_energy: float
    server_queue: float
    server_td_error: float
    server_grad_norm: float
    server_rel_change: float
    total_cost: float
    discounted_cum: float

    @property
    def num_wds(self) -> int:
        return int(self.wd_costs.shape[0])

    def wd_rows(self) -> list[tuple]:
        return [
            (
                self.block,
                k,
                float(self.wd_costs[k]),
                float(self.wd_local_energy[k]),
                float(self.wd_offload_energy[k]),
                float(self.wd_queues[k]),
                float(self.wd_td_errors[k]),
                float(self.wd_grad_norms[k]),
                float(self.wd_rel_changes[k]),
            )
            for k in range(self.num_wds)
        ]

    def system_row(self) -> tuple:
        return (
            self.block,
            self.server_cost,
            self.server_energy,
            self.server_queue,
            self.server_td_error,
            self.server_grad_norm,
            self.server_rel_change,
            self.total_cost,
            self.discounted_cum,
        )

    def decomposition_holds(self) -> bool:
        """Total cost equals the server part plus the device parts, summed in order."""
        total = self.server_cost
        for cost in self.wd_costs:
            total += float(cost)
        return total == self.total_cost


def nan_array(length: int) -> np.ndarray:
    return np.full(length, math.nan)
