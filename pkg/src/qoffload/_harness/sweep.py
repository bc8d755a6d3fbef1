import concurrent.futures
import math
import threading
from dataclasses import dataclass, field

import numpy as np

from qoffload._diagnostics import prop1_monitor
from qoffload._harness.config import ExperimentConfig
from qoffload._harness.episode import EpisodeResult, run_episode
from qoffload._harness.seeds import replicate_seeds
from qoffload._util.errors import ConfigurationError, QoffloadError
from qoffload._util.progress import ProgressCallback, ProgressTracker
from qoffload.codes import PolicyKind, RunStatus, SweepAxis

CellKey = tuple[float, PolicyKind, int]


@dataclass(frozen=True)
class EpisodeOutcome:
    """What a sweep keeps of one episode."""

    seed: int
    discounted_sum: float
    tail_bound: float
    status: RunStatus
    failure: str | None = None
    convergence: dict[str, int | None] = field(default_factory=dict)
    first_sq_td_errors: tuple[float, ...] = ()
    grad_norms: np.ndarray | None = field(default=None, compare=False)

    @classmethod
    def from_result(cls, result: EpisodeResult) -> "EpisodeOutcome":
        return cls(
            seed=result.config.seed,
            discounted_sum=result.discounted_sum,
            tail_bound=result.tail_bound,
            status=result.status,
            failure=result.failure,
            convergence=result.convergence(),
            first_sq_td_errors=tuple(
                learner.first_sq_td_error or 0.0 for learner in result.wd_learners
            ),
            grad_norms=result.wd_grad_norms() if result.wd_learners else None,
        )

    @classmethod
    def failed(cls, seed: int, message: str) -> "EpisodeOutcome":
        return cls(
            seed=seed,
            discounted_sum=math.nan,
            tail_bound=math.nan,
            status=RunStatus.DIVERGED,
            failure=message,
        )

    @property
    def ok(self) -> bool:
        return self.status is RunStatus.COMPLETED


@dataclass(frozen=True)
class SweepRow:
    """Aggregate of one (axis value, policy) cell over its seeds."""

    axis: SweepAxis
    value: float
    policy: PolicyKind
    outcomes: tuple[EpisodeOutcome, ...]

    @property
    def sums(self) -> np.ndarray:
        return np.array([o.discounted_sum for o in self.outcomes if o.ok])

    @property
    def num_failed(self) -> int:
        return sum(not o.ok for o in self.outcomes)

    @property
    def mean(self) -> float:
        sums = self.sums
        return float(sums.mean()) if sums.size else math.nan

    @property
    def std(self) -> float:
        sums = self.sums
        return float(sums.std(ddof=1)) if sums.size > 1 else 0.0

    @property
    def tail_bound(self) -> float:
        bounds = [o.tail_bound for o in self.outcomes if o.ok]
        return max(bounds) if bounds else math.nan

    def csv_row(self) -> tuple:
        return (
            self.axis.value,
            self.value,
            self.policy.value,
            self.mean,
            self.std,
            self.tail_bound,
            len(self.outcomes),
            self.num_failed,
        )

    def to_dict(self, discount: float) -> dict:
        payload = {
            "axis": self.axis.value,
            "value": self.value,
            "policy": self.policy.value,
            "mean": self.mean,
            "std": self.std,
            "tail_bound": self.tail_bound,
            "num_failed": self.num_failed,
            "seeds": [
                {
                    "seed": o.seed,
                    "discounted_sum": o.discounted_sum,
                    "status": o.status.value,
                    "failure": o.failure,
                    "convergence": o.convergence,
                }
                for o in self.outcomes
            ],
        }
        traces = [o.grad_norms for o in self.outcomes if o.ok and o.grad_norms is not None]
        if traces and traces[0].size:
            first = [e for o in self.outcomes if o.ok for e in o.first_sq_td_errors]
            per_device = [t[:, k] for t in traces for k in range(t.shape[1])]
            payload["prop1_wd"] = prop1_monitor(first, per_device, discount).to_dict()
        return payload


@dataclass
class SweepResult:
    config: ExperimentConfig
    seeds: list[int]
    rows: list[SweepRow] = field(default_factory=list)

    @property
    def num_failed(self) -> int:
        return sum(row.num_failed for row in self.rows)

    def row(self, value: float, policy: PolicyKind) -> SweepRow:
        for row in self.rows:
            if row.value == value and row.policy is PolicyKind(policy):
                return row
        raise KeyError((value, policy))

    def summary(self) -> dict:
        return {
            "axis": self.config.sweep_axis.value,
            "values": list(self.config.sweep_values),
            "policies": [p.value for p in self.config.policies],
            "replicate_seeds": self.seeds,
            "num_failed": self.num_failed,
            "cells": [row.to_dict(self.config.system.discount) for row in self.rows],
            "config": self.config.to_dict(),
        }


def cell_config(config: ExperimentConfig, value: float, policy: PolicyKind, seed: int):
    """Episode configuration of one sweep cell and replicate."""
    return config.at_axis_value(value).replace(policy=policy, master_seed=seed)


def sweep(config: ExperimentConfig, callback: ProgressCallback | None = None) -> SweepResult:
    """Run every (axis value, policy, replicate) episode and aggregate per cell.

    All cells share the same replicate seeds, so policies and axis values are
    compared on common random numbers. Cells run on `config.jobs` threads;
    results are keyed by cell, which keeps the output independent of the pool
    size. An episode that diverges or whose configuration is invalid is
    counted as failed without stopping the sweep.
    """
    config.validate()
    if not config.sweep_values:
        raise ConfigurationError("a sweep needs at least one axis value")
    seeds = replicate_seeds(config.seed, config.num_seeds)
    keys: list[CellKey] = [
        (value, policy, i)
        for value in config.sweep_values
        for policy in config.policies
        for i in range(config.num_seeds)
    ]
    tracker = ProgressTracker(callback, f"Sweep over {config.sweep_axis.value}", total_steps=1)
    tracker.update(step_name="Run cells")
    outcomes: dict[CellKey, EpisodeOutcome] = {}
    lock = threading.Lock()

    def run_cell(key: CellKey) -> EpisodeOutcome:
        value, policy, i = key
        try:
            episode = cell_config(config, value, policy, seeds[i])
        except QoffloadError as exc:
            return EpisodeOutcome.failed(seeds[i], str(exc))
        return EpisodeOutcome.from_result(run_episode(episode))

    with concurrent.futures.ThreadPoolExecutor(max_workers=config.jobs) as executor:
        futures = {executor.submit(run_cell, key): key for key in keys}
        for future in concurrent.futures.as_completed(futures):
            key = futures[future]
            try:
                outcome = future.result()
            except QoffloadError as exc:
                outcome = EpisodeOutcome.failed(seeds[key[2]], str(exc))
            with lock:
                outcomes[key] = outcome
                tracker.tick(len(outcomes), len(keys), unit="Cell")

    result = SweepResult(config=config, seeds=seeds)
    for value in config.sweep_values:
        for policy in config.policies:
            result.rows.append(
                SweepRow(
                    axis=config.sweep_axis,
                    value=value,
                    policy=policy,
                    outcomes=tuple(outcomes[(value, policy, i)] for i in range(config.num_seeds)),
                )
            )
    return result
