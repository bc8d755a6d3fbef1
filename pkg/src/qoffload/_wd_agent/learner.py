import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from qoffload._env_model import SystemConfig, WdAction, WdState, required_power
from qoffload._qfunc import FeatureBank, features, gradient_norm, relative_change_kernel
from qoffload._util.constants import (
    DEFAULT_INITIAL_OFFLOAD_TASKS,
    WD_ARRIVALS_OFFSET,
    WD_CHANNEL_INDEX,
    WD_POWER_INDEX,
    WD_QUEUE_INDEX,
)
from qoffload._util.errors import LearnerDivergenceError
from qoffload._util.io import atomic_write_text
from qoffload._wd_agent.gradients import grad_power, grad_theta, td_error_wd, wd_reward
from qoffload._wd_agent.projection import project_action


def reference_power(config: SystemConfig, mean_gain: float, wd: int = 0) -> float:
    """p_ref of device `wd`.

    `config.power_ref` when set, otherwise the power that offloads one whole
    task in a slot at the device's mean channel gain.
    """
    if config.power_ref is not None:
        return config.power_ref
    return required_power(config.bits_per_cycle * config.task_cycles, mean_gain, config, wd)


def initial_power(config: SystemConfig, mean_gain: float, wd: int = 0) -> float:
    if config.initial_power is not None:
        return config.initial_power
    bits = DEFAULT_INITIAL_OFFLOAD_TASKS * config.bits_per_cycle * config.task_cycles
    return required_power(bits, mean_gain, config, wd)


def wd_feature_scales(config: SystemConfig, mean_gain: float, wd: int = 0) -> np.ndarray:
    """Divisors of [p, q, h, beta_1..beta_n] in the device feature input."""
    scales = np.ones(WD_ARRIVALS_OFFSET + config.slots_per_block)
    scales[WD_POWER_INDEX] = reference_power(config, mean_gain, wd)
    scales[WD_QUEUE_INDEX] = config.task_cycles
    scales[WD_CHANNEL_INDEX] = mean_gain
    return scales


@dataclass(eq=False)
class WdLearner:
    """Online parametric Q-learner of one wireless device.

    Attributes:
        bank: Fixed sigmoid features over [p, q, h, beta].
        theta: Linear Q parameters.
        power: Gradient-descent power iterate; the power proposed each block.
        step: Number of gradient steps taken.
        alpha0, tau0: Step schedule alpha_t = alpha0 / (1 + t / tau0).
        step_scale: Factor on the power step relative to the theta step.
        tolerance: Relative parameter change that counts as converged.
        wd: Device index (selects per-device constants).
        action: Action executed in the current block, i.e. `power` projected
            onto the current state. Its power is 0 whenever the queue is empty;
            the iterate is left alone.
        last_rel_change: ||theta_{t+1} - theta_t|| / ||theta_t|| of the last step.
        converged_at: First step whose relative change met the tolerance.
    """

    bank: FeatureBank
    theta: np.ndarray
    power: float = 0.0
    step: int = 0
    alpha0: float = 0.01
    tau0: float = 1000.0
    step_scale: float = 1.0
    tolerance: float = 1e-3
    wd: int = 0
    action: WdAction | None = None
    last_rel_change: float = math.inf
    converged_at: int | None = None
    first_sq_td_error: float | None = None

    @classmethod
    def create(
        cls, config: SystemConfig, mean_gain: float, seed: int, wd: int = 0
    ) -> "WdLearner":
        bank = FeatureBank.create(
            seed, config.feature_dim, wd_feature_scales(config, mean_gain, wd)
        )
        return cls(
            bank=bank,
            theta=np.zeros(config.feature_dim),
            power=initial_power(config, mean_gain, wd),
            alpha0=config.step_alpha0,
            tau0=config.step_tau0,
            step_scale=config.action_step_scale,
            tolerance=config.tolerance,
            wd=wd,
        )

    @property
    def name(self) -> str:
        return f"wd{self.wd}"

    @property
    def converged(self) -> bool:
        return self.converged_at is not None

    @property
    def power_ref(self) -> float:
        return float(self.bank.scales[WD_POWER_INDEX])

    def step_size(self) -> float:
        return self.alpha0 / (1.0 + self.step / self.tau0)

    def action_state(self, power: float, state: WdState) -> np.ndarray:
        """Normalized [p, q, h, beta] feature input."""
        raw = np.concatenate(([power, state.queue_cycles, state.channel_gain], state.arrivals))
        return self.bank.normalize(raw)

    def q_estimate(self, power: float, state: WdState) -> float:
        return float(self.theta @ features(self.bank, self.action_state(power, state)))

    def act(self, state: WdState, config: SystemConfig, proposed_power: float | None = None) -> WdAction:
        """Project a power (the iterate by default) onto `state` and execute it."""
        power = self.power if proposed_power is None else proposed_power
        self.action = project_action(max(power, 0.0), state, config, self.wd)
        return self.action

    def to_dict(self) -> dict[str, Any]:
        return {
            "wd": self.wd,
            "theta": self.theta.tolist(),
            "power": self.power,
            "step": self.step,
            "alpha0": self.alpha0,
            "tau0": self.tau0,
            "step_scale": self.step_scale,
            "tolerance": self.tolerance,
            "converged_at": self.converged_at,
            "bank": self.bank.to_dict(),
        }

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> "WdLearner":
        return cls(
            bank=FeatureBank.from_dict(payload["bank"]),
            theta=np.asarray(payload["theta"], dtype=np.float64),
            power=float(payload["power"]),
            step=int(payload["step"]),
            alpha0=float(payload["alpha0"]),
            tau0=float(payload["tau0"]),
            step_scale=float(payload.get("step_scale", 1.0)),
            tolerance=float(payload["tolerance"]),
            wd=int(payload["wd"]),
            converged_at=payload.get("converged_at"),
        )

    def save(self, path: str | Path) -> Path:
        return atomic_write_text(path, json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "WdLearner":
        with open(path, encoding="utf-8") as handle:
            return cls.from_dict(json.load(handle))


@dataclass(frozen=True, eq=False)
class WdUpdate:
    """Outcome of one learner iteration."""

    action: WdAction
    reward: float
    td_error: float
    power_gradient: float
    theta_gradient: np.ndarray
    rel_change: float

    @property
    def grad_norm(self) -> float:
        return gradient_norm(self.power_gradient, self.theta_gradient)


def gd_step_wd(
    learner: WdLearner,
    power_gradient: float,
    theta_gradient,
    step_size: float,
    block: int | None = None,
) -> WdLearner:
    """Projected gradient step on (p, theta); returns the same learner.

    The power moves in units of p_ref, so its raw step is scaled by
    p_ref^2, and by `learner.step_scale` on top.

    Raises:
        LearnerDivergenceError: If a gradient or the updated (p, theta) is not finite.
    """
    theta_gradient = np.asarray(theta_gradient, dtype=np.float64)
    where = learner.step if block is None else block
    if not (math.isfinite(power_gradient) and np.all(np.isfinite(theta_gradient))):
        raise LearnerDivergenceError(learner.name, where, "non-finite gradient")
    if step_size < 0.0:
        raise ValueError(f"step size must be >= 0, got {step_size}")
    p_ref = learner.power_ref
    new_theta = learner.theta - step_size * theta_gradient
    new_power = learner.power - step_size * learner.step_scale * p_ref * p_ref * power_gradient
    if not (np.all(np.isfinite(new_theta)) and math.isfinite(new_power)):
        raise LearnerDivergenceError(learner.name, where, "parameters overflowed")
    learner.last_rel_change = float(relative_change_kernel(learner.theta, new_theta))
    learner.theta = new_theta
    learner.power = max(new_power, 0.0)
    learner.step += 1
    if learner.converged_at is None and learner.last_rel_change <= learner.tolerance:
        learner.converged_at = learner.step
    return learner


def algorithm1_block(
    learner: WdLearner,
    state: WdState,
    next_state: WdState,
    config: SystemConfig,
    jitter: float = 0.0,
    block: int | None = None,
) -> WdUpdate:
    """One online iteration of the device learner.

    Scores the action executed in `state` against the transition to
    `next_state`, descends (p, theta) on the squared TD error and projects the
    updated iterate onto `next_state`, giving the action for the next block.
    TD error and gradients are taken at the executed power; the step is
    applied to the iterate. `jitter` is added to the proposed power before
    projection.

    Raises:
        LearnerDivergenceError: If the step or the gradient norm stops being finite.
    """
    if learner.action is None:
        learner.act(state, config)
    executed = learner.action
    assert executed is not None
    power = executed.power
    phi_t = features(learner.bank, learner.action_state(power, state))
    phi_next = features(learner.bank, learner.action_state(power, next_state))
    reward = wd_reward(state.queue_cycles, executed.cpu_rates, power, config, learner.wd)
    delta = td_error_wd(reward, learner.theta, phi_t, phi_next, config.discount)
    if learner.first_sq_td_error is None:
        learner.first_sq_td_error = delta * delta
    g_power = grad_power(delta, learner.theta, learner.bank, phi_t, phi_next, config)
    g_theta = grad_theta(delta, phi_t, phi_next, config.discount)
    gd_step_wd(learner, g_power, g_theta, learner.step_size(), block)
    update = WdUpdate(
        action=learner.act(next_state, config, proposed_power=learner.power + jitter),
        reward=reward,
        td_error=delta,
        power_gradient=g_power,
        theta_gradient=g_theta,
        rel_change=learner.last_rel_change,
    )
    if not math.isfinite(update.grad_norm):
        where = learner.step if block is None else block
        raise LearnerDivergenceError(learner.name, where, "gradient norm overflowed")
    return update
