import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from qoffload._env_model import ServerState, SystemConfig
from qoffload._qfunc import FeatureBank, features, gradient_norm, relative_change_kernel
from qoffload._server_agent.gradients import grad_eta, grad_rates, server_reward, td_error_ser
from qoffload._util.errors import LearnerDivergenceError
from qoffload._util.io import atomic_write_text


def server_feature_scales(config: SystemConfig) -> np.ndarray:
    """Divisors of [f_1..f_n, q_ser, q_wd_1..q_wd_K] in the server feature input."""
    n = config.slots_per_block
    scales = np.full(n + 1 + config.num_wds, config.task_cycles)
    scales[:n] = config.f_max_ser
    return scales


@dataclass(eq=False)
class ServerLearner:
    """Online parametric Q-learner of the edge server.

    It observes queue lengths only: its input is the rate vector, the server
    backlog and the device backlogs.
    """

    bank: FeatureBank
    eta: np.ndarray
    rates: np.ndarray
    f_max: float
    step: int = 0
    alpha0: float = 0.01
    tau0: float = 1000.0
    step_scale: float = 1.0
    tolerance: float = 1e-3
    last_rel_change: float = math.inf
    converged_at: int | None = None
    first_sq_td_error: float | None = None

    name = "server"

    @classmethod
    def create(cls, config: SystemConfig, seed: int) -> "ServerLearner":
        bank = FeatureBank.create(seed, config.feature_dim, server_feature_scales(config))
        return cls(
            bank=bank,
            eta=np.zeros(config.feature_dim),
            rates=np.full(config.slots_per_block, config.f_max_ser / 2.0),
            f_max=config.f_max_ser,
            alpha0=config.step_alpha0,
            tau0=config.step_tau0,
            step_scale=config.action_step_scale,
            tolerance=config.tolerance,
        )

    @property
    def converged(self) -> bool:
        return self.converged_at is not None

    def step_size(self) -> float:
        return self.alpha0 / (1.0 + self.step / self.tau0)

    def action_state(self, rates, state: ServerState) -> np.ndarray:
        raw = np.concatenate((np.asarray(rates, dtype=np.float64), [state.queue_cycles], state.wd_queues))
        return self.bank.normalize(raw)

    def q_estimate(self, rates, state: ServerState) -> float:
        return float(self.eta @ features(self.bank, self.action_state(rates, state)))

    def to_dict(self) -> dict[str, Any]:
        return {
            "eta": self.eta.tolist(),
            "rates": self.rates.tolist(),
            "f_max": self.f_max,
            "step": self.step,
            "alpha0": self.alpha0,
            "tau0": self.tau0,
            "step_scale": self.step_scale,
            "tolerance": self.tolerance,
            "converged_at": self.converged_at,
            "bank": self.bank.to_dict(),
        }

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> "ServerLearner":
        return cls(
            bank=FeatureBank.from_dict(payload["bank"]),
            eta=np.asarray(payload["eta"], dtype=np.float64),
            rates=np.asarray(payload["rates"], dtype=np.float64),
            f_max=float(payload["f_max"]),
            step=int(payload["step"]),
            alpha0=float(payload["alpha0"]),
            tau0=float(payload["tau0"]),
            step_scale=float(payload.get("step_scale", 1.0)),
            tolerance=float(payload["tolerance"]),
            converged_at=payload.get("converged_at"),
        )

    def save(self, path: str | Path) -> Path:
        return atomic_write_text(path, json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "ServerLearner":
        with open(path, encoding="utf-8") as handle:
            return cls.from_dict(json.load(handle))


@dataclass(frozen=True, eq=False)
class ServerUpdate:
    rates: np.ndarray
    reward: float
    td_error: float
    rate_gradient: np.ndarray
    eta_gradient: np.ndarray
    rel_change: float

    @property
    def grad_norm(self) -> float:
        return gradient_norm(self.rate_gradient, self.eta_gradient)


def gd_step_ser(
    learner: ServerLearner,
    rate_gradient,
    eta_gradient,
    step_size: float,
    block: int | None = None,
) -> ServerLearner:
    """Clamped gradient step on (f_ser, eta), rates moving in units of f_max.

    The rate step is further scaled by `learner.step_scale`.
    """
    rate_gradient = np.asarray(rate_gradient, dtype=np.float64)
    eta_gradient = np.asarray(eta_gradient, dtype=np.float64)
    where = learner.step if block is None else block
    if not (np.all(np.isfinite(rate_gradient)) and np.all(np.isfinite(eta_gradient))):
        raise LearnerDivergenceError(learner.name, where, "non-finite gradient")
    if step_size < 0.0:
        raise ValueError(f"step size must be >= 0, got {step_size}")
    new_eta = learner.eta - step_size * eta_gradient
    scale = step_size * learner.step_scale * learner.f_max * learner.f_max
    moved = learner.rates - scale * rate_gradient
    if not (np.all(np.isfinite(new_eta)) and np.all(np.isfinite(moved))):
        raise LearnerDivergenceError(learner.name, where, "parameters overflowed")
    learner.last_rel_change = float(relative_change_kernel(learner.eta, new_eta))
    learner.eta = new_eta
    learner.rates = np.clip(moved, 0.0, learner.f_max)
    learner.step += 1
    if learner.converged_at is None and learner.last_rel_change <= learner.tolerance:
        learner.converged_at = learner.step
    return learner


def algorithm2_block(
    learner: ServerLearner,
    state: ServerState,
    next_state: ServerState,
    config: SystemConfig,
    block: int | None = None,
) -> ServerUpdate:
    """One online iteration of the server learner.

    The rates the learner holds are the ones executed in `state`; after the
    step they are the rates for the next server block.
    """
    rates = learner.rates.copy()
    phi_t = features(learner.bank, learner.action_state(rates, state))
    phi_next = features(learner.bank, learner.action_state(rates, next_state))
    reward = server_reward(state.queue_cycles, rates, config)
    rho = td_error_ser(reward, learner.eta, phi_t, phi_next, config.discount)
    if learner.first_sq_td_error is None:
        learner.first_sq_td_error = rho * rho
    g_rates = grad_rates(rho, learner.eta, learner.bank, phi_t, phi_next, rates, config)
    g_eta = grad_eta(rho, phi_t, phi_next, config.discount)
    gd_step_ser(learner, g_rates, g_eta, learner.step_size(), block)
    update = ServerUpdate(
        rates=learner.rates.copy(),
        reward=reward,
        td_error=rho,
        rate_gradient=g_rates,
        eta_gradient=g_eta,
        rel_change=learner.last_rel_change,
    )
    if not math.isfinite(update.grad_norm):
        where = learner.step if block is None else block
        raise LearnerDivergenceError(learner.name, where, "gradient norm overflowed")
    return update
