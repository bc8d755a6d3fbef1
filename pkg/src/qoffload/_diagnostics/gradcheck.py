"""Finite-difference oracle for the analytic TD-error gradients."""

import math
from dataclasses import dataclass, field

import numpy as np

from qoffload._env_model import SystemConfig
from qoffload._qfunc import FeatureBank, features
from qoffload._server_agent import (
    grad_eta,
    grad_rates,
    server_feature_scales,
    server_reward,
    td_error_ser,
)
from qoffload._util.constants import FINITE_DIFF_STEP, GRADCHECK_TOLERANCE, WD_POWER_INDEX
from qoffload._util.progress import ProgressCallback, ProgressTracker
from qoffload._wd_agent import grad_power, grad_theta, td_error_wd, wd_feature_scales, wd_reward
from qoffload.codes import GradTarget

# mean channel gain used to normalize random device instances
INSTANCE_MEAN_GAIN = 500.0

WD_TARGETS = (GradTarget.GRAD_POWER, GradTarget.GRAD_THETA)


@dataclass(frozen=True, eq=False)
class GradInstance:
    """One random transition on which a gradient is checked.

    Attributes:
        target: Gradient under test.
        config: System constants.
        bank: Feature bank of the learner.
        params: theta (device) or eta (server).
        action_state: Raw action-state of block t.
        next_action_state: Raw action-state of block t+1; shares the action.
        cpu_rates: Local rates entering the device reward (device targets only).
    """

    target: GradTarget
    config: SystemConfig
    bank: FeatureBank
    params: np.ndarray
    action_state: np.ndarray
    next_action_state: np.ndarray
    cpu_rates: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def is_wd(self) -> bool:
        return self.target in WD_TARGETS

    @property
    def num_actions(self) -> int:
        return 1 if self.is_wd else self.config.slots_per_block

    @property
    def action(self) -> np.ndarray:
        return self.action_state[: self.num_actions].copy()

    def td_error(self, action=None, params=None) -> float:
        """TD error with the shared action and/or the parameters replaced."""
        action = self.action if action is None else np.asarray(action, dtype=np.float64)
        params = self.params if params is None else np.asarray(params, dtype=np.float64)
        k = self.num_actions
        raw_t = self.action_state.copy()
        raw_next = self.next_action_state.copy()
        raw_t[:k] = action
        raw_next[:k] = action
        phi_t = features(self.bank, self.bank.normalize(raw_t))
        phi_next = features(self.bank, self.bank.normalize(raw_next))
        if self.is_wd:
            reward = wd_reward(float(raw_t[1]), self.cpu_rates, float(action[0]), self.config)
            return td_error_wd(reward, params, phi_t, phi_next, self.config.discount)
        reward = server_reward(float(raw_t[k]), action, self.config)
        return td_error_ser(reward, params, phi_t, phi_next, self.config.discount)

    def features_pair(self) -> tuple[np.ndarray, np.ndarray]:
        phi_t = features(self.bank, self.bank.normalize(self.action_state))
        phi_next = features(self.bank, self.bank.normalize(self.next_action_state))
        return phi_t, phi_next


def random_instance(
    target: GradTarget,
    rng: np.random.Generator,
    config: SystemConfig | None = None,
    zero_params: bool = False,
) -> GradInstance:
    """Draw a transition with moderate normalized inputs."""
    config = SystemConfig() if config is None else config
    n = config.slots_per_block
    task = config.task_cycles
    seed = int(rng.integers(2**31))
    if target in WD_TARGETS:
        scales = wd_feature_scales(config, INSTANCE_MEAN_GAIN)
        bank = FeatureBank.create(seed, config.feature_dim, scales)
        power = rng.uniform(0.05, 2.0) * scales[WD_POWER_INDEX]

        def draw_state() -> np.ndarray:
            return np.concatenate(
                (
                    [power, rng.uniform(0.0, 3.0) * task, INSTANCE_MEAN_GAIN * rng.exponential()],
                    (rng.random(n) < 0.4).astype(np.float64),
                )
            )

        rates = rng.uniform(0.0, 1.0, n) * config.wd_params(0).f_max_wd
    else:
        bank = FeatureBank.create(seed, config.feature_dim, server_feature_scales(config))
        action = rng.uniform(0.05, 0.95, n) * config.f_max_ser

        def draw_state() -> np.ndarray:
            return np.concatenate((action, rng.uniform(0.0, 3.0, config.num_wds + 1) * task))

        rates = np.zeros(0)
    params = np.zeros(config.feature_dim) if zero_params else rng.standard_normal(config.feature_dim)
    return GradInstance(
        target=GradTarget(target),
        config=config,
        bank=bank,
        params=params,
        action_state=draw_state(),
        next_action_state=draw_state(),
        cpu_rates=rates,
    )


def analytic_gradient(instance: GradInstance) -> np.ndarray:
    """Gradient in the half-derivative convention used by the learners."""
    delta = instance.td_error()
    phi_t, phi_next = instance.features_pair()
    gamma = instance.config.discount
    match instance.target:
        case GradTarget.GRAD_POWER:
            g = grad_power(delta, instance.params, instance.bank, phi_t, phi_next, instance.config)
            return np.array([g])
        case GradTarget.GRAD_THETA:
            return grad_theta(delta, phi_t, phi_next, gamma)
        case GradTarget.GRAD_RATE:
            return grad_rates(
                delta, instance.params, instance.bank, phi_t, phi_next, instance.action, instance.config
            )
        case GradTarget.GRAD_ETA:
            return grad_eta(delta, phi_t, phi_next, gamma)
    raise ValueError(f"unknown gradient target {instance.target}")


def numeric_gradient(instance: GradInstance, h_fd: float = FINITE_DIFF_STEP) -> np.ndarray:
    """Central differences of the squared TD error.

    Action coordinates are perturbed by h_fd times their normalization scale,
    parameters by h_fd.
    """
    if not h_fd > 0.0:
        raise ValueError(f"h_fd must be positive, got {h_fd}")
    if instance.target in (GradTarget.GRAD_POWER, GradTarget.GRAD_RATE):
        base = instance.action
        steps = h_fd * instance.bank.scales[: instance.num_actions]

        def objective(i: int, sign: float) -> float:
            moved = base.copy()
            moved[i] += sign * steps[i]
            return instance.td_error(action=moved) ** 2

    else:
        base = instance.params
        steps = np.full(base.shape[0], h_fd)

        def objective(i: int, sign: float) -> float:
            moved = base.copy()
            moved[i] += sign * steps[i]
            return instance.td_error(params=moved) ** 2

    return np.array(
        [(objective(i, 1.0) - objective(i, -1.0)) / (2.0 * steps[i]) for i in range(base.shape[0])]
    )


def finite_diff_check(
    target: GradTarget, instance: GradInstance, h_fd: float = FINITE_DIFF_STEP
) -> float:
    """Worst relative error between 2x the analytic gradient and central differences.

    Vector targets are compared norm-wise (max-norm). When both sides vanish
    the absolute error is returned instead.
    """
    if GradTarget(target) is not instance.target:
        raise ValueError(f"instance was drawn for {instance.target.value}, not {target}")
    analytic = 2.0 * analytic_gradient(instance)
    numeric = numeric_gradient(instance, h_fd)
    diff = np.abs(numeric - analytic)
    if instance.target is GradTarget.GRAD_RATE:
        # one scalar derivative per slot
        scales = np.maximum(np.abs(analytic), np.abs(numeric))
        return float(np.max(diff / np.where(scales > 0.0, scales, 1.0)))
    error = float(np.max(diff))
    scale = max(float(np.max(np.abs(analytic))), float(np.max(np.abs(numeric))))
    return error if scale == 0.0 else error / scale


@dataclass
class GradcheckReport:
    trials: int
    tolerance: float
    h_fd: float
    max_errors: dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(e <= self.tolerance for e in self.max_errors.values())

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "tolerance": self.tolerance,
            "h_fd": self.h_fd,
            "max_rel_errors": dict(self.max_errors),
            "passed": self.passed,
        }


def gradcheck(
    trials: int = 100,
    seed: int = 0,
    config: SystemConfig | None = None,
    h_fd: float = FINITE_DIFF_STEP,
    tolerance: float = GRADCHECK_TOLERANCE,
    callback: ProgressCallback | None = None,
) -> GradcheckReport:
    """Check every analytic gradient on `trials` random instances each."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    rng = np.random.default_rng(seed)
    tracker = ProgressTracker(callback, "Gradient check", total_steps=len(GradTarget))
    report = GradcheckReport(trials=trials, tolerance=tolerance, h_fd=h_fd)
    for target in GradTarget:
        tracker.update(step_name=target.value)
        worst = 0.0
        for trial in range(trials):
            instance = random_instance(target, rng, config)
            error = finite_diff_check(target, instance, h_fd)
            worst = error if math.isnan(error) else max(worst, error)
            tracker.tick(trial + 1, trials, unit="Trial")
        report.max_errors[target.value] = worst
    return report
