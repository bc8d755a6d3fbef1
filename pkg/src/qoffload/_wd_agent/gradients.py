import numpy as np

from qoffload._env_model import SystemConfig, local_energy, offload_energy, wd_stage_cost
from qoffload._qfunc import (
    FeatureBank,
    action_gradient_kernel,
    param_gradient_kernel,
    td_error_kernel,
)
from qoffload._util.constants import WD_POWER_INDEX


def _vector(values) -> np.ndarray:
    return np.ascontiguousarray(values, dtype=np.float64).reshape(-1)


def wd_reward(
    queue_cycles: float, cpu_rates, power: float, config: SystemConfig, wd: int = 0
) -> float:
    """Per-block cost a device learner minimizes, equal to its stage cost."""
    joules = local_energy(cpu_rates, config, wd) + offload_energy(power, config)
    return wd_stage_cost(queue_cycles, joules, config)


def td_error_wd(reward: float, theta, phi_t, phi_next, discount: float) -> float:
    theta = _vector(theta)
    phi_t = _vector(phi_t)
    phi_next = _vector(phi_next)
    if not theta.shape == phi_t.shape == phi_next.shape:
        raise ValueError("theta, phi_t and phi_next must have the same length")
    return float(td_error_kernel(reward, theta, phi_t, phi_next, discount))


def grad_power(
    delta: float,
    theta,
    bank: FeatureBank,
    phi_t,
    phi_next,
    config: SystemConfig,
) -> float:
    """Half the derivative of delta^2 with respect to the transmit power.

    Both action-states carry the same power, so the derivative runs through
    the energy term w4*tau and through both feature vectors.
    """
    _, _, _, w4 = config.weights
    return float(
        action_gradient_kernel(
            delta,
            _vector(theta),
            np.ascontiguousarray(bank.weights[:, WD_POWER_INDEX]),
            _vector(phi_t),
            _vector(phi_next),
            config.discount,
            w4 * config.slot_seconds,
            float(bank.scales[WD_POWER_INDEX]),
        )
    )


def grad_theta(delta: float, phi_t, phi_next, discount: float) -> np.ndarray:
    """Half the gradient of delta^2 with respect to theta."""
    return param_gradient_kernel(delta, _vector(phi_t), _vector(phi_next), discount)
