import numpy as np

from qoffload._env_model import SystemConfig, server_energy, server_stage_cost
from qoffload._qfunc import (
    FeatureBank,
    action_gradient_kernel,
    param_gradient_kernel,
    td_error_kernel,
)


def _vector(values) -> np.ndarray:
    return np.ascontiguousarray(values, dtype=np.float64).reshape(-1)


def server_reward(queue_cycles: float, cpu_rates, config: SystemConfig) -> float:
    """w1 * q_ser/W + w2 * E_ser at the decided rates."""
    return server_stage_cost(queue_cycles, server_energy(cpu_rates, config), config)


def td_error_ser(reward: float, eta, phi_t, phi_next, discount: float) -> float:
    eta = _vector(eta)
    phi_t = _vector(phi_t)
    phi_next = _vector(phi_next)
    if not eta.shape == phi_t.shape == phi_next.shape:
        raise ValueError("eta, phi_t and phi_next must have the same length")
    return float(td_error_kernel(reward, eta, phi_t, phi_next, discount))


def grad_rate(
    rho: float,
    eta,
    bank: FeatureBank,
    phi_t,
    phi_next,
    rate: float,
    slot: int,
    config: SystemConfig,
) -> float:
    """Half the derivative of rho^2 with respect to the CPU rate of `slot`."""
    if not 0 <= slot < config.slots_per_block:
        raise ValueError(f"slot must lie in [0, {config.slots_per_block}), got {slot}")
    _, w2, _, _ = config.weights
    slope = 3.0 * w2 * config.slot_seconds * config.cap_ser * rate * rate
    return float(
        action_gradient_kernel(
            rho,
            _vector(eta),
            np.ascontiguousarray(bank.weights[:, slot]),
            _vector(phi_t),
            _vector(phi_next),
            config.discount,
            slope,
            float(bank.scales[slot]),
        )
    )


def grad_rates(
    rho: float, eta, bank: FeatureBank, phi_t, phi_next, rates, config: SystemConfig
) -> np.ndarray:
    """`grad_rate` for every slot."""
    rates = _vector(rates)
    return np.array(
        [
            grad_rate(rho, eta, bank, phi_t, phi_next, float(rates[i]), i, config)
            for i in range(rates.shape[0])
        ]
    )


def grad_eta(rho: float, phi_t, phi_next, discount: float) -> np.ndarray:
    """Half the gradient of rho^2 with respect to eta."""
    return param_gradient_kernel(rho, _vector(phi_t), _vector(phi_next), discount)
