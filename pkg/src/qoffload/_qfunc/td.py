import numpy as np
from numba import njit  # type: ignore[attr-defined]


@njit
def td_error_kernel(
    reward: float,
    params: np.ndarray,
    phi_t: np.ndarray,
    phi_next: np.ndarray,
    discount: float,
) -> float:
    """reward + discount * params . phi_next - params . phi_t"""
    q_t = 0.0
    q_next = 0.0
    for i in range(params.shape[0]):
        q_t += params[i] * phi_t[i]
        q_next += params[i] * phi_next[i]
    return reward + discount * q_next - q_t


@njit
def action_gradient_kernel(
    td_error: float,
    params: np.ndarray,
    weight_column: np.ndarray,
    phi_t: np.ndarray,
    phi_next: np.ndarray,
    discount: float,
    reward_slope: float,
    scale: float,
) -> float:
    """Half the derivative of the squared TD error along one action coordinate.

    Both action-states share the action coordinate, whose feature input is
    the raw action divided by `scale`; `weight_column` holds that coordinate
    of every feature direction.
    """
    total = 0.0
    for i in range(params.shape[0]):
        slope_next = phi_next[i] * (1.0 - phi_next[i])
        slope_t = phi_t[i] * (1.0 - phi_t[i])
        total += params[i] * weight_column[i] * (discount * slope_next - slope_t)
    return td_error * (reward_slope + total / scale)


@njit
def param_gradient_kernel(
    td_error: float, phi_t: np.ndarray, phi_next: np.ndarray, discount: float
) -> np.ndarray:
    """Half the gradient of the squared TD error with respect to the parameters."""
    grad = np.empty(phi_t.shape[0])
    for i in range(phi_t.shape[0]):
        grad[i] = td_error * (discount * phi_next[i] - phi_t[i])
    return grad


@njit
def relative_change_kernel(old: np.ndarray, new: np.ndarray) -> float:
    """||new - old|| / ||old||, infinite when `old` is the zero vector."""
    diff = 0.0
    norm = 0.0
    for i in range(old.shape[0]):
        diff += (new[i] - old[i]) ** 2
        norm += old[i] ** 2
    if norm == 0.0:
        return np.inf
    return np.sqrt(diff) / np.sqrt(norm)


def gradient_norm(*parts) -> float:
    """Euclidean norm of the concatenated gradient parts.

    Scaled by the largest magnitude first, so finite gradients far above
    1e154 give a finite norm instead of overflowing on the squares.
    """
    values = np.abs(np.concatenate([np.atleast_1d(np.asarray(p, dtype=np.float64)) for p in parts]))
    if values.size == 0:
        return 0.0
    scale = float(values.max())
    if scale == 0.0 or not np.isfinite(scale):
        return scale
    return scale * float(np.sqrt(np.sum((values / scale) ** 2)))
