import math

import numpy as np
from numba import njit  # type: ignore[attr-defined]

from qoffload._util.constants import RESIDUAL_SNAP_CYCLES

LN2 = math.log(2.0)


@njit
def residual_cycles_kernel(
    queue_cycles: float, local_cycles: float, task_cycles: float
) -> float:
    """Cycles left after local execution that are not a whole number of tasks.

    Args:
        queue_cycles (float): WD backlog at the start of the block
        local_cycles (float): cycles executed locally during the block
        task_cycles (float): cycles per task W

    Returns:
        float: ([q - local]^+ mod W)
    """
    remaining = queue_cycles - local_cycles
    if remaining <= 0.0:
        return 0.0
    residual = remaining % task_cycles
    if task_cycles - residual <= RESIDUAL_SNAP_CYCLES:
        return 0.0
    return residual


@njit
def required_power_kernel(
    bits: float,
    gain: float,
    snr_gap: float,
    slot_seconds: float,
    bandwidth_hz: float,
) -> float:
    """Transmit power that pushes `bits` through one offload slot.

    Returns inf when the exponent overflows; callers turn that into an error.
    """
    if bits <= 0.0:
        return 0.0
    exponent = bits / (slot_seconds * bandwidth_hz) * LN2
    if exponent > 700.0:
        return np.inf
    return snr_gap / gain * math.expm1(exponent)


@njit
def achievable_bits_kernel(
    power: float,
    gain: float,
    snr_gap: float,
    slot_seconds: float,
    bandwidth_hz: float,
) -> float:
    """Bits delivered in one offload slot at `power`; inverse of required_power."""
    if power <= 0.0:
        return 0.0
    return slot_seconds * bandwidth_hz * math.log1p(gain * power / snr_gap) / LN2


@njit
def executed_cycles_kernel(rates: np.ndarray, slot_seconds: float) -> float:
    total = 0.0
    for i in range(rates.shape[0]):
        total += rates[i] * slot_seconds
    return total


@njit
def cubic_energy_kernel(rates: np.ndarray, slot_seconds: float, capacitance: float) -> float:
    """Dynamic CPU energy sum_i tau * xi * f_i^3, summed in slot order."""
    total = 0.0
    for i in range(rates.shape[0]):
        total += slot_seconds * capacitance * rates[i] ** 3
    return total


@njit
def wd_queue_step_kernel(
    queue_cycles: float,
    rates: np.ndarray,
    arrivals: np.ndarray,
    slot_seconds: float,
    task_cycles: float,
    offload_cycles: float,
) -> float:
    """Next WD backlog.

    Args:
        queue_cycles (float): backlog at the start of the block
        rates (np.ndarray): per-slot local CPU rates
        arrivals (np.ndarray): per-slot arrival indicators
        slot_seconds (float): slot duration tau
        task_cycles (float): cycles per task W
        offload_cycles (float): cycles removed by offloading (0 keeps them queued)

    Returns:
        float: [q - sum f tau - offload]^+ + sum beta W
    """
    drained = queue_cycles - executed_cycles_kernel(rates, slot_seconds) - offload_cycles
    if drained < 0.0:
        drained = 0.0
    arrived = 0.0
    for i in range(arrivals.shape[0]):
        arrived += arrivals[i] * task_cycles
    return drained + arrived


@njit
def server_queue_step_kernel(
    queue_cycles: float,
    rates: np.ndarray,
    residuals: np.ndarray,
    slot_seconds: float,
) -> float:
    """Next server backlog; residuals are summed in device index order."""
    drained = queue_cycles - executed_cycles_kernel(rates, slot_seconds)
    if drained < 0.0:
        drained = 0.0
    incoming = 0.0
    for k in range(residuals.shape[0]):
        incoming += residuals[k]
    return drained + incoming


@njit
def executed_rates_kernel(
    queue_cycles: float, rates: np.ndarray, slot_seconds: float
) -> np.ndarray:
    """Per-slot rates actually used when the backlog runs out mid-block."""
    executed = np.zeros(rates.shape[0])
    remaining = queue_cycles
    for i in range(rates.shape[0]):
        rate = min(rates[i], remaining / slot_seconds)
        if rate < 0.0:
            rate = 0.0
        executed[i] = rate
        remaining -= rate * slot_seconds
    return executed
