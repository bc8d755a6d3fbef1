import math

import numpy as np

from qoffload._env_model.config import SystemConfig
from qoffload._env_model.kernels import (
    achievable_bits_kernel,
    cubic_energy_kernel,
    executed_cycles_kernel,
    executed_rates_kernel,
    required_power_kernel,
    residual_cycles_kernel,
    server_queue_step_kernel,
    wd_queue_step_kernel,
)
from qoffload._env_model.state import as_rates
from qoffload._util.errors import InfeasibleOffloadError
from qoffload.codes import QueueMode


def _check_nonnegative(name: str, value: float) -> None:
    if not value >= 0.0:
        raise ValueError(f"{name} must be >= 0, got {value}")


def residual_cycles(queue_cycles: float, cpu_rates, config: SystemConfig) -> float:
    """Workload left for offloading after one block of local execution."""
    _check_nonnegative("queue_cycles", queue_cycles)
    rates = as_rates(cpu_rates)
    local = executed_cycles_kernel(rates, config.slot_seconds)
    return float(residual_cycles_kernel(queue_cycles, local, config.task_cycles))


def intermediate_output_size(queue_cycles: float, cpu_rates, config: SystemConfig) -> float:
    """Bits D of the intermediate output, zeta * ([q - sum f tau]^+ mod W)."""
    return config.bits_per_cycle * residual_cycles(queue_cycles, cpu_rates, config)


def required_power(bits: float, gain: float, config: SystemConfig, wd: int = 0) -> float:
    """Transmit power needed to offload `bits` in one slot over a channel with `gain`.

    Raises:
        InfeasibleOffloadError: If the power is not a finite float.
    """
    _check_nonnegative("bits", bits)
    if bits == 0.0:
        return 0.0
    if not gain > 0.0:
        raise InfeasibleOffloadError(f"cannot offload {bits} bits over channel gain {gain}")
    params = config.wd_params(wd)
    power = required_power_kernel(
        bits, gain, config.snr_gap, config.slot_seconds, params.bandwidth_hz
    )
    if not math.isfinite(power):
        raise InfeasibleOffloadError(
            f"offloading {bits:.6g} bits needs an unbounded transmit power; "
            "check bits_per_cycle and task_cycles"
        )
    return float(power)


def achievable_bits(power: float, gain: float, config: SystemConfig, wd: int = 0) -> float:
    """Bits per offload slot at `power`."""
    _check_nonnegative("power", power)
    params = config.wd_params(wd)
    return float(
        achievable_bits_kernel(
            power, gain, config.snr_gap, config.slot_seconds, params.bandwidth_hz
        )
    )


def wd_queue_step(
    queue_cycles: float,
    cpu_rates,
    arrivals,
    config: SystemConfig,
    offload_cycles: float | None = None,
) -> float:
    """Advance one WD backlog by a block.

    `offload_cycles` defaults to the mod-W residual of the block. It only
    leaves the queue in conserving mode.
    """
    _check_nonnegative("queue_cycles", queue_cycles)
    rates = as_rates(cpu_rates)
    if np.any(rates < 0.0):
        raise ValueError("cpu rates must be >= 0")
    if offload_cycles is None:
        offload_cycles = residual_cycles(queue_cycles, rates, config)
    _check_nonnegative("offload_cycles", offload_cycles)
    if config.queue_mode is QueueMode.RETAINING:
        offload_cycles = 0.0
    return float(
        wd_queue_step_kernel(
            queue_cycles,
            rates,
            as_rates(arrivals),
            config.slot_seconds,
            config.task_cycles,
            offload_cycles,
        )
    )


def server_queue_step(queue_cycles: float, cpu_rates, residuals, config: SystemConfig) -> float:
    """Advance the server backlog by a block, adding the devices' residuals."""
    _check_nonnegative("queue_cycles", queue_cycles)
    incoming = as_rates(residuals)
    if np.any(incoming < 0.0):
        raise ValueError("residuals must be >= 0")
    return float(
        server_queue_step_kernel(
            queue_cycles, as_rates(cpu_rates), incoming, config.slot_seconds
        )
    )


def executed_server_rates(queue_cycles: float, cpu_rates, config: SystemConfig) -> np.ndarray:
    """Rates the server actually runs at; it idles once the backlog is gone."""
    return executed_rates_kernel(queue_cycles, as_rates(cpu_rates), config.slot_seconds)


def local_energy(cpu_rates, config: SystemConfig, wd: int = 0) -> float:
    params = config.wd_params(wd)
    return float(cubic_energy_kernel(as_rates(cpu_rates), config.slot_seconds, params.cap_wd))


def server_energy(cpu_rates, config: SystemConfig) -> float:
    return float(cubic_energy_kernel(as_rates(cpu_rates), config.slot_seconds, config.cap_ser))


def offload_energy(power: float, config: SystemConfig) -> float:
    _check_nonnegative("power", power)
    return config.slot_seconds * power
