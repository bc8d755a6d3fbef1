import math

import numpy as np

from qoffload._env_model import SystemConfig, WdAction, WdState, required_power
from qoffload._util.errors import InfeasibleOffloadError
from qoffload._wd_agent import block_capacity, project_residual
from qoffload.codes import PolicyKind


def head_of_line(queue_cycles: float, config: SystemConfig) -> float:
    """Unfinished part of the oldest task (a whole task when the queue holds whole tasks)."""
    if queue_cycles <= 0.0:
        return 0.0
    remainder = queue_cycles % config.task_cycles
    return remainder if remainder > 0.0 else config.task_cycles


def local_only(state: WdState, config: SystemConfig, wd: int = 0) -> WdAction:
    """Run as much of the backlog as the CPU allows, offload nothing."""
    n = config.slots_per_block
    work = min(state.queue_cycles, block_capacity(config, wd))
    rate = min(work / (n * config.slot_seconds), config.wd_params(wd).f_max_wd)
    return WdAction(power=0.0, cpu_rates=np.full(n, rate), offload_cycles=0.0)


def binary_costs(state: WdState, config: SystemConfig, wd: int = 0) -> tuple[float, float, float]:
    """Estimated (local cost, offload cost, offload power) of the head-of-line task.

    Local: energy of running it at f_max plus the queue weight for the blocks
    it occupies the CPU. Offload: energy of sending all of it in one slot.
    """
    _, _, w3, w4 = config.weights
    params = config.wd_params(wd)
    task = head_of_line(state.queue_cycles, config)
    blocks_busy = task / block_capacity(config, wd)
    local_cost = w4 * params.cap_wd * params.f_max_wd**2 * task + w3 * task / config.task_cycles * blocks_busy
    try:
        power = required_power(config.bits_per_cycle * task, state.channel_gain, config, wd)
    except InfeasibleOffloadError:
        return local_cost, math.inf, math.inf
    return local_cost, w4 * config.slot_seconds * power, power


def binary_offload_decide(state: WdState, config: SystemConfig, wd: int = 0) -> WdAction:
    """Whole-task offloading: the head-of-line task runs locally or is sent entirely.

    Offloading also requires the power to stay within `binary_power_cap`;
    otherwise the device falls back to local execution.
    """
    if state.queue_cycles <= 0.0:
        return WdAction.idle(config)
    local_cost, offload_cost, power = binary_costs(state, config, wd)
    if offload_cost < local_cost and power <= config.binary_power_cap:
        task = head_of_line(state.queue_cycles, config)
        return WdAction(
            power=power,
            cpu_rates=np.zeros(config.slots_per_block),
            offload_cycles=task,
        )
    return local_only(state, config, wd)


def even_allocation_decide(state: WdState, config: SystemConfig, wd: int = 0) -> WdAction:
    """Offload the same fraction `even_fraction` of the head-of-line task every block."""
    if state.queue_cycles <= 0.0:
        return WdAction.idle(config)
    if config.even_fraction == 0.0:
        return local_only(state, config, wd)
    target = config.even_fraction * head_of_line(state.queue_cycles, config)
    return project_residual(target, state, config, wd)


def random_offload_decide(
    state: WdState, config: SystemConfig, rng: np.random.Generator, wd: int = 0
) -> WdAction:
    """Offload a Uniform(0, 1) fraction of the head-of-line task.

    One draw is consumed every block, busy or idle.
    """
    fraction = float(rng.random())
    if state.queue_cycles <= 0.0:
        return WdAction.idle(config)
    target = fraction * head_of_line(state.queue_cycles, config)
    return project_residual(target, state, config, wd)


def baseline_decide(
    kind: PolicyKind,
    state: WdState,
    config: SystemConfig,
    rng: np.random.Generator,
    wd: int = 0,
) -> WdAction:
    match PolicyKind(kind):
        case PolicyKind.BINARY:
            return binary_offload_decide(state, config, wd)
        case PolicyKind.EVEN:
            return even_allocation_decide(state, config, wd)
        case PolicyKind.RANDOM:
            return random_offload_decide(state, config, rng, wd)
    raise ValueError(f"{kind} is not a baseline policy")
