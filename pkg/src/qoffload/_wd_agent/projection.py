import math

import numpy as np

from qoffload._env_model import (
    SystemConfig,
    WdAction,
    WdState,
    achievable_bits,
    required_power,
    residual_cycles,
)


def block_capacity(config: SystemConfig, wd: int = 0) -> float:
    """Most cycles device `wd` can execute locally in one block."""
    return config.slots_per_block * config.slot_seconds * config.wd_params(wd).f_max_wd


def local_workload(queue_cycles: float, target_residual: float, config: SystemConfig, wd: int = 0) -> float:
    """Cycles C to execute locally so that about `target_residual` is left over.

    Picks the smallest m >= 0 with C = q - (r + m W) inside [0, cap]. Without
    such an m the target is not reachable this block and the residual is
    rounded up: full local work when that leaves more than the target, no
    local work otherwise. The offloaded residual is then non-decreasing in
    the target.
    """
    task = config.task_cycles
    cap = min(block_capacity(config, wd), max(queue_cycles, 0.0))
    target = min(max(target_residual, 0.0), task - 1.0)
    m = max(0, math.ceil((queue_cycles - target - cap) / task))
    local = queue_cycles - target - m * task
    if 0.0 <= local <= cap:
        return local
    if (queue_cycles - cap) % task > target:
        return cap
    return 0.0


def project_residual(
    target_residual: float, state: WdState, config: SystemConfig, wd: int = 0
) -> WdAction:
    """Feasible action that offloads about `target_residual` cycles.

    Local work is split evenly over the compute slots, the actual residual is
    recomputed from those rates and the power is whatever that residual needs,
    so the rate/power relation holds exactly for the executed action.
    """
    n = config.slots_per_block
    if state.queue_cycles <= 0.0:
        return WdAction.idle(config)
    local = local_workload(state.queue_cycles, target_residual, config, wd)
    f_max = config.wd_params(wd).f_max_wd
    rate = min(local / (n * config.slot_seconds), f_max)
    rates = np.full(n, rate)
    residual = residual_cycles(state.queue_cycles, rates, config)
    power = required_power(config.bits_per_cycle * residual, state.channel_gain, config, wd)
    return WdAction(power=power, cpu_rates=rates, offload_cycles=residual)


def project_action(
    proposed_power: float, state: WdState, config: SystemConfig, wd: int = 0
) -> WdAction:
    """Turn a proposed transmit power into an executable (power, rates) pair."""
    if proposed_power < 0.0:
        raise ValueError(f"proposed power must be >= 0, got {proposed_power}")
    if state.queue_cycles <= 0.0:
        return WdAction.idle(config)
    bits = achievable_bits(proposed_power, state.channel_gain, config, wd)
    return project_residual(bits / config.bits_per_cycle, state, config, wd)
