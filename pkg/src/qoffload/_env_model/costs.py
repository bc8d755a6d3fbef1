from dataclasses import dataclass

import numpy as np

from qoffload._env_model.config import SystemConfig


@dataclass(frozen=True, eq=False)
class StageCosts:
    centralized: float
    server: float
    wds: np.ndarray


def wd_stage_cost(queue_cycles: float, wd_joules: float, config: SystemConfig) -> float:
    """w3 * q/W + w4 * (E_wd + E_off), `wd_joules` being the sum of both energies."""
    _, _, w3, w4 = config.weights
    return w3 * queue_cycles / config.task_cycles + w4 * wd_joules


def server_stage_cost(queue_cycles: float, server_joules: float, config: SystemConfig) -> float:
    """w1 * q_ser/W + w2 * E_ser."""
    w1, w2, _, _ = config.weights
    return w1 * queue_cycles / config.task_cycles + w2 * server_joules


def stage_costs(
    server_queue: float,
    server_joules: float,
    wd_queues,
    wd_joules,
    config: SystemConfig,
) -> StageCosts:
    """Split the per-block system cost into the server part and one part per device.

    Args:
        server_queue (float): server backlog q_ser
        server_joules (float): server energy E_ser of the block
        wd_queues: backlog of every device
        wd_joules: E_wd + E_off of every device
        config (SystemConfig): system constants

    Returns:
        StageCosts: the parts and their sum, accumulated in device index order
    """
    queues = np.asarray(wd_queues, dtype=np.float64).reshape(-1)
    energies = np.asarray(wd_joules, dtype=np.float64).reshape(-1)
    if queues.shape != energies.shape:
        raise ValueError("wd_queues and wd_joules must have the same length")
    server = server_stage_cost(server_queue, server_joules, config)
    wds = np.empty(queues.shape[0])
    centralized = server
    for k in range(queues.shape[0]):
        wds[k] = wd_stage_cost(float(queues[k]), float(energies[k]), config)
        centralized += wds[k]
    return StageCosts(centralized=centralized, server=server, wds=wds)
