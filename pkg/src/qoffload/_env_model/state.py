from dataclasses import dataclass, field

import numpy as np

from qoffload._env_model.config import SystemConfig
from qoffload._util.errors import ConfigurationError


def as_rates(values, length: int | None = None) -> np.ndarray:
    """Copy `values` into a contiguous float64 vector (the kernels' input type)."""
    array = np.ascontiguousarray(values, dtype=np.float64).reshape(-1).copy()
    if length is not None and array.shape[0] != length:
        raise ValueError(f"expected {length} entries, got {array.shape[0]}")
    return array


@dataclass(eq=False)
class WdState:
    """Local state of one wireless device at the start of a block.

    Attributes:
        queue_cycles: Backlog in CPU cycles.
        channel_gain: Linear power gain of the uplink, noise folded in.
        arrivals: Per-slot task arrival indicators of this block.
    """

    queue_cycles: float
    channel_gain: float
    arrivals: np.ndarray

    def __post_init__(self) -> None:
        self.queue_cycles = float(self.queue_cycles)
        self.channel_gain = float(self.channel_gain)
        self.arrivals = as_rates(self.arrivals)

    def validate(self, config: SystemConfig) -> "WdState":
        if not self.queue_cycles >= 0.0:
            raise ConfigurationError(f"queue_cycles must be >= 0, got {self.queue_cycles}")
        if not self.channel_gain > 0.0:
            raise ConfigurationError(f"channel_gain must be > 0, got {self.channel_gain}")
        if self.arrivals.shape[0] != config.slots_per_block:
            raise ConfigurationError(
                f"expected {config.slots_per_block} arrival slots, got {self.arrivals.shape[0]}"
            )
        return self


@dataclass(eq=False)
class WdAction:
    """What a device executes in one block.

    Attributes:
        power: Transmit power of the offload slot in watts.
        cpu_rates: Local CPU rate per compute slot.
        offload_cycles: Workload shipped to the server in this block.
    """

    power: float
    cpu_rates: np.ndarray
    offload_cycles: float

    def __post_init__(self) -> None:
        self.power = float(self.power)
        self.cpu_rates = as_rates(self.cpu_rates)
        self.offload_cycles = float(self.offload_cycles)

    @classmethod
    def idle(cls, config: SystemConfig) -> "WdAction":
        return cls(0.0, np.zeros(config.slots_per_block), 0.0)


@dataclass(eq=False)
class ServerState:
    """Queue state seen by the edge server.

    The server never observes channel gains or arrival indicators.
    """

    queue_cycles: float
    wd_queues: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self) -> None:
        self.queue_cycles = float(self.queue_cycles)
        self.wd_queues = as_rates(self.wd_queues)

    def validate(self, config: SystemConfig) -> "ServerState":
        if not self.queue_cycles >= 0.0:
            raise ConfigurationError(f"queue_cycles must be >= 0, got {self.queue_cycles}")
        if self.wd_queues.shape[0] != config.num_wds:
            raise ConfigurationError(
                f"expected {config.num_wds} WD queues, got {self.wd_queues.shape[0]}"
            )
        if np.any(self.wd_queues < 0.0):
            raise ConfigurationError("WD queues must be >= 0")
        return self
