import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from qoffload._util.constants import (
    DEFAULT_ACTION_JITTER_STD,
    DEFAULT_ACTION_STEP_SCALE,
    DEFAULT_ARRIVAL_PROB,
    DEFAULT_BANDWIDTH_HZ,
    DEFAULT_BINARY_POWER_CAP,
    DEFAULT_BITS_PER_CYCLE,
    DEFAULT_CAP_SER,
    DEFAULT_CAP_WD,
    DEFAULT_CELL_RADIUS_M,
    DEFAULT_DISCOUNT,
    DEFAULT_EVEN_FRACTION,
    DEFAULT_F_MAX_SER,
    DEFAULT_F_MAX_WD,
    DEFAULT_FEATURE_DIM,
    DEFAULT_FIXED_SERVER_RATE,
    DEFAULT_INITIAL_WD_TASKS,
    DEFAULT_MIN_DISTANCE_M,
    DEFAULT_NOISE_DBM_PER_HZ,
    DEFAULT_NUM_WDS,
    DEFAULT_PATHLOSS,
    DEFAULT_SEED,
    DEFAULT_SHADOW_STD_DB,
    DEFAULT_SLOT_SECONDS,
    DEFAULT_SLOTS_PER_BLOCK,
    DEFAULT_SNR_GAP,
    DEFAULT_STEP_ALPHA0,
    DEFAULT_STEP_TAU0,
    DEFAULT_TASK_CYCLES,
    DEFAULT_TOLERANCE,
    DEFAULT_WEIGHTS,
    MAX_SPECTRAL_EFFICIENCY,
)
from qoffload._util.errors import ConfigurationError
from qoffload.codes import QueueMode

# fields that may hold one value per wireless device
PER_WD_FIELDS = ("arrival_prob", "bandwidth_hz", "cap_wd", "f_max_wd")

# stable desk setting: 0.1 task per block reaches a server that drains 0.25 at f_max / 2
LIGHT_LOAD = {"num_wds": 4, "arrival_prob": 0.005, "initial_wd_tasks": 3}


@dataclass(frozen=True)
class WdParams:
    """Per-device constants resolved from a `SystemConfig`."""

    arrival_prob: float
    bandwidth_hz: float
    cap_wd: float
    f_max_wd: float


@dataclass(frozen=True)
class SystemConfig:
    """Physical, cost and learning constants of the MEC system.

    `arrival_prob`, `bandwidth_hz`, `cap_wd` and `f_max_wd` take either one
    value shared by all devices or a tuple with one value per device.
    """

    num_wds: int = DEFAULT_NUM_WDS
    slots_per_block: int = DEFAULT_SLOTS_PER_BLOCK
    slot_seconds: float = DEFAULT_SLOT_SECONDS
    task_cycles: float = DEFAULT_TASK_CYCLES
    arrival_prob: float | tuple[float, ...] = DEFAULT_ARRIVAL_PROB
    bandwidth_hz: float | tuple[float, ...] = DEFAULT_BANDWIDTH_HZ
    snr_gap: float = DEFAULT_SNR_GAP
    cap_wd: float | tuple[float, ...] = DEFAULT_CAP_WD
    cap_ser: float = DEFAULT_CAP_SER
    bits_per_cycle: float = DEFAULT_BITS_PER_CYCLE
    f_max_wd: float | tuple[float, ...] = DEFAULT_F_MAX_WD
    f_max_ser: float = DEFAULT_F_MAX_SER
    weights: tuple[float, float, float, float] = DEFAULT_WEIGHTS
    discount: float = DEFAULT_DISCOUNT
    feature_dim: int = DEFAULT_FEATURE_DIM
    cell_radius_m: float = DEFAULT_CELL_RADIUS_M
    min_distance_m: float = DEFAULT_MIN_DISTANCE_M
    pathloss: tuple[float, float] = DEFAULT_PATHLOSS
    shadow_std_db: float = DEFAULT_SHADOW_STD_DB
    noise_dbm_per_hz: float = DEFAULT_NOISE_DBM_PER_HZ
    queue_mode: QueueMode = QueueMode.CONSERVING
    seed: int = DEFAULT_SEED
    # learning
    step_alpha0: float = DEFAULT_STEP_ALPHA0
    step_tau0: float = DEFAULT_STEP_TAU0
    tolerance: float = DEFAULT_TOLERANCE
    # None: derived per device from its mean channel gain
    power_ref: float | None = None
    initial_power: float | None = None
    action_step_scale: float = DEFAULT_ACTION_STEP_SCALE
    action_jitter_std: float = DEFAULT_ACTION_JITTER_STD
    initial_wd_tasks: int = DEFAULT_INITIAL_WD_TASKS
    # comparison schemes
    even_fraction: float = DEFAULT_EVEN_FRACTION
    binary_power_cap: float = DEFAULT_BINARY_POWER_CAP
    fixed_server_rate: float = DEFAULT_FIXED_SERVER_RATE

    def __post_init__(self) -> None:
        # normalize JSON lists into tuples and strings into enums
        object.__setattr__(self, "queue_mode", QueueMode(self.queue_mode))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        object.__setattr__(self, "pathloss", tuple(float(c) for c in self.pathloss))
        for name in PER_WD_FIELDS:
            value = getattr(self, name)
            if isinstance(value, list | tuple):
                object.__setattr__(self, name, tuple(float(v) for v in value))

    @classmethod
    def light_load(cls, **changes: Any) -> "SystemConfig":
        """Defaults with a load the devices and the server can keep up with.

        Each device starts with `initial_wd_tasks` queued, so the cost has a
        backlog to work off before it settles.
        """
        return cls(**{**LIGHT_LOAD, **changes}).validate()

    def wd_params(self, k: int) -> WdParams:
        """Constants of device `k`."""

        def pick(name: str) -> float:
            value = getattr(self, name)
            if isinstance(value, tuple):
                return float(value[k])
            return float(value)

        return WdParams(
            arrival_prob=pick("arrival_prob"),
            bandwidth_hz=pick("bandwidth_hz"),
            cap_wd=pick("cap_wd"),
            f_max_wd=pick("f_max_wd"),
        )

    def validate(self) -> "SystemConfig":
        """Check every invariant; returns self so it can be chained."""
        if self.num_wds < 0:
            raise ConfigurationError(f"num_wds must be >= 0, got {self.num_wds}")
        if self.slots_per_block < 1:
            raise ConfigurationError(
                f"slots_per_block must be >= 1, got {self.slots_per_block}"
            )
        if not 0.0 < self.discount < 1.0:
            raise ConfigurationError(f"discount must lie in (0, 1), got {self.discount}")
        if self.snr_gap < 1.0:
            raise ConfigurationError(f"snr_gap must be >= 1, got {self.snr_gap}")
        if self.feature_dim < 1:
            raise ConfigurationError(f"feature_dim must be >= 1, got {self.feature_dim}")
        if len(self.weights) != 4 or any(w < 0 for w in self.weights):
            raise ConfigurationError(f"weights must be 4 nonnegative values, got {self.weights}")
        if len(self.pathloss) != 2:
            raise ConfigurationError(f"pathloss must be (a, b), got {self.pathloss}")
        for name in PER_WD_FIELDS:
            value = getattr(self, name)
            if isinstance(value, tuple) and len(value) != self.num_wds:
                raise ConfigurationError(
                    f"{name} has {len(value)} entries for {self.num_wds} devices"
                )
        for name in (
            "slot_seconds",
            "task_cycles",
            "cap_ser",
            "bits_per_cycle",
            "f_max_ser",
            "cell_radius_m",
            "min_distance_m",
            "step_alpha0",
            "step_tau0",
            "tolerance",
            "action_step_scale",
            "binary_power_cap",
        ):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigurationError(f"{name} must be positive, got {value}")
        if self.min_distance_m >= self.cell_radius_m:
            raise ConfigurationError("min_distance_m must be below cell_radius_m")
        if self.shadow_std_db < 0 or self.action_jitter_std < 0:
            raise ConfigurationError("standard deviations must be nonnegative")
        if self.power_ref is not None and not (math.isfinite(self.power_ref) and self.power_ref > 0):
            raise ConfigurationError(f"power_ref must be positive, got {self.power_ref}")
        if self.initial_power is not None and not (
            math.isfinite(self.initial_power) and self.initial_power >= 0
        ):
            raise ConfigurationError(f"initial_power must be nonnegative, got {self.initial_power}")
        if self.initial_wd_tasks < 0:
            raise ConfigurationError(f"initial_wd_tasks must be >= 0, got {self.initial_wd_tasks}")
        if not 0.0 <= self.even_fraction <= 1.0:
            raise ConfigurationError("even_fraction must lie in [0, 1]")
        if not 0.0 <= self.fixed_server_rate <= self.f_max_ser:
            raise ConfigurationError("fixed_server_rate must lie in [0, f_max_ser]")
        for k in range(self.num_wds):
            params = self.wd_params(k)
            # b = 0 is accepted as the empty-system limit
            if not 0.0 <= params.arrival_prob < 1.0:
                raise ConfigurationError(
                    f"arrival_prob of device {k} must lie in [0, 1), got {params.arrival_prob}"
                )
            for name in ("bandwidth_hz", "cap_wd", "f_max_wd"):
                value = getattr(params, name)
                if not (math.isfinite(value) and value > 0):
                    raise ConfigurationError(f"{name} of device {k} must be positive")
            bits_cap = self.slot_seconds * params.bandwidth_hz * MAX_SPECTRAL_EFFICIENCY
            if self.bits_per_cycle * self.task_cycles > bits_cap:
                raise ConfigurationError(
                    f"bits_per_cycle * task_cycles = {self.bits_per_cycle * self.task_cycles:.3g}"
                    f" bits exceeds the one-slot offload cap of {bits_cap:.3g} bits"
                    f" for device {k}"
                )
        return self

    def replace(self, **changes: Any) -> "SystemConfig":
        return dataclasses.replace(self, **changes).validate()

    def to_dict(self) -> dict[str, Any]:
        payload: dict[str, Any] = {}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if isinstance(value, QueueMode):
                value = value.value
            elif isinstance(value, tuple):
                value = list(value)
            payload[f.name] = value
        return payload

    @classmethod
    def field_names(cls) -> set[str]:
        return {f.name for f in dataclasses.fields(cls)}

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> "SystemConfig":
        unknown = sorted(set(payload) - cls.field_names())
        if unknown:
            raise ConfigurationError(f"unknown SystemConfig field: {unknown[0]}")
        try:
            config = cls(**payload)
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"invalid SystemConfig: {exc}") from exc
        return config.validate()

    @classmethod
    def from_json(cls, path: str | Path) -> "SystemConfig":
        with open(path, encoding="utf-8") as handle:
            try:
                payload = json.load(handle)
            except json.JSONDecodeError as exc:
                raise ConfigurationError(f"{path} is not valid JSON: {exc}") from exc
        if not isinstance(payload, dict):
            raise ConfigurationError(f"{path} must hold a JSON object")
        return cls.from_dict(payload)
