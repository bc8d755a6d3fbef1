import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from qoffload._env_model import SystemConfig
from qoffload._util.constants import DEFAULT_HORIZON_BLOCKS, DEFAULT_NUM_SEEDS
from qoffload._util.errors import ConfigurationError
from qoffload.codes import PolicyKind, ServerMode, SweepAxis


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: the system, the policy under test and the seeding.

    Attributes:
        system: Physical, cost and learning constants.
        policy: Offloading policy of every device in `run`.
        horizon_blocks: Number of blocks T simulated per episode.
        master_seed: Root of every random stream; `None` uses `system.seed`.
        sweep_axis: Parameter varied by `sweep`.
        sweep_values: Values of the sweep axis.
        sweep_policies: Policies compared by `sweep`; empty means `policy` only.
        num_seeds: Replicates per sweep cell.
        server_mode: Learning server or fixed-rate server.
        output_dir: Directory receiving CSV and JSON outputs.
        jobs: Worker threads for sweep cells.
        stream_overrides: Entropy replacing the derived seed of named streams
            (e.g. {"wd1.policy": 7}); used to replay a run with one stream changed.
    """

    system: SystemConfig = field(default_factory=SystemConfig)
    policy: PolicyKind = PolicyKind.PROPOSED
    horizon_blocks: int = DEFAULT_HORIZON_BLOCKS
    master_seed: int | None = None
    sweep_axis: SweepAxis = SweepAxis.ARRIVAL_PROB
    sweep_values: tuple[float, ...] = ()
    sweep_policies: tuple[PolicyKind, ...] = ()
    num_seeds: int = DEFAULT_NUM_SEEDS
    server_mode: ServerMode = ServerMode.LEARNING
    output_dir: str = "output"
    jobs: int = 1
    stream_overrides: dict[str, int] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "policy", PolicyKind(self.policy))
        object.__setattr__(self, "sweep_axis", SweepAxis(self.sweep_axis))
        object.__setattr__(self, "server_mode", ServerMode(self.server_mode))
        object.__setattr__(self, "sweep_values", tuple(float(v) for v in self.sweep_values))
        object.__setattr__(
            self, "sweep_policies", tuple(PolicyKind(p) for p in self.sweep_policies)
        )
        object.__setattr__(
            self, "stream_overrides", {str(k): int(v) for k, v in self.stream_overrides.items()}
        )

    @property
    def seed(self) -> int:
        return self.system.seed if self.master_seed is None else self.master_seed

    @property
    def policies(self) -> tuple[PolicyKind, ...]:
        return self.sweep_policies or (self.policy,)

    def validate(self) -> "ExperimentConfig":
        self.system.validate()
        if self.horizon_blocks < 1:
            raise ConfigurationError(f"horizon_blocks must be >= 1, got {self.horizon_blocks}")
        if self.num_seeds < 1:
            raise ConfigurationError(f"num_seeds must be >= 1, got {self.num_seeds}")
        if self.jobs < 1:
            raise ConfigurationError(f"jobs must be >= 1, got {self.jobs}")
        if self.seed < 0:
            raise ConfigurationError(f"master_seed must be >= 0, got {self.seed}")
        for value in self.sweep_values:
            if self.sweep_axis is SweepAxis.ARRIVAL_PROB and not 0.0 <= value < 1.0:
                raise ConfigurationError(f"arrival probability {value} outside [0, 1)")
            if self.sweep_axis is SweepAxis.NUM_WDS and (value < 1 or value != int(value)):
                raise ConfigurationError(f"number of devices {value} is not a positive integer")
        return self

    def replace(self, **changes: Any) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes).validate()

    def at_axis_value(self, value: float) -> "ExperimentConfig":
        """Copy with the sweep axis set to `value`."""
        match self.sweep_axis:
            case SweepAxis.ARRIVAL_PROB:
                system = self.system.replace(arrival_prob=float(value))
            case SweepAxis.NUM_WDS:
                system = self.system.replace(num_wds=int(value))
        return self.replace(system=system)

    def to_dict(self) -> dict[str, Any]:
        return {
            "system": self.system.to_dict(),
            "policy": self.policy.value,
            "horizon_blocks": self.horizon_blocks,
            "master_seed": self.seed,
            "sweep_axis": self.sweep_axis.value,
            "sweep_values": list(self.sweep_values),
            "sweep_policies": [p.value for p in self.sweep_policies],
            "num_seeds": self.num_seeds,
            "server_mode": self.server_mode.value,
            "output_dir": self.output_dir,
            "jobs": self.jobs,
            "stream_overrides": dict(sorted(self.stream_overrides.items())),
        }

    @classmethod
    def field_names(cls) -> set[str]:
        return {f.name for f in dataclasses.fields(cls)}

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> "ExperimentConfig":
        unknown = sorted(set(payload) - cls.field_names())
        if unknown:
            raise ConfigurationError(f"unknown ExperimentConfig field: {unknown[0]}")
        payload = dict(payload)
        system = payload.pop("system", {})
        if not isinstance(system, dict):
            raise ConfigurationError("system must be a JSON object")
        try:
            config = cls(system=SystemConfig.from_dict(system), **payload)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigurationError):
                raise
            raise ConfigurationError(f"invalid ExperimentConfig: {exc}") from exc
        return config.validate()

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as handle:
            try:
                payload = json.load(handle)
            except json.JSONDecodeError as exc:
                raise ConfigurationError(f"{path} is not valid JSON: {exc}") from exc
        if not isinstance(payload, dict):
            raise ConfigurationError(f"{path} must hold a JSON object")
        return cls.from_dict(payload)
