"""Per-entity random streams derived from one master seed.

Every stream is `SeedSequence(entropy=master_seed, spawn_key=(entity, stream))`
where entity 0 is the system (placement, server bank) and entity k + 1 is
device k. Keys never depend on the number of devices or on the policy, so one
device's draws do not move when anything else about the run changes.
"""

from dataclasses import dataclass, field

import numpy as np

SEED_SCHEME = "numpy.random.SeedSequence(entropy=master_seed, spawn_key=(entity, stream))"

SYSTEM_ENTITY = 0
SYSTEM_STREAMS = {"placement": 0, "server_bank": 1}
WD_STREAMS = {"channel": 0, "arrival": 1, "policy": 2, "bank": 3}
REPLICATE_ENTITY = 2**32 - 1


def stream_sequence(master_seed: int, entity: int, stream: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=master_seed, spawn_key=(entity, stream))


def stream_id(sequence: np.random.SeedSequence) -> int:
    """64-bit identifier of a stream, as recorded in the seed ledger."""
    return int(sequence.generate_state(1, np.uint64)[0])


def replicate_seeds(master_seed: int, count: int) -> list[int]:
    """Master seeds of the replicates of a sweep cell."""
    return [
        stream_id(stream_sequence(master_seed, REPLICATE_ENTITY, i)) for i in range(count)
    ]


@dataclass
class SeedLedger:
    """Named streams of one episode and their 64-bit identifiers.

    Attributes:
        master_seed: Root entropy.
        overrides: Entropy that replaces the derived sequence of named streams.
        streams: Stream name ("placement", "wd2.channel", ...) to identifier,
            filled as streams are handed out.
    """

    master_seed: int
    overrides: dict[str, int] = field(default_factory=dict)
    streams: dict[str, int] = field(default_factory=dict)

    def sequence(self, name: str) -> np.random.SeedSequence:
        if name in self.overrides:
            seq = np.random.SeedSequence(self.overrides[name])
        elif name in SYSTEM_STREAMS:
            seq = stream_sequence(self.master_seed, SYSTEM_ENTITY, SYSTEM_STREAMS[name])
        else:
            prefix, _, stream = name.partition(".")
            if not prefix.startswith("wd") or stream not in WD_STREAMS:
                raise KeyError(f"unknown random stream {name!r}")
            wd = int(prefix[2:])
            seq = stream_sequence(self.master_seed, wd + 1, WD_STREAMS[stream])
        self.streams[name] = stream_id(seq)
        return seq

    def generator(self, name: str) -> np.random.Generator:
        return np.random.default_rng(self.sequence(name))

    def integer_seed(self, name: str) -> int:
        """Plain integer seed for consumers that build their own generator."""
        self.sequence(name)
        return self.streams[name]

    def to_dict(self) -> dict:
        return {
            "master_seed": self.master_seed,
            "scheme": SEED_SCHEME,
            "overrides": dict(sorted(self.overrides.items())),
            "streams": dict(sorted(self.streams.items())),
        }
