import math
from dataclasses import dataclass

import numpy as np

from qoffload._env_model.config import SystemConfig
from qoffload._util.errors import ConfigurationError


@dataclass(frozen=True, eq=False)
class Topology:
    """Device distances to the base station and their shadowing factors."""

    distances_m: np.ndarray
    shadow_factors: np.ndarray

    @property
    def num_wds(self) -> int:
        return int(self.distances_m.shape[0])


def sample_arrivals(rng: np.random.Generator, arrival_prob: float, num_slots: int) -> np.ndarray:
    """Bernoulli task arrivals for the slots of one block.

    One uniform draw per slot compared against `arrival_prob`, so runs that
    differ only in the probability see coupled arrival patterns.
    """
    if not 0.0 <= arrival_prob < 1.0:
        raise ConfigurationError(f"arrival probability must lie in [0, 1), got {arrival_prob}")
    return (rng.random(num_slots) < arrival_prob).astype(np.float64)


def pathloss_db(distance_m: float, config: SystemConfig) -> float:
    if not distance_m > 0.0:
        raise ConfigurationError(f"distance must be positive, got {distance_m}")
    a, b = config.pathloss
    return a + b * math.log10(distance_m)


def noise_power(config: SystemConfig, wd: int = 0) -> float:
    """Total noise power in watts over the device bandwidth."""
    density_w_per_hz = 10.0 ** ((config.noise_dbm_per_hz - 30.0) / 10.0)
    return density_w_per_hz * config.wd_params(wd).bandwidth_hz


def mean_channel_gain(
    distance_m: float,
    config: SystemConfig,
    shadow_factor: float = 1.0,
    wd: int = 0,
) -> float:
    """Large-scale gain with noise folded in so the rate formula uses unit noise."""
    return 10.0 ** (-pathloss_db(distance_m, config) / 10.0) * shadow_factor / noise_power(
        config, wd
    )


def sample_channel(
    rng: np.random.Generator,
    distance_m: float,
    config: SystemConfig,
    shadow_factor: float = 1.0,
    wd: int = 0,
) -> float:
    """Rayleigh block-fading power gain, exponential around the large-scale mean."""
    mean_gain = mean_channel_gain(distance_m, config, shadow_factor, wd)
    return mean_gain * float(rng.exponential(1.0))


def place_wds(rng: np.random.Generator, config: SystemConfig) -> Topology:
    """Drop devices uniformly over the annulus [min_distance_m, cell_radius_m].

    Each device also gets a log-normal shadow factor, fixed for the episode.
    Draws are taken device by device, so device k lands in the same spot
    whatever the number of devices.
    """
    r_min2 = config.min_distance_m**2
    r_max2 = config.cell_radius_m**2
    u = np.empty(config.num_wds)
    z = np.empty(config.num_wds)
    for k in range(config.num_wds):
        u[k] = rng.random()
        z[k] = rng.standard_normal()
    distances = np.sqrt(r_min2 + u * (r_max2 - r_min2))
    shadow_db = config.shadow_std_db * z
    return Topology(distances_m=distances, shadow_factors=10.0 ** (shadow_db / 10.0))
