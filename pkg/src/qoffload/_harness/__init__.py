from .config import ExperimentConfig
from .episode import EpisodeResult, run_episode
from .metrics import BlockMetrics, discounted_sum, moving_average, tail_bound
from .outputs import (
    FIGURES,
    PLOT_HEADER,
    plot_series,
    write_episode_outputs,
    write_plot_series,
    write_sweep_outputs,
)
from .seeds import SeedLedger, replicate_seeds
from .sweep import EpisodeOutcome, SweepResult, SweepRow, cell_config, sweep

__all__ = [
    "FIGURES",
    "PLOT_HEADER",
    "BlockMetrics",
    "EpisodeOutcome",
    "EpisodeResult",
    "ExperimentConfig",
    "SeedLedger",
    "SweepResult",
    "SweepRow",
    "cell_config",
    "discounted_sum",
    "moving_average",
    "plot_series",
    "replicate_seeds",
    "run_episode",
    "sweep",
    "tail_bound",
    "write_episode_outputs",
    "write_plot_series",
    "write_sweep_outputs",
]
