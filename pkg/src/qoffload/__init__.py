"""
qoffload - Multiuser mobile-edge-computing simulator with decentralized
parametric Q-learning for DNN task offloading.

- run: Simulate one episode and write its traces
- run_sweep: Compare policies over arrival probabilities or device counts
- plotdata: Turn traces and sweep tables into plot series
- gradcheck: Finite-difference check of the learners' gradients
- oracle_compare: Learned versus optimal policy on a tiny exact MDP
"""

from pathlib import Path

from qoffload._diagnostics import (
    GradcheckReport,
    OracleCompareReport,
    exp_integral_e1,
    gradcheck,
    oracle_compare,
    prop1_bound,
)
from qoffload._env_model import ServerState, SystemConfig, WdAction, WdState
from qoffload._harness import (
    EpisodeResult,
    ExperimentConfig,
    SweepResult,
    discounted_sum,
    plot_series,
    run_episode,
    sweep,
    write_episode_outputs,
    write_plot_series,
    write_sweep_outputs,
)
from qoffload._util.constants import DEFAULT_MOVING_AVERAGE_WINDOW
from qoffload._util.progress import ProgressCallback
from qoffload.codes import ExitCode, PolicyKind, QueueMode, ServerMode, SweepAxis

__version__ = "0.1.0"


def run(
    config: ExperimentConfig,
    output_dir: str | Path | None = None,
    progress_callback: ProgressCallback | None = None,
) -> EpisodeResult:
    """
    Simulate one episode of the MEC system.

    Every device runs `config.policy`, the server runs its learner (or a
    fixed rate) one block behind the devices.

    Args:
        config: Experiment to run.
        output_dir: Directory for wd_trace.csv, system_trace.csv and
            summary.json. If None, nothing is written.
        progress_callback: Optional callback for progress reporting.

    Returns:
        The episode trace. A diverged learner ends the trace early with
        status `diverged` instead of raising.
    """
    result = run_episode(config, progress_callback)
    if output_dir is not None:
        write_episode_outputs(result, output_dir)
    return result


def run_sweep(
    config: ExperimentConfig,
    output_dir: str | Path | None = None,
    progress_callback: ProgressCallback | None = None,
) -> SweepResult:
    """
    Run every (axis value, policy, seed) episode of a sweep.

    Args:
        config: Experiment whose `sweep_axis`, `sweep_values`,
            `sweep_policies` and `num_seeds` define the grid.
        output_dir: Directory for sweep.csv and sweep_summary.json.
            If None, nothing is written.
        progress_callback: Optional callback for progress reporting.
    """
    result = sweep(config, progress_callback)
    if output_dir is not None:
        write_sweep_outputs(result, output_dir)
    return result


def plotdata(
    trace_paths: list[str | Path],
    figure: str,
    output_path: str | Path | None = None,
    window: int = DEFAULT_MOVING_AVERAGE_WINDOW,
) -> list[tuple[str, float | int, float]]:
    """
    Extract the (series, x, y) points of one figure.

    Args:
        trace_paths: Run traces (figures conv, per-block) or sweep tables
            (figures vs-b, vs-K).
        figure: One of conv, per-block, vs-b, vs-K.
        output_path: CSV receiving the series. If None, nothing is written.
        window: Moving-average window of the per-block figure.
    """
    points = plot_series(trace_paths, figure, window)
    if output_path is not None:
        write_plot_series(points, output_path)
    return points


__all__ = [
    # Core functions
    "run",
    "run_sweep",
    "plotdata",
    "gradcheck",
    "oracle_compare",
    "run_episode",
    "sweep",
    "discounted_sum",
    "exp_integral_e1",
    "prop1_bound",
    # Configuration and state
    "ExperimentConfig",
    "SystemConfig",
    "WdState",
    "WdAction",
    "ServerState",
    # Results
    "EpisodeResult",
    "SweepResult",
    "GradcheckReport",
    "OracleCompareReport",
    # Enums
    "ExitCode",
    "PolicyKind",
    "QueueMode",
    "ServerMode",
    "SweepAxis",
    # Types
    "ProgressCallback",
]
