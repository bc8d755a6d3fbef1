"""CSV / JSON artifacts of runs and sweeps, and the plot series derived from them."""

import json
from pathlib import Path

from qoffload._harness.episode import EpisodeResult
from qoffload._harness.metrics import moving_average
from qoffload._harness.sweep import SweepResult
from qoffload._util.constants import (
    DEFAULT_MOVING_AVERAGE_WINDOW,
    SUMMARY_FILE,
    SWEEP_FILE,
    SWEEP_HEADER,
    SWEEP_SUMMARY_FILE,
    SYSTEM_TRACE_FILE,
    SYSTEM_TRACE_HEADER,
    WD_TRACE_FILE,
    WD_TRACE_HEADER,
)
from qoffload._util.errors import ConfigurationError
from qoffload._util.io import read_csv, write_csv, write_json

PLOT_HEADER = ("series", "x", "y")
FIGURES = ("conv", "per-block", "vs-b", "vs-K")


def echo_comments(config: dict, seeds: dict | None = None) -> list[str]:
    """Header comment lines carrying the config echo and the seed ledger."""
    lines = [f"config: {json.dumps(config, sort_keys=True)}"]
    if seeds is not None:
        lines.append(f"seeds: {json.dumps(seeds, sort_keys=True)}")
    return lines


def write_episode_outputs(result: EpisodeResult, output_dir: str | Path) -> dict[str, Path]:
    output_dir = Path(output_dir)
    comments = echo_comments(result.config.to_dict(), result.ledger.to_dict())
    wd_rows = [row for m in result.metrics for row in m.wd_rows()]
    system_rows = [m.system_row() for m in result.metrics]
    return {
        "wd_trace": write_csv(output_dir / WD_TRACE_FILE, WD_TRACE_HEADER, wd_rows, comments),
        "system_trace": write_csv(
            output_dir / SYSTEM_TRACE_FILE, SYSTEM_TRACE_HEADER, system_rows, comments
        ),
        "summary": write_json(output_dir / SUMMARY_FILE, result.summary()),
    }


def write_sweep_outputs(result: SweepResult, output_dir: str | Path) -> dict[str, Path]:
    output_dir = Path(output_dir)
    comments = echo_comments(
        result.config.to_dict(), {"replicate_seeds": result.seeds}
    )
    rows = [row.csv_row() for row in result.rows]
    return {
        "sweep": write_csv(output_dir / SWEEP_FILE, SWEEP_HEADER, rows, comments),
        "sweep_summary": write_json(output_dir / SWEEP_SUMMARY_FILE, result.summary()),
    }


def _require(columns: set[str], header: tuple[str, ...], path: Path, figure: str) -> None:
    missing = [name for name in header if name not in columns]
    if missing:
        raise ConfigurationError(f"{path} has no column {missing[0]!r} needed by figure {figure}")


def plot_series(
    trace_paths, figure: str, window: int = DEFAULT_MOVING_AVERAGE_WINDOW
) -> list[tuple[str, float | int, float]]:
    """(series, x, y) points of one figure, read from run or sweep CSVs.

    conv: per-learner relative parameter change by block (device and/or
    system traces). per-block: total cost by block, raw and moving average
    (system trace). vs-b / vs-K: mean discounted sum by axis value, one series
    per policy (sweep table).
    """
    if figure not in FIGURES:
        raise ConfigurationError(f"unknown figure {figure!r}; expected one of {', '.join(FIGURES)}")
    points: list[tuple[str, float | int, float]] = []
    for path in map(Path, trace_paths):
        _, rows = read_csv(path)
        columns = set(rows[0]) if rows else set()
        match figure:
            case "conv":
                if "wd_id" in columns:
                    for row in rows:
                        points.append(
                            (f"wd{row['wd_id']}", int(row["block"]), float(row["theta_rel_change"]))
                        )
                else:
                    _require(columns, ("block", "eta_rel_change"), path, figure)
                    for row in rows:
                        points.append(("server", int(row["block"]), float(row["eta_rel_change"])))
            case "per-block":
                _require(columns, ("block", "cost_total"), path, figure)
                blocks = [int(row["block"]) for row in rows]
                costs = [float(row["cost_total"]) for row in rows]
                points.extend(("cost", b, c) for b, c in zip(blocks, costs))
                smoothed = moving_average(costs, window)
                points.extend((f"cost_ma{window}", b, float(c)) for b, c in zip(blocks, smoothed))
            case "vs-b" | "vs-K":
                _require(columns, SWEEP_HEADER, path, figure)
                axis = figure.removeprefix("vs-")
                for row in rows:
                    if row["axis"] != axis:
                        raise ConfigurationError(
                            f"{path} sweeps {row['axis']!r}, figure {figure} needs {axis!r}"
                        )
                    points.append((row["policy"], float(row["value"]), float(row["mean"])))
    # group by series, keep file order within a series
    order: dict[str, int] = {}
    for name, _, _ in points:
        order.setdefault(name, len(order))
    return sorted(points, key=lambda p: order[p[0]])


def write_plot_series(points, path: str | Path) -> Path:
    return write_csv(path, PLOT_HEADER, points)
