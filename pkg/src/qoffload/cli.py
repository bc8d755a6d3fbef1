import json
import sys
from collections.abc import Sequence
from contextlib import contextmanager
from pathlib import Path

import click
from rich.table import Table

from qoffload import (
    __version__,
    gradcheck,
    oracle_compare,
    plotdata,
    run,
    run_sweep,
)
from qoffload._harness import FIGURES, PLOT_HEADER, ExperimentConfig
from qoffload._util.cli_progress import RichProgressDisplay
from qoffload._util.constants import (
    DEFAULT_MOVING_AVERAGE_WINDOW,
    FINITE_DIFF_STEP,
    SUMMARY_FILE,
    SWEEP_FILE,
    SWEEP_SUMMARY_FILE,
    SYSTEM_TRACE_FILE,
    WD_TRACE_FILE,
)
from qoffload._util.errors import (
    LearnerDivergenceError,
    OracleConvergenceError,
    QoffloadError,
    VerificationError,
)
from qoffload._util.io import render_csv, write_json
from qoffload._util.timer import console, resource_stats, timer
from qoffload.codes import ExitCode, PolicyKind, SweepAxis

POLICY_CHOICES = [p.value for p in PolicyKind]


def print_banner():
    """Display the qoffload banner and version (terminal only)."""
    if sys.stdout.isatty():
        console.print(
            f"[bold cyan]qoffload[/bold cyan] [dim]· MEC offloading with parametric Q-learning"
            f" · v{__version__}[/dim]\n"
        )


@contextmanager
def command_guard(name: str, show_summary: bool = True):
    """Report a command's outcome: the summary panel, or the error and a failed panel."""
    resource_stats.reset()
    try:
        yield
    except Exception as exc:
        console.print(
            f"[bold red]Error:[/bold red] {name} failed with the following exception: {exc}"
        )
        console.print(resource_stats.get_summary_panel(success=False))
        raise
    if show_summary:
        console.print(resource_stats.get_summary_panel(success=True))


def parse_values(ctx, param, value: str | None) -> tuple[float, ...] | None:
    if value is None:
        return None
    try:
        return tuple(float(v) for v in value.split(",") if v.strip())
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got {value!r}")


def parse_policies(ctx, param, value: str | None) -> tuple[PolicyKind, ...] | None:
    if value is None:
        return None
    policies = []
    for token in value.split(","):
        token = token.strip()
        if token not in POLICY_CHOICES:
            raise click.BadParameter(
                f"unknown policy {token!r}; expected one of {', '.join(POLICY_CHOICES)}"
            )
        policies.append(PolicyKind(token))
    return tuple(policies)


@click.group(invoke_without_command=True)
@click.version_option(__version__, prog_name="qoffload")
@click.pass_context
def main(ctx):
    """The main entry point for the command line interface."""
    print_banner()

    # If no subcommand was provided, show help
    if ctx.invoked_subcommand is None:
        click.echo(ctx.get_help())


@main.command(name="run")
@click.option(
    "--config",
    "config_path",
    help="path to the ExperimentConfig JSON file",
    required=True,
    type=click.Path(exists=True, dir_okay=False),
)
@click.option("--policy", help="offloading policy of every device", type=click.Choice(POLICY_CHOICES))
@click.option("--seed", help="master seed (overrides the config)", type=click.IntRange(min=0))
@click.option("--blocks", help="number of blocks T (overrides the config)", type=click.IntRange(min=1))
@click.option("--out", help="output directory (overrides the config)")
def run_command(
    config_path: str,
    policy: str | None,
    seed: int | None,
    blocks: int | None,
    out: str | None,
):
    """
    Simulate one episode and write its traces.

    Writes wd_trace.csv, system_trace.csv and summary.json. A learner that
    diverges ends the trace early; the outputs are still written and the
    command exits with code 3.
    """
    with command_guard("run"):
        config = ExperimentConfig.from_json(config_path)
        changes: dict = {}
        if policy is not None:
            changes["policy"] = PolicyKind(policy)
        if seed is not None:
            changes["master_seed"] = seed
        if blocks is not None:
            changes["horizon_blocks"] = blocks
        if out is not None:
            changes["output_dir"] = out
        config = config.replace(**changes)
        output_dir = Path(config.output_dir)

        progress_display = RichProgressDisplay()
        with timer("Run", silent=True):
            with progress_display.progress_context(
                f"Simulating {config.horizon_blocks} blocks ({config.policy.value})"
            ):
                result = run(config, output_dir, progress_display.callback)
        for file_name in (WD_TRACE_FILE, SYSTEM_TRACE_FILE, SUMMARY_FILE):
            resource_stats.add_output_file(file_name, output_dir / file_name)

        table = Table(title="Episode")
        table.add_column("metric")
        table.add_column("value", justify="right")
        table.add_row("status", result.status.value)
        table.add_row("blocks", str(result.blocks))
        table.add_row("discounted sum", f"{result.discounted_sum:.6g}")
        table.add_row("tail bound", f"{result.tail_bound:.3g}")
        for name, converged_at in result.convergence().items():
            table.add_row(f"{name} converged after", "-" if converged_at is None else str(converged_at))
        console.print(table)
        if result.divergence is not None:
            raise result.divergence


@main.command(name="sweep")
@click.option(
    "--config",
    "config_path",
    help="path to the ExperimentConfig JSON file",
    required=True,
    type=click.Path(exists=True, dir_okay=False),
)
@click.option("--axis", help="swept parameter", type=click.Choice([a.value for a in SweepAxis]))
@click.option("--values", help="comma-separated axis values", callback=parse_values)
@click.option("--seeds", help="replicates per cell", type=click.IntRange(min=1))
@click.option("--policies", help="comma-separated policies to compare", callback=parse_policies)
@click.option("--seed", help="master seed (overrides the config)", type=click.IntRange(min=0))
@click.option("--blocks", help="number of blocks T per episode", type=click.IntRange(min=1))
@click.option("--jobs", help="worker threads for sweep cells", type=click.IntRange(min=1))
@click.option("--out", help="output directory (overrides the config)")
@click.pass_context
def sweep_cli(
    ctx,
    config_path: str,
    axis: str | None,
    values: tuple[float, ...] | None,
    seeds: int | None,
    policies: tuple[PolicyKind, ...] | None,
    seed: int | None,
    blocks: int | None,
    jobs: int | None,
    out: str | None,
):
    """
    Compare policies over arrival probabilities (b) or device counts (K).

    Writes sweep.csv (mean and std of the discounted sum per cell) and
    sweep_summary.json. Results do not depend on --jobs.
    """
    failed = 0
    with command_guard("sweep"):
        config = ExperimentConfig.from_json(config_path)
        overrides = {
            "sweep_axis": SweepAxis(axis) if axis is not None else None,
            "sweep_values": values,
            "num_seeds": seeds,
            "sweep_policies": policies,
            "master_seed": seed,
            "horizon_blocks": blocks,
            "jobs": jobs,
            "output_dir": out,
        }
        config = config.replace(**{k: v for k, v in overrides.items() if v is not None})
        output_dir = Path(config.output_dir)

        progress_display = RichProgressDisplay()
        with timer("Sweep", silent=True):
            with progress_display.progress_context(
                f"Sweeping {config.sweep_axis.value} over {len(config.sweep_values)} values"
            ):
                result = run_sweep(config, output_dir, progress_display.callback)
        for file_name in (SWEEP_FILE, SWEEP_SUMMARY_FILE):
            resource_stats.add_output_file(file_name, output_dir / file_name)

        table = Table(title=f"Discounted sum vs {config.sweep_axis.value}")
        for column in ("value", "policy", "mean", "std", "failed"):
            table.add_column(column)
        for row in result.rows:
            table.add_row(
                f"{row.value:g}", row.policy.value, f"{row.mean:.6g}", f"{row.std:.3g}", str(row.num_failed)
            )
        console.print(table)
        failed = result.num_failed
        if failed:
            console.print(f"[bold yellow]Warning:[/bold yellow] {failed} episode(s) failed")
    if failed:
        ctx.exit(ExitCode.LEARNER_DIVERGENCE)


@main.command(name="gradcheck")
@click.option("--trials", help="random instances per gradient", default=100, type=click.IntRange(min=1))
@click.option("--seed", help="seed of the instance generator", default=0, type=click.IntRange(min=0))
@click.option("--h_fd", help="finite-difference step", default=FINITE_DIFF_STEP, type=float)
@click.option("--out", help="path of the JSON report", default="gradcheck.json")
def gradcheck_cli(trials: int, seed: int, h_fd: float, out: str):
    """
    Check the analytic gradients against central finite differences.

    Exits with code 2 when any maximum relative error exceeds 1e-5.
    """
    with command_guard("gradcheck"):
        progress_display = RichProgressDisplay()
        with timer("Gradient check", silent=True):
            with progress_display.progress_context("Checking gradients"):
                report = gradcheck(
                    trials=trials, seed=seed, h_fd=h_fd, callback=progress_display.callback
                )
        write_json(out, report.to_dict())
        resource_stats.add_output_file("Gradient check report", out)

        table = Table(title=f"Gradient check ({trials} trials)")
        table.add_column("gradient")
        table.add_column("max rel. error", justify="right")
        for target, error in report.max_errors.items():
            table.add_row(target, f"{error:.3e}")
        console.print(table)
        if not report.passed:
            raise VerificationError(
                f"max relative error {max(report.max_errors.values()):.3e}"
                f" exceeds {report.tolerance:.0e}"
            )


@main.command(name="oracle-compare")
@click.option("--seeds", help="number of training seeds", default=10, type=click.IntRange(min=1))
@click.option("--seed", help="master seed", default=0, type=click.IntRange(min=0))
@click.option("--blocks", help="training blocks per seed", default=2000, type=click.IntRange(min=1))
@click.option("--out", help="path of the JSON report", default="oracle_compare.json")
def oracle_compare_cli(seeds: int, seed: int, blocks: int, out: str):
    """
    Compare the learned device policy with value iteration on a tiny MDP.

    Exits with code 2 when the learned policy costs more than 15% above the
    optimum or training fails to lower the Bellman residual on 90% of seeds.
    """
    with command_guard("oracle-compare"):
        progress_display = RichProgressDisplay()
        with timer("Oracle comparison", silent=True):
            with progress_display.progress_context("Comparing with the value-iteration oracle"):
                try:
                    report = oracle_compare(
                        num_seeds=seeds,
                        master_seed=seed,
                        blocks=blocks,
                        callback=progress_display.callback,
                    )
                except OracleConvergenceError as exc:
                    raise VerificationError(str(exc))
        write_json(out, report.to_dict())
        resource_stats.add_output_file("Oracle comparison report", out)

        table = Table(title="Tiny-MDP oracle")
        table.add_column("metric")
        table.add_column("value", justify="right")
        table.add_row("oracle cost", f"{report.oracle_cost:.6g}")
        table.add_row("learned cost", f"{report.learned_cost:.6g}")
        table.add_row("cost gap", f"{report.cost_gap:.2%}")
        table.add_row("greedy-Q cost", f"{report.greedy_cost:.6g}")
        table.add_row("residual improved", f"{report.improved_seeds}/{len(report.results)}")
        console.print(table)
        if not report.passed:
            raise VerificationError(
                f"cost gap {report.cost_gap:.2%}, residual improved on"
                f" {report.improved_seeds}/{len(report.results)} seeds"
            )


@main.command(name="plotdata")
@click.option(
    "--trace",
    "traces",
    help="run trace or sweep table (repeatable)",
    required=True,
    multiple=True,
    type=click.Path(exists=True, dir_okay=False),
)
@click.option("--figure", help="figure to extract", required=True, type=click.Choice(list(FIGURES)))
@click.option("--out", help="CSV receiving the series (stdout if omitted)")
@click.option(
    "--window", help="moving-average window of per-block", default=DEFAULT_MOVING_AVERAGE_WINDOW,
    type=click.IntRange(min=1),
)
def plotdata_cli(traces: tuple[str, ...], figure: str, out: str | None, window: int):
    """
    Emit (series, x, y) plot series from traces or sweep tables.

    conv: relative parameter change per learner; per-block: total cost per
    block with its moving average; vs-b / vs-K: mean discounted sum per policy.
    """
    with command_guard("plotdata", show_summary=out is not None):
        points = plotdata(list(traces), figure, out, window)
        if out is None:
            click.echo(render_csv(PLOT_HEADER, points), nl=False)
        else:
            resource_stats.add_output_file("Plot series", out)


def dispatch(argv: Sequence[str] | None = None) -> int:
    """Run the command line and translate its outcome into an `ExitCode`."""
    try:
        code = main.main(
            args=list(argv) if argv is not None else None,
            prog_name="qoffload",
            standalone_mode=False,
        )
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.ClickException as exc:
        console.print(f"[bold red]Error:[/bold red] {exc.format_message()}")
        return ExitCode.USAGE_ERROR
    except click.Abort:
        return ExitCode.USAGE_ERROR
    except (VerificationError, OracleConvergenceError):
        return ExitCode.VERIFICATION_FAILURE
    except LearnerDivergenceError:
        return ExitCode.LEARNER_DIVERGENCE
    except (QoffloadError, ValueError, OSError, json.JSONDecodeError):
        return ExitCode.USAGE_ERROR
    return int(code) if isinstance(code, int) else ExitCode.SUCCESS


def run_cli() -> None:
    sys.exit(dispatch())
