#!/usr/bin/env python3
"""
Render `qoffload plotdata` series files as PNG figures.

One figure per input file, one line per series. The figure kind is guessed
from the series names: learner names (wd0, server) give the convergence plot
on a log axis, cost/cost_maN the per-block cost, policy names the sweep plot.
"""

import csv
import os
from collections import defaultdict

import click
import matplotlib.pyplot as plt

POLICIES = ("proposed", "binary", "even", "random")
POLICY_STYLES = {
    "proposed": {"color": "#0064BF", "marker": "o"},
    "binary": {"color": "#D4AF6A", "marker": "s"},
    "even": {"color": "#3D9C93", "marker": "^"},
    "random": {"color": "#8B7D6B", "marker": "x"},
}


def read_series(path):
    series = defaultdict(lambda: ([], []))
    with open(path, encoding="utf-8", newline="") as handle:
        rows = (line for line in handle if not line.startswith("#"))
        for row in csv.DictReader(rows):
            xs, ys = series[row["series"]]
            xs.append(float(row["x"]))
            ys.append(float(row["y"]))
    return dict(series)


def plot_convergence(ax, series):
    for name, (xs, ys) in series.items():
        ax.plot(xs, ys, label=name, linewidth=1.2 if name == "server" else 0.8)
    ax.set_yscale("log")
    ax.set_xlabel("block")
    ax.set_ylabel("relative parameter change")


def plot_per_block(ax, series):
    for name, (xs, ys) in series.items():
        if name == "cost":
            ax.plot(xs, ys, color="#B8956E", alpha=0.4, linewidth=0.6, label="per block")
        else:
            ax.plot(xs, ys, color="#0064BF", linewidth=1.5, label=f"moving average ({name[7:]})")
    ax.set_xlabel("block")
    ax.set_ylabel("weighted cost")


def plot_sweep(ax, series, axis_label):
    for name, (xs, ys) in series.items():
        ax.plot(xs, ys, label=name, **POLICY_STYLES.get(name, {}))
    ax.set_xlabel(axis_label)
    ax.set_ylabel("discounted sum cost")


def render(path, output_dir):
    series = read_series(path)
    if not series:
        click.echo(f"{path}: no series, skipped")
        return None
    names = set(series)
    _, ax = plt.subplots(figsize=(7, 4.5))
    if names <= set(POLICIES):
        xs = next(iter(series.values()))[0]
        whole = all(x == int(x) for x in xs)
        plot_sweep(ax, series, "number of devices K" if whole else "task arrival probability b")
    elif "cost" in names:
        plot_per_block(ax, series)
    else:
        plot_convergence(ax, series)
    ax.grid(True, alpha=0.3)
    ax.legend()
    stem = os.path.splitext(os.path.basename(path))[0]
    output_path = os.path.join(output_dir, f"{stem}.png")
    plt.tight_layout()
    plt.savefig(output_path, dpi=150)
    plt.close()
    return output_path


@click.command()
@click.argument("series_files", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "output_dir", default="docs/img", help="directory receiving the PNG files")
def main(series_files, output_dir):
    os.makedirs(output_dir, exist_ok=True)
    for path in series_files:
        written = render(path, output_dir)
        if written is not None:
            click.echo(written)


if __name__ == "__main__":
    main()
