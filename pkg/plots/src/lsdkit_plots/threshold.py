"""Failure-rate figures from sweep CSVs.

``threshold`` draws one curve per input file (log-log by default) with a
shaded confidence band: the likelihood-ratio band when the file carries the
extra columns, otherwise the Wilson interval.  ``mu_sweep`` plots the
failure rate against the reprocessing growth budget parsed from each file's
config echo, one curve per physical error rate.
"""

from __future__ import annotations

import argparse
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .io import SchemaError, SweepTable, read_sweep_csv

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


@dataclass
class PlotSpec:
    inputs: list[str]
    kind: str = "threshold"
    x_scale: str = "log"
    y_scale: str = "log"
    output: str = "threshold.png"
    title: str = ""


def _new_axes():
    fig, ax = plt.subplots(figsize=(5.2, 3.9), dpi=160)
    ax.grid(True, which="both", alpha=0.25, linewidth=0.5)
    return fig, ax


def _draw_threshold(ax, tables: list[SweepTable]) -> None:
    for i, table in enumerate(tables):
        color = COLORS[i % len(COLORS)]
        rows = sorted(table.rows, key=lambda r: r["p"])
        xs = [r["p"] for r in rows]
        ys = [r["p_l"] for r in rows]
        if table.has_lr_band:
            los = [r["lr_lo"] for r in rows]
            his = [r["lr_hi"] for r in rows]
        else:
            los = [r["ci_lo"] for r in rows]
            his = [r["ci_hi"] for r in rows]
        style = "o-" if len(xs) > 1 else "o"
        ax.plot(xs, ys, style, color=color, markersize=4, linewidth=1.2,
                label=table.label())
        ax.fill_between(xs, los, his, color=color, alpha=0.2, linewidth=0)
    ax.set_xlabel("physical error rate p")
    ax.set_ylabel("logical failure rate")
    ax.legend(fontsize=7)


def _mu_of(table: SweepTable) -> int:
    match = re.search(r"mu=(\d+)", table.config.get("decoder", ""))
    if not match:
        raise SchemaError(f"{table.path}: no mu=<n> in the decoder echo")
    return int(match.group(1))


def _draw_mu_sweep(ax, tables: list[SweepTable]) -> None:
    by_p: dict[float, list[tuple[int, float]]] = {}
    for table in tables:
        mu = _mu_of(table)
        for row in table.rows:
            by_p.setdefault(row["p"], []).append((mu, row["p_l"]))
    for i, (p, points) in enumerate(sorted(by_p.items())):
        points.sort()
        ax.plot([m for m, _ in points], [y for _, y in points], "o-",
                color=COLORS[i % len(COLORS)], markersize=4,
                label=f"p={p:g}")
    ax.set_xlabel("growth budget per cluster")
    ax.set_ylabel("logical failure rate")
    ax.legend(fontsize=7)


def plot_threshold(spec: PlotSpec) -> Path:
    tables = [read_sweep_csv(path) for path in spec.inputs]
    fig, ax = _new_axes()
    if spec.kind == "mu_sweep":
        _draw_mu_sweep(ax, tables)
        ax.set_xscale("linear")
        ax.set_yscale(spec.y_scale)
    else:
        _draw_threshold(ax, tables)
        ax.set_xscale(spec.x_scale)
        ax.set_yscale(spec.y_scale)
    if spec.title:
        ax.set_title(spec.title, fontsize=9)
    out = Path(spec.output)
    fig.savefig(out, metadata={"Software": "lsdkit-plots"})
    plt.close(fig)
    return out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="lsdkit-plot-threshold")
    parser.add_argument("inputs", nargs="+", help="sweep CSV files")
    parser.add_argument("--kind", default="threshold",
                        choices=("threshold", "mu_sweep"))
    parser.add_argument("--x-scale", default="log",
                        choices=("linear", "log"))
    parser.add_argument("--y-scale", default="log",
                        choices=("linear", "log"))
    parser.add_argument("--title", default="")
    parser.add_argument("-o", "--output", default="threshold.png")
    args = parser.parse_args(argv)
    spec = PlotSpec(inputs=args.inputs, kind=args.kind,
                    x_scale=args.x_scale, y_scale=args.y_scale,
                    output=args.output, title=args.title)
    try:
        out = plot_threshold(spec)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
