"""Cluster-statistics figures from per-shot JSONL streams.

Draws violin distributions of cluster count, maximum cluster size, and mean
cluster size per physical error rate, side by side for the decoder's
clusters and for the components of the sampled error, with the tree-graph
mean-size curve overlaid when a vertex degree is supplied.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .bethe import bethe_avg_cluster
from .io import SchemaError, ShotSample, read_shot_jsonl

DECODER_COLOR = "#1f77b4"
OPTIMAL_COLOR = "#e6b800"


@dataclass
class PlotSpec:
    inputs: list[str]
    theta: float | None = None
    output: str = "cluster_stats.png"
    title: str = ""


def _safe_violin(ax, values, position, color) -> None:
    values = np.asarray(values, dtype=float)
    if len(values) == 0:
        return
    if np.ptp(values) == 0.0:
        # Degenerate distribution: a flat marker instead of a kernel shape.
        ax.hlines(values[0], position - 0.12, position + 0.12,
                  color=color, linewidth=2.0)
    else:
        parts = ax.violinplot([values], positions=[position], widths=0.28,
                              showextrema=False)
        for body in parts["bodies"]:
            body.set_facecolor(color)
            body.set_alpha(0.45)
            body.set_linewidth(0)
    ax.plot([position], [values.mean()], "o", color=color, markersize=3.5)


def plot_cluster_stats(spec: PlotSpec) -> Path:
    samples: list[ShotSample] = []
    for path in spec.inputs:
        samples.extend(read_shot_jsonl(path).samples)
    grid = sorted({s.p for s in samples})

    fig, axes = plt.subplots(1, 3, figsize=(9.6, 3.4), dpi=160)
    panels = (
        ("cluster count", lambda s: s.nu, lambda s: s.optimal_nu),
        ("max cluster size", lambda s: s.kappa, lambda s: s.optimal_kappa),
        ("mean cluster size", lambda s: s.kappa_alpha,
         lambda s: s.optimal_kappa_alpha),
    )
    for ax, (label, dec_of, opt_of) in zip(axes, panels):
        for idx, p in enumerate(grid):
            here = [s for s in samples if s.p == p]
            decoded = [dec_of(s) for s in here if s.nu > 0]
            optimal = [opt_of(s) for s in here if s.optimal_nu > 0]
            _safe_violin(ax, decoded, idx - 0.17, DECODER_COLOR)
            _safe_violin(ax, optimal, idx + 0.17, OPTIMAL_COLOR)
        ax.set_xticks(range(len(grid)))
        ax.set_xticklabels([f"{p:g}" for p in grid], fontsize=7)
        ax.set_xlabel("physical error rate p")
        ax.set_ylabel(label)
        ax.grid(True, alpha=0.25, linewidth=0.5)
    if spec.theta is not None:
        ps = np.linspace(min(grid), max(grid), 64)
        curve = [bethe_avg_cluster(p, spec.theta) for p in ps]
        positions = np.interp(ps, grid, range(len(grid))) if len(grid) > 1 \
            else np.zeros_like(ps)
        axes[2].plot(positions, curve, "--", color="k", linewidth=1.0,
                     label=f"tree bound, degree {spec.theta:g}")
        axes[2].legend(fontsize=7)
    handles = [plt.Line2D([], [], color=DECODER_COLOR, marker="o",
                          linestyle="", label="decoder clusters"),
               plt.Line2D([], [], color=OPTIMAL_COLOR, marker="o",
                          linestyle="", label="error components")]
    axes[0].legend(handles=handles, fontsize=7)
    if spec.title:
        fig.suptitle(spec.title, fontsize=9)
    fig.tight_layout()
    out = Path(spec.output)
    fig.savefig(out, metadata={"Software": "lsdkit-plots"})
    plt.close(fig)
    return out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="lsdkit-plot-clusters")
    parser.add_argument("inputs", nargs="+", help="per-shot JSONL streams")
    parser.add_argument("--theta", type=float, default=None,
                        help="fault-graph degree for the tree-bound overlay")
    parser.add_argument("--title", default="")
    parser.add_argument("-o", "--output", default="cluster_stats.png")
    args = parser.parse_args(argv)
    spec = PlotSpec(inputs=args.inputs, theta=args.theta,
                    output=args.output, title=args.title)
    try:
        out = plot_cluster_stats(spec)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
