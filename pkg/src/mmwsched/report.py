"""Figure rendering for comparison sweeps.

The compare command writes one CSV of per-(seed, algorithm) results; this
module renders the companion figures next to it.  Headless matplotlib
only; every function returns the list of files it wrote.
"""

from __future__ import annotations

import os
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

FIG_DPI = 150


def _style():
    plt.rcParams.update(
        {
            "figure.figsize": (7.0, 4.2),
            "axes.grid": True,
            "grid.alpha": 0.3,
            "axes.spines.top": False,
            "axes.spines.right": False,
            "legend.frameon": False,
        }
    )


def save_compare_figures(rows: Sequence[dict], out_dir: str) -> list:
    """Render throughput-by-seed and oracle-ratio figures for compare rows.

    Each row carries seed, algo, theta, network_tput, theta_over_oracle,
    runtime_ms (ratio may be None when the oracle was out of reach).
    """
    _style()
    os.makedirs(out_dir, exist_ok=True)
    algos = sorted({r["algo"] for r in rows})
    seeds = sorted({r["seed"] for r in rows})
    by_algo = {
        a: {r["seed"]: r for r in rows if r["algo"] == a} for a in algos
    }
    written = []

    fig, ax = plt.subplots()
    for a in algos:
        ys = [by_algo[a][s]["theta"] if s in by_algo[a] else None for s in seeds]
        ax.plot(seeds, ys, marker="o", label=a)
    ax.set_xlabel("seed")
    ax.set_ylabel("max-min throughput (Gbps)")
    ax.set_title("Max-min throughput by seed")
    ax.legend()
    path = os.path.join(out_dir, "theta_by_seed.png")
    fig.savefig(path, dpi=FIG_DPI, bbox_inches="tight")
    plt.close(fig)
    written.append(path)

    ratio_rows = [r for r in rows if r.get("theta_over_oracle") is not None]
    if ratio_rows:
        fig, ax = plt.subplots()
        for a in algos:
            pts = [
                (r["seed"], r["theta_over_oracle"])
                for r in ratio_rows
                if r["algo"] == a
            ]
            if pts:
                xs, ys = zip(*sorted(pts))
                ax.plot(xs, ys, marker="s", label=a)
        ax.axhline(1.0, color="black", linewidth=0.8, linestyle="--")
        ax.set_xlabel("seed")
        ax.set_ylabel("theta / oracle theta*")
        ax.set_title("Achieved fraction of the optimum")
        ax.legend()
        path = os.path.join(out_dir, "theta_over_oracle.png")
        fig.savefig(path, dpi=FIG_DPI, bbox_inches="tight")
        plt.close(fig)
        written.append(path)

    fig, ax = plt.subplots()
    width = 0.8 / max(1, len(algos))
    for k, a in enumerate(algos):
        xs = [i + k * width for i in range(len(seeds))]
        ys = [
            by_algo[a][s]["runtime_ms"] if s in by_algo[a] else 0 for s in seeds
        ]
        ax.bar(xs, ys, width=width, label=a)
    ax.set_xticks([i + 0.4 - width / 2 for i in range(len(seeds))])
    ax.set_xticklabels([str(s) for s in seeds])
    ax.set_xlabel("seed")
    ax.set_ylabel("runtime (ms)")
    ax.set_title("Solver runtime")
    ax.legend()
    path = os.path.join(out_dir, "runtime_ms.png")
    fig.savefig(path, dpi=FIG_DPI, bbox_inches="tight")
    plt.close(fig)
    written.append(path)
    return written
