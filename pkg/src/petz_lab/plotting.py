"""Static figures for the CLI reports, written next to the CSV files.

Only the non-interactive Agg/SVG path of matplotlib is used.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

golden_mean = (np.sqrt(5) - 1.0) / 2.0
fig_width = 5.0

params = {
    "axes.labelsize": 10,
    "font.size": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 9,
    "ytick.labelsize": 9,
    "figure.figsize": [fig_width, fig_width * golden_mean],
    "lines.linewidth": 1.2,
    "lines.markersize": 3,
    "svg.hashsalt": "petz-lab",
    "svg.fonttype": "none",
}

LINESTYLES = {"identity": ":", "petz_optimal": "-", "maximally_mixed": "-."}


def savefig(fig, filename) -> Path:
    """Write ``fig`` (format from the suffix) and close it."""
    filename = Path(filename)
    fig.savefig(filename, bbox_inches="tight", pad_inches=0.05, metadata={"Date": None})
    plt.close(fig)
    return filename


def plot_sweep(sweep, filename, title: str = ""):
    """Mean fidelity against q, one curve per p, best q marked."""
    with plt.rc_context(params):
        fig, ax = plt.subplots()
        cmap = plt.get_cmap("viridis")
        n = len(sweep.p_grid)
        for i, p in enumerate(sweep.p_grid):
            color = cmap(i / max(n - 1, 1))
            ax.errorbar(sweep.q_grid, sweep.mean[i], yerr=sweep.variance[i], color=color,
                        lw=0.8, elinewidth=0.5, label=f"p={p:g}" if i % 5 == 0 else None)
            j = sweep.q_star_index[i]
            ax.plot(sweep.q_grid[j], sweep.mean[i, j], "o", color="k")
        ax.set_xlabel("reference parameter q")
        ax.set_ylabel("average fidelity")
        if title:
            ax.set_title(title)
        ax.legend(loc="best")
        return savefig(fig, filename)


def plot_strategies(rows: Sequence, filename, title: str = ""):
    """Average fidelity against p for each recovery strategy."""
    with plt.rc_context(params):
        fig, ax = plt.subplots()
        for name, ls in LINESTYLES.items():
            sel = [r for r in rows if r.strategy == name]
            if not sel:
                continue
            ax.errorbar([r.p for r in sel], [r.estimate.mean for r in sel],
                        yerr=[r.estimate.variance for r in sel], ls=ls, label=name.replace("_", " "))
        ax.set_xlabel("noise strength p")
        ax.set_ylabel("average fidelity")
        if title:
            ax.set_title(title)
        ax.legend(loc="best")
        return savefig(fig, filename)


def plot_trajectories(curves: Mapping[str, tuple[Sequence[float], Sequence[float]]], filename,
                      ylabel: str, title: str = ""):
    """Line plot of one or more ``label -> (omega t, value)`` series."""
    with plt.rc_context(params):
        fig, ax = plt.subplots()
        styles = ["--", "-", ":", "-."]
        for k, (label, (t, v)) in enumerate(curves.items()):
            ax.plot(t, v, styles[k % len(styles)], label=label)
        ax.set_xlabel(r"$\omega t$ (rad)")
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        ax.legend(loc="best")
        return savefig(fig, filename)
