"""Figure rendering from written CSV files.

Plots are a pure post-processing step: they read the delimited output back
from disk and never touch in-memory results, so emitting a figure cannot
change what was recorded.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["read_trajectories_csv", "plot_trajectories", "plot_comparison", "plot_recursion"]


def read_trajectories_csv(path: str | Path) -> dict[int, dict[str, np.ndarray]]:
    """Load a trajectory CSV into {seed: {column: values}}."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    data = np.atleast_1d(data)
    out: dict[int, dict[str, np.ndarray]] = {}
    seeds = data["seed"].astype(int)
    for seed in np.unique(seeds):
        rows = data[seeds == seed]
        out[int(seed)] = {name: rows[name] for name in data.dtype.names}
    return out


def _style(ax, title: str) -> None:
    ax.set_xlabel("iteration t")
    ax.set_ylabel(r"correlation $m_t$")
    ax.set_ylim(-1.05, 1.05)
    ax.axhline(0.0, color="0.85", lw=0.8, zorder=0)
    ax.set_title(title)


def plot_trajectories(csv_path: str | Path, out_path: str | Path, title: str = "") -> None:
    """One faint line per seed plus the pointwise median of m_t."""
    per_seed = read_trajectories_csv(csv_path)
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    stacks = []
    for seed, cols in sorted(per_seed.items()):
        ax.plot(cols["t"], cols["m_t"], color="tab:blue", alpha=0.25, lw=0.8)
        stacks.append(cols["m_t"])
    lengths = {len(s) for s in stacks}
    if len(lengths) == 1 and len(stacks) > 1:
        t = next(iter(per_seed.values()))["t"]
        ax.plot(t, np.median(stacks, axis=0), color="tab:blue", lw=2.0, label="median")
        ax.legend(frameon=False)
    _style(ax, title)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


def plot_comparison(
    csv_paths: list[str | Path], labels: list[str], out_path: str | Path, title: str = ""
) -> None:
    """Overlay the per-variant seed medians (seed lines faint, colored per variant)."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    for k, (path, label) in enumerate(zip(csv_paths, labels)):
        per_seed = read_trajectories_csv(path)
        color = colors[k % len(colors)]
        stacks = []
        for seed, cols in sorted(per_seed.items()):
            ax.plot(cols["t"], cols["m_t"], color=color, alpha=0.15, lw=0.7)
            stacks.append(cols["m_t"])
        if len({len(s) for s in stacks}) == 1:
            t = next(iter(per_seed.values()))["t"]
            ax.plot(t, np.median(stacks, axis=0), color=color, lw=2.0, label=label)
    ax.legend(frameon=False)
    _style(ax, title)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


def plot_recursion(
    times: np.ndarray, values: np.ndarray, out_path: str | Path, title: str = "population recursion"
) -> None:
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.plot(times, values, color="tab:red", lw=1.5)
    _style(ax, title)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
