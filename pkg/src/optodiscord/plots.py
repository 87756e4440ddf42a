"""Static SVG figures for the CLI report path.

Figures are write-only artifacts rendered next to the delimited output.
The SVG output is byte-deterministic: the Agg backend is forced, element
ids are salted with a fixed string, and no creation date is embedded.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .dynamics import Trajectory
from .protocol import SweepResult

matplotlib.rcParams["svg.hashsalt"] = "optodiscord"

_SAVE_KW = {"format": "svg", "metadata": {"Date": None}}


def save_trajectory_plot(path, traj: Trajectory) -> None:
    """Line plot of every recorded measure against time (microseconds)."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    t_us = traj.times * 1e6
    for name, vals in traj.measures.items():
        ax.plot(t_us, vals, label=name, lw=1.2)
    ax.set_xlabel("time (us)")
    ax.set_ylabel("measure value")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_temperature_plot(path, sweep: SweepResult) -> None:
    fig, ax = plt.subplots(figsize=(6.5, 4.2))
    temps = np.asarray(sweep.axis_values)
    ax.semilogx(temps, sweep.column("E_max"), "o-", ms=4)
    ax.set_xlabel("bath temperature (K)")
    ax.set_ylabel("peak mirror-field log-negativity")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_squeezing_heatmap(path, sweep: SweepResult, n_time_bins: int = 400) -> None:
    """Heatmap of mirror-field entanglement over the (time, squeezing) grid.

    Each squeezing row is interpolated onto a common uniform time grid
    before rendering.
    """
    rs = np.asarray(sweep.axis_values)
    t_max = max(rec["times_s"][-1] for rec in sweep.records)
    grid_t = np.linspace(0.0, t_max, n_time_bins)
    img = np.vstack([
        np.interp(grid_t, rec["times_s"], rec["E_pair"]) for rec in sweep.records
    ])
    fig, ax = plt.subplots(figsize=(7, 4.5))
    mesh = ax.pcolormesh(grid_t * 1e6, rs, img, shading="nearest", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label="mirror-field log-negativity")
    ax.set_xlabel("time (us)")
    ax.set_ylabel("optical squeezing r")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_demon_histogram(path, sweep: SweepResult, n_bins: int = 40) -> None:
    fig, ax = plt.subplots(figsize=(6.5, 4.2))
    ax.hist(sweep.column("E_max"), bins=n_bins, color="#4878a8")
    ax.set_xlabel("peak mirrors-fields log-negativity")
    ax.set_ylabel("samples")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
