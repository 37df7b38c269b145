"""Matplotlib renderings of campaign outputs. Files only; never opens a window."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .metrics import EafGrid  # noqa: E402

STYLE = {
    "figure.figsize": (5.0, 4.0),
    "figure.dpi": 120,
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
}


def _extent(grid: EafGrid):
    (x0, x1), (y0, y1) = grid.ranges[:2]
    return [x0, x1, y0, y1]


def plot_eaf(grid: EafGrid, path, title: str = "", true_front=None) -> None:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        im = ax.imshow(grid.cells.T, origin="lower", extent=_extent(grid), aspect="auto", cmap="Greys", vmin=0, vmax=1)
        if true_front is not None and len(true_front):
            ax.plot(true_front[:, 0], true_front[:, 1], ".", color="green", ms=1.5, label="true front")
            ax.legend(loc="upper right")
        fig.colorbar(im, ax=ax, label="attainment probability")
        ax.set_xlabel("$f_1$")
        ax.set_ylabel("$f_2$")
        ax.set_title(title)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)


def plot_eaf_difference(diff: EafGrid, path, title: str = "") -> None:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        lim = max(float(np.abs(diff.cells).max()), 1e-12)
        im = ax.imshow(diff.cells.T, origin="lower", extent=_extent(diff), aspect="auto", cmap="RdBu", vmin=-lim, vmax=lim)
        fig.colorbar(im, ax=ax, label="EAF difference")
        ax.set_xlabel("$f_1$")
        ax.set_ylabel("$f_2$")
        ax.set_title(title)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)


def plot_hv_traces(traces: dict, path) -> None:
    """One line per run, coloured by method."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        colours = plt.rcParams["axes.prop_cycle"].by_key()["color"]
        for k, (method, runs) in enumerate(sorted(traces.items())):
            for n, trace in enumerate(runs):
                ax.plot(trace, color=colours[k % len(colours)], lw=0.8, alpha=0.7, label=method if n == 0 else None)
        ax.set_xlabel("iteration")
        ax.set_ylabel("hypervolume (%)")
        ax.legend()
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
