"""SVG figures written next to the CSV reports.

Figures have an 800 x 400 viewport (SVG units are points, 72 per inch), carry no
timestamp and use a fixed hash salt so repeated runs are byte-identical.
"""

from __future__ import annotations

from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

WIDTH_PT, HEIGHT_PT, DPI = 800, 400, 72
MAX_PATHS = 20

_STYLE = {
    "svg.hashsalt": "qproc",
    "svg.fonttype": "none",
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "lines.linewidth": 0.9,
}


def _save(fig, path) -> None:
    fig.savefig(path, format="svg", dpi=DPI, metadata={"Date": None, "Creator": None})
    plt.close(fig)


def _new_axes(title: str, xlabel: str, ylabel: str):
    fig, ax = plt.subplots(figsize=(WIDTH_PT / 72, HEIGHT_PT / 72), dpi=DPI)
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    return fig, ax


def step_paths(path, grid: Sequence[float], values: np.ndarray, title: str, mean: bool = True) -> None:
    """Overlay of sampled step paths (right-continuous steps on ``grid``)."""
    grid = np.asarray(grid, dtype=np.float64)
    values = np.atleast_2d(values)
    with plt.rc_context(_STYLE):
        fig, ax = _new_axes(title, "t", "value")
        for row in values[:MAX_PATHS]:
            ax.step(grid, row, where="post", color="0.55", alpha=0.7)
        if mean and len(values) > 1:
            ax.step(grid, values.mean(axis=0), where="post", color="C3", linewidth=1.6, label="batch mean")
            ax.legend(frameon=False, loc="upper left")
        ax.axhline(0.0, color="k", linewidth=0.5)
        ax.set_xlim(min(0.0, grid.min()), 1.0)
        _save(fig, path)


def contraction(path, b2: Sequence[float], bound: float = 2.0 / 3.0) -> None:
    """``b_m^2`` on a log axis against the geometric envelope ``b_0^2 bound^m``."""
    b2 = np.asarray(b2, dtype=np.float64)
    m = np.arange(len(b2))
    with plt.rc_context(_STYLE):
        fig, ax = _new_axes("increment norms", "generation m", "b_m^2")
        ax.semilogy(m, b2, "o-", color="C0", label="Monte-Carlo")
        if len(b2) and b2[0] > 0:
            ax.semilogy(m, b2[0] * bound**m, "--", color="0.4", label=f"b_0^2 ({bound:.3g})^m")
        ax.legend(frameon=False)
        _save(fig, path)


def coupled_distance(path, distances: Mapping[float, Mapping[int, float]]) -> None:
    """``D(n)`` against ``n`` (log-log), one line per time point."""
    with plt.rc_context(_STYLE):
        fig, ax = _new_axes("coupled L2 distance", "n", "D(n)")
        for k, (t, by_n) in enumerate(sorted(distances.items())):
            ns = sorted(by_n)
            ax.loglog(ns, [by_n[n] for n in ns], "o-", color=f"C{k}", label=f"t = {t:g}")
        ax.legend(frameon=False)
        _save(fig, path)
