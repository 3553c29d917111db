"""
Figure rendering for solver traces, benchmark sweeps, and bus
diagnostics.  Figures are written straight to files next to the
delimited reports; nothing interactive.
"""

from __future__ import annotations

from pathlib import Path
from typing import Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_RC = {
    "figure.figsize": (6.0, 3.8),
    "figure.dpi": 110,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 9,
    "legend.fontsize": 8,
}


def render_trace_figure(trace, path: Union[str, Path], title: str = "") -> Path:
    """Semilog plot of iterate change and residual, split by method."""
    path = Path(path)
    rows = list(trace)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        ks = np.array([r.k for r in rows])
        diffs = np.array([r.sup_diff for r in rows])
        resids = np.array([r.residual for r in rows])
        for method, marker in (("VFI", "o"), ("Newton", "s")):
            mask = np.array([r.method == method for r in rows])
            if mask.any():
                ax.semilogy(ks[mask], np.maximum(diffs[mask], 1e-300),
                            marker=marker, linestyle="none", label=f"{method} step")
        ax.semilogy(ks, np.maximum(resids, 1e-300), color="0.5",
                    linewidth=0.8, label="residual")
        ax.set_xlabel("iteration k")
        ax.set_ylabel("sup-norm")
        if title:
            ax.set_title(title)
        ax.legend()
        fig.savefig(path)
        plt.close(fig)
    return path


def render_bench_figure(report, path: Union[str, Path]) -> Path:
    """EV/W time ratios against state-space size, per model family."""
    path = Path(path)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        families = sorted({r.model for r in report.rows})
        for family in families:
            rows = [r for r in report.rows if r.model == family]
            sizes = [r.n_states for r in rows]
            ax.plot(sizes, [r.ratio_total for r in rows], marker="o",
                    label=f"{family}: total")
            ax.plot(sizes, [r.ratio_step for r in rows], marker="s",
                    linestyle="--", label=f"{family}: step only")
        ax.axhline(1.0, color="0.6", linewidth=0.8)
        ax.set_xlabel("number of states")
        ax.set_ylabel("EV time / W time")
        ax.set_title("Relative cost of Newton steps")
        ax.legend()
        fig.savefig(path)
        plt.close(fig)
    return path


def render_bus_figure(ev: np.ndarray, path: Union[str, Path],
                      title: str = "") -> Path:
    """Keep and replace blocks of a solved EV stack across states."""
    path = Path(path)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        x = np.arange(ev.shape[1])
        ax.plot(x, ev[0], label="EV keep")
        ax.plot(x, ev[1], label="EV replace", linestyle="--")
        ax.axhline(ev[0, 0], color="0.6", linewidth=0.8, label="EV keep at state 0")
        ax.set_xlabel("state")
        ax.set_ylabel("expected value")
        if title:
            ax.set_title(title)
        ax.legend()
        fig.savefig(path)
        plt.close(fig)
    return path
