"""Matplotlib figures for sweep curves, written next to the CSV outputs."""

from __future__ import annotations

import io
import os
from typing import Mapping

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .core import write_atomic  # noqa: E402
from .evaluation import SweepResult  # noqa: E402

# fixed ids and no timestamps so re-running gives byte-identical SVG files
STYLE = {
    "svg.hashsalt": "softwrap",
    "svg.fonttype": "none",
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "lines.linewidth": 1.2,
    "figure.figsize": (6.0, 3.6),
}


def plot_sweeps(curves: Mapping[str, SweepResult], path: str | os.PathLike, title: str | None = None) -> None:
    """One uncertainty-vs-feature line per model; format from the file suffix (png, svg, pdf)."""
    path = os.fspath(path)
    fmt = os.path.splitext(path)[1].lstrip(".").lower() or "png"
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        feature = None
        for name, sw in curves.items():
            ax.plot(sw.grid, sw.u_values, label=name)
            feature = sw.feature
        ax.set_xlabel(feature or "")
        ax.set_ylabel("estimated uncertainty")
        ax.set_ylim(-0.02, 1.02)
        if title:
            ax.set_title(title)
        if len(curves) > 1:
            ax.legend(loc="best", frameon=False)
        fig.tight_layout()
        buf = io.BytesIO()
        metadata = {"Date": None} if fmt == "svg" else ({"CreationDate": None} if fmt == "pdf" else None)
        fig.savefig(buf, format=fmt, dpi=150, metadata=metadata)
        plt.close(fig)
    write_atomic(path, buf.getvalue())
