"""Static SVG charts for error tables and solution profiles."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib
import numpy as np
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure

from .errors import InvalidArgument

GUIDE_SLOPES = (0.4, 0.5, 1.0)

# fixed ids and no timestamp so identical data give identical files
matplotlib.rcParams["svg.hashsalt"] = "slabdd"
_METADATA = {"Date": None, "Creator": "slabdd"}

Series = tuple[str, Sequence[float], Sequence[float]]


def _check(series: Sequence[Series]) -> None:
    if not series:
        raise InvalidArgument("nothing to plot")
    for label, x, y in series:
        if len(x) == 0 or len(x) != len(y):
            raise InvalidArgument(f"series {label!r} is empty or ragged")


def _save(fig: Figure, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    FigureCanvasSVG(fig)
    fig.savefig(path, format="svg", metadata=_METADATA)
    return path


def error_plot(series: Sequence[Series], path, title: str = "", ylabel: str = "error") -> Path:
    """Log-log error against epsilon with reference slopes through the first point."""
    _check(series)
    fig = Figure(figsize=(5, 4))
    ax = fig.add_subplot()
    for label, x, y in series:
        ax.loglog(x, y, "o-", label=label)
    x0 = np.asarray(series[0][1], dtype=float)
    y0 = float(series[0][2][0])
    span = np.array([x0.min(), x0.max()])
    for k in GUIDE_SLOPES:
        ax.loglog(span, y0 * (span / x0[0]) ** k, ":", color="gray", linewidth=0.8)
        ax.annotate(f"slope {k:g}", (span[0], y0 * (span[0] / x0[0]) ** k), fontsize=7, color="gray")
    ax.set_xlabel("epsilon")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend(fontsize=8)
    return _save(fig, path)


def profile_plot(series: Sequence[Series], path, title: str = "", zoom: tuple[float, float] = (-1.0, -0.9)) -> Path:
    """Profiles on the full interval and, below, a zoom window near the left end."""
    _check(series)
    fig = Figure(figsize=(6, 6))
    full, near = fig.subplots(2, 1)
    for label, x, y in series:
        style = "--" if label.startswith("ref") else "-"
        full.plot(x, y, style, label=label)
        x = np.asarray(x)
        keep = (x >= zoom[0]) & (x <= zoom[1])
        near.plot(x[keep], np.asarray(y)[keep], style, label=label)
    full.set_title(title)
    full.legend(fontsize=7)
    near.set_xlim(*zoom)
    near.set_xlabel("x")
    return _save(fig, path)


def line_plot(series: Sequence[Series], path, title: str = "", xlabel: str = "t", ylabel: str = "") -> Path:
    _check(series)
    fig = Figure(figsize=(5, 4))
    ax = fig.add_subplot()
    for label, x, y in series:
        ax.plot(x, y, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend(fontsize=8)
    return _save(fig, path)
