"""Deterministic matplotlib figures (SVG output is byte-identical across runs)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.collections import LineCollection  # noqa: E402

from .graphcheck import GraphAmbiguityError, extract_graph  # noqa: E402
from .varifold import CurveSystem  # noqa: E402

# multiplicity 1, 2, 3, 4, >=5
MULTIPLICITY_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]

_STYLE = {
    "svg.hashsalt": "varelastic",
    "svg.fonttype": "none",
    "font.family": "DejaVu Sans",
    "font.size": 9,
    "figure.dpi": 100,
    "path.simplify": False,
}


def multiplicity_color(m: int) -> str:
    return MULTIPLICITY_COLORS[min(max(m, 1), len(MULTIPLICITY_COLORS)) - 1]


def _save(fig, path) -> None:
    path = Path(path)
    fmt = path.suffix.lstrip(".").lower() or "svg"
    metadata = {"Date": None} if fmt == "svg" else None
    fig.savefig(path, format=fmt, metadata=metadata)
    plt.close(fig)


def _segments_by_multiplicity(system: CurveSystem) -> dict[int, list]:
    """Polylines grouped by multiplicity; uses the intersection graph when it can be built."""
    groups: dict[int, list] = {}
    try:
        graph = extract_graph(system)
    except GraphAmbiguityError:
        graph = None
    if graph is not None and graph.edges:
        for e in graph.edges:
            chain = e.chain if not e.closed_loop else np.vstack([e.chain, e.chain[:1]])
            groups.setdefault(e.multiplicity, []).append(chain)
    else:
        for c in system:
            groups.setdefault(c.weight, []).append(np.vstack([c.nodes, c.nodes[:1]]))
    return groups


def render_system(system: CurveSystem, path, title: str | None = None) -> None:
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(5, 5))
        groups = _segments_by_multiplicity(system)
        for m in sorted(groups):
            lc = LineCollection(groups[m], colors=multiplicity_color(m),
                                linewidths=0.8 + 0.6 * (m - 1), label=f"multiplicity {m}")
            ax.add_collection(lc)
        x0, y0, x1, y1 = system.bbox()
        pad = 0.05 * max(x1 - x0, y1 - y0, 1e-12)
        ax.set_xlim(x0 - pad, x1 + pad)
        ax.set_ylim(y0 - pad, y1 + pad)
        ax.set_aspect("equal")
        ax.legend(loc="upper right", frameon=False)
        if title:
            ax.set_title(title)
        _save(fig, path)


def plot_monotonicity(profile, path) -> None:
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(profile.radii, profile.values, color="#1f77b4", label="A(r)")
        ax.axhline(profile.limit_estimate, color="#7f7f7f", linestyle="--",
                   label="(mass + E_2) / 2")
        ax.set_xscale("log")
        ax.set_xlabel("r")
        ax.set_ylabel("A(r)")
        ax.legend(frameon=False)
        _save(fig, path)


def plot_trace(trace, path) -> None:
    arr = np.array([row[:3] for row in trace], dtype=float).reshape(-1, 3)
    with plt.rc_context(_STYLE):
        fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6, 5), sharex=True)
        ax1.plot(arr[:, 0], arr[:, 1], color="#1f77b4")
        ax1.set_ylabel("energy")
        ax2.semilogy(arr[:, 0], np.maximum(arr[:, 2], 1e-300), color="#d62728")
        ax2.set_ylabel("gradient norm")
        ax2.set_xlabel("iteration")
        _save(fig, path)


def plot_reconstruction(grid, path) -> None:
    x0, y0, x1, y1 = grid.bbox
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(5, 5))
        ax.imshow(grid.labels, origin="lower", extent=(x0, x1, y0, y1), cmap="gray",
                  vmin=0, vmax=255, interpolation="nearest")
        ax.set_aspect("equal")
        _save(fig, path)
