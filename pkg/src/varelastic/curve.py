"""Closed planar polylines and their length / curvature / p-elastic energies.

Curvature is measured by turning angles: at node ``i`` the signed angle
``phi_i`` between the incoming edge ``x_i - x_{i-1}`` and the outgoing edge
``x_{i+1} - x_i``, divided by the dual length ``l_i = (|e_{i-1}| + |e_i|) / 2``.
With this choice ``E_1 = sum |phi_i|`` is exactly scale invariant and the
discrete Fenchel bound ``sum |phi_i| >= 2 pi`` holds exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

MIN_NODES = 8
GEOM_EPS_REL = 1e-9
ANGLE_EPS = 1e-6
TWO_PI = 2.0 * math.pi


class InvalidCurveError(ValueError):
    """Raised when a polyline violates the closed-curve invariants."""


def _as_nodes(nodes) -> np.ndarray:
    arr = np.array(nodes, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InvalidCurveError(f"nodes must have shape (n, 2), got {arr.shape}")
    return arr


def geom_eps(nodes: np.ndarray) -> float:
    """Length below which an edge counts as degenerate (1e-9 x bbox diagonal)."""
    span = nodes.max(axis=0) - nodes.min(axis=0)
    return GEOM_EPS_REL * float(np.hypot(*span))


def edge_vectors(nodes: np.ndarray) -> np.ndarray:
    """Edge ``i`` runs from node ``i`` to node ``i+1`` (cyclically)."""
    return np.roll(nodes, -1, axis=0) - nodes


def _turning(nodes: np.ndarray) -> np.ndarray:
    e_out = edge_vectors(nodes)
    e_in = np.roll(e_out, 1, axis=0)
    cross = e_in[:, 0] * e_out[:, 1] - e_in[:, 1] * e_out[:, 0]
    dot = np.einsum("ij,ij->i", e_in, e_out)
    return np.arctan2(cross, dot)


def curve_defects(nodes: np.ndarray) -> list[str]:
    """List the invariant violations of a candidate node array (empty if valid)."""
    problems = []
    n = len(nodes)
    if n < MIN_NODES:
        problems.append(f"need at least {MIN_NODES} nodes, got {n}")
        return problems
    if not np.all(np.isfinite(nodes)):
        problems.append("non-finite node coordinates")
        return problems
    eps = geom_eps(nodes)
    lengths = np.hypot(*edge_vectors(nodes).T)
    short = np.flatnonzero(lengths <= eps)
    if eps == 0.0 or short.size:
        idx = short[:5].tolist() if short.size else []
        problems.append(f"degenerate edges (length <= {eps:.3g}) at {idx}")
        return problems
    phi = np.abs(_turning(nodes))
    bad = np.flatnonzero(phi >= math.pi - ANGLE_EPS)
    if bad.size:
        problems.append(f"edge reversals at nodes {bad[:5].tolist()}")
    return problems


@dataclass(frozen=True)
class DiscreteCurve:
    """Closed polyline (last node joins the first) carrying an integer weight."""

    nodes: np.ndarray
    weight: int = 1
    _validated: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        arr = _as_nodes(self.nodes)
        arr.setflags(write=False)
        object.__setattr__(self, "nodes", arr)
        if int(self.weight) != self.weight or self.weight < 1:
            raise InvalidCurveError(f"weight must be a positive integer, got {self.weight!r}")
        object.__setattr__(self, "weight", int(self.weight))
        if self._validated:
            problems = curve_defects(arr)
            if problems:
                raise InvalidCurveError("; ".join(problems))

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def edges(self) -> np.ndarray:
        return edge_vectors(self.nodes)

    @property
    def edge_lengths(self) -> np.ndarray:
        return np.hypot(*self.edges.T)

    def with_nodes(self, nodes) -> "DiscreteCurve":
        return DiscreteCurve(nodes, self.weight)

    def reversed(self) -> "DiscreteCurve":
        return DiscreteCurve(self.nodes[::-1], self.weight)

    def scaled(self, factor: float) -> "DiscreteCurve":
        return DiscreteCurve(self.nodes * factor, self.weight)

    def rotated(self, angle: float, shift=(0.0, 0.0)) -> "DiscreteCurve":
        c, s = math.cos(angle), math.sin(angle)
        rot = np.array([[c, -s], [s, c]])
        return DiscreteCurve(self.nodes @ rot.T + np.asarray(shift, float), self.weight)


@dataclass(frozen=True)
class CurvatureProfile:
    curvature: np.ndarray
    dual_length: np.ndarray


def turning_angles(curve: DiscreteCurve) -> np.ndarray:
    """Signed turning angle at every node, positive for counterclockwise turns."""
    return _turning(curve.nodes)


def dual_lengths(curve: DiscreteCurve) -> np.ndarray:
    lengths = curve.edge_lengths
    return 0.5 * (lengths + np.roll(lengths, 1))


def curvature_profile(curve: DiscreteCurve) -> CurvatureProfile:
    dual = dual_lengths(curve)
    return CurvatureProfile(turning_angles(curve) / dual, dual)


def length(curve: DiscreteCurve) -> float:
    return float(curve.edge_lengths.sum())


def _check_p(p: float) -> float:
    p = float(p)
    if not p >= 1.0:
        raise ValueError(f"p must be >= 1, got {p}")
    return p


def elastic_energy(curve: DiscreteCurve, p: float) -> float:
    """Discrete ``E_p = sum |phi_i|^p / l_i^(p-1)`` (equal to ``sum |k_i|^p l_i``)."""
    p = _check_p(p)
    phi = np.abs(turning_angles(curve))
    return float(np.sum(phi**p / dual_lengths(curve) ** (p - 1.0)))


def total_energy(curve: DiscreteCurve, p: float, lam: float = 1.0) -> float:
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    return lam * length(curve) + elastic_energy(curve, p)


def total_absolute_curvature(curve: DiscreteCurve) -> float:
    return float(np.abs(turning_angles(curve)).sum())


@dataclass(frozen=True)
class TurningNumber:
    value: int
    residual: float
    reliable: bool


def turning_number(curve: DiscreteCurve) -> TurningNumber:
    ratio = float(turning_angles(curve).sum()) / TWO_PI
    value = int(round(ratio))
    residual = abs(ratio - value)
    return TurningNumber(value, residual, residual <= 0.1)


def is_convex(curve: DiscreteCurve, tol: float = 1e-12) -> bool:
    """Turning angles of constant sign and a single turn of the tangent."""
    phi = turning_angles(curve)
    same_sign = bool(np.all(phi >= -tol) or np.all(phi <= tol))
    return same_sign and abs(turning_number(curve).value) == 1


def arclength_positions(curve: DiscreteCurve) -> np.ndarray:
    """Arclength coordinate of each node, starting at 0 for node 0."""
    return np.concatenate([[0.0], np.cumsum(curve.edge_lengths)[:-1]])


def resample_arclength(curve: DiscreteCurve, n: int) -> DiscreteCurve:
    """New curve of ``n`` nodes at equal arclength spacing along the input polyline.

    Node 0 is kept; the other nodes are placed at ``k * L / n``. Length is
    reproduced exactly whenever the new nodes include every input corner
    (e.g. upsampling a regular polygon by an integer factor); otherwise the
    chords cut corners and the length can only decrease.
    """
    if n < MIN_NODES:
        raise InvalidCurveError(f"need at least {MIN_NODES} nodes, got {n}")
    closed = np.vstack([curve.nodes, curve.nodes[:1]])
    s = np.concatenate([[0.0], np.cumsum(curve.edge_lengths)])
    targets = np.arange(n) * (s[-1] / n)
    x = np.interp(targets, s, closed[:, 0])
    y = np.interp(targets, s, closed[:, 1])
    return DiscreteCurve(np.column_stack([x, y]), curve.weight)


def corner_nodes(curve: DiscreteCurve, threshold: float = 0.2) -> np.ndarray:
    """Indices of nodes whose turning is a genuine corner rather than sampled curvature.

    A node qualifies when ``|phi_i| > threshold`` and the turning measured
    with doubled stride (chords to the nodes two steps away) stays below
    1.5 ``|phi_i|``.  Sampled smooth curvature roughly doubles under the
    doubled stride; a corner keeps its angle.
    """
    phi = turning_angles(curve)
    nodes = curve.nodes
    d_in = nodes - np.roll(nodes, 2, axis=0)
    d_out = np.roll(nodes, -2, axis=0) - nodes
    cross = d_in[:, 0] * d_out[:, 1] - d_in[:, 1] * d_out[:, 0]
    wide = np.abs(np.arctan2(cross, np.einsum("ij,ij->i", d_in, d_out)))
    mask = (np.abs(phi) > threshold) & (wide < 1.5 * np.abs(phi))
    return np.flatnonzero(mask)
