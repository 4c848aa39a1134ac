"""Curve systems viewed as integer 1-varifolds.

A system ``V = sum_i w_i (gamma_i)_# v(S^1, 1)`` has mass measure given by
arclength weighted by multiplicity. Integrals against the mass measure use
node quadrature ``value(x_i) * l_i * w``. The generalized curvature of a
closed polyline is concentrated at its nodes: node ``i`` carries the vector
``t_i - t_{i-1}`` (difference of unit edge tangents), which makes the first
variation identity hold exactly with zero boundary term.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .curve import (
    DiscreteCurve,
    dual_lengths,
    edge_vectors,
    elastic_energy,
    length,
    total_absolute_curvature,
    turning_angles,
)


@dataclass(frozen=True)
class CurveSystem:
    curves: tuple

    def __init__(self, curves: Sequence[DiscreteCurve]):
        curves = tuple(curves)
        if not curves:
            raise ValueError("a curve system needs at least one curve")
        for c in curves:
            if not isinstance(c, DiscreteCurve):
                raise TypeError(f"expected DiscreteCurve, got {type(c).__name__}")
        object.__setattr__(self, "curves", curves)

    def __iter__(self):
        return iter(self.curves)

    def __len__(self) -> int:
        return len(self.curves)

    @property
    def all_nodes(self) -> np.ndarray:
        return np.vstack([c.nodes for c in self.curves])

    def bbox(self) -> tuple[float, float, float, float]:
        pts = self.all_nodes
        (x0, y0), (x1, y1) = pts.min(axis=0), pts.max(axis=0)
        return float(x0), float(y0), float(x1), float(y1)

    def diameter(self) -> float:
        x0, y0, x1, y1 = self.bbox()
        return math.hypot(x1 - x0, y1 - y0)

    def map(self, fn: Callable[[DiscreteCurve], DiscreteCurve]) -> "CurveSystem":
        return CurveSystem([fn(c) for c in self.curves])


@dataclass(frozen=True)
class Verdict:
    name: str
    lhs: float
    rhs: float
    passed: bool
    note: str = ""

    def to_json(self) -> dict:
        out = {"name": self.name, "lhs": self.lhs, "rhs": self.rhs, "pass": self.passed}
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class EnergyReport:
    p: float
    lam: float
    mass: float
    elastic: float
    total: float
    per_curve: list = field(default_factory=list)
    checks: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "lambda": self.lam,
            "mass": self.mass,
            "elastic": self.elastic,
            "total": self.total,
            "per_curve": [{"length": a, "elastic": b, "weight": w} for a, b, w in self.per_curve],
            "checks": [c.to_json() for c in self.checks],
        }


def check_eps(scale: float) -> float:
    return 1e-9 * max(1.0, abs(scale))


def mass(system: CurveSystem) -> float:
    return float(sum(c.weight * length(c) for c in system))


def elastic(system: CurveSystem, p: float) -> float:
    return float(sum(c.weight * elastic_energy(c, p) for c in system))


def e1(system: CurveSystem) -> float:
    return float(sum(c.weight * total_absolute_curvature(c) for c in system))


def system_energy(system: CurveSystem, p: float, lam: float = 1.0) -> EnergyReport:
    per_curve = [(length(c), elastic_energy(c, p), c.weight) for c in system]
    m = float(sum(w * a for a, _, w in per_curve))
    ep = float(sum(w * b for _, b, w in per_curve))
    report = EnergyReport(p, lam, m, ep, lam * m + ep, per_curve)
    if p > 1:
        report.checks.append(holder_chain_check(system, p))
    return report


# ------------------------------------------------------------------ multiplicity

def _point_segment_distance(point: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = b - a
    dd = np.einsum("ij,ij->i", d, d)
    t = np.clip(np.einsum("ij,ij->i", point - a, d) / np.where(dd > 0, dd, 1.0), 0.0, 1.0)
    proj = a + t[:, None] * d
    return np.hypot(*(point - proj).T)


def passes_near(curve: DiscreteCurve, point, tol: float) -> int:
    """Number of separate runs of consecutive segments passing within ``tol`` of ``point``."""
    a = curve.nodes
    b = np.roll(a, -1, axis=0)
    near = _point_segment_distance(np.asarray(point, float), a, b) <= tol
    if not near.any():
        return 0
    if near.all():
        return 1
    # count run starts on the cyclic boolean sequence
    return int(np.count_nonzero(near & ~np.roll(near, 1)))


def multiplicity_at(system: CurveSystem, point, tol: float) -> int:
    if not tol > 0:
        raise ValueError("tol must be positive")
    return int(sum(c.weight * passes_near(c, point, tol) for c in system))


def density_bound_check(system: CurveSystem, p: float, sample_points, tol: float | None = None,
                        slack: float = 0.5) -> list[Verdict]:
    """``theta_V(x) <= E_1 / 2`` at each sample; ``slack`` absorbs integer counting."""
    total = e1(system)
    tol = tol if tol is not None else 1e-6 * max(system.diameter(), 1e-12)
    rhs = 0.5 * total + slack
    out = []
    for x in np.atleast_2d(sample_points):
        theta = multiplicity_at(system, x, tol)
        out.append(Verdict("density_bound", float(theta), rhs, theta <= rhs,
                           f"x=({x[0]:.6g},{x[1]:.6g})"))
    return out


def holder_chain_check(system: CurveSystem, p: float) -> Verdict:
    """``2 <= E_1 <= mass^(1/p') E_p^(1/p)``; ``lhs`` is ``E_1``."""
    if not p > 1:
        raise ValueError("the Hoelder chain needs p > 1")
    q = p / (p - 1.0)
    total = e1(system)
    bound = mass(system) ** (1.0 / q) * elastic(system, p) ** (1.0 / p)
    ok = 2.0 <= total and total <= bound + check_eps(bound)
    return Verdict("holder_chain", total, bound, ok, "2 <= E_1 <= mass^(1/p') E_p^(1/p)")


# ------------------------------------------------------------------ curvature measure

def curvature_measure(curve: DiscreteCurve) -> np.ndarray:
    """Per-node vector ``t_i - t_{i-1}``; equals ``k_V * l_i`` for the polyline varifold."""
    e = edge_vectors(curve.nodes)
    t = e / np.hypot(*e.T)[:, None]
    return t - np.roll(t, 1, axis=0)


class BumpField:
    """Vector field ``X(x) = P(x - c) * bump(|x - c| / R)`` with a polynomial ``P``.

    ``coeffs`` has shape (2, deg+1, deg+1): ``P_k(u, v) = sum c[k, i, j] u^i v^j``.
    The bump ``exp(1 - 1 / (1 - s^2))`` is smooth with compact support.
    """

    def __init__(self, center, radius: float, coeffs):
        self.center = np.asarray(center, float)
        self.radius = float(radius)
        self.coeffs = np.asarray(coeffs, float)

    @classmethod
    def random(cls, rng: np.random.Generator, center, radius: float, degree: int = 2) -> "BumpField":
        return cls(center, radius, rng.normal(size=(2, degree + 1, degree + 1)))

    @classmethod
    def radial(cls, radius: float) -> "BumpField":
        """``X(x) = x * bump(|x| / R)``."""
        c = np.zeros((2, 2, 2))
        c[0, 1, 0] = 1.0
        c[1, 0, 1] = 1.0
        return cls((0.0, 0.0), radius, c)

    def _bump(self, u, v):
        s2 = (u * u + v * v) / self.radius**2
        inside = s2 < 1.0
        safe = np.where(inside, s2, 0.0)
        val = np.where(inside, np.exp(1.0 - 1.0 / (1.0 - safe)), 0.0)
        # d(bump)/d(s2) = -bump / (1 - s2)^2
        dval = np.where(inside, -val / (1.0 - safe) ** 2, 0.0)
        return val, dval * 2 * u / self.radius**2, dval * 2 * v / self.radius**2

    def _poly(self, u, v):
        deg = self.coeffs.shape[1]
        upow = np.stack([u**i for i in range(deg)])
        vpow = np.stack([v**j for j in range(deg)])
        dupow = np.stack([i * u ** max(i - 1, 0) for i in range(deg)])
        dvpow = np.stack([j * v ** max(j - 1, 0) for j in range(deg)])
        val = np.einsum("kij,i...,j...->k...", self.coeffs, upow, vpow)
        du = np.einsum("kij,i...,j...->k...", self.coeffs, dupow, vpow)
        dv = np.einsum("kij,i...,j...->k...", self.coeffs, upow, dvpow)
        return val, du, dv

    def value(self, x: np.ndarray) -> np.ndarray:
        u, v = (np.atleast_2d(x) - self.center).T
        b, _, _ = self._bump(u, v)
        p, _, _ = self._poly(u, v)
        return (p * b).T

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        """Array of shape (m, 2, 2) with ``J[m, k, l] = d X_k / d x_l``."""
        u, v = (np.atleast_2d(x) - self.center).T
        b, bu, bv = self._bump(u, v)
        p, pu, pv = self._poly(u, v)
        ju = pu * b + p * bu
        jv = pv * b + p * bv
        return np.stack([ju, jv], axis=-1).transpose(1, 0, 2)


def first_variation_terms(system: CurveSystem, field_: BumpField) -> tuple[float, float]:
    """Return ``(int div_T X dmu, int <X, k_V> dmu)`` by per-node quadrature.

    The tangential divergence at node ``i`` uses both adjacent edge tangents,
    each weighted by half its edge length (trapezoid rule on every edge).
    """
    div_total, curv_total = 0.0, 0.0
    for c in system:
        e = edge_vectors(c.nodes)
        lens = np.hypot(*e.T)
        t = e / lens[:, None]
        jac = field_.jacobian(c.nodes)
        t_in = np.roll(t, 1, axis=0)
        l_in = np.roll(lens, 1)
        div_out = np.einsum("mk,mkl,ml->m", t, jac, t)
        div_in = np.einsum("mk,mkl,ml->m", t_in, jac, t_in)
        div_total += c.weight * float(np.sum(0.5 * lens * div_out + 0.5 * l_in * div_in))
        xv = field_.value(c.nodes)
        curv_total += c.weight * float(np.einsum("ij,ij->", xv, curvature_measure(c)))
    return div_total, curv_total


def first_variation_residual(system: CurveSystem, fields) -> float:
    """``max_X |int div_T X dmu + int <X, k_V> dmu|``; zero boundary term means this vanishes."""
    worst = 0.0
    for f in fields:
        div, curv = first_variation_terms(system, f)
        worst = max(worst, abs(div + curv))
    return worst


def boundary_atom(system: CurveSystem, point, radius: float) -> float:
    """``|sum w (t_i - t_{i-1})|`` over nodes in ``B_radius(point)``.

    The per-node curvature measure absorbs corners, so the bump-field residual
    vanishes for every polyline; a generalized boundary shows up instead as a
    curvature atom that does not shrink with the ball. Smooth passes and
    balanced junctions contribute ``O(radius)``.
    """
    x0 = np.asarray(point, float)
    total = np.zeros(2)
    for c in system:
        inside = np.hypot(*(c.nodes - x0).T) <= radius
        total += c.weight * curvature_measure(c)[inside].sum(axis=0)
    return float(np.hypot(*total))


def random_fields(system: CurveSystem, count: int, rng: np.random.Generator,
                  degree: int = 2) -> list[BumpField]:
    """Polynomial-times-bump fields centred on random curve nodes."""
    pts = system.all_nodes
    diam = system.diameter()
    out = []
    for _ in range(count):
        c = pts[rng.integers(len(pts))] + rng.normal(size=2) * 0.05 * diam
        out.append(BumpField.random(rng, c, rng.uniform(0.2, 0.6) * diam, degree))
    return out


# ------------------------------------------------------------------ monotonicity

@dataclass
class MonotonicityProfile:
    center: tuple
    radii: np.ndarray
    values: np.ndarray
    limit_estimate: float
    tolerance: float
    violations: list = field(default_factory=list)

    @property
    def monotone(self) -> bool:
        return not self.violations

    def to_csv(self) -> str:
        lines = ["r,A"]
        lines += [f"{r:.17g},{a:.17g}" for r, a in zip(self.radii, self.values)]
        return "\n".join(lines) + "\n"


def clipped_length(a: np.ndarray, b: np.ndarray, center: np.ndarray, r: float) -> np.ndarray:
    """Length of each segment ``[a_i, b_i]`` inside the closed disc ``B_r(center)``."""
    d = b - a
    f = a - center
    dd = np.einsum("ij,ij->i", d, d)
    fd = np.einsum("ij,ij->i", f, d)
    ff = np.einsum("ij,ij->i", f, f)
    disc = fd * fd - dd * (ff - r * r)
    root = np.sqrt(np.maximum(disc, 0.0))
    t0 = np.clip((-fd - root) / dd, 0.0, 1.0)
    t1 = np.clip((-fd + root) / dd, 0.0, 1.0)
    return np.where(disc > 0, (t1 - t0) * np.sqrt(dd), 0.0)


def mass_in_ball(system: CurveSystem, center, r: float) -> float:
    center = np.asarray(center, float)
    total = 0.0
    for c in system:
        a = c.nodes
        total += c.weight * float(clipped_length(a, np.roll(a, -1, axis=0), center, r).sum())
    return total


def _node_data(system: CurveSystem, center: np.ndarray):
    dist, radial, sq = [], [], []
    for c in system:
        phi = turning_angles(c)
        dist.append(np.hypot(*(c.nodes - center).T))
        radial.append(c.weight * np.einsum("ij,ij->i", curvature_measure(c), c.nodes - center))
        sq.append(c.weight * phi**2 / dual_lengths(c))
    return np.concatenate(dist), np.concatenate(radial), np.concatenate(sq)


def monotonicity_profile(system: CurveSystem, center, radii, p_check: float = 2) -> MonotonicityProfile:
    """``A(r) = (1/2 + 1/r) mu(B_r) + (1/r) int_{B_r} <k, x - x0> dmu + (1/2) int_{B_r} |k|^2 dmu``.

    Mass inside the ball is clipped exactly; node terms are counted when
    the node lies in the closed ball.
    """
    if p_check != 2:
        raise ValueError("the monotonicity profile is defined for p = 2 only")
    radii = np.asarray(radii, float)
    if radii.ndim != 1 or radii.size == 0 or np.any(radii <= 0) or np.any(np.diff(radii) <= 0):
        raise ValueError("radii must be positive and strictly increasing")
    x0 = np.asarray(center, float)
    dist, radial, sq = _node_data(system, x0)
    order = np.argsort(dist)
    dist, radial, sq = dist[order], radial[order], sq[order]
    cum_radial = np.concatenate([[0.0], np.cumsum(radial)])
    cum_sq = np.concatenate([[0.0], np.cumsum(sq)])
    counts = np.searchsorted(dist, radii, side="right")
    mu = np.array([mass_in_ball(system, x0, r) for r in radii])
    values = (0.5 + 1.0 / radii) * mu + cum_radial[counts] / radii + 0.5 * cum_sq[counts]
    limit = 0.5 * (mass(system) + elastic(system, 2.0))
    tol = 1e-3 * (mass(system) + elastic(system, 2.0))
    drops = np.flatnonzero(values[1:] < values[:-1] - tol)
    violations = [(float(radii[i]), float(radii[i + 1])) for i in drops]
    return MonotonicityProfile(tuple(map(float, x0)), radii, values, limit, tol, violations)


def checks_to_json(verdicts) -> str:
    return json.dumps([v.to_json() for v in verdicts], indent=2)
