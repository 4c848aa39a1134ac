"""Curve and curve-system generators used by the checks, scenarios and CLI.

Most shapes are assembled with :class:`Turtle`, which lays down straight runs
and circular arcs at a target node spacing and keeps arc nodes exactly on
their circles.
"""

from __future__ import annotations

import math

import numpy as np

from .curve import DiscreteCurve, curve_defects
from .varifold import CurveSystem


class Turtle:
    """Polyline builder: ``straight``, ``arc`` (signed angle, left positive) and ``turn``."""

    def __init__(self, start=(0.0, 0.0), heading: float = 0.0, spacing: float = 0.05):
        self.pos = np.array(start, dtype=float)
        self.heading = float(heading)
        self.spacing = float(spacing)
        self.points = [self.pos.copy()]

    def _direction(self, angle=None) -> np.ndarray:
        a = self.heading if angle is None else angle
        return np.array([math.cos(a), math.sin(a)])

    def straight(self, dist: float, segments: int | None = None) -> "Turtle":
        k = segments or max(1, math.ceil(dist / self.spacing - 1e-9))
        start, d = self.pos.copy(), self._direction()
        for j in range(1, k + 1):
            self.points.append(start + d * (dist * j / k))
        self.pos = start + d * dist
        self.points[-1] = self.pos.copy()
        return self

    def arc(self, radius: float, angle: float, segments: int | None = None) -> "Turtle":
        k = segments or max(1, math.ceil(radius * abs(angle) / self.spacing - 1e-9))
        side = 1.0 if angle > 0 else -1.0
        normal = self._direction(self.heading + side * math.pi / 2)
        center = self.pos + radius * normal
        a0 = math.atan2(*(self.pos - center)[::-1])
        for j in range(1, k + 1):
            a = a0 + angle * j / k
            self.points.append(center + radius * np.array([math.cos(a), math.sin(a)]))
        self.pos = self.points[-1].copy()
        self.heading += angle
        return self

    def turn(self, angle: float) -> "Turtle":
        self.heading += angle
        return self

    def petal(self, scale: float = 1.0) -> "Turtle":
        """Teardrop loop leaving and re-entering the current point along the heading axis.

        Made of two S-bends of quarter arcs (radius scale/2) joined by a half
        circle of radius ``scale``; it reaches ``2 * scale`` ahead of the current
        point and turns the heading by -pi.
        """
        r, q = scale, 0.5 * scale
        return (self.arc(q, math.pi / 2).arc(q, -math.pi / 2).arc(r, -math.pi)
                .arc(q, -math.pi / 2).arc(q, math.pi / 2))

    def closed_nodes(self) -> np.ndarray:
        pts = np.array(self.points)
        gap = np.hypot(*(pts[-1] - pts[0]))
        if gap > 1e-9 * max(1.0, np.abs(pts).max()):
            raise ValueError(f"turtle path does not close (gap {gap:.3g})")
        return pts[:-1]

    def curve(self, weight: int = 1) -> DiscreteCurve:
        return DiscreteCurve(self.closed_nodes(), weight)


def circle(r: float = 1.0, n: int = 256, center=(0.0, 0.0), clockwise: bool = False,
           turns: int = 1, phase: float = 0.0, weight: int = 1) -> DiscreteCurve:
    t = phase + 2 * math.pi * turns * np.arange(n) / n
    if clockwise:
        t = -t
    pts = np.column_stack([r * np.cos(t), r * np.sin(t)]) + np.asarray(center, float)
    return DiscreteCurve(pts, weight)


def ellipse(a: float = 2.0, b: float = 1.0, n: int = 256, uniform: bool = False,
            weight: int = 1) -> DiscreteCurve:
    """Ellipse with nodes uniform in the angle parameter (clustered at the ends of the
    major axis) or, with ``uniform=True``, uniform in arclength."""
    if uniform:
        t = np.linspace(0.0, 2 * math.pi, 64 * n, endpoint=False)
        dense = np.column_stack([a * np.cos(t), b * np.sin(t)])
        seg = np.hypot(*(np.roll(dense, -1, axis=0) - dense).T)
        s = np.concatenate([[0.0], np.cumsum(seg)])
        targets = np.arange(n) * s[-1] / n
        t = np.interp(targets, s, np.append(t, 2 * math.pi))
    else:
        t = 2 * math.pi * np.arange(n) / n
    return DiscreteCurve(np.column_stack([a * np.cos(t), b * np.sin(t)]), weight)


def ellipse_arclength_exact(a: float, b: float, t: np.ndarray) -> np.ndarray:
    """Arclength of the ellipse ``(a cos t, b sin t)`` from 0 to each ``t`` by quadrature."""
    from scipy.integrate import quad

    speed = lambda u: math.hypot(a * math.sin(u), b * math.cos(u))  # noqa: E731
    out = np.empty(len(t))
    acc, prev = 0.0, 0.0
    for i, ti in enumerate(t):
        acc += quad(speed, prev, ti, epsabs=1e-12, epsrel=1e-12, limit=200)[0]
        out[i], prev = acc, ti
    return out


def lemniscate_point(t: np.ndarray, a: float = 1.0) -> np.ndarray:
    s, c = np.sin(t), np.cos(t)
    den = 1.0 + s**2
    return np.column_stack([a * c / den, a * s * c / den])


def figure_eight(n: int = 256, a: float = 1.0) -> DiscreteCurve:
    """Bernoulli lemniscate as one immersed curve; the branches cross at right angles
    at the origin, which is a node of both passes when ``n % 4 == 0``."""
    if n % 4:
        raise ValueError("figure_eight needs n divisible by 4")
    t = math.pi / 2 + 2 * math.pi * np.arange(n) / n
    return DiscreteCurve(lemniscate_point(t, a))


def figure_eight_drops(n: int = 256, a: float = 1.0) -> list[DiscreteCurve]:
    """The two lobes of :func:`figure_eight` as separate closed curves with a corner at 0."""
    one = figure_eight(n, a).nodes
    half = n // 2
    return [DiscreteCurve(one[:half]), DiscreteCurve(one[half:])]


def square(s: float = 2.0, n: int = 64, center=(0.0, 0.0)) -> DiscreteCurve:
    if n % 4:
        raise ValueError("square needs n divisible by 4")
    k = n // 4
    start = np.asarray(center, float) - s / 2
    t = Turtle(start, 0.0, s / k)
    for _ in range(4):
        t.straight(s, k).turn(math.pi / 2)
    return t.curve()


def rounded_square(side: float, radius: float, spacing: float, corner=(0.0, 0.0),
                   clockwise: bool = False) -> DiscreteCurve:
    """Square ``[x0, x0+side] x [y0, y0+side]`` with corners replaced by quarter arcs."""
    x0, y0 = corner
    t = Turtle((x0 + radius, y0), 0.0, spacing)
    for _ in range(4):
        t.straight(side - 2 * radius).arc(radius, math.pi / 2)
    c = t.curve()
    return c.reversed() if clockwise else c


def petal_curve(spacing: float = 0.05) -> DiscreteCurve:
    t = Turtle((0.0, 0.0), 0.0, spacing)
    return t.straight(0.5).petal().straight(0.5).curve()


def figbm(n: int = 512, stub: float = 0.0) -> CurveSystem:
    """The four-petal set E0 covered by two curves that each run a diameter twice.

    ``gamma_1`` owns the left and right petals and the horizontal diameter,
    ``gamma_2`` is its rotation by 90 degrees. ``n`` sets the node budget
    per curve (each curve is ``4 + 4 pi`` long). A positive ``stub`` inserts a
    straight run of that length between the cross and each petal.
    """
    h = (4 + 4 * math.pi + 4 * stub) / n
    k = max(2, 2 * math.ceil(1.0 / h))
    t = Turtle((1.0, 0.0), math.pi, h)
    for _ in range(2):
        t.straight(2.0, k)
        if stub:
            t.straight(stub)
        t.petal()
        if stub:
            t.straight(stub)
    g1 = t.curve()
    return CurveSystem([g1, g1.rotated(math.pi / 2)])


def two_cusp_system(n: int = 256) -> CurveSystem:
    """A lens ``|y| <= (1 - x^2)^2`` with cusps at (+-1, 0).

    Each boundary branch closes up through the same ghost arc over the top,
    so the ghost carries multiplicity 2 and each cusp meets two odd edges
    plus one even edge.
    """
    ghost = Turtle((1.0, 0.0), 0.0, (2 * math.pi + 5) / n)
    ghost.arc(1.0, math.pi / 2).arc(2.0, math.pi).arc(1.0, math.pi / 2)
    ghost_pts = np.array(ghost.points)
    m = max(8, math.ceil(4.0 / ghost.spacing))
    x = np.linspace(-1.0, 1.0, m + 1)
    curves = []
    for sign in (1.0, -1.0):
        branch = np.column_stack([x, sign * (1 - x**2) ** 2])
        nodes = np.vstack([branch[:-1], ghost_pts[:-1]])
        curves.append(DiscreteCurve(nodes))
    return CurveSystem(curves)


def _cone_lobe(u_angle: float, v_angle: float, radius: float, spacing: float) -> np.ndarray:
    """Loop leaving the origin along ``u``, going round the circle inscribed in the
    cone between the ``u`` and ``v`` rays, and returning along ``v``."""
    width = math.remainder(v_angle - u_angle, 2 * math.pi)
    half = abs(width) / 2
    dist = radius / math.sin(half)
    stem = dist * math.cos(half)
    turn = math.copysign(math.pi + 2 * half, width)
    t = Turtle((0.0, 0.0), u_angle, spacing)
    t.straight(stem).arc(radius, turn).straight(stem)
    return t.closed_nodes()


def ex1_angles(theta: float) -> tuple[float, float]:
    """Return ``(theta, phi)`` with ``sin(phi) = sin(theta) + sin(2 theta)`` so that the
    six junction tangents sum to zero."""
    return theta, math.asin(math.sin(theta) + math.sin(2 * theta))


def ex1_system(theta: float = 0.1, n: int = 512) -> CurveSystem:
    """Three loops meeting at the origin with outward tangents
    ``e^{-i theta}, e^{-2i theta}, -e^{i theta}, -e^{2i theta}, e^{i phi}, e^{i(pi - phi)}``.

    The tangents sum to zero, so the junction carries no boundary measure,
    yet no direction is balanced. ``n`` is the node budget of the largest loop.
    """
    theta, phi = ex1_angles(theta)
    spacing = 5.0 / n
    thin = 0.6 * math.sin(theta / 2)
    loops = [
        _cone_lobe(phi, math.pi - phi, 0.6, spacing),
        _cone_lobe(-theta, -2 * theta, thin, spacing),
        _cone_lobe(-math.pi + theta, -math.pi + 2 * theta, thin, spacing),
    ]
    return CurveSystem([DiscreteCurve(nodes) for nodes in loops])


# ---------------------------------------------------------------- random curves

def random_convex(rng: np.random.Generator, n: int | None = None) -> DiscreteCurve:
    """Random convex polygon: points on an affinely distorted circle in angular order."""
    n = n or int(rng.integers(8, 200))
    while True:
        t = np.sort(rng.uniform(0, 2 * math.pi, n))
        base = np.column_stack([np.cos(t), np.sin(t)])
        mat = rng.normal(size=(2, 2))
        if abs(np.linalg.det(mat)) < 0.2:
            continue
        nodes = base @ mat.T + rng.normal(size=2) * 3
        if not curve_defects(nodes):
            return DiscreteCurve(nodes)


def random_star(rng: np.random.Generator, n: int | None = None) -> DiscreteCurve:
    n = n or int(rng.integers(8, 200))
    while True:
        t = np.sort(rng.uniform(0, 2 * math.pi, n))
        r = rng.uniform(0.2, 2.0, n)
        nodes = np.column_stack([r * np.cos(t), r * np.sin(t)])
        if not curve_defects(nodes):
            return DiscreteCurve(nodes)


def random_fourier(rng: np.random.Generator, n: int | None = None) -> DiscreteCurve:
    """Closed curve from a few random Fourier modes; may self-intersect or wind several times."""
    n = n or int(rng.integers(32, 300))
    t = 2 * math.pi * np.arange(n) / n
    while True:
        modes = rng.integers(1, 5, size=3) * rng.choice([-1, 1], size=3)
        amps = rng.uniform(0.2, 1.0, size=3)
        ph = rng.uniform(0, 2 * math.pi, size=3)
        z = sum(a * np.exp(1j * (m * t + p)) for a, m, p in zip(amps, modes, ph))
        nodes = np.column_stack([z.real, z.imag])
        if not curve_defects(nodes):
            return DiscreteCurve(nodes)


def random_valid(rng: np.random.Generator) -> DiscreteCurve:
    kind = rng.integers(3)
    return (random_convex, random_star, random_fourier)[kind](rng)


def generator_suite(n: int = 512) -> dict[str, CurveSystem]:
    """Named systems exercised by the check suites."""
    return {
        "circle": CurveSystem([circle(1.0, n)]),
        "circle_r4": CurveSystem([circle(4.0, n)]),
        "ellipse": CurveSystem([ellipse(3.0, 1.0, n)]),
        "figure_eight": CurveSystem([figure_eight(n)]),
        "figure_eight_drops": CurveSystem(figure_eight_drops(n)),
        "two_circles": CurveSystem([circle(1.0, n, (-1.5, 0)), circle(1.0, n, (1.5, 0))]),
        "weighted_circle": CurveSystem([circle(1.0, n, weight=3)]),
        "figbm": figbm(n),
        "square": CurveSystem([square(2.0, n)]),
        "two_cusp": two_cusp_system(n),
    }


# ---------------------------------------------------------------- CLI generator specs

def from_spec(spec: str) -> CurveSystem:
    """Parse ``name:arg,arg`` (``circle:r,n``, ``ellipse:a,b,n``, ``figure-eight:n``,
    ``figbm:n``, ``square:s,n``, ``drops:n``, ``two-cusp:n``, ``ex1:theta,n``)."""
    name, _, rest = spec.partition(":")
    args = [a for a in rest.split(",") if a] if rest else []
    try:
        if name == "circle":
            r, n = (float(args[0]), int(args[1])) if args else (1.0, 2048)
            return CurveSystem([circle(r, n)])
        if name == "ellipse":
            a, b, n = float(args[0]), float(args[1]), int(args[2])
            return CurveSystem([ellipse(a, b, n)])
        if name == "figure-eight":
            return CurveSystem([figure_eight(int(args[0]) if args else 256)])
        if name == "drops":
            return CurveSystem(figure_eight_drops(int(args[0]) if args else 256))
        if name == "figbm":
            return figbm(int(args[0]) if args else 512)
        if name == "square":
            s, n = (float(args[0]), int(args[1])) if args else (2.0, 64)
            return CurveSystem([square(s, n)])
        if name == "two-cusp":
            return two_cusp_system(int(args[0]) if args else 256)
        if name == "ex1":
            th, n = (float(args[0]), int(args[1])) if args else (0.1, 512)
            return ex1_system(th, n)
    except (IndexError, ValueError) as exc:
        raise ValueError(f"bad generator spec {spec!r}: {exc}") from None
    raise ValueError(f"unknown generator {name!r}")
