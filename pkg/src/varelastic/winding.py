"""Winding numbers and parity reconstruction of the enclosed set.

The set determined by a curve system is ``{p : |sum_i w_i ind_i(p)| odd}``
together with the curves themselves. Winding numbers are computed by signed
crossing counts along a ray, using the half-open rule ``y_a <= y < y_b`` so
that a ray through a vertex is perturbed consistently (as if the query point
sat infinitesimally above it).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .curve import DiscreteCurve, geom_eps
from .io import write_json
from .varifold import CurveSystem, _point_segment_distance, multiplicity_at

INSIDE, BOUNDARY, OUTSIDE = 255, 128, 0


class OnCurveError(ValueError):
    """The query point is too close to the curve for a winding number to make sense."""


def distance_to_curve(curve: DiscreteCurve, point) -> float:
    a = curve.nodes
    return float(_point_segment_distance(np.asarray(point, float), a, np.roll(a, -1, axis=0)).min())


def distance_to_system(system: CurveSystem, point) -> float:
    return min(distance_to_curve(c, point) for c in system)


def _crossing_count(nodes: np.ndarray, point: np.ndarray) -> int:
    a = nodes - point
    b = np.roll(a, -1, axis=0)
    cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    up = (a[:, 1] <= 0) & (b[:, 1] > 0) & (cross > 0)
    down = (a[:, 1] > 0) & (b[:, 1] <= 0) & (cross < 0)
    return int(np.count_nonzero(up)) - int(np.count_nonzero(down))


def winding_number(curve: DiscreteCurve, point) -> int:
    """Exact winding number of the closed polyline around ``point``."""
    point = np.asarray(point, float)
    eps = geom_eps(curve.nodes)
    if distance_to_curve(curve, point) <= eps:
        raise OnCurveError(f"point {point.tolist()} lies on the curve (within {eps:.3g})")
    return _crossing_count(curve.nodes, point)


def winding_number_ray(curve: DiscreteCurve, point, direction) -> int:
    """Signed crossing count along the ray ``point + s * direction``."""
    d = np.asarray(direction, float)
    ang = math.atan2(d[1], d[0])
    c, s = math.cos(-ang), math.sin(-ang)
    rot = np.array([[c, -s], [s, c]])
    point = np.asarray(point, float)
    return _crossing_count((curve.nodes - point) @ rot.T, np.zeros(2))


def winding_number_angle(curve: DiscreteCurve, point) -> float:
    """Winding number by summing the signed angles subtended by each edge."""
    a = curve.nodes - np.asarray(point, float)
    b = np.roll(a, -1, axis=0)
    cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    dot = np.einsum("ij,ij->i", a, b)
    return float(np.arctan2(cross, dot).sum() / (2 * math.pi))


def parity_inside(system: CurveSystem, point) -> bool:
    point = np.asarray(point, float)
    total = sum(c.weight * winding_number(c, point) for c in system)
    return abs(total) % 2 == 1


@dataclass
class ReconstructionGrid:
    """Cell labels in row-major order, row 0 at ``y0`` (the bottom)."""

    bbox: tuple
    resolution: tuple
    labels: np.ndarray
    odd: np.ndarray | None = None  # raw parity per cell, before the boundary band

    @property
    def cell_size(self) -> tuple[float, float]:
        x0, y0, x1, y1 = self.bbox
        nx, ny = self.resolution
        return (x1 - x0) / nx, (y1 - y0) / ny

    def count(self, label: int) -> int:
        return int(np.count_nonzero(self.labels == label))

    def area(self, label: int = INSIDE) -> float:
        dx, dy = self.cell_size
        return self.count(label) * dx * dy

    def parity_area(self) -> float:
        """Area of the odd-parity cells, boundary band included (the set ``E`` itself)."""
        dx, dy = self.cell_size
        odd = self.odd if self.odd is not None else self.labels == INSIDE
        return int(np.count_nonzero(odd)) * dx * dy

    def pgm_bytes(self) -> bytes:
        nx, ny = self.resolution
        header = f"P5\n{nx} {ny}\n255\n".encode("ascii")
        # PGM rows run top to bottom
        return header + np.ascontiguousarray(self.labels[::-1]).astype(np.uint8).tobytes()

    def sidecar(self) -> dict:
        return {
            "bbox": list(self.bbox),
            "resolution": list(self.resolution),
            "labels": {"inside": INSIDE, "boundary": BOUNDARY, "outside": OUTSIDE},
            "row_order": "top-to-bottom",
            "counts": {
                "inside": self.count(INSIDE),
                "boundary": self.count(BOUNDARY),
                "outside": self.count(OUTSIDE),
            },
            "inside_area": self.area(INSIDE),
            "parity_area": self.parity_area(),
        }

    def write(self, path) -> None:
        path = Path(path)
        path.write_bytes(self.pgm_bytes())
        write_json(path.with_suffix(".json"), self.sidecar())


def _row_winding(nodes: np.ndarray, xs: np.ndarray, y: float) -> np.ndarray:
    a = nodes
    b = np.roll(a, -1, axis=0)
    up = (a[:, 1] <= y) & (b[:, 1] > y)
    down = (a[:, 1] > y) & (b[:, 1] <= y)
    hit = up | down
    if not hit.any():
        return np.zeros(len(xs), dtype=int)
    ah, bh = a[hit], b[hit]
    xc = ah[:, 0] + (y - ah[:, 1]) * (bh[:, 0] - ah[:, 0]) / (bh[:, 1] - ah[:, 1])
    sign = np.where(up[hit], 1, -1)
    order = np.argsort(xc)
    xc, sign = xc[order], sign[order]
    # winding at x = sum of signs of crossings strictly to the right
    suffix = np.concatenate([np.cumsum(sign[::-1])[::-1], [0]])
    return suffix[np.searchsorted(xc, xs, side="right")]


def reconstruct_set(system: CurveSystem, bbox, resolution, threads: int = 1) -> ReconstructionGrid:
    x0, y0, x1, y1 = map(float, bbox)
    nx, ny = map(int, resolution)
    if nx < 1 or ny < 1 or x1 <= x0 or y1 <= y0:
        raise ValueError("bbox must be non-empty and resolution positive")
    dx, dy = (x1 - x0) / nx, (y1 - y0) / ny
    xs = x0 + (np.arange(nx) + 0.5) * dx
    ys = y0 + (np.arange(ny) + 0.5) * dy

    def row(y):
        return sum(c.weight * _row_winding(c.nodes, xs, y) for c in system)

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(threads) as pool:
            total = np.array(list(pool.map(row, ys)))
    else:
        total = np.array([row(y) for y in ys])
    odd = np.abs(total) % 2 == 1
    labels = np.where(odd, INSIDE, OUTSIDE).astype(np.uint8)

    # boundary band: cells whose center is within one cell diagonal of the curves
    diag = math.hypot(dx, dy)
    sx0, sy0, sx1, sy1 = system.bbox()
    ix = np.flatnonzero((xs >= sx0 - diag) & (xs <= sx1 + diag))
    iy = np.flatnonzero((ys >= sy0 - diag) & (ys <= sy1 + diag))
    if ix.size and iy.size:
        gx, gy = np.meshgrid(xs[ix], ys[iy])
        pts = np.column_stack([gx.ravel(), gy.ravel()])
        near = _near_mask(system, pts, diag)
        sub = labels[np.ix_(iy, ix)]
        sub[near.reshape(sub.shape)] = BOUNDARY
        labels[np.ix_(iy, ix)] = sub
    return ReconstructionGrid((x0, y0, x1, y1), (nx, ny), labels, odd)


def _near_mask(system: CurveSystem, pts: np.ndarray, radius: float) -> np.ndarray:
    """Points within ``radius`` of some curve segment, pruned with a k-d tree."""
    from scipy.spatial import cKDTree

    a = np.vstack([c.nodes for c in system])
    b = np.vstack([np.roll(c.nodes, -1, axis=0) for c in system])
    seg_len = np.hypot(*(b - a).T)
    mid = 0.5 * (a + b)
    reach = radius + 0.5 * seg_len.max()
    tree = cKDTree(mid)
    mask = np.zeros(len(pts), dtype=bool)
    for i, cand in enumerate(tree.query_ball_point(pts, reach)):
        if cand:
            idx = np.asarray(cand)
            mask[i] = _point_segment_distance(pts[i], a[idx], b[idx]).min() <= radius
    return mask


def odd_multiplicity_field(system: CurveSystem, samples, tol: float) -> np.ndarray:
    """Samples where the multiplicity is odd: a sampled proxy for the reduced boundary."""
    samples = np.atleast_2d(np.asarray(samples, float))
    keep = [i for i, x in enumerate(samples) if multiplicity_at(system, x, tol) % 2 == 1]
    return samples[keep]
