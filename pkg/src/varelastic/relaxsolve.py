"""Descent on the discrete energy ``lambda * length + E_p`` of a curve system.

The solver works inside a fixed combinatorial class: it moves free nodes,
never changes which curves exist or how they connect. Frozen nodes stay
bit-identical. For ``p < 2`` the turning term ``|phi|^p`` is replaced by the
smooth surrogate ``(phi^2 + delta^2)^(p/2) - delta^p`` everywhere, so the
objective is differentiable; reported energies are always the exact ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from scipy import sparse
from scipy.sparse.linalg import splu

from .curve import DiscreteCurve, _turning as _turning_angles, curve_defects, edge_vectors
from .varifold import CurveSystem, EnergyReport, system_energy

SMOOTH_DELTA = 1e-6


@dataclass(frozen=True)
class ContainmentDisc:
    center: tuple
    radius: float

    def project(self, pts: np.ndarray) -> np.ndarray:
        c = np.asarray(self.center, float)
        d = pts - c
        r = np.hypot(d[:, 0], d[:, 1])
        scale = np.where(r > self.radius, self.radius / np.maximum(r, 1e-300), 1.0)
        return c + d * scale[:, None]

    def contains(self, pts: np.ndarray, slack: float = 1e-12) -> np.ndarray:
        c = np.asarray(self.center, float)
        return np.hypot(*(pts - c).T) <= self.radius * (1 + slack)


@dataclass
class ConstraintSet:
    """Per-curve frozen masks, optionally keeping free nodes inside a disc."""

    frozen: list
    containment: ContainmentDisc | None = None

    @classmethod
    def free(cls, system: CurveSystem) -> "ConstraintSet":
        return cls([np.zeros(len(c), dtype=bool) for c in system])

    @classmethod
    def all_frozen(cls, system: CurveSystem) -> "ConstraintSet":
        return cls([np.ones(len(c), dtype=bool) for c in system])

    @classmethod
    def from_disc(cls, system: CurveSystem, center=(0.0, 0.0), radius: float = 1.0,
                  contain: bool = True) -> "ConstraintSet":
        """Nodes strictly inside the disc are free; everything else is frozen."""
        disc = ContainmentDisc(tuple(map(float, center)), float(radius))
        masks = [~(np.hypot(*(c.nodes - np.asarray(center, float)).T) < radius * (1 - 1e-12))
                 for c in system]
        return cls(masks, disc if contain else None)

    @classmethod
    def from_rectangles(cls, system: CurveSystem, rects) -> "ConstraintSet":
        """Nodes inside any of the rectangles ``(x0, y0, x1, y1)`` are free."""
        masks = []
        for c in system:
            inside = np.zeros(len(c), dtype=bool)
            for x0, y0, x1, y1 in rects:
                x, y = c.nodes.T
                inside |= (x > x0) & (x < x1) & (y > y0) & (y < y1)
            masks.append(~inside)
        return cls(masks)

    def validate(self, system: CurveSystem) -> None:
        if len(self.frozen) != len(system):
            raise ValueError(f"frozen masks for {len(self.frozen)} curves, system has {len(system)}")
        for k, (mask, c) in enumerate(zip(self.frozen, system)):
            if len(mask) != len(c):
                raise ValueError(f"curve {k}: mask has {len(mask)} entries for {len(c)} nodes")
            free = int(np.count_nonzero(~np.asarray(mask)))
            if 0 < free < 4:
                raise ValueError(f"curve {k}: {free} free nodes; need 0 or at least 4")

    def to_json(self) -> dict:
        out = {"frozen": [np.flatnonzero(m).tolist() for m in self.frozen]}
        if self.containment is not None:
            out["containment"] = {"center": list(self.containment.center),
                                  "radius": self.containment.radius}
        return out

    @classmethod
    def from_json(cls, data: dict, system: CurveSystem) -> "ConstraintSet":
        frozen = data.get("frozen")
        if frozen is None:
            raise ValueError("freeze file needs a 'frozen' list (one index list or boolean list per curve)")
        masks = []
        for k, (entry, c) in enumerate(zip(frozen, system)):
            mask = np.zeros(len(c), dtype=bool)
            if entry is True or entry == "all":
                mask[:] = True
            elif entry and all(isinstance(v, bool) for v in entry):
                mask = np.array(entry, dtype=bool)
            elif entry:
                idx = np.asarray(entry, dtype=int)
                if idx.min() < 0 or idx.max() >= len(c):
                    raise ValueError(f"curve {k}: frozen index out of range")
                mask[idx] = True
            masks.append(mask)
        masks += [np.zeros(len(c), dtype=bool) for c in list(system)[len(masks):]]
        disc = data.get("containment")
        containment = ContainmentDisc(tuple(disc["center"]), float(disc["radius"])) if disc else None
        out = cls(masks, containment)
        out.validate(system)
        return out


@dataclass
class SolveOptions:
    p: float = 2.0
    lam: float = 1.0
    max_iters: int = 20000
    grad_tol: float = 1e-8
    armijo_c: float = 1e-4
    max_halvings: int = 20
    resample_every: int = 50
    delta: float = SMOOTH_DELTA

    def __post_init__(self):
        if not self.p > 1:
            raise ValueError(f"the solver needs p > 1, got {self.p}")
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")


@dataclass
class SolveResult:
    system: CurveSystem
    report: EnergyReport
    trace: list  # (iter, energy, grad_norm, step)
    status: str
    iterations: int

    def trace_csv(self) -> str:
        lines = ["iter,energy,grad_norm,step"]
        lines += [f"{i},{e:.17g},{g:.17g},{s:.17g}" for i, e, g, s in self.trace]
        return "\n".join(lines) + "\n"

    def __iter__(self):
        # allows ``system, report, trace = minimize(...)``
        return iter((self.system, self.report, self.trace))


# ---------------------------------------------------------------- energy + gradient

def _turning_terms(phi: np.ndarray, p: float, smooth: bool, delta: float):
    """Turning term g(phi) and its derivative."""
    if smooth:
        base = phi**2 + delta**2
        return base ** (p / 2) - delta**p, p * phi * base ** (p / 2 - 1)
    a = np.abs(phi)
    return a**p, p * a ** (p - 1) * np.sign(phi)


def curve_energy_and_gradient(nodes: np.ndarray, p: float, lam: float,
                              smooth: bool | None = None, delta: float = SMOOTH_DELTA,
                              want_grad: bool = True):
    """Energy ``lam*L + sum g(phi_i)/l_i^(p-1)`` of one closed polyline and its node gradient."""
    if smooth is None:
        smooth = p < 2
    e = edge_vectors(nodes)
    e_prev = np.roll(e, 1, axis=0)
    sq = np.einsum("ij,ij->i", e, e)
    L = np.sqrt(sq)
    cross = e_prev[:, 0] * e[:, 1] - e_prev[:, 1] * e[:, 0]
    dot = np.einsum("ij,ij->i", e_prev, e)
    phi = np.arctan2(cross, dot)
    dual = 0.5 * (L + np.roll(L, 1))
    g, dg = _turning_terms(phi, p, smooth, delta)
    energy = lam * L.sum() + float(np.sum(g / dual ** (p - 1)))
    if not want_grad:
        return energy, None
    A = dg / dual ** (p - 1)             # d f_i / d phi_i
    B = -(p - 1) * g / dual**p           # d f_i / d l_i
    u = e / L[:, None]
    Je = np.column_stack([-e[:, 1], e[:, 0]]) / sq[:, None]
    A_next, B_next = np.roll(A, -1), np.roll(B, -1)
    # edge i is outgoing at node i and incoming at node i+1
    grad_e = (lam * u + (A - A_next)[:, None] * Je + 0.5 * (B + B_next)[:, None] * u)
    grad = np.roll(grad_e, 1, axis=0) - grad_e
    return energy, grad


def discrete_gradient(system: CurveSystem, p: float, lam: float = 1.0) -> list[np.ndarray]:
    """Analytic gradient of the weighted system energy with respect to every node."""
    if not p > 1:
        raise ValueError(f"gradient needs p > 1, got {p}")
    return [c.weight * curve_energy_and_gradient(c.nodes, p, lam)[1] for c in system]


def smoothed_energy(system: CurveSystem, p: float, lam: float = 1.0) -> float:
    return sum(c.weight * curve_energy_and_gradient(c.nodes, p, lam, want_grad=False)[0]
               for c in system)


# ---------------------------------------------------------------- solver

class _LocalTerms:
    """The energy terms of one curve that depend on its free nodes.

    Turning terms at nodes adjacent to a free node and length terms of edges
    touching one; everything else is constant during the solve and enters
    as an offset.
    """

    def __init__(self, x: np.ndarray, free: np.ndarray):
        n = len(x)
        self.n = n
        self.free = free
        near = free | np.roll(free, 1) | np.roll(free, -1)
        self.turn = np.flatnonzero(near)                      # nodes with affected turning
        self.edges = np.flatnonzero(free | np.roll(free, -1))  # edge j joins j and j+1
        self.prev = (self.turn - 1) % n
        self.next = (self.turn + 1) % n
        self.edge_next = (self.edges + 1) % n
        self.eps = 1e-9 * float(np.hypot(*np.ptp(x, axis=0)))

    def evaluate(self, x, p, lam, smooth, delta, want_grad):
        i, ip, inx = self.turn, self.prev, self.next
        e_in = x[i] - x[ip]
        e_out = x[inx] - x[i]
        sq_in = np.einsum("ij,ij->i", e_in, e_in)
        sq_out = np.einsum("ij,ij->i", e_out, e_out)
        L_in, L_out = np.sqrt(sq_in), np.sqrt(sq_out)
        cross = e_in[:, 0] * e_out[:, 1] - e_in[:, 1] * e_out[:, 0]
        phi = np.arctan2(cross, np.einsum("ij,ij->i", e_in, e_out))
        dual = 0.5 * (L_in + L_out)
        g, dg = _turning_terms(phi, p, smooth, delta)
        e = x[self.edge_next] - x[self.edges]
        L = np.hypot(e[:, 0], e[:, 1])
        energy = lam * float(L.sum()) + float(np.sum(g / dual ** (p - 1)))
        if not want_grad:
            return energy, None, (L, phi)
        A = dg / dual ** (p - 1)
        B = -(p - 1) * g / dual**p
        d_out = (A / sq_out)[:, None] * np.column_stack([-e_out[:, 1], e_out[:, 0]]) \
            + (0.5 * B / L_out)[:, None] * e_out
        d_in = -(A / sq_in)[:, None] * np.column_stack([-e_in[:, 1], e_in[:, 0]]) \
            + (0.5 * B / L_in)[:, None] * e_in
        grad = np.zeros_like(x)
        np.add.at(grad, inx, d_out)
        np.add.at(grad, i, d_in - d_out)
        np.add.at(grad, ip, -d_in)
        u = lam * e / L[:, None]
        np.add.at(grad, self.edge_next, u)
        np.add.at(grad, self.edges, -u)
        return energy, grad, (L, phi)

    def valid(self, lengths, phi) -> bool:
        from .curve import ANGLE_EPS

        return bool(lengths.min() > self.eps and np.abs(phi).max() < math.pi - ANGLE_EPS)


class _State:
    """Free coordinates of a system and the energy terms that depend on them."""

    def __init__(self, system: CurveSystem, constraints: ConstraintSet, options: SolveOptions):
        self.weights = [c.weight for c in system]
        self.nodes = [np.array(c.nodes) for c in system]
        self.free = [~np.asarray(m, dtype=bool) for m in constraints.frozen]
        self.active = [k for k, f in enumerate(self.free) if f.any()]
        self.opts = options
        self.disc = constraints.containment
        self.smooth = options.p < 2
        self.local = {k: _LocalTerms(self.nodes[k], self.free[k]) for k in self.active}
        full = sum(w * curve_energy_and_gradient(x, options.p, options.lam, self.smooth,
                                                 options.delta, want_grad=False)[0]
                   for w, x in zip(self.weights, self.nodes))
        self.offset = full - self._local_energy(self.nodes)[0]

    def _local_energy(self, nodes):
        total, ok = 0.0, True
        for k in self.active:
            e, _, (L, phi) = self.local[k].evaluate(nodes[k], self.opts.p, self.opts.lam,
                                                    self.smooth, self.opts.delta, False)
            total += self.weights[k] * e
            ok = ok and self.local[k].valid(L, phi)
        return total, ok

    def energy(self, nodes):
        """Total (smoothed) energy and whether the moved parts are still valid curves."""
        e, ok = self._local_energy(nodes)
        return self.offset + e, ok

    def energy_grad(self, nodes):
        total, grads = self.offset, {}
        for k in self.active:
            e, g, _ = self.local[k].evaluate(nodes[k], self.opts.p, self.opts.lam,
                                             self.smooth, self.opts.delta, True)
            total += self.weights[k] * e
            grads[k] = self.weights[k] * g * self.free[k][:, None]
        return total, grads

    def build_metric(self, nodes) -> None:
        """Banded Sobolev-type metric per active curve, restricted to its free nodes.

        ``M = c_p D4 / h^(p+1) + lam D2 / h + mu I`` mirrors the leading terms of
        the energy Hessian (bending ~ fourth differences, length ~ second
        differences), so descent steps are not throttled by the stiffest
        high-frequency modes.
        """
        p, lam = self.opts.p, self.opts.lam
        self.metric = {}
        for k in self.active:
            x = nodes[k]
            n = len(x)
            h = float(np.hypot(*edge_vectors(x).T).mean())
            span = float(np.hypot(*np.ptp(x, axis=0)))
            phi_bar = max(float(np.abs(_turning_angles(x)).mean()), 1e-3)
            f = np.flatnonzero(self.free[k])
            # cyclic second differences, restricted to free rows/columns
            rows = np.concatenate([np.arange(n)] * 3)
            cols = np.concatenate([np.arange(n), (np.arange(n) + 1) % n, (np.arange(n) - 1) % n])
            vals = np.concatenate([2 * np.ones(n), -np.ones(n), -np.ones(n)])
            d2 = sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))
            bend = 0.5 * p * (p - 1) * phi_bar ** (p - 2) / h ** (p + 1)
            mu = h * (1 + lam) / (0.5 * span) ** 2
            M = self.weights[k] * (bend * (d2 @ d2) + (lam / h) * d2 + mu * sparse.identity(n))
            Mf = M[f][:, f].tocsc()
            self.metric[k] = (Mf, splu(Mf))

    def _bound(self, x: np.ndarray, f: np.ndarray):
        """Free nodes on the containment circle and their outward normals."""
        c = np.asarray(self.disc.center, float)
        d = x[f] - c
        r = np.hypot(d[:, 0], d[:, 1])
        on = r >= self.disc.radius * (1 - 1e-9)
        normals = np.zeros_like(d)
        normals[on] = d[on] / r[on, None]
        return on, normals

    def direction(self, nodes, grads):
        dirs = {}
        for k in self.active:
            f = self.free[k]
            g = np.ascontiguousarray(grads[k][f])
            if self.disc is not None:
                on, nrm = self._bound(nodes[k], f)
                gn = np.einsum("ij,ij->i", g, nrm)
                push = on & (gn < 0)  # descent would leave the disc here
                g[push] -= gn[push, None] * nrm[push]
            dv = -self.metric[k][1].solve(g)
            if self.disc is not None:
                dn = np.einsum("ij,ij->i", dv, nrm)
                out = on & (dn > 0)
                dv[out] -= dn[out, None] * nrm[out]
            d = np.zeros_like(grads[k])
            d[f] = dv
            dirs[k] = d
        return dirs

    def metric_dot(self, s: dict) -> float:
        return sum(float(np.sum(s[k][self.free[k]] * (self.metric[k][0] @ s[k][self.free[k]])))
                   for k in self.active)

    def step(self, nodes, dirs, alpha):
        out = list(nodes)
        for k in self.active:
            y = nodes[k].copy()
            f = self.free[k]
            y[f] = nodes[k][f] + alpha * dirs[k][f]
            if self.disc is not None:
                y[f] = self.disc.project(y[f])
            out[k] = y
        return out

    def projected_norm(self, nodes, grads) -> float:
        """Infinity norm of the masked gradient, projected onto the containment disc."""
        if not self.active:
            return 0.0
        moved = self.step(nodes, {k: -grads[k] for k in self.active}, 1.0)
        return max(float(np.abs(nodes[k] - moved[k]).max()) for k in self.active)

    def max_step(self, nodes, dirs) -> float:
        """Largest alpha keeping every free node within half the shortest edge."""
        h_min = min(float(self.local[k].evaluate(nodes[k], 2.0, 1.0, False, 0.0, False)[2][0].min())
                    for k in self.active)
        d_max = max(float(np.abs(dirs[k]).max()) for k in self.active)
        return 0.5 * h_min / max(d_max, 1e-300)


def _resample_free_runs(x: np.ndarray, free: np.ndarray) -> np.ndarray:
    """Redistribute each maximal run of free nodes evenly along the polyline it spans."""
    n = len(x)
    closed = np.vstack([x, x[:1]])
    seg = np.hypot(*np.diff(closed, axis=0).T)
    if free.all():
        s = np.concatenate([[0.0], np.cumsum(seg)])
        t = np.arange(n) * (s[-1] / n)
        return np.column_stack([np.interp(t, s, closed[:, 0]), np.interp(t, s, closed[:, 1])])
    y = x.copy()
    start = int(np.flatnonzero(~free)[0])
    k = 0
    while k < n:
        if free[(start + k) % n]:
            run = []
            while free[(start + k) % n]:
                run.append((start + k) % n)
                k += 1
            idx = [(run[0] - 1) % n] + run + [(run[-1] + 1) % n]
            pts = x[idx]
            s = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(pts, axis=0).T))])
            t = np.linspace(0.0, s[-1], len(idx))[1:-1]
            y[run] = np.column_stack([np.interp(t, s, pts[:, 0]), np.interp(t, s, pts[:, 1])])
        else:
            k += 1
    return y


def _line_search(state: _State, nodes, energy, grads, dirs, alpha, options):
    for _ in range(options.max_halvings):
        trial = state.step(nodes, dirs, alpha)
        e_trial, ok = state.energy(trial)
        if ok:
            decrease = sum(float(np.sum(grads[k] * (nodes[k] - trial[k]))) for k in state.active)
            if e_trial <= energy - options.armijo_c * max(decrease, 0.0) and e_trial <= energy:
                return trial, alpha
        alpha *= 0.5
    return None, alpha


def minimize(system: CurveSystem, constraints: ConstraintSet | None = None,
             options: SolveOptions | None = None) -> SolveResult:
    """Armijo-backtracked descent on the free nodes.

    The direction is the gradient in a banded Sobolev-type metric (see
    ``_State.build_metric``); trial steps are Barzilai-Borwein in that metric,
    capped so no node moves more than half the shortest edge. If backtracking
    along that direction fails, the plain (projected) negative gradient is
    tried before giving up.
    """
    options = options or SolveOptions()
    constraints = constraints or ConstraintSet.free(system)
    constraints.validate(system)
    state = _State(system, constraints, options)
    nodes = state.nodes
    trace = []

    def finish(nodes, status, iters):
        out = CurveSystem([DiscreteCurve(x, w) if k in state.active else c
                           for k, (x, w, c) in enumerate(zip(nodes, state.weights, system))])
        return SolveResult(out, system_energy(out, options.p, options.lam), trace, status, iters)

    if not state.active:
        trace.append((0, state.offset, 0.0, 0.0))
        return finish(nodes, "frozen", 0)

    energy, grads = state.energy_grad(nodes)
    gnorm = state.projected_norm(nodes, grads)
    trace.append((0, energy, gnorm, 0.0))
    state.build_metric(nodes)
    dirs = state.direction(nodes, grads)
    alpha = 1.0
    prev = None
    status = "max_iters"
    it = 0
    while it < options.max_iters:
        if gnorm < options.grad_tol:
            status = "converged"
            break
        it += 1
        if prev is not None:
            s = {k: nodes[k] - prev[0][k] for k in state.active}
            sy = sum(float(np.sum(s[k] * (grads[k] - prev[1][k]))) for k in state.active)
            alpha = state.metric_dot(s) / sy if sy > 0 else 2 * alpha
        alpha = min(alpha, state.max_step(nodes, dirs))
        trial, alpha = _line_search(state, nodes, energy, grads, dirs, alpha, options)
        if trial is None:
            plain = {k: -grads[k] for k in state.active}
            trial, alpha = _line_search(state, nodes, energy, grads, plain,
                                        state.max_step(nodes, plain), options)
        if trial is None:
            # a predicted decrease at the rounding level of the energy means
            # the iterate is as good as floating point can tell apart
            alpha0 = state.max_step(nodes, plain)
            predicted = alpha0 * sum(float(np.sum(grads[k] ** 2)) for k in state.active)
            if predicted <= 1e3 * np.finfo(float).eps * max(1.0, abs(energy)):
                status = "stalled: energy decrease below rounding"
            else:
                status = "WARN: line search failed after %d halvings" % options.max_halvings
            it -= 1
            break
        prev = (nodes, grads)
        nodes = trial
        energy, grads = state.energy_grad(nodes)
        gnorm = state.projected_norm(nodes, grads)
        trace.append((it, energy, gnorm, alpha))
        if options.resample_every and it % options.resample_every == 0:
            candidate = list(nodes)
            for k in state.active:
                candidate[k] = _resample_free_runs(nodes[k], state.free[k])
                if state.disc is not None:
                    f = state.free[k]
                    candidate[k][f] = state.disc.project(candidate[k][f])
            e_c, ok = state.energy(candidate)
            if ok and e_c <= energy:
                nodes = candidate
                energy, grads = state.energy_grad(nodes)
                gnorm = state.projected_norm(nodes, grads)
                trace[-1] = (it, energy, gnorm, alpha)
            state.build_metric(nodes)
            prev = None
        dirs = state.direction(nodes, grads)
    return finish(nodes, status, it)


def circle_optimum(p: float, lam: float) -> tuple[float, float]:
    """Radius and energy minimizing ``2 pi lam r + 2 pi r^(1-p)`` over circles."""
    r = ((p - 1) / lam) ** (1 / p)
    return r, 2 * math.pi * lam * r + 2 * math.pi * r ** (1 - p)


def mean_radius(curve: DiscreteCurve) -> float:
    c = curve.nodes.mean(axis=0)
    return float(np.hypot(*(curve.nodes - c).T).mean())
