"""Planar intersection graph of a curve system, flux/regularity and cusp parity.

``extract_graph`` splits every segment at crossings and at points where another
polyline touches it, snaps nearby split points together, merges coincident
pieces (summing weights into the edge multiplicity) and walks the result into
maximal chains between vertices.

Directional data at a vertex is collected per *pass* of a curve through it.
A smooth pass contributes the pair ``+t, -t`` of outward tangents (``t`` the
bisector of the incoming and outgoing segments); a pass through a corner node
contributes its two one-sided chord tangents. This keeps discretization error
of the chords (of order ``h * curvature``) out of the balance test, which
would otherwise swamp any reasonable angular tolerance.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .curve import corner_nodes
from .varifold import CurveSystem, _point_segment_distance

DEFAULT_SNAP_REL = 1e-6
DEFAULT_ANGULAR_TOL = 1e-3


class GraphAmbiguityError(ValueError):
    """Snapping or direction clustering could not be resolved unambiguously."""


@dataclass
class Edge:
    a: int | None
    b: int | None
    chain: np.ndarray
    multiplicity: int
    tangent_a: np.ndarray | None
    tangent_b: np.ndarray | None

    @property
    def closed_loop(self) -> bool:
        return self.a is None

    @property
    def is_self_loop(self) -> bool:
        return self.a is not None and self.a == self.b

    def midpoint(self) -> np.ndarray:
        """A point on the chain roughly halfway along it."""
        seg = np.hypot(*np.diff(self.chain, axis=0).T)
        s = np.concatenate([[0.0], np.cumsum(seg)])
        half = 0.5 * s[-1]
        k = min(int(np.searchsorted(s, half, side="right")) - 1, len(seg) - 1)
        t = (half - s[k]) / seg[k] if seg[k] > 0 else 0.0
        return self.chain[k] + t * (self.chain[k + 1] - self.chain[k])

    def to_json(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "multiplicity": self.multiplicity,
            "closed_loop": self.closed_loop,
            "nodes": len(self.chain),
            "tangent_a": None if self.tangent_a is None else self.tangent_a.tolist(),
            "tangent_b": None if self.tangent_b is None else self.tangent_b.tolist(),
        }


@dataclass
class PlanarGraph:
    vertices: np.ndarray
    edges: list
    snap_tol: float
    # outward unit tangents (with weights) of every curve pass, per vertex
    ends: dict = field(default_factory=dict)
    corner_vertices: set = field(default_factory=set)

    def incident(self, v: int) -> list[tuple[int, str]]:
        out = []
        for k, e in enumerate(self.edges):
            if e.a == v:
                out.append((k, "a"))
            if e.b == v:
                out.append((k, "b"))
        return out

    def local_density(self, v: int) -> int:
        """Weighted degree (self-loops count twice); twice the varifold density at ``v``."""
        return sum(self.edges[k].multiplicity for k, _ in self.incident(v))


@dataclass
class Direction:
    w: np.ndarray
    rho_plus: int
    rho_minus: int

    @property
    def balanced(self) -> bool:
        return self.rho_plus == self.rho_minus

    def to_json(self) -> dict:
        return {"w": self.w.tolist(), "rho_plus": self.rho_plus, "rho_minus": self.rho_minus}


@dataclass
class VertexDirectionalReport:
    vertex: np.ndarray
    directions: list
    local_density: int

    def to_json(self) -> dict:
        return {
            "vertex": self.vertex.tolist(),
            "local_density": self.local_density,
            "directions": [d.to_json() for d in self.directions],
        }


@dataclass
class RegularityVerdict:
    regular: bool
    offending: list  # (vertex index, point, w, rho+, rho-)
    reports: list

    @property
    def irregular_vertices(self) -> list[int]:
        return sorted({o[0] for o in self.offending})

    def summary(self) -> str:
        if self.regular:
            return "regular: every vertex balances every direction"
        return (f"irregular vertices: {len(self.irregular_vertices)}; "
                "relaxed energy infinite (p-polygon)")

    def to_json(self) -> dict:
        return {
            "regular": self.regular,
            "summary": self.summary(),
            "irregular_vertices": self.irregular_vertices,
            "offending": [
                {"vertex": v, "point": pt.tolist(), "w": w.tolist(), "rho_plus": rp, "rho_minus": rm}
                for v, pt, w, rp, rm in self.offending
            ],
        }


@dataclass
class CuspReport:
    applicable: bool
    halved: list  # halved multiplicity per edge
    odd_vertices: list
    note: str = ""

    @property
    def count(self) -> int:
        return len(self.odd_vertices)

    @property
    def even(self) -> bool:
        return self.count % 2 == 0

    def to_json(self) -> dict:
        return {
            "applicable": self.applicable,
            "halved_multiplicities": self.halved,
            "odd_density_vertices": self.odd_vertices,
            "cusp_count": self.count,
            "even": self.even,
            "note": self.note,
        }


# ---------------------------------------------------------------- extraction

class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)


def default_snap_tol(system: CurveSystem) -> float:
    return DEFAULT_SNAP_REL * system.diameter()


def _split_params(seg_a, seg_b, tol):
    """Split parameters on every segment from pairwise crossings and touchings."""
    a, b = seg_a, seg_b
    d = b - a
    dd = np.einsum("ij,ij->i", d, d)
    n = len(a)
    mids = 0.5 * (a + b)
    reach = float(np.sqrt(dd.max())) + 2 * tol
    splits = defaultdict(list)
    tree = cKDTree(mids)
    for i, j in tree.query_pairs(reach, output_type="ndarray"):
        for s, o in ((i, j), (j, i)):
            # endpoints of o lying on the interior of s
            for q in (a[o], b[o]):
                t = float(np.dot(q - a[s], d[s]) / dd[s])
                if 0.0 < t < 1.0:
                    foot = a[s] + t * d[s]
                    if (np.hypot(*(q - foot)) <= tol and np.hypot(*(q - a[s])) > tol
                            and np.hypot(*(q - b[s])) > tol):
                        splits[s].append((t, q.copy()))
        den = d[i, 0] * d[j, 1] - d[i, 1] * d[j, 0]
        if abs(den) <= 1e-14 * math.sqrt(dd[i] * dd[j]):
            continue
        r = a[j] - a[i]
        t = (r[0] * d[j, 1] - r[1] * d[j, 0]) / den
        u = (r[0] * d[i, 1] - r[1] * d[i, 0]) / den
        if 0.0 < t < 1.0 and 0.0 < u < 1.0:
            x = a[i] + t * d[i]
            if min(np.hypot(*(x - a[i])), np.hypot(*(x - b[i])),
                   np.hypot(*(x - a[j])), np.hypot(*(x - b[j]))) > tol:
                splits[i].append((t, x))
                splits[j].append((u, x))
    return splits, n


def _snap(points: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    uf = _UnionFind(len(points))
    for i, j in cKDTree(points).query_pairs(tol, output_type="ndarray"):
        uf.union(int(i), int(j))
    roots = np.array([uf.find(i) for i in range(len(points))])
    uniq, label = np.unique(roots, return_inverse=True)
    centers = np.zeros((len(uniq), 2))
    np.add.at(centers, label, points)
    centers /= np.bincount(label)[:, None]
    spread = np.hypot(*(points - centers[label]).T)
    bad = np.flatnonzero(spread > 2 * tol)
    if bad.size:
        cluster = sorted(set(label[bad].tolist()))[0]
        members = points[label == cluster]
        raise GraphAmbiguityError(
            f"junction cluster near {centers[cluster].tolist()} spans more than 2x snap_tol: "
            f"{members.tolist()}")
    return centers, label


def extract_graph(system: CurveSystem, snap_tol: float | None = None) -> PlanarGraph:
    tol = default_snap_tol(system) if snap_tol is None else float(snap_tol)
    if not tol > 0:
        raise ValueError("snap_tol must be positive")
    seg_a = np.vstack([c.nodes for c in system])
    seg_b = np.vstack([np.roll(c.nodes, -1, axis=0) for c in system])
    weights = np.concatenate([np.full(len(c), c.weight) for c in system])
    splits, nseg = _split_params(seg_a, seg_b, tol)

    # atomic pieces: each segment cut at its sorted split points
    points, pieces = [], []  # pieces: (point index a, point index b, weight)
    for s in range(nseg):
        cuts = sorted(splits.get(s, []), key=lambda tp: tp[0])
        chain = [seg_a[s]] + [q for _, q in cuts] + [seg_b[s]]
        base = len(points)
        points.extend(chain)
        for k in range(len(chain) - 1):
            pieces.append((base + k, base + k + 1, int(weights[s])))
    centers, label = _snap(np.array(points), tol)

    # merge coincident pieces into atomic edges
    mult = defaultdict(int)
    for pa, pb, w in pieces:
        u, v = int(label[pa]), int(label[pb])
        if u != v:
            mult[(min(u, v), max(u, v))] += w
    adj = defaultdict(list)
    for key in mult:
        adj[key[0]].append(key)
        adj[key[1]].append(key)

    corner_pts = []
    offset = 0
    for c in system:
        corner_pts.extend(c.nodes[corner_nodes(c)])
        offset += len(c)
    corner_clusters = set()
    if corner_pts:
        tree = cKDTree(centers)
        for q in corner_pts:
            corner_clusters.add(int(tree.query(q)[1]))

    def is_vertex(node: int) -> bool:
        inc = adj[node]
        if len(inc) != 2 or node in corner_clusters:
            return True
        return mult[inc[0]] != mult[inc[1]]

    vertex_nodes = sorted(n for n in adj if is_vertex(n))
    vindex = {n: k for k, n in enumerate(vertex_nodes)}
    used = set()
    edges = []

    def walk(start: int, first):
        chain = [start]
        node, key = start, first
        while True:
            used.add(key)
            nxt = key[1] if key[0] == node else key[0]
            chain.append(nxt)
            if nxt in vindex or nxt == start:
                return chain, mult[first]
            node = nxt
            key = adj[node][0] if adj[node][1] == key else adj[node][1]

    for v in vertex_nodes:
        for key in adj[v]:
            if key in used:
                continue
            chain, m = walk(v, key)
            pts = centers[chain]
            edges.append(Edge(vindex[chain[0]], vindex[chain[-1]], pts, m,
                              _unit(pts[1] - pts[0]), _unit(pts[-2] - pts[-1])))
    for key in list(mult):
        if key in used:
            continue
        chain, m = walk(key[0], key)
        edges.append(Edge(None, None, centers[chain], m, None, None))

    vertices = centers[vertex_nodes] if vertex_nodes else np.zeros((0, 2))
    graph = PlanarGraph(vertices, edges, tol,
                        corner_vertices={vindex[n] for n in corner_clusters if n in vindex})
    graph.ends = {v: _pass_ends(system, vertices[v], tol) for v in range(len(vertices))}
    return graph


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.hypot(*v)


def _pass_ends(system: CurveSystem, vertex: np.ndarray, tol: float) -> list:
    """Outward unit tangents (with weights) of every curve pass through ``vertex``."""
    ends = []
    for c in system:
        nodes = c.nodes
        n = len(nodes)
        e = np.roll(nodes, -1, axis=0) - nodes
        near = _point_segment_distance(vertex, nodes, nodes + e) <= 2 * tol
        if not near.any() or near.all():
            continue
        corners = set(corner_nodes(c).tolist())
        start = int(np.flatnonzero(~near)[0])
        order = (np.arange(n) + start) % n
        runs, cur = [], []
        for s in order:
            if near[s]:
                cur.append(int(s))
            elif cur:
                runs.append(cur)
                cur = []
        if cur:
            runs.append(cur)
        for run in runs:
            if len(run) == 1:
                t = _unit(e[run[0]])
                ends += [(t, c.weight), (-t, c.weight)]
                continue
            inner = [(s + 1) % n for s in run[:-1]]
            i = min(inner, key=lambda k: np.hypot(*(nodes[k] - vertex)))
            t_in, t_out = _unit(e[i - 1]), _unit(e[i])
            if i in corners:
                ends += [(t_out, c.weight), (-t_in, c.weight)]
            else:
                t = _unit(t_in + t_out)
                ends += [(t, c.weight), (-t, c.weight)]
    return ends


# ---------------------------------------------------------------- directions

def _cluster_mod_pi(angles: np.ndarray, tol: float) -> list[list[int]]:
    order = np.argsort(angles)
    a = angles[order]
    groups = [[int(order[0])]]
    for k in range(1, len(a)):
        if a[k] - a[k - 1] <= tol:
            groups[-1].append(int(order[k]))
        else:
            groups.append([int(order[k])])
    if len(groups) > 1 and a[0] + math.pi - a[-1] <= tol:
        groups[0] = groups.pop() + groups[0]
    if len(groups) > 1:
        lo = [min(angles[g]) for g in groups]
        hi = [max(angles[g]) for g in groups]
        for k in range(len(groups)):
            nxt = (k + 1) % len(groups)
            gap = (lo[nxt] - hi[k]) % math.pi
            if gap <= 2 * tol:
                raise GraphAmbiguityError(
                    f"tangent directions {hi[k]:.6g} and {lo[nxt]:.6g} (mod pi) lie within "
                    f"2x angular_tol of each other but in different clusters")
    return groups


def directional_densities(graph: PlanarGraph, vertex: int,
                          angular_tol: float = DEFAULT_ANGULAR_TOL) -> VertexDirectionalReport:
    ends = graph.ends[vertex]
    point = graph.vertices[vertex]
    if not ends:
        return VertexDirectionalReport(point, [], graph.local_density(vertex))
    tangents = np.array([t for t, _ in ends])
    weights = np.array([w for _, w in ends])
    angles = np.mod(np.arctan2(tangents[:, 1], tangents[:, 0]), math.pi)
    directions = []
    for group in _cluster_mod_pi(angles, angular_tol):
        doubled = 2 * angles[group]
        mean = 0.5 * math.atan2(np.sin(doubled).sum(), np.cos(doubled).sum()) % math.pi
        w = np.array([math.cos(mean), math.sin(mean)])
        plus = sum(int(weights[k]) for k in group if tangents[k] @ w > 0)
        minus = sum(int(weights[k]) for k in group if tangents[k] @ w <= 0)
        directions.append(Direction(w, plus, minus))
    directions.sort(key=lambda d: math.atan2(d.w[1], d.w[0]))
    return VertexDirectionalReport(point, directions, graph.local_density(vertex))


def is_regular(graph: PlanarGraph, angular_tol: float = DEFAULT_ANGULAR_TOL) -> RegularityVerdict:
    offending, reports = [], []
    for v in range(len(graph.vertices)):
        rep = directional_densities(graph, v, angular_tol)
        reports.append(rep)
        for d in rep.directions:
            if not d.balanced:
                offending.append((v, rep.vertex, d.w, d.rho_plus, d.rho_minus))
    return RegularityVerdict(not offending, offending, reports)


# ---------------------------------------------------------------- cusps

def halve(multiplicity: int, odd: bool) -> int:
    """m(e) = m/2 for even boundary marking, (m-1)/2 for odd."""
    return (multiplicity - 1) // 2 if odd else multiplicity // 2


def odd_density_vertices(n_vertices: int, edges, halved) -> list[int]:
    """Vertices of odd local density in the halved graph (self-loops count twice)."""
    rho = [0] * n_vertices
    for e, m in zip(edges, halved):
        if m == 0 or e.a is None:
            continue
        rho[e.a] += m
        rho[e.b] += m
    return [v for v, r in enumerate(rho) if r % 2 == 1]


def boundary_marking(graph: PlanarGraph, system: CurveSystem) -> list[bool]:
    """Per-edge odd/even flag from the odd-multiplicity field sampled at edge midpoints."""
    from .winding import odd_multiplicity_field

    mids = np.array([e.midpoint() for e in graph.edges])
    odd = odd_multiplicity_field(system, mids, graph.snap_tol * 10)
    return [bool(np.any(np.all(odd == m, axis=1))) for m in mids]


def cusp_parity_check(graph: PlanarGraph, marking=None,
                      angular_tol: float = DEFAULT_ANGULAR_TOL) -> CuspReport:
    if marking is None:
        marking = [e.multiplicity % 2 == 1 for e in graph.edges]
    halved = [halve(e.multiplicity, bool(odd)) for e, odd in zip(graph.edges, marking)]
    odd = odd_density_vertices(len(graph.vertices), graph.edges, halved)
    verdict = is_regular(graph, angular_tol)
    if not verdict.regular:
        return CuspReport(False, halved, odd,
                          "graph is not regular; cusp parity is vacuous (relaxed energy infinite)")
    note = "even number of cusps" if len(odd) % 2 == 0 else "odd cusp count: handshake violated"
    return CuspReport(True, halved, odd, note)


def graph_report(system: CurveSystem, snap_tol: float | None = None,
                 angular_tol: float = DEFAULT_ANGULAR_TOL) -> dict:
    graph = extract_graph(system, snap_tol)
    verdict = is_regular(graph, angular_tol)
    cusps = cusp_parity_check(graph, boundary_marking(graph, system), angular_tol)
    return {
        "snap_tol": graph.snap_tol,
        "angular_tol": angular_tol,
        "vertices": graph.vertices.tolist(),
        "corner_vertices": sorted(graph.corner_vertices),
        "edges": [e.to_json() for e in graph.edges],
        "directional": [r.to_json() for r in verdict.reports],
        "regularity": verdict.to_json(),
        "cusp_parity": cusps.to_json(),
    }
