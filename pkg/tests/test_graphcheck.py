import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from varelastic.graphcheck import (
    Edge,
    GraphAmbiguityError,
    boundary_marking,
    cusp_parity_check,
    directional_densities,
    extract_graph,
    graph_report,
    halve,
    is_regular,
    odd_density_vertices,
)
from varelastic.shapes import circle, ex1_system, figbm, figure_eight, figure_eight_drops, square, two_cusp_system
from varelastic.varifold import CurveSystem


def _summary(graph):
    return len(graph.vertices), sorted(e.multiplicity for e in graph.edges)


def test_figure_eight_graph():
    g = extract_graph(CurveSystem([figure_eight(512)]))
    assert len(g.vertices) == 1
    assert [e.multiplicity for e in g.edges] == [1, 1]
    assert all(e.is_self_loop for e in g.edges)
    report = directional_densities(g, 0)
    assert report.local_density == 4  # weighted degree: two passes, four ends
    assert is_regular(g).regular


def test_drops_same_graph_as_figure_eight():
    a = extract_graph(CurveSystem([figure_eight(512)]))
    b = extract_graph(CurveSystem(figure_eight_drops(512)))
    assert _summary(a) == _summary(b)
    assert is_regular(b).regular


def test_single_drop_is_irregular():
    drop = CurveSystem(figure_eight_drops(512)[:1])
    verdict = is_regular(extract_graph(drop))
    assert not verdict.regular and verdict.irregular_vertices == [0]


def test_figbm_graph():
    s = figbm(1024)
    g = extract_graph(s)
    n, mults = _summary(g)
    assert n == 5
    assert mults == [1, 1, 1, 1, 2, 2, 2, 2]
    center = int(np.argmin(np.hypot(*g.vertices.T)))
    assert g.local_density(center) == 8  # theta = 4 at the center
    assert is_regular(g).regular
    marking = boundary_marking(g, s)
    assert marking == [e.multiplicity == 1 for e in g.edges]
    cusps = cusp_parity_check(g, marking)
    # cross edges halve to 1, petals to 0; the center has even density
    assert center not in cusps.odd_vertices and cusps.even


def test_square_corners():
    verdict = is_regular(extract_graph(CurveSystem([square(2.0, 64)])))
    assert not verdict.regular
    assert verdict.irregular_vertices == [0, 1, 2, 3]
    assert verdict.summary() == "irregular vertices: 4; relaxed energy infinite (p-polygon)"


@pytest.mark.parametrize("theta", [0.05, 0.1, 0.2])
def test_ex1_is_irregular(theta):
    g = extract_graph(ex1_system(theta, 512))
    assert len(g.vertices) == 1
    verdict = is_regular(g)
    assert verdict.irregular_vertices == [0]
    report = verdict.reports[0]
    assert len(report.directions) == 6
    assert all(d.rho_plus + d.rho_minus == 1 for d in report.directions)


def test_two_cusp_instance():
    s = two_cusp_system(256)
    g = extract_graph(s)
    assert is_regular(g).regular
    assert sorted(e.multiplicity for e in g.edges) == [1, 1, 2]
    report = cusp_parity_check(g, boundary_marking(g, s))
    assert report.applicable and report.count == 2


def test_irregular_graph_makes_cusp_check_vacuous():
    g = extract_graph(CurveSystem([square(2.0, 64)]))
    assert not cusp_parity_check(g).applicable


def test_disjoint_circles_have_no_vertices():
    g = extract_graph(CurveSystem([circle(1, 64, (-2, 0)), circle(1, 64, (2, 0))]))
    assert len(g.vertices) == 0 and len(g.edges) == 2 and all(e.closed_loop for e in g.edges)


def test_crossing_circles():
    g = extract_graph(CurveSystem([circle(1, 256, (-0.5, 0)), circle(1, 256, (0.5, 0), weight=2)]))
    assert len(g.vertices) == 2
    assert sorted(e.multiplicity for e in g.edges) == [1, 1, 2, 2]
    assert is_regular(g).regular


@pytest.mark.parametrize("shift", [0, 17, 101])
def test_vertex_set_stability(shift):
    s = figbm(1024)
    ref = _summary(extract_graph(s))
    rolled = CurveSystem([type(c)(np.roll(c.nodes, shift, axis=0), c.weight) for c in s])
    assert _summary(extract_graph(rolled)) == ref
    assert _summary(extract_graph(s.map(lambda c: c.scaled(3.7)))) == ref


def test_snap_ambiguity_detected():
    # nodes closer than the snap tolerance chain-link into one oversized cluster
    with pytest.raises(GraphAmbiguityError):
        extract_graph(CurveSystem([circle(1.0, 64)]), snap_tol=0.2)
    with pytest.raises(ValueError):
        extract_graph(CurveSystem([square(2.0, 64)]), snap_tol=0.0)


def test_graph_report_json_shape():
    rep = graph_report(CurveSystem([figure_eight(256)]))
    assert set(rep) >= {"vertices", "edges", "directional", "regularity", "cusp_parity"}
    assert rep["regularity"]["regular"] is True


def test_halve():
    assert [halve(m, m % 2 == 1) for m in range(6)] == [0, 0, 1, 1, 2, 2]


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 7), st.integers(0, 7), st.integers(1, 6)), max_size=25))
def test_handshake_on_any_halved_multigraph(raw):
    edges = [Edge(a, b, np.zeros((2, 2)), m, None, None) for a, b, m in raw]
    halved = [halve(m, m % 2 == 1) for _, _, m in raw]
    assert len(odd_density_vertices(8, edges, halved)) % 2 == 0
