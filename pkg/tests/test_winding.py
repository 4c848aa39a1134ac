import math

import numpy as np
import pytest

from varelastic.curve import DiscreteCurve
from varelastic.shapes import circle, figbm, figure_eight, figure_eight_drops, random_valid
from varelastic.varifold import CurveSystem
from varelastic.winding import (
    BOUNDARY,
    INSIDE,
    OUTSIDE,
    OnCurveError,
    odd_multiplicity_field,
    parity_inside,
    reconstruct_set,
    winding_number,
    winding_number_angle,
    winding_number_ray,
)


def test_circle_winding():
    c = circle(1.0, 256)
    assert winding_number(c, (0, 0)) == 1
    assert winding_number(c, (3, 0)) == 0
    assert winding_number(circle(1.0, 256, clockwise=True), (0, 0)) == -1
    assert winding_number(circle(1.0, 512, turns=2), (0, 0)) == 2


def test_on_curve_rejected():
    c = circle(1.0, 64)
    with pytest.raises(OnCurveError):
        winding_number(c, c.nodes[3])


def test_vertex_on_ray_is_consistent():
    square = DiscreteCurve([[0, 0], [1, 0], [2, 0], [2, 1], [2, 2], [1, 2], [0, 2], [0, 1]])
    # the ray from (1, 1) passes exactly through the node (2, 1)
    assert winding_number(square, (1, 1)) == 1
    assert winding_number(square, (1, 0.5)) == 1
    assert winding_number(square, (3, 1)) == 0


def test_crossing_ray_equivalence(rng):
    for _ in range(1000):
        c = random_valid(rng)
        x0, y0 = c.nodes.min(axis=0)
        x1, y1 = c.nodes.max(axis=0)
        p = rng.uniform([x0 - 0.2, y0 - 0.2], [x1 + 0.2, y1 + 0.2])
        try:
            w = winding_number(c, p)
        except OnCurveError:
            continue
        ang = rng.uniform(0, 2 * math.pi)
        assert winding_number_ray(c, p, (math.cos(ang), math.sin(ang))) == w
        assert round(winding_number_angle(c, p)) == w


def test_parity_figure_eight_and_drops():
    drops = CurveSystem(figure_eight_drops(512))
    assert parity_inside(drops, (0.6, 0.0)) and parity_inside(drops, (-0.6, 0.0))
    assert not parity_inside(drops, (0.0, 0.3))
    fig = CurveSystem([figure_eight(512)])
    assert parity_inside(fig, (0.6, 0.0)) and parity_inside(fig, (-0.6, 0.0))


def test_figbm_parity_per_quadrant():
    s = figbm(1024)
    # the petals sit on the axes outside the disc; inside B_1 the cross carries
    # multiplicity 2, so every off-cross point of the disc is outside E_0
    for ang in (math.pi / 4, 3 * math.pi / 4, -math.pi / 4, -3 * math.pi / 4):
        assert not parity_inside(s, (0.5 * math.cos(ang), 0.5 * math.sin(ang)))
    for x in ((2.0, 0.0), (0.0, 2.0), (-2.0, 0.0), (0.0, -2.0)):
        assert parity_inside(s, x)


def test_disc_area_and_grid_convergence():
    s = CurveSystem([circle(1.0, 2048)])
    errs = []
    for n in (64, 128, 256):
        g = reconstruct_set(s, (-2, -2, 2, 2), (n, n))
        errs.append(abs(g.parity_area() - math.pi))
    assert errs[-1] / math.pi < 0.02
    inside_band = reconstruct_set(s, (-2, -2, 2, 2), (256, 256))
    assert inside_band.area(INSIDE) < math.pi < inside_band.area(INSIDE) + inside_band.area(BOUNDARY)


def test_boundary_band_definition():
    s = CurveSystem([circle(1.0, 512)])
    g = reconstruct_set(s, (-1.5, -1.5, 1.5, 1.5), (60, 60))
    dx, dy = g.cell_size
    xs = -1.5 + (np.arange(60) + 0.5) * dx
    gx, gy = np.meshgrid(xs, xs)
    dist = np.abs(np.hypot(gx, gy) - 1.0)
    diag = math.hypot(dx, dy)
    clear = (dist > diag + 1e-3) | (dist < diag - 1e-3)  # ignore chord-vs-arc ambiguity
    np.testing.assert_array_equal((g.labels == BOUNDARY)[clear], (dist <= diag)[clear])


def test_pgm_and_sidecar(tmp_path):
    s = CurveSystem([circle(1.0, 256)])
    g = reconstruct_set(s, (-2, -1, 2, 1), (40, 20))
    out = tmp_path / "set.pgm"
    g.write(out)
    data = out.read_bytes()
    assert data.startswith(b"P5\n40 20\n255\n")
    pix = np.frombuffer(data[len(b"P5\n40 20\n255\n"):], dtype=np.uint8).reshape(20, 40)
    np.testing.assert_array_equal(pix, g.labels[::-1])
    assert set(np.unique(pix)) <= {INSIDE, BOUNDARY, OUTSIDE}
    assert (tmp_path / "set.json").exists()


def test_threads_give_identical_grid():
    s = figbm(512)
    a = reconstruct_set(s, (-4, -4, 4, 4), (80, 80))
    b = reconstruct_set(s, (-4, -4, 4, 4), (80, 80), threads=4)
    np.testing.assert_array_equal(a.labels, b.labels)


def test_odd_multiplicity_field():
    s = figbm(1024)
    cross = np.array([[0.5, 0.0], [0.0, -0.3], [-0.7, 0.0]])
    assert len(odd_multiplicity_field(s, cross, 1e-6)) == 0
    c = CurveSystem([circle(1.0, 256)])
    assert len(odd_multiplicity_field(c, c.curves[0].nodes[:10], 1e-9)) == 10
