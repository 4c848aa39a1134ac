import math

import numpy as np
import pytest

from varelastic.curve import length, total_absolute_curvature, turning_number
from varelastic.shapes import (
    Turtle,
    ellipse,
    ellipse_arclength_exact,
    ex1_angles,
    figbm,
    figure_eight,
    figure_eight_drops,
    from_spec,
    generator_suite,
    square,
    two_cusp_system,
)


def test_turtle_closes_square():
    t = Turtle((0.0, 0.0), 0.0, 0.1)
    for _ in range(4):
        t.straight(1.0).turn(math.pi / 2)
    c = t.curve()
    assert length(c) == pytest.approx(4.0)


def test_figbm_geometry():
    s = figbm(512)
    assert len(s) == 2
    x0, y0, x1, y1 = s.bbox()
    assert (x0, y0, x1, y1) == pytest.approx((-3.0, -3.0, 3.0, 3.0), abs=1e-9)
    assert turning_number(s.curves[0]).value == -1  # two petals, each a -pi heading change


def test_figure_eight_and_drops():
    fig = figure_eight(256)
    drops = figure_eight_drops(256)
    assert sum(length(d) for d in drops) == pytest.approx(length(fig), rel=1e-12)
    with pytest.raises(ValueError):
        figure_eight(30)


def test_square_corners():
    assert total_absolute_curvature(square(2.0, 64)) == pytest.approx(2 * math.pi)


def test_ex1_tangents_cancel():
    theta, phi = ex1_angles(0.1)
    tangents = [-theta, -2 * theta, math.pi + theta, math.pi + 2 * theta, phi, math.pi - phi]
    total = sum(np.array([math.cos(a), math.sin(a)]) for a in tangents)
    assert np.hypot(*total) < 1e-12


def test_uniform_ellipse_is_equally_spaced():
    c = ellipse(2.0, 1.0, 256, uniform=True)
    assert np.ptp(c.edge_lengths) / c.edge_lengths.mean() < 1e-3
    s = ellipse_arclength_exact(2.0, 1.0, np.array([0.0, 2 * math.pi]))
    assert s[-1] == pytest.approx(9.688448220547675, rel=1e-9)


def test_two_cusp_system_weights():
    s = two_cusp_system(128)
    assert len(s) == 2


def test_from_spec():
    assert len(from_spec("circle:1,64").curves[0]) == 64
    assert len(from_spec("ellipse:2,1,100").curves[0]) == 100
    assert len(from_spec("figbm:256")) == 2
    assert len(from_spec("square:2,32").curves[0]) == 32
    assert len(from_spec("figure-eight:64").curves[0]) == 64
    for bad in ("circle:x,3", "nonsense:1", "ellipse:1"):
        with pytest.raises(ValueError):
            from_spec(bad)


def test_generator_suite_names():
    assert {"circle", "ellipse", "figure_eight", "figbm", "square", "two_cusp"} <= set(generator_suite(128))
