import matplotlib

from varelastic.plotting import multiplicity_color, plot_monotonicity, plot_reconstruction, plot_trace, render_system
from varelastic.relaxsolve import SolveOptions, minimize
from varelastic.shapes import circle, ellipse, figbm
from varelastic.varifold import CurveSystem, monotonicity_profile
from varelastic.winding import reconstruct_set


def test_backend_is_headless():
    assert matplotlib.get_backend().lower() == "agg"


def test_colors_by_multiplicity():
    assert multiplicity_color(1) != multiplicity_color(2)
    assert multiplicity_color(9) == multiplicity_color(5)


def test_render_deterministic(tmp_path):
    s = figbm(256)
    render_system(s, tmp_path / "a.svg", title="figbm")
    render_system(s, tmp_path / "b.svg", title="figbm")
    a = (tmp_path / "a.svg").read_bytes()
    assert a == (tmp_path / "b.svg").read_bytes()
    assert b"<dc:date>" not in a
    for color in ("#1f77b4", "#d62728"):
        assert color.encode() in a


def test_other_figures(tmp_path):
    s = CurveSystem([circle(1.0, 128)])
    prof = monotonicity_profile(s, (0, 0), [0.5, 1.0, 2.0])
    plot_monotonicity(prof, tmp_path / "m.svg")
    res = minimize(CurveSystem([ellipse(2, 1, 64)]), options=SolveOptions(max_iters=10))
    plot_trace(res.trace, tmp_path / "t.svg")
    plot_reconstruction(reconstruct_set(s, (-2, -2, 2, 2), (32, 32)), tmp_path / "r.svg")
    for name in ("m.svg", "t.svg", "r.svg"):
        assert (tmp_path / name).read_bytes().startswith(b"<?xml")
