import math

import numpy as np
import pytest

from varelastic.shapes import circle, ellipse, ex1_system, figbm, figure_eight, figure_eight_drops, generator_suite
from varelastic.varifold import (
    BumpField,
    CurveSystem,
    boundary_atom,
    clipped_length,
    density_bound_check,
    e1,
    first_variation_residual,
    holder_chain_check,
    mass,
    mass_in_ball,
    monotonicity_profile,
    multiplicity_at,
    random_fields,
    system_energy,
)


def test_weight_equals_coincident_copies():
    c = ellipse(2.0, 1.0, 256)
    heavy = CurveSystem([type(c)(c.nodes, 2)])
    twin = CurveSystem([c, c])
    for p in (1.5, 2.0, 3.0):
        a, b = system_energy(heavy, p, 0.3), system_energy(twin, p, 0.3)
        assert a.mass == pytest.approx(b.mass, rel=1e-12)
        assert a.elastic == pytest.approx(b.elastic, rel=1e-12)
        assert a.total == pytest.approx(b.total, rel=1e-12)


def test_figbm_cross_energy_inside_disc():
    # each of the two curves runs a diameter twice: mass 8 inside B_1, no bending
    s = figbm(2048)
    assert mass_in_ball(s, (0, 0), 1.0 - 1e-9) == pytest.approx(8.0, rel=1e-6)


def test_multiplicity():
    s = figbm(1024)
    tol = 1e-6
    assert multiplicity_at(s, (0.5, 0.0), tol) == 2
    assert multiplicity_at(s, (0.0, 0.0), tol) == 4
    fig = CurveSystem([figure_eight(256)])
    assert multiplicity_at(fig, (0.0, 0.0), tol) == 2
    assert multiplicity_at(CurveSystem([circle(1, 64, weight=3)]), (1.0, 0.0), tol) == 3


def test_density_bound_figure_eight():
    fig = CurveSystem([figure_eight(512)])
    verdicts = density_bound_check(fig, 2, [(0.0, 0.0)])
    assert verdicts[0].passed and verdicts[0].lhs == 2
    assert e1(fig) / 2 >= 2


def test_holder_chain_equality_for_circles():
    for p in (1.5, 2.0, 3.0):
        v = holder_chain_check(CurveSystem([circle(1.7, 1024)]), p)
        assert v.passed and v.lhs == pytest.approx(v.rhs, rel=1e-6)
    with pytest.raises(ValueError):
        holder_chain_check(CurveSystem([circle()]), 1.0)


def test_clipped_length():
    a = np.array([[-2.0, 0.0], [0.0, 0.0], [3.0, 3.0]])
    b = np.array([[2.0, 0.0], [0.5, 0.0], [4.0, 4.0]])
    np.testing.assert_allclose(clipped_length(a, b, np.zeros(2), 1.0), [2.0, 0.5, 0.0])


def test_bump_field_jacobian_matches_finite_differences(rng):
    f = BumpField.random(rng, (0.1, -0.2), 0.8)
    x = np.array([[0.3, 0.1], [-0.2, 0.2]])
    h = 1e-6
    num = np.stack([(f.value(x + h * e) - f.value(x - h * e)) / (2 * h) for e in np.eye(2)], axis=-1)
    np.testing.assert_allclose(f.jacobian(x), num, atol=1e-7)


def test_first_variation_converges():
    res = []
    for n in (512, 1024):
        s = CurveSystem([ellipse(2.0, 1.0, n)])
        res.append(first_variation_residual(s, random_fields(s, 5, np.random.default_rng(0))))
    assert res[1] < 1e-2 and res[0] / res[1] >= 1.5


def test_boundary_atom_separates_corners_from_balanced_junctions():
    s = ex1_system(0.1, 1024)
    assert boundary_atom(s, (0, 0), 0.01) < 1e-9
    assert boundary_atom(CurveSystem([s.curves[1]]), (0, 0), 0.01) > 1.0
    assert boundary_atom(CurveSystem([figure_eight(1024)]), (0, 0), 0.01) < 1e-9


def test_monotonicity_circle_profile():
    radii = np.geomspace(0.01, 20, 200)
    prof = monotonicity_profile(CurveSystem([circle(1.0, 2048)]), (0, 0), radii)
    assert np.all(prof.values[radii < 1] == 0)
    np.testing.assert_allclose(prof.values[radii >= 1], 2 * math.pi, rtol=1e-2)
    assert prof.to_csv().splitlines()[0] == "r,A"


def test_monotonicity_suite():
    for name, s in generator_suite(256).items():
        d = s.diameter()
        prof = monotonicity_profile(s, (0.0, 0.0), np.geomspace(1e-3 * d, 10 * d, 200))
        assert prof.monotone, name
        assert prof.values[-1] == pytest.approx(prof.limit_estimate, rel=1e-2), name


def test_monotonicity_rejects_bad_input():
    s = CurveSystem([circle()])
    with pytest.raises(ValueError):
        monotonicity_profile(s, (0, 0), [1.0, 0.5])
    with pytest.raises(ValueError):
        monotonicity_profile(s, (0, 0), [1.0], p_check=3)


def test_drops_and_figure_eight_same_energy():
    one = CurveSystem([figure_eight(512)])
    two = CurveSystem(figure_eight_drops(512))
    assert mass(one) == pytest.approx(mass(two), rel=1e-12)
