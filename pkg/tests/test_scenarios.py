import math

import numpy as np
import pytest

from varelastic.scenarios import (
    Candidate,
    bm_arc_routing,
    connection_energies,
    free_masks,
    inpaint_cross,
    inpaint_detour_cross,
    inpaint_detour_same,
    inpaint_scenario,
    return_loop,
)
from varelastic.shapes import figbm
from varelastic.winding import parity_inside


def test_cross_connections_are_straight_diameters():
    s = inpaint_cross(32)
    for lam in (0.05, 0.2, 1.0):
        conns = connection_energies(s, 2.0, lam)
        assert len(conns) == 2
        np.testing.assert_allclose(conns, 2 * lam, rtol=1e-9)


def test_figbm_cross_energy_is_eight():
    n = round(32 * (4 + 4 * math.pi))
    conns = connection_energies(figbm(n, stub=0.5), 2.0, 1.0)
    assert len(conns) == 4
    assert sum(conns) == pytest.approx(8.0, rel=1e-9)


def test_candidates_complete_the_same_datum():
    # every candidate encloses the two squares far from the disc
    for build in (inpaint_cross, inpaint_detour_same, inpaint_detour_cross):
        s = build(16)
        assert parity_inside(s, (5.0, 5.0)) and parity_inside(s, (-5.0, -5.0))
        assert not parity_inside(s, (5.0, -5.0))


def test_free_masks_select_disc_interior():
    s = inpaint_detour_same(16)
    masks = free_masks(s)
    for c, m in zip(s, masks):
        assert np.all(np.hypot(*c.nodes[m].T) < 1.0)
        assert np.all(np.hypot(*c.nodes[~m].T) >= 1.0 - 1e-9)


def test_return_and_arc_candidates_cost_at_least_the_bounds_before_optimizing():
    assert min(connection_energies(return_loop(16), 2.0, 1.0)) > 2 * math.pi
    # quarter circles of radius 1 cost pi up to an O(h) discretization deficit
    assert min(connection_energies(bm_arc_routing(16), 2.0, 1.0)) > 0.98 * math.pi


def test_completion_energy_scales_single_connection():
    c = Candidate("x", "", None, connections=[1.5], connections_needed=4)
    assert c.completion_energy == 6.0
    assert Candidate("y", "", None, connections=[1.0, 2.0], connections_needed=2).completion_energy == 3.0


def test_inpaint_short_run_reports():
    rep = inpaint_scenario(0.2, res=16, iters=50)
    data = rep.to_json()
    assert data["winner"] == "cross"
    assert [c["name"] for c in data["candidates"]] == ["cross", "detour_same", "detour_cross", "return"]
    assert data["checks"][0]["pass"]


def test_inpaint_rejects_bad_lambda():
    with pytest.raises(ValueError):
        inpaint_scenario(2.0)
