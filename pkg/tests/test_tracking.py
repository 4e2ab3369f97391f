import numpy as np
import pytest

from conftest import KERR_PI, STATIC_S, kerr_branches, ring_distance, static_fields
from twistor_eikonal import Grid, parse
from twistor_eikonal.errors import PreconditionError
from twistor_eikonal.roots import GeneratingEquation, chordal
from twistor_eikonal.tracking import OK, taylor_predict, track_branch


def _track(text, grid, seed_xyz, seed_value, **kw):
    eq = GeneratingEquation(parse(text), {"a": 1})
    return track_branch(eq, grid.points(), grid.neighbours(), grid.index_of(seed_xyz), seed_value, **kw)


@pytest.fixture(scope="module")
def cube():
    return Grid.cube(-3, 3, 0.25)


def test_kerr_branch_matches_closed_form(cube):
    seed = kerr_branches(np.array([[0, 0, 3.0]]))[0][0]
    bf = _track(KERR_PI, cube, (0, 0, 3), seed)
    ok = bf.regular & (ring_distance(cube.points()) > 0.3)
    plus, minus = kerr_branches(cube.points())
    # the continuous branch equals w̄/(z*+r) with r continued through z>0; compare to either
    d = np.minimum(chordal(bf.values, plus), chordal(bf.values, minus))
    assert ok.sum() > 0.9 * len(cube.points())
    assert np.nanmax(d[ok]) <= 1e-10


def test_static_condition_branch(cube):
    eq = parse(STATIC_S).d_total_dG()
    gen = GeneratingEquation(eq, {"a": 1})
    bf = track_branch(gen, cube.points(), cube.neighbours(), cube.index_of((2, 0, 0)), -2j)
    G, _ = static_fields(cube.points())
    filled = bf.filled
    assert filled.mean() > 0.99
    assert np.max(chordal(bf.values[filled], G[filled])) <= 1e-10


def test_seed_not_a_root(cube):
    with pytest.raises(PreconditionError):
        _track(KERR_PI, cube, (2, 0, 0), 5.0)


def test_deterministic(cube):
    seed = kerr_branches(np.array([[0, 0, 3.0]]))[0][0]
    a = _track(KERR_PI, cube, (0, 0, 3), seed)
    b = _track(KERR_PI, cube, (0, 0, 3), seed)
    assert np.array_equal(a.flags, b.flags)
    assert np.array_equal(a.values, b.values, equal_nan=True)


def test_refinement_converges():
    coarse, fine = Grid.cube(-2, 2, 0.4), Grid.cube(-2, 2, 0.2)
    seed = kerr_branches(np.array([[0, 0, 2.0]]))[0][0]
    bc = _track(KERR_PI, coarse, (0, 0, 2), seed)
    bf = _track(KERR_PI, fine, (0, 0, 2), seed)
    idx = np.array([fine.index_of(p[:3]) for p in coarse.points()])
    both = bc.regular & bf.regular[idx]
    assert both.mean() > 0.8
    assert np.max(chordal(bc.values[both], bf.values[idx][both])) <= 1e-10


def test_taylor_predict_reciprocal_chart():
    G, dG = 1e6 + 0j, 1e9 + 0j
    # in the 1/G chart the step stays bounded
    pred = taylor_predict(np.array([G]), np.array([dG]))[0]
    assert np.isfinite(pred)
    small = taylor_predict(np.array([0.1 + 0j]), np.array([0.01 + 0j]))[0]
    assert np.isclose(small, 0.11)


def test_flags_have_names(cube):
    seed = kerr_branches(np.array([[0, 0, 3.0]]))[0][0]
    bf = _track(KERR_PI, cube, (0, 0, 3), seed)
    names = set(bf.flag_names())
    assert "ok" in names
    assert names <= {"ok", "near-branch", "singular", "no-root", "reciprocal", "unreached"}
    assert (bf.flags == OK).sum() > 0
