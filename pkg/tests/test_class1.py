import numpy as np
import pytest

from conftest import STATIC_S, ring_distance, static_fields
from helpers import fd_grad, random_polynomial_text, separated_root_index
from twistor_eikonal import (Class1Eikonal, Grid, caustic_residual, gradient_spinors,
                             pole_locus, solve_class1)
from twistor_eikonal.core import Event, null_derivatives, to_null_coords
from twistor_eikonal.errors import (DegenerateSolutionError, PoleError, PreconditionError,
                                    SingularPointError)
from twistor_eikonal.locus import hausdorff
from twistor_eikonal.roots import chordal
from twistor_eikonal.verify import eikonal_residuals

P2 = Event(2, 0, 0, 0)


def test_static_values_at_seed(static_ring):
    G = static_ring.predict([[2, 0, 0]])[0]
    S = static_ring.transform([[2, 0, 0]])[0]
    assert abs(G + 2j) < 1e-14
    assert abs(S - 2 / 3) < 1e-14


def test_static_matches_closed_form(static_ring, rng):
    pts = rng.uniform(-3, 3, size=(400, 3))
    pts = pts[ring_distance(pts) > 0.1]
    G_ref, S_ref = static_fields(pts)
    assert np.max(np.abs(static_ring.predict(pts) - G_ref)) <= 1e-10
    assert np.max(np.abs(static_ring.transform(pts) - S_ref)) <= 1e-10


def test_static_near_axis_above_ring(static_ring):
    # on the axis itself dS/dG has no zero (a common factor cancels); G -> 0 is the limit
    for d in (1e-2, 1e-4, 1e-6):
        G_ref, S_ref = static_fields(np.array([[d, 0, 2.0]]))
        assert abs(static_ring.predict([[d, 0, 2]])[0] - G_ref[0]) < 1e-14
        assert abs(static_ring.transform([[d, 0, 2]])[0] - S_ref[0]) < 1e-14
    assert abs(S_ref[0]) < 1e-6


def test_trivial_root_gives_zero_eikonal():
    sol = solve_class1(STATIC_S, Grid.cube(-1, 1, 0.5), ((2, 0, 0), 0), params={"a": 1})
    vals = sol.S_values[sol.field.filled]
    assert vals.size and np.all(np.abs(vals) < 1e-15)


def test_invalid_seed_rejected():
    with pytest.raises(PreconditionError):
        Class1Eikonal(STATIC_S, params={"a": 1}, seed=((2, 0, 0), 1.0)).fit(Grid.cube(-1, 1, 0.5))


def test_condition_holds_on_branch(static_ring):
    eq = static_ring.equation_
    fld = static_ring.field_
    ok = fld.regular
    res = np.abs(eq.value(fld.points[ok], fld.values[ok]))
    assert np.all(res <= 1e-10 * eq.residual_scale(fld.points[ok], fld.values[ok]))


def test_static_solution_is_static(static_ring):
    assert static_ring.is_static()


def test_time_dependent_solution_not_static():
    est = Class1Eikonal("B0 + B1*G - G^2", seed=((0.3, 0.2, 0.1), "auto")).fit(Grid.cube(-1, 1, 0.5))
    assert not est.is_static()


def test_caustic_at_ring_point_is_pole():
    # the ring is where S blows up; D is evaluated only after S
    with pytest.raises(PoleError):
        caustic_residual(STATIC_S, to_null_coords(Event(1, 0, 0, 0)), -1j, {"a": 1})


def test_caustic_off_ring():
    D = caustic_residual(STATIC_S, to_null_coords(P2), -2j, {"a": 1})
    assert abs(D) > 0.01


def test_caustic_of_quadratic_is_constant():
    for p in [(0, 0, 0, 0), (1, 2, 3, 0.5)]:
        D = caustic_residual("3*G^2 + B0", to_null_coords(Event(*p)), 0.4 + 1j)
        assert D == pytest.approx(6)


def test_gradient_spinors_match_finite_differences(static_ring):
    phi, psi = gradient_spinors(STATIC_S, to_null_coords(P2), -2j, {"a": 1})
    assert psi.G == pytest.approx(-2j)
    outer = np.outer([phi.phi0, phi.phi1], [psi.psi0, psi.psi1])
    S_at = static_ring.eikonal_from((2, 0, 0, 0), -2j)
    gx, gy, gz, gt = fd_grad(S_at, (2, 0, 0, 0))
    du, dv, dw, dwb = null_derivatives(gx, gy, gz, gt)
    # row A, column A': [[du, dw], [dwb, dv]]
    fd = np.array([[du, dw], [dwb, dv]])
    assert np.max(np.abs(outer - fd)) <= 1e-5
    assert abs(np.linalg.det(outer)) <= 1e-15


def test_gradient_spinors_constant_generator():
    with pytest.raises((DegenerateSolutionError, SingularPointError)):
        gradient_spinors("3", to_null_coords(P2), 0.0)


def test_gradient_spinors_not_a_root():
    with pytest.raises(PreconditionError):
        gradient_spinors(STATIC_S, to_null_coords(P2), 1.0, {"a": 1})


def test_eikonal_residual_static(static_ring):
    fld = static_ring.field_
    pts = fld.points[fld.regular]
    res, scale = eikonal_residuals(static_ring.transform, pts)
    good = np.abs(res) <= 1e-6 * scale
    assert np.nanmean(good) >= 0.99


def _random_class1(k):
    rng = np.random.default_rng(100 + k)
    text = random_polynomial_text(rng, terms=4)
    seed = (0.45, 0.35, 0.25)
    probe = Class1Eikonal(text, seed=(seed, "auto")).fit(np.array([seed]))
    j = separated_root_index(probe.equation_, seed)
    return Class1Eikonal(text, seed=(seed, f"auto:{j}")).fit(Grid.cube(-1, 1, 0.2))


@pytest.mark.parametrize("k", range(5))
def test_random_generators_solve_the_eikonal(k):
    est = _random_class1(k)
    fld = est.field_
    assert fld.filled.mean() > 0.9
    pts = fld.points[fld.regular]
    res, scale = eikonal_residuals(est.transform, pts)
    # the residual is quadratic in the gradient, so normalise by the squared scale
    assert np.mean(np.abs(res) <= 1e-6 * scale**2) >= 0.95


def test_random_generator_residuals_are_truncation_error():
    est = _random_class1(0)
    fld = est.field_
    pts = fld.points[fld.regular]
    res, scale = eikonal_residuals(est.transform, pts)
    worst = pts[np.argsort(-np.abs(res) / scale)[:10]]
    r1, _ = eikonal_residuals(est.transform, worst, h=1e-4)
    r2, _ = eikonal_residuals(est.transform, worst, h=5e-5)
    ratio = np.abs(r1) / np.abs(r2)
    assert np.all((ratio > 3.5) & (ratio < 4.5))


def test_pole_locus_is_the_ring():
    grid = Grid((-1.5, -1.5, -0.5), (1.5, 1.5, 0.5), 0.05)
    loc = pole_locus(STATIC_S, grid, ((2, 0, 0), -2j), {"a": 1})
    assert len(loc) > 20
    theta = np.linspace(0, 2 * np.pi, 400, endpoint=False)
    ring = np.stack([np.cos(theta), np.sin(theta), 0 * theta], axis=1)
    assert hausdorff(loc.points[:, :3], ring) <= 0.1


def test_pole_points_flagged(static_ring):
    fld = static_ring.field_
    on_ring = ring_distance(fld.points) < 1e-12
    assert on_ring.any()
    assert not np.any(fld.regular[on_ring])


def test_second_branch_differs_from_first():
    grid = Grid.cube(-1, 1, 0.5)
    a = Class1Eikonal(STATIC_S, params={"a": 1}, seed=((1, 1, 1), "auto")).fit(grid)
    b = Class1Eikonal(STATIC_S, params={"a": 1}, seed=((1, 1, 1), "auto:1")).fit(grid)
    both = a.field_.regular & b.field_.regular
    assert np.all(chordal(a.field_.values[both], b.field_.values[both]) > 1e-6)
