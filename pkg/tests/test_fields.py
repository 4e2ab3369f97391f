import numpy as np
import pytest

from conftest import KERR_PI, ring_distance
from twistor_eikonal import Grid, KerrCongruence, charge, em_spinor, maxwell_residual, to_vector
from twistor_eikonal.dsl import parse
from twistor_eikonal.errors import SingularPointError
from twistor_eikonal.fields import EM_NORMALIZATION, EMSpinor, em_vector_field


def _kerr(a, point=(0, 0, 3.0), which="auto"):
    return KerrCongruence(KERR_PI, params={"a": a}, seed=(point, which)).fit(
        np.array([point]))


def test_coulomb_axis_exact_a0():
    model = _kerr(0)
    for z in (1.0, 2.0, 4.0):
        F = em_spinor(model, (0, 0, z))
        assert abs(F.F00) < 1e-15 and abs(F.F11) < 1e-15
        assert F.F01 == pytest.approx(1 / (4 * z * z), rel=1e-14)


@pytest.mark.parametrize("z", [1.0, 2.0, 4.0])
def test_coulomb_limit_small_a(z):
    F = em_spinor(_kerr(1e-3), (0, 0, z))
    assert abs(abs(F.F01) * 4 * z * z - 1) <= 1e-6 * 1.01 + 1e-12


def test_coulomb_sphere_magnitude():
    model = KerrCongruence(KERR_PI, params={"a": 1e-3}, seed=((0, 0, 3), "auto")).fit(
        Grid.cube(-3, 3, 0.25))
    th = np.linspace(0.3, 2.8, 7)
    pts = np.stack([2 * np.sin(th), 0 * th, 2 * np.cos(th)], axis=1)
    for p in pts:
        F = to_vector(em_spinor(model, p)).as_array()
        assert np.linalg.norm(F) == pytest.approx(0.25 / 4, rel=1e-3)


def test_ring_point_singular():
    model = _kerr(1)
    with pytest.raises(SingularPointError):
        em_spinor(model, (1, 0, 0), G=-1j)


def test_linear_constraint_has_no_field():
    model = KerrCongruence("2*G + 3*B0 - B1", seed=((0.2, 0.1, 0.3), "auto")).fit(
        np.array([[0.2, 0.1, 0.3]]))
    F = em_spinor(model, (0.2, 0.1, 0.3))
    assert max(abs(F.F00), abs(F.F01), abs(F.F11)) < 1e-14


def test_to_vector_examples():
    z = 1.7
    v = to_vector(EMSpinor(0, 1 / (4 * z * z), 0)).as_array()
    assert np.allclose(v, [0, 0, 1 / (4 * z * z)])
    assert EM_NORMALIZATION == -0.5
    assert np.allclose(to_vector(EMSpinor(0, 0, 0)).as_array(), 0)
    v = to_vector(EMSpinor(0.3 + 1j, 0, 0.3 + 1j)).as_array()
    assert v[0] == 0 and v[2] == 0 and v[1] != 0


def test_field_parts():
    v = to_vector(EMSpinor(1 + 2j, 0.5j, -1))
    assert np.allclose(v.E, v.as_array().real) and np.allclose(v.B, v.as_array().imag)


def _fd_spinor(Pi_text, params, point, G, h=1e-3):
    """The field spinor with every derivative of Pi taken by finite differences."""
    Pi = parse(Pi_text)
    x, y, z, t = point
    u, v, w, wb = t + z, t - z, x - 1j * y, x + 1j * y

    def P(G, B0, B1):
        return complex(Pi.evaluate_env({**params, "G": G, "B0": B0, "B1": B1}))

    st = np.array([-2, -1, 1, 2])
    wt = np.array([1, -8, 8, -1]) / 12

    def d(f, x0, hh):
        return sum(c * f(x0 + s * hh) for s, c in zip(st, wt)) / hh

    def PA(A, G, B0, B1, hh):
        if A == 0:
            return d(lambda b: P(G, b, B1), B0, hh)
        return d(lambda b: P(G, B0, b), B1, hh)

    def Q(G, hh):
        return d(lambda g: P(g, w * g + u, v * g + wb), G, hh)

    B0, B1 = w * G + u, v * G + wb
    out = {}
    for a, b in ((0, 0), (0, 1), (1, 1)):
        if b == 0:
            Pab = d(lambda q: PA(a, G, q, B1, h), B0, h)
        else:
            Pab = d(lambda q: PA(a, G, B0, q, h), B1, h)
        M = lambda g: PA(a, g, w * g + u, v * g + wb, h) * PA(b, g, w * g + u, v * g + wb, h) / Q(g, h)
        out[(a, b)] = (Pab - d(M, G, h)) / Q(G, h)
    return EMSpinor(out[(0, 0)], out[(0, 1)], out[(1, 1)])


@pytest.mark.parametrize("Pi, params, point", [
    (KERR_PI, {"a": 1}, (2.0, 0.5, -0.7, 0.0)),
    ("G*B0 - B1 + 0.3*G^2*B1 + 0.2*B0^2", {}, (0.4, -0.3, 0.8, 0.2)),
    ("B0*B1 - G^3 + 1.5*i*G", {}, (0.7, 0.2, 0.5, 0.0)),
])
def test_symbolic_matches_finite_difference(Pi, params, point):
    model = KerrCongruence(Pi, params=params, seed=(point, "auto")).fit(np.array([point]))
    G = model.predict(np.array([point]))[0]
    F = em_spinor(model, point)
    ref = _fd_spinor(Pi, params, point, G)
    for a, b in ((F.F00, ref.F00), (F.F01, ref.F01), (F.F11, ref.F11)):
        assert abs(a - b) <= 1e-6 * (1 + abs(b))


def test_maxwell_kerr_at_seed(kerr_plus):
    field = em_vector_field(kerr_plus, (2, 0, 0, 0))
    div, curl = maxwell_residual(field, (2, 0, 0, 0))
    scale = np.linalg.norm(field(np.array([[2, 0, 0, 0.0]]))[0])
    assert abs(div) <= 1e-5 * scale and np.max(np.abs(curl)) <= 1e-5 * scale


@pytest.mark.parametrize("Pi", [
    "G*B0 - B1 + 0.3*G^2*B1 + 0.2*B0^2",
    "B0*B1 - G^3 + 1.5*i*G",
    "G^2*B0 - B1 + (0.5 + 0.2*i)*B0*B1",
])
def test_maxwell_time_dependent(Pi, rng):
    pts = np.column_stack([rng.uniform(-1, 1, size=(10, 3)), rng.uniform(0, 1, 10)])
    checked = 0
    for p in pts:
        model = KerrCongruence(Pi, seed=(tuple(p), "auto")).fit(p[None])
        try:
            field = em_vector_field(model, p)
            div, curl = maxwell_residual(field, p)
        except SingularPointError:
            continue
        scale = 1 + np.linalg.norm(field(p[None])[0])
        assert abs(div) <= 1e-5 * scale and np.max(np.abs(curl)) <= 1e-5 * scale
        checked += 1
    assert checked >= 8


def test_coulomb_identity_and_negative_control():
    def coulomb(pts):
        r = pts[:, :3]
        return (0.25 * r / np.linalg.norm(r, axis=1, keepdims=True) ** 3).astype(complex)

    p = (0.7, -1.1, 0.4, 0.0)
    div, curl = maxwell_residual(coulomb, p)
    assert abs(div) < 1e-8 and np.max(np.abs(curl)) < 1e-8

    def perturbed(pts):
        out = coulomb(pts)
        out[:, 0] += 0.01 * pts[:, 0]
        return out

    div, _ = maxwell_residual(perturbed, p)
    assert abs(div - 0.01) < 1e-8


def test_maxwell_random_points_kerr(kerr_plus, rng):
    pts = rng.uniform(-3, 3, size=(60, 3))
    pts = np.column_stack([pts[ring_distance(pts) > 0.2], np.zeros((ring_distance(pts) > 0.2).sum())])
    for p in pts:
        field = em_vector_field(kerr_plus, p)
        div, curl = maxwell_residual(field, p)
        scale = np.linalg.norm(field(p[None])[0])
        assert abs(div) <= 1e-5 * scale and np.max(np.abs(curl)) <= 1e-5 * scale


@pytest.mark.parametrize("which, sign", [("auto", 1), ("auto:1", -1)])
def test_charge_quantum(which, sign):
    res = charge(_kerr(1, which=which), radius=3, order=32)
    assert res.q == pytest.approx(sign * 0.25, abs=1e-3)
    assert res.error < 1e-3


def test_charge_forced_root_zero():
    model = KerrCongruence("G", seed=((0, 0, 3), 0)).fit(np.array([[0, 0, 3.0]]))
    assert abs(charge(model, radius=2, order=16).q) < 1e-15


def test_charge_sphere_through_ring_raises():
    with pytest.raises(SingularPointError):
        charge(_kerr(1), radius=1.0, order=17)
