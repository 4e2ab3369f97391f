import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import static_fields
from twistor_eikonal import eikonal_residual, factorization_check, gauge_invariance_check
from twistor_eikonal.core import PrimedSpinor, UnprimedSpinor
from twistor_eikonal.errors import InsufficientStencilError, InvalidInputError
from twistor_eikonal.verify import eikonal_residuals, fd_gradients, residual_report


def S_static(pts):
    return static_fields(pts)[1]


def coord(i):
    return lambda pts: pts[:, i].astype(complex)


def test_static_residual():
    assert abs(eikonal_residual(S_static, (2, 0, 0, 0))) <= 1e-6
    assert abs(factorization_check(S_static, (2, 0, 0, 0))) <= 1e-6


def test_plane_wave_exact():
    u = lambda p: (p[:, 3] + p[:, 2]).astype(complex)
    assert abs(eikonal_residual(u, (0.3, 0.1, 0.2, 0.4))) <= 1e-9
    assert abs(factorization_check(u, (0.3, 0.1, 0.2, 0.4))) <= 1e-9


def test_non_solution_control():
    assert eikonal_residual(coord(0), (0.3, 0.1, 0.2, 0.4)) == pytest.approx(-1)
    # det = du dv - dw dwb = -(1/2)(1/2)
    assert factorization_check(coord(0), (0.3, 0.1, 0.2, 0.4)) == pytest.approx(-0.25)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=4, max_size=4))
def test_det_is_quarter_of_eikonal(p):
    f = lambda q: np.exp(0.3 * q[:, 0] - 0.7j * q[:, 1]) * (q[:, 2] + 2j * q[:, 3] + 3)
    e = eikonal_residual(f, p)
    d = factorization_check(f, p)
    assert abs(d - e / 4) <= 1e-6 * (1 + abs(e))


def test_report_pass_and_fail():
    ok = residual_report(S_static, (2, 0, 0, 0))
    assert ok.passed and ok.h == 1e-5 and ok.tol == 1e-6
    bad = residual_report(coord(0), (0.3, 0.1, 0.2, 0.4))
    assert not bad.passed


def test_insufficient_stencil():
    f = lambda p: np.where(p[:, 0] > 1.0, np.nan, p[:, 0]).astype(complex)
    with pytest.raises(InsufficientStencilError):
        eikonal_residual(f, (1.0, 0, 0, 0))


def test_vectorised_matches_single(rng):
    pts = np.column_stack([rng.uniform(1.5, 2.5, (10, 3)), np.zeros(10)])
    res, _ = eikonal_residuals(S_static, pts)
    for p, r in zip(pts, res):
        assert r == pytest.approx(eikonal_residual(S_static, p), abs=1e-15)


def test_second_order_convergence():
    f = lambda p: np.exp(0.5 * p[:, 0] + 0.2j * p[:, 2]) + np.sin(p[:, 3] + 0j)
    p = np.array([[0.4, 0.1, -0.3, 0.2]])
    exact = np.array([0.5 * np.exp(0.5 * 0.4 - 0.06j), 0, 0.2j * np.exp(0.5 * 0.4 - 0.06j), np.cos(0.2)])
    errs = []
    for h in (1e-2, 5e-3):
        g, _ = fd_gradients(f, p, h)
        errs.append(np.abs(g[0] - exact).max())
    assert errs[0] / errs[1] == pytest.approx(4, rel=0.05)


def _spinors(rng):
    phi = rng.normal(size=2) + 1j * rng.normal(size=2)
    psi = rng.normal(size=2) + 1j * rng.normal(size=2)
    return phi, psi


def test_gauge_invariance(rng):
    phi, psi = _spinors(rng)
    assert gauge_invariance_check(phi, psi, 2 + 3j) <= 1e-13
    assert gauge_invariance_check(phi, psi, 1) == 0
    scale = np.abs(np.outer(phi, psi)).max()
    assert gauge_invariance_check(phi, psi, 1e8) <= 1e-8 * scale


def test_gauge_invariance_accepts_spinor_types():
    d = gauge_invariance_check(UnprimedSpinor(1 + 1j, 2), PrimedSpinor(0.5, -1j), 0.3 - 2j)
    assert d <= 1e-15


def test_gauge_zero_rejected():
    with pytest.raises(InvalidInputError):
        gauge_invariance_check((1, 2), (3, 4), 0)


@settings(max_examples=200)
@given(st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3, allow_nan=False, allow_infinity=False),
       st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
                min_size=4, max_size=4))
def test_gauge_property(lam, c):
    phi, psi = np.array(c[:2]), np.array(c[2:])
    scale = 1 + np.abs(np.outer(phi, psi)).max()
    assert gauge_invariance_check(phi, psi, lam) <= 1e-13 * scale
