"""Class II eikonals: shear-free congruences from a constraint Pi = 0.

G(X) is a root of ``Pi(G, wG + u, vG + wb)``; any function S(G, B0, B1)
evaluated on that root is an eikonal.  The singular locus is where the root
is multiple, i.e. where ``Pi`` and ``dPi/dG`` share a root.
"""

from dataclasses import dataclass

import numpy as np

from .base import BranchFieldEstimator, as_genfun
from .core import Event, NullCoords, from_null_coords, null_derivatives, to_null_coords
from .errors import (InsufficientStencilError, InvalidInputError, NotPolynomializableError,
                     PreconditionError, SingularPointError)
from .grid import Grid
from .locus import scan_zero_set
from .roots import GeneratingEquation
from .tracking import JUMP_FACTOR, MAX_JUMP, NEAR_FACTOR
from .validation import check_events, check_params

__all__ = ["KerrCongruence", "Class2Solution", "CongruenceJet", "solve_class2",
           "build_eikonal", "sfc_residual", "congruence_potentials", "discriminant",
           "singular_locus", "fd_gradient"]

SINGULAR_RTOL = 1e-10


@dataclass
class Class2Solution:
    """Fitted Class II field.

    Attributes
    ----------
    Pi : GenFun
    field : BranchedField
    Q_values : ndarray
        ``dPi/dG`` at the selected root (NaN where unfilled).
    S : GenFun or None
        Eikonal builder, if one was attached.
    model : KerrCongruence
        The fitted estimator, used to continue the branch off the grid.
    """

    Pi: object
    field: object
    Q_values: np.ndarray
    S: object = None
    model: object = None


@dataclass(frozen=True)
class CongruenceJet:
    """``G`` with ``k = dG/du`` and ``l = dG/dwb``; then ``dG/dw = Gk``, ``dG/dv = Gl``."""

    G: complex
    k: complex
    l: complex

    @property
    def dG_dw(self):
        return self.G * self.k

    @property
    def dG_dv(self):
        return self.G * self.l


class KerrCongruence(BranchFieldEstimator):
    """Estimator for the spinor field of a shear-free congruence.

    Parameters
    ----------
    generator : str or GenFun
        The constraint Pi(G, B0, B1).
    params : dict, optional
    seed : tuple
        ``(point, value)`` with ``value`` a root of Pi, ``"auto"`` or ``"auto:k"``.
    eikonal : str or GenFun, optional
        S(G, B0, B1) used by :meth:`transform`; defaults to ``G`` itself.
    jump_factor, near_factor, max_jump : float
        Branch-tracking thresholds.

    Attributes
    ----------
    field_ : BranchedField
    Q_values_ : ndarray
    solution_ : Class2Solution
    """

    def __init__(self, generator="G*B0 - B1", params=None, seed=None, eikonal=None,
                 jump_factor=JUMP_FACTOR, near_factor=NEAR_FACTOR, max_jump=MAX_JUMP):
        self.generator = generator
        self.params = params
        self.seed = seed
        self.eikonal = eikonal
        self.jump_factor = jump_factor
        self.near_factor = near_factor
        self.max_jump = max_jump

    def _build_equation(self):
        self.genfun_ = as_genfun(self.generator)
        self.eikonal_ = as_genfun(self.eikonal if self.eikonal is not None else "G")
        self.eikonal_.bind_check(self.params_)
        return GeneratingEquation(self.genfun_, self.params_)

    def _singular(self, idx, G):
        eq = self.equation_
        pts = self._points[idx]
        Q = eq.value(pts, G, eq.f_G)
        return ~(np.abs(Q) > SINGULAR_RTOL * eq.derivative_scale(pts, G))

    def _after_track(self):
        fld = self.field_
        Q = self.equation_.value(fld.points, fld.values, self.equation_.f_G)
        self.Q_values_ = np.where(fld.filled, Q, np.nan)
        self.solution_ = Class2Solution(self.genfun_, fld, self.Q_values_,
                                        self.eikonal_, self)

    def eval_builder(self, S, points, G):
        """``S(G, wG + u, vG + wb)`` with NaN at poles."""
        S = as_genfun(S)
        points = check_events(points)
        env = self.equation_.env(to_null_coords(points), np.asarray(G, dtype=complex))
        env.update(self.params_)
        with np.errstate(all="ignore"):
            val, pole = S.evaluate_env(env, on_pole="mask")
        val = np.broadcast_to(val, (len(points),))
        return np.where(pole | ~np.isfinite(val), np.nan, val)

    def transform(self, X):
        """The attached eikonal S evaluated on the fitted branch at ``X``."""
        G = self.predict(X)
        return self.eval_builder(self.eikonal_, check_events(X, t=self._points[0, 3]), G)

    def eikonal_from(self, point, G0, S=None):
        """Local evaluator of ``S`` (default: the attached eikonal) near ``point``."""
        G_at = self.branch_from(point, G0)
        S = self.eikonal_ if S is None else as_genfun(S)

        def S_at(pts):
            pts = check_events(pts, t=point[3])
            return self.eval_builder(S, pts, G_at(pts))

        return S_at


def solve_class2(Pi, grid, seed, params=None, S=None, **kwargs):
    """Fit a :class:`KerrCongruence` on ``grid`` and return its solution."""
    est = KerrCongruence(Pi, params=params, seed=seed, eikonal=S, **kwargs).fit(grid)
    return est.solution_


def _model(sol):
    model = sol.model if isinstance(sol, Class2Solution) else sol
    if not isinstance(model, KerrCongruence) or not hasattr(model, "field_"):
        raise InvalidInputError("expected a fitted KerrCongruence or its Class2Solution")
    return model


def build_eikonal(sol, S):
    """Values of ``S(G, B0, B1)`` at every fitted point (NaN where unfilled or at poles)."""
    model = _model(sol)
    fld = model.field_
    out = model.eval_builder(S, fld.points, fld.values)
    out[~fld.filled] = np.nan
    return out


def _point(point):
    if isinstance(point, Event):
        return point.as_array()
    if isinstance(point, NullCoords):
        return np.asarray(from_null_coords(point).as_array())
    return check_events(point)[0]


def fd_gradient(field, point, h=1e-4):
    """Cartesian gradient (d/dx, d/dy, d/dz, d/dt) by 4th-order centred differences.

    ``field`` maps ``(N, 4)`` events to complex values.  The step along each
    axis is ``h * (1 + |coordinate|)``.
    """
    p = _point(point)
    hs = h * (1 + np.abs(p))
    offs = np.array([-2, -1, 1, 2])
    pts = np.repeat(p[None], 16, axis=0)
    for ax in range(4):
        pts[4 * ax:4 * ax + 4, ax] += offs * hs[ax]
    vals = np.asarray(field(pts), dtype=complex).reshape(4, 4)
    if not np.all(np.isfinite(vals)):
        raise InsufficientStencilError(f"stencil around {p} touches an undefined point")
    w = np.array([1, -8, 8, -1]) / 12.0
    return vals @ w / hs


def sfc_residual(G_field, point, h=1e-4):
    """Shear-free residuals ``(dG/dw - G dG/du, dG/dv - G dG/dwb)``.

    Parameters
    ----------
    G_field : callable
        ``(N, 4)`` events to G.
    point : array-like or Event
    h : float
        Relative step of the 4th-order centred stencil; steps ``h`` and
        ``h/2`` are Richardson-combined (6th order) so that large ``|G|``
        does not leave truncation error in the residual.
    """
    p = _point(point)
    G = complex(np.asarray(G_field(p[None]))[0])
    if not np.isfinite(G):
        raise InsufficientStencilError(f"G undefined at {p}")
    coarse, fine = fd_gradient(G_field, p, h), fd_gradient(G_field, p, h / 2)
    gx, gy, gz, gt = (16 * fine - coarse) / 15
    du, dv, dw, dwb = null_derivatives(gx, gy, gz, gt)
    return complex(dw - G * du), complex(dv - G * dwb)


def congruence_potentials(sol, point, G=None):
    """Closed-form ``k = -Pi_0/Q`` and ``l = -Pi_1/Q`` at a regular point.

    Raises
    ------
    SingularPointError
        When ``Q = dPi/dG`` vanishes at the point.
    """
    model = _model(sol)
    p = _point(point)
    if G is None:
        G = model.predict(p[None])[0]
    G = complex(G)
    if not np.isfinite(G):
        raise PreconditionError(f"no branch value at {p}")
    eq = model.equation_
    pts = p[None]
    Q = eq.value(pts, [G], eq.f_G)[0]
    if not abs(Q) > SINGULAR_RTOL * eq.derivative_scale(pts, [G])[0]:
        raise SingularPointError(f"dPi/dG vanishes at {p[:3]} (G = {G})")
    P0 = eq.value(pts, [G], eq.f_B0)[0]
    P1 = eq.value(pts, [G], eq.f_B1)[0]
    return CongruenceJet(G, complex(-P0 / Q), complex(-P1 / Q))


def discriminant(coeffs, scale=None):
    """Discriminant of ascending-coefficient polynomials ``(n+1, N)``.

    Computed from the Sylvester matrix of ``p`` and ``p'`` with the leading
    coefficient eliminated, so it stays a polynomial in the coefficients
    (no spurious zeros where the degree drops).  Coefficients are divided
    by ``scale`` (a single constant, default 1) before elimination.
    """
    c = np.asarray(coeffs, dtype=complex)
    nz = np.nonzero(np.any(c != 0, axis=1))[0]
    if nz.size == 0:
        return np.zeros(c.shape[1], dtype=complex)
    c = c[:nz[-1] + 1]
    n = c.shape[0] - 1
    N = c.shape[1]
    if n <= 0:
        return np.ones(N, dtype=complex)
    a = (c / (1.0 if scale is None else scale))[::-1].T                              # (N, n+1) descending
    b = a[:, :-1] * np.arange(n, 0, -1)                  # derivative, descending
    m = 2 * n - 1
    S = np.zeros((N, m, m), dtype=complex)
    for r in range(n - 1):
        S[:, r, r:r + n + 1] = a
    for r in range(n):
        S[:, n - 1 + r, r:r + n] = b
    S[:, n - 1, :] -= n * S[:, 0, :]
    M = S[:, 1:, 1:]
    sign = -1 if (n * (n - 1) // 2) % 2 else 1
    return sign * np.linalg.det(M) if M.shape[1] else np.full(N, sign, dtype=complex)


def singular_locus(Pi, grid, params=None, tol=1e-9):
    """Points of the slice where Pi = 0 has a multiple root in G.

    Parameters
    ----------
    Pi : str or GenFun
        Must be rational in G.
    grid : Grid
        Bounding box, resolution and slice time.
    tol : float
        Acceptance threshold on the normalised discriminant.

    Returns
    -------
    SingularLocus
    """
    if not isinstance(grid, Grid):
        raise InvalidInputError("grid must be a Grid")
    Pi = as_genfun(Pi)
    params = check_params(params)
    Pi.bind_check(params)
    eq = GeneratingEquation(Pi, params)
    if not eq.polynomial:
        raise NotPolynomializableError(f"{Pi} is not rational in G; no resultant available")

    num, _ = eq.coefficients(to_null_coords(grid.points()))
    scale = float(np.abs(num).max()) or 1.0

    def func(pts):
        num, _ = eq.coefficients(to_null_coords(np.asarray(pts, dtype=float)))
        return discriminant(num, scale)

    return scan_zero_set(func, grid, tol=tol)
