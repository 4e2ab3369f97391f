"""Electromagnetic field of a shear-free congruence and its charge.

For a constraint Pi(G, B0, B1) the symmetric spinor

    F_AB = (1/Q) [Pi_AB - d/dG (Pi_A Pi_B / Q)],   Q = dPi/dG,

is built symbolically and mapped to the complex vector ``F = E + iB``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .class2 import SINGULAR_RTOL, Class2Solution, KerrCongruence, _model, _point
from .core import to_null_coords
from .dsl import GenFun
from .errors import InsufficientStencilError, InvalidInputError, SingularPointError
from .tracking import track_branch
from .validation import check_events

__all__ = ["EMSpinor", "ComplexFieldVector", "FluxResult", "SpinorFieldModel",
           "em_spinor", "to_vector", "em_vector_field", "maxwell_residual", "charge",
           "EM_NORMALIZATION"]

EM_NORMALIZATION = -0.5


@dataclass(frozen=True)
class EMSpinor:
    """Components ``F00, F01, F11`` of a symmetric spinor (scalars or arrays)."""

    F00: complex
    F01: complex
    F11: complex


@dataclass(frozen=True)
class ComplexFieldVector:
    """Self-dual field ``F = E + iB``."""

    Fx: complex
    Fy: complex
    Fz: complex

    def as_array(self):
        return np.stack(np.broadcast_arrays(self.Fx, self.Fy, self.Fz), axis=-1)

    @property
    def E(self):
        return np.real(self.as_array())

    @property
    def B(self):
        return np.imag(self.as_array())


@dataclass(frozen=True)
class FluxResult:
    """Charge from the electric flux through a sphere.

    Attributes
    ----------
    q : float
    radius : float
    order : int
        Gauss-Legendre nodes in cos(theta); ``2 * order`` azimuthal nodes.
    error : float
        ``|q(2 order) - q(order)|``.
    """

    q: float
    radius: float
    order: int
    error: float


class SpinorFieldModel:
    """Symbolic pieces of the field spinor for one constraint.

    Parameters
    ----------
    Pi : GenFun
    params : dict
    """

    def __init__(self, Pi, params):
        self.Pi = Pi
        self.params = dict(params)
        self.Q = Pi.d_total_dG()
        P = [Pi.d_partial("B0"), Pi.d_partial("B1")]
        self.P = P
        self.F = {}
        for a, b in ((0, 0), (0, 1), (1, 1)):
            Pab = P[a].d_partial(("B0", "B1")[b])
            corr = (P[a] * P[b] / self.Q).d_total_dG()
            self.F[(a, b)] = (Pab - corr) / self.Q

    def _env(self, points, G):
        nc = to_null_coords(points)
        G = np.asarray(G, dtype=complex)
        env = dict(self.params)
        env.update(G=G, B0=nc.w * G + nc.u, B1=nc.v * G + nc.wbar,
                   u=nc.u, v=nc.v, w=nc.w, wb=nc.wbar)
        return env, len(points)

    def _eval(self, fn, env, n):
        with np.errstate(all="ignore"):
            val, pole = fn.evaluate_env(env, on_pole="mask")
        return np.broadcast_to(np.where(pole, np.nan, val), (n,)).astype(complex)

    def Q_values(self, points, G):
        env, n = self._env(points, G)
        return self._eval(self.Q, env, n)

    def spinor(self, points, G):
        """:class:`EMSpinor` of arrays at ``(N, 4)`` events with branch values ``G``."""
        env, n = self._env(points, G)
        return EMSpinor(*(self._eval(self.F[k], env, n) for k in ((0, 0), (0, 1), (1, 1))))


def _spinor_model(model):
    sm = getattr(model, "_spinor_model", None)
    if sm is None:
        sm = SpinorFieldModel(model.genfun_, model.params_)
        model._spinor_model = sm
    return sm


def _check_regular(model, points, G):
    eq = model.equation_
    Q = eq.value(points, G, eq.f_G)
    bad = ~(np.abs(Q) > SINGULAR_RTOL * eq.derivative_scale(points, G)) | ~np.isfinite(G)
    return bad


def em_spinor(sol, point, G=None):
    """Field spinor at a regular point of a fitted Class II solution.

    Raises
    ------
    SingularPointError
        When ``Q = dPi/dG`` vanishes (or G is undefined) at the point.
    """
    model = _model(sol)
    p = _point(point)[None]
    G = model.predict(p) if G is None else np.array([complex(G)])
    if _check_regular(model, p, G)[0]:
        raise SingularPointError(f"field spinor is singular at {p[0, :3]} (Q = dPi/dG = 0)")
    F = _spinor_model(model).spinor(p, G)
    return EMSpinor(complex(F.F00[0]), complex(F.F01[0]), complex(F.F11[0]))


def to_vector(F, normalization=EM_NORMALIZATION):
    """``N (F00 - F11, -i (F00 + F11), -2 F01)``."""
    N = normalization
    return ComplexFieldVector(N * (F.F00 - F.F11), -1j * N * (F.F00 + F.F11), -2 * N * F.F01)


def em_vector_field(sol, point, G0=None):
    """Evaluator ``(N, 4) -> (N, 3)`` of the field vector near ``point``.

    The branch is continued from ``(point, G0)``; singular or undefined
    points evaluate to NaN.
    """
    model = _model(sol)
    p = _point(point)
    if G0 is None:
        G0 = model.predict(p[None])[0]
    G_at = model.branch_from(p, complex(G0))
    sm = _spinor_model(model)

    def field(pts):
        pts = check_events(pts, t=p[3])
        G = G_at(pts)
        out = to_vector(sm.spinor(pts, G)).as_array()
        out[_check_regular(model, pts, G)] = np.nan
        return out

    return field


def _derivs(field, p, h):
    hs = h * (1 + np.abs(p))
    pts = []
    for scale in (1.0, 0.5):
        for ax in range(4):
            for s in (1, -1):
                q = p.copy()
                q[ax] += s * scale * hs[ax]
                pts.append(q)
    vals = np.asarray(field(np.array(pts)), dtype=complex).reshape(2, 4, 2, 3)
    if not np.all(np.isfinite(vals)):
        raise InsufficientStencilError(f"stencil around {p} touches a singular point")
    D = (vals[:, :, 0] - vals[:, :, 1]) / (2 * np.array([1.0, 0.5])[:, None, None] * hs[None, :, None])
    return (4 * D[1] - D[0]) / 3          # (4 axes, 3 components)


def maxwell_residual(field, point, h=1e-4):
    """Self-dual vacuum Maxwell residuals ``(div F, curl F - i dF/dt)``.

    Centred differences with step ``h (1 + |coordinate|)``, Richardson
    extrapolated over ``h`` and ``h/2``.

    Parameters
    ----------
    field : callable
        ``(N, 4)`` events to ``(N, 3)`` complex vectors.
    point : array-like
    """
    p = check_events(point)[0]
    d = _derivs(field, p, h)        # d[axis, comp]
    div = d[0, 0] + d[1, 1] + d[2, 2]
    curl = np.array([d[1, 2] - d[2, 1], d[2, 0] - d[0, 2], d[0, 1] - d[1, 0]])
    return complex(div), curl - 1j * d[3]


def _sphere(center, radius, order, t):
    x, w = np.polynomial.legendre.leggauss(order)
    nphi = 2 * order
    phi = 2 * np.pi * np.arange(nphi) / nphi
    ct = x[:, None] * np.ones(nphi)
    st = np.sqrt(1 - ct**2)
    n = np.stack([st * np.cos(phi), st * np.sin(phi), ct], axis=-1).reshape(-1, 3)
    pts = np.column_stack([np.asarray(center, dtype=float) + radius * n, np.full(len(n), t)])
    idx = np.arange(order * nphi).reshape(order, nphi)
    nb = np.full((order, nphi, 4), -1, dtype=np.int64)
    nb[1:, :, 0] = idx[:-1]
    nb[:-1, :, 1] = idx[1:]
    nb[:, :, 2] = np.roll(idx, 1, axis=1)
    nb[:, :, 3] = np.roll(idx, -1, axis=1)
    weights = (w[:, None] * np.full(nphi, 2 * np.pi / nphi)).ravel()
    return pts, n, nb.reshape(-1, 4), weights


def _flux(model, center, radius, order, t):
    pts, n, nb, weights = _sphere(center, radius, order, t)
    start = int(np.argmax(pts[:, 2]))
    G0 = model.predict(pts[start:start + 1])[0]
    if not np.isfinite(G0):
        raise SingularPointError(f"no branch value at sphere node {pts[start, :3]}")
    eq = model.equation_

    def singular(idx, G):
        return _check_regular(model, pts[idx], G)

    fld = track_branch(eq, pts, nb, start, G0, jump_factor=model.jump_factor,
                       near_factor=model.near_factor, max_jump=model.max_jump,
                       singular=singular)
    bad = np.nonzero(~fld.filled)[0]
    if bad.size:
        raise SingularPointError(
            f"quadrature node {pts[bad[0], :3]} is singular or unreachable "
            f"({bad.size} of {len(pts)} nodes)")
    F = to_vector(_spinor_model(model).spinor(pts, fld.values)).as_array()
    Er = np.sum(F.real * n, axis=1) * radius**2
    return math.fsum(weights * Er) / (4 * np.pi)


def charge(sol, center=(0.0, 0.0, 0.0), radius=1.0, order=64):
    """Electric charge ``(1/4pi) \\oint Re(F) . n dA`` on a sphere.

    Gauss-Legendre in cos(theta) with ``order`` nodes times the trapezoid
    rule with ``2 * order`` azimuthal nodes; the branch is continued over
    the node lattice from the fitted solution.  The error estimate is the
    change on doubling the order.
    """
    model = _model(sol)
    if not radius > 0 or int(order) < 2:
        raise InvalidInputError("radius must be positive and order at least 2")
    order = int(order)
    t = float(model._points[0, 3])
    q1 = _flux(model, center, radius, order, t)
    q2 = _flux(model, center, radius, 2 * order, t)
    return FluxResult(float(q1), float(radius), order, float(abs(q2 - q1)))
