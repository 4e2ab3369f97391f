"""Finite-difference checks of the eikonal equation and its factorisation.

Squares are holomorphic: the residual is ``(dS/dt)^2 - sum_i (dS/dx_i)^2``
with no complex conjugation.
"""

from dataclasses import dataclass

import numpy as np

from .core import PrimedSpinor, UnprimedSpinor, null_derivatives
from .errors import InsufficientStencilError, InvalidInputError
from .validation import check_events

__all__ = ["ResidualReport", "fd_gradients", "eikonal_residual", "factorization_check",
           "eikonal_residuals", "residual_report", "gauge_invariance_check"]

DEFAULT_H = 1e-5
DEFAULT_TOL = 1e-6


@dataclass(frozen=True)
class ResidualReport:
    """Residuals at one point with the step and tolerance used.

    ``passed`` is True exactly when every reported residual is within
    ``tol * scale``.
    """

    point: tuple
    eikonal: complex
    det: complex
    sfc: tuple
    h: float
    scale: float
    tol: float

    @property
    def passed(self):
        vals = [self.eikonal, self.det] + list(self.sfc or ())
        return all(abs(v) <= self.tol * self.scale for v in vals)


def fd_gradients(S, points, h=DEFAULT_H):
    """``(N, 4)`` centred-difference gradients (x, y, z, t) and the step used.

    The step along each axis is ``h * (1 + |coordinate|)``.  NaN marks
    points whose stencil touches an undefined value.
    """
    pts = check_events(points)
    n = len(pts)
    hs = h * (1 + np.abs(pts))
    st = np.repeat(pts[:, None, None, :], 4, axis=1).repeat(2, axis=2)
    for ax in range(4):
        st[:, ax, 0, ax] += hs[:, ax]
        st[:, ax, 1, ax] -= hs[:, ax]
    vals = np.asarray(S(st.reshape(-1, 4)), dtype=complex).reshape(n, 4, 2)
    return (vals[..., 0] - vals[..., 1]) / (2 * hs), hs


def _scale(grad):
    return 1 + np.abs(grad).max(axis=-1)


def eikonal_residuals(S, points, h=DEFAULT_H):
    """Vectorised ``(residual, scale)`` at ``(N, 4)`` points (NaN where undefined)."""
    g, _ = fd_gradients(S, points, h)
    res = g[:, 3] ** 2 - g[:, 0] ** 2 - g[:, 1] ** 2 - g[:, 2] ** 2
    return res, _scale(g)


def _single(S, point, h):
    g, _ = fd_gradients(S, np.atleast_2d(point), h)
    if not np.all(np.isfinite(g)):
        raise InsufficientStencilError(f"stencil around {np.ravel(point)} touches an undefined point")
    return g[0]


def eikonal_residual(S, point, h=DEFAULT_H):
    """``(dS/dt)^2 - |grad S|^2`` (holomorphic squares) at one point.

    Parameters
    ----------
    S : callable
        ``(N, 4)`` events to complex values.
    point : array-like
        ``(x, y, z)`` or ``(x, y, z, t)``.
    h : float
        Relative step.
    """
    gx, gy, gz, gt = _single(S, point, h)
    return complex(gt**2 - gx**2 - gy**2 - gz**2)


def factorization_check(S, point, h=DEFAULT_H):
    """``dS/du dS/dv - dS/dw dS/dwb``; equals a quarter of the eikonal residual."""
    du, dv, dw, dwb = null_derivatives(*_single(S, point, h))
    return complex(du * dv - dw * dwb)


def residual_report(S, point, h=DEFAULT_H, tol=DEFAULT_TOL, G=None):
    """:class:`ResidualReport` for an eikonal and, optionally, its spinor field ``G``."""
    g = _single(S, point, h)
    gx, gy, gz, gt = g
    du, dv, dw, dwb = null_derivatives(gx, gy, gz, gt)
    sfc = None
    if G is not None:
        from .class2 import sfc_residual
        sfc = sfc_residual(G, point)
    p = tuple(float(c) for c in check_events(point)[0])
    return ResidualReport(p, complex(gt**2 - gx**2 - gy**2 - gz**2), complex(du * dv - dw * dwb),
                          sfc, h, float(_scale(g)), tol)


def gauge_invariance_check(phi, psi, lam):
    """Largest change of ``phi_A psi_A'`` under ``phi -> phi/lam, psi -> lam psi``.

    Parameters
    ----------
    phi : UnprimedSpinor or (2,) array-like
    psi : PrimedSpinor or (2,) array-like
    lam : complex, nonzero
    """
    lam = complex(lam)
    if lam == 0 or not np.isfinite(lam):
        raise InvalidInputError("gauge factor must be finite and nonzero")
    if isinstance(phi, UnprimedSpinor):
        phi = (phi.phi0, phi.phi1)
    if isinstance(psi, PrimedSpinor):
        psi = (psi.psi0, psi.psi1)
    phi = np.asarray(phi, dtype=complex)
    psi = np.asarray(psi, dtype=complex)
    before = phi[..., :, None] * psi[..., None, :]
    after = (phi / lam)[..., :, None] * (lam * psi)[..., None, :]
    return float(np.abs(after - before).max())
