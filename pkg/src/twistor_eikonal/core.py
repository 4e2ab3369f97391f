"""Spinor, twistor and null-coordinate algebra.

Conventions used throughout the package:

* the coordinate matrix is ``X = [[u, w], [wb, v]]`` with ``u = t + z``,
  ``v = t - z``, ``w = x - i y``, ``wb = x + i y``;
* the incidence relation is ``beta = X psi`` (row index A, column index A')
  without the customary factor ``i``;
* the gauge-fixed primed spinor is ``psi = (1, G)``.

Every function accepts numpy arrays as well as scalars; components broadcast.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

__all__ = [
    "Event",
    "NullCoords",
    "PrimedSpinor",
    "UnprimedSpinor",
    "NullTwistor",
    "DualTwistor",
    "RayDirection",
    "to_null_coords",
    "from_null_coords",
    "incidence",
    "dual_incidence",
    "ambitwistor_pairing",
    "ray_direction",
    "null_derivatives",
    "null_to_cartesian_step",
]


def _finite(*values, what="value"):
    for val in values:
        if not np.all(np.isfinite(val)):
            raise InvalidInputError(f"non-finite {what}: {val!r}")


@dataclass(frozen=True)
class Event:
    x: float
    y: float
    z: float
    t: float = 0.0

    def __post_init__(self):
        _finite(self.x, self.y, self.z, self.t, what="event coordinate")

    def as_array(self):
        return np.array([self.x, self.y, self.z, self.t], dtype=float)


@dataclass(frozen=True)
class NullCoords:
    u: complex
    v: complex
    w: complex
    wbar: complex

    def matrix(self):
        return np.array([[self.u, self.w], [self.wbar, self.v]], dtype=complex)


@dataclass(frozen=True)
class PrimedSpinor:
    psi0: complex
    psi1: complex

    @classmethod
    def gauge(cls, G):
        """The affine representative ``(1, G)``."""
        return cls(1.0 + 0j, G)

    @property
    def G(self):
        return self.psi1 / self.psi0


@dataclass(frozen=True)
class UnprimedSpinor:
    phi0: complex
    phi1: complex


@dataclass(frozen=True)
class NullTwistor:
    psi: PrimedSpinor
    beta0: complex
    beta1: complex


@dataclass(frozen=True)
class DualTwistor:
    phi: UnprimedSpinor
    gamma0: complex
    gamma1: complex


@dataclass(frozen=True)
class RayDirection:
    """Real null direction annihilating ``psi = (1, G)``.

    Increments are per unit affine parameter ``tau``; ``kw`` is the
    increment of ``w`` (so ``dx = Re kw`` and ``dy = -Im kw``).
    """

    kuu: float
    kvv: float
    kw: complex

    @property
    def dt(self):
        return 0.5 * (self.kuu + self.kvv)

    @property
    def velocity(self):
        """Spatial increments ``(dx, dy, dz)`` per unit ``tau``."""
        kw = np.asarray(self.kw)
        return np.stack(
            [np.real(kw), -np.imag(kw), 0.5 * (np.asarray(self.kuu) - self.kvv)], axis=-1
        )

    def annihilates(self, G):
        """Return ``K psi`` for ``psi = (1, G)``; zero for the congruence spinor."""
        return (self.kuu + self.kw * G, np.conj(self.kw) + self.kvv * G)


def to_null_coords(e):
    """Map an :class:`Event` (or ``(..., 4)`` array of x, y, z, t) to null coordinates."""
    if isinstance(e, Event):
        x, y, z, t = e.x, e.y, e.z, e.t
    else:
        arr = np.asarray(e, dtype=float)
        if arr.shape[-1] != 4:
            raise InvalidInputError("events must have 4 components (x, y, z, t)")
        _finite(arr, what="event coordinate")
        x, y, z, t = np.moveaxis(arr, -1, 0)
    return NullCoords(
        u=t + z + 0j, v=t - z + 0j, w=x - 1j * y, wbar=x + 1j * y
    )


def from_null_coords(nc):
    """Inverse of :func:`to_null_coords` for real events; returns (x, y, z, t)."""
    t = np.real(nc.u + nc.v) / 2
    z = np.real(nc.u - nc.v) / 2
    x = np.real(nc.w + nc.wbar) / 2
    y = np.real(1j * (nc.w - nc.wbar)) / 2
    if np.ndim(t) == 0:
        return Event(float(x), float(y), float(z), float(t))
    return np.stack([x, y, z, t], axis=-1)


def incidence(nc, psi):
    """``beta^A = X^{AA'} psi_{A'}``."""
    _check_nonzero(psi.psi0, psi.psi1, "primed spinor")
    beta0 = nc.u * psi.psi0 + nc.w * psi.psi1
    beta1 = nc.wbar * psi.psi0 + nc.v * psi.psi1
    return NullTwistor(psi, beta0, beta1)


def dual_incidence(nc, phi):
    """``gamma^{A'} = phi_A X^{AA'}``."""
    _check_nonzero(phi.phi0, phi.phi1, "unprimed spinor")
    gamma0 = phi.phi0 * nc.u + phi.phi1 * nc.wbar
    gamma1 = phi.phi0 * nc.w + phi.phi1 * nc.v
    return DualTwistor(phi, gamma0, gamma1)


def ambitwistor_pairing(W, Wd):
    """``phi_A beta^A - gamma^{A'} psi_{A'}``; vanishes when both share an origin."""
    return (
        Wd.phi.phi0 * W.beta0
        + Wd.phi.phi1 * W.beta1
        - Wd.gamma0 * W.psi.psi0
        - Wd.gamma1 * W.psi.psi1
    )


def ray_direction(G):
    """Null ray along which the twistor ``(1, G, wG+u, vG+wb)`` stays constant."""
    _finite(G, what="spinor ratio G")
    G = np.asarray(G, dtype=complex)
    if G.ndim == 0:
        G = complex(G)
        return RayDirection(kuu=abs(G) ** 2, kvv=1.0, kw=-G.conjugate())
    return RayDirection(kuu=np.abs(G) ** 2, kvv=np.ones(G.shape), kw=-np.conj(G))


def null_to_cartesian_step(du, dv, dw):
    """Cartesian increments (dx, dy, dz, dt) of a real null-coordinate step."""
    return (np.real(dw), -np.imag(dw), 0.5 * np.real(du - dv), 0.5 * np.real(du + dv))


def null_derivatives(dx, dy, dz, dt):
    """Convert Cartesian partials into ``(d_u, d_v, d_w, d_wb)`` partials."""
    return (
        0.5 * (dt + dz),
        0.5 * (dt - dz),
        0.5 * (dx + 1j * dy),
        0.5 * (dx - 1j * dy),
    )


def _check_nonzero(a, b, what):
    if np.any((np.asarray(a) == 0) & (np.asarray(b) == 0)):
        raise InvalidInputError(f"zero {what}")
