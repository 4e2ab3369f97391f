"""Cauchy problem: spinor field, class and time evolution from S at t = t0.

The 4-gradient of an eikonal factorises as ``dS = phi_A psi_A'``, so the
ratio ``G = dS/dw / dS/du`` is read off the data.  The class follows from
whether ``(G, wG + u, vG + wb)`` are functionally independent in space, and
Class II data evolve by transporting G along the null rays it defines.
"""

from dataclasses import dataclass, field
from itertools import product

import numpy as np
from sklearn.utils import check_random_state

from .core import null_derivatives, ray_direction
from .dsl import parse
from .dsl.calculus import evaluate
from .errors import (InconclusiveError, InvalidInputError, NoRayFoundError,
                     NotEikonalError, PreconditionError, StationaryPointError)
from .validation import check_events, check_params

__all__ = ["InitialData", "Classification", "Ray", "extract_G", "extract_G_batch",
           "data_gradient", "classify", "evolve_class2", "trace_ray"]

CLASS_I, CLASS_II, DEGENERATE = "ClassI", "ClassII", "Degenerate"
TIME_MODES = ("evaluate", "static", "eikonal+", "eikonal-")

RANK_RTOL = 1e-6
CONSISTENCY_TOL = 1e-5
REJECT_TOL = 1e-3
MAJORITY = 0.95
MIN_VALID = 0.90

OK, STATIONARY, NOT_EIKONAL, UNDEFINED = range(4)


@dataclass(frozen=True)
class InitialData:
    """Analytic data S(x, y, z, t) used at the slice ``t = t0``.

    Parameters
    ----------
    evaluator : callable
        ``(N, 4)`` events (x, y, z, t) to complex values.
    t0 : float
    time_derivative : str
        How ``dS/dt`` at ``t0`` is obtained: ``"evaluate"`` differentiates the
        evaluator in t, ``"static"`` sets it to zero, ``"eikonal+"`` /
        ``"eikonal-"`` take ``+-sqrt(sum_i (dS/dx_i)^2)`` (principal root).
    text : str, optional
        Source expression, kept for manifests.
    """

    evaluator: object
    t0: float = 0.0
    time_derivative: str = "evaluate"
    text: str = None

    def __post_init__(self):
        if self.time_derivative not in TIME_MODES:
            raise InvalidInputError(f"time_derivative must be one of {TIME_MODES}")
        if not callable(self.evaluator):
            raise InvalidInputError("evaluator must be callable")

    @classmethod
    def from_expression(cls, text, t0=0.0, params=None, time_derivative="evaluate"):
        """Closed-form data in ``x, y, z, t`` and named parameters."""
        params = check_params(params)
        node = parse(text, extra_symbols=("x", "y", "z", "t")).ast
        from .dsl.nodes import symbols
        free = symbols(node) - {"x", "y", "z", "t"} - set(params)
        if free:
            raise InvalidInputError(f"unbound names in initial data: {sorted(free)}")

        def evaluator(pts):
            pts = np.asarray(pts, dtype=float)
            env = dict(params)
            env.update(x=pts[:, 0] + 0j, y=pts[:, 1] + 0j, z=pts[:, 2] + 0j, t=pts[:, 3] + 0j)
            val, pole = evaluate(node, env, on_pole="mask")
            return np.where(pole, np.nan, np.broadcast_to(val, (len(pts),)))

        return cls(evaluator, float(t0), time_derivative, text)

    def __call__(self, pts):
        return np.asarray(self.evaluator(pts), dtype=complex)


@dataclass
class Classification:
    """Result of the functional-independence test.

    Attributes
    ----------
    label : str
        ``"ClassI"``, ``"ClassII"`` or ``"Degenerate"``.
    ranks : ndarray
        Numerical rank per sample (``-1`` where G could not be extracted).
    ratios : ndarray
        ``sigma_3 / sigma_1`` per sample.
    status : ndarray
        Extraction status per sample (0 ok, 1 stationary, 2 not eikonal, 3 undefined).
    """

    label: str
    ranks: np.ndarray
    ratios: np.ndarray
    status: np.ndarray
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Ray:
    """Null ray from ``origin`` (at t0) reaching the target after parameter ``tau``."""

    origin: np.ndarray
    tau: float
    G: complex
    iterations: int

    def point(self, s):
        """Event at ray parameter ``s``."""
        k = ray_direction(self.G)
        return self.origin + s * np.array([*k.velocity, k.dt])


_W5 = np.array([1, -8, 8, -1]) / 12.0
_OFF = np.array([-2, -1, 1, 2])


def data_gradient(data, points, h=1e-3):
    """``(N, 4)`` gradient of the data (x, y, z, t) by 4th-order centred differences."""
    pts = check_events(points, t=data.t0)
    n = len(pts)
    hs = h * (1 + np.abs(pts))
    naxes = 4 if data.time_derivative == "evaluate" else 3
    stencil = np.repeat(pts[:, None, None, :], naxes, axis=1).repeat(4, axis=2)
    for ax in range(naxes):
        stencil[:, ax, :, ax] += _OFF[None, :] * hs[:, ax:ax + 1]
    vals = data(stencil.reshape(-1, 4)).reshape(n, naxes, 4)
    grad = np.einsum("nak,k->na", vals, _W5) / hs[:, :naxes]
    if naxes == 3:
        if data.time_derivative == "static":
            gt = np.zeros(n, dtype=complex)
        else:
            gt = np.sqrt(np.sum(grad**2, axis=1))
            if data.time_derivative == "eikonal-":
                gt = -gt
        grad = np.column_stack([grad, gt])
    return grad


def extract_G_batch(data, points, h=1e-3):
    """Vectorised G extraction; returns ``(G, status)``.

    ``status`` is 0 (ok), 1 (stationary), 2 (gradient does not factorise)
    or 3 (data undefined on the stencil).
    """
    grad = data_gradient(data, points, h)
    du, dv, dw, dwb = null_derivatives(*grad.T)
    scale = np.abs(grad).max(axis=1)
    tiny = 1e-10 * np.maximum(scale, 1e-300)
    with np.errstate(all="ignore"):
        G1 = np.where(np.abs(du) > tiny, dw / du, np.nan)
        G2 = np.where(np.abs(dwb) > tiny, dv / dwb, np.nan)
        det = np.abs(du * dv - dw * dwb) / np.maximum(scale, 1e-300) ** 2
        both = np.isfinite(G1) & np.isfinite(G2)
        mism = np.abs(G1 - G2) / (1 + np.minimum(np.abs(G1), np.abs(G2)))
    G = np.where(np.isfinite(G1), G1, G2)
    status = np.full(len(G), OK, dtype=np.int8)
    status[(both & (mism > REJECT_TOL)) | (det > REJECT_TOL)] = NOT_EIKONAL
    status[~np.isfinite(G) & np.isfinite(scale)] = STATIONARY
    status[scale <= 1e-12] = STATIONARY
    status[~np.isfinite(scale)] = UNDEFINED
    return G, status


def extract_G(data, point, h=1e-3):
    """Spinor ratio ``G = (dS/dw) / (dS/du)`` at one point of the slice.

    Raises
    ------
    StationaryPointError
        Both ``dS/du`` and ``dS/dwb`` vanish.
    NotEikonalError
        The gradient does not factorise (the two ratios disagree or the
        null-derivative determinant is not small).
    """
    G, status = extract_G_batch(data, np.atleast_2d(point), h)
    s = status[0]
    if s == STATIONARY:
        raise StationaryPointError(f"zero gradient at {np.ravel(point)}")
    if s == NOT_EIKONAL:
        raise NotEikonalError(f"gradient of the data does not factorise at {np.ravel(point)}")
    if s == UNDEFINED:
        raise InvalidInputError(f"data undefined near {np.ravel(point)}")
    return complex(G[0])


def _twistor_components(data, pts, h):
    G, status = extract_G_batch(data, pts, h)
    x, y, z, t = pts.T
    u, v, w, wb = t + z, t - z, x - 1j * y, x + 1j * y
    return np.stack([G, w * G + u, v * G + wb], axis=-1), status


def _sample_points(samples, data, random_state, box):
    if np.isscalar(samples):
        rng = check_random_state(random_state)
        lo, hi = box
        return np.column_stack([rng.uniform(lo, hi, (int(samples), 3)),
                                np.full(int(samples), data.t0)])
    return check_events(samples, t=data.t0)


def classify(data, samples=64, random_state=0, box=(-3.0, 3.0), h=1e-3, outer_h=2e-3):
    """Class I / Class II / degenerate decision from sampled Jacobian ranks.

    The Jacobian of ``(G, wG + u, vG + wb)`` is taken with respect to
    ``(x, y, z, t)`` when the data can be evaluated off the slice
    (``time_derivative="evaluate"``) and with respect to ``(x, y, z)``
    otherwise.  Rank 3 means Class I; rank at most 2 means the components
    obey a constraint, i.e. Class II.  A slice alone can hide independence:
    ``B1 = (t0 + ia) G`` holds on every slice of the static ring solution.

    Parameters
    ----------
    data : InitialData
    samples : int or array-like
        Number of random points in ``box`` (cube) or explicit ``(N, 3|4)`` points.
    random_state : int or Generator
    h, outer_h : float
        Relative steps of the inner (gradient) and outer (Jacobian) stencils.

    Raises
    ------
    InconclusiveError
        Too few samples give a factorised gradient, or no class reaches 95%.
    """
    pts = _sample_points(samples, data, random_state, box)
    n = len(pts)
    base, status = extract_G_batch(data, pts, h)
    naxes = 4 if data.time_derivative == "evaluate" else 3
    hs = outer_h * (1 + np.abs(pts[:, :naxes]))
    stencil = np.repeat(pts[:, None, None, :], naxes, axis=1).repeat(4, axis=2)
    for ax in range(naxes):
        stencil[:, ax, :, ax] += _OFF[None, :] * hs[:, ax:ax + 1]
    comps, st = _twistor_components(data, stencil.reshape(-1, 4), h)
    comps = comps.reshape(n, naxes, 4, 3)
    st = st.reshape(n, naxes * 4)
    J = np.einsum("nakc,k->nca", comps, _W5) / hs[:, None, :]
    valid = (status == OK) & np.all(st == OK, axis=1) & np.all(np.isfinite(J), axis=(1, 2))
    ranks = np.full(n, -1)
    ratios = np.full(n, np.nan)
    if np.any(valid):
        sv = np.linalg.svd(J[valid], compute_uv=False)
        r = sv[:, 2] / sv[:, 0]
        ratios[valid] = r
        ranks[valid] = np.where(r < RANK_RTOL, 2, 3)
    stationary = np.mean(status == STATIONARY)
    diag = dict(samples=n, valid=int(valid.sum()), stationary_fraction=float(stationary))
    if stationary >= MAJORITY:
        return Classification(DEGENERATE, ranks, ratios, status, diag)
    if valid.mean() < MIN_VALID:
        raise InconclusiveError(f"only {valid.sum()} of {n} samples have a factorised gradient")
    frac3 = np.mean(ranks[valid] == 3)
    diag["rank3_fraction"] = float(frac3)
    if frac3 >= MAJORITY:
        label = CLASS_I
    elif 1 - frac3 >= MAJORITY:
        label = CLASS_II
    else:
        raise InconclusiveError(f"mixed ranks: {frac3:.0%} of valid samples have rank 3")
    return Classification(label, ranks, ratios, status, diag)


def _ray_residual(data, q, target, h):
    x0 = np.array([[q[0], q[1], q[2], data.t0]])
    G, status = extract_G_batch(data, x0, h)
    if status[0] != OK:
        return None, G[0]
    k = ray_direction(G[0])
    vel = np.array(k.velocity, dtype=float)
    res = np.empty(4)
    res[:3] = q[:3] + q[3] * vel - target[:3]
    res[3] = data.t0 + q[3] * k.dt - target[3]
    return res, G[0]


def trace_ray(data, target, h=1e-3, max_iter=50, restarts=8, tol=1e-12):
    """Find the ray from the initial slice that reaches ``target``.

    Solves ``x0 + tau v(G0(x0)) = x`` and ``t0 + tau (1 + |G0|^2)/2 = t``
    for ``(x0, tau)`` by Newton's method with a finite-difference Jacobian.
    The first attempt starts at ``x0 = x, tau = 0``; restarts shift the
    start by ``+-(t - t0)`` along each axis.
    """
    target = check_events(target)[0]
    dt = target[3] - data.t0
    if dt < 0:
        raise PreconditionError("target time precedes the initial slice")
    starts = [np.zeros(3)] + [np.array(signs) * dt for signs in product((-1.0, 1.0), repeat=3)]
    scale = 1 + np.abs(target).max()
    for start in starts[:restarts + 1]:
        q = np.append(target[:3] + start, 0.0)
        for it in range(max_iter):
            res, G = _ray_residual(data, q, target, h)
            if res is None:
                break
            if np.abs(res).max() <= tol * scale and q[3] >= -tol:
                return Ray(np.array([q[0], q[1], q[2], data.t0]), float(q[3]), complex(G), it)
            J = np.empty((4, 4))
            for j in range(4):
                e = np.zeros(4)
                e[j] = 1e-6 * (1 + abs(q[j]))
                rp, _ = _ray_residual(data, q + e, target, h)
                rm, _ = _ray_residual(data, q - e, target, h)
                if rp is None or rm is None:
                    J = None
                    break
                J[:, j] = (rp - rm) / (2 * e[j])
            if J is None:
                break
            try:
                q = q - np.linalg.solve(J, res)
            except np.linalg.LinAlgError:
                break
            if not np.all(np.isfinite(q)):
                break
    raise NoRayFoundError(f"no ray reaches {target} (caustic crossing suspected)")


def evolve_class2(data, target, h=1e-3, classification=None, **kwargs):
    """G at ``target`` transported along the ray from the initial slice.

    Parameters
    ----------
    data : InitialData
    target : array-like
        Event ``(x, y, z, t)`` with ``t >= t0``.
    classification : Classification, optional
        If given, must be Class II.
    """
    if classification is not None and classification.label != CLASS_II:
        raise PreconditionError(f"ray evolution needs Class II data, got {classification.label}")
    return trace_ray(data, target, h=h, **kwargs).G
