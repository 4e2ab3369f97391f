"""Class I eikonals: one twistor function S and the condition dS/dG = 0.

The spinor field G(X) is a root of the total derivative ``dS/dG`` taken at
``B0 = wG + u``, ``B1 = vG + wb``; the eikonal is ``S(G(X), B0, B1)``.
"""

from dataclasses import dataclass

import numpy as np

from .base import BranchFieldEstimator, as_genfun
from .core import Event, NullCoords, PrimedSpinor, UnprimedSpinor, to_null_coords
from .dsl import EvalContext
from .errors import (DegenerateSolutionError, PoleError, PreconditionError,
                     SingularPointError)
from .grid import Grid
from .locus import scan_zero_set
from .roots import GeneratingEquation
from .tracking import JUMP_FACTOR, MAX_JUMP, NEAR_FACTOR, SINGULAR
from .validation import check_events, check_params

__all__ = ["Class1Eikonal", "Class1Solution", "solve_class1", "caustic_residual",
           "gradient_spinors", "caustic_locus", "pole_locus"]

CONDITION_RTOL = 1e-10
CAUSTIC_RTOL = 1e-10
STATIC_TOL = 1e-10


@dataclass
class Class1Solution:
    """Fitted Class I field on a point set.

    Attributes
    ----------
    S : GenFun
        The generating function.
    field : BranchedField
        Selected root of dS/dG per point with flags.
    S_values : ndarray
        Eikonal values (NaN at flagged points and poles of S).
    D_values : ndarray
        ``d2S/dG2`` at the selected root.
    """

    S: object
    field: object
    S_values: np.ndarray
    D_values: np.ndarray


def _nc(point):
    if isinstance(point, NullCoords):
        return point
    if isinstance(point, Event):
        return to_null_coords(point)
    return to_null_coords(check_events(point)[0])


class Class1Eikonal(BranchFieldEstimator):
    """Estimator for Class I eikonals generated by a single function S.

    Parameters
    ----------
    generator : str or GenFun
        S(G, B0, B1) in the DSL.
    params : dict, optional
        Values for free parameters of ``generator``.
    seed : tuple
        ``(point, value)``; ``value`` is a root of dS/dG at ``point`` or
        ``"auto"`` / ``"auto:k"``.
    jump_factor, near_factor, max_jump : float
        Branch-tracking thresholds (see :func:`track_branch`).

    Attributes
    ----------
    field_ : BranchedField
    S_values_, D_values_ : ndarray
    solution_ : Class1Solution
    """

    def __init__(self, generator="G", params=None, seed=None, jump_factor=JUMP_FACTOR,
                 near_factor=NEAR_FACTOR, max_jump=MAX_JUMP):
        self.generator = generator
        self.params = params
        self.seed = seed
        self.jump_factor = jump_factor
        self.near_factor = near_factor
        self.max_jump = max_jump

    def _build_equation(self):
        self.genfun_ = as_genfun(self.generator)
        self.genfun_.bind_check(self.params_)
        return GeneratingEquation(self.genfun_.d_total_dG(), self.params_)

    def _singular(self, idx, G):
        eq = self.equation_
        pts = self._points[idx]
        D = eq.value(pts, G, eq.f_G)
        scale = eq.derivative_scale(pts, G)
        return np.abs(D) <= CAUSTIC_RTOL * scale

    def _after_track(self):
        fld = self.field_
        S, pole = self._eval_S(fld.points, fld.values)
        D = self.equation_.value(fld.points, fld.values, self.equation_.f_G)
        bad = fld.filled & pole
        fld.flags[bad] = SINGULAR
        S[~fld.filled] = np.nan
        self.S_values_ = S
        self.D_values_ = np.where(fld.filled | bad, D, np.nan)
        self.solution_ = Class1Solution(self.genfun_, fld, self.S_values_, self.D_values_)

    def _eval_S(self, points, G):
        nc = to_null_coords(points)
        env = self.equation_.env(nc, np.asarray(G, dtype=complex))
        with np.errstate(all="ignore"):
            val, pole = self.genfun_.evaluate_env(env, on_pole="mask")
        pole = pole | ~np.isfinite(val)
        return np.where(pole, np.nan, val), pole

    def transform(self, X):
        """Eikonal S at events ``X`` on the fitted branch (NaN at poles)."""
        G = self.predict(X)
        X = check_events(X, t=self._points[0, 3])
        return self._eval_S(X, G)[0]

    def eikonal_from(self, point, G0):
        """Local evaluator of S continuing the branch through ``(point, G0)``."""
        G_at = self.branch_from(point, G0)

        def S_at(pts):
            pts = check_events(pts, t=point[3])
            return self._eval_S(pts, G_at(pts))[0]

        return S_at

    def caustic(self, X):
        """``d2S/dG2`` on the fitted branch at events ``X``."""
        G = self.predict(X)
        X = check_events(X, t=self._points[0, 3])
        return self.equation_.value(X, G, self.equation_.f_G)

    def is_static(self, dt=1.0):
        """True when S on the fitted points does not change after ``dt``."""
        fld = self.field_
        pts = fld.points[fld.regular]
        later = pts.copy()
        later[:, 3] += dt
        diff = np.abs(self.transform(later) - self.S_values_[fld.regular])
        diff = diff[np.isfinite(diff)]
        return bool(diff.size and diff.max() <= STATIC_TOL)


def solve_class1(S, grid, seed, params=None, **kwargs):
    """Fit a :class:`Class1Eikonal` on ``grid`` and return its solution."""
    est = Class1Eikonal(S, params=params, seed=seed, **kwargs).fit(grid)
    return est.solution_


def _check_condition(S, env):
    dS = complex(S.d_total_dG().evaluate_env(env))
    mag = 1 + abs(complex(S.d_partial("B0").evaluate_env(env))) + abs(
        complex(S.d_partial("B1").evaluate_env(env)))
    if abs(dS) > 1e-8 * mag:
        raise PreconditionError(f"G is not a root of dS/dG here (|dS/dG| = {abs(dS):.3g})")


def caustic_residual(S, nc, G, params=None):
    """Total second derivative ``d2S/dG2`` at ``(nc, G)``.

    Raises
    ------
    PoleError
        When S (or its derivatives) has a pole at the point.
    """
    S = as_genfun(S)
    params = check_params(params)
    ctx = EvalContext(_nc(nc), complex(G), params)
    S.evaluate(ctx)
    return complex(S.d_total_dG().d_total_dG().evaluate(ctx))


def gradient_spinors(S, nc, G, params=None):
    """Factor ``dS = phi_A psi_A'`` at a regular point.

    Returns
    -------
    (UnprimedSpinor, PrimedSpinor)
        ``phi_A = dS/dB^A`` and ``psi = (1, G)``.
    """
    S = as_genfun(S)
    params = check_params(params)
    ctx = EvalContext(_nc(nc), complex(G), params)
    env = ctx.env()
    S.evaluate(ctx)
    _check_condition(S, env)
    D = complex(S.d_total_dG().d_total_dG().evaluate_env(env))
    if abs(D) <= CAUSTIC_RTOL * (1 + abs(complex(S.evaluate_env(env)))):
        raise SingularPointError("d2S/dG2 vanishes: branching point of the solution")
    phi0 = complex(S.d_partial("B0").evaluate_env(env))
    phi1 = complex(S.d_partial("B1").evaluate_env(env))
    if phi0 == 0 and phi1 == 0:
        raise DegenerateSolutionError("dS/dB vanishes: the eikonal has zero gradient")
    return UnprimedSpinor(phi0, phi1), PrimedSpinor.gauge(complex(G))


def _branch_scan(estimator, grid, which):
    est = estimator
    fitted = est if hasattr(est, "field_") else est.fit(grid)

    def func(pts):
        G = fitted.predict(pts)
        if which == "caustic":
            return fitted.equation_.value(pts, G, fitted.equation_.f_G)
        nc = to_null_coords(pts)
        with np.errstate(all="ignore"):
            val, pole = fitted.genfun_.evaluate_env(fitted.equation_.env(nc, G), on_pole="mask")
            inv = 1 / val
        # a pole of S on a live branch value is a zero of 1/S
        return np.where(pole & np.isfinite(G), 0.0, np.where(np.isfinite(inv), inv, np.nan))

    return scan_zero_set(func, grid)


def caustic_locus(S, grid, seed, params=None):
    """Zero set of ``d2S/dG2`` along the seeded branch on a time slice."""
    if not isinstance(grid, Grid):
        raise TypeError("grid must be a Grid")
    return _branch_scan(Class1Eikonal(S, params=params, seed=seed), grid, "caustic")


def pole_locus(S, grid, seed, params=None):
    """Zero set of ``1/S`` along the seeded branch: where the eikonal blows up."""
    if not isinstance(grid, Grid):
        raise TypeError("grid must be a Grid")
    return _branch_scan(Class1Eikonal(S, params=params, seed=seed), grid, "pole")
