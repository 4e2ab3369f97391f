"""Shared estimator machinery: fit a root branch on a grid, predict anywhere."""

import numpy as np
from scipy.spatial import cKDTree
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .dsl import GenFun, parse
from .errors import InvalidInputError, PreconditionError
from .roots import chordal
from .tracking import JUMP_FACTOR, MAX_JUMP, NEAR_FACTOR, taylor_predict, track_branch
from .validation import check_events, check_graph, check_params, check_seed


def as_genfun(f, params=None):
    if isinstance(f, GenFun):
        return f
    if isinstance(f, str):
        return parse(f)
    raise InvalidInputError(f"expected generating-function text or GenFun, got {type(f).__name__}")


class BranchFieldEstimator(BaseEstimator):
    """Base for estimators whose fitted state is a tracked root branch.

    Subclasses provide ``_build_equation`` and optionally ``_singular``.
    ``fit(X)`` accepts a :class:`~twistor_eikonal.grid.Grid` or an ``(N, 3|4)``
    event array; ``predict(X)`` continues the fitted branch to new events.
    """

    def _build_equation(self):
        raise NotImplementedError

    def _singular(self, idx, G):
        return np.zeros(len(idx), dtype=bool)

    def _tracking_kwargs(self):
        return dict(
            jump_factor=self.jump_factor, near_factor=self.near_factor, max_jump=self.max_jump
        )

    def fit(self, X, y=None):
        self.params_ = check_params(self.params)
        self.equation_ = self._build_equation()
        points, neighbours = check_graph(X)
        self._points = points
        seed_point, seed_value = check_seed(self.seed)
        if seed_point.size == 3:
            seed_point = np.append(seed_point, points[0, 3])
        seed_index, seed_root = self._resolve_seed(points, seed_point, seed_value)
        self.field_ = track_branch(
            self.equation_, points, neighbours, seed_index, seed_root,
            singular=self._singular, **self._tracking_kwargs()
        )
        self._after_track()
        filled = np.nonzero(self.field_.filled)[0]
        self._anchor_index = filled
        self._tree = cKDTree(points[filled]) if filled.size else None
        return self

    def _after_track(self):
        pass

    def _roots_at(self, points):
        if self.equation_.polynomial:
            return self.equation_.roots(points).roots
        return None

    def _resolve_seed(self, points, seed_point, seed_value):
        """Root at the seed point, carried to the nearest fitted point if off-grid."""
        roots = self._roots_at(seed_point[None])
        if isinstance(seed_value, int):
            if roots is None:
                raise PreconditionError("'auto' seeding needs a polynomial equation")
            avail = roots[0][~np.isnan(roots[0].real)]
            if seed_value >= len(avail):
                raise PreconditionError(f"seed asks for root {seed_value} but only {len(avail)} exist")
            seed_value = avail[seed_value]
        elif roots is not None:
            d = chordal(roots[0], seed_value)
            if not np.any(d <= 1e-7):
                raise PreconditionError(
                    f"seed value {seed_value} is not a root at {seed_point[:3]} (roots {roots[0]})"
                )
            seed_value = roots[0][np.nanargmin(d)]
        else:
            res = abs(self.equation_.value(seed_point[None], [seed_value])[0])
            if not res <= 1e-8 * self.equation_.residual_scale(seed_point[None], [seed_value])[0]:
                raise PreconditionError(f"seed value {seed_value} is not a root (residual {res})")
        dist = np.linalg.norm(points - seed_point, axis=1)
        idx = int(np.argmin(dist))
        if dist[idx] <= 1e-9:
            return idx, complex(seed_value)
        # carry to the nearest point where the value is a genuine root (a removable
        # point of the equation can recover the value without listing it as a root)
        for idx in np.argsort(dist, kind="stable")[:8]:
            carried = self.continue_from(seed_point[None], np.array([seed_value]),
                                         points[idx:idx + 1])[0]
            if not np.isfinite(carried):
                continue
            roots = self._roots_at(points[idx:idx + 1])
            if roots is None or np.any(chordal(roots[0], carried) <= 1e-7):
                return int(idx), complex(carried)
        raise PreconditionError("cannot carry the seed root to a nearby grid point")

    def continue_from(self, anchors, anchor_G, query):
        """Carry anchor values to query points: Taylor predictor + nearest root."""
        eq = self.equation_
        with np.errstate(all="ignore"):
            grad = eq.cartesian_gradient(anchors, anchor_G)
            pred = taylor_predict(anchor_G, np.sum(grad * (query - anchors), axis=1))
        if not eq.polynomial:
            G = eq.newton_polish(query, pred, iters=20)
            resid = np.abs(eq.value(query, G))
            return np.where(resid <= 1e-10 * eq.residual_scale(query, G), G, np.nan)
        roots = eq.roots(query).roots
        d = chordal(roots, pred[:, None])
        d = np.where(np.isnan(d), np.inf, d)
        i = np.argmin(d, axis=1)
        out = roots[np.arange(len(query)), i]
        out = np.where(d[np.arange(len(query)), i] <= self.max_jump, out, np.nan)
        # a branch root can cancel against the denominator (removable point)
        lost = ~np.isfinite(out) & np.isfinite(pred)
        if np.any(lost):
            G, res = eq.numerator_polish(query[lost], pred[lost])
            ok = (res <= 1e-12) & (chordal(G, pred[lost]) <= self.max_jump)
            out[np.nonzero(lost)[0][ok]] = G[ok]
        return out

    def predict(self, X):
        """G on the fitted branch at events ``X`` (NaN where it cannot be continued)."""
        check_is_fitted(self, "field_")
        X = check_events(X, t=self._points[0, 3])
        if self._tree is None:
            return np.full(len(X), np.nan + 0j)
        _, j = self._tree.query(X)
        anchor = self._anchor_index[j]
        return self.continue_from(self._points[anchor], self.field_.values[anchor], X)

    def local_branch(self, point):
        """Evaluator of G near ``point`` that continues from the branch value there."""
        check_is_fitted(self, "field_")
        point = check_events(point, t=self._points[0, 3])[0]
        G0 = self.predict(point[None])[0]
        if not np.isfinite(G0):
            raise PreconditionError(f"no branch value at {point}")
        return self.branch_from(point, G0)

    def branch_from(self, point, G0):
        point = np.asarray(point, dtype=float)

        def G_at(pts):
            pts = check_events(pts, t=point[3])
            anchors = np.broadcast_to(point, pts.shape)
            return self.continue_from(anchors, np.full(len(pts), G0), pts)

        return G_at
