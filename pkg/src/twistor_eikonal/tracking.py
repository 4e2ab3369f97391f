"""Breadth-first continuation of a single root branch over a point graph."""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, PreconditionError
from .roots import chordal

__all__ = ["BranchedField", "track_branch", "FLAG_NAMES", "OK", "NEAR_BRANCH",
           "SINGULAR", "NO_ROOT", "UNREACHED", "taylor_predict"]

OK, NEAR_BRANCH, SINGULAR, NO_ROOT, UNREACHED = range(5)
FLAG_NAMES = ("ok", "near-branch", "singular", "no-root", "unreached")

JUMP_FACTOR = 0.5
NEAR_FACTOR = 10.0
MAX_JUMP = 0.25
G_MAX = 1e8


@dataclass
class BranchedField:
    """Continuously selected root per point plus continuation metadata.

    ``values`` holds G (NaN where unfilled); ``reciprocal`` marks points whose
    value exceeds ``G_MAX`` and is therefore reported in the ``H = 1/G``
    chart by :meth:`chart_values`.
    """

    points: np.ndarray
    values: np.ndarray
    flags: np.ndarray
    parent: np.ndarray
    layer: np.ndarray
    roots: np.ndarray
    jump: np.ndarray
    seed_index: int

    @property
    def filled(self):
        return (self.flags == OK) | (self.flags == NEAR_BRANCH)

    @property
    def regular(self):
        return self.flags == OK

    @property
    def reciprocal(self):
        return self.filled & (np.abs(self.values) > G_MAX)

    def chart_values(self):
        """Values in the chart they are reported in (G, or H = 1/G when reciprocal)."""
        with np.errstate(all="ignore"):
            return np.where(self.reciprocal, 1 / self.values, self.values)

    def flag_names(self):
        names = np.array(FLAG_NAMES, dtype=object)[self.flags]
        names[self.reciprocal & (self.flags == OK)] = "reciprocal"
        return names


def _separation(roots, chosen):
    """Chordal distance from each chosen root to the nearest other root of its row."""
    d = chordal(roots, chosen[:, None])
    d = np.where(np.isnan(d), np.inf, d)
    if roots.shape[1] < 2:
        return np.full(len(roots), np.inf)
    return np.sort(d, axis=1)[:, 1]


def track_branch(equation, points, neighbours, seed_index, seed_value,
                 jump_factor=JUMP_FACTOR, near_factor=NEAR_FACTOR, max_jump=MAX_JUMP,
                 singular=None, roots=None):
    """Continue the root branch through ``seed_value`` at ``points[seed_index]``.

    Points are visited in breadth-first layers; within a layer each point's
    parent is its lowest-index neighbour from the previous layer, so the
    result does not depend on execution order.  The predicted value at a
    point is the parent's value plus the implicit-function gradient times
    the step, and the selected root is the one nearest in chordal distance.

    A point is flagged ``singular`` (and not filled) when the nearest root is
    farther than ``jump_factor`` times the local root spacing (or
    ``max_jump``), and ``near-branch`` when the second-nearest root is within
    ``near_factor`` times the nearest distance.  ``singular(idx, G)`` may
    flag further points (e.g. vanishing dPi/dG).
    """
    points = np.asarray(points, dtype=float)
    npts = len(points)
    newton_mode = roots is None and not equation.polynomial
    if newton_mode:
        roots = np.full((npts, 1), np.nan + 0j)
        roots[seed_index, 0] = equation.newton_polish(points[seed_index:seed_index + 1],
                                                     [seed_value], iters=20)[0]
    elif roots is None:
        roots = equation.roots(points).roots
    if not 0 <= seed_index < npts:
        raise InvalidInputError("seed index outside the point set")
    seed_value = complex(seed_value)
    seed_roots = roots[seed_index]
    dseed = chordal(seed_roots, seed_value)
    if not np.any(dseed <= 1e-7):
        raise PreconditionError(
            f"seed value {seed_value} is not a root at the seed point (roots: {seed_roots})"
        )
    seed_value = seed_roots[np.nanargmin(dseed)]
    spacing = np.full(npts, np.inf)
    spacing[seed_index] = _separation(roots[seed_index:seed_index + 1],
                                      np.array([seed_value]))[0]

    values = np.full(npts, np.nan + 0j)
    flags = np.full(npts, UNREACHED, dtype=np.int8)
    parent = np.full(npts, -1, dtype=np.int64)
    layer = np.full(npts, -1, dtype=np.int64)
    grads = np.full((npts, 4), np.nan + 0j)

    values[seed_index] = seed_value
    flags[seed_index] = OK
    layer[seed_index] = 0
    frontier = np.array([seed_index])
    grads[frontier] = _safe_gradient(equation, points[frontier], values[frontier])
    in_front = np.zeros(npts, dtype=bool)
    L = 0
    while frontier.size:
        L += 1
        nb = neighbours[frontier].ravel()
        cand = np.unique(nb[nb >= 0])
        cand = cand[layer[cand] < 0]
        if cand.size == 0:
            break
        in_front[:] = False
        in_front[frontier] = True
        cn = neighbours[cand]
        ok_nb = (cn >= 0) & in_front[np.where(cn >= 0, cn, 0)]
        # guard against one-sided neighbour tables
        reach = ok_nb.any(axis=1)
        cand, cn, ok_nb = cand[reach], cn[reach], ok_nb[reach]
        if cand.size == 0:
            break
        par = np.where(ok_nb, cn, npts).min(axis=1)
        step = points[cand] - points[par]
        pred = taylor_predict(values[par], np.sum(grads[par] * step, axis=1))

        if newton_mode:
            polished = equation.newton_polish(points[cand], pred, iters=20)
            resid = np.abs(equation.value(points[cand], polished))
            tol = 1e-10 * equation.residual_scale(points[cand], polished)
            roots[cand, 0] = np.where(resid <= tol, polished, np.nan)
        r = roots[cand]
        d = chordal(r, pred[:, None])
        d = np.where(np.isnan(d), np.inf, d)
        order = np.argsort(d, axis=1, kind="stable")
        d1 = np.take_along_axis(d, order[:, :1], axis=1)[:, 0]
        d2 = (np.take_along_axis(d, order[:, 1:2], axis=1)[:, 0]
              if r.shape[1] > 1 else np.full(len(cand), np.inf))
        chosen = np.take_along_axis(r, order[:, :1], axis=1)[:, 0]
        sep = _separation(r, chosen)
        spacing[cand] = sep

        f = np.full(len(cand), OK, dtype=np.int8)
        f[d2 <= near_factor * d1] = NEAR_BRANCH
        jump = (d1 > jump_factor * sep) | (d1 > max_jump)
        f[jump] = SINGULAR
        f[~np.isfinite(d1)] = NO_ROOT
        if singular is not None:
            live = f <= NEAR_BRANCH
            if np.any(live):
                s = np.zeros(len(cand), dtype=bool)
                s[live] = singular(cand[live], chosen[live])
                f[s] = SINGULAR

        layer[cand] = L
        flags[cand] = f
        parent[cand] = par
        fill = f <= NEAR_BRANCH
        values[cand[fill]] = chosen[fill]
        frontier = cand[fill]
        if frontier.size:
            grads[frontier] = _safe_gradient(equation, points[frontier], values[frontier])

    jumpmask = _seams(values, flags, neighbours, spacing, jump_factor, max_jump)
    flags[jumpmask & (flags == OK)] = NEAR_BRANCH
    return BranchedField(points, values, flags, parent, layer, roots, jumpmask, seed_index)


def taylor_predict(G, dG):
    """First-order predictor ``G + dG``, stepped in the ``1/G`` chart when ``|G| > 1``.

    Large values typically behave like poles, which a linear step in G
    overshoots badly; the reciprocal chart keeps such steps accurate.
    """
    G = np.asarray(G, dtype=complex)
    with np.errstate(all="ignore"):
        near = G + dG
        far = 1 / (1 / G - dG / G**2)
    pred = np.where(np.abs(G) <= 1, near, far)
    return np.where(np.isnan(pred) | ~np.isfinite(dG), G, pred)


def _safe_gradient(equation, pts, vals):
    with np.errstate(all="ignore"):
        g = equation.cartesian_gradient(pts, vals)
    return np.where(np.isfinite(g), g, np.nan)


def _seams(values, flags, neighbours, spacing, jump_factor, max_jump):
    """Mark filled points adjacent to a discontinuity of the selected branch."""
    filled = flags <= NEAR_BRANCH
    mask = np.zeros(len(values), dtype=bool)
    for k in range(neighbours.shape[1]):
        q = neighbours[:, k]
        valid = filled & (q >= 0)
        qq = np.where(valid, q, 0)
        valid &= filled[qq]
        d = chordal(values, values[qq])
        thresh = np.minimum(jump_factor * np.minimum(spacing, spacing[qq]), max_jump)
        bad = valid & (d > thresh)
        mask |= bad
    return mask
