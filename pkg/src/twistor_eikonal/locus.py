"""Zero sets of complex scalar fields on 3-D slices.

A complex field ``F(x, y, z)`` generically vanishes on curves.  Candidate
cells are those where both ``Re F`` and ``Im F`` take both signs over the
eight corners; each candidate is refined by Gauss-Newton on the two real
equations with a pseudo-inverse of the ``2 x 3`` Jacobian.
"""

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .grid import Grid

__all__ = ["SingularLocus", "scan_zero_set", "hausdorff"]


@dataclass
class SingularLocus:
    """Point cloud of a zero set with per-point residuals.

    Attributes
    ----------
    points : ndarray, shape (M, 3)
    residuals : ndarray, shape (M,)
        ``|F|`` at each refined point.
    t : float
        Slice time.
    resolution : float
        Cell size of the scan.
    """

    points: np.ndarray
    residuals: np.ndarray
    t: float
    resolution: float

    def __len__(self):
        return len(self.points)

    @property
    def dimension_estimate(self):
        """Rough dimension of the cloud (0, 1 or 2) from its extent and count."""
        n = len(self.points)
        if n == 0:
            return -1
        extent = np.ptp(self.points, axis=0).max() if n > 1 else 0.0
        if extent <= 2 * self.resolution:
            return 0
        cells = extent / self.resolution
        return 1 if n <= 4 * cells else 2


def _corner_extrema(vals, shape):
    v = vals.reshape(shape)
    lo = hi = None
    for dx in (0, 1):
        for dy in (0, 1):
            for dz in (0, 1):
                s = v[dx:v.shape[0] - 1 + dx, dy:v.shape[1] - 1 + dy, dz:v.shape[2] - 1 + dz]
                lo = s if lo is None else np.fmin(lo, s)
                hi = s if hi is None else np.fmax(hi, s)
    return lo, hi


def _finite_cells(vals, shape):
    ok = np.isfinite(vals).reshape(shape)
    out = ok[:-1, :-1, :-1].copy()
    for dx in (0, 1):
        for dy in (0, 1):
            for dz in (0, 1):
                out &= ok[dx:shape[0] - 1 + dx, dy:shape[1] - 1 + dy, dz:shape[2] - 1 + dz]
    return out


def _refine(func, x0, t, h, iters):
    x = x0.copy()
    for _ in range(iters):
        live = np.nonzero(np.all(np.isfinite(x), axis=1))[0]
        if live.size == 0:
            break
        xl, hl = x[live], h[live]
        pts = [xl] + [xl + s * hl * e for e in np.eye(3) for s in (1, -1)]
        stack = np.concatenate([np.column_stack([p, np.full(len(p), t)]) for p in pts])
        vals = func(stack).reshape(7, len(xl))
        F = vals[0]
        dF = (vals[1::2] - vals[2::2]) / (2 * hl[:, 0])    # (3, M)
        J = np.stack([dF.real.T, dF.imag.T], axis=1)      # (M, 2, 3)
        rhs = np.stack([F.real, F.imag], axis=1)[..., None]
        good = np.all(np.isfinite(J), axis=(1, 2)) & np.all(np.isfinite(rhs), axis=(1, 2))
        step = np.zeros_like(xl)
        if np.any(good):
            step[good] = -(np.linalg.pinv(J[good]) @ rhs[good])[..., 0]
        x[live] = np.where(good[:, None], xl + step, np.nan)
    return x


def scan_zero_set(func, grid, tol=1e-9, max_move=2.0, iters=25, dedup=0.25, scale=None):
    """Extract the joint zero set of ``Re F`` and ``Im F`` on a grid slice.

    Parameters
    ----------
    func : callable
        Maps ``(N, 4)`` events to complex values; NaN marks undefined points.
    grid : Grid
    tol : float
        Acceptance threshold on ``|F| / scale`` after refinement.
    max_move : float
        Maximum distance, in cells, a refined point may move from its cell.
    dedup : float
        Points closer than ``dedup * step`` are merged (first one kept).
    scale : float, optional
        Normaliser for ``|F|``; defaults to 1.

    Returns
    -------
    SingularLocus
    """
    if not isinstance(grid, Grid):
        raise TypeError("grid must be a Grid")
    pts = grid.points()
    vals = np.asarray(func(pts), dtype=complex)
    shape = grid.shape
    finite = _finite_cells(vals, shape)
    rlo, rhi = _corner_extrema(vals.real, shape)
    ilo, ihi = _corner_extrema(vals.imag, shape)
    cand = finite & (rlo <= 0) & (rhi >= 0) & (ilo <= 0) & (ihi >= 0)
    idx = np.argwhere(cand)
    step = np.asarray(grid.step, dtype=float) * np.ones(3)
    lo = np.asarray(grid.lo, dtype=float) * np.ones(3)
    empty = SingularLocus(np.zeros((0, 3)), np.zeros(0), grid.t, float(step.max()))
    if idx.size == 0:
        return empty
    centre = lo + (idx + 0.5) * step
    h = 1e-6 * (1 + np.abs(centre).max(axis=1, keepdims=True))
    x = _refine(func, centre, grid.t, h, iters)
    alive = np.all(np.isfinite(x), axis=1)
    res = np.full(len(x), np.nan)
    if np.any(alive):
        F = np.asarray(func(np.column_stack([x[alive], np.full(alive.sum(), grid.t)])))
        res[alive] = np.abs(F) / (1.0 if scale is None else scale)
    moved = np.linalg.norm((x - centre) / step, axis=1)
    ok = np.isfinite(res) & (res <= tol) & (moved <= max_move + np.sqrt(3) / 2)
    x, res = x[ok], res[ok]
    if len(x) == 0:
        return empty
    keep = np.ones(len(x), dtype=bool)
    tree = cKDTree(x)
    for i, j in sorted(tree.query_pairs(dedup * step.min())):
        if keep[i] and keep[j]:
            keep[j] = False
    return SingularLocus(x[keep], res[keep], grid.t, float(step.max()))


def hausdorff(a, b):
    """Symmetric Hausdorff distance between two point clouds (inf if one is empty)."""
    a = np.asarray(a, dtype=float).reshape(-1, 3)
    b = np.asarray(b, dtype=float).reshape(-1, 3)
    if len(a) == 0 or len(b) == 0:
        return np.inf
    return max(cKDTree(b).query(a)[0].max(), cKDTree(a).query(b)[0].max())
