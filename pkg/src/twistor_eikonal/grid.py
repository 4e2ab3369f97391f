"""Spatial lattices at a fixed time and neighbour graphs for point clouds."""

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import InvalidInputError

__all__ = ["Grid", "parse_box", "neighbour_graph"]


def parse_box(text):
    """Parse ``lo:hi:step`` (the same range on all three axes)."""
    try:
        lo, hi, step = (float(p) for p in text.split(":"))
    except ValueError:
        raise InvalidInputError(f"box must look like lo:hi:step, got {text!r}") from None
    return lo, hi, step


@dataclass(frozen=True)
class Grid:
    """Regular lattice ``lo + k * step`` in x, y, z at time ``t``."""

    lo: tuple
    hi: tuple
    step: float
    t: float = 0.0

    def __post_init__(self):
        lo = tuple(float(v) for v in np.broadcast_to(self.lo, 3))
        hi = tuple(float(v) for v in np.broadcast_to(self.hi, 3))
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if not self.step > 0:
            raise InvalidInputError("grid step must be positive")
        if any(h < l for l, h in zip(lo, hi)):
            raise InvalidInputError("grid upper bound below lower bound")

    @classmethod
    def cube(cls, lo, hi, step, t=0.0):
        return cls((lo,) * 3, (hi,) * 3, step, t)

    @property
    def shape(self):
        return tuple(int(round((h - l) / self.step)) + 1 for l, h in zip(self.lo, self.hi))

    @property
    def size(self):
        return int(np.prod(self.shape))

    def axes(self):
        return [l + self.step * np.arange(n) for l, n in zip(self.lo, self.shape)]

    def points(self):
        """``(N, 4)`` events in C order over (x, y, z)."""
        X, Y, Z = np.meshgrid(*self.axes(), indexing="ij")
        T = np.full(X.shape, float(self.t))
        return np.stack([X, Y, Z, T], axis=-1).reshape(-1, 4)

    def index_of(self, xyz):
        idx = [int(round((c - l) / self.step)) for c, l in zip(xyz, self.lo)]
        idx = [min(max(i, 0), n - 1) for i, n in zip(idx, self.shape)]
        return int(np.ravel_multi_index(idx, self.shape))

    def neighbours(self):
        """``(N, 6)`` face neighbours, ``-1`` outside the lattice."""
        shape = self.shape
        idx = np.arange(self.size).reshape(shape)
        out = np.full(shape + (6,), -1, dtype=np.int64)
        k = 0
        for axis in range(3):
            for shift in (-1, 1):
                src = [slice(None)] * 3
                dst = [slice(None)] * 3
                if shift == -1:
                    src[axis], dst[axis] = slice(1, None), slice(None, -1)
                else:
                    src[axis], dst[axis] = slice(None, -1), slice(1, None)
                out[tuple(src) + (k,)] = idx[tuple(dst)]
                k += 1
        return out.reshape(-1, 6)


def neighbour_graph(points, k=6):
    """Nearest-neighbour graph of an arbitrary point cloud (spatial + time)."""
    points = np.asarray(points, dtype=float)
    n = len(points)
    if n < 2:
        return np.full((n, k), -1, dtype=np.int64)
    kk = min(k + 1, n)
    tree = cKDTree(points)
    dist, idx = tree.query(points, k=kk)
    dist, idx = dist[:, 1:], idx[:, 1:]
    base = np.median(dist[:, 0])
    idx = np.where(dist <= 1.5 * base + 1e-12, idx, -1)
    # symmetrise: i lists j whenever j lists i
    rows, cols = np.nonzero(idx >= 0)
    src = np.concatenate([rows, idx[rows, cols]])
    dst = np.concatenate([idx[rows, cols], rows])
    pairs = np.unique(np.column_stack([src, dst]), axis=0)
    counts = np.bincount(pairs[:, 0], minlength=n)
    width = max(k, int(counts.max()) if counts.size else 0)
    out = np.full((n, width), -1, dtype=np.int64)
    start = np.concatenate([[0], np.cumsum(counts)[:-1]])
    slot = np.arange(len(pairs)) - start[pairs[:, 0]]
    out[pairs[:, 0], slot] = pairs[:, 1]
    return out
