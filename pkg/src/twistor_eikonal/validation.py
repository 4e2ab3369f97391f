"""Input validation helpers for the estimator front end."""

import numpy as np

from .errors import InvalidInputError
from .grid import Grid, neighbour_graph


def check_events(X, t=None):
    """Return a finite ``(N, 4)`` float array of events.

    ``(N, 3)`` input is completed with the time ``t`` (default 0).
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] not in (3, 4):
        raise InvalidInputError(f"expected events of shape (N, 3) or (N, 4), got {X.shape}")
    if X.shape[1] == 3:
        X = np.column_stack([X, np.full(len(X), 0.0 if t is None else float(t))])
    if not np.all(np.isfinite(X)):
        raise InvalidInputError("events contain NaN or infinite coordinates")
    return X


def check_graph(X):
    """Points and neighbour table for a :class:`Grid` or an event array."""
    if isinstance(X, Grid):
        return X.points(), X.neighbours()
    pts = check_events(X)
    return pts, neighbour_graph(pts)


def check_params(params):
    """Validate parameter bindings: names to finite complex numbers."""
    out = {}
    for name, val in dict(params or {}).items():
        if not isinstance(name, str) or not name.isidentifier():
            raise InvalidInputError(f"bad parameter name {name!r}")
        val = complex(val)
        if not np.isfinite(val):
            raise InvalidInputError(f"parameter {name} is not finite")
        out[name] = val
    return out


def check_seed(seed):
    """Normalise a seed to ``(xyz or xyzt array, value)``.

    ``value`` is a complex number, ``"auto"`` (first root in ``(|G|, arg G)``
    order) or ``"auto:k"`` (the k-th root in that order).
    """
    if seed is None:
        raise InvalidInputError("a branch seed (point, value) is required")
    try:
        point, value = seed
    except (TypeError, ValueError):
        raise InvalidInputError("seed must be a (point, value) pair") from None
    point = np.asarray(point, dtype=float).ravel()
    if point.size not in (3, 4) or not np.all(np.isfinite(point)):
        raise InvalidInputError("seed point must have 3 or 4 finite coordinates")
    if isinstance(value, str):
        head, _, k = value.partition(":")
        if head != "auto" or (k and not k.isdigit()):
            raise InvalidInputError(f"seed value must be a number, 'auto' or 'auto:k', got {value!r}")
        return point, int(k or 0)
    value = complex(value)
    if not np.isfinite(value):
        raise InvalidInputError("seed value must be finite")
    return point, value
