"""CSV and JSON artifacts at full double precision."""

import csv
import json

import numpy as np

from .errors import InvalidInputError

__all__ = ["FIELD_HEADER", "LOCUS_HEADER", "fmt", "write_csv", "read_field_dump",
           "write_json", "read_json", "dumps_json"]

FIELD_HEADER = ("x", "y", "z", "t", "Re_G", "Im_G", "Re_S", "Im_S", "flag")
LOCUS_HEADER = ("x", "y", "z", "residual")


def fmt(v):
    """Round-trippable text for a float (``nan``/``inf`` spelled out)."""
    if isinstance(v, str):
        return v
    return format(float(v), ".17g")


def write_csv(path_or_file, header, rows):
    """Write rows (iterables of numbers or strings) under ``header``."""
    def _write(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])

    if hasattr(path_or_file, "write"):
        _write(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            _write(fh)


def read_field_dump(path):
    """Read a field dump; returns ``(points (N,4), G, S, flags)``."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc}") from None
    if not rows or tuple(rows[0]) != FIELD_HEADER:
        raise InvalidInputError(f"{path} is not a field dump (bad header)")
    body = rows[1:]
    try:
        num = np.array([[float(v) for v in r[:8]] for r in body], dtype=float).reshape(-1, 8)
    except (ValueError, IndexError):
        raise InvalidInputError(f"{path} has malformed numeric rows") from None
    if any(len(r) != 9 for r in body):
        raise InvalidInputError(f"{path} has rows with the wrong number of fields")
    flags = np.array([r[8] for r in body], dtype=object)
    return num[:, :4], num[:, 4] + 1j * num[:, 5], num[:, 6] + 1j * num[:, 7], flags


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, complex):
        return {"re": _clean(obj.real), "im": _clean(obj.imag)}
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return float(fmt(v)) if np.isfinite(v) else fmt(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def dumps_json(obj):
    """Deterministic JSON text (sorted keys; floats in shortest round-trip form)."""
    text = json.dumps(_clean(obj), sort_keys=True, indent=2)
    return text + "\n"


def write_json(path, obj):
    with open(path, "w") as fh:
        fh.write(dumps_json(obj))


def read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"cannot read manifest {path}: {exc}") from None
