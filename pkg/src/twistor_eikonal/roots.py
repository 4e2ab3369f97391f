"""Roots of holomorphic equations ``f(G) = 0`` at fixed spacetime points.

Rational equations are reduced to their numerator polynomial in G
(``polynomialize``) and solved by companion-matrix eigenvalues with one
Newton polish step.  Everything is batched over points: coefficient arrays
carry the polynomial degree on axis 0 and the point index on axis 1.
"""

from dataclasses import dataclass, field

import numpy as np

from .core import to_null_coords
from .dsl import GenFun
from .dsl.nodes import BinOp, Call, Neg, Num, Pow, Sym
from .errors import (
    IdenticallyZeroError, InvalidInputError, NoRootsError, NotPolynomializableError,
)

__all__ = [
    "PolyC", "RootSet", "BatchRoots", "polynomialize", "rational_coefficients",
    "all_roots", "batch_roots", "newton_roots", "chordal", "sort_roots",
    "GeneratingEquation",
]

TRIM_RTOL = 1e-14
MULTIPLICITY_SEP = 1e-7
POLE_RTOL = 1e-10


# -- polynomial arithmetic on (degree, point) coefficient arrays ------------

def _pmul(a, b):
    out = np.zeros((a.shape[0] + b.shape[0] - 1,) + a.shape[1:], dtype=complex)
    for k in range(a.shape[0]):
        out[k:k + b.shape[0]] += a[k] * b
    return out


def _padd(a, b, sign=1):
    n = max(a.shape[0], b.shape[0])
    out = np.zeros((n,) + a.shape[1:], dtype=complex)
    out[: a.shape[0]] += a
    out[: b.shape[0]] += sign * b
    return out


def horner(coeffs, G):
    """Evaluate ascending coefficients ``coeffs`` (axis 0) at ``G``."""
    val = np.zeros(np.broadcast_shapes(coeffs.shape[1:], np.shape(G)), dtype=complex)
    for c in coeffs[::-1]:
        val = val * G + c
    return val


def _poly_deriv(coeffs):
    n = coeffs.shape[0]
    if n == 1:
        return np.zeros_like(coeffs)
    k = np.arange(1, n).reshape((-1,) + (1,) * (coeffs.ndim - 1))
    return coeffs[1:] * k


class _Rat:
    """Rational function of G with per-point coefficients; ``den=None`` means 1."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        self.num, self.den = num, den

    @property
    def constant(self):
        return self.num.shape[0] == 1 and (self.den is None or self.den.shape[0] == 1)


def _rat(node, env, npts):
    if isinstance(node, Num):
        return _Rat(np.full((1, npts), node.value, dtype=complex))
    if isinstance(node, Sym):
        if node.name == "G":
            num = np.zeros((2, npts), dtype=complex)
            num[1] = 1
            return _Rat(num)
        if node.name == "B0":
            return _Rat(np.stack(np.broadcast_arrays(env["u"], env["w"])).astype(complex))
        if node.name == "B1":
            return _Rat(np.stack(np.broadcast_arrays(env["wb"], env["v"])).astype(complex))
        try:
            val = env[node.name]
        except KeyError:
            raise InvalidInputError(f"unbound symbol {node.name!r}") from None
        return _Rat(np.broadcast_to(np.asarray(val, dtype=complex), (npts,))[None].copy())
    if isinstance(node, Neg):
        a = _rat(node.arg, env, npts)
        return _Rat(-a.num, a.den)
    if isinstance(node, BinOp):
        a, b = _rat(node.left, env, npts), _rat(node.right, env, npts)
        if node.op in "+-":
            sign = 1 if node.op == "+" else -1
            if a.den is None and b.den is None:
                return _Rat(_padd(a.num, b.num, sign))
            if a.den is not None and b.den is not None and np.array_equal(a.den, b.den):
                return _Rat(_padd(a.num, b.num, sign), a.den)
            ad = a.den if a.den is not None else np.ones((1, npts), complex)
            bd = b.den if b.den is not None else np.ones((1, npts), complex)
            return _Rat(_padd(_pmul(a.num, bd), _pmul(b.num, ad), sign), _pmul(ad, bd))
        if node.op == "*":
            den = _mul_den(a.den, b.den)
            return _Rat(_pmul(a.num, b.num), den)
        num = a.num if b.den is None else _pmul(a.num, b.den)
        return _Rat(num, _mul_den(a.den, b.num))
    if isinstance(node, Pow):
        base = _rat(node.base, env, npts)
        result = _Rat(np.ones((1, npts), complex))
        n = node.exp
        while n:
            if n & 1:
                result = _Rat(_pmul(result.num, base.num), _mul_den(result.den, base.den))
            n >>= 1
            if n:
                base = _Rat(_pmul(base.num, base.num), _mul_den(base.den, base.den))
        return result
    if isinstance(node, Call):
        a = _rat(node.arg, env, npts)
        if not a.constant:
            raise NotPolynomializableError(f"{node.func}() of a G-dependent argument")
        val = a.num[0] if a.den is None else a.num[0] / a.den[0]
        fn = {"sqrt": np.sqrt, "exp": np.exp, "log": np.log}[node.func]
        with np.errstate(all="ignore"):
            return _Rat(fn(val + 0j)[None])
    raise TypeError(f"not an expression node: {node!r}")


def _mul_den(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return _pmul(a, b)


def _const_env(nc, params, npts):
    env = {"u": nc.u, "v": nc.v, "w": nc.w, "wb": nc.wbar}
    env = {k: np.broadcast_to(np.asarray(v, dtype=complex), (npts,)) for k, v in env.items()}
    for name, val in params.items():
        env[name] = val
    return env


def rational_coefficients(f, nc, params):
    """Numerator/denominator coefficient arrays ``(deg+1, N)`` of ``f`` in G."""
    ast = f.ast if isinstance(f, GenFun) else f
    npts = int(np.size(nc.u))
    nc1 = type(nc)(*(np.ravel(np.asarray(c, dtype=complex)) for c in (nc.u, nc.v, nc.w, nc.wbar)))
    with np.errstate(all="ignore"):
        r = _rat(ast, _const_env(nc1, params, npts), npts)
    return r.num, r.den


# -- single-polynomial API ---------------------------------------------------

@dataclass(frozen=True)
class PolyC:
    """Polynomial in G with ascending complex coefficients ``c_0 .. c_n``.

    ``denominator`` (when present) lists the coefficients of the common
    denominator of the rational function the polynomial was taken from; its
    roots are poles, not zeros.
    """

    coeffs: np.ndarray
    denominator: np.ndarray = None

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
        if c.ndim != 1 or not np.all(np.isfinite(c)):
            raise InvalidInputError("polynomial coefficients must be a finite 1-D sequence")
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self):
        return len(self.trimmed().coeffs) - 1

    def trimmed(self):
        c = self.coeffs
        scale = np.abs(c).max() if c.size else 0.0
        keep = np.nonzero(np.abs(c) > TRIM_RTOL * scale)[0]
        if keep.size == 0:
            return PolyC(np.zeros(1), self.denominator)
        return PolyC(c[: keep[-1] + 1], self.denominator)

    def __call__(self, G):
        return horner(self.coeffs, G)


@dataclass(frozen=True)
class RootSet:
    """Roots sorted by ``(|G|, arg G)`` with multiplicity estimates."""

    roots: np.ndarray
    multiplicity: np.ndarray
    residuals: np.ndarray
    n_infinite: int = 0
    diagnostics: tuple = field(default=())

    def __len__(self):
        return len(self.roots)

    def distinct(self):
        """One representative per cluster of coincident roots."""
        out = []
        for r in self.roots:
            if not any(abs(r - q) < MULTIPLICITY_SEP * (1 + abs(q)) for q in out):
                out.append(r)
        return np.array(out, dtype=complex)


def polynomialize(f, nc, params=None):
    """Numerator polynomial of the rational function ``f(G)`` at one point.

    Raises :class:`NotPolynomializableError` when ``f`` applies sqrt/exp/log
    to a G-dependent argument.
    """
    num, den = rational_coefficients(f, nc, params or {})
    return PolyC(num[:, 0], None if den is None else den[:, 0])


def all_roots(p):
    """All roots of ``p`` with multiplicity (companion eigenvalues + polish)."""
    c = p.coeffs
    if not np.any(c != 0):
        raise IdenticallyZeroError("zero polynomial")
    t = p.trimmed()
    if t.degree == 0:
        raise NoRootsError("non-zero constant polynomial has no roots")
    br = batch_roots(c[:, None], None if p.denominator is None else p.denominator[:, None])
    roots = br.roots[0]
    mult = br.multiplicity[0]
    ok = np.isfinite(roots)
    roots, mult = roots[ok], mult[ok]
    resid = np.abs(t(roots))
    return RootSet(roots, mult, resid, n_infinite=len(c) - 1 - t.degree)


# -- batched root extraction -------------------------------------------------

@dataclass(frozen=True)
class BatchRoots:
    """Per-point root table ``(N, m)``, NaN-padded; ``inf`` marks roots at infinity."""

    roots: np.ndarray
    multiplicity: np.ndarray

    @property
    def count(self):
        return np.sum(~np.isnan(self.roots.real), axis=1)


def sort_roots(roots):
    """Sort each row by ``(|G|, arg G)``; NaN entries go last."""
    mag = np.where(np.isnan(roots.real), np.inf, np.abs(roots))
    mag = np.where(np.isnan(roots.real), np.inf, mag)
    nan_last = np.isnan(roots.real).astype(int)
    arg = np.nan_to_num(np.angle(roots))
    order = np.lexsort((arg, mag, nan_last), axis=-1)
    return np.take_along_axis(roots, order, axis=-1), order


def _polish(c, r):
    """One Newton step per root, kept only where it lowers the residual."""
    dc = _poly_deriv(c)
    with np.errstate(all="ignore"):
        p = horner(c, r)
        dp = horner(dc, r)
        cand = r - p / dp
        better = np.isfinite(cand) & (np.abs(horner(c, cand)) < np.abs(p))
    return np.where(better, cand, r)


def batch_roots(num, den=None, keep_infinite=False):
    """Roots of every column of ``num``; roots that are poles (zeros of ``den``) are dropped.

    With ``keep_infinite`` a drop of the effective degree is reported as
    roots at infinity (used for polynomial constraints, where G = inf is a
    legitimate point of the reciprocal chart).
    """
    num = np.asarray(num, dtype=complex)
    n = num.shape[0] - 1
    npts = num.shape[1]
    width = max(n, 1)
    roots = np.full((npts, width), np.nan + 0j)
    mult = np.zeros((npts, width), dtype=int)
    mag = np.abs(num)
    scale = mag.max(axis=0)
    significant = mag > TRIM_RTOL * scale
    deg = np.where(significant.any(axis=0), n - np.argmax(significant[::-1], axis=0), -1)
    for d in np.unique(deg):
        if d < 1:
            continue
        sel = np.nonzero(deg == d)[0]
        c = num[: d + 1, sel]
        comp = np.zeros((len(sel), d, d), dtype=complex)
        comp[:, 0, :] = -(c[d - 1 :: -1] / c[d]).T
        if d > 1:
            comp[:, np.arange(1, d), np.arange(d - 1)] = 1
        r = np.linalg.eigvals(comp)
        dist = np.abs(r[:, :, None] - r[:, None, :])
        close = dist < MULTIPLICITY_SEP * (1 + np.abs(r[:, :, None]))
        m = close.sum(axis=2)
        clustered = (close * r[:, None, :]).sum(axis=2) / m
        cc = np.broadcast_to(c[:, :, None], (d + 1, len(sel), d)).reshape(d + 1, -1)
        polished = _polish(cc, r.reshape(-1)).reshape(r.shape)
        r = np.where(m > 1, clustered, polished)
        roots[sel, :d] = r
        mult[sel, :d] = m
        if keep_infinite and d < n:
            roots[sel, d:n] = np.inf + 0j
            mult[sel, d:n] = n - d
    if den is not None:
        den = np.asarray(den, dtype=complex)
        finite = np.isfinite(roots)
        rr = np.where(finite, roots, 0)
        dv = _horner_rows(den, rr)
        dscale = _horner_rows(np.abs(den), np.abs(rr))
        pole = finite & (np.abs(dv) <= POLE_RTOL * np.maximum(dscale, 1e-300))
        roots = np.where(pole, np.nan + 0j, roots)
        mult = np.where(pole, 0, mult)
    roots, order = sort_roots(roots)
    mult = np.take_along_axis(mult, order, axis=-1)
    return BatchRoots(roots, mult)


def _horner_rows(coeffs, r):
    """Evaluate column ``j`` of ``coeffs`` at every entry of row ``j`` of ``r``."""
    val = np.zeros(r.shape, dtype=np.result_type(coeffs, r))
    for c in coeffs[::-1]:
        val = val * r + c[:, None]
    return val


def chordal(a, b):
    """Chordal distance on the Riemann sphere; handles ``inf`` entries."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    with np.errstate(all="ignore"):
        ia, ib = np.isinf(a), np.isinf(b)
        d = np.abs(a - b) / (np.hypot(1, np.abs(a)) * np.hypot(1, np.abs(b)))
        d = np.where(ia & ~ib, 1 / np.hypot(1, np.abs(b)), d)
        d = np.where(ib & ~ia, 1 / np.hypot(1, np.abs(a)), d)
        d = np.where(ia & ib, 0.0, d)
        # both huge but finite: compare reciprocals
        big = ~ia & ~ib & (np.abs(a) > 1e150) & (np.abs(b) > 1e150)
        d = np.where(big, np.abs(1 / a - 1 / b), d)
    return np.where(np.isnan(a.real) | np.isnan(b.real), np.nan, d)


# -- Newton fallback ----------------------------------------------------------

def newton_roots(f, fprime, seeds, max_iter=100, tol=1e-12, dedup=1e-9, radius=None, scale=1.0):
    """Newton iteration from each seed; returns the converged, deduplicated roots.

    Iterates leaving the disc ``|G| <= radius`` (default ``2 max|seed| + 1``)
    or failing to converge within ``max_iter`` steps are dropped and noted in
    ``diagnostics``.
    """
    seeds = np.atleast_1d(np.asarray(seeds, dtype=complex))
    if radius is None:
        radius = 2 * np.abs(seeds).max() + 1 if seeds.size else 1.0
    found, notes = [], []
    for s in seeds:
        G = complex(s)
        status = "no convergence"
        for _ in range(max_iter):
            fv = complex(f(G))
            if abs(fv) <= tol * scale:
                status = "ok"
                break
            d = complex(fprime(G))
            if d == 0 or not np.isfinite(d):
                status = "zero derivative"
                break
            G = G - fv / d
            if not np.isfinite(G) or abs(G) > radius:
                status = "left search disc"
                break
        if status == "ok":
            if not any(abs(G - q) <= dedup for q in found):
                found.append(G)
        else:
            notes.append(f"seed {s}: {status}")
    roots = np.array(found, dtype=complex)
    roots = roots[np.lexsort((np.angle(roots), np.abs(roots)))] if roots.size else roots
    resid = np.array([abs(complex(f(r))) for r in roots])
    return RootSet(roots, np.ones(len(roots), dtype=int), resid, diagnostics=tuple(notes))


# -- the generating equation as a field of roots ----------------------------

class GeneratingEquation:
    """A holomorphic equation ``f(G, B0, B1; coords) = 0`` defining G(X).

    Precomputes the symbolic partials needed for implicit differentiation:
    ``f_G`` (total G-derivative), ``f_B0``, ``f_B1`` and the explicit
    coordinate partials that appear when ``f`` is itself a derivative output.
    """

    def __init__(self, f, params=None, polynomial=None):
        self.f = f
        self.params = dict(params or {})
        f.bind_check(self.params)
        self.f_G = f.d_total_dG()
        self.f_B0 = f.d_partial("B0")
        self.f_B1 = f.d_partial("B1")
        self.f_coord = {s: f.d_symbol(s) for s in ("u", "v", "w", "wb")}
        if polynomial is None:
            try:
                self.coefficients(to_null_coords(np.zeros((1, 4))))
                polynomial = True
            except NotPolynomializableError:
                polynomial = False
        self.polynomial = polynomial
        self._poly = None

    def coefficients(self, nc):
        return rational_coefficients(self.f, nc, self.params)

    @property
    def is_polynomial_in_G(self):
        """True when ``f`` has no denominator (roots at infinity are meaningful)."""
        if self._poly is None:
            _, den = self.coefficients(to_null_coords(np.zeros((1, 4))))
            self._poly = den is None
        return self._poly

    def env(self, nc, G):
        env = dict(self.params)
        env.update(G=G, B0=nc.w * G + nc.u, B1=nc.v * G + nc.wbar,
                   u=nc.u, v=nc.v, w=nc.w, wb=nc.wbar)
        return env

    def roots(self, points):
        """:class:`BatchRoots` at ``(N, 4)`` events (polynomial path only)."""
        if not self.polynomial:
            raise NotPolynomializableError(str(self.f))
        nc = to_null_coords(np.asarray(points, dtype=float).reshape(-1, 4))
        num, den = self.coefficients(nc)
        return batch_roots(num, den, keep_infinite=den is None)

    def value(self, points, G, fn=None):
        nc = to_null_coords(np.asarray(points, dtype=float).reshape(-1, 4))
        fn = fn or self.f
        with np.errstate(all="ignore"):
            val, pole = fn.evaluate_env(self.env(nc, np.asarray(G, dtype=complex)), on_pole="mask")
        shape = np.shape(nc.u)
        return np.broadcast_to(np.where(pole, np.nan, val), shape).astype(complex)

    def residual_scale(self, points, G):
        """Magnitude scale ``sum_k |c_k| |G|^k`` of the numerator polynomial."""
        if not self.polynomial:
            return 1 + np.abs(G)
        nc = to_null_coords(np.asarray(points, dtype=float).reshape(-1, 4))
        num, _ = self.coefficients(nc)
        aG = np.abs(np.asarray(G, dtype=complex).reshape(-1))
        with np.errstate(all="ignore"):
            return np.maximum(_horner_rows(np.abs(num), aG[:, None])[:, 0], 1.0)

    def derivative_scale(self, points, G):
        """Scale of ``df/dG``: ``sum_k k |c_k| |G|^(k-1)`` of the numerator."""
        if not self.polynomial:
            return 1 + np.abs(G)
        nc = to_null_coords(np.asarray(points, dtype=float).reshape(-1, 4))
        num, den = self.coefficients(nc)
        aG = np.abs(np.asarray(G, dtype=complex).reshape(-1))
        with np.errstate(all="ignore"):
            s = _horner_rows(np.abs(_poly_deriv(num)), aG[:, None])[:, 0]
            if den is not None:
                s = s / np.abs(_horner_rows(den, np.asarray(G, complex).reshape(-1)[:, None])[:, 0])
        return np.maximum(s, 1e-300)

    def null_gradient(self, points, G):
        """``(dG/du, dG/dv, dG/dw, dG/dwb)`` by implicit differentiation."""
        nc = to_null_coords(np.asarray(points, dtype=float).reshape(-1, 4))
        G = np.asarray(G, dtype=complex).reshape(-1)
        env = self.env(nc, G)
        with np.errstate(all="ignore"):
            fG = self.f_G.evaluate_env(env, on_pole="mask")[0]
            f0 = self.f_B0.evaluate_env(env, on_pole="mask")[0]
            f1 = self.f_B1.evaluate_env(env, on_pole="mask")[0]
            ex = {s: fn.evaluate_env(env, on_pole="mask")[0] for s, fn in self.f_coord.items()}
            du = -(f0 + ex["u"]) / fG
            dv = -(G * f1 + ex["v"]) / fG
            dw = -(G * f0 + ex["w"]) / fG
            dwb = -(f1 + ex["wb"]) / fG
        return du, dv, dw, dwb

    def cartesian_gradient(self, points, G):
        """``(N, 4)`` complex derivatives of G along x, y, z, t."""
        du, dv, dw, dwb = self.null_gradient(points, G)
        return np.stack([dw + dwb, -1j * dw + 1j * dwb, du - dv, du + dv], axis=-1)

    def numerator_polish(self, points, G, iters=8):
        """Newton on the numerator polynomial; recovers roots cancelled by the denominator.

        Returns the polished values and the relative numerator residual.
        """
        nc = to_null_coords(np.asarray(points, dtype=float).reshape(-1, 4))
        num, _ = self.coefficients(nc)
        dnum = _poly_deriv(num)
        G = np.asarray(G, dtype=complex).reshape(-1, 1).copy()
        with np.errstate(all="ignore"):
            for _ in range(iters):
                step = _horner_rows(num, G) / _horner_rows(dnum, G)
                G = np.where(np.isfinite(step), G - step, G)
            res = np.abs(_horner_rows(num, G)) / np.maximum(
                _horner_rows(np.abs(num), np.abs(G)), 1e-300)
        return G[:, 0], res[:, 0]

    def newton_polish(self, points, G, iters=3):
        """A few Newton steps in G at fixed points (non-polynomial path)."""
        G = np.asarray(G, dtype=complex).reshape(-1).copy()
        for _ in range(iters):
            fv = self.value(points, G)
            fg = self.value(points, G, self.f_G)
            with np.errstate(all="ignore"):
                step = fv / fg
            G = np.where(np.isfinite(step), G - step, G)
        return G
