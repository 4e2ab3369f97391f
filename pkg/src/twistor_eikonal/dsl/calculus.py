"""Numeric evaluation and symbolic differentiation of expression trees."""

import numpy as np

from .nodes import (
    BinOp, Call, Neg, Num, Pow, Sym, ONE, ZERO,
    add, call, div, mul, neg, power, sub,
)
from .printer import to_text
from ..errors import InvalidInputError, PoleError

_FUNCS = {"sqrt": np.sqrt, "exp": np.exp, "log": np.log}


class _Evaluator:
    def __init__(self, env, on_pole):
        self.env = env
        self.on_pole = on_pole
        self.pole = None

    def __call__(self, node):
        if isinstance(node, Num):
            return node.value
        if isinstance(node, Sym):
            try:
                return self.env[node.name]
            except KeyError:
                raise InvalidInputError(f"unbound symbol {node.name!r}") from None
        if isinstance(node, Neg):
            return -self(node.arg)
        if isinstance(node, BinOp):
            a, b = self(node.left), self(node.right)
            if node.op == "+":
                return a + b
            if node.op == "-":
                return a - b
            if node.op == "*":
                return a * b
            zero = np.asarray(b) == 0
            if np.any(zero):
                if self.on_pole == "raise":
                    raise PoleError(to_text(node.right))
                self.pole = zero if self.pole is None else (self.pole | zero)
                b = np.where(zero, np.nan, b)
            return a / b
        if isinstance(node, Pow):
            return self(node.base) ** node.exp
        if isinstance(node, Call):
            return _FUNCS[node.func](self(node.arg) + 0j)
        raise TypeError(f"not an expression node: {node!r}")


def evaluate(node, env, on_pole="raise"):
    """Evaluate ``node`` with symbol values from ``env`` (scalars or arrays).

    With ``on_pole="raise"`` a vanishing denominator raises :class:`PoleError`;
    with ``on_pole="mask"`` the affected entries become NaN and the pole mask
    is returned alongside the value.
    """
    ev = _Evaluator(env, on_pole)
    with np.errstate(all="ignore"):
        value = ev(node) + 0j
    if on_pole == "mask":
        mask = np.zeros(np.shape(value), dtype=bool) if ev.pole is None else ev.pole
        return value, np.broadcast_to(mask, np.shape(value))
    return value


def derivative(node, seeds):
    """Directional derivative; ``seeds`` maps symbol name -> derivative node."""
    if isinstance(node, Num):
        return ZERO
    if isinstance(node, Sym):
        return seeds.get(node.name, ZERO)
    if isinstance(node, Neg):
        return neg(derivative(node.arg, seeds))
    if isinstance(node, BinOp):
        a, b = node.left, node.right
        da, db = derivative(a, seeds), derivative(b, seeds)
        if node.op == "+":
            return add(da, db)
        if node.op == "-":
            return sub(da, db)
        if node.op == "*":
            return add(mul(da, b), mul(a, db))
        if db == ZERO:
            return div(da, b)
        return div(sub(mul(da, b), mul(a, db)), power(b, 2))
    if isinstance(node, Pow):
        db = derivative(node.base, seeds)
        if node.exp == 0 or db == ZERO:
            return ZERO
        return mul(mul(Num(node.exp), power(node.base, node.exp - 1)), db)
    if isinstance(node, Call):
        da = derivative(node.arg, seeds)
        if da == ZERO:
            return ZERO
        if node.func == "exp":
            return mul(node, da)
        if node.func == "log":
            return div(da, node.arg)
        if node.func == "sqrt":
            return div(da, mul(Num(2), call("sqrt", node.arg)))
    raise TypeError(f"not an expression node: {node!r}")


def partial(node, var):
    return derivative(node, {var: ONE})


def total_dG(node):
    """``df/dG + w df/dB0 + v df/dB1`` through the incidence substitution."""
    dG = partial(node, "G")
    d0 = partial(node, "B0")
    d1 = partial(node, "B1")
    return add(add(dG, mul(d0, Sym("w"))), mul(d1, Sym("v")))
