"""Generating-function DSL: parse, print, evaluate and differentiate.

A :class:`GenFun` is a holomorphic expression in the gauge-fixed twistor
variables ``G, B0, B1`` and named complex parameters.  Derivative outputs may
also contain the coordinate symbols ``u, v, w, wb`` and are then flagged as
coordinate-dependent (``has_coords``).
"""

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import nodes
from .calculus import derivative, evaluate, partial, total_dG
from .nodes import COORD_SYMBOLS, FUNCTIONS, RESERVED, TWISTOR_VARS, Node
from .parser import parse_expr
from .printer import to_text
from ..errors import InvalidInputError

__all__ = ["GenFun", "EvalContext", "Evaluation", "parse", "nodes", "to_text"]


@dataclass(frozen=True)
class EvalContext:
    """Point(s) of evaluation: null coordinates, the spinor ratio G, parameters.

    ``B0 = w G + u`` and ``B1 = v G + wb`` are derived, never stored.
    """

    nc: object
    G: complex
    params: Mapping = field(default_factory=dict)

    def env(self):
        nc, G = self.nc, self.G
        env = {name: complex(val) if np.ndim(val) == 0 else np.asarray(val)
               for name, val in self.params.items()}
        env.update(
            G=G,
            B0=nc.w * G + nc.u,
            B1=nc.v * G + nc.wbar,
            u=nc.u, v=nc.v, w=nc.w, wb=nc.wbar,
        )
        return env


@dataclass(frozen=True)
class Evaluation:
    value: complex
    principal_branches: tuple


@dataclass(frozen=True)
class GenFun:
    ast: Node

    @classmethod
    def parse(cls, text, params=None):
        return cls(parse_expr(text, params=params))

    def __str__(self):
        return to_text(self.ast)

    def __repr__(self):
        return f"GenFun({str(self)!r})"

    @property
    def symbols(self):
        return nodes.symbols(self.ast)

    @property
    def parameters(self):
        return frozenset(self.symbols - RESERVED)

    @property
    def has_coords(self):
        return bool(self.symbols & set(COORD_SYMBOLS))

    @property
    def principal_branches(self):
        return tuple(sorted({n.func for n in nodes.walk(self.ast) if isinstance(n, nodes.Call)}))

    def bind_check(self, params):
        missing = self.parameters - set(params)
        if missing:
            raise InvalidInputError(f"unbound parameters: {', '.join(sorted(missing))}")

    def evaluate(self, ctx, on_pole="raise"):
        self.bind_check(ctx.params)
        return evaluate(self.ast, ctx.env(), on_pole=on_pole)

    def evaluate_detailed(self, ctx):
        return Evaluation(self.evaluate(ctx), self.principal_branches)

    def evaluate_env(self, env, on_pole="raise"):
        return evaluate(self.ast, env, on_pole=on_pole)

    def d_partial(self, var):
        if var not in TWISTOR_VARS:
            raise InvalidInputError(f"can only differentiate in {TWISTOR_VARS}, got {var!r}")
        return GenFun(partial(self.ast, var))

    def d_total_dG(self):
        return GenFun(total_dG(self.ast))

    def d_symbol(self, name):
        """Partial derivative with respect to an arbitrary symbol (e.g. ``x``)."""
        return GenFun(partial(self.ast, name))

    def __add__(self, other):
        return GenFun(nodes.add(self.ast, _as_node(other)))

    def __sub__(self, other):
        return GenFun(nodes.sub(self.ast, _as_node(other)))

    def __mul__(self, other):
        return GenFun(nodes.mul(self.ast, _as_node(other)))

    def __rmul__(self, other):
        return GenFun(nodes.mul(_as_node(other), self.ast))

    def __truediv__(self, other):
        return GenFun(nodes.div(self.ast, _as_node(other)))


def _as_node(obj):
    if isinstance(obj, GenFun):
        return obj.ast
    if isinstance(obj, Node):
        return obj
    return nodes.Num(obj)


def parse(text, params=None, allow_coords=False, extra_symbols=()):
    """Parse generating-function text into a :class:`GenFun`."""
    return GenFun(parse_expr(text, params=params, allow_coords=allow_coords,
                             extra_symbols=extra_symbols))


def eval_genfun(f, ctx):
    return f.evaluate(ctx)


def d_total_dG(f):
    return f.d_total_dG()


def d_partial(f, var):
    return f.d_partial(var)
