"""Random expressions and generating functions shared by several test modules."""

import random

import numpy as np
from hypothesis import strategies as st

from twistor_eikonal.dsl.nodes import BinOp, Call, Neg, Num, Pow, Sym

LEAVES = ("G", "B0", "B1", "a", "b")
NUMBERS = (0.0, 1.0, 2.0, 3.0, 0.5, 1.25, 7.0, 1j)


def random_ast(rnd, depth=4):
    """A tree of the shape the parser produces (non-negative literals, unary minus)."""
    if depth == 0 or rnd.random() < 0.25:
        if rnd.random() < 0.6:
            return Sym(rnd.choice(LEAVES))
        return Num(rnd.choice(NUMBERS))
    kind = rnd.choice(("bin", "bin", "bin", "neg", "pow", "call"))
    if kind == "bin":
        return BinOp(rnd.choice("+-*/"), random_ast(rnd, depth - 1), random_ast(rnd, depth - 1))
    if kind == "neg":
        return Neg(random_ast(rnd, depth - 1))
    if kind == "pow":
        return Pow(random_ast(rnd, depth - 1), rnd.randint(0, 4))
    return Call(rnd.choice(("sqrt", "exp", "log")), random_ast(rnd, depth - 1))


def ast_corpus(n=50, seed=7):
    rnd = random.Random(seed)
    return [random_ast(rnd) for _ in range(n)]


def ast_strategy():
    leaf = st.one_of(st.sampled_from([Sym(s) for s in LEAVES]),
                     st.sampled_from([Num(v) for v in NUMBERS]))

    def extend(children):
        return st.one_of(
            st.builds(BinOp, st.sampled_from("+-*/"), children, children),
            st.builds(Neg, children),
            st.builds(Pow, children, st.integers(0, 4)),
            st.builds(Call, st.sampled_from(("sqrt", "exp", "log")), children),
        )

    return st.recursive(leaf, extend, max_leaves=12)


def random_polynomial_text(rng, max_deg=(4, 4, 4), terms=4, scale=1.0):
    """Sum of random monomials c * G^i * B0^j * B1^k with complex coefficients."""
    parts = []
    for _ in range(terms):
        i, j, k = (int(rng.integers(0, d + 1)) for d in max_deg)
        c = complex(rng.normal(0, scale), rng.normal(0, scale))
        mono = "*".join([f"G^{i}"] * (i > 0) + [f"B0^{j}"] * (j > 0) + [f"B1^{k}"] * (k > 0))
        coef = f"({c.real:.6f} + {c.imag:.6f}*i)"
        parts.append(coef + ("*" + mono if mono else ""))
    return " + ".join(parts)


def fd_grad(fun, point, h=1e-5):
    """Central-difference gradient of a callable on (N, 4) events."""
    p = np.asarray(point, dtype=float)
    hs = h * (1 + np.abs(p))
    out = []
    for ax in range(4):
        e = np.zeros(4)
        e[ax] = hs[ax]
        out.append((fun((p + e)[None])[0] - fun((p - e)[None])[0]) / (2 * hs[ax]))
    return np.array(out)


def separated_root_index(equation, point):
    """Index (in the 'auto:k' ordering) of the root farthest from all others.

    The root G = 0 is skipped: generators with a G factor have it everywhere
    and it meets other roots on whole sheets.
    """
    from twistor_eikonal.roots import chordal

    r = equation.roots(np.atleast_2d(np.append(point, 0.0)[:4])).roots[0]
    r = r[~np.isnan(r.real)]
    d = chordal(r[:, None], r[None, :]) + 10 * np.eye(len(r))
    score = np.where(np.abs(r) > 1e-12, d.min(axis=1), -1.0)
    return int(np.argmax(score))
