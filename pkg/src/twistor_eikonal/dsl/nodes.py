"""Expression tree for holomorphic generating functions.

Nodes are frozen dataclasses, so structural equality is plain ``==``.
The ``add``/``sub``/``mul``/... helpers apply local simplification only
(constant folding and 0/1 elimination); there is no canonical form.
"""

from dataclasses import dataclass

TWISTOR_VARS = ("G", "B0", "B1")
COORD_SYMBOLS = ("u", "v", "w", "wb")
FUNCTIONS = ("sqrt", "exp", "log")
RESERVED = frozenset(TWISTOR_VARS + COORD_SYMBOLS + ("i",) + FUNCTIONS)


class Node:
    __slots__ = ()


@dataclass(frozen=True)
class Num(Node):
    value: complex

    def __post_init__(self):
        object.__setattr__(self, "value", complex(self.value))


@dataclass(frozen=True)
class Sym(Node):
    name: str


@dataclass(frozen=True)
class Neg(Node):
    arg: Node


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node


@dataclass(frozen=True)
class Pow(Node):
    base: Node
    exp: int


@dataclass(frozen=True)
class Call(Node):
    func: str
    arg: Node


ZERO = Num(0)
ONE = Num(1)


def is_num(node, value=None):
    if not isinstance(node, Num):
        return False
    return value is None or node.value == value


def neg(a):
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def add(a, b):
    if is_num(a, 0):
        return b
    if is_num(b, 0):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value + b.value)
    if isinstance(b, Neg):
        return BinOp("-", a, b.arg)
    return BinOp("+", a, b)


def sub(a, b):
    if is_num(b, 0):
        return a
    if is_num(a, 0):
        return neg(b)
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value - b.value)
    if isinstance(b, Neg):
        return BinOp("+", a, b.arg)
    return BinOp("-", a, b)


def mul(a, b):
    if is_num(a, 0) or is_num(b, 0):
        return ZERO
    if is_num(a, 1):
        return b
    if is_num(b, 1):
        return a
    if is_num(a, -1):
        return neg(b)
    if is_num(b, -1):
        return neg(a)
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value * b.value)
    if isinstance(a, Neg) and isinstance(b, Neg):
        return mul(a.arg, b.arg)
    if isinstance(a, Neg):
        return neg(mul(a.arg, b))
    if isinstance(b, Neg):
        return neg(mul(a, b.arg))
    return BinOp("*", a, b)


def div(a, b):
    if is_num(b, 1):
        return a
    if isinstance(a, Neg):
        return neg(div(a.arg, b))
    if is_num(a, 0) and not is_num(b, 0):
        return ZERO
    if isinstance(a, Num) and isinstance(b, Num) and b.value != 0:
        return Num(a.value / b.value)
    return BinOp("/", a, b)


def power(a, n):
    if n == 0:
        return ONE
    if n == 1:
        return a
    if isinstance(a, Num):
        return Num(a.value**n)
    return Pow(a, n)


def call(func, a):
    return Call(func, a)


def walk(node):
    """Pre-order traversal."""
    yield node
    if isinstance(node, Neg):
        yield from walk(node.arg)
    elif isinstance(node, BinOp):
        yield from walk(node.left)
        yield from walk(node.right)
    elif isinstance(node, Pow):
        yield from walk(node.base)
    elif isinstance(node, Call):
        yield from walk(node.arg)


def symbols(node):
    return {n.name for n in walk(node) if isinstance(n, Sym)}
