"""Precedence-aware printer whose output re-parses to the same tree."""

from .nodes import BinOp, Call, Neg, Num, Pow, Sym

_SUM, _TERM, _UNARY, _ATOM = 1, 2, 3, 5


def _number(value):
    re, im = value.real, value.imag
    if im == 0 and re >= 0 and not (re == 0 and str(re).startswith("-")):
        if re.is_integer() and re < 1e15:
            return str(int(re)), _ATOM
        return repr(re), _ATOM
    if re == 0 and im == 1:
        return "i", _ATOM
    if im == 0:
        return "-" + _number(complex(-re))[0], _UNARY
    if re == 0:
        mag = _number(complex(abs(im)))[0]
        return ("-" if im < 0 else "") + f"{mag}*i", _UNARY if im < 0 else _TERM
    mag = _number(complex(abs(im)))[0]
    sign = "-" if im < 0 else "+"
    return f"{_number(complex(re))[0]} {sign} {mag}*i", _SUM


def _fmt(node):
    if isinstance(node, Num):
        return _number(node.value)
    if isinstance(node, Sym):
        return node.name, _ATOM
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg)})", _ATOM
    if isinstance(node, Pow):
        return f"{_wrap(node.base, _ATOM)}^{node.exp}", _UNARY + 1
    if isinstance(node, Neg):
        return "-" + _wrap(node.arg, _UNARY), _UNARY
    if isinstance(node, BinOp):
        if node.op in "+-":
            return f"{_wrap(node.left, _SUM)} {node.op} {_wrap(node.right, _TERM)}", _SUM
        return f"{_wrap(node.left, _TERM)}{node.op}{_wrap(node.right, _UNARY)}", _TERM
    raise TypeError(f"not an expression node: {node!r}")


def _wrap(node, min_prec):
    text, prec = _fmt(node)
    return text if prec >= min_prec else f"({text})"


def to_text(node):
    return _fmt(node)[0]
