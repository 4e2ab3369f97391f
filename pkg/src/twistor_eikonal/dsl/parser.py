"""Recursive-descent parser for the generating-function grammar::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := ('-' | '+') factor | base ('^' integer)?
    base   := number | 'i' | identifier | '(' expr ')' | func '(' expr ')'
    func   := 'sqrt' | 'exp' | 'log'

Unary signs are an extension of the bare grammar; they are needed to write
e.g. ``-B1 + G*B0``.
"""

import re

from .nodes import COORD_SYMBOLS, FUNCTIONS, RESERVED, BinOp, Call, Neg, Num, Pow, Sym
from ..errors import ParseError, UnknownIdentifierError

ANTIHOLOMORPHIC = frozenset(
    {"conj", "conjugate", "bar", "re", "im", "real", "imag", "abs", "arg", "Re", "Im"}
)

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


class _Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind, self.text, self.line, self.col = kind, text, line, col

    def __repr__(self):
        return f"{self.kind}:{self.text!r}@{self.line}:{self.col}"


def tokenize(text):
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "ws":
            chunk = m.group()
            if "\n" in chunk:
                line += chunk.count("\n")
                line_start = pos + chunk.rindex("\n") + 1
        else:
            tokens.append(_Token(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    tokens.append(_Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text, params, allow_coords, extra_symbols):
        self.tokens = tokenize(text)
        self.pos = 0
        self.params = None if params is None else frozenset(params)
        self.allow_coords = allow_coords
        self.extra = frozenset(extra_symbols)

    @property
    def tok(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, message, tok=None):
        tok = tok or self.tok
        raise ParseError(message, tok.line, tok.col)

    def expect_operand(self):
        if self.tok.kind == "eof" and self.pos > 0:
            prev = self.tokens[self.pos - 1]
            self.fail(f"expected operand after {prev.text!r}", prev)

    def parse(self):
        if self.tok.kind == "eof":
            self.fail("empty expression")
        node = self.expr()
        if self.tok.kind != "eof":
            self.fail(f"unexpected {self.tok.text!r}")
        return node

    def expr(self):
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance().text
            node = BinOp(op, node, self.factor())
        return node

    def factor(self):
        self.expect_operand()
        if self.tok.kind == "op" and self.tok.text in "+-":
            sign = self.advance().text
            arg = self.factor()
            return Neg(arg) if sign == "-" else arg
        node = self.base()
        if self.tok.kind == "op" and self.tok.text == "^":
            caret = self.advance()
            if self.tok.kind != "number" or not self.tok.text.isdigit():
                if self.tok.kind == "eof":
                    self.fail("expected integer exponent after '^'", caret)
                self.fail("exponent must be a non-negative integer literal")
            node = Pow(node, int(self.advance().text))
        return node

    def base(self):
        self.expect_operand()
        tok = self.tok
        if tok.kind == "number":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            node = self.expr()
            self.close_paren(tok)
            return node
        if tok.kind == "ident":
            return self.identifier()
        if tok.kind == "eof":
            self.fail("unexpected end of input")
        self.fail(f"unexpected {tok.text!r}")

    def close_paren(self, opening):
        if self.tok.kind == "op" and self.tok.text == ")":
            self.advance()
            return
        if self.tok.kind == "eof":
            self.fail(f"unclosed '(' opened at column {opening.col}")
        self.fail(f"expected ')' but found {self.tok.text!r}")

    def identifier(self):
        tok = self.advance()
        name = tok.text
        is_call = self.tok.kind == "op" and self.tok.text == "("
        if name in ANTIHOLOMORPHIC:
            self.fail(f"{name!r} is not holomorphic; conjugation is not part of the grammar", tok)
        if is_call:
            if name not in FUNCTIONS:
                raise UnknownIdentifierError(f"unknown function {name!r}", tok.line, tok.col)
            opening = self.advance()
            arg = self.expr()
            self.close_paren(opening)
            return Call(name, arg)
        if name in FUNCTIONS:
            self.fail(f"function {name!r} needs an argument", tok)
        if name == "i":
            return Num(1j)
        if name in COORD_SYMBOLS and not self.allow_coords:
            self.fail(
                f"coordinate symbol {name!r} is not allowed; generating functions "
                "depend on coordinates only through B0 and B1",
                tok,
            )
        if name in RESERVED or name in self.extra:
            return Sym(name)
        if self.params is not None and name not in self.params:
            raise UnknownIdentifierError(f"unknown identifier {name!r}", tok.line, tok.col)
        return Sym(name)


def parse_expr(text, params=None, allow_coords=False, extra_symbols=()):
    """Parse ``text`` into a bare expression tree.

    ``params`` restricts the admissible free identifiers (None allows any);
    ``extra_symbols`` are always accepted (e.g. ``x, y, z, t`` for
    spacetime expressions).
    """
    if not isinstance(text, str):
        raise TypeError("expression text must be a string")
    return _Parser(text, params, allow_coords, extra_symbols).parse()
