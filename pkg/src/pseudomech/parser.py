"""Expression language for phase-space functions.

Precedence, tightest first: ``^`` (integer exponent), unary minus, ``*``,
binary ``+``/``-``.  Binary operators are left-associative.  ``i`` is the
imaginary unit, ``PI`` the circle constant and every other identifier must
name a variable of the table (so ``pi`` is the fermionic momentum).
Numbers may carry a trailing ``i`` (``2.5i``) to make them imaginary.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

from pseudomech.superpoly import SuperPolynomial, VarTable


class ParseError(ValueError):
    def __init__(self, msg, pos):
        super().__init__(f"{msg} at position {pos}")
        self.pos = pos


# -- AST --------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: Union[int, float]


@dataclass(frozen=True)
class Imag:
    value: Union[int, float]  # the literal ``<value>i``


@dataclass(frozen=True)
class ImagUnit:
    pass


@dataclass(frozen=True)
class PiConst:
    pass


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # "+", "-", "*"
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


Expr = Union[Num, Imag, ImagUnit, PiConst, Var, Neg, BinOp, Pow]

_PREC = {"+": 1, "-": 1, "*": 2}
_NEG, _POW, _ATOM = 3, 4, 5


# -- lexer ------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)(?P<imag>i(?![A-Za-z0-9_]))?
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*^()])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str  # "num", "imag", "ident", "op", "end"
    text: str
    pos: int


def tokenize(src: str):
    out, pos = [], 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if not m:
            raise ParseError(f"unexpected character {src[pos]!r}", pos)
        if m.group("num") is not None:
            kind = "imag" if m.group("imag") else "num"
            out.append(Token(kind, m.group("num"), pos))
        elif m.group("ident") is not None:
            out.append(Token("ident", m.group("ident"), pos))
        elif m.group("op") is not None:
            out.append(Token("op", m.group("op"), pos))
        pos = m.end()
    out.append(Token("end", "", len(src)))
    return out


def _number(text):
    if re.fullmatch(r"\d+", text):
        return int(text)
    return float(text)


# -- parser -----------------------------------------------------------------

class _Parser:
    def __init__(self, src, table):
        self.toks = tokenize(src)
        self.i = 0
        self.table = table

    @property
    def tok(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text):
        t = self.tok
        if t.kind != "op" or t.text != text:
            raise ParseError(f"expected {text!r}, found {t.text or 'end of input'!r}", t.pos)
        return self.take()

    def parse(self):
        e = self.expr()
        if self.tok.kind != "end":
            raise ParseError(f"unexpected {self.tok.text!r}", self.tok.pos)
        return e

    def expr(self):
        left = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.take().text
            left = BinOp(op, left, self.term())
        return left

    def term(self):
        left = self.unary()
        while self.tok.kind == "op" and self.tok.text == "*":
            self.take()
            left = BinOp("*", left, self.unary())
        return left

    def unary(self):
        if self.tok.kind == "op" and self.tok.text == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        while self.tok.kind == "op" and self.tok.text == "^":
            at = self.take().pos
            t = self.tok
            if t.kind != "num" or not re.fullmatch(r"\d+", t.text):
                raise ParseError("exponent must be a non-negative integer literal", t.pos)
            self.take()
            n = int(t.text)
            if n >= 2 and self.table is not None and _has_odd(base, self.table):
                raise ParseError("power >= 2 of an expression containing an odd variable", at)
            base = Pow(base, n)
        return base

    def atom(self):
        t = self.take()
        if t.kind == "num":
            return Num(_number(t.text))
        if t.kind == "imag":
            return Imag(_number(t.text))
        if t.kind == "ident":
            if t.text == "i":
                return ImagUnit()
            if t.text == "PI":
                return PiConst()
            if self.table is not None and t.text not in self.table:
                raise ParseError(f"unknown identifier {t.text!r}", t.pos)
            return Var(t.text)
        if t.kind == "op" and t.text == "(":
            e = self.expr()
            self.expect(")")
            return e
        raise ParseError(f"unexpected {t.text or 'end of input'!r}", t.pos)


def _has_odd(e, table):
    if isinstance(e, Var):
        return table.is_odd(e.name)
    if isinstance(e, Neg):
        return _has_odd(e.operand, table)
    if isinstance(e, BinOp):
        return _has_odd(e.left, table) or _has_odd(e.right, table)
    if isinstance(e, Pow):
        return _has_odd(e.base, table)
    return False


def parse_expr(src: str, table: VarTable | None = None) -> Expr:
    """Parse to an AST; with a table, identifiers and odd powers are checked."""
    return _Parser(src, table).parse()


def to_poly(e: Expr, table: VarTable) -> SuperPolynomial:
    if isinstance(e, Num):
        return table.const(e.value)
    if isinstance(e, Imag):
        return table.const(1j * e.value)
    if isinstance(e, ImagUnit):
        return table.const(1j)
    if isinstance(e, PiConst):
        return table.const(math.pi)
    if isinstance(e, Var):
        return table.var(e.name)
    if isinstance(e, Neg):
        return -to_poly(e.operand, table)
    if isinstance(e, Pow):
        return to_poly(e.base, table) ** e.exponent
    a, b = to_poly(e.left, table), to_poly(e.right, table)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    return a * b


def parse(src: str, table: VarTable) -> SuperPolynomial:
    return to_poly(parse_expr(src, table), table)


# -- printer ----------------------------------------------------------------

def _prec(e):
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return _NEG
    if isinstance(e, Pow):
        return _POW
    return _ATOM


def _wrap(e, min_prec):
    s = to_source(e)
    return f"({s})" if _prec(e) < min_prec else s


def to_source(e: Expr) -> str:
    """Print with the fewest parentheses that parse back to the same tree."""
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Imag):
        return f"{e.value!r}i"
    if isinstance(e, ImagUnit):
        return "i"
    if isinstance(e, PiConst):
        return "PI"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return "-" + _wrap(e.operand, _NEG)
    if isinstance(e, Pow):
        return f"{_wrap(e.base, _POW)}^{e.exponent}"
    p = _PREC[e.op]
    sep = "*" if e.op == "*" else f" {e.op} "
    return _wrap(e.left, p) + sep + _wrap(e.right, p + 1)
