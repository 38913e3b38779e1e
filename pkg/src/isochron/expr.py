"""Parser and canonical printer for coefficient expressions.

Grammar (ASCII, ``i`` is the imaginary unit)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' ['-'] INT)?
    atom   := INT | IDENT | 'i' | '(' expr ')'

``^`` binds tighter than unary minus, so ``-c0^2`` is ``-(c0^2)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .scalar import GaussianRational, ParamPoly, ParamSet, Scalar, format_gaussian

__all__ = [
    "ExprError",
    "ExprSyntaxError",
    "UnknownParameterError",
    "LoweringError",
    "Int",
    "Rat",
    "Imag",
    "Ref",
    "Neg",
    "BinOp",
    "Pow",
    "parse_expr",
    "lower",
    "parse_scalar",
    "print_scalar",
    "print_poly",
    "print_ast",
]


class ExprError(ValueError):
    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte {offset})"
        super().__init__(message)


class ExprSyntaxError(ExprError):
    pass


class UnknownParameterError(ExprError):
    pass


class LoweringError(ExprError):
    pass


@dataclass(frozen=True)
class Int:
    value: int
    pos: int = 0


@dataclass(frozen=True)
class Rat:
    num: int
    den: int
    pos: int = 0


@dataclass(frozen=True)
class Imag:
    pos: int = 0


@dataclass(frozen=True)
class Ref:
    name: str
    pos: int = 0


@dataclass(frozen=True)
class Neg:
    operand: "Node"
    pos: int = 0


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"
    pos: int = 0


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int
    pos: int = 0


Node = Union[Int, Rat, Imag, Ref, Neg, BinOp, Pow]

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z][A-Za-z0-9_]*)|(\*\*|[-+*/^()]))")


def _tokenize(text: str):
    raw = text.encode("utf-8")
    if len(raw) != len(text):
        # non-ASCII input; report the first offending byte
        for k, ch in enumerate(text):
            if ord(ch) > 127:
                raise ExprSyntaxError(f"non-ASCII character {ch!r}", len(text[:k].encode("utf-8")))
    pos = 0
    toks = []
    n = len(text)
    while pos < n:
        m = _TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip() == "":
                break
            k = pos
            while text[k].isspace():
                k += 1
            raise ExprSyntaxError(f"unexpected character {text[k]!r}", k)
        start = m.start(m.lastindex)
        if m.group(1) is not None:
            toks.append(("int", int(m.group(1)), start))
        elif m.group(2) is not None:
            toks.append(("ident", m.group(2), start))
        else:
            op = m.group(3)
            toks.append(("op", "^" if op == "**" else op, start))
        pos = m.end()
    toks.append(("end", None, len(raw)))
    return toks


class _Parser:
    def __init__(self, text: str, params: ParamSet):
        self.toks = _tokenize(text)
        self.k = 0
        self.params = params

    def peek(self):
        return self.toks[self.k]

    def take(self):
        t = self.toks[self.k]
        self.k += 1
        return t

    def expect_op(self, op):
        kind, val, pos = self.take()
        if kind != "op" or val != op:
            raise ExprSyntaxError(f"expected {op!r}", pos)

    def parse(self) -> Node:
        kind, _, pos = self.peek()
        if kind == "end":
            raise ExprSyntaxError("empty expression", pos)
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {val!r}", pos)
        return node

    def expr(self) -> Node:
        node = self.term()
        while True:
            kind, val, pos = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                node = BinOp(val, node, self.term(), pos)
            else:
                return node

    def term(self) -> Node:
        node = self.unary()
        while True:
            kind, val, pos = self.peek()
            if kind == "op" and val in "*/":
                self.take()
                rhs = self.unary()
                if val == "/" and isinstance(node, Int) and isinstance(rhs, Int) and rhs.value != 0:
                    node = Rat(node.value, rhs.value, node.pos)
                else:
                    node = BinOp(val, node, rhs, pos)
            else:
                return node

    def unary(self) -> Node:
        kind, val, pos = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return Neg(self.unary(), pos)
        if kind == "op" and val == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        kind, val, pos = self.peek()
        if kind == "op" and val == "^":
            self.take()
            sign = 1
            kind, val, p2 = self.peek()
            if kind == "op" and val == "-":
                self.take()
                sign = -1
            kind, val, p2 = self.take()
            if kind != "int":
                raise ExprSyntaxError("exponent must be an integer literal", p2)
            node = Pow(base, sign * val, pos)
            kind, val, p3 = self.peek()
            if kind == "op" and val == "^":
                raise ExprSyntaxError("chained powers need parentheses", p3)
            return node
        return base

    def atom(self) -> Node:
        kind, val, pos = self.take()
        if kind == "int":
            return Int(val, pos)
        if kind == "ident":
            if val == "i":
                return Imag(pos)
            if val not in self.params:
                raise UnknownParameterError(f"unknown parameter {val!r}", pos)
            return Ref(val, pos)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        if kind == "end":
            raise ExprSyntaxError("unexpected end of expression", pos)
        raise ExprSyntaxError(f"unexpected token {val!r}", pos)


def parse_expr(text: str, params: ParamSet) -> Node:
    return _Parser(text, params).parse()


def lower(ast: Node, params: ParamSet) -> Scalar:
    """Evaluate an AST to an exact Scalar over ``params``."""
    if isinstance(ast, Int):
        return Scalar.const(params, ast.value)
    if isinstance(ast, Rat):
        return Scalar.const(params, Fraction(ast.num, ast.den))
    if isinstance(ast, Imag):
        return Scalar.const(params, GaussianRational(0, 1))
    if isinstance(ast, Ref):
        return Scalar.param(params, ast.name)
    if isinstance(ast, Neg):
        return -lower(ast.operand, params)
    if isinstance(ast, Pow):
        base = lower(ast.base, params)
        if ast.exponent < 0 and base.is_zero():
            raise LoweringError("negative power of zero", ast.pos)
        return base ** ast.exponent
    if isinstance(ast, BinOp):
        a = lower(ast.left, params)
        b = lower(ast.right, params)
        if ast.op == "+":
            return a + b
        if ast.op == "-":
            return a - b
        if ast.op == "*":
            return a * b
        if b.is_zero():
            raise LoweringError("division by zero", ast.pos)
        return a / b
    raise TypeError(f"not an expression node: {ast!r}")


def parse_scalar(text: str, params: ParamSet) -> Scalar:
    return lower(parse_expr(text, params), params)


def _monomial(params: ParamSet, e: tuple) -> str:
    parts = []
    for p, x in zip(params.params, e):
        if x == 1:
            parts.append(p.name)
        elif x > 1:
            parts.append(f"{p.name}^{x}")
    return "*".join(parts)


def _term(params: ParamSet, e: tuple, c: GaussianRational, first: bool) -> str:
    mono = _monomial(params, e)
    re_, im_ = c.re, c.im
    if not mono:
        s = format_gaussian(c)
    elif im_ == 0 and abs(re_) == 1:
        s = ("-" if re_ < 0 else "") + mono
    elif re_ == 0 and abs(im_) == 1:
        s = ("-" if im_ < 0 else "") + "i*" + mono
    else:
        s = f"{format_gaussian(c)}*{mono}"
    if not first and not s.startswith("-"):
        s = "+" + s
    return s


def print_poly(p: ParamPoly) -> str:
    """Expanded polynomial, terms in descending graded-lex order."""
    if p.is_zero():
        return "0"
    return "".join(_term(p.params, e, c, k == 0) for k, (e, c) in enumerate(p.sorted_terms()))


def print_scalar(s: Scalar) -> str:
    """Deterministic string for a Scalar, re-parseable by :func:`parse_expr`."""
    s = s.normalized()
    num = print_poly(s.num)
    den_terms = s.den.terms
    if len(den_terms) == 1:
        (e, c), = den_terms.items()
        if not any(e) and c == 1:
            return num
    if len(s.num.terms) > 1:
        num = f"({num})"
    den = print_poly(s.den)
    if not (len(den_terms) == 1 and not any(next(iter(den_terms))) and den.isdigit()):
        den = f"({den})"
    return f"{num}/{den}"


def print_ast(ast: Node) -> str:
    """Fully parenthesized rendering of an AST (re-parses to the same tree)."""
    if isinstance(ast, Int):
        return str(ast.value)
    if isinstance(ast, Rat):
        return f"({ast.num}/{ast.den})"
    if isinstance(ast, Imag):
        return "i"
    if isinstance(ast, Ref):
        return ast.name
    if isinstance(ast, Neg):
        return f"(-{print_ast(ast.operand)})"
    if isinstance(ast, Pow):
        return f"({print_ast(ast.base)})^{ast.exponent}"
    return f"({print_ast(ast.left)}{ast.op}{print_ast(ast.right)})"
