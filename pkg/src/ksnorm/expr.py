"""Mini-language for field expressions.

Grammar (infix, ^ is right-associative power):

    expr     := term (('+'|'-') term)*
    term     := unary (('*'|'/') unary)*
    unary    := '-' unary | power
    power    := atom ('^' unary)?
    atom     := NUMBER | 'i' | VAR | FUNC '(' args ')' | '(' expr ')'
    VAR      := x_1 ... x_n
    FUNC     := exp log sin cos sqrt abs gamma indicator piecewise

indicator(a, b; x_j) is 1 on the closed interval [a, b] of coordinate x_j.
piecewise(v; c1, e1; c2, e2; ...; e_else) selects e1 while v < c1, e2 while
v < c2, ..., and e_else otherwise.

A vector field is a top-level comma-separated list of component expressions.
Symbolic differentiation covers everything except gamma (no digamma in the
grammar); indicator and piecewise differentiate piecewise, ignoring the
breakpoints (a null set).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import CapabilityError


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (offset {position})")
        self.position = position


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Imag:
    pass


@dataclass(frozen=True)
class Var:
    index: int  # 0-based coordinate


@dataclass(frozen=True)
class Bin:
    op: str
    lhs: "Node"
    rhs: "Node"


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class Call:
    name: str
    arg: "Node"


@dataclass(frozen=True)
class IndicatorNode:
    lo: "Node"
    hi: "Node"
    index: int


@dataclass(frozen=True)
class PiecewiseNode:
    selector: "Node"
    cuts: tuple  # ((cut_node, value_node), ...)
    default: "Node"


Node = Union[Num, Imag, Var, Bin, Neg, Call, IndicatorNode, PiecewiseNode]

_FUNCS = {"exp", "log", "sin", "cos", "sqrt", "abs", "gamma"}


def evaluate(node: Node, pts: np.ndarray) -> np.ndarray:
    """Evaluate over points of shape (m, n); returns (m,)."""
    m = pts.shape[0]
    if isinstance(node, Num):
        return np.full(m, node.value)
    if isinstance(node, Imag):
        return np.full(m, 1j)
    if isinstance(node, Var):
        return pts[:, node.index]
    if isinstance(node, Neg):
        return -evaluate(node.arg, pts)
    if isinstance(node, Bin):
        a = evaluate(node.lhs, pts)
        b = evaluate(node.rhs, pts)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            with np.errstate(divide="ignore", invalid="ignore"):
                return a / b
        if node.op == "^":
            with np.errstate(divide="ignore", invalid="ignore"):
                if np.iscomplexobj(a) or np.iscomplexobj(b):
                    return a.astype(complex) ** b
                neg = (a < 0) & (b != np.round(b))
                if np.any(neg):
                    return a.astype(complex) ** b
                return a**b
        raise ValueError(node.op)
    if isinstance(node, Call):
        v = evaluate(node.arg, pts)
        if node.name == "exp":
            return np.exp(v)
        if node.name == "log":
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.log(v)
        if node.name == "sin":
            return np.sin(v)
        if node.name == "cos":
            return np.cos(v)
        if node.name == "sqrt":
            if np.iscomplexobj(v) or np.any(v < 0):
                return np.sqrt(v.astype(complex))
            return np.sqrt(v)
        if node.name == "abs":
            return np.abs(v)
        if node.name == "gamma":
            from math import gamma as _g

            out = np.empty(v.shape, dtype=float)
            flat = np.real(v).ravel()
            res = out.ravel()
            for idx, z in enumerate(flat):
                try:
                    res[idx] = _g(z)
                except ValueError:
                    res[idx] = np.nan
            return out
        if node.name == "sign":
            with np.errstate(invalid="ignore"):
                return np.sign(np.real(v))
        raise ValueError(node.name)
    if isinstance(node, IndicatorNode):
        lo = evaluate(node.lo, pts)
        hi = evaluate(node.hi, pts)
        x = pts[:, node.index]
        return ((np.real(lo) <= x) & (x <= np.real(hi))).astype(float)
    if isinstance(node, PiecewiseNode):
        sel = np.real(evaluate(node.selector, pts))
        out = evaluate(node.default, pts).astype(complex)
        taken = np.zeros(m, dtype=bool)
        for cut, value in node.cuts:
            c = np.real(evaluate(cut, pts))
            mask = (sel < c) & ~taken
            if mask.any():
                out[mask] = evaluate(value, pts)[mask]
            taken |= sel < c
        if np.all(np.abs(out.imag) == 0):
            return out.real
        return out
    raise TypeError(type(node))


def free_vars(node: Node) -> set[int]:
    if isinstance(node, Var):
        return {node.index}
    if isinstance(node, Bin):
        return free_vars(node.lhs) | free_vars(node.rhs)
    if isinstance(node, Neg):
        return free_vars(node.arg)
    if isinstance(node, Call):
        return free_vars(node.arg)
    if isinstance(node, IndicatorNode):
        return free_vars(node.lo) | free_vars(node.hi) | {node.index}
    if isinstance(node, PiecewiseNode):
        out = free_vars(node.selector) | free_vars(node.default)
        for cut, value in node.cuts:
            out |= free_vars(cut) | free_vars(value)
        return out
    return set()


def _is_zero(node: Node) -> bool:
    return isinstance(node, Num) and node.value == 0.0


def _is_one(node: Node) -> bool:
    return isinstance(node, Num) and node.value == 1.0


def _mul(a: Node, b: Node) -> Node:
    if _is_zero(a) or _is_zero(b):
        return Num(0.0)
    if _is_one(a):
        return b
    if _is_one(b):
        return a
    return Bin("*", a, b)


def _add(a: Node, b: Node) -> Node:
    if _is_zero(a):
        return b
    if _is_zero(b):
        return a
    return Bin("+", a, b)


def derivative(node: Node, index: int) -> Node:
    """Symbolic d/dx_index; a.e. derivative for abs/indicator/piecewise."""
    if isinstance(node, (Num, Imag, IndicatorNode)):
        return Num(0.0)
    if isinstance(node, Var):
        return Num(1.0) if node.index == index else Num(0.0)
    if isinstance(node, Neg):
        d = derivative(node.arg, index)
        return Num(0.0) if _is_zero(d) else Neg(d)
    if isinstance(node, Bin):
        da = derivative(node.lhs, index)
        db = derivative(node.rhs, index)
        if node.op == "+":
            return _add(da, db)
        if node.op == "-":
            return _add(da, Neg(db) if not _is_zero(db) else Num(0.0))
        if node.op == "*":
            return _add(_mul(da, node.rhs), _mul(node.lhs, db))
        if node.op == "/":
            num = _add(_mul(da, node.rhs), Neg(_mul(node.lhs, db)) if not _is_zero(db) else Num(0.0))
            if _is_zero(num):
                return Num(0.0)
            return Bin("/", num, Bin("^", node.rhs, Num(2.0)))
        if node.op == "^":
            if isinstance(node.rhs, Num):
                p = node.rhs.value
                return _mul(_mul(Num(p), Bin("^", node.lhs, Num(p - 1.0))), da)
            # general power: f^g * (g' log f + g f'/f)
            term1 = _mul(db, Call("log", node.lhs))
            term2 = Bin("/", _mul(node.rhs, da), node.lhs) if not _is_zero(da) else Num(0.0)
            return _mul(node, _add(term1, term2))
    if isinstance(node, Call):
        da = derivative(node.arg, index)
        if _is_zero(da):
            return Num(0.0)
        if node.name == "exp":
            return _mul(node, da)
        if node.name == "log":
            return Bin("/", da, node.arg)
        if node.name == "sin":
            return _mul(Call("cos", node.arg), da)
        if node.name == "cos":
            return Neg(_mul(Call("sin", node.arg), da))
        if node.name == "sqrt":
            return Bin("/", da, _mul(Num(2.0), node))
        if node.name == "abs":
            return _mul(Call("sign", node.arg), da)
        if node.name == "sign":
            return Num(0.0)
        if node.name == "gamma":
            raise CapabilityError("gamma has no symbolic derivative in this grammar")
    if isinstance(node, PiecewiseNode):
        return PiecewiseNode(
            node.selector,
            tuple((cut, derivative(value, index)) for cut, value in node.cuts),
            derivative(node.default, index),
        )
    raise TypeError(type(node))


def to_text(node: Node) -> str:
    """Round-trip-parseable rendering (used for hashing and reports)."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Imag):
        return "i"
    if isinstance(node, Var):
        return f"x_{node.index + 1}"
    if isinstance(node, Neg):
        return f"(-{to_text(node.arg)})"
    if isinstance(node, Bin):
        return f"({to_text(node.lhs)} {node.op} {to_text(node.rhs)})"
    if isinstance(node, Call):
        return f"{node.name}({to_text(node.arg)})"
    if isinstance(node, IndicatorNode):
        return f"indicator({to_text(node.lo)}, {to_text(node.hi)}; x_{node.index + 1})"
    if isinstance(node, PiecewiseNode):
        middle = "; ".join(f"{to_text(c)}, {to_text(v)}" for c, v in node.cuts)
        return f"piecewise({to_text(node.selector)}; {middle}; {to_text(node.default)})"
    raise TypeError(type(node))


# ---------------------------------------------------------------------------
# Parser

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),;]))"
)


class _Parser:
    def __init__(self, text: str, n: int):
        self.text = text
        self.n = n
        self.pos = 0

    def error(self, message: str) -> ExprSyntaxError:
        return ExprSyntaxError(message, self.pos)

    def peek(self):
        m = _TOKEN_RE.match(self.text, self.pos)
        if m is None:
            rest = self.text[self.pos :]
            if not rest.strip():
                return ("eof", "", len(self.text))
            bad = self.pos + (len(rest) - len(rest.lstrip()))
            raise ExprSyntaxError("unexpected character", bad)
        kind = m.lastgroup
        return (kind, m.group(kind), m.end())

    def next(self):
        kind, value, end = self.peek()
        if kind != "eof":
            self.pos = end
        return kind, value

    def expect_op(self, op: str):
        kind, value = self.next()
        if kind != "op" or value != op:
            raise self.error(f"expected '{op}'")

    def parse_expr(self) -> Node:
        node = self.parse_term()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "+-":
                self.next()
                rhs = self.parse_term()
                node = Bin(value, node, rhs)
            else:
                return node

    def parse_term(self) -> Node:
        node = self.parse_unary()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "*/":
                self.next()
                rhs = self.parse_unary()
                node = Bin(value, node, rhs)
            else:
                return node

    def parse_unary(self) -> Node:
        kind, value, _ = self.peek()
        if kind == "op" and value == "-":
            self.next()
            return Neg(self.parse_unary())
        if kind == "op" and value == "+":
            self.next()
            return self.parse_unary()
        return self.parse_power()

    def parse_power(self) -> Node:
        base = self.parse_atom()
        kind, value, _ = self.peek()
        if kind == "op" and value == "^":
            self.next()
            exponent = self.parse_unary()
            return Bin("^", base, exponent)
        return base

    def parse_atom(self) -> Node:
        kind, value, _ = self.peek()
        if kind == "eof":
            raise self.error("unexpected end of expression")
        if kind == "num":
            self.next()
            return Num(float(value))
        if kind == "op" and value == "(":
            self.next()
            node = self.parse_expr()
            self.expect_op(")")
            return node
        if kind == "ident":
            self.next()
            if value == "i":
                return Imag()
            if value.startswith("x_"):
                try:
                    idx = int(value[2:])
                except ValueError:
                    raise self.error(f"unknown identifier '{value}'")
                if not (1 <= idx <= self.n):
                    raise self.error(f"variable {value} exceeds dimension n={self.n}")
                return Var(idx - 1)
            if value == "indicator":
                return self.parse_indicator()
            if value == "piecewise":
                return self.parse_piecewise()
            if value in _FUNCS:
                self.expect_op("(")
                arg = self.parse_expr()
                self.expect_op(")")
                return Call(value, arg)
            raise self.error(f"unknown identifier '{value}'")
        raise self.error(f"unexpected token '{value}'")

    def parse_indicator(self) -> Node:
        self.expect_op("(")
        lo = self.parse_expr()
        self.expect_op(",")
        hi = self.parse_expr()
        self.expect_op(";")
        kind, value = self.next()
        if kind != "ident" or not value.startswith("x_"):
            raise self.error("indicator needs a coordinate x_j after ';'")
        idx = int(value[2:])
        if not (1 <= idx <= self.n):
            raise self.error(f"variable {value} exceeds dimension n={self.n}")
        self.expect_op(")")
        return IndicatorNode(lo, hi, idx - 1)

    def parse_piecewise(self) -> Node:
        self.expect_op("(")
        selector = self.parse_expr()
        pieces = []
        while True:
            self.expect_op(";")
            first = self.parse_expr()
            kind, value, _ = self.peek()
            if kind == "op" and value == ",":
                self.next()
                second = self.parse_expr()
                pieces.append((first, second))
            else:
                self.expect_op(")")
                return PiecewiseNode(selector, tuple(pieces), first)


def parse(text: str, n: int) -> Node:
    """Parse a scalar expression in variables x_1..x_n."""
    parser = _Parser(text, n)
    node = parser.parse_expr()
    kind, value, _ = parser.peek()
    if kind != "eof":
        raise parser.error(f"trailing input '{value}'")
    return node


def parse_components(text: str, n: int) -> list[Node]:
    """Parse a top-level comma-separated list of component expressions."""
    parser = _Parser(text, n)
    comps = [parser.parse_expr()]
    while True:
        kind, value, _ = parser.peek()
        if kind == "op" and value == ",":
            parser.next()
            comps.append(parser.parse_expr())
        elif kind == "eof":
            return comps
        else:
            raise parser.error(f"trailing input '{value}'")
