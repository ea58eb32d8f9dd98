"""Small expression language for test functions on the gasket models.

Grammar (standard precedence, ^ binds tightest, parentheses allowed):

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' integer)?
    atom   := number | 'x' | 'y' | 'z' | '(' expr ')'

Exponents must be integer literals.  Evaluation is vectorized over
point arrays and guarded: division by zero and 0^negative raise at
evaluation time, the variable z is only defined on 3-d points.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from gasketlab.geometry import GasketError


class ExprSyntaxError(GasketError):
    """Parse failure, annotated with the offending position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class EvalDomainError(GasketError):
    """Evaluation left the guarded domain (zero divisor, 0^negative, missing z)."""


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Add:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Sub:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Mul:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Div:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


Expr = Union[Const, Var, Add, Sub, Mul, Div, Pow]

VARIABLES = ("x", "y", "z")


# ---------------------------------------------------------------------------
# Tokenizer / parser
# ---------------------------------------------------------------------------

_OPS = set("+-*/^()")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in _OPS:
            tokens.append(("op", ch, i))
            i += 1
            continue
        if ch.isdigit() or ch == ".":
            j = i
            seen_exp = False
            while j < len(text):
                c = text[j]
                if c.isdigit() or c == ".":
                    j += 1
                elif c in "eE" and j + 1 < len(text) and (
                    text[j + 1].isdigit() or text[j + 1] in "+-"
                ):
                    seen_exp = True
                    j += 2
                elif seen_exp and c.isdigit():
                    j += 1
                else:
                    break
            tokens.append(("num", text[i:j], i))
            i = j
            continue
        if ch.isalpha():
            j = i
            while j < len(text) and text[j].isalnum():
                j += 1
            tokens.append(("name", text[i:j], i))
            i = j
            continue
        raise ExprSyntaxError(f"unexpected character {ch!r}", i)
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op: str):
        kind, value, where = self.peek()
        if kind != "op" or value != op:
            raise ExprSyntaxError(f"expected {op!r}", where)
        self.advance()

    def parse(self) -> Expr:
        node = self.expr()
        kind, value, where = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected trailing {value!r}", where)
        return node

    def expr(self) -> Expr:
        node = self.term()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "+-":
                self.advance()
                rhs = self.term()
                node = Add(node, rhs) if value == "+" else Sub(node, rhs)
            else:
                return node

    def term(self) -> Expr:
        node = self.unary()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "*/":
                self.advance()
                rhs = self.unary()
                node = Mul(node, rhs) if value == "*" else Div(node, rhs)
            else:
                return node

    def unary(self) -> Expr:
        kind, value, _ = self.peek()
        if kind == "op" and value == "-":
            self.advance()
            return Sub(Const(0.0), self.unary())
        return self.power()

    def power(self) -> Expr:
        node = self.atom()
        kind, value, _ = self.peek()
        if kind == "op" and value == "^":
            self.advance()
            node = Pow(node, self.integer())
        return node

    def integer(self) -> int:
        sign = 1
        kind, value, where = self.peek()
        if kind == "op" and value == "-":
            self.advance()
            sign = -1
            kind, value, where = self.peek()
        if kind != "num":
            raise ExprSyntaxError("exponent must be an integer literal", where)
        self.advance()
        try:
            if "." in value or "e" in value or "E" in value:
                raise ValueError
            return sign * int(value)
        except ValueError:
            raise ExprSyntaxError(f"non-integer exponent {value!r}", where) from None

    def atom(self) -> Expr:
        kind, value, where = self.advance()
        if kind == "num":
            return Const(float(value))
        if kind == "name":
            if value in VARIABLES:
                return Var(value)
            raise ExprSyntaxError(f"unknown identifier {value!r}", where)
        if kind == "op" and value == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ExprSyntaxError(f"expected a value, got {value!r}", where)


def parse_expr(text: str) -> Expr:
    """Parse a test-function expression into its AST."""
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Printing (canonical, reparses to an equal AST)
# ---------------------------------------------------------------------------

_PRECEDENCE = {Add: 1, Sub: 1, Mul: 2, Div: 2, Pow: 3, Const: 4, Var: 4}


def _wrap(node: Expr, parent_prec: int, right_side: bool = False) -> str:
    text = expr_to_string(node)
    prec = _PRECEDENCE[type(node)]
    if prec < parent_prec or (prec == parent_prec and right_side):
        return f"({text})"
    return text


def expr_to_string(node: Expr) -> str:
    if isinstance(node, Const):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Add):
        return f"{_wrap(node.left, 1)} + {_wrap(node.right, 1, True)}"
    if isinstance(node, Sub):
        return f"{_wrap(node.left, 1)} - {_wrap(node.right, 1, True)}"
    if isinstance(node, Mul):
        return f"{_wrap(node.left, 2)}*{_wrap(node.right, 2, True)}"
    if isinstance(node, Div):
        return f"{_wrap(node.left, 2)}/{_wrap(node.right, 2, True)}"
    if isinstance(node, Pow):
        # a leading '-' after '^' is accepted by the exponent parser
        return f"{_wrap(node.base, 4)}^{node.exponent}"
    raise GasketError(f"not an expression node: {node!r}")


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def evaluate(node: Expr, points: np.ndarray) -> np.ndarray:
    """Evaluate on an (N, d) point array, d in {2, 3}; returns (N,)."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] not in (2, 3):
        raise GasketError(f"points must be (N, 2) or (N, 3), got {points.shape}")

    def rec(e: Expr) -> np.ndarray:
        if isinstance(e, Const):
            return np.full(len(points), e.value)
        if isinstance(e, Var):
            col = VARIABLES.index(e.name)
            if col >= points.shape[1]:
                raise EvalDomainError(
                    f"variable {e.name!r} undefined on {points.shape[1]}-d points"
                )
            return points[:, col]
        if isinstance(e, Add):
            return rec(e.left) + rec(e.right)
        if isinstance(e, Sub):
            return rec(e.left) - rec(e.right)
        if isinstance(e, Mul):
            return rec(e.left) * rec(e.right)
        if isinstance(e, Div):
            denom = rec(e.right)
            if np.any(denom == 0.0):
                raise EvalDomainError("division by zero")
            return rec(e.left) / denom
        if isinstance(e, Pow):
            base = rec(e.base)
            if e.exponent < 0 and np.any(base == 0.0):
                raise EvalDomainError("zero base with negative exponent")
            return base ** e.exponent
        raise GasketError(f"not an expression node: {e!r}")

    return rec(node)


@dataclass(frozen=True)
class TestFunction:
    """Parsed test function; callable on (N, d) point arrays."""

    __test__ = False       # not a pytest collectible despite the name

    expr: Expr
    source: str

    @classmethod
    def parse(cls, text: str) -> "TestFunction":
        return cls(parse_expr(text), text)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return evaluate(self.expr, points)
