"""Arithmetic expressions for matrix field entries.

Grammar (lowest to highest precedence)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' unary)?          # right associative
    atom    := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'

Names are ``t``, ``p_ij`` (1-based, within the dimension) and the functions
``sin cos exp sqrt abs``.  ``-x^2`` is ``-(x^2)`` and ``2*-3`` is ``-6``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from ..curves import MatrixField
from ..errors import ExpressionDomainError, ExpressionError

FUNCTIONS = ("sin", "cos", "exp", "sqrt", "abs")
_TOKEN = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)|([A-Za-z_][A-Za-z_0-9]*)|(\S))")
_VAR = re.compile(r"p_(\d)(\d)$")


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str  # "t" or "p_ij"


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    fn: str
    arg: object


def _tokenize(src):
    tokens, pos = [], 0
    src = src.rstrip()
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        num, name, sym = m.groups()
        start = m.start(m.lastindex)
        if num is not None:
            tokens.append(("num", num, start))
        elif name is not None:
            tokens.append(("name", name, start))
        else:
            if sym not in "+-*/^()":
                raise ExpressionError(f"unexpected character {sym!r}", start)
            tokens.append(("op", sym, start))
        pos = m.end()
    tokens.append(("end", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src, n):
        self.src = src
        self.n = n
        self.tokens = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, sym):
        kind, val, pos = self.take()
        if (kind, val) != ("op", sym):
            found = "end of input" if kind == "end" else repr(val)
            raise ExpressionError(f"expected {sym!r}, found {found}", pos)

    def parse(self):
        if self.peek()[0] == "end":
            raise ExpressionError("empty expression", 0)
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            msg = "unbalanced ')'" if val == ")" else f"unexpected {val!r}"
            raise ExpressionError(msg, pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[:2] in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self):
        node = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            node = BinOp("^", node, self.unary())
        return node

    def atom(self):
        kind, val, pos = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if val in FUNCTIONS:
                if self.peek()[:2] != ("op", "("):
                    raise ExpressionError(f"function {val!r} needs one parenthesised argument", pos)
                self.take()
                if self.peek()[:2] == ("op", ")"):
                    raise ExpressionError(f"function {val!r} takes exactly one argument, got none", pos)
                arg = self.expr()
                self.expect(")")
                return Call(val, arg)
            if val == "t":
                return Var("t")
            m = _VAR.match(val)
            if m:
                i, j = int(m.group(1)), int(m.group(2))
                if not (1 <= i <= self.n and 1 <= j <= self.n):
                    raise ExpressionError(f"variable {val!r} is out of range for dimension n = {self.n}", pos)
                return Var(val)
            raise ExpressionError(f"unknown identifier {val!r}", pos)
        if (kind, val) == ("op", "("):
            node = self.expr()
            kind2, val2, pos2 = self.peek()
            if (kind2, val2) != ("op", ")"):
                raise ExpressionError("unbalanced '(': missing ')'", pos2)
            self.take()
            return node
        if kind == "end":
            raise ExpressionError("unexpected end of input", pos)
        raise ExpressionError(f"unexpected {val!r}", pos)


def parse_expression(src: str, n: int):
    """Parse one entry expression; variables are checked against dimension ``n``."""
    return _Parser(src, n).parse()


def _domain(msg):
    raise ExpressionDomainError(msg)


def _pow(x, y):
    if x == 0 and y < 0:
        _domain("zero raised to a negative power")
    if x < 0 and y != int(y):
        _domain(f"negative base {x!r} raised to non-integer power {y!r}")
    try:
        return math.pow(x, y)
    except OverflowError:
        _domain("overflow in '^'")


def _call(fn, x):
    if fn == "sqrt":
        if x < 0:
            _domain(f"sqrt of negative number {x!r}")
        return math.sqrt(x)
    if fn == "exp":
        try:
            return math.exp(x)
        except OverflowError:
            _domain("overflow in exp")
    return {"sin": math.sin, "cos": math.cos, "abs": abs}[fn](x)


def evaluate(node, env) -> float:
    """Evaluate a parsed expression with ``env`` mapping variable names to floats."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Neg):
        return -evaluate(node.arg, env)
    if isinstance(node, Call):
        return _call(node.fn, evaluate(node.arg, env))
    x = evaluate(node.left, env)
    y = evaluate(node.right, env)
    if node.op == "+":
        return x + y
    if node.op == "-":
        return x - y
    if node.op == "*":
        return x * y
    if node.op == "/":
        if y == 0:
            _domain("division by zero")
        return x / y
    return _pow(x, y)


def to_source(node) -> str:
    """Fully parenthesised source that parses back to the same tree."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_source(node.arg)})"
    if isinstance(node, Call):
        return f"{node.fn}({to_source(node.arg)})"
    return f"({to_source(node.left)} {node.op} {to_source(node.right)})"


def variables(node) -> set:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, (Neg, Call)):
        return variables(node.arg)
    if isinstance(node, BinOp):
        return variables(node.left) | variables(node.right)
    return set()


def environment(t, P) -> dict:
    n = P.shape[0]
    env = {"t": float(t)}
    for i in range(n):
        for j in range(n):
            env[f"p_{i + 1}{j + 1}"] = float(P[i, j])
    return env


@dataclass(frozen=True)
class FieldExpression:
    """An n x n table of parsed entry expressions."""

    n: int
    sources: tuple
    trees: tuple

    @classmethod
    def parse(cls, entries, n):
        if len(entries) != n or any(len(row) != n for row in entries):
            raise ExpressionError(f"field needs {n} rows of {n} entries")
        trees = tuple(tuple(parse_expression(str(e), n) for e in row) for row in entries)
        return cls(n, tuple(tuple(str(e) for e in row) for row in entries), trees)

    def __call__(self, t, P):
        env = environment(t, np.asarray(P, dtype=float))
        return np.array([[evaluate(e, env) for e in row] for row in self.trees])

    def field(self) -> MatrixField:
        return MatrixField(self, self.n)
