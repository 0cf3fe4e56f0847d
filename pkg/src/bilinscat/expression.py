"""Recursive-descent parser for complex-valued potential expressions in ``z``.

Grammar (whitespace insignificant)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' integer)?
    atom   := number | 'i' | 'z' | func '(' expr ')' | '(' expr ')'
    func   := exp | sin | cos | sinh | cosh | sqrt

Unary minus binds looser than ``^`` so ``-(z-1)^2`` is ``-((z-1)^2)``.
Trees evaluate on scalars or numpy arrays of complex ``z``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ExpressionSyntaxError, UnknownIdentifier

FUNCTIONS: dict[str, Callable] = {
    "exp": np.exp,
    "sin": np.sin,
    "cos": np.cos,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "sqrt": np.sqrt,
}

_TOKEN = re.compile(
    r"\s*(?:(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)

_SPACE = re.compile(r"\s*")


class Node:
    def __call__(self, z):
        raise NotImplementedError


@dataclass(frozen=True)
class Const(Node):
    value: complex

    def __call__(self, z):
        return self.value + 0 * np.asarray(z, dtype=complex)

    def __str__(self):
        return repr(self.value)


@dataclass(frozen=True)
class Var(Node):
    def __call__(self, z):
        return np.asarray(z, dtype=complex)

    def __str__(self):
        return "z"


@dataclass(frozen=True)
class Neg(Node):
    arg: Node

    def __call__(self, z):
        return -self.arg(z)

    def __str__(self):
        return f"(-{self.arg})"


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node

    def __call__(self, z):
        a, b = self.left(z), self.right(z)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        with np.errstate(divide="ignore", invalid="ignore"):
            # non-finite results are caught by the caller
            return a / b

    def __str__(self):
        return f"({self.left}{self.op}{self.right})"


@dataclass(frozen=True)
class Pow(Node):
    base: Node
    exponent: int

    def __call__(self, z):
        b = self.base(z)
        out = np.ones_like(b)
        for _ in range(self.exponent):
            out = out * b
        return out

    def __str__(self):
        return f"({self.base}^{self.exponent})"


@dataclass(frozen=True)
class Call(Node):
    name: str
    arg: Node

    def __call__(self, z):
        return FUNCTIONS[self.name](self.arg(z))

    def __str__(self):
        return f"{self.name}({self.arg})"


def _tokenize(src: str):
    text = src
    pos = 0
    tokens = []
    while True:
        pos = _SPACE.match(text, pos).end()
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            offset = len(text[:pos].encode("utf-8"))
            raise ExpressionSyntaxError(f"unexpected character {text[pos]!r}", offset)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), len(text[:start].encode("utf-8"))))
        pos = m.end()
    tokens.append(("end", "", len(text.encode("utf-8"))))
    return tokens


class _Parser:
    def __init__(self, src: str):
        self.tokens = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, offset = self.take()
        if text != value:
            found = text or "end of input"
            raise ExpressionSyntaxError(f"expected {value!r}, found {found!r}", offset)

    def parse(self) -> Node:
        node = self.expr()
        kind, text, offset = self.peek()
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected {text!r}", offset)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        kind, text, _ = self.peek()
        if kind == "op" and text in ("-", "+"):
            self.take()
            arg = self.unary()
            return Neg(arg) if text == "-" else arg
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] == "^" and self.peek()[0] == "op":
            self.take()
            kind, text, offset = self.take()
            if kind != "number" or not text.isdigit():
                raise ExpressionSyntaxError("exponent must be a non-negative integer", offset)
            base = Pow(base, int(text))
        return base

    def atom(self):
        kind, text, offset = self.take()
        if kind == "number":
            return Const(complex(float(text)))
        if kind == "name":
            if text == "i":
                return Const(1j)
            if text == "z":
                return Var()
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            raise UnknownIdentifier(text, offset)
        if text == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ExpressionSyntaxError(f"unexpected {text or 'end of input'!r}", offset)


def parse_expression(src: str) -> Node:
    """Parse ``src`` into an evaluable expression tree.

    Raises :class:`ExpressionSyntaxError` (with a byte offset) or
    :class:`UnknownIdentifier`.
    """
    if not isinstance(src, str):
        raise TypeError("expression source must be a string")
    return _Parser(src).parse()
