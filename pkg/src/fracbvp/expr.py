"""A small arithmetic expression language for problem data.

Grammar, loosest binding first::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" unary)?          # exponent must be constant
    atom   := NUMBER | NAME | NAME "(" expr ")" | "(" expr ")"

Names are the variables ``t, x, y``, the constants ``pi, e`` and the unary
functions ``sin, cos, exp, atan, abs, sqrt, gammaf``. Evaluation is
vectorised over numpy arrays.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .fraccalc import gamma_fn

VARIABLES = ("t", "x", "y")
CONSTANTS = {"pi": math.pi, "e": math.e}
FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "atan": np.arctan,
    "abs": np.abs,
    "sqrt": np.sqrt,
    "gammaf": None,  # constant argument only, handled separately
}


class ExprSyntaxError(ValueError):
    """Malformed expression text; ``offset`` is the byte offset of the problem."""

    def __init__(self, message: str, text: str, pos: int):
        self.offset = len(text[:pos].encode("utf-8"))
        self.text = text
        super().__init__(f"{message} at offset {self.offset}")


class ExprEvalError(ValueError):
    """Evaluation failed or produced a non-finite value."""


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Const, Var, Neg, BinOp, Call]


def variables(node: Node) -> frozenset[str]:
    """Names of the variables referenced by ``node``."""
    if isinstance(node, Var):
        return frozenset((node.name,))
    if isinstance(node, Neg):
        return variables(node.operand)
    if isinstance(node, BinOp):
        return variables(node.left) | variables(node.right)
    if isinstance(node, Call):
        return variables(node.arg)
    return frozenset()


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group(), pos))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def _error(self, msg, pos=None):
        raise ExprSyntaxError(msg, self.text, self.tok[2] if pos is None else pos)

    def _accept(self, value):
        if self.tok[0] == "op" and self.tok[1] == value:
            self.i += 1
            return True
        return False

    def _expect(self, value):
        if not self._accept(value):
            found = self.tok[1] or "end of input"
            self._error(f"expected {value!r}, found {found!r}")

    def parse(self) -> Node:
        node = self.expr()
        if self.tok[0] != "end":
            self._error(f"unexpected token {self.tok[1]!r}")
        return node

    def expr(self):
        node = self.term()
        while self.tok[0] == "op" and self.tok[1] in "+-":
            op = self.tok[1]
            self.i += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.tok[0] == "op" and self.tok[1] in "*/":
            op = self.tok[1]
            self.i += 1
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self._accept("-"):
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.tok[0] == "op" and self.tok[1] == "^":
            pos = self.tok[2]
            self.i += 1
            exponent = self.unary()
            if variables(exponent):
                self._error("exponent of '^' must be constant", pos)
            return BinOp("^", base, exponent)
        return base

    def atom(self):
        kind, value, pos = self.tok
        if kind == "num":
            self.i += 1
            return Num(float(value))
        if kind == "name":
            self.i += 1
            if value in FUNCTIONS:
                if not self._accept("("):
                    self._error(f"function {value!r} needs a parenthesised argument")
                arg = self.expr()
                if self._accept(","):
                    self._error(f"function {value!r} takes exactly one argument", pos)
                self._expect(")")
                if value == "gammaf" and variables(arg):
                    self._error("gammaf takes a constant argument", pos)
                return Call(value, arg)
            if value in CONSTANTS:
                return Const(value)
            if value in VARIABLES:
                return Var(value)
            self._error(f"unknown identifier {value!r}", pos)
        if self._accept("("):
            node = self.expr()
            self._expect(")")
            return node
        found = value or "end of input"
        self._error(f"unexpected {found!r}")


def parse_expr(text: str) -> Node:
    """Parse ``text`` into an immutable expression tree."""
    return _Parser(text).parse()


def to_text(node: Node) -> str:
    """Print ``node`` fully parenthesised; parsing the output gives ``node`` back."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, (Const, Var)):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_text(node.operand)})"
    if isinstance(node, BinOp):
        return f"({to_text(node.left)} {node.op} {to_text(node.right)})"
    return f"{node.func}({to_text(node.arg)})"


def _eval(node: Node, env):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Const):
        return CONSTANTS[node.name]
    if isinstance(node, Var):
        try:
            return env[node.name]
        except KeyError:
            raise ExprEvalError(f"unbound variable {node.name!r}") from None
    if isinstance(node, Neg):
        return -_eval(node.operand, env)
    if isinstance(node, Call):
        arg = _eval(node.arg, env)
        if node.func == "gammaf":
            try:
                return gamma_fn(float(arg))
            except ValueError as exc:
                raise ExprEvalError(str(exc)) from None
        return FUNCTIONS[node.func](arg)
    left = _eval(node.left, env)
    right = _eval(node.right, env)
    if node.op == "+":
        return np.add(left, right)
    if node.op == "-":
        return np.subtract(left, right)
    if node.op == "*":
        return np.multiply(left, right)
    if node.op == "/":
        return np.true_divide(left, right)
    return np.power(left, right)


def eval_expr(node: Node, t=None, x=None, y=None):
    """Evaluate ``node`` with the given bindings (scalars or broadcastable arrays).

    Raises :class:`ExprEvalError` for unbound variables and for any non-finite
    result, e.g. a fractional power of a negative number.
    """
    env = {}
    for name, val in (("t", t), ("x", x), ("y", y)):
        if val is not None:
            env[name] = np.asarray(val, dtype=float)
    with np.errstate(all="ignore"):
        out = np.asarray(_eval(node, env), dtype=float)
    if not np.all(np.isfinite(out)):
        bad = np.flatnonzero(~np.isfinite(out))[0] if out.ndim else None
        where = ""
        if bad is not None:
            parts = []
            for name, val in env.items():
                v = np.broadcast_to(val, out.shape).ravel()[bad]
                parts.append(f"{name}={v:.17g}")
            where = " at " + ", ".join(parts)
        raise ExprEvalError(f"non-finite value evaluating {to_text(node)}{where}")
    return float(out) if out.ndim == 0 else out
