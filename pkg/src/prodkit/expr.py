"""Parser and evaluator for sequence expressions in the index variable ``n``.

Grammar (whitespace-insensitive)::

    expr   := term (("+"|"-") term)*
    term   := factor (("*"|"/") factor)*
    factor := unary ("^" factor)?          right-associative
    unary  := "-"? base
    base   := NUMBER | "n" | "(" expr ")" | FUNC "(" expr ")"
    FUNC   := exp | log | sin | cos | sqrt | abs

Note that unary minus binds tighter than ``^``: ``-n^2`` is ``(-n)^2``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import ExprSyntaxError, UnknownIdentifierError

__all__ = [
    "Num", "Var", "Neg", "BinOp", "Call", "FUNCS", "log_evaluate",
    "parse_seq", "to_text", "evaluate",
]

FUNCS = {
    "exp": np.exp,
    "log": np.log,
    "sin": np.sin,
    "cos": np.cos,
    "sqrt": np.sqrt,
    "abs": np.abs,
}


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str = "n"


@dataclass(frozen=True)
class Neg:
    operand: object


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    func: str
    arg: object


_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text):
    tokens = []
    pos = 0
    end = len(text)
    while pos < end:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", end))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, pos = self.take()
        if text != value or kind != "op":
            what = "end of input" if kind == "end" else repr(text)
            raise ExprSyntaxError(f"expected {value!r}, found {what}", pos)

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self):
        node = self.unary()
        if self.peek()[1] == "^" and self.peek()[0] == "op":
            self.take()
            node = BinOp("^", node, self.factor())
        return node

    def unary(self):
        if self.peek()[1] == "-" and self.peek()[0] == "op":
            self.take()
            return Neg(self.base())
        return self.base()

    def base(self):
        kind, text, pos = self.take()
        if kind == "num":
            return Num(float(text))
        if kind == "name":
            if text == "n":
                return Var()
            if text in FUNCS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            raise UnknownIdentifierError(text, pos)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        what = "end of input" if kind == "end" else repr(text)
        raise ExprSyntaxError(f"unexpected {what}", pos)


def parse_seq(text: str):
    """Parse ``text`` into an expression tree.

    Raises ExprSyntaxError (with ``offset``) on malformed input and
    UnknownIdentifierError for names other than ``n`` and the built-in functions.

    >>> parse_seq("1 + 1/n")
    BinOp(op='+', left=Num(value=1.0), right=BinOp(op='/', left=Num(value=1.0), right=Var(name='n')))
    """
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    p = _Parser(text)
    node = p.expr()
    kind, tok, pos = p.peek()
    if kind != "end":
        raise ExprSyntaxError(f"unexpected {tok!r}", pos)
    return node


# precedence of the grammar level a node needs: expr=1, term=2, factor=3, unary=4, base=5
def _fmt_num(v):
    if v.is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def to_text(node, level=1):
    """Render an expression tree back to source text with minimal parentheses.

    ``parse_seq(to_text(t)) == t`` for every tree produced by the parser.
    """
    if isinstance(node, Num):
        return _fmt_num(node.value)
    if isinstance(node, Var):
        return "n"
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg, 1)})"
    if isinstance(node, Neg):
        s = "-" + to_text(node.operand, 5)
        return s if level <= 4 else f"({s})"
    if isinstance(node, BinOp):
        if node.op in "+-":
            own, lhs, rhs = 1, 1, 2
        elif node.op in "*/":
            own, lhs, rhs = 2, 2, 3
        else:
            own, lhs, rhs = 3, 5, 3
        s = f"{to_text(node.left, lhs)}{node.op}{to_text(node.right, rhs)}"
        return s if level <= own else f"({s})"
    raise TypeError(f"not an expression node: {node!r}")


def _is_integral(e):
    return np.isfinite(e) & (np.floor(e) == e)


def _power(b, e):
    b, e = np.broadcast_arrays(np.asarray(b, float), np.asarray(e, float))
    out = np.power(np.abs(b), e)
    neg = b < 0
    if neg.any():
        integral = _is_integral(e)
        odd = integral & (np.fmod(np.abs(e), 2.0) == 1.0)
        out = np.where(neg & odd, -out, out)
        out = np.where(neg & ~integral, np.nan, out)
    return out


def evaluate(node, n):
    """Evaluate a tree at index ``n`` (scalar or integer array); returns float array.

    A negative base with integer exponent is resolved by parity, so
    ``(-1)^(n+1)`` is exact. Invalid operations yield NaN rather than warnings;
    callers validate the result.
    """
    n = np.asarray(n, dtype=float)
    with np.errstate(all="ignore"):
        return np.broadcast_to(_eval(node, n), n.shape).astype(float, copy=False)


def _eval(node, n):
    if isinstance(node, Num):
        return np.float64(node.value)
    if isinstance(node, Var):
        return n
    if isinstance(node, Neg):
        return -_eval(node.operand, n)
    if isinstance(node, Call):
        return FUNCS[node.func](_eval(node.arg, n))
    if isinstance(node, BinOp):
        a = _eval(node.left, n)
        b = _eval(node.right, n)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            return np.true_divide(a, b)
        return _power(a, b)
    raise TypeError(f"not an expression node: {node!r}")


def log_evaluate(node, n):
    """``log`` of a positive-valued tree, avoiding the rounding of values near 1.

    ``exp(g)`` yields ``g`` directly, ``b^e`` yields ``e * log b`` and
    ``1 + x`` / ``1 - x`` go through ``log1p``; anything else is ``log`` of the
    evaluated value. Entries where a rewrite is not valid come back as NaN for
    the caller to replace.
    """
    n = np.asarray(n, dtype=float)
    with np.errstate(all="ignore"):
        return np.broadcast_to(_log_eval(node, n), n.shape).astype(float, copy=False)


def _is_one(node):
    return isinstance(node, Num) and node.value == 1.0


def _log_eval(node, n):
    if isinstance(node, Call) and node.func == "exp":
        return _eval(node.arg, n)
    if isinstance(node, BinOp):
        if node.op == "^":
            b = _eval(node.left, n)
            return np.where(b > 0, _log_eval(node.left, n) * _eval(node.right, n), np.nan)
        if node.op == "+" and _is_one(node.left):
            return np.log1p(_eval(node.right, n))
        if node.op == "+" and _is_one(node.right):
            return np.log1p(_eval(node.left, n))
        if node.op == "-" and _is_one(node.left):
            return np.log1p(-_eval(node.right, n))
    return np.log(_eval(node, n))
