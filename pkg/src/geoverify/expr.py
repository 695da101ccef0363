"""A small expression language for metric and torsion components.

Expressions are parsed against a chart (coordinate names plus named real
parameters) and evaluated together with their exact first and second partial
derivatives by forward-mode propagation of second-order jets.

Grammar, from loosest to tightest binding::

    sum     := product (('+' | '-') product)*
    product := unary (('*' | '/') unary)*
    unary   := ('-' | '+') unary | power
    power   := atom ('^' unary)?          # right-associative
    atom    := number | name | func '(' sum ')' | '(' sum ')'

Exponents must be free of coordinates; ``f^g`` with a coordinate-dependent
``g`` is rejected.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import DomainError, ExprError, UnboundParameterError

FUNCTIONS = ("exp", "log", "sin", "cos", "sinh", "cosh", "sqrt")

_NAME_RE = re.compile(r"[a-zA-Z_][a-zA-Z0-9_]*\Z")
_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[a-zA-Z_][a-zA-Z0-9_]*)"
    r"|(?P<op>\*\*|[-+*/^()]))"
)


def is_identifier(name: str) -> bool:
    return bool(_NAME_RE.match(name))


# ---------------------------------------------------------------------------
# jets


@dataclass(frozen=True)
class Jet2:
    """Value, gradient and (symmetric) Hessian of a scalar at a point."""

    value: float
    gradient: np.ndarray
    hessian: np.ndarray


class _Ctx:
    __slots__ = ("point", "params", "dim", "order")

    def __init__(self, point, params, dim, order):
        self.point = point
        self.params = params
        self.dim = dim
        self.order = order


# A raw jet is a tuple (value, grad | None, hess | None); None means zero.
# Constant subtrees therefore cost no array work at all.


def _add(a, b):
    g = a[1] if b[1] is None else (b[1] if a[1] is None else a[1] + b[1])
    h = a[2] if b[2] is None else (b[2] if a[2] is None else a[2] + b[2])
    return a[0] + b[0], g, h


def _scale(a, c):
    return (
        c * a[0],
        None if a[1] is None else c * a[1],
        None if a[2] is None else c * a[2],
    )


def _mul(a, b, order):
    va, ga, ha = a
    vb, gb, hb = b
    g = None
    if ga is not None:
        g = vb * ga
    if gb is not None:
        g = va * gb if g is None else g + va * gb
    h = None
    if order >= 2:
        parts = []
        if ha is not None:
            parts.append(vb * ha)
        if hb is not None:
            parts.append(va * hb)
        if ga is not None and gb is not None:
            o = np.outer(ga, gb)
            parts.append(o + o.T)
        if parts:
            h = parts[0]
            for p in parts[1:]:
                h = h + p
    return va * vb, g, h


def _chain(a, f0, f1, f2, order):
    """Compose a jet with a scalar function given f, f', f'' at the value."""
    _, g, h = a
    if g is None:
        return f0, None, None
    hn = None
    if order >= 2:
        hn = f2 * np.outer(g, g)
        if h is not None:
            hn = hn + f1 * h
    return f0, f1 * g, hn


# ---------------------------------------------------------------------------
# AST


class Expr:
    """Immutable expression tree node."""

    __slots__ = ()
    kind = "?"

    def children(self) -> tuple:
        return ()

    def depth(self) -> int:
        """Number of operator nodes on the longest root-to-leaf path."""
        kids = self.children()
        if not kids:
            return 0
        return 1 + max(k.depth() for k in kids)

    def node_kinds(self) -> set:
        out = set()
        stack = [self]
        while stack:
            e = stack.pop()
            if e.children():
                out.add(e.kind)
                stack.extend(e.children())
        return out

    def coord_indices(self) -> set:
        out = set()
        stack = [self]
        while stack:
            e = stack.pop()
            if isinstance(e, Coord):
                out.add(e.index)
            stack.extend(e.children())
        return out

    def is_zero_literal(self) -> bool:
        return isinstance(self, Num) and self.value == 0.0

    def __str__(self) -> str:
        return self.to_string()

    def __repr__(self) -> str:
        return f"Expr({self.to_string()!r})"

    def to_string(self) -> str:
        raise NotImplementedError

    def _jet(self, ctx: _Ctx):
        raise NotImplementedError


class Num(Expr):
    __slots__ = ("value",)
    kind = "num"

    def __init__(self, value: float):
        object.__setattr__(self, "value", float(value))

    def __setattr__(self, *_):
        raise AttributeError("Expr nodes are immutable")

    def to_string(self):
        v = self.value
        if v == int(v) and abs(v) < 1e15:
            return str(int(v))
        return repr(v)

    def _jet(self, ctx):
        return self.value, None, None


class Coord(Expr):
    __slots__ = ("name", "index")
    kind = "coord"

    def __init__(self, name: str, index: int):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "index", index)

    def __setattr__(self, *_):
        raise AttributeError("Expr nodes are immutable")

    def to_string(self):
        return self.name

    def _jet(self, ctx):
        g = None
        if ctx.order >= 1:
            g = np.zeros(ctx.dim)
            g[self.index] = 1.0
        return float(ctx.point[self.index]), g, None


class Param(Expr):
    __slots__ = ("name",)
    kind = "param"

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)

    def __setattr__(self, *_):
        raise AttributeError("Expr nodes are immutable")

    def to_string(self):
        return self.name

    def _jet(self, ctx):
        try:
            return float(ctx.params[self.name]), None, None
        except KeyError:
            raise UnboundParameterError(f"parameter {self.name!r} is not bound") from None


class Neg(Expr):
    __slots__ = ("arg",)
    kind = "neg"

    def __init__(self, arg: Expr):
        object.__setattr__(self, "arg", arg)

    def __setattr__(self, *_):
        raise AttributeError("Expr nodes are immutable")

    def children(self):
        return (self.arg,)

    def to_string(self):
        return f"(-{self.arg.to_string()})"

    def _jet(self, ctx):
        return _scale(self.arg._jet(ctx), -1.0)


class Func(Expr):
    __slots__ = ("name", "arg")

    def __init__(self, name: str, arg: Expr):
        if name not in FUNCTIONS:
            raise ExprError(f"unknown function {name!r}")
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "arg", arg)

    def __setattr__(self, *_):
        raise AttributeError("Expr nodes are immutable")

    @property
    def kind(self):
        return self.name

    def children(self):
        return (self.arg,)

    def to_string(self):
        return f"{self.name}({self.arg.to_string()})"

    def _jet(self, ctx):
        a = self.arg._jet(ctx)
        x = a[0]
        n = self.name
        if n == "exp":
            e = math.exp(x)
            return _chain(a, e, e, e, ctx.order)
        if n == "log":
            if x <= 0.0:
                raise DomainError(f"log of non-positive value {x!r}")
            return _chain(a, math.log(x), 1.0 / x, -1.0 / (x * x), ctx.order)
        if n == "sqrt":
            if x <= 0.0:
                raise DomainError(f"sqrt of non-positive value {x!r}")
            r = math.sqrt(x)
            return _chain(a, r, 0.5 / r, -0.25 / (r * x), ctx.order)
        if n == "sin":
            s, c = math.sin(x), math.cos(x)
            return _chain(a, s, c, -s, ctx.order)
        if n == "cos":
            s, c = math.sin(x), math.cos(x)
            return _chain(a, c, -s, -c, ctx.order)
        if n == "sinh":
            s, c = math.sinh(x), math.cosh(x)
            return _chain(a, s, c, s, ctx.order)
        # cosh
        s, c = math.sinh(x), math.cosh(x)
        return _chain(a, c, s, c, ctx.order)


class BinOp(Expr):
    __slots__ = ("op", "left", "right")

    def __init__(self, op: str, left: Expr, right: Expr):
        if op not in "+-*/":
            raise ExprError(f"unknown operator {op!r}")
        if op == "/" and right.is_zero_literal():
            raise ExprError("division by a literal zero")
        object.__setattr__(self, "op", op)
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    def __setattr__(self, *_):
        raise AttributeError("Expr nodes are immutable")

    @property
    def kind(self):
        return self.op

    def children(self):
        return (self.left, self.right)

    def to_string(self):
        return f"({self.left.to_string()} {self.op} {self.right.to_string()})"

    def _jet(self, ctx):
        a = self.left._jet(ctx)
        b = self.right._jet(ctx)
        op = self.op
        if op == "+":
            return _add(a, b)
        if op == "-":
            return _add(a, _scale(b, -1.0))
        if op == "*":
            return _mul(a, b, ctx.order)
        y = b[0]
        if y == 0.0:
            raise DomainError("division by zero")
        inv = _chain(b, 1.0 / y, -1.0 / (y * y), 2.0 / (y * y * y), ctx.order)
        return _mul(a, inv, ctx.order)


class Pow(Expr):
    __slots__ = ("base", "exponent")
    kind = "^"

    def __init__(self, base: Expr, exponent: Expr):
        if exponent.coord_indices():
            raise ExprError("exponent must not depend on coordinates")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "exponent", exponent)

    def __setattr__(self, *_):
        raise AttributeError("Expr nodes are immutable")

    def children(self):
        return (self.base, self.exponent)

    def to_string(self):
        return f"({self.base.to_string()}^{self.exponent.to_string()})"

    def _jet(self, ctx):
        c = self.exponent._jet(_Ctx(ctx.point, ctx.params, ctx.dim, 0))[0]
        a = self.base._jet(ctx)
        x = a[0]
        if c == 0.0:
            return 1.0, None, None
        if c == 1.0:
            return a
        if float(c).is_integer():
            k = int(c)
            if x == 0.0 and k < 0:
                raise DomainError("zero raised to a negative power")
            f0 = x**k
            f1 = k * x ** (k - 1) if k - 1 >= 0 or x != 0.0 else 0.0
            f2 = k * (k - 1) * x ** (k - 2) if k - 2 >= 0 or x != 0.0 else 0.0
            return _chain(a, float(f0), float(f1), float(f2), ctx.order)
        if x <= 0.0:
            raise DomainError(f"non-integer power of non-positive value {x!r}")
        return _chain(
            a, x**c, c * x ** (c - 1.0), c * (c - 1.0) * x ** (c - 2.0), ctx.order
        )


# ---------------------------------------------------------------------------
# parser


class _Parser:
    def __init__(self, text, coords, params):
        self.text = text
        self.coords = {name: i for i, name in enumerate(coords)}
        self.params = set(params)
        self.tokens = self._tokenize(text)
        self.pos = 0

    @staticmethod
    def _tokenize(text):
        toks = []
        i = 0
        n = len(text)
        while i < n:
            if text[i].isspace():
                i += 1
                continue
            m = _TOKEN_RE.match(text, i)
            if not m or m.end() == i:
                raise ExprError(f"unexpected character {text[i]!r} at offset {i}")
            if m.group("num") is not None:
                toks.append(("num", m.group("num")))
            elif m.group("name") is not None:
                toks.append(("name", m.group("name")))
            else:
                op = m.group("op")
                toks.append(("op", "^" if op == "**" else op))
            i = m.end()
        return toks

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def take(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def parse(self):
        if not self.tokens:
            raise ExprError("empty expression")
        e = self.sum()
        kind, val = self.peek()
        if kind is not None:
            if val == ")":
                raise ExprError("unbalanced parentheses: unexpected ')'")
            raise ExprError(f"unexpected token {val!r}")
        return e

    def sum(self):
        e = self.product()
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            e = BinOp(op, e, self.product())
        return e

    def product(self):
        e = self.unary()
        while self.peek() in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            e = BinOp(op, e, self.unary())
        return e

    def unary(self):
        tok = self.peek()
        if tok == ("op", "-"):
            self.take()
            return Neg(self.unary())
        if tok == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            return Pow(base, self.unary())
        return base

    def atom(self):
        kind, val = self.take()
        if kind is None:
            raise ExprError("empty operand at end of expression")
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if val in FUNCTIONS and self.peek() == ("op", "("):
                self.take()
                arg = self.sum()
                self._close()
                return Func(val, arg)
            if val in self.coords:
                return Coord(val, self.coords[val])
            if val in self.params:
                return Param(val)
            raise ExprError(f"unknown symbol {val!r}")
        if val == "(":
            e = self.sum()
            self._close()
            return e
        if val == ")":
            raise ExprError("empty operand before ')'")
        raise ExprError(f"empty operand before {val!r}")

    def _close(self):
        kind, val = self.take()
        if val != ")":
            raise ExprError("unbalanced parentheses: missing ')'")


def parse(text: str, coords: Sequence[str], params: Sequence[str] = ()) -> Expr:
    """Parse ``text`` into an expression over the given coordinates and parameters."""
    if not isinstance(text, str) or not text.strip():
        raise ExprError("empty expression")
    for name in list(coords) + list(params):
        if not is_identifier(name):
            raise ExprError(f"invalid symbol name {name!r}")
        if name in FUNCTIONS:
            raise ExprError(f"symbol name {name!r} shadows a function")
    if set(coords) & set(params):
        raise ExprError("a name is declared both as coordinate and parameter")
    return _Parser(text, list(coords), list(params)).parse()


# ---------------------------------------------------------------------------
# evaluation


def jet(expr: Expr, point, params: Mapping[str, float] | None = None, order: int = 2):
    """Raw jet evaluation; returns (value, gradient, hessian) with dense arrays."""
    point = np.asarray(point, dtype=float)
    dim = point.shape[0]
    v, g, h = expr._jet(_Ctx(point, params or {}, dim, order))
    if order >= 1 and g is None:
        g = np.zeros(dim)
    if order >= 2:
        h = np.zeros((dim, dim)) if h is None else 0.5 * (h + h.T)
    return float(v), g, h


def evaluate(expr: Expr, point, params: Mapping[str, float] | None = None) -> float:
    return jet(expr, point, params, order=0)[0]


def eval_jet2(expr: Expr, point, params: Mapping[str, float] | None = None) -> Jet2:
    """Value, exact gradient and exact Hessian of ``expr`` at ``point``."""
    v, g, h = jet(expr, point, params, order=2)
    return Jet2(v, g, h)


def jets_of(exprs, point, params=None, order=2):
    """Evaluate an object array of expressions (``None`` entries are zero).

    Returns ``(values, first, second)``; the derivative arrays have the
    derivative axes appended (``exprs.shape + (dim,)`` and
    ``exprs.shape + (dim, dim)``) and are ``None`` above ``order``.
    """
    exprs = np.asarray(exprs, dtype=object)
    point = np.asarray(point, dtype=float)
    dim = point.shape[0]
    val = np.zeros(exprs.shape)
    d1 = np.zeros(exprs.shape + (dim,)) if order >= 1 else None
    d2 = np.zeros(exprs.shape + (dim, dim)) if order >= 2 else None
    cache = {}
    for idx, e in np.ndenumerate(exprs):
        if e is None:
            continue
        key = id(e)
        if key not in cache:
            cache[key] = jet(e, point, params, order)
        v, g, h = cache[key]
        val[idx] = v
        if order >= 1:
            d1[idx] = g
        if order >= 2:
            d2[idx] = h
    return val, d1, d2
