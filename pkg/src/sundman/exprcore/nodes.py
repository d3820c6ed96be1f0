"""Expression tree nodes and the infix printer.

Nodes are immutable and compared structurally.  Arithmetic operators on
nodes build raw trees; use :func:`sundman.exprcore.simplify` to fold them.
"""

from __future__ import annotations

import math
from typing import Iterator

FUNCTIONS = ("exp", "log", "sin", "cos", "tan", "cot", "sqrt", "abs", "sign")


class Expr:
    __slots__ = ("_hash",)

    def children(self) -> tuple["Expr", ...]:
        return ()

    def _key(self) -> tuple:
        raise NotImplementedError

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if type(self) is not type(other):
            return NotImplemented if not isinstance(other, Expr) else False
        if hash(self) != hash(other):
            return False
        return self._key() == other._key()

    def __hash__(self) -> int:
        try:
            return self._hash
        except AttributeError:
            h = hash((type(self).__name__, self._key()))
            object.__setattr__(self, "_hash", h)
            return h

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    def __str__(self) -> str:
        return to_string(self)

    # arithmetic builds raw trees
    def __add__(self, other):
        return Add(self, as_expr(other))

    def __radd__(self, other):
        return Add(as_expr(other), self)

    def __sub__(self, other):
        return Sub(self, as_expr(other))

    def __rsub__(self, other):
        return Sub(as_expr(other), self)

    def __mul__(self, other):
        return Mul(self, as_expr(other))

    def __rmul__(self, other):
        return Mul(as_expr(other), self)

    def __truediv__(self, other):
        return Div(self, as_expr(other))

    def __rtruediv__(self, other):
        return Div(as_expr(other), self)

    def __pow__(self, other):
        return Pow(self, as_expr(other))

    def __rpow__(self, other):
        return Pow(as_expr(other), self)

    def __neg__(self):
        return Neg(self)

    def walk(self) -> Iterator["Expr"]:
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children()))

    def free_vars(self) -> frozenset[str]:
        return frozenset(n.name for n in self.walk() if isinstance(n, Var))


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value: float):
        object.__setattr__(self, "value", float(value))

    def _key(self):
        # -0.0 and 0.0 compare equal, keep hashes consistent
        return (self.value + 0.0,)

    def __repr__(self):
        return f"Const({self.value!r})"


class Var(Expr):
    __slots__ = ("name",)

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)

    def _key(self):
        return (self.name,)

    def __repr__(self):
        return f"Var({self.name!r})"


class BinOp(Expr):
    __slots__ = ("left", "right")
    symbol = "?"

    def __init__(self, left: Expr, right: Expr):
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    def children(self):
        return (self.left, self.right)

    def _key(self):
        return (self.left, self.right)

    def __repr__(self):
        return f"{type(self).__name__}({self.left!r}, {self.right!r})"


class Add(BinOp):
    __slots__ = ()
    symbol = "+"


class Sub(BinOp):
    __slots__ = ()
    symbol = "-"


class Mul(BinOp):
    __slots__ = ()
    symbol = "*"


class Div(BinOp):
    __slots__ = ()
    symbol = "/"


class Pow(BinOp):
    __slots__ = ()
    symbol = "^"


class Neg(Expr):
    __slots__ = ("arg",)

    def __init__(self, arg: Expr):
        object.__setattr__(self, "arg", arg)

    def children(self):
        return (self.arg,)

    def _key(self):
        return (self.arg,)

    def __repr__(self):
        return f"Neg({self.arg!r})"


class Func(Expr):
    __slots__ = ("name", "arg")

    def __init__(self, name: str, arg: Expr):
        if name not in FUNCTIONS:
            raise ValueError(f"unknown function {name!r}")
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "arg", arg)

    def children(self):
        return (self.arg,)

    def _key(self):
        return (self.name, self.arg)

    def __repr__(self):
        return f"Func({self.name!r}, {self.arg!r})"


ZERO = Const(0.0)
ONE = Const(1.0)


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return Const(value)
    try:
        return Const(float(value))
    except (TypeError, ValueError):
        raise TypeError(f"cannot convert {value!r} to an expression") from None


def func(name: str, arg) -> Expr:
    return Func(name, as_expr(arg))


# --- printer -----------------------------------------------------------------
#
# Binding levels follow the grammar: expr(1) > term(2) > factor(3) > unary(4)
# > atom(5).  Note that unary minus binds tighter than "^", so "-x^2" reads
# as (-x)^2.

_ATOM, _UNARY, _FACTOR, _TERM, _EXPR = 5, 4, 3, 2, 1


def format_number(value: float) -> str:
    if not math.isfinite(value):
        raise ValueError(f"cannot print non-finite constant {value!r}")
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def _level(e: Expr) -> int:
    if isinstance(e, Const):
        return _UNARY if e.value < 0 else _ATOM
    if isinstance(e, (Var, Func)):
        return _ATOM
    if isinstance(e, Neg):
        return _UNARY
    if isinstance(e, Pow):
        return _FACTOR
    if isinstance(e, (Mul, Div)):
        return _TERM
    return _EXPR


def _wrap(e: Expr, min_level: int) -> str:
    s = to_string(e)
    return s if _level(e) >= min_level else f"({s})"


def to_string(e: Expr) -> str:
    if isinstance(e, Const):
        return format_number(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Func):
        return f"{e.name}({to_string(e.arg)})"
    if isinstance(e, Neg):
        return "-" + _wrap(e.arg, _UNARY)
    if isinstance(e, Pow):
        return f"{_wrap(e.left, _UNARY)}^{_wrap(e.right, _FACTOR)}"
    if isinstance(e, (Mul, Div)):
        return f"{_wrap(e.left, _TERM)}{e.symbol}{_wrap(e.right, _FACTOR)}"
    if isinstance(e, (Add, Sub)):
        return f"{_wrap(e.left, _EXPR)} {e.symbol} {_wrap(e.right, _TERM)}"
    raise TypeError(f"not an expression node: {e!r}")
