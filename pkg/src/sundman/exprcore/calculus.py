"""Light simplification, substitution and exact symbolic differentiation.

Simplification is deliberately shallow: constant folding plus the neutral
element rules (x*1, x+0, x^0, 0*x, ...).  There is no canonical form; two
expressions are compared by sampling, never by structure.
"""

from __future__ import annotations

import math
from typing import Mapping

import numpy as np

from .nodes import (
    ONE,
    ZERO,
    Add,
    BinOp,
    Const,
    Div,
    Expr,
    Func,
    Mul,
    Neg,
    Pow,
    Sub,
    Var,
    as_expr,
)


def _is(e: Expr, value: float) -> bool:
    return isinstance(e, Const) and e.value == value


def _fold(value: float) -> Expr | None:
    if isinstance(value, complex) or not math.isfinite(value):
        return None
    return Const(value)


# --- smart constructors ------------------------------------------------------

def add(a, b) -> Expr:
    a, b = as_expr(a), as_expr(b)
    if isinstance(a, Const) and isinstance(b, Const):
        folded = _fold(a.value + b.value)
        if folded is not None:
            return folded
    if _is(a, 0.0):
        return b
    if _is(b, 0.0):
        return a
    if isinstance(b, Neg):
        return Sub(a, b.arg)
    return Add(a, b)


def sub(a, b) -> Expr:
    a, b = as_expr(a), as_expr(b)
    if isinstance(a, Const) and isinstance(b, Const):
        folded = _fold(a.value - b.value)
        if folded is not None:
            return folded
    if _is(b, 0.0):
        return a
    if _is(a, 0.0):
        return neg(b)
    if isinstance(b, Neg):
        return Add(a, b.arg)
    return Sub(a, b)


def mul(a, b) -> Expr:
    a, b = as_expr(a), as_expr(b)
    if isinstance(a, Const) and isinstance(b, Const):
        folded = _fold(a.value * b.value)
        if folded is not None:
            return folded
    if _is(a, 0.0) or _is(b, 0.0):
        return ZERO
    if _is(a, 1.0):
        return b
    if _is(b, 1.0):
        return a
    if _is(a, -1.0):
        return neg(b)
    if _is(b, -1.0):
        return neg(a)
    if isinstance(b, Const):
        a, b = b, a
    if isinstance(a, Const):
        if isinstance(b, Neg):
            return mul(Const(-a.value), b.arg)
        if isinstance(b, Mul) and isinstance(b.left, Const):
            folded = _fold(a.value * b.left.value)
            if folded is not None:
                return mul(folded, b.right)
    return Mul(a, b)


def div(a, b) -> Expr:
    a, b = as_expr(a), as_expr(b)
    if isinstance(a, Const) and isinstance(b, Const) and b.value != 0.0:
        folded = _fold(a.value / b.value)
        if folded is not None:
            return folded
    if _is(a, 0.0):
        return ZERO
    if _is(b, 1.0):
        return a
    if isinstance(b, Const) and b.value != 0.0 and isinstance(a, Mul) and isinstance(a.left, Const):
        folded = _fold(a.left.value / b.value)
        if folded is not None:
            return mul(folded, a.right)
    return Div(a, b)


def power(a, b) -> Expr:
    a, b = as_expr(a), as_expr(b)
    if _is(b, 0.0):
        return ONE
    if _is(b, 1.0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        try:
            folded = _fold(a.value ** b.value)
        except (ZeroDivisionError, OverflowError):
            folded = None
        if folded is not None:
            return folded
    return Pow(a, b)


def neg(a) -> Expr:
    a = as_expr(a)
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


_NUMPY_FUNCS = {
    "exp": np.exp,
    "log": np.log,
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "cot": lambda u: 1.0 / np.tan(u),
    "sqrt": np.sqrt,
    "abs": np.abs,
    "sign": np.sign,
}


def apply(name: str, a) -> Expr:
    a = as_expr(a)
    if isinstance(a, Const):
        with np.errstate(all="ignore"):
            value = float(_NUMPY_FUNCS[name](a.value))
        folded = _fold(value)
        if folded is not None:
            return folded
    return Func(name, a)


_BUILD = {Add: add, Sub: sub, Mul: mul, Div: div, Pow: power}


def simplify(e: Expr) -> Expr:
    """Bottom-up constant folding and neutral-element removal."""
    memo: dict[int, Expr] = {}

    def go(node: Expr) -> Expr:
        key = id(node)
        if key in memo:
            return memo[key]
        if isinstance(node, BinOp):
            out = _BUILD[type(node)](go(node.left), go(node.right))
        elif isinstance(node, Neg):
            out = neg(go(node.arg))
        elif isinstance(node, Func):
            out = apply(node.name, go(node.arg))
        else:
            out = node
        memo[key] = out
        return out

    return go(e)


def substitute(e: Expr, mapping: Mapping[str, Expr | float]) -> Expr:
    """Replace variables by expressions (simultaneously) and simplify."""
    repl = {k: as_expr(v) for k, v in mapping.items()}
    memo: dict[int, Expr] = {}

    def go(node: Expr) -> Expr:
        key = id(node)
        if key in memo:
            return memo[key]
        if isinstance(node, Var):
            out = repl.get(node.name, node)
        elif isinstance(node, BinOp):
            out = _BUILD[type(node)](go(node.left), go(node.right))
        elif isinstance(node, Neg):
            out = neg(go(node.arg))
        elif isinstance(node, Func):
            out = apply(node.name, go(node.arg))
        else:
            out = node
        memo[key] = out
        return out

    return go(e)


def differentiate(e: Expr, var: str) -> Expr:
    """Exact partial derivative of ``e`` with respect to ``var``.

    d|u| = sign(u) u' and d sign(u) = 0, both valid away from zeros of u.
    """
    memo: dict[int, Expr] = {}

    def d(node: Expr) -> Expr:
        key = id(node)
        if key in memo:
            return memo[key]
        out = _derive(node, var, d)
        memo[key] = out
        return out

    return d(e)


def _depends(e: Expr, var: str) -> bool:
    return var in e.free_vars()


def _derive(node: Expr, var: str, d) -> Expr:
    if isinstance(node, Const):
        return ZERO
    if isinstance(node, Var):
        return ONE if node.name == var else ZERO
    if isinstance(node, Add):
        return add(d(node.left), d(node.right))
    if isinstance(node, Sub):
        return sub(d(node.left), d(node.right))
    if isinstance(node, Neg):
        return neg(d(node.arg))
    if isinstance(node, Mul):
        u, v = node.left, node.right
        return add(mul(d(u), v), mul(u, d(v)))
    if isinstance(node, Div):
        u, v = node.left, node.right
        du, dv = d(u), d(v)
        if _is(dv, 0.0):
            return div(du, v)
        return div(sub(mul(du, v), mul(u, dv)), power(v, 2))
    if isinstance(node, Pow):
        u, p = node.left, node.right
        if not _depends(p, var):
            du = d(u)
            if _is(du, 0.0):
                return ZERO
            return mul(mul(p, power(u, sub(p, ONE))), du)
        if not _depends(u, var):
            return mul(mul(node, apply("log", u)), d(p))
        # u^p = exp(p log u)
        return mul(node, add(mul(d(p), apply("log", u)), div(mul(p, d(u)), u)))
    if isinstance(node, Func):
        u = node.arg
        du = d(u)
        if _is(du, 0.0):
            return ZERO
        name = node.name
        if name == "exp":
            outer = node
        elif name == "log":
            return div(du, u)
        elif name == "sin":
            outer = apply("cos", u)
        elif name == "cos":
            outer = neg(apply("sin", u))
        elif name == "tan":
            outer = div(ONE, power(apply("cos", u), 2))
        elif name == "cot":
            outer = neg(div(ONE, power(apply("sin", u), 2)))
        elif name == "sqrt":
            return div(du, mul(Const(2.0), node))
        elif name == "abs":
            outer = apply("sign", u)
        elif name == "sign":
            return ZERO
        else:  # pragma: no cover - Func validates names
            raise ValueError(name)
        return mul(outer, du)
    raise TypeError(f"not an expression node: {node!r}")
