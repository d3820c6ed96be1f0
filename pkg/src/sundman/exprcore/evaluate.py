"""Numerical evaluation of expressions.

Expressions are compiled once to straight-line numpy code (one temporary per
distinct subexpression).  The fast path runs with floating-point warnings
silenced; any non-finite result is re-examined by a checked tree walk that
names the offending subexpression.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable, Mapping, Sequence

import numpy as np

from .nodes import Add, BinOp, Const, Div, Expr, Func, Mul, Neg, Pow, Sub, Var, to_string


class DomainError(ArithmeticError):
    """Evaluation left the domain of a primitive (x/0, log of x<=0, ...)."""

    def __init__(self, message: str, subexpression: Expr | None = None, point=None):
        self.subexpression = subexpression
        self.point = point
        detail = f" in {to_string(subexpression)}" if subexpression is not None else ""
        where = f" at {point}" if point else ""
        super().__init__(f"{message}{detail}{where}")


def _cot(u):
    return 1.0 / np.tan(u)


_FUNCS = {
    "exp": np.exp,
    "log": np.log,
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "cot": _cot,
    "sqrt": np.sqrt,
    "abs": np.abs,
    "sign": np.sign,
}

_OPS = {Add: "+", Sub: "-", Mul: "*", Div: "/"}


class Compiled:
    """An expression compiled against a fixed ordering of variable names."""

    def __init__(self, expr: Expr, names: Sequence[str]):
        self.expr = expr
        self.names = tuple(names)
        missing = expr.free_vars() - set(self.names)
        if missing:
            raise ValueError(f"unbound variables {sorted(missing)} in {to_string(expr)}")
        self._fn = _compile(expr, self.names)

    def raw(self, *args):
        """Evaluate without domain checking; may return inf/nan."""
        args = _as_numpy(args)
        with np.errstate(all="ignore"):
            return self._fn(*args)

    def __call__(self, *args):
        args = _as_numpy(args)
        with np.errstate(all="ignore"):
            out = self._fn(*args)
        if np.all(np.isfinite(out)):
            return out
        arrays = np.broadcast_arrays(*[np.asarray(a, dtype=float) for a in args], np.asarray(out))
        bad = np.flatnonzero(~np.isfinite(arrays[-1]))[0]
        point = {n: float(a.flat[bad]) for n, a in zip(self.names, arrays[:-1])}
        checked_eval(self.expr, point)
        # the checked walk found nothing specific (e.g. overflow at the root)
        raise DomainError("non-finite result", self.expr, point)


def _as_numpy(args):
    # python floats raise on x/0; numpy scalars give inf and are checked after
    return tuple(np.float64(a) if isinstance(a, (int, float)) else a for a in args)


def _compile(expr: Expr, names: Sequence[str]) -> Callable:
    argnames = [f"a{i}" for i in range(len(names))]
    index = {n: a for n, a in zip(names, argnames)}
    lines: list[str] = []
    temps: dict[Expr, str] = {}
    consts: dict[str, float] = {}

    def emit(node: Expr) -> str:
        if node in temps:
            return temps[node]
        if isinstance(node, Var):
            return index[node.name]
        if isinstance(node, Const):
            name = f"c{len(consts)}"
            consts[name] = node.value
            temps[node] = name
            return name
        if isinstance(node, BinOp):
            left, right = emit(node.left), emit(node.right)
            if isinstance(node, Pow):
                code = f"_pow({left}, {right})"
            else:
                code = f"{left} {_OPS[type(node)]} {right}"
        elif isinstance(node, Neg):
            code = f"-{emit(node.arg)}"
        elif isinstance(node, Func):
            code = f"_f_{node.name}({emit(node.arg)})"
        else:
            raise TypeError(node)
        name = f"t{len(lines)}"
        lines.append(f"    {name} = {code}")
        temps[node] = name
        return name

    result = emit(expr)
    src = f"def _expr({', '.join(argnames)}):\n" + "\n".join(lines) + f"\n    return {result}\n"
    env = {f"_f_{k}": v for k, v in _FUNCS.items()}
    env["_pow"] = np.power
    env.update({k: np.float64(v) for k, v in consts.items()})
    exec(compile(src, "<expression>", "exec"), env)
    fn = env["_expr"]
    if not expr.free_vars():
        with np.errstate(all="ignore"):
            value = fn(*([np.float64(0.0)] * len(argnames)))

        def const_fn(*args, _v=value):
            if args and np.ndim(args[0]):
                return np.full(np.shape(args[0]), _v, dtype=float)
            return _v

        return const_fn
    return fn


def checked_eval(expr: Expr, binding: Mapping[str, float]) -> float:
    """Scalar tree walk that raises :class:`DomainError` at the first
    primitive whose argument is outside its domain."""
    point = dict(binding)
    memo: dict[int, float] = {}

    def ev(node: Expr) -> float:
        key = id(node)
        if key in memo:
            return memo[key]
        out = _ev(node)
        if not math.isfinite(out):
            raise DomainError("non-finite value", node, point)
        memo[key] = out
        return out

    def _ev(node: Expr) -> float:
        if isinstance(node, Const):
            return node.value
        if isinstance(node, Var):
            try:
                return float(point[node.name])
            except KeyError:
                raise DomainError(f"unbound variable {node.name!r}", node) from None
        if isinstance(node, Neg):
            return -ev(node.arg)
        if isinstance(node, BinOp):
            a, b = ev(node.left), ev(node.right)
            if isinstance(node, Add):
                return a + b
            if isinstance(node, Sub):
                return a - b
            if isinstance(node, Mul):
                return a * b
            if isinstance(node, Div):
                if b == 0.0:
                    raise DomainError("division by zero", node, point)
                return a / b
            if a == 0.0 and b < 0.0:
                raise DomainError("zero raised to a negative power", node, point)
            if a < 0.0 and b != int(b):
                raise DomainError("negative base with non-integer exponent", node, point)
            try:
                return float(a ** b)
            except OverflowError:
                raise DomainError("overflow", node, point) from None
        if isinstance(node, Func):
            u = ev(node.arg)
            name = node.name
            if name == "log" and u <= 0.0:
                raise DomainError("log of a non-positive number", node, point)
            if name == "sqrt" and u < 0.0:
                raise DomainError("sqrt of a negative number", node, point)
            if name == "cot" and math.sin(u) == 0.0:
                raise DomainError("cot at a multiple of pi", node, point)
            if name == "exp" and u > 709.78:
                raise DomainError("overflow", node, point)
            return float(_FUNCS[name](u))
        raise TypeError(node)

    return ev(expr)


def evaluate(expr: Expr, binding: Mapping[str, float]) -> float:
    """Evaluate ``expr`` at a point given as a name -> value mapping."""
    names = sorted(expr.free_vars())
    missing = [n for n in names if n not in binding]
    if missing:
        raise DomainError(f"binding does not cover {missing}", expr)
    return float(compiled(expr, tuple(names))(*[float(binding[n]) for n in names]))


@lru_cache(maxsize=1024)
def compiled(expr: Expr, names: tuple[str, ...]) -> Compiled:
    return Compiled(expr, names)
