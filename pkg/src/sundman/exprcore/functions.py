"""Univariate functions on an interval, closed-form or composite.

:class:`ScalarFunction` is a symbolic leaf: an expression in one variable
plus bound parameters.  Arithmetic, elementary functions and composition
over :class:`Fn` objects build composite functions whose derivatives follow
exactly from the chain rule, so numeric leaves (quadrature antiderivatives,
monotone inverses) can sit inside symbolic formulas without losing exact
differentiation of everything around them.

Whenever both operands are symbolic the result is folded back into a single
:class:`ScalarFunction`.  Compositions sharing the same inner function are
merged as well, so ``g(phi^-1(y))`` stays one numeric inversion per point no
matter how often it is differentiated.
"""

from __future__ import annotations

import copy
import math
from typing import Mapping

import numpy as np

from . import calculus
from .evaluate import Compiled, DomainError
from .nodes import Const, Expr, Var, as_expr, to_string

Interval = tuple[float, float]

REAL_LINE: Interval = (-math.inf, math.inf)


def grid(domain: Interval, n: int) -> np.ndarray:
    """``n`` equispaced interior points of a finite interval."""
    lo, hi = domain
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError(f"cannot sample the unbounded interval {domain}")
    return np.linspace(lo, hi, n + 2)[1:-1]


def intersect(a: Interval, b: Interval) -> Interval:
    lo, hi = max(a[0], b[0]), min(a[1], b[1])
    if not lo < hi:
        raise DomainError(f"intervals {a} and {b} do not overlap")
    return (lo, hi)


class Fn:
    """A real function of one variable on the interval ``domain``."""

    domain: Interval

    def __call__(self, x):
        self._check(x)
        return self._eval(x, True)

    def unchecked(self, x):
        """Evaluate without the interval check (for integrator stages)."""
        return self._eval(x, False)

    def _eval(self, x, check: bool):
        raise NotImplementedError

    def _check(self, x) -> None:
        lo, hi = self.domain
        slack = 1e-9 * (hi - lo) + 1e-12 if math.isfinite(hi - lo) else 0.0
        xa = np.asarray(x, dtype=float)
        if np.any(xa < lo - slack) or np.any(xa > hi + slack) or np.any(np.isnan(xa)):
            bad = xa[(xa < lo - slack) | (xa > hi + slack) | np.isnan(xa)].flat[0]
            raise DomainError(f"point {bad!r} outside the domain {self.domain} of {self.describe()}")

    @property
    def expr(self) -> Expr | None:
        """Closed form, when there is one."""
        return None

    def describe(self) -> str:
        return "numeric"

    def derivative(self) -> "Fn":
        try:
            return self._dcache
        except AttributeError:
            d = self._derivative()
            self._dcache = d
            return d

    def _derivative(self) -> "Fn":
        raise NotImplementedError(f"{type(self).__name__} has no derivative")

    def samples(self, n: int = 64) -> tuple[np.ndarray, np.ndarray]:
        xs = grid(self.domain, n)
        return xs, np.asarray(self(xs), dtype=float)

    # --- algebra ---------------------------------------------------------
    def __add__(self, other):
        return combine("+", self, other)

    def __radd__(self, other):
        return combine("+", other, self)

    def __sub__(self, other):
        return combine("-", self, other)

    def __rsub__(self, other):
        return combine("-", other, self)

    def __mul__(self, other):
        return combine("*", self, other)

    def __rmul__(self, other):
        return combine("*", other, self)

    def __truediv__(self, other):
        return combine("/", self, other)

    def __rtruediv__(self, other):
        return combine("/", other, self)

    def __neg__(self):
        return combine("*", -1.0, self)

    def __pow__(self, p):
        if isinstance(p, Fn):
            raise TypeError("only constant exponents are supported")
        return unary("pow", self, float(p))

    def exp(self):
        return unary("exp", self)

    def log(self):
        return unary("log", self)

    def abs(self):
        return unary("abs", self)

    def sign(self):
        return unary("sign", self)

    def sqrt(self):
        return unary("sqrt", self)

    def compose(self, inner: "Fn") -> "Fn":
        """``self o inner``."""
        return compose(self, inner)


class ScalarFunction(Fn):
    """Closed-form function ``expr`` of the variable ``var``.

    Parameters named in ``params`` are bound constants; they stay symbolic in
    ``expr`` (and in printed derivatives) but are never differentiated.
    """

    def __init__(
        self,
        expr: Expr | str | float,
        var: str = "x",
        domain: Interval = REAL_LINE,
        params: Mapping[str, float] | None = None,
    ):
        params = dict(params or {})
        if isinstance(expr, str):
            from .parser import parse

            expr = parse(expr, {var, *params})
        expr = as_expr(expr)
        lo, hi = float(domain[0]), float(domain[1])
        if not lo < hi:
            raise ValueError(f"domain must satisfy lo < hi, got {domain}")
        extra = expr.free_vars() - {var} - set(params)
        if extra:
            raise ValueError(f"{to_string(expr)} uses undeclared names {sorted(extra)}")
        self._expr = expr
        self.var = var
        self.domain = (lo, hi)
        self.params = {k: float(v) for k, v in params.items() if k in expr.free_vars()}
        names = (var, *sorted(self.params))
        self._compiled = Compiled(expr, names)
        self._pvals = tuple(self.params[k] for k in sorted(self.params))

    @property
    def expr(self) -> Expr:
        return self._expr

    def describe(self) -> str:
        return to_string(self._expr)

    def __repr__(self):
        return f"ScalarFunction({self.describe()!r}, var={self.var!r}, domain={self.domain})"

    def _eval(self, x, check):
        if check:
            return self._compiled(x, *self._pvals)
        return self._compiled.raw(x, *self._pvals)

    def _derivative(self):
        d = calculus.simplify(calculus.differentiate(self._expr, self.var))
        return ScalarFunction(d, self.var, self.domain, self.params)

    def is_constant(self) -> bool:
        return self.var not in self._expr.free_vars()

    def with_domain(self, domain: Interval) -> "ScalarFunction":
        return ScalarFunction(self._expr, self.var, domain, self.params)

    def in_variable(self, var: str, domain: Interval | None = None) -> "ScalarFunction":
        e = self._expr if var == self.var else calculus.substitute(self._expr, {self.var: Var(var)})
        return ScalarFunction(e, var, self.domain if domain is None else domain, self.params)


def constant(value: float, var: str = "x", domain: Interval = REAL_LINE) -> ScalarFunction:
    return ScalarFunction(Const(value), var, domain)


def identity(domain: Interval = REAL_LINE, var: str = "x") -> ScalarFunction:
    return ScalarFunction(Var(var), var, domain)


def _merge_params(a: ScalarFunction, b: ScalarFunction) -> dict:
    out = dict(a.params)
    for k, v in b.params.items():
        if k in out and out[k] != v:
            raise ValueError(f"parameter {k!r} bound to both {out[k]} and {v}")
        out[k] = v
    return out


_SYMBOLIC_OPS = {"+": calculus.add, "-": calculus.sub, "*": calculus.mul, "/": calculus.div}
_NUMERIC_OPS = {
    "+": np.add,
    "-": np.subtract,
    "*": np.multiply,
    "/": np.divide,
}


def _lift(value, like: Fn) -> Fn:
    if isinstance(value, Fn):
        return value
    var = like.var if isinstance(like, ScalarFunction) else "x"
    return constant(float(value), var)


def combine(op: str, a, b) -> Fn:
    if not isinstance(a, Fn) and not isinstance(b, Fn):
        raise TypeError("at least one operand must be a function")
    a = _lift(a, b if isinstance(b, Fn) else a)
    b = _lift(b, a)
    if isinstance(a, ScalarFunction) and isinstance(b, ScalarFunction):
        b2 = b.in_variable(a.var)
        e = _SYMBOLIC_OPS[op](a.expr, b2.expr)
        return ScalarFunction(e, a.var, intersect(a.domain, b.domain), _merge_params(a, b2))
    if isinstance(a, Compose) and isinstance(b, Compose) and a.inner is b.inner:
        return Compose(combine(op, a.outer, b.outer), a.inner, intersect(a.domain, b.domain))
    if isinstance(a, Compose) and isinstance(b, ScalarFunction) and b.is_constant():
        return Compose(combine(op, a.outer, _const_like(b, a.outer)), a.inner, intersect(a.domain, b.domain))
    if isinstance(b, Compose) and isinstance(a, ScalarFunction) and a.is_constant():
        return Compose(combine(op, _const_like(a, b.outer), b.outer), b.inner, intersect(a.domain, b.domain))
    return Binary(op, a, b)


def _const_like(c: ScalarFunction, like: Fn) -> Fn:
    var = like.var if isinstance(like, ScalarFunction) else "x"
    return ScalarFunction(c.in_variable(var).expr, var, REAL_LINE, c.params)


class Binary(Fn):
    def __init__(self, op: str, a: Fn, b: Fn):
        self.op, self.a, self.b = op, a, b
        self.domain = intersect(a.domain, b.domain)

    def _eval(self, x, check):
        u, v = self.a._eval(x, check), self.b._eval(x, check)
        with np.errstate(all="ignore"):
            out = _NUMERIC_OPS[self.op](u, v)
        if check and not np.all(np.isfinite(out)):
            raise DomainError(f"non-finite value in ({self.a.describe()}) {self.op} ({self.b.describe()})")
        return out

    def describe(self):
        return f"({self.a.describe()}) {self.op} ({self.b.describe()})"

    def _derivative(self):
        a, b = self.a, self.b
        da, db = a.derivative(), b.derivative()
        if self.op == "+":
            return da + db
        if self.op == "-":
            return da - db
        if self.op == "*":
            return da * b + a * db
        return (da * b - a * db) / (b * b)


_UNARY_NUMERIC = {
    "exp": np.exp,
    "log": np.log,
    "abs": np.abs,
    "sign": np.sign,
    "sqrt": np.sqrt,
}


def unary(name: str, a: Fn, p: float | None = None) -> Fn:
    if isinstance(a, ScalarFunction):
        if name == "pow":
            e = calculus.power(a.expr, Const(p))
        else:
            e = calculus.apply(name, a.expr)
        return ScalarFunction(e, a.var, a.domain, a.params)
    if isinstance(a, Compose):
        return Compose(unary(name, a.outer, p), a.inner, a.domain)
    return Unary(name, a, p)


class Unary(Fn):
    def __init__(self, name: str, a: Fn, p: float | None = None):
        self.name, self.a, self.p = name, a, p
        self.domain = a.domain

    def _eval(self, x, check):
        u = self.a._eval(x, check)
        with np.errstate(all="ignore"):
            if self.name == "pow":
                out = np.power(u, self.p)
            else:
                out = _UNARY_NUMERIC[self.name](u)
        if check and not np.all(np.isfinite(out)):
            raise DomainError(f"non-finite value in {self.describe()}")
        return out

    def describe(self):
        if self.name == "pow":
            return f"({self.a.describe()})^{self.p!r}"
        return f"{self.name}({self.a.describe()})"

    def _derivative(self):
        a, da = self.a, self.a.derivative()
        if self.name == "exp":
            return self * da
        if self.name == "log":
            return da / a
        if self.name == "abs":
            return a.sign() * da
        if self.name == "sign":
            return constant(0.0, domain=self.domain)
        if self.name == "sqrt":
            return da / (2.0 * self)
        return self.p * a ** (self.p - 1.0) * da


def compose(outer: Fn, inner: Fn, domain: Interval | None = None) -> Fn:
    if isinstance(outer, ScalarFunction) and isinstance(inner, ScalarFunction):
        e = calculus.substitute(outer.expr, {outer.var: inner.expr})
        dom = inner.domain if domain is None else domain
        return ScalarFunction(e, inner.var, dom, _merge_params(outer, inner))
    if isinstance(outer, ScalarFunction) and outer.is_constant():
        var = inner.var if isinstance(inner, ScalarFunction) else "x"
        return ScalarFunction(outer.expr, var, inner.domain if domain is None else domain, outer.params)
    if isinstance(inner, Compose) and isinstance(outer, ScalarFunction) and isinstance(inner.outer, ScalarFunction):
        return Compose(compose(outer, inner.outer), inner.inner, inner.domain if domain is None else domain)
    return Compose(outer, inner, domain)


class Compose(Fn):
    """``outer(inner(x))``."""

    def __init__(self, outer: Fn, inner: Fn, domain: Interval | None = None):
        self.outer, self.inner = outer, inner
        self.domain = inner.domain if domain is None else intersect(inner.domain, domain)

    def _eval(self, x, check):
        y = self.inner._eval(x, check)
        if check:
            self.outer._check(y)
        return self.outer._eval(y, check)

    def describe(self):
        return f"[{self.outer.describe()}] o [{self.inner.describe()}]"

    def _derivative(self):
        return compose(self.outer.derivative(), self.inner, self.domain) * self.inner.derivative()


def restrict(f: Fn, domain: Interval) -> Fn:
    """``f`` viewed on the sub-interval ``domain``."""
    dom = intersect(f.domain, domain)
    if dom == f.domain:
        return f
    if isinstance(f, ScalarFunction):
        return f.with_domain(dom)
    out = copy.copy(f)
    out.__dict__.pop("_dcache", None)
    out.domain = dom
    return out


def closed_form(f: Fn) -> str | None:
    e = f.expr
    return None if e is None else to_string(e)
