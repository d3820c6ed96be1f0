"""Scalar second-order equations in quadratic normal form

    x'' + gamma(x) x'^2 + A(x) x' + b(x) = 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from ..exprcore import calculus
from ..exprcore.evaluate import Compiled, DomainError
from ..exprcore.functions import Fn, Interval, ScalarFunction, grid, restrict
from ..exprcore.nodes import Const, Expr, to_string
from ..exprcore.parser import parse

PROBES = 64


def as_function(value, domain: Interval, params: Mapping[str, float] | None = None) -> Fn:
    """Coerce a string, number, expression or function to an ``Fn`` on ``domain``."""
    if isinstance(value, Fn):
        return restrict(value, domain)
    if isinstance(value, (int, float)):
        value = Const(float(value))
    return ScalarFunction(value, "x", domain, params)


class QuadraticSode:
    """The coefficient triple (gamma, A, b) on an open interval.

    Construction evaluates every coefficient at 64 interior probe points and
    rejects the domain if any of them fails.
    """

    def __init__(
        self,
        gamma,
        A,
        b,
        domain: Interval,
        params: Mapping[str, float] | None = None,
    ):
        lo, hi = float(domain[0]), float(domain[1])
        if not lo < hi:
            raise ValueError(f"domain must satisfy lo < hi, got {domain}")
        self.domain = (lo, hi)
        self.params = dict(params or {})
        self.gamma = as_function(gamma, self.domain, self.params)
        self.A = as_function(A, self.domain, self.params)
        self.b = as_function(b, self.domain, self.params)
        xs = grid(self.domain, PROBES)
        for name, fn in self.coefficients().items():
            try:
                fn(xs)
            except DomainError as exc:
                raise ValueError(f"coefficient {name} = {fn.describe()} is not evaluable on {self.domain}: {exc}") from exc

    def coefficients(self) -> dict[str, Fn]:
        return {"gamma": self.gamma, "A": self.A, "b": self.b}

    def acceleration(self, x, v):
        """Right-hand side X(x, v) = -gamma v^2 - A v - b."""
        return -self.gamma(x) * v * v - self.A(x) * v - self.b(x)

    def field(self, t: float, state: np.ndarray) -> np.ndarray:
        x, v = state
        return np.array([v, self._unchecked(x, v)])

    def _unchecked(self, x, v):
        g, a, b = self.gamma.unchecked(x), self.A.unchecked(x), self.b.unchecked(x)
        return -g * v * v - a * v - b

    def inside(self, state) -> bool:
        return self.domain[0] < state[0] < self.domain[1]

    def describe(self) -> str:
        g, a, b = (f.describe() for f in (self.gamma, self.A, self.b))
        return f"x'' + ({g}) x'^2 + ({a}) x' + ({b}) = 0 on {self.domain}"

    def __repr__(self):
        return f"QuadraticSode({self.describe()!r})"


@dataclass(frozen=True)
class NotQuadratic:
    reason: str
    third_derivative_max: float = float("nan")


def normalize(
    X: Expr | str,
    domain: Interval,
    params: Mapping[str, float] | None = None,
    grid_n: int = 16,
    velocity_box: float = 2.0,
    tol: float = 1e-10,
) -> QuadraticSode | NotQuadratic:
    """Read (gamma, A, b) off the right-hand side of ``x'' = X(x, x')``.

    ``X`` is quadratic in ``v`` when its third ``v``-derivative vanishes on a
    ``grid_n`` x ``grid_n`` sample of ``domain`` x [-velocity_box, velocity_box].
    """
    params = dict(params or {})
    if isinstance(X, str):
        X = parse(X, {"x", "v", *params})
    extra = X.free_vars() - {"x", "v"} - set(params)
    if extra:
        raise ValueError(f"undeclared names {sorted(extra)} in {to_string(X)}")
    pnames = sorted(params)
    pvals = [params[k] for k in pnames]
    names = ("x", "v", *pnames)
    xs = grid(domain, grid_n)
    vs = np.linspace(-velocity_box, velocity_box, grid_n)
    xx, vv = np.meshgrid(xs, vs, indexing="ij")

    values = Compiled(X, names)(xx, vv, *pvals)
    scale = max(1.0, float(np.max(np.abs(values))))
    dv = calculus.differentiate
    d1 = calculus.simplify(dv(X, "v"))
    d2 = calculus.simplify(dv(d1, "v"))
    d3 = calculus.simplify(dv(d2, "v"))
    third = np.broadcast_to(Compiled(d3, names)(xx, vv, *pvals), xx.shape)
    worst = float(np.max(np.abs(third)))
    if worst > tol * scale:
        return NotQuadratic(
            f"right-hand side is not quadratic in the velocity: |d^3X/dv^3| reaches {worst:.3g}",
            worst,
        )

    at0 = {"v": Const(0.0)}
    gamma = calculus.simplify(calculus.mul(Const(-0.5), calculus.substitute(d2, at0)))
    A = calculus.simplify(calculus.neg(calculus.substitute(d1, at0)))
    b = calculus.simplify(calculus.neg(calculus.substitute(X, at0)))
    s = QuadraticSode(gamma, A, b, domain, params)

    recon = s.acceleration(xx, vv)
    err = float(np.max(np.abs(recon - values)))
    if err > 1e-9 * scale:
        return NotQuadratic(f"quadratic reconstruction misses the samples by {err:.3g}", worst)
    return s
