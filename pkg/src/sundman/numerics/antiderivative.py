"""Quadrature-backed antiderivatives with a cached knot table."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from ..exprcore.functions import Fn, Interval
from .quadrature import gk15, quad_with_error

DEFAULT_KNOTS = 256


class CallableFn(Fn):
    """Wrap a plain vectorised callable as a function on ``domain``."""

    def __init__(self, fn: Callable, domain: Interval, label: str = "callable"):
        self.fn = fn
        self.domain = (float(domain[0]), float(domain[1]))
        self.label = label

    def _eval(self, x, check):
        return np.asarray(self.fn(np.asarray(x, dtype=float)), dtype=float)

    def describe(self):
        return self.label


def _as_fn(f, domain: Interval) -> Fn:
    if isinstance(f, Fn):
        return f
    return CallableFn(f, domain)


class NumericFunction(Fn):
    """``F(x) = integral of f from x0 to x``, immutable once built.

    Values at the knots are computed eagerly by one Gauss-Kronrod panel per
    knot gap (refined adaptively when a panel misses the tolerance).  A query
    at ``x`` adds the local integral from the nearest knot, so knots
    reproduce their tabulated values exactly.
    """

    def __init__(
        self,
        integrand,
        x0: float,
        domain: Interval,
        tol: float = 1e-12,
        knots: int = DEFAULT_KNOTS,
    ):
        lo, hi = float(domain[0]), float(domain[1])
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise ValueError(f"antiderivative needs a bounded interval, got {domain}")
        if not lo <= x0 <= hi:
            raise ValueError(f"base point {x0} outside {domain}")
        if knots < 2:
            raise ValueError("need at least two knots")
        self.domain = (lo, hi)
        self._n = knots
        self.integrand = _as_fn(integrand, self.domain)
        self.x0 = float(x0)
        self.tol = float(tol)
        xs = np.linspace(lo, hi, knots)
        gaps = self._integrate(xs[:-1], xs[1:], check=True)
        cumulative = np.concatenate([[0.0], np.cumsum(gaps)])
        k = self._nearest(self.x0)
        offset = cumulative[k] + float(self._integrate(xs[k], self.x0, check=True))
        self.knots = xs
        self.values = cumulative - offset
        self.values.setflags(write=False)
        self.knots.setflags(write=False)

    def _nearest(self, x):
        lo, hi = self.domain
        n = self._n
        idx = np.rint((np.asarray(x, dtype=float) - lo) / (hi - lo) * (n - 1))
        return np.clip(idx, 0, n - 1).astype(int)

    def _integrate(self, a, b, check: bool):
        f = self.integrand
        ev = f.__call__ if check else f.unchecked
        a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
        res, err = gk15(ev, a, b)
        res = np.array(res, dtype=float)
        bad = err > self.tol * np.maximum(1.0, np.abs(res))
        for i in zip(*np.nonzero(bad)) if res.ndim else ([()] if bad else []):
            res[i] = quad_with_error(ev, float(a[i]), float(b[i]), self.tol)[0]
        return res

    def _eval(self, x, check):
        xa = np.asarray(x, dtype=float)
        k = self._nearest(xa)
        out = self.values[k] + self._integrate(self.knots[k], xa, check)
        return out if np.ndim(x) else float(out)

    def describe(self):
        return f"integral of ({self.integrand.describe()}) from {self.x0!r}"

    def _derivative(self):
        return self.integrand

    def knot_table(self) -> dict:
        return {
            "x": self.knots.tolist(),
            "value": self.values.tolist(),
            "derivative": np.asarray(self.integrand(self.knots), dtype=float).tolist(),
        }


def antiderivative(
    f,
    x0: float | None = None,
    domain: Interval | None = None,
    tol: float = 1e-12,
    knots: int = DEFAULT_KNOTS,
) -> NumericFunction:
    """Antiderivative of ``f`` vanishing at ``x0`` (default: domain midpoint)."""
    if domain is None:
        if not isinstance(f, Fn):
            raise ValueError("a domain is required for a plain callable")
        domain = f.domain
    if x0 is None:
        x0 = 0.5 * (domain[0] + domain[1])
    return NumericFunction(f, x0, domain, tol, knots)
