"""Inversion of strictly monotone functions."""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..exprcore.evaluate import DomainError
from ..exprcore.functions import Fn, Interval, compose

_EPS = np.finfo(float).eps


class BracketError(ValueError):
    """The target value is not bracketed by the interval end values."""


class NonMonotoneError(ValueError):
    """Sampled slopes change sign on the bracket."""


def check_monotone(F: Callable, bracket: Interval, samples: int = 64) -> int:
    """Return +1 or -1 for a strictly increasing or decreasing ``F``."""
    xs = np.linspace(bracket[0], bracket[1], samples + 1)
    ys = np.asarray([float(F(x)) for x in xs]) if not isinstance(F, Fn) else np.asarray(F(xs), dtype=float)
    d = np.diff(ys)
    if np.all(d > 0):
        return 1
    if np.all(d < 0):
        return -1
    k = int(np.flatnonzero(np.sign(d) != np.sign(d[0]))[0]) if np.any(d != 0) else 0
    raise NonMonotoneError(
        f"function is not strictly monotone on {tuple(bracket)}: slope changes sign near x={xs[k]:.6g}"
    )


def invert_monotone(
    F: Callable,
    y: float,
    bracket: Interval,
    tol: float = 1e-14,
    dF: Callable | None = None,
    check: bool = True,
    max_iter: int = 200,
) -> float:
    """Solve ``F(x) = y`` on ``bracket`` by bisection-safeguarded Newton.

    Without ``dF`` the Newton step is replaced by a secant step through the
    last two iterates.  A step that leaves the bracket, or an iteration that
    fails to halve it, falls back to bisection.
    """
    a, b = float(bracket[0]), float(bracket[1])
    if check:
        check_monotone(F, (a, b), 16)
    fa, fb = float(F(a)) - y, float(F(b)) - y
    target = tol * max(1.0, abs(y))
    if abs(fa) <= target:
        return a
    if abs(fb) <= target:
        return b
    if fa * fb > 0:
        raise BracketError(f"value {y!r} outside the range [{F(a)!r}, {F(b)!r}] on {tuple(bracket)}")
    xp, fp = a, fa
    x = a - fa * (b - a) / (fb - fa)
    width = [b - a, b - a]
    for _ in range(max_iter):
        fx = float(F(x)) - y
        if abs(fx) <= target:
            return x
        if (fx < 0) == (fa < 0):
            a, fa = x, fx
        else:
            b, fb = x, fx
        if b - a <= 4 * _EPS * max(1.0, abs(x)):
            return x
        step = None
        if dF is not None:
            d = float(dF(x))
            if d != 0 and np.isfinite(d):
                step = x - fx / d
        if step is None and fx != fp:
            step = x - fx * (x - xp) / (fx - fp)
        width = [width[1], b - a]
        stalled = width[1] > 0.5 * width[0] and width[0] < bracket[1] - bracket[0]
        if step is None or not a < step < b or stalled:
            step = 0.5 * (a + b)
        xp, fp = x, fx
        x = step
    return x


class InverseFunction(Fn):
    """``phi^-1`` for a strictly monotone ``phi``, with monotonicity checked once."""

    def __init__(self, phi: Fn, tol: float = 1e-14):
        lo, hi = phi.domain
        self.phi = phi
        self.tol = tol
        self.direction = check_monotone(phi, (lo, hi), 64)
        ends = (float(phi(lo)), float(phi(hi)))
        self.bracket = (lo, hi)
        self.domain = (min(ends), max(ends))
        self._dphi = phi.derivative()

    def _solve(self, y: float, check: bool) -> float:
        lo, hi = self.domain
        if not check:
            y = min(max(y, lo), hi)
        return invert_monotone(
            self.phi.unchecked, y, self.bracket, self.tol, self._dphi.unchecked, check=False
        )

    def _eval(self, x, check):
        xa = np.asarray(x, dtype=float)
        if xa.ndim == 0:
            return self._solve(float(xa), check)
        flat = np.array([self._solve(float(v), check) for v in xa.ravel()])
        return flat.reshape(xa.shape)

    def describe(self):
        return f"inverse of ({self.phi.describe()})"

    def _derivative(self):
        return compose(1.0 / self._dphi, self, self.domain)


def inverse(phi: Fn, tol: float = 1e-14) -> Fn:
    if isinstance(phi, InverseFunction):
        return phi.phi
    return InverseFunction(phi, tol)


__all__ = [
    "BracketError",
    "DomainError",
    "InverseFunction",
    "NonMonotoneError",
    "check_monotone",
    "invert_monotone",
    "inverse",
]
