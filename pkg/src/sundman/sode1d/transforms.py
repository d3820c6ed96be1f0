"""Coefficient maps, the Q invariant and the generalised Sundman group.

A transformation (h, phi) acts by y = phi(x), dtau = h(x) dt.  Products are
written right to left: ``compose(t2, t1)`` applies ``t1`` first.
"""

from __future__ import annotations

import numpy as np

from ..exprcore import calculus
from ..exprcore.evaluate import DomainError
from ..exprcore.functions import (
    Fn,
    Interval,
    ScalarFunction,
    compose as compose_fn,
    constant,
    grid,
    identity,
    intersect,
    restrict,
)
from ..exprcore.nodes import Var
from ..numerics.roots import InverseFunction, NonMonotoneError, invert_monotone
from .sode import PROBES, QuadraticSode, as_function


# --- invariant -----------------------------------------------------------

def p_function(s: QuadraticSode) -> Fn:
    """P = A b' + gamma A b - A' b."""
    A, b, g = s.A, s.b, s.gamma
    return A * b.derivative() + g * A * b - A.derivative() * b


def q_invariant(s: QuadraticSode) -> Fn:
    """Q = A P' - 3 A' P; it vanishes exactly when ``s`` is linearisable."""
    P = p_function(s)
    return s.A * P.derivative() - 3.0 * s.A.derivative() * P


def q_samples(s: QuadraticSode, n: int = PROBES) -> tuple[np.ndarray, np.ndarray, float]:
    """Q on an ``n``-point grid with the magnitude of its two terms as scale."""
    xs = grid(s.domain, n)
    P = p_function(s)
    left = np.asarray(s.A(xs) * P.derivative()(xs), dtype=float) * np.ones_like(xs)
    right = np.asarray(3.0 * s.A.derivative()(xs) * P(xs), dtype=float) * np.ones_like(xs)
    scale = max(1.0, float(np.max(np.abs(left))), float(np.max(np.abs(right))))
    return xs, left - right, scale


# --- coefficient maps ----------------------------------------------------

def _check_positive(h: Fn, domain: Interval, what: str = "h") -> None:
    xs = grid(domain, PROBES)
    vals = np.asarray(h(xs), dtype=float) * np.ones_like(xs)
    if np.any(vals <= 0):
        x = xs[np.flatnonzero(vals <= 0)[0]]
        raise ValueError(f"{what} = {h.describe()} is not positive on {domain} (h({x:.6g}) = {h(x):.6g})")


def apply_pure_sundman(s: QuadraticSode, h) -> QuadraticSode:
    """Time change dtau = h(x) dt: (gamma + h'/h, A/h, b/h^2)."""
    h = as_function(h, s.domain, s.params)
    _check_positive(h, s.domain)
    return QuadraticSode(s.gamma + h.derivative() / h, s.A / h, s.b / (h * h), s.domain)


def is_affine(phi: Fn) -> bool:
    if not isinstance(phi, ScalarFunction):
        return False
    d = phi.derivative()
    return isinstance(d, ScalarFunction) and d.is_constant()


def monotone_direction(phi: Fn, domain: Interval, n: int = PROBES) -> int:
    d = np.asarray(phi.derivative()(grid(domain, n)), dtype=float)
    if np.all(d > 0):
        return 1
    if np.all(d < 0):
        return -1
    raise NonMonotoneError(f"phi = {phi.describe()} is not strictly monotone on {domain}")


def image(phi: Fn, domain: Interval) -> Interval:
    a, b = float(phi(domain[0])), float(phi(domain[1]))
    return (min(a, b), max(a, b))


def function_inverse(phi: Fn, domain: Interval) -> Fn:
    """phi^-1 on phi(domain); closed form for affine phi, numeric otherwise."""
    phi = restrict(phi, domain)
    target = image(phi, domain)
    if is_affine(phi):
        slope = float(phi.derivative().unchecked(0.0))
        offset = float(phi.unchecked(0.0))
        if slope == 1.0 and offset == 0.0:
            return identity(target)
        x = Var("x")
        return ScalarFunction(calculus.div(calculus.sub(x, offset), slope), "x", target)
    if isinstance(phi, InverseFunction):
        return restrict(phi.phi, target)
    return InverseFunction(phi)


def apply_coordinate_change(s: QuadraticSode, phi) -> QuadraticSode:
    """New coordinate xbar = phi(x): A -> A, b -> J b, gamma -> (gamma - J'/J)/J.

    The new coefficients are functions of xbar, obtained by composing with
    phi^-1, on the increasingly oriented image phi(domain).
    """
    phi = as_function(phi, s.domain, s.params)
    monotone_direction(phi, s.domain)
    if is_affine(phi) and float(phi.derivative().unchecked(0.0)) == 1.0 and float(phi.unchecked(0.0)) == 0.0:
        return s
    J = phi.derivative()
    g_new = (s.gamma - J.derivative() / J) / J
    b_new = J * s.b
    inv = function_inverse(phi, s.domain)
    dom = inv.domain
    return QuadraticSode(
        compose_fn(g_new, inv, dom),
        compose_fn(s.A, inv, dom),
        compose_fn(b_new, inv, dom),
        dom,
    )


# --- the group -----------------------------------------------------------

class GenSundman:
    """A generalised Sundman transformation y = phi(x), dtau = h(x) dt."""

    def __init__(self, h, phi, domain: Interval, params=None, validate: bool = True):
        lo, hi = float(domain[0]), float(domain[1])
        if not lo < hi:
            raise ValueError(f"domain must satisfy lo < hi, got {domain}")
        self.domain = (lo, hi)
        self.h = as_function(h, self.domain, params)
        self.phi = as_function(phi, self.domain, params)
        if validate:
            _check_positive(self.h, self.domain)
            self.direction = monotone_direction(self.phi, self.domain)
        else:
            self.direction = 1 if float(self.phi.derivative()(0.5 * (lo + hi))) > 0 else -1

    @property
    def dtau_per_dt(self) -> Fn:
        return self.h

    @classmethod
    def identity(cls, domain: Interval) -> "GenSundman":
        return cls(constant(1.0, domain=domain), identity(domain), domain)

    @classmethod
    def pure_sundman(cls, h, domain: Interval, params=None) -> "GenSundman":
        return cls(h, identity(domain), domain, params)

    @classmethod
    def coordinate(cls, phi, domain: Interval, params=None) -> "GenSundman":
        return cls(constant(1.0, domain=domain), phi, domain, params)

    @property
    def target_domain(self) -> Interval:
        return image(self.phi, self.domain)

    def map_state(self, x, v):
        """(x, v) -> (phi(x), phi'(x) v / h(x))."""
        return self.phi(x), self.phi.derivative()(x) * v / self.h(x)

    def apply(self, s: QuadraticSode) -> QuadraticSode:
        return apply_transform(s, self)

    def sample(self, n: int = 16) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        xs = grid(self.domain, n)
        ones = np.ones_like(xs)
        return xs, np.asarray(self.h(xs), dtype=float) * ones, np.asarray(self.phi(xs), dtype=float) * ones

    def describe(self) -> str:
        return f"(h = {self.h.describe()}, phi = {self.phi.describe()}) on {self.domain}"

    def __repr__(self):
        return f"GenSundman{self.describe()}"


def apply_transform(s: QuadraticSode, t: GenSundman) -> QuadraticSode:
    """Coefficients of ``s`` after the time change h and then y = phi(x)."""
    dom = intersect(s.domain, t.domain)
    if dom != s.domain:
        s = QuadraticSode(s.gamma, s.A, s.b, dom)
    return apply_coordinate_change(apply_pure_sundman(s, t.h), t.phi)


def map_state(t: GenSundman, x, v):
    return t.map_state(x, v)


def _preimage(t: GenSundman, target: Interval) -> Interval:
    ends = []
    for y in target:
        ends.append(invert_monotone(t.phi.unchecked, y, t.domain, 1e-15, t.phi.derivative().unchecked, check=False))
    return (min(ends), max(ends))


def compose(t2: GenSundman, t1: GenSundman) -> GenSundman:
    """The product t2 * t1 = ((h2 o phi1) h1, phi2 o phi1); t1 acts first.

    When phi1 maps part of t1's domain outside t2's domain, the result lives
    on the largest sub-interval where the product is defined.
    """
    rng = t1.target_domain
    try:
        overlap = intersect(rng, t2.domain)
    except DomainError:
        raise ValueError(f"domain mismatch: phi1 maps onto {rng}, disjoint from {t2.domain}") from None
    dom = t1.domain if overlap == rng else _preimage(t1, overlap)
    h = compose_fn(t2.h, t1.phi, dom) * t1.h
    phi = compose_fn(t2.phi, t1.phi, dom)
    return GenSundman(restrict(h, dom), restrict(phi, dom), dom)


def inverse(t: GenSundman) -> GenSundman:
    """((1/h) o phi^-1, phi^-1) on phi(domain)."""
    inv = function_inverse(t.phi, t.domain)
    dom = inv.domain
    return GenSundman(compose_fn(1.0 / t.h, inv, dom), inv, dom)


COORDINATE_FIRST = "coordinate_first"
SUNDMAN_FIRST = "sundman_first"


def factorize(t: GenSundman, order: str = COORDINATE_FIRST) -> tuple[GenSundman, GenSundman, str]:
    """Split ``t`` into a pure coordinate part and a pure Sundman part.

    ``coordinate_first``: t = (1, phi) * (h, id), the Sundman part acting first.
    ``sundman_first``: t = (h o phi^-1, id) * (1, phi), the coordinate change
    acting first and the Sundman part living on phi(domain).
    Returns ``(coordinate_part, sundman_part, order)``.
    """
    if order == COORDINATE_FIRST:
        return GenSundman.coordinate(t.phi, t.domain), GenSundman.pure_sundman(t.h, t.domain), order
    if order == SUNDMAN_FIRST:
        inv = function_inverse(t.phi, t.domain)
        dom = inv.domain
        return (
            GenSundman.coordinate(t.phi, t.domain),
            GenSundman.pure_sundman(compose_fn(t.h, inv, dom), dom),
            order,
        )
    raise ValueError(f"unknown factorization order {order!r}")


def product(coordinate_part: GenSundman, sundman_part: GenSundman, order: str) -> GenSundman:
    """Reassemble the output of :func:`factorize`."""
    if order == COORDINATE_FIRST:
        return compose(coordinate_part, sundman_part)
    return compose(sundman_part, coordinate_part)


def max_relative_gap(a: np.ndarray, b: np.ndarray) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))))


def sign_changes(values: np.ndarray) -> list[int]:
    """Indices i where values[i] and values[i + 1] differ in sign."""
    s = np.sign(values)
    return [i for i in range(len(s) - 1) if s[i] != s[i + 1]]
