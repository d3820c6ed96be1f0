"""Decide Sundman linearisability and synthesize the transformation.

Three cases, by the vanishing of A and b:

* A = 0, b = 0: y = x, dtau = exp(-G) dt gives y'' = 0;
* A = 0, b != 0: y = int b exp(2G), dtau = |b| exp(G) dt gives y'' + 1 = 0;
* A != 0 and Q = 0: y = int A exp(G), dtau = |A| dt gives
  y'' + alpha y' + B y + C = 0 with alpha = sign A,

where G is an antiderivative of gamma.  Antiderivatives vanish at the base
point and h carries no extra constant factor; both choices are recorded.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from ..config import RunConfig
from ..exprcore.functions import Fn, Interval, ScalarFunction, grid, identity
from ..exprcore.nodes import Const, Mul, Sub, Var
from ..numerics.antiderivative import antiderivative
from ..numerics.fitting import fit_affine
from .sode import QuadraticSode
from .transforms import GenSundman, q_samples


class SignChangeError(ValueError):
    """A coefficient that must keep one sign changes sign (or vanishes)."""

    def __init__(self, what: str, subinterval: Interval):
        self.what = what
        self.subinterval = subinterval
        super().__init__(
            f"{what} changes sign in the subinterval ({subinterval[0]:.12g}, {subinterval[1]:.12g}); "
            "restrict the domain or enable auto_split"
        )


class DiagnosticsError(RuntimeError):
    """The Q test and the affine test of b2 disagree."""


@dataclass(frozen=True)
class Normalization:
    base_point: float
    K: float = 1.0

    def to_dict(self) -> dict:
        return {"base_point": self.base_point, "K": self.K, "phi_at_base_point": 0.0}


@dataclass(frozen=True)
class QDiagnostics:
    max_abs: float
    scale: float
    samples: tuple[tuple[float, float], ...]

    @property
    def residual(self) -> float:
        return self.max_abs / self.scale

    def to_dict(self) -> dict:
        return {
            "max_abs": self.max_abs,
            "scale": self.scale,
            "residual": self.residual,
            "samples": [list(p) for p in self.samples],
        }


@dataclass(frozen=True)
class FreeParticle:
    transform: GenSundman
    normalization: Normalization
    q: QDiagnostics | None = None
    case = "FreeParticle"

    def target(self) -> tuple[float, float, float]:
        return (0.0, 0.0, 0.0)


@dataclass(frozen=True)
class UnitForcing:
    transform: GenSundman
    normalization: Normalization
    q: QDiagnostics | None = None
    case = "UnitForcing"

    def target(self) -> tuple[float, float, float]:
        return (0.0, 0.0, 1.0)


@dataclass(frozen=True)
class Linear:
    transform: GenSundman
    alpha: float
    B: float
    C: float
    normalization: Normalization
    q: QDiagnostics | None = None
    affine_residual: float = 0.0
    case = "Linear"

    def target(self) -> tuple[float, float, float]:
        return (self.alpha, self.B, self.C)


@dataclass(frozen=True)
class NotLinearisable:
    q_residual: float
    sample_points: tuple[tuple[float, float], ...]
    q: QDiagnostics | None = None
    case = "NotLinearisable"


Outcome = Union[FreeParticle, UnitForcing, Linear, NotLinearisable]
SUCCESS = (FreeParticle, UnitForcing, Linear)


def constant_sign(fn: Fn, domain: Interval, n: int, what: str) -> int:
    xs = grid(domain, n)
    vals = np.asarray(fn(xs), dtype=float) * np.ones_like(xs)
    s = np.sign(vals)
    if np.all(s > 0):
        return 1
    if np.all(s < 0):
        return -1
    # first sample that is zero or disagrees with its predecessor
    bad = np.flatnonzero((s == 0) | (np.concatenate([[s[0]], s[:-1]]) != s))
    i = int(bad[0])
    lo = xs[i - 1] if i > 0 else domain[0]
    hi = xs[i + 1] if s[i] == 0 and i + 1 < len(xs) else xs[i]
    raise SignChangeError(f"{what} = {fn.describe()}", (float(lo), float(hi)))


def gamma_integral(gamma: Fn, x0: float, domain: Interval, tol: float) -> Fn:
    """Antiderivative of gamma vanishing at x0, symbolic when gamma is constant."""
    if isinstance(gamma, ScalarFunction) and gamma.is_constant():
        c = float(gamma.unchecked(x0))
        if c == 0.0:
            return ScalarFunction(Const(0.0), "x", domain)
        return ScalarFunction(Mul(Const(c), Sub(Var("x"), Const(x0))), "x", domain)
    return antiderivative(gamma, x0, domain, tol)


def _integral(f: Fn, x0: float, domain: Interval, tol: float) -> Fn:
    if isinstance(f, ScalarFunction) and f.is_constant():
        c = float(f.unchecked(x0))
        return ScalarFunction(Mul(Const(c), Sub(Var("x"), Const(x0))), "x", domain)
    return antiderivative(f, x0, domain, tol)


def _is_zero(fn: Fn, xs: np.ndarray, tol: float, scale: float) -> bool:
    return float(np.max(np.abs(fn(xs)))) <= tol * scale


def _q_diagnostics(s: QuadraticSode, n: int) -> QDiagnostics:
    xs, q, scale = q_samples(s, n)
    return QDiagnostics(float(np.max(np.abs(q))), scale, tuple(zip(xs.tolist(), q.tolist())))


def linearize(s: QuadraticSode, config: RunConfig | None = None) -> Outcome:
    config = config or RunConfig()
    dom = s.domain
    n = config.grid_n
    xs = grid(dom, n)
    x0 = config.base_point if config.base_point is not None else 0.5 * (dom[0] + dom[1])
    if not dom[0] <= x0 <= dom[1]:
        raise ValueError(f"base point {x0} outside the domain {dom}")
    norm = Normalization(float(x0))
    scale = max(1.0, *(float(np.max(np.abs(f(xs)))) for f in (s.gamma, s.A, s.b)))
    tol = config.quad_tol

    if _is_zero(s.A, xs, config.zero_tol, scale):
        G = gamma_integral(s.gamma, x0, dom, tol)
        if _is_zero(s.b, xs, config.zero_tol, scale):
            t = GenSundman((-G).exp(), identity(dom), dom)
            return FreeParticle(t, norm)
        beta = constant_sign(s.b, dom, n, "b")
        phi = _integral(s.b * (2.0 * G).exp(), x0, dom, tol)
        h = beta * s.b * G.exp()
        return UnitForcing(GenSundman(h, phi, dom), norm)

    alpha = constant_sign(s.A, dom, n, "A")
    diag = _q_diagnostics(s, n)
    if diag.residual > config.q_tol:
        return NotLinearisable(diag.residual, diag.samples, diag)

    G = gamma_integral(s.gamma, x0, dom, tol)
    eG = G.exp()
    phi = _integral(s.A * eG, x0, dom, tol)
    h = alpha * s.A
    t = GenSundman(h, phi, dom)
    # b2 = J b / h^2 with J = A exp(G), h = |A|
    b2 = np.asarray((s.b * eG / s.A)(xs), dtype=float) * np.ones_like(xs)
    x2 = np.asarray(phi(xs), dtype=float) * np.ones_like(xs)
    B, C, residual = fit_affine(zip(x2, b2))
    if residual > config.affine_tol * max(1.0, float(np.max(np.abs(b2)))):
        raise DiagnosticsError(
            f"Q vanishes to {diag.residual:.3g} but b2 is not affine in y "
            f"(fit residual {residual:.3g}); tighten q_tol or check the domain"
        )
    return Linear(t, float(alpha), float(B), float(C), norm, diag, residual)


def linearize_pieces(s: QuadraticSode, config: RunConfig | None = None) -> list[tuple[Interval, Outcome]]:
    """Linearise on each maximal interval where the relevant sign is constant."""
    config = config or RunConfig()
    xs = grid(s.domain, config.grid_n)
    scale = max(1.0, *(float(np.max(np.abs(f(xs)))) for f in (s.gamma, s.A, s.b)))
    if _is_zero(s.A, xs, config.zero_tol, scale):
        key = None if _is_zero(s.b, xs, config.zero_tol, scale) else s.b
    else:
        key = s.A
    cuts = [] if key is None else _sign_roots(key, s.domain, xs)
    base = config.base_point if config.base_point is not None else 0.5 * (s.domain[0] + s.domain[1])
    config = config.with_(base_point=base)
    edges = [s.domain[0], *cuts, s.domain[1]]
    out = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        piece = QuadraticSode(s.gamma, s.A, s.b, (lo, hi))
        # keep one base point for every piece when it lies on the piece's
        # closure, so the normalizations agree across the cut
        cfg = config if lo <= base <= hi else config.with_(base_point=0.5 * (lo + hi))
        out.append(((lo, hi), linearize(piece, cfg)))
    return out


def _sign_roots(fn: Fn, domain: Interval, xs: np.ndarray) -> list[float]:
    vals = np.sign(np.asarray(fn(xs), dtype=float) * np.ones_like(xs))
    roots = []
    for i in range(len(xs) - 1):
        if vals[i] != vals[i + 1]:
            a, b = float(xs[i]), float(xs[i + 1])
            sa = vals[i]
            for _ in range(100):
                m = 0.5 * (a + b)
                sm = np.sign(float(fn(m)))
                if sm == 0:
                    a = b = m
                    break
                if sm == sa:
                    a = m
                else:
                    b = m
            r = 0.5 * (a + b)
            if not roots or r - roots[-1] > 1e-12 * (domain[1] - domain[0]):
                roots.append(r)
    return roots


__all__ = [
    "DiagnosticsError",
    "FreeParticle",
    "Linear",
    "Normalization",
    "NotLinearisable",
    "Outcome",
    "QDiagnostics",
    "SUCCESS",
    "SignChangeError",
    "UnitForcing",
    "constant_sign",
    "gamma_integral",
    "linearize",
    "linearize_pieces",
]
