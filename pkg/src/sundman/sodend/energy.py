"""Linearisation of one-dimensional natural systems on a fixed energy level.

For q'' = -V'(q) and a Sundman function f, the transformed velocity obeys
dvbar/dtau = d/dq [f^2 (E - V)], which is affine in q exactly when
f^2 (E - V) = A q^2 + B q + C.  Then q'' = 2 A q + B in the new time.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from ..exprcore.evaluate import DomainError
from ..exprcore.functions import Interval, ScalarFunction, grid
from ..numerics.fitting import fit_polynomial

DEFAULT_EXPONENTS = (-2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 3.0)
QUADRATIC_TOL = 1e-8
SAMPLES = 64


class NaturalSystem:
    """Potential V(q) on an interval, with an optional energy level E."""

    def __init__(self, potential, domain: Interval, energy: float | None = None, var: str = "q", params=None):
        if isinstance(potential, ScalarFunction):
            self.potential = potential.with_domain(domain)
        else:
            self.potential = ScalarFunction(potential, var, domain, params)
        self.var = self.potential.var
        self.domain = self.potential.domain
        self.energy = None if energy is None else float(energy)
        try:
            self.potential(grid(self.domain, SAMPLES))
        except DomainError as exc:
            raise ValueError(f"potential is not evaluable on {self.domain}: {exc}") from exc

    def force(self) -> ScalarFunction:
        return -self.potential.derivative()

    def with_energy(self, energy: float) -> "NaturalSystem":
        return NaturalSystem(self.potential, self.domain, energy)


@dataclass(frozen=True)
class EnergyReduction:
    """f^2 = a q^2 + b q + c and f^2 V = p2 q^2 + p1 q + p0."""

    f: ScalarFunction
    f2_coeffs: tuple[float, float, float]
    f2v_coeffs: tuple[float, float, float]
    residuals: tuple[float, float]
    energy: float | None = None

    def constants(self, energy: float | None = None) -> tuple[float, float, float]:
        """(A, B, C) at ``energy`` (default: the system's energy)."""
        E = self.energy if energy is None else energy
        if E is None:
            raise ValueError("no energy level given")
        a, b, c = self.f2_coeffs
        p2, p1, p0 = self.f2v_coeffs
        return (a * E - p2, b * E - p1, c * E - p0)

    @property
    def A(self) -> float:
        return self.constants()[0]

    @property
    def B(self) -> float:
        return self.constants()[1]

    @property
    def C(self) -> float:
        return self.constants()[2]

    def target(self, energy: float | None = None) -> tuple[float, float]:
        """(2A, B) of the reduced equation q'' = 2 A q + B."""
        A, B, _ = self.constants(energy)
        return 2.0 * A, B


def _quadratic(xs: np.ndarray, ys: np.ndarray, tol: float) -> tuple[np.ndarray, float] | None:
    coef, residual = fit_polynomial(xs, ys, 2)
    if residual > tol * max(1.0, float(np.max(np.abs(ys)))):
        return None
    return coef, residual


def energy_reduce(
    system: NaturalSystem,
    f,
    per_energy: bool = False,
    tol: float = QUADRATIC_TOL,
    samples: int = SAMPLES,
) -> EnergyReduction | None:
    """Constants A(E), B(E), C(E) when f^2 and f^2 V are both quadratic.

    With ``per_energy`` only f^2 (E - V) at the system's energy is tested,
    and the stored coefficients reproduce (A, B, C) at that energy only.
    """
    if not isinstance(f, ScalarFunction):
        f = ScalarFunction(f, system.var, system.domain)
    f = f.in_variable(system.var, system.domain)
    xs = grid(system.domain, samples)
    fv = np.asarray(f(xs), dtype=float) * np.ones_like(xs)
    if not (np.all(fv > 0) or np.all(fv < 0)):
        raise ValueError(f"f = {f.describe()} must keep one sign on {system.domain}")
    V = np.asarray(system.potential(xs), dtype=float) * np.ones_like(xs)
    f2 = fv * fv
    if per_energy:
        if system.energy is None:
            raise ValueError("per-energy mode needs an energy level")
        fit = _quadratic(xs, f2 * (system.energy - V), tol)
        if fit is None:
            return None
        (A, B, C), res = fit
        # encode as E-independent constants so that constants(E) returns them
        return EnergyReduction(f, (0.0, 0.0, 0.0), (-A, -B, -C), (res, res), system.energy)
    fit_f = _quadratic(xs, f2, tol)
    fit_v = _quadratic(xs, f2 * V, tol)
    if fit_f is None or fit_v is None:
        return None
    (a, b, c), rf = fit_f
    (p2, p1, p0), rv = fit_v
    return EnergyReduction(f, (float(a), float(b), float(c)), (float(p2), float(p1), float(p0)), (rf, rv), system.energy)


def ordered_exponents(exponents: Iterable[float]) -> list[float]:
    return sorted({float(p) for p in exponents}, key=lambda p: (abs(p), p))


def find_energy_f(
    system: NaturalSystem,
    ansatz: Iterable[float] = DEFAULT_EXPONENTS,
    tol: float = QUADRATIC_TOL,
) -> tuple[float, EnergyReduction] | None:
    """First monomial f = q^p (smallest |p|, then smallest p) that works."""
    exps = ordered_exponents(ansatz)
    if not exps:
        raise ValueError("the ansatz needs at least one exponent")
    for p in exps:
        try:
            f = ScalarFunction(f"{system.var}^{p!r}", system.var, system.domain)
            found = energy_reduce(system, f, tol=tol)
        except (DomainError, ValueError):
            continue
        if found is not None:
            return p, found
    return None
