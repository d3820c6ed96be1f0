"""Linearity tests for second-order fields and the Hamel symbols of the
quasi-velocity frame Y_i = f^-1 d/dx^i.

The tests are the homogeneity identities

* linear:           sum_j (x^j dX/dx^j + v^j dX/dv^j) - X = 0,
* fibre-linear:     sum_k v^k dX/dv^k - X = 0,
* inhomogeneous:    X - sum_j (x^j dX/dx^j + v^j dX/dv^j) is constant,

each built symbolically and sampled on the field's probe grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..exprcore import calculus
from ..exprcore.nodes import Const, Expr, Var, to_string
from .field import BasicFunction, SodeField

HOMOGENEITY_TOL = 1e-9
FIT_TOL = 1e-8


def _scale(values: np.ndarray) -> float:
    return max(1.0, float(np.max(np.abs(values))))


def euler_operator(field_: SodeField, X: Expr, include_positions: bool = True) -> Expr:
    """sum_j x^j dX/dx^j + v^j dX/dv^j (positions optional)."""
    out: Expr = Const(0.0)
    names = list(field_.vnames)
    if include_positions:
        names = list(field_.xnames) + names
    for name in names:
        out = calculus.add(out, calculus.mul(Var(name), calculus.differentiate(X, name)))
    return calculus.simplify(out)


@dataclass(frozen=True)
class LinearCertificate:
    holds: bool
    A: np.ndarray | None = None
    B: np.ndarray | None = None
    homogeneity_residual: float = 0.0
    fit_residual: float = float("nan")
    reason: str = ""

    def __bool__(self) -> bool:
        return self.holds


@dataclass(frozen=True)
class FibreLinearCertificate:
    holds: bool
    matrix: tuple[tuple[Expr, ...], ...] | None = None
    homogeneity_residual: float = 0.0
    reason: str = ""

    def __bool__(self) -> bool:
        return self.holds

    def matrix_strings(self) -> list[list[str]] | None:
        if self.matrix is None:
            return None
        return [[to_string(e) for e in row] for row in self.matrix]


@dataclass(frozen=True)
class InhomogeneousCertificate:
    holds: bool
    A: np.ndarray | None = None
    B: np.ndarray | None = None
    C: np.ndarray | None = None
    constant_residual: float = 0.0
    fit_residual: float = float("nan")
    reason: str = ""

    def __bool__(self) -> bool:
        return self.holds


def _fit_linear(field_: SodeField, X: np.ndarray, V: np.ndarray, values: np.ndarray):
    design = np.hstack([X, V])
    coef, *_ = np.linalg.lstsq(design, values, rcond=None)
    residual = float(np.max(np.abs(design @ coef - values)))
    n = field_.n
    return coef[:n].T.copy(), coef[n:].T.copy(), residual


def check_linear(field_: SodeField, tol: float = HOMOGENEITY_TOL, fit_tol: float = FIT_TOL) -> LinearCertificate:
    """X^i = A^i_j x^j + B^i_j v^j for constant matrices A, B?"""
    X, V = field_.probe_points()
    values = field_.evaluate(X, V)
    scale = _scale(values)
    worst = 0.0
    for Xi in field_.components:
        defect = calculus.sub(euler_operator(field_, Xi), Xi)
        worst = max(worst, float(np.max(np.abs(field_.evaluate_expr(defect, X, V)))))
    if worst > tol * scale:
        return LinearCertificate(False, homogeneity_residual=worst, reason="components are not homogeneous of degree one")
    A, B, residual = _fit_linear(field_, X, V, values)
    if residual > fit_tol * scale:
        return LinearCertificate(False, homogeneity_residual=worst, fit_residual=residual,
                                 reason="homogeneous of degree one but not linear")
    return LinearCertificate(True, A, B, worst, residual)


def check_fibre_linear(field_: SodeField, tol: float = HOMOGENEITY_TOL) -> FibreLinearCertificate:
    """X^i = A^i_j(x) v^j?  The certificate is the matrix dX^i/dv^j."""
    X, V = field_.probe_points()
    scale = _scale(field_.evaluate(X, V))
    worst = 0.0
    for Xi in field_.components:
        defect = calculus.sub(euler_operator(field_, Xi, include_positions=False), Xi)
        worst = max(worst, float(np.max(np.abs(field_.evaluate_expr(defect, X, V)))))
    if worst > tol * scale:
        return FibreLinearCertificate(False, homogeneity_residual=worst,
                                      reason="components are not homogeneous of degree one in the velocities")
    matrix = tuple(
        tuple(calculus.simplify(calculus.differentiate(Xi, vn)) for vn in field_.vnames)
        for Xi in field_.components
    )
    return FibreLinearCertificate(True, matrix, worst)


def check_inhomogeneous_linear(
    field_: SodeField, tol: float = HOMOGENEITY_TOL, fit_tol: float = FIT_TOL
) -> InhomogeneousCertificate:
    """X^i = A^i_j x^j + B^i_j v^j + C^i with constant A, B, C?"""
    X, V = field_.probe_points()
    values = field_.evaluate(X, V)
    scale = _scale(values)
    C = np.zeros(field_.n)
    spread = 0.0
    for i, Xi in enumerate(field_.components):
        Ci = calculus.sub(Xi, euler_operator(field_, Xi))
        vals = field_.evaluate_expr(Ci, X, V)
        spread = max(spread, float(np.ptp(vals)))
        C[i] = float(np.mean(vals))
    if spread > tol * scale:
        return InhomogeneousCertificate(False, constant_residual=spread,
                                        reason="X - (Euler operator)X is not constant")
    A, B, residual = _fit_linear(field_, X, V, values - C)
    if residual > fit_tol * scale:
        return InhomogeneousCertificate(False, constant_residual=spread, fit_residual=residual,
                                        reason="affine part is homogeneous but not linear")
    return InhomogeneousCertificate(True, A, B, C, spread, residual)


def hamel_symbol(f: BasicFunction, i: int, j: int, k: int) -> Expr:
    """gamma^k_ij = f^-2 (d_j f delta^k_i - d_i f delta^k_j), indices from 1."""
    n = f.n
    for idx in (i, j, k):
        if not 1 <= idx <= n:
            raise IndexError(f"index {idx} outside 1..{n}")
    if i == j:
        return Const(0.0)
    grad = f.gradient()
    term: Expr = Const(0.0)
    if k == i:
        term = calculus.add(term, grad[j - 1])
    if k == j:
        term = calculus.sub(term, grad[i - 1])
    return calculus.simplify(calculus.div(term, calculus.mul(f.expr, f.expr)))


def hamel_symbols(f: BasicFunction) -> list[list[list[Expr]]]:
    """Nested list indexed [k-1][i-1][j-1]."""
    n = f.n
    return [[[hamel_symbol(f, i, j, k) for j in range(1, n + 1)] for i in range(1, n + 1)] for k in range(1, n + 1)]


def frame_apply(f: BasicFunction, i: int, g: Expr) -> Expr:
    """Y_i g = f^-1 dg/dx^i."""
    return calculus.simplify(calculus.div(calculus.differentiate(g, f.xnames[i - 1]), f.expr))


def bracket_apply(f: BasicFunction, i: int, j: int, g: Expr) -> Expr:
    """[Y_i, Y_j] g."""
    return calculus.sub(frame_apply(f, i, frame_apply(f, j, g)), frame_apply(f, j, frame_apply(f, i, g)))


__all__ = [
    "FibreLinearCertificate",
    "InhomogeneousCertificate",
    "LinearCertificate",
    "bracket_apply",
    "check_fibre_linear",
    "check_inhomogeneous_linear",
    "check_linear",
    "euler_operator",
    "frame_apply",
    "hamel_symbol",
    "hamel_symbols",
]
