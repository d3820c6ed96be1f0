"""Least-squares polynomial fits with a max-residual report."""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np


class DegenerateFitError(ValueError):
    pass


def fit_polynomial(xs: Sequence[float], ys: Sequence[float], degree: int) -> tuple[np.ndarray, float]:
    """Coefficients (highest power first) and max absolute residual."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("xs and ys must be 1-d and of equal length")
    if len(x) < degree + 2:
        raise DegenerateFitError(f"need at least {degree + 2} samples for a degree-{degree} fit")
    if np.ptp(x) < 1e-12:
        raise DegenerateFitError("sample abscissae have no spread")
    # centre and scale for conditioning, then map the coefficients back
    c, s = 0.5 * (x.max() + x.min()), 0.5 * np.ptp(x)
    u = (x - c) / s
    V = np.vander(u, degree + 1)
    coef_u, *_ = np.linalg.lstsq(V, y, rcond=None)
    poly = np.poly1d(coef_u)(np.poly1d([1.0 / s, -c / s]))
    coef = np.zeros(degree + 1)
    coef[degree + 1 - len(poly.coeffs):] = poly.coeffs
    residual = float(np.max(np.abs(y - V @ coef_u)))
    return coef, residual


def fit_affine(samples: Iterable[tuple[float, float]]) -> tuple[float, float, float]:
    """``fit_affine([(0, 1), (1, 3), (2, 5)]) == (2.0, 1.0, 0.0)`` up to rounding."""
    pts = np.asarray(list(samples), dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("samples must be (x, y) pairs")
    if len(pts) < 3:
        raise DegenerateFitError("need at least 3 samples")
    (slope, intercept), residual = fit_polynomial(pts[:, 0], pts[:, 1], 1)
    return float(slope), float(intercept), residual
