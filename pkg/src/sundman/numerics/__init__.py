"""Quadrature, antiderivatives, monotone inversion, IVP integration, fitting."""

from .antiderivative import CallableFn, NumericFunction, antiderivative
from .fitting import DegenerateFitError, fit_affine, fit_polynomial
from .ivp import IntegrationError, Trajectory, solve_ivp, write_csv
from .quadrature import QuadratureError, gk15, quad, quad_with_error
from .roots import (
    BracketError,
    InverseFunction,
    NonMonotoneError,
    check_monotone,
    inverse,
    invert_monotone,
)

__all__ = [
    "BracketError",
    "CallableFn",
    "DegenerateFitError",
    "IntegrationError",
    "InverseFunction",
    "NonMonotoneError",
    "NumericFunction",
    "QuadratureError",
    "Trajectory",
    "antiderivative",
    "check_monotone",
    "fit_affine",
    "fit_polynomial",
    "gk15",
    "inverse",
    "invert_monotone",
    "quad",
    "quad_with_error",
    "solve_ivp",
    "write_csv",
]
