"""End-to-end checks of transformations against integrated solutions."""

from .correspondence import (
    CorrespondenceReport,
    second_derivative_residual,
    tau_along,
    verify_field_transform,
    verify_linearisation,
)
from .linear_target import LinearTarget, solve_linear_target

__all__ = [
    "CorrespondenceReport",
    "LinearTarget",
    "second_derivative_residual",
    "solve_linear_target",
    "tau_along",
    "verify_field_transform",
    "verify_linearisation",
]
