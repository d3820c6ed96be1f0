"""n-dimensional second-order fields: Sundman transforms in quasi-velocities,
linearity detectors, Hamel symbols and energy-level linearisation."""

from .detectors import (
    FibreLinearCertificate,
    InhomogeneousCertificate,
    LinearCertificate,
    bracket_apply,
    check_fibre_linear,
    check_inhomogeneous_linear,
    check_linear,
    frame_apply,
    hamel_symbol,
    hamel_symbols,
)
from .energy import (
    DEFAULT_EXPONENTS,
    EnergyReduction,
    NaturalSystem,
    energy_reduce,
    find_energy_f,
)
from .field import BasicFunction, SodeField, position_names, transform_system, velocity_names

__all__ = [
    "DEFAULT_EXPONENTS",
    "BasicFunction",
    "EnergyReduction",
    "FibreLinearCertificate",
    "InhomogeneousCertificate",
    "LinearCertificate",
    "NaturalSystem",
    "SodeField",
    "bracket_apply",
    "check_fibre_linear",
    "check_inhomogeneous_linear",
    "check_linear",
    "energy_reduce",
    "find_energy_f",
    "frame_apply",
    "hamel_symbol",
    "hamel_symbols",
    "position_names",
    "transform_system",
    "velocity_names",
]
