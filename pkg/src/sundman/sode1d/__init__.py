"""Quadratic normal form, the Q invariant, the generalised Sundman group and
the three-case linearisation of scalar second-order equations."""

from .io import (
    DocumentError,
    outcome_to_dict,
    pieces_to_dict,
    read_document,
    sode_from_document,
    sode_to_document,
    transform_to_dict,
)
from .linearize import (
    SUCCESS,
    DiagnosticsError,
    FreeParticle,
    Linear,
    Normalization,
    NotLinearisable,
    QDiagnostics,
    SignChangeError,
    UnitForcing,
    linearize,
    linearize_pieces,
)
from .sode import NotQuadratic, QuadraticSode, normalize
from .transforms import (
    COORDINATE_FIRST,
    SUNDMAN_FIRST,
    GenSundman,
    apply_coordinate_change,
    apply_pure_sundman,
    apply_transform,
    compose,
    factorize,
    function_inverse,
    inverse,
    map_state,
    p_function,
    product,
    q_invariant,
    q_samples,
)

__all__ = [
    "DocumentError",
    "outcome_to_dict",
    "pieces_to_dict",
    "read_document",
    "sode_from_document",
    "sode_to_document",
    "transform_to_dict",
    "COORDINATE_FIRST",
    "SUCCESS",
    "SUNDMAN_FIRST",
    "DiagnosticsError",
    "FreeParticle",
    "GenSundman",
    "Linear",
    "Normalization",
    "NotLinearisable",
    "NotQuadratic",
    "QDiagnostics",
    "QuadraticSode",
    "SignChangeError",
    "UnitForcing",
    "apply_coordinate_change",
    "apply_pure_sundman",
    "apply_transform",
    "compose",
    "factorize",
    "function_inverse",
    "inverse",
    "linearize",
    "linearize_pieces",
    "map_state",
    "normalize",
    "p_function",
    "product",
    "q_invariant",
    "q_samples",
]
