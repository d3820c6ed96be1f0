"""JSON documents in and out of the scalar engine.

An equation document is either the coefficient form
``{"gamma": ..., "A": ..., "b": ..., "domain": [lo, hi], "params": {...}}``
or the right-hand-side form ``{"X": "...", "domain": ..., "params": ...}``
for ``x'' = X(x, v)``, which goes through the quadratic-form test first.
"""

from __future__ import annotations

import json
import math
from typing import Mapping

import numpy as np

from ..exprcore.evaluate import DomainError
from ..exprcore.functions import Fn, closed_form, grid
from ..exprcore.parser import ParseError
from .linearize import SUCCESS, NotLinearisable, Outcome
from .sode import NotQuadratic, QuadraticSode, normalize
from .transforms import GenSundman

KNOTS = 256
INTERPOLATION = "cubic-hermite"
COEFFICIENT_KEYS = ("gamma", "A", "b")
OPTIONAL_KEYS = ("params", "name", "description")


class DocumentError(ValueError):
    """The input document is malformed or cannot be evaluated."""


def read_document(source) -> dict:
    """A mapping, a JSON string, or a path to a JSON file."""
    if isinstance(source, Mapping):
        return dict(source)
    text = str(source)
    if not text.lstrip().startswith("{"):
        try:
            with open(text, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise DocumentError(f"cannot read {source}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise DocumentError("the document must be a JSON object")
    return doc


def _domain(doc: Mapping) -> tuple[float, float]:
    dom = doc.get("domain")
    if not isinstance(dom, (list, tuple)) or len(dom) != 2:
        raise DocumentError("'domain' must be a pair [lo, hi]")
    try:
        lo, hi = float(dom[0]), float(dom[1])
    except (TypeError, ValueError) as exc:
        raise DocumentError(f"domain bounds must be numbers: {dom}") from exc
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise DocumentError(f"domain must be a bounded interval with lo < hi: {dom}")
    return lo, hi


def document_params(doc: Mapping, overrides: Mapping[str, float] | None = None) -> dict[str, float]:
    params = doc.get("params") or {}
    if not isinstance(params, Mapping):
        raise DocumentError("'params' must be an object of name: number")
    out = {}
    for k, v in {**params, **(overrides or {})}.items():
        try:
            out[str(k)] = float(v)
        except (TypeError, ValueError) as exc:
            raise DocumentError(f"parameter {k!r} is not a number: {v!r}") from exc
    return out


def sode_from_document(
    source,
    params: Mapping[str, float] | None = None,
    velocity_box: float = 2.0,
) -> QuadraticSode | NotQuadratic:
    """Build the equation a document describes; ``params`` override the
    document's own parameter values."""
    doc = read_document(source)
    has_coeffs = any(k in doc for k in COEFFICIENT_KEYS)
    if has_coeffs == ("X" in doc):
        raise DocumentError("give either 'gamma', 'A', 'b' or a right-hand side 'X'")
    allowed = set(OPTIONAL_KEYS) | {"domain"} | (set(COEFFICIENT_KEYS) if has_coeffs else {"X"})
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise DocumentError(f"unknown keys {unknown}")
    domain = _domain(doc)
    values = document_params(doc, params)
    try:
        if has_coeffs:
            missing = [k for k in COEFFICIENT_KEYS if k not in doc]
            if missing:
                raise DocumentError(f"missing coefficients {missing}")
            return QuadraticSode(*(doc[k] for k in COEFFICIENT_KEYS), domain, values)
        return normalize(str(doc["X"]), domain, values, velocity_box=velocity_box)
    except (ParseError, DomainError) as exc:
        raise DocumentError(str(exc)) from exc
    except ValueError as exc:
        if isinstance(exc, DocumentError):
            raise
        raise DocumentError(str(exc)) from exc


def sode_to_document(s: QuadraticSode) -> dict:
    doc = {k: fn.describe() for k, fn in s.coefficients().items()}
    doc["domain"] = list(s.domain)
    if s.params:
        doc["params"] = dict(s.params)
    return doc


# --- outcomes ----------------------------------------------------------------

def knot_table(fn: Fn, domain: tuple[float, float], n: int = KNOTS) -> dict:
    """Values and slopes at ``n`` knots, enough for piecewise cubic Hermite
    reconstruction.  Endpoints are used when both are finite there."""
    table = getattr(fn, "knot_table", None)
    if table is not None and tuple(fn.domain) == tuple(domain):
        out = table()
    else:
        d = fn.derivative()
        xs = np.linspace(domain[0], domain[1], n)
        with np.errstate(all="ignore"):
            vals = np.asarray(fn.unchecked(xs), dtype=float) * np.ones_like(xs)
            slopes = np.asarray(d.unchecked(xs), dtype=float) * np.ones_like(xs)
        if not (np.all(np.isfinite(vals)) and np.all(np.isfinite(slopes))):
            xs = grid(domain, n)
            vals = np.asarray(fn(xs), dtype=float) * np.ones_like(xs)
            slopes = np.asarray(d(xs), dtype=float) * np.ones_like(xs)
        out = {"x": xs.tolist(), "value": vals.tolist(), "derivative": slopes.tolist()}
    out["interpolation"] = INTERPOLATION
    return out


def function_record(fn: Fn, domain: tuple[float, float], knots: bool = True) -> dict:
    """Closed-form expression when there is one, else a knot table (omitted
    when ``knots`` is false)."""
    expr = closed_form(fn)
    if expr is not None:
        return {"form": "closed", "expression": expr, "description": fn.describe()}
    out = {"form": "numeric", "description": fn.describe()}
    if knots:
        out["knots"] = knot_table(fn, domain)
    return out


def transform_to_dict(t: GenSundman, knots: bool = True) -> dict:
    return {
        "domain": list(t.domain),
        "time_convention": "dtau = h(x) dt",
        "h_dtau_per_dt": function_record(t.h, t.domain, knots),
        "phi": function_record(t.phi, t.domain, knots),
    }


def outcome_to_dict(outcome: Outcome | NotQuadratic, knots: bool = True) -> dict:
    if isinstance(outcome, NotQuadratic):
        out = {"case": "NotQuadratic", "linearisable": False, "reason": outcome.reason}
        if math.isfinite(outcome.third_derivative_max):
            out["third_derivative_max"] = outcome.third_derivative_max
        return out
    out: dict = {"case": outcome.case, "linearisable": isinstance(outcome, SUCCESS)}
    if isinstance(outcome, NotLinearisable):
        out["q_residual"] = outcome.q_residual
        out["q_samples"] = [list(p) for p in outcome.sample_points]
    else:
        alpha, B, C = outcome.target()
        out.update({"alpha": alpha, "B": B, "C": C})
        out["transform"] = transform_to_dict(outcome.transform, knots)
        out["normalization"] = outcome.normalization.to_dict()
        if hasattr(outcome, "affine_residual"):
            out["affine_residual"] = outcome.affine_residual
    if outcome.q is not None:
        out["q_diagnostics"] = outcome.q.to_dict()
    return out


def pieces_to_dict(pieces, knots: bool = True) -> dict:
    """Summary of a piecewise linearisation: linearisable only if every piece is."""
    items = [{"subdomain": list(dom), **outcome_to_dict(o, knots)} for dom, o in pieces]
    return {
        "case": "Piecewise",
        "linearisable": all(p["linearisable"] for p in items),
        "pieces": items,
    }


__all__ = [
    "DocumentError",
    "INTERPOLATION",
    "function_record",
    "knot_table",
    "outcome_to_dict",
    "pieces_to_dict",
    "read_document",
    "sode_from_document",
    "sode_to_document",
    "transform_to_dict",
]
