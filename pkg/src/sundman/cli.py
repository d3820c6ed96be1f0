"""Command-line interface.

Exit codes: 0 when the equation is linearisable (or the verification
passes), 2 when it is not (or the verification fails), 1 on bad input.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .config import CONFIG_ENV, FORMATS, RunConfig
from .exprcore.evaluate import DomainError
from .exprcore.parser import ParseError
from .numerics.ivp import IntegrationError, write_csv
from .numerics.quadrature import QuadratureError
from .numerics.roots import BracketError, NonMonotoneError
from .sode1d import (
    SUCCESS,
    DocumentError,
    NotQuadratic,
    QuadraticSode,
    SignChangeError,
    linearize,
    linearize_pieces,
    outcome_to_dict,
    pieces_to_dict,
    q_samples,
    read_document,
    sode_from_document,
    sode_to_document,
)
from .sode1d.linearize import DiagnosticsError
from .sodend import (
    BasicFunction,
    NaturalSystem,
    SodeField,
    check_fibre_linear,
    check_inhomogeneous_linear,
    check_linear,
    find_energy_f,
    transform_system,
)
from .verify import CorrespondenceReport, solve_linear_target, verify_field_transform, verify_linearisation

EXIT_OK, EXIT_INPUT, EXIT_NEGATIVE = 0, 1, 2
DEMO_COLUMNS = ("t", "x", "tau", "y_mapped", "y_closed_form")
INPUT_ERRORS = (DocumentError, ParseError, DomainError, ValueError, OSError, KeyError, TypeError)
RUN_ERRORS = (IntegrationError, QuadratureError, BracketError, NonMonotoneError, DiagnosticsError, RuntimeError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Bad command lines are input errors (exit 1), not argparse's 2."""

    def error(self, message):
        raise UsageError(f"{message}\n{self.format_usage().rstrip()}")


@dataclass
class Result:
    """What a command produced: a JSON-ready report, an exit code, and an
    optional table for CSV output."""

    report: dict
    code: int
    table: tuple[list[str], np.ndarray] | None = None
    lines: list[str] = field(default_factory=list)


# --- shared helpers ------------------------------------------------------------

def _finite(obj):
    """Replace non-finite floats (not representable in JSON) by None."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, np.generic):
        return _finite(obj.item())
    if isinstance(obj, np.ndarray):
        return _finite(obj.tolist())
    if isinstance(obj, Mapping):
        return {str(k): _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def parse_params(items: Sequence[str] | None) -> dict[str, float]:
    out = {}
    for item in items or ():
        name, sep, value = item.partition("=")
        if not sep or not name.strip():
            raise UsageError(f"--param expects NAME=VALUE, got {item!r}")
        try:
            out[name.strip()] = float(value)
        except ValueError as exc:
            raise UsageError(f"--param {name}: {value!r} is not a number") from exc
    return out


def build_config(args: argparse.Namespace) -> RunConfig:
    try:
        config = RunConfig.load(getattr(args, "config", None))
    except (OSError, ValueError, TypeError) as exc:
        raise UsageError(f"cannot load configuration: {exc}") from exc
    changes = {
        "q_tol": getattr(args, "q_tol", None),
        "ivp_tol": getattr(args, "ivp_tol", None),
        "base_point": getattr(args, "base_point", None),
        "output_format": getattr(args, "format", None),
    }
    if getattr(args, "auto_split", False):
        changes["auto_split"] = True
    try:
        return config.with_(**changes)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _outcome_report(s: QuadraticSode, config: RunConfig, knots: bool):
    """(outcome or pieces, JSON record, linearisable?)."""
    if config.auto_split:
        pieces = linearize_pieces(s, config)
        record = pieces_to_dict(pieces, knots)
        return pieces, record, record["linearisable"]
    outcome = linearize(s, config)
    return outcome, outcome_to_dict(outcome, knots), isinstance(outcome, SUCCESS)


def _q_table(s: QuadraticSode, n: int) -> tuple[list[str], np.ndarray]:
    xs, q, scale = q_samples(s, n)
    return ["x", "Q", "Q_over_scale"], np.column_stack([xs, q, q / scale])


def _load_sode(path: str, params: Mapping[str, float], config: RunConfig):
    return sode_from_document(path, params, velocity_box=config.velocity_box)


# --- commands --------------------------------------------------------------

def cmd_check(document, config: RunConfig, params: Mapping[str, float] | None = None, knots: bool = False) -> Result:
    """Classify an equation and synthesize its transformation."""
    s = _load_sode(document, params or {}, config)
    if isinstance(s, NotQuadratic):
        return Result({"command": "check", "outcome": outcome_to_dict(s)}, EXIT_NEGATIVE)
    try:
        _, record, ok = _outcome_report(s, config, knots)
    except SignChangeError as exc:
        report = {
            "command": "check",
            "equation": sode_to_document(s),
            "outcome": {"case": "SignChange", "linearisable": False, "reason": str(exc),
                        "subinterval": list(exc.subinterval)},
        }
        return Result(report, EXIT_NEGATIVE, _q_table(s, config.grid_n),
                      ["rerun with --auto-split to linearise on each constant-sign piece"])
    report = {"command": "check", "equation": sode_to_document(s), "description": s.describe(), "outcome": record}
    return Result(report, EXIT_OK if ok else EXIT_NEGATIVE, _q_table(s, config.grid_n))


def cmd_linearize(document, config: RunConfig, params: Mapping[str, float] | None = None) -> Result:
    """``check`` with the full transformation, knot tables included."""
    res = cmd_check(document, config, params, knots=True)
    res.report["command"] = "linearize"
    return res


def _pick_piece(pieces, x0: float):
    for dom, outcome in pieces:
        if dom[0] < x0 < dom[1]:
            return dom, outcome
    raise UsageError(f"initial position {x0} lies on a cut between pieces or outside the domain")


def _verify_sode(s: QuadraticSode, config: RunConfig, x0: float, v0: float, T: float,
                 h_scale: float = 1.0, tau_mode: str = "quadrature"):
    """Linearise (piecewise when configured) and verify from (x0, v0)."""
    if config.auto_split:
        dom, outcome = _pick_piece(linearize_pieces(s, config), x0)
        s = QuadraticSode(s.gamma, s.A, s.b, dom, s.params)
    else:
        outcome = linearize(s, config)
    if not isinstance(outcome, SUCCESS):
        return outcome, None
    rep = verify_linearisation(s, outcome, x0, v0, T, tol=config.verify_tol, ivp_tol=config.ivp_tol,
                               tau_mode=tau_mode, h_scale=h_scale)
    return outcome, rep


def _report_dict(rep: CorrespondenceReport, trajectory_dir: str | None, stem: str) -> dict:
    return rep.to_dict(csv_dir=trajectory_dir, stem=stem)


def cmd_verify(
    document,
    config: RunConfig,
    x0: float,
    v0: float,
    T: float,
    params: Mapping[str, float] | None = None,
    h_scale: float = 1.0,
    tau_mode: str = "quadrature",
    trajectory_dir: str | None = None,
) -> Result:
    """Linearise, integrate, and compare with the closed-form target."""
    s = _load_sode(document, params or {}, config)
    if isinstance(s, NotQuadratic):
        return Result({"command": "verify", "outcome": outcome_to_dict(s)}, EXIT_NEGATIVE)
    outcome, rep = _verify_sode(s, config, x0, v0, T, h_scale, tau_mode)
    report = {"command": "verify", "equation": sode_to_document(s), "outcome": outcome_to_dict(outcome, knots=False),
              "initial_state": {"x0": x0, "v0": v0, "T": T}}
    if rep is None:
        return Result(report, EXIT_NEGATIVE)
    if h_scale != 1.0:
        report["injected_h_scale"] = h_scale
    report["report"] = _report_dict(rep, trajectory_dir, "verify")
    names = list(rep.columns)
    return Result(report, EXIT_OK if rep.passed else EXIT_NEGATIVE,
                  (names, np.column_stack([rep.columns[k] for k in names])))


def _certificates(fld: SodeField) -> dict:
    lin = check_linear(fld)
    fib = check_fibre_linear(fld)
    inh = check_inhomogeneous_linear(fld)
    return {
        "linear": {
            "holds": lin.holds, "reason": lin.reason,
            "A": None if lin.A is None else lin.A.tolist(),
            "B": None if lin.B is None else lin.B.tolist(),
            "homogeneity_residual": lin.homogeneity_residual, "fit_residual": lin.fit_residual,
        },
        "fibre_linear": {
            "holds": fib.holds, "reason": fib.reason, "matrix": fib.matrix_strings(),
            "homogeneity_residual": fib.homogeneity_residual,
        },
        "inhomogeneous_linear": {
            "holds": inh.holds, "reason": inh.reason,
            "A": None if inh.A is None else inh.A.tolist(),
            "B": None if inh.B is None else inh.B.tolist(),
            "C": None if inh.C is None else inh.C.tolist(),
            "constant_residual": inh.constant_residual, "fit_residual": inh.fit_residual,
        },
    }


def field_from_document(source, params: Mapping[str, float] | None, velocity_box: float):
    doc = read_document(source)
    unknown = sorted(set(doc) - {"n", "X", "f", "domain", "params", "name", "description"})
    if unknown:
        raise DocumentError(f"unknown keys {unknown}")
    comps = doc.get("X")
    if not isinstance(comps, list) or not comps:
        raise DocumentError("'X' must be a non-empty list of expressions")
    n = int(doc.get("n", len(comps)))
    if n != len(comps):
        raise DocumentError(f"'n' is {n} but 'X' has {len(comps)} components")
    values = {**(doc.get("params") or {}), **(params or {})}
    domain = doc.get("domain")
    if domain is None:
        raise DocumentError("missing 'domain'")
    fld = SodeField(comps, domain, values, velocity_box)
    f = doc.get("f")
    basic = None if f is None else BasicFunction(str(f), fld.domain, n, values)
    return fld, basic


def cmd_field(document, config: RunConfig, params: Mapping[str, float] | None = None) -> Result:
    """Linearity verdicts, and the transformed field when ``f`` is given."""
    fld, f = field_from_document(document, params, config.velocity_box)
    report = {
        "command": "field",
        "n": fld.n,
        "field": fld.strings(),
        "domain": [list(d) for d in fld.domain],
        "verdicts": _certificates(fld),
    }
    if f is not None:
        bar = transform_system(fld, f)
        report["f"] = f.describe()
        report["transformed_field"] = bar.strings()
        report["transformed_verdicts"] = _certificates(bar)
    rows = [[name, float(report["verdicts"][name]["holds"])] for name in ("linear", "fibre_linear", "inhomogeneous_linear")]
    return Result(report, EXIT_OK, (["test", "holds"], rows))


# --- demos ---------------------------------------------------------------------

def _demo_columns(t, x, tau, y_mapped, y_closed, extra: Mapping[str, np.ndarray] | None = None):
    names = list(DEMO_COLUMNS) + list(extra or {})
    cols = [t, x, tau, y_mapped, y_closed, *(extra or {}).values()]
    return names, np.column_stack(cols)


def _sode_demo(name: str, doc: dict, x0: float, v0: float, T: float, config: RunConfig,
               params: Mapping[str, float], summary: str, base_point: float | None = None,
               auto_split: bool = False, trajectory_dir: str | None = None) -> Result:
    if config.base_point is None and base_point is not None:
        config = config.with_(base_point=base_point)
    if auto_split:
        config = config.with_(auto_split=True)
    s = sode_from_document(doc, params, velocity_box=config.velocity_box)
    outcome, rep = _verify_sode(s, config, x0, v0, T)
    report = {
        "command": "demo",
        "demo": name,
        "summary": summary,
        "equation": sode_to_document(s),
        "outcome": outcome_to_dict(outcome, knots=False),
        "initial_state": {"x0": x0, "v0": v0, "T": T},
    }
    if rep is None:
        return Result(report, EXIT_NEGATIVE)
    report["report"] = _report_dict(rep, trajectory_dir, name)
    c = rep.columns
    table = _demo_columns(c["t"], c["x"], c["tau"], c["y_mapped"], c["y_closed_form"])
    report["csv"] = write_csv(*table)
    return Result(report, EXIT_OK if rep.passed else EXIT_NEGATIVE, table, [summary])


def demo_ermakov(config, params, trajectory_dir=None):
    doc = {"gamma": "2/x", "A": "0", "b": "omega^2/x^3", "domain": [0.3, 3.0], "params": {"omega": 1.0}}
    return _sode_demo("ermakov", doc, 1.0, 0.0, 0.8, config, params,
                      "Ermakov-Pinney equation with quadratic damping; unit forcing target, h proportional to omega^2/x",
                      base_point=1.0, trajectory_dir=trajectory_dir)


def demo_sphere(config, params, trajectory_dir=None):
    doc = {"gamma": "-2*cot(x)", "A": "0", "b": "-sin(x)*cos(x)", "domain": [0.3, math.pi - 0.3]}
    return _sode_demo("sphere", doc, 1.0, 0.0, 2.0, config, params,
                      "geodesics of the round sphere; b changes sign at pi/2, so each side is linearised separately",
                      auto_split=True, trajectory_dir=trajectory_dir)


def demo_nap(config, params, trajectory_dir=None):
    doc = {"gamma": "1/x", "A": "x", "b": "1/2", "domain": [0.5, 3.0]}
    return _sode_demo("nap", doc, 1.0, 0.0, 2.0, config, params,
                      "linearisable by a time change but not by a point transformation; target y'' + y' + 1/2 = 0",
                      base_point=1.0, trajectory_dir=trajectory_dir)


def demo_lienard(config, params, trajectory_dir=None):
    values = {"k1": 1.0, "k2": 1.0, **params}
    doc = {"gamma": "0", "A": "x", "b": "k1*x^3/2 + k2*x", "domain": [0.2, 3.0], "params": values}
    res = _sode_demo("lienard", doc, 1.0, 0.0, 2.0, config, {},
                     "Lienard equation with damping f = x and g = k1 f F + k2 f, F = x^2/2", trajectory_dir=trajectory_dir)
    s = QuadraticSode("0", "x", "k1*x^3/2 + k2*x", (0.2, 3.0), values)
    xs, q, scale = q_samples(s, config.grid_n)
    perturbed = QuadraticSode("0", "x", "k1*x^3/2 + k2*x + 0.05", (0.2, 3.0), values)
    _, qp, scale_p = q_samples(perturbed, config.grid_n)
    res.report["q_check"] = {
        "max_abs": float(np.max(np.abs(q))), "scale": scale,
        "vanishes": bool(np.max(np.abs(q)) <= config.q_tol * scale),
        "perturbed_by_0.05_max_abs": float(np.max(np.abs(qp))),
        "perturbed_vanishes": bool(np.max(np.abs(qp)) <= config.q_tol * scale_p),
    }
    return res


def _trajectory_energy(field_values: Mapping[str, float], r0: float, rdot0: float) -> float:
    k, l = field_values["k"], field_values["l"]
    return 0.5 * rdot0**2 + l**2 / (2 * r0**2) - k / r0


def demo_kepler(config, params, trajectory_dir=None):
    values = {"k": 1.0, "l": 1.0, "E": -0.5, **params}
    domain = (0.2, 5.0)
    system = NaturalSystem("l^2/(2*q^2) - k/q", domain, values["E"], params={"k": values["k"], "l": values["l"]})
    found = find_energy_f(system)
    if found is None:
        return Result({"command": "demo", "demo": "kepler", "found": False}, EXIT_NEGATIVE)
    p, reduction = found
    A, B, C = reduction.constants()
    r0, rdot0, T = 1.0, 0.3, 1.0
    # The fixture level E = -0.5 is the bottom of the effective potential
    # (circular orbit); the trajectory checked here carries its own energy.
    E_traj = _trajectory_energy(values, r0, rdot0)
    A_t, B_t, _ = reduction.constants(E_traj)
    fld = SodeField(["l^2/x^3 - k/x^2"], [domain], {"k": values["k"], "l": values["l"]}, config.velocity_box)
    f = BasicFunction(f"x^{p!r}", [domain], 1)
    rep = verify_field_transform(fld, f, [r0], [rdot0], T, tol=1e-5, ivp_tol=config.ivp_tol,
                                 expected_second_derivative=lambda X, V: 2 * A_t * X + B_t)
    target = solve_linear_target(0.0, -2 * A_t, -B_t, r0, f.at([r0]) * rdot0)
    c = rep.columns
    table = _demo_columns(c["t"], c["x"], c["tau"], c["xbar"], target(c["tau"]),
                          {"residual": c["second_derivative_residual"]})
    report = {
        "command": "demo",
        "demo": "kepler",
        "summary": "radial Kepler problem; f = r turns it into d2r/dtau2 = 2 E r + k on every energy level",
        "f": f.describe(),
        "exponent": p,
        "constants": {"E": values["E"], "A": A, "B": B, "C": C},
        "trajectory_energy": E_traj,
        "max_residual": rep.extra.get("second_derivative_residual"),
        "report": _report_dict(rep, trajectory_dir, "kepler"),
        "csv": write_csv(*table),
    }
    return Result(report, EXIT_OK if rep.passed else EXIT_NEGATIVE, table, [report["summary"]])


def demo_oscillator_damped(config, params, trajectory_dir=None):
    values = {"omega": 1.0, **params}
    omega = values["omega"]
    domain = [(-3.0, 3.0)]
    fld = SodeField(["-(omega^2)*x"], domain, values, config.velocity_box)
    f = BasicFunction("1 + x^2/4", domain, 1)
    x0, v0, T = 1.0, 0.0, 2.0
    rep = verify_field_transform(fld, f, [x0], [v0], T, tol=1e-5, ivp_tol=config.ivp_tol)
    bar = transform_system(fld, f)
    back = transform_system(bar, BasicFunction("1/(1 + x^2/4)", domain, 1))
    X, V = fld.probe_points()
    roundtrip = float(np.max(np.abs(back.evaluate(X, V) - fld.evaluate(X, V))))
    c = rep.columns
    exact = x0 * np.cos(omega * c["t"]) + v0 / omega * np.sin(omega * c["t"])
    table = _demo_columns(c["t"], c["x"], c["tau"], c["xbar"], exact)
    report = {
        "command": "demo",
        "demo": "oscillator-damped",
        "summary": "harmonic oscillator under f = 1 + x^2/4 acquires a quadratic damping term; 1/f undoes it",
        "transformed_field": bar.strings(),
        "inverse_roundtrip_error": roundtrip,
        "report": _report_dict(rep, trajectory_dir, "oscillator-damped"),
        "csv": write_csv(*table),
    }
    ok = rep.passed and roundtrip <= 1e-9
    return Result(report, EXIT_OK if ok else EXIT_NEGATIVE, table, [report["summary"]])


DEMOS: dict[str, Callable] = {
    "ermakov": demo_ermakov,
    "sphere": demo_sphere,
    "nap": demo_nap,
    "lienard": demo_lienard,
    "kepler": demo_kepler,
    "oscillator-damped": demo_oscillator_damped,
}


def cmd_demo(name: str, config: RunConfig, params: Mapping[str, float] | None = None,
             trajectory_dir: str | None = None) -> Result:
    if name not in DEMOS:
        raise UsageError(f"unknown demo {name!r}; available: {', '.join(DEMOS)}")
    return DEMOS[name](config, dict(params or {}), trajectory_dir)


# --- output ----------------------------------------------------------------------

def _pretty(obj, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines = []
    if isinstance(obj, Mapping):
        for k, v in obj.items():
            if k in ("csv", "trajectories_csv", "knots", "tau_of_t"):
                lines.append(f"{pad}{k}: <{len(str(v).splitlines()) if isinstance(v, str) else 'table'}>")
            elif isinstance(v, (Mapping, list)) and v and not _flat(v):
                lines.append(f"{pad}{k}:")
                lines.extend(_pretty(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {_short(v)}")
    elif isinstance(obj, list):
        for i, v in enumerate(obj[:8]):
            lines.append(f"{pad}- [{i}]")
            lines.extend(_pretty(v, indent + 1))
        if len(obj) > 8:
            lines.append(f"{pad}... {len(obj) - 8} more")
    else:
        lines.append(f"{pad}{_short(obj)}")
    return lines


def _flat(v) -> bool:
    if isinstance(v, Mapping):
        return False
    return all(not isinstance(e, (Mapping, list)) or (isinstance(e, list) and len(e) <= 3) for e in v)


def _short(v) -> str:
    if isinstance(v, float):
        return f"{v:.10g}"
    if isinstance(v, list):
        body = ", ".join(_short(e) for e in v[:6])
        return f"[{body}{', ...' if len(v) > 6 else ''}]"
    return str(v)


def render(result: Result, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_finite(result.report), indent=2, allow_nan=False) + "\n"
    if fmt == "csv":
        if result.table is None:
            raise UsageError("this command has no tabular output; use --format json or pretty")
        names, rows = result.table
        if not isinstance(rows, np.ndarray):
            return "\n".join([",".join(names)] + [",".join(str(c) for c in r) for r in rows]) + "\n"
        return write_csv(names, np.asarray(rows, dtype=float))
    return "\n".join(result.lines + _pretty(_finite(result.report))) + "\n"


# --- argument parsing -------------------------------------------------------------

def _add_globals(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = RunConfig()
    default = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", metavar="FILE", default=default,
                   help=f"JSON configuration file (fallback: ${CONFIG_ENV})")
    p.add_argument("--q-tol", type=float, default=default, help=f"relative tolerance of the Q test (default {d.q_tol:g})")
    p.add_argument("--ivp-tol", type=float, default=default, help=f"integrator tolerance (default {d.ivp_tol:g})")
    p.add_argument("--base-point", type=float, default=default,
                   help="point where phi = 0 and the time scale is normalised (default: domain midpoint)")
    p.add_argument("--format", choices=FORMATS, default=default, help=f"output format (default {d.output_format})")
    p.add_argument("--param", action="append", metavar="NAME=VALUE", default=default,
                   help="bind a named constant; overrides the document's params")
    p.add_argument("--out", metavar="FILE", default=default, help="write output to FILE instead of stdout")
    p.add_argument("--auto-split", action="store_true", default=default,
                   help="linearise separately on each interval where the relevant coefficient keeps its sign")
    p.add_argument("--trajectory-dir", metavar="DIR", default=default,
                   help="write trajectory CSV files to DIR and reference them instead of embedding")


def build_parser() -> argparse.ArgumentParser:
    d = RunConfig()
    parser = _Parser(
        prog="sundman",
        description="Linearise scalar second-order ODEs by generalised Sundman transformations.",
        epilog=(
            "defaults: " + ", ".join(f"{k}={v}" for k, v in d.to_dict().items())
            + ". Exit codes: 0 linearisable/pass, 2 not linearisable/fail, 1 input error."
        ),
    )
    _add_globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_ in (("check", "classify an equation document"),
                        ("linearize", "as check, emitting the full transformation")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("document", help="equation document (JSON)")
        _add_globals(p, suppress=True)

    p = sub.add_parser("verify", help="linearise and verify against the closed-form target")
    p.add_argument("document")
    p.add_argument("--x0", type=float, required=True)
    p.add_argument("--v0", type=float, required=True)
    p.add_argument("--T", type=float, required=True, help="final time")
    p.add_argument("--tau-mode", choices=("quadrature", "augmented"), default="quadrature")
    p.add_argument("--inject-h-scale", type=float, default=1.0, help=argparse.SUPPRESS)
    _add_globals(p, suppress=True)

    p = sub.add_parser("demo", help="run a bundled example end to end")
    p.add_argument("name", help="one of: " + ", ".join(DEMOS))
    _add_globals(p, suppress=True)

    p = sub.add_parser("field", help="linearity tests and Sundman transform of an n-dimensional field")
    p.add_argument("document")
    _add_globals(p, suppress=True)
    return parser


def run(argv: Sequence[str] | None = None) -> tuple[int, str, str | None]:
    """Parse ``argv`` and run the command: (exit code, output text, --out path)."""
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return EXIT_INPUT, f"error: {exc}\n", None
    try:
        config = build_config(args)
        params = parse_params(args.param)
        tdir = args.trajectory_dir
        if args.command == "check":
            result = cmd_check(args.document, config, params)
        elif args.command == "linearize":
            result = cmd_linearize(args.document, config, params)
        elif args.command == "verify":
            result = cmd_verify(args.document, config, args.x0, args.v0, args.T, params,
                                args.inject_h_scale, args.tau_mode, tdir)
        elif args.command == "demo":
            result = cmd_demo(args.name, config, params, tdir)
        else:
            result = cmd_field(args.document, config, params)
        text = render(result, config.output_format)
    except UsageError as exc:
        return EXIT_INPUT, f"error: {exc}\n", None
    except RUN_ERRORS as exc:
        return EXIT_INPUT, f"error: {type(exc).__name__}: {exc}\n", None
    except INPUT_ERRORS as exc:
        return EXIT_INPUT, f"error: {exc}\n", None
    return result.code, text, args.out


def main(argv: Sequence[str] | None = None) -> int:
    code, text, out = run(argv)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        (sys.stderr if code == EXIT_INPUT else sys.stdout).write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
