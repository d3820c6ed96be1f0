"""Numerical checks that a transformation maps solutions to solutions.

Time convention: dtau = h(x) dt throughout.  For the n-dimensional
quasi-velocity transform by f (dt = f dtau) this means h = 1/f.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..exprcore.functions import Fn, intersect
from ..numerics.ivp import Trajectory, solve_ivp, write_csv
from ..numerics.quadrature import gk15, quad_with_error
from ..sode1d.linearize import SUCCESS, Outcome
from ..sode1d.sode import QuadraticSode
from ..sodend.field import BasicFunction, SodeField, transform_system
from .linear_target import solve_linear_target

SAMPLES = 256
TAU_MODES = ("quadrature", "augmented")


@dataclass
class CorrespondenceReport:
    max_state_error: float
    max_velocity_error: float
    tau_of_t: tuple[np.ndarray, np.ndarray]
    integrator_stats: dict
    tolerance: float
    truncated: bool = False
    t_requested: float = float("nan")
    t_end: float = float("nan")
    columns: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        within = self.max_state_error <= self.tolerance and self.max_velocity_error <= self.tolerance
        return bool(within and self.extra.get("second_derivative_pass", True))

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def csv(self, names: Sequence[str] | None = None) -> str:
        names = list(names or self.columns)
        return write_csv(names, np.column_stack([self.columns[k] for k in names]))

    def to_dict(self, csv_dir: str | None = None, stem: str = "trajectory") -> dict:
        """JSON-ready summary; sampled columns are embedded as CSV text or,
        with ``csv_dir``, written to a file that the summary references."""
        ts, taus = self.tau_of_t
        out = {
            "verdict": self.verdict,
            "tolerance": self.tolerance,
            "max_state_error": self.max_state_error,
            "max_velocity_error": self.max_velocity_error,
            "truncated": self.truncated,
            "t_requested": self.t_requested,
            "t_end": self.t_end,
            "tau_of_t": {"t": ts.tolist(), "tau": taus.tolist()},
            "integrator_stats": self.integrator_stats,
            "notes": list(self.notes),
        }
        out.update(self.extra)
        if csv_dir is None:
            out["trajectories_csv"] = self.csv()
        else:
            os.makedirs(csv_dir, exist_ok=True)
            path = os.path.join(csv_dir, f"{stem}.csv")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(self.csv())
            out["trajectories_file"] = path
        return out

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(**kwargs), indent=2)


# --- time reparametrisation along a trajectory ---------------------------

def tau_along(traj: Trajectory, rate: Callable[[np.ndarray], np.ndarray], times: np.ndarray,
              tol: float = 1e-13) -> np.ndarray:
    """int_0^t rate(state(s)) ds at ``times``, one Gauss-Kronrod panel per
    integrator step (adaptively refined where a panel misses ``tol``)."""

    def integrand(ts):
        ts = np.asarray(ts, dtype=float)
        states = traj(ts.ravel())
        return np.asarray(rate(states), dtype=float).reshape(ts.shape)

    def panels(a, b):
        res, err = gk15(integrand, a, b)
        res = np.array(res, dtype=float)
        bad = np.flatnonzero(err > tol * np.maximum(1.0, np.abs(res)))
        for i in bad:
            res[i] = quad_with_error(integrand, float(a[i]), float(b[i]), tol)[0]
        return res

    knots = traj.t
    cumulative = np.concatenate([[0.0], np.cumsum(panels(knots[:-1], knots[1:]))])
    times = np.asarray(times, dtype=float)
    k = np.clip(np.searchsorted(knots, times, side="right") - 1, 0, len(knots) - 1)
    return cumulative[k] + panels(knots[k], times)


def _sample_times(traj: Trajectory, n: int = SAMPLES) -> np.ndarray:
    return np.linspace(traj.t0, traj.t_final, n)


# --- scalar linearisation -------------------------------------------------

def verify_linearisation(
    s: QuadraticSode,
    outcome: Outcome,
    x0: float,
    v0: float,
    T: float,
    tol: float = 1e-6,
    ivp_tol: float = 1e-10,
    tau_mode: str = "quadrature",
    h_scale: float = 1.0,
    samples: int = SAMPLES,
) -> CorrespondenceReport:
    """Integrate ``s`` from (x0, v0), push the solution through the
    transformation and compare with the closed-form target solution.

    ``h_scale`` multiplies h and exists only to inject faults in tests.
    """
    if not isinstance(outcome, SUCCESS):
        raise ValueError(f"cannot verify a {outcome.case} outcome")
    if tau_mode not in TAU_MODES:
        raise ValueError(f"tau_mode must be one of {TAU_MODES}")
    t = outcome.transform
    dom = intersect(s.domain, t.domain)
    if not dom[0] < x0 < dom[1]:
        raise ValueError(f"initial position {x0} outside the working domain {dom}")
    h: Fn = t.h if h_scale == 1.0 else h_scale * t.h
    phi, dphi = t.phi, t.phi.derivative()

    def inside(y):
        return dom[0] < y[0] < dom[1]

    if tau_mode == "augmented":
        def rhs(tt, y):
            base = s.field(tt, y[:2])
            return np.array([base[0], base[1], float(h.unchecked(y[0]))])

        traj = solve_ivp(rhs, 0.0, [x0, v0, 0.0], T, ivp_tol, inside=inside, labels=["x", "v", "tau"])
    else:
        traj = solve_ivp(s.field, 0.0, [x0, v0], T, ivp_tol, inside=inside, labels=["x", "v"])

    ts = _sample_times(traj, samples)
    states = traj(ts)
    xs, vs = states[:, 0], states[:, 1]
    if tau_mode == "augmented":
        taus = states[:, 2]
    else:
        taus = tau_along(traj, lambda st: h.unchecked(st[..., 0]), ts)

    y0 = float(phi(x0))
    w0 = float(dphi(x0)) * v0 / float(h(x0))
    alpha, B, C = outcome.target()
    target = solve_linear_target(alpha, B, C, y0, w0)
    y_mapped = np.asarray(phi(xs), dtype=float)
    w_mapped = np.asarray(dphi(xs), dtype=float) * vs / np.asarray(h(xs), dtype=float)
    y_closed = target(taus)
    w_closed = target.derivative(taus)
    state_err = float(np.max(np.abs(y_mapped - y_closed)))
    vel_err = float(np.max(np.abs(w_mapped - w_closed) / np.maximum(1.0, np.abs(w_closed))))

    truncated = traj.metadata["status"] == "exited"
    notes = []
    if truncated:
        notes.append(f"solution left the domain {dom} at t={traj.t_final:.12g}; compared on [0, {traj.t_final:.12g}]")
    return CorrespondenceReport(
        state_err,
        vel_err,
        (ts, taus),
        dict(traj.metadata),
        tol,
        truncated,
        float(T),
        traj.t_final,
        {
            "t": ts,
            "x": xs,
            "v": vs,
            "tau": taus,
            "y_mapped": y_mapped,
            "y_closed_form": y_closed,
            "w_mapped": w_mapped,
            "w_closed_form": w_closed,
        },
        {"target": {"alpha": alpha, "B": B, "C": C, "y0": y0, "w0": w0}, "tau_mode": tau_mode},
        notes,
    )


# --- n-dimensional quasi-velocity transform -------------------------------

def second_derivative_residual(
    traj: Trajectory,
    expected: Callable[[np.ndarray, np.ndarray], np.ndarray],
    n: int,
    samples: int = SAMPLES,
    rel_step: float = 1e-3,
    taus: np.ndarray | None = None,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Max |d2x/dtau2 - expected(x, v)| with a five-point stencil on the
    dense output, step ``rel_step`` times the trajectory length.  Given
    ``taus`` are clipped so the stencil stays on the trajectory."""
    span = traj.t_final - traj.t0
    hs = rel_step * span
    lo, hi = traj.t0 + 2 * hs, traj.t_final - 2 * hs
    taus = np.linspace(lo, hi, samples) if taus is None else np.clip(np.asarray(taus, dtype=float), lo, hi)
    x = lambda tt: traj(tt)[:, :n]  # noqa: E731
    d2 = (-x(taus + 2 * hs) + 16 * x(taus + hs) - 30 * x(taus) + 16 * x(taus - hs) - x(taus - 2 * hs)) / (12 * hs * hs)
    st = traj(taus)
    exp = np.asarray(expected(st[:, :n], st[:, n:]), dtype=float).reshape(d2.shape)
    resid = np.abs(d2 - exp)
    return float(np.max(resid)), taus, resid.max(axis=1)


def verify_field_transform(
    field_: SodeField,
    f: BasicFunction,
    x0: Sequence[float],
    v0: Sequence[float],
    T: float,
    tol: float = 1e-5,
    ivp_tol: float = 1e-10,
    tau_mode: str = "quadrature",
    expected_second_derivative: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None,
    residual_tol: float = 1e-4,
    samples: int = SAMPLES,
) -> CorrespondenceReport:
    """Compare x(t) with xbar(tau(t)) and f v with vbar, where xbar solves
    the transformed field and tau(t) = int_0^t dt / f(x(t))."""
    if tau_mode not in TAU_MODES:
        raise ValueError(f"tau_mode must be one of {TAU_MODES}")
    n = field_.n
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    v0 = np.atleast_1d(np.asarray(v0, dtype=float))
    if x0.shape != (n,) or v0.shape != (n,):
        raise ValueError(f"initial position and velocity must have {n} components")
    bar = transform_system(field_, f)

    def inv_f(states):
        return 1.0 / np.asarray(f(np.atleast_2d(states)[:, :n]), dtype=float)

    if tau_mode == "augmented":
        def rhs(tt, y):
            base = field_.field(tt, y[: 2 * n])
            return np.append(base, 1.0 / f.at(y[:n]))

        traj = solve_ivp(rhs, 0.0, np.concatenate([x0, v0, [0.0]]), T, ivp_tol,
                         inside=lambda y: field_.inside(y[:n]),
                         labels=[*field_.xnames, *field_.vnames, "tau"])
    else:
        traj = solve_ivp(field_.field, 0.0, np.concatenate([x0, v0]), T, ivp_tol,
                         inside=field_.inside, labels=[*field_.xnames, *field_.vnames])

    ts = _sample_times(traj, samples)
    states = traj(ts)
    if tau_mode == "augmented":
        taus = states[:, 2 * n]
        tau_end = float(traj.y[-1, 2 * n])
    else:
        taus = tau_along(traj, inv_f, ts)
        tau_end = float(taus[-1])
    xs, vs = states[:, :n], states[:, n: 2 * n]

    vbar0 = f.at(x0) * v0
    traj_bar = solve_ivp(bar.field, 0.0, np.concatenate([x0, vbar0]), tau_end, ivp_tol,
                         inside=bar.inside, labels=[*bar.xnames, *[f"{v}bar" for v in bar.vnames]])
    if traj_bar.metadata["status"] == "exited":
        raise RuntimeError("transformed trajectory left the domain before the matched time")
    taus_c = np.clip(taus, traj_bar.t0, traj_bar.t_final)
    bar_states = traj_bar(taus_c)
    fx = np.asarray(f(xs), dtype=float).reshape(-1, 1)
    state_err = float(np.max(np.abs(bar_states[:, :n] - xs)))
    expected_vbar = fx * vs
    vel_err = float(np.max(np.abs(bar_states[:, n:] - expected_vbar) / np.maximum(1.0, np.abs(expected_vbar))))

    extra = {"transformed_field": bar.strings(), "tau_mode": tau_mode}
    truncated = traj.metadata["status"] == "exited"
    notes = []
    if truncated:
        notes.append(f"solution left the domain at t={traj.t_final:.12g}")
    columns = {"t": ts, "tau": taus}
    for i in range(n):
        columns[field_.xnames[i]] = xs[:, i]
        columns[f"{field_.xnames[i]}bar"] = bar_states[:, i]
    for i in range(n):
        columns[field_.vnames[i]] = vs[:, i]
        columns[f"{field_.vnames[i]}bar"] = bar_states[:, n + i]
    report = CorrespondenceReport(
        state_err, vel_err, (ts, taus), {"original": dict(traj.metadata), "transformed": dict(traj_bar.metadata)},
        tol, truncated, float(T), traj.t_final, columns, extra, notes,
    )
    if expected_second_derivative is not None:
        worst, _, _ = second_derivative_residual(traj_bar, expected_second_derivative, n, samples)
        _, _, along = second_derivative_residual(traj_bar, expected_second_derivative, n, taus=taus_c)
        report.columns["second_derivative_residual"] = along
        report.extra["second_derivative_residual"] = worst
        report.extra["second_derivative_tolerance"] = residual_tol
        if worst > residual_tol:
            report.notes.append(f"second-derivative residual {worst:.3g} exceeds {residual_tol:.3g}")
        report.extra["second_derivative_pass"] = bool(worst <= residual_tol)
    return report
