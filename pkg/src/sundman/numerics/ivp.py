"""Dormand-Prince 5(4) integration with continuous (dense) output.

Each accepted step stores a quartic in the step fraction theta that matches
the state and derivative at both ends and the fourth-order midpoint value of
the Dormand-Prince continuous extension.
"""

from __future__ import annotations

import io
import math
from typing import Callable, Sequence

import numpy as np

from ..exprcore.evaluate import DomainError

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
_E = np.array([-71 / 57600, 0.0, 71 / 16695, -71 / 1920, 17253 / 339200, -22 / 525, 1 / 40])
# continuous extension: y(t + theta*h) = y + h * K^T P [theta, theta^2, theta^3, theta^4]
_P = np.array([
    [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0, 0, 0, 0],
    [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])
_MID_WEIGHTS = _P @ (0.5 ** np.arange(1, 5))
# solves for (c2, c3, c4) of y0 + h f0 s + c2 s^2 + c3 s^3 + c4 s^4 given
# the end value, end slope and midpoint value
_HERMITE = np.linalg.inv(np.array([[1.0, 1.0, 1.0], [2.0, 3.0, 4.0], [4.0, 2.0, 1.0]]))

_EPS = np.finfo(float).eps


class IntegrationError(RuntimeError):
    def __init__(self, message: str, t: float, state: np.ndarray):
        self.t = t
        self.state = np.array(state, dtype=float)
        super().__init__(f"{message} at t={t!r} (last good state {self.state.tolist()})")


class Trajectory:
    """Accepted steps of an integration plus piecewise-quartic dense output."""

    def __init__(self, ts, ys, coeffs, metadata: dict, labels: Sequence[str] | None = None):
        self.t = np.asarray(ts, dtype=float)
        self.y = np.asarray(ys, dtype=float)
        self._coeffs = np.asarray(coeffs, dtype=float)  # (steps, 5, dim), in theta
        self.metadata = dict(metadata)
        self.dimension = self.y.shape[1]
        if labels is None:
            labels = default_labels(self.dimension)
        self.labels = list(labels)
        for arr in (self.t, self.y, self._coeffs):
            arr.setflags(write=False)

    @property
    def t0(self) -> float:
        return float(self.t[0])

    @property
    def t_final(self) -> float:
        return float(self.t[-1])

    def _locate(self, t):
        ta = np.asarray(t, dtype=float)
        if np.any(ta < self.t[0] - 1e-12 * max(1.0, abs(self.t[0]))) or np.any(
            ta > self.t[-1] + 1e-12 * max(1.0, abs(self.t[-1]))
        ):
            raise ValueError(f"time outside the trajectory span [{self.t[0]}, {self.t[-1]}]")
        if len(self.t) == 1:
            raise ValueError("trajectory has a single sample")
        k = np.clip(np.searchsorted(self.t, ta, side="right") - 1, 0, len(self.t) - 2)
        h = self.t[k + 1] - self.t[k]
        theta = (ta - self.t[k]) / h
        return k, theta, h

    def __call__(self, t) -> np.ndarray:
        """State at time(s) ``t``: shape ``(dim,)`` or ``(len(t), dim)``."""
        k, theta, _ = self._locate(t)
        c = self._coeffs[k]
        powers = np.asarray(theta)[..., None] ** np.arange(5)
        return np.einsum("...j,...jd->...d", powers, c)

    def derivative(self, t) -> np.ndarray:
        k, theta, h = self._locate(t)
        c = self._coeffs[k]
        th = np.asarray(theta)[..., None]
        powers = np.concatenate([np.zeros_like(th), np.ones_like(th), 2 * th, 3 * th**2, 4 * th**3], axis=-1)
        return np.einsum("...j,...jd->...d", powers, c) / np.asarray(h)[..., None]

    def to_csv(self, times=None) -> str:
        """CSV with header ``t,<labels>`` at the step times or at ``times``."""
        ts = self.t if times is None else np.asarray(times, dtype=float)
        ys = self.y if times is None else self(ts)
        return write_csv(["t", *self.labels], np.column_stack([ts, ys]))


def default_labels(dimension: int) -> list[str]:
    if dimension % 2:
        return [f"y{i + 1}" for i in range(dimension)]
    n = dimension // 2
    return [f"x{i + 1}" for i in range(n)] + [f"v{i + 1}" for i in range(n)]


def write_csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in np.atleast_2d(rows):
        buf.write(",".join(format(float(v), ".17g") for v in row) + "\n")
    return buf.getvalue()


def _norm(err, scale) -> float:
    return float(np.max(np.abs(err) / scale))


def _safe(field, t, y):
    try:
        with np.errstate(all="ignore"):
            out = np.asarray(field(t, y), dtype=float)
    except (DomainError, ZeroDivisionError, ValueError, OverflowError):
        return None
    return out if np.all(np.isfinite(out)) else None


def solve_ivp(
    field: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    state0,
    t_end: float,
    tol: float = 1e-10,
    inside: Callable[[np.ndarray], bool] | None = None,
    max_steps: int = 1_000_000,
    max_step: float = math.inf,
    labels: Sequence[str] | None = None,
) -> Trajectory:
    """Integrate ``y' = field(t, y)`` from ``t0`` to ``t_end > t0``.

    The local error estimate of every accepted step satisfies
    ``|err_i| <= tol * max(1, |y_i|)``.  When ``inside`` is given, the
    integration stops at the first time the state leaves the region (located
    by bisection on the dense output) and ``metadata["status"]`` is
    ``"exited"``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if not t_end > t0:
        raise ValueError("t_end must exceed t0")
    y = np.array(state0, dtype=float)
    if not np.all(np.isfinite(y)):
        raise IntegrationError("non-finite initial state", t0, y)
    if inside is not None and not inside(y):
        raise IntegrationError("initial state outside the domain", t0, y)
    f = _safe(field, t0, y)
    if f is None:
        raise IntegrationError("non-finite derivative", t0, y)
    n_fev = 1
    t = float(t0)

    # initial step (Hairer, Norsett and Wanner, II.4)
    scale = tol * np.maximum(1.0, np.abs(y))
    d0, d1 = _norm(y, scale), _norm(f, scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, t_end - t, max_step)
    f1 = _safe(field, t + h0, y + h0 * f)
    n_fev += 1
    d2 = _norm(f1 - f, scale) / h0 if f1 is not None else math.inf
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    h = min(100 * h0, h1, t_end - t, max_step)

    ts, ys, coeffs = [t], [y.copy()], []
    K = np.empty((7, len(y)))
    n_acc = n_rej = 0
    status = "completed"
    while t < t_end:
        if n_acc >= max_steps:
            raise IntegrationError("step limit reached", t, y)
        if h < 16 * _EPS * max(1.0, abs(t)):
            raise IntegrationError("step size underflow", t, y)
        last = t + h >= t_end
        if last:
            h = t_end - t
        K[0] = f
        ok = True
        for s in range(1, 6):
            ks = _safe(field, t + _C[s] * h, y + h * (np.asarray(_A[s]) @ K[:s]))
            n_fev += 1
            if ks is None:
                ok = False
                break
            K[s] = ks
        if ok:
            y_new = y + h * (_B @ K[:6])
            f_new = _safe(field, t + h, y_new)
            n_fev += 1
            ok = f_new is not None and np.all(np.isfinite(y_new))
        if not ok:
            n_rej += 1
            h *= 0.25
            continue
        K[6] = f_new
        err = h * (_E @ K)
        scale = tol * np.maximum(1.0, np.maximum(np.abs(y), np.abs(y_new)))
        en = _norm(err, scale)
        if en > 1.0:
            n_rej += 1
            h *= max(0.2, 0.9 * en ** -0.2)
            continue

        y_mid = y + h * (_MID_WEIGHTS @ K)
        c = np.empty((5, len(y)))
        c[0], c[1] = y, h * f
        rhs = np.stack([y_new - y - h * f, h * (f_new - f), 16 * (y_mid - y - 0.5 * h * f)])
        c[2:] = _HERMITE @ rhs
        t_new = t_end if last else t + h

        if inside is not None and not inside(y_new):
            theta = _exit_fraction(c, inside)
            if theta <= 0.0:
                status = "exited"
                break
            c = c * (theta ** np.arange(5))[:, None]
            y_new = c.sum(axis=0)
            t_new = t + theta * h
            coeffs.append(c)
            ts.append(t_new)
            ys.append(y_new)
            n_acc += 1
            t = t_new
            status = "exited"
            break

        coeffs.append(c)
        ts.append(t_new)
        ys.append(y_new.copy())
        n_acc += 1
        t, y, f = t_new, y_new, f_new
        h *= min(5.0, 0.9 * en ** -0.2) if en > 0 else 5.0
        h = min(h, max_step)

    if not coeffs:
        raise IntegrationError("no step could be taken inside the domain", t, y)
    meta = {
        "tol": tol,
        "steps": n_acc,
        "rejected": n_rej,
        "evaluations": n_fev,
        "status": status,
        "t_end_requested": float(t_end),
    }
    return Trajectory(ts, ys, coeffs, meta, labels)


def _exit_fraction(c: np.ndarray, inside: Callable[[np.ndarray], bool]) -> float:
    """Largest step fraction (to bisection precision) whose state is inside."""
    lo, hi = 0.0, 1.0
    powers = np.arange(5)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if inside((mid ** powers) @ c):
            lo = mid
        else:
            hi = mid
    return lo
