"""Second-order systems x''^i = X^i(x, x') in n dimensions and their
Sundman transforms in quasi-velocities.

Variables are named ``x``/``v`` for n = 1 and ``x1..xn``/``v1..vn`` otherwise.
A transform by the basic function f uses dt = f dtau and vbar = f v.
"""

from __future__ import annotations

import itertools
from typing import Mapping, Sequence

import numpy as np

from ..exprcore import calculus
from ..exprcore.evaluate import Compiled, DomainError
from ..exprcore.nodes import Const, Expr, Var, to_string
from ..exprcore.parser import parse

Box = tuple[tuple[float, float], ...]
MAX_PROBES = 4096


def position_names(n: int) -> tuple[str, ...]:
    return ("x",) if n == 1 else tuple(f"x{i + 1}" for i in range(n))


def velocity_names(n: int) -> tuple[str, ...]:
    return ("v",) if n == 1 else tuple(f"v{i + 1}" for i in range(n))


def _as_box(domain, n: int) -> Box:
    box = np.asarray(domain, dtype=float).reshape(-1, 2)
    if box.shape[0] == 1 and n > 1:
        box = np.repeat(box, n, axis=0)
    if box.shape[0] != n:
        raise ValueError(f"domain needs {n} intervals, got {box.shape[0]}")
    if np.any(box[:, 0] >= box[:, 1]):
        raise ValueError(f"every interval must satisfy lo < hi: {box.tolist()}")
    return tuple((float(lo), float(hi)) for lo, hi in box)


def _parse(value, names, params) -> Expr:
    if isinstance(value, Expr):
        expr = value
    elif isinstance(value, (int, float)):
        expr = Const(float(value))
    else:
        expr = parse(str(value), {*names, *params})
    extra = expr.free_vars() - set(names) - set(params)
    if extra:
        raise ValueError(f"{to_string(expr)} uses undeclared names {sorted(extra)}")
    return expr


def box_grid(box: Box, per_dim: int) -> np.ndarray:
    """Tensor grid of interior points, shape (per_dim**n, n)."""
    axes = [np.linspace(lo, hi, per_dim + 2)[1:-1] for lo, hi in box]
    return np.array(list(itertools.product(*axes)), dtype=float).reshape(-1, len(box))


def _per_dim(total_dims: int, cap: int, limit: int = MAX_PROBES) -> int:
    k = cap
    while k > 2 and k**total_dims > limit:
        k -= 1
    return k


class SodeField:
    """Components X^i over positions and velocities, on a position box.

    Construction evaluates every component on a probe grid of the box times
    the velocity box [-velocity_box, velocity_box]^n and fails if any
    evaluation does.
    """

    def __init__(
        self,
        components: Sequence,
        domain,
        params: Mapping[str, float] | None = None,
        velocity_box: float = 2.0,
    ):
        n = len(components)
        if n < 1:
            raise ValueError("a field needs at least one component")
        self.n = n
        self.params = {k: float(v) for k, v in (params or {}).items()}
        self.xnames = position_names(n)
        self.vnames = velocity_names(n)
        names = self.xnames + self.vnames
        self.components = tuple(_parse(c, names, self.params) for c in components)
        self.domain = _as_box(domain, n)
        self.velocity_box = float(velocity_box)
        self._pnames = tuple(sorted(self.params))
        self._pvals = tuple(self.params[k] for k in self._pnames)
        self._compiled = [Compiled(c, names + self._pnames) for c in self.components]
        X, V = self.probe_points()
        try:
            self.evaluate(X, V)
        except DomainError as exc:
            raise ValueError(f"field is not evaluable on {self.domain}: {exc}") from exc

    @property
    def names(self) -> tuple[str, ...]:
        return self.xnames + self.vnames

    def probe_points(self, limit: int = MAX_PROBES) -> tuple[np.ndarray, np.ndarray]:
        """Positions and velocities of the probe grid, each shape (N, n)."""
        k = _per_dim(2 * self.n, 8, limit)
        xs = box_grid(self.domain, k)
        vb = self.velocity_box
        vaxis = np.linspace(-vb, vb, k)
        vs = np.array(list(itertools.product(*([vaxis] * self.n)))).reshape(-1, self.n)
        X = np.repeat(xs, len(vs), axis=0)
        V = np.tile(vs, (len(xs), 1))
        return X, V

    def evaluate(self, X: np.ndarray, V: np.ndarray, checked: bool = True) -> np.ndarray:
        """Components at rows of (X, V); returns shape (N, n)."""
        X = np.atleast_2d(X)
        V = np.atleast_2d(V)
        args = [X[:, i] for i in range(self.n)] + [V[:, i] for i in range(self.n)]
        out = []
        for c in self._compiled:
            val = c(*args, *self._pvals) if checked else c.raw(*args, *self._pvals)
            out.append(np.broadcast_to(val, X[:, 0].shape))
        return np.stack(out, axis=-1)

    def evaluate_expr(self, expr: Expr, X: np.ndarray, V: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X)
        V = np.atleast_2d(V)
        args = [X[:, i] for i in range(self.n)] + [V[:, i] for i in range(self.n)]
        c = Compiled(expr, self.names + self._pnames)
        return np.broadcast_to(c(*args, *self._pvals), X[:, 0].shape)

    def field(self, t: float, state: np.ndarray) -> np.ndarray:
        n = self.n
        args = list(state) + list(self._pvals)
        acc = [float(c.raw(*args)) for c in self._compiled]
        return np.concatenate([state[n:], acc])

    def inside(self, state: np.ndarray) -> bool:
        return all(lo < state[i] < hi for i, (lo, hi) in enumerate(self.domain))

    def strings(self) -> list[str]:
        return [to_string(c) for c in self.components]

    def describe(self) -> str:
        return "; ".join(f"{v}' = {s}" for v, s in zip(self.vnames, self.strings()))


class BasicFunction:
    """A position-only function of constant sign on the box."""

    def __init__(self, f, domain, n: int, params: Mapping[str, float] | None = None):
        self.n = n
        self.params = {k: float(v) for k, v in (params or {}).items()}
        self.xnames = position_names(n)
        self.expr = _parse(f, self.xnames, self.params)
        self.domain = _as_box(domain, n)
        pnames = tuple(sorted(self.params))
        self._pvals = tuple(self.params[k] for k in pnames)
        self._compiled = Compiled(self.expr, self.xnames + pnames)
        pts = box_grid(self.domain, _per_dim(n, 4))
        try:
            vals = np.broadcast_to(self(pts), pts[:, 0].shape)
        except DomainError as exc:
            raise ValueError(f"basic function {to_string(self.expr)} fails on {self.domain}: {exc}") from exc
        if np.all(vals > 0):
            self.sign = 1
        elif np.all(vals < 0):
            self.sign = -1
        else:
            bad = pts[int(np.argmin(np.abs(vals)))]
            raise ValueError(
                f"basic function {to_string(self.expr)} does not keep one sign on {self.domain} "
                f"(near {bad.tolist()})"
            )

    def __call__(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return self._compiled(*[X[:, i] for i in range(self.n)], *self._pvals)

    def at(self, x: Sequence[float]) -> float:
        return float(self._compiled(*[float(v) for v in x], *self._pvals))

    def gradient(self) -> list[Expr]:
        return [calculus.simplify(calculus.differentiate(self.expr, xn)) for xn in self.xnames]

    def describe(self) -> str:
        return to_string(self.expr)


def transform_system(field: SodeField, f: BasicFunction) -> SodeField:
    """The field in quasi-velocities vbar = f v and new time dtau = dt / f:

        Xbar^i = f^2 X^i(x, vbar / f) + (sum_j (d_j f / f) vbar^j) vbar^i.
    """
    if f.n != field.n:
        raise ValueError(f"basic function is {f.n}-dimensional, field is {field.n}-dimensional")
    params = dict(field.params)
    for k, v in f.params.items():
        if k in params and params[k] != v:
            raise ValueError(f"parameter {k!r} bound twice with different values")
        params[k] = v
    fe = f.expr
    scaled_v = {vn: calculus.div(Var(vn), fe) for vn in field.vnames}
    f2 = calculus.mul(fe, fe)
    drift = Const(0.0)
    for xn, vn in zip(field.xnames, field.vnames):
        df = calculus.simplify(calculus.differentiate(fe, xn))
        drift = calculus.add(drift, calculus.mul(calculus.div(df, fe), Var(vn)))
    comps = []
    for X, vn in zip(field.components, field.vnames):
        term = calculus.mul(f2, calculus.substitute(X, scaled_v))
        comps.append(calculus.simplify(calculus.add(term, calculus.mul(drift, Var(vn)))))
    out = SodeField(comps, field.domain, params, field.velocity_box)
    f_domain_ok = all(a[0] <= b[0] and b[1] <= a[1] for a, b in zip(f.domain, field.domain))
    if not f_domain_ok:
        # the transform is only meaningful where f was validated
        BasicFunction(f.expr, field.domain, f.n, f.params)
    return out
