"""Random equations and transformations on safe domains for property tests."""

import numpy as np

from sundman.sode1d import GenSundman, QuadraticSode
from sundman.sode1d.transforms import image
from sundman.sodend import position_names, velocity_names

DOMAIN = (0.5, 2.0)


def _c(rng, lo=0.2, hi=2.0):
    """A short decimal in [lo, hi], so expressions print and parse cleanly."""
    return round(float(rng.uniform(lo, hi)), 3)


def random_gamma(rng):
    return str(rng.choice([
        f"{_c(rng)}/x + {_c(rng)}*sin(x)",
        f"{_c(rng)}*x",
        f"{_c(rng)}*cos(x) - {_c(rng)}",
        "0",
    ]))


def random_A(rng):
    return str(rng.choice([
        f"{_c(rng)} + {_c(rng)}*x^2",
        f"{_c(rng)}*exp({_c(rng, -1, 1)}*x)",
        f"{_c(rng)}*x",
        f"{_c(rng)} + sin(x)/{_c(rng, 2, 4)}",
    ]))


def random_b(rng):
    return str(rng.choice([
        f"{_c(rng)} + {_c(rng)}*x^3 + {_c(rng)}*cos(x)",
        f"{_c(rng)}/x^2 + {_c(rng)}*x",
        f"{_c(rng)}*exp(-x) - {_c(rng)}",
        f"{_c(rng)}*sin(2*x) + {_c(rng)}*x^2",
    ]))


def random_sode(rng, domain=DOMAIN):
    return QuadraticSode(random_gamma(rng), random_A(rng), random_b(rng), domain)


def random_positive(rng):
    """A function positive on any subinterval of (0, 10)."""
    return str(rng.choice([
        f"{_c(rng)} + {_c(rng)}*x^2",
        f"exp({_c(rng, -1, 1)}*x)",
        f"{_c(rng, 1.2, 3)} + sin({_c(rng)}*x)",
        f"{_c(rng)}/x + {_c(rng)}",
        f"sqrt({_c(rng)} + x^2)",
    ]))


def random_monotone(rng):
    """A strictly monotone function on any subinterval of (0, 10)."""
    inc = str(rng.choice([
        f"{_c(rng)}*x + {_c(rng, 0.05, 0.5)}*x^3",
        f"exp({_c(rng, 0.2, 1)}*x)",
        f"log(x) + {_c(rng)}*x",
        f"x^2 + {_c(rng)}*x",
        f"{_c(rng, 1.2, 2)}*x - sin(x)",
    ]))
    shift = _c(rng, -1, 1)
    if rng.random() < 0.3:
        return f"{shift} - ({inc})"
    return f"{inc} + {shift}"


def random_transform(rng, domain=DOMAIN):
    return GenSundman(random_positive(rng), random_monotone(rng), domain)


def chained_triple(rng):
    """t1, t2, t3 with each domain the image of the previous one, shifted
    into positive territory so the random functions stay well defined."""
    t1 = random_transform(rng)
    lo, hi = image(t1.phi, t1.domain)
    t1 = GenSundman(t1.h, f"({t1.phi.describe()}) - ({lo!r}) + 0.5", t1.domain)
    d2 = image(t1.phi, t1.domain)
    t2 = random_transform(rng, d2)
    lo, hi = image(t2.phi, d2)
    t2 = GenSundman(t2.h, f"({t2.phi.describe()}) - ({lo!r}) + 0.5", d2)
    t3 = random_transform(rng, image(t2.phi, d2))
    return t1, t2, t3


def max_gap(a, b):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b))))


# --- n-dimensional fields ------------------------------------------------------

BOX = [(0.5, 2.0), (-1.0, 1.5)]


def _matrix(rng, n):
    return np.round(rng.uniform(-2, 2, size=(n, n)), 3)


def _linear_terms(A, B, i):
    n = len(A)
    xs, vs = position_names(n), velocity_names(n)
    terms = [f"({float(A[i, j])!r})*{xs[j]}" for j in range(n)]
    terms += [f"({float(B[i, j])!r})*{vs[j]}" for j in range(n)]
    return " + ".join(terms)


def linear_field(rng, n, with_constant=False):
    """Components, A, B, C of x'' = A x + B v (+ C)."""
    A, B = _matrix(rng, n), _matrix(rng, n)
    C = np.round(rng.uniform(-2, 2, size=n), 3) if with_constant else np.zeros(n)
    comps = [_linear_terms(A, B, i) + (f" + ({float(C[i])!r})" if with_constant else "") for i in range(n)]
    return comps, A, B, C


def fibre_linear_field(rng, n):
    """Components and the coefficient strings B^i_j(x) of x'' = B(x) v."""
    x1, vs = position_names(n)[0], velocity_names(n)
    coeffs = [[f"({_c(rng, -2, 2)})*{rng.choice(['sin', 'cos', 'exp'])}({x1})" for _ in range(n)] for _ in range(n)]
    comps = [" + ".join(f"({coeffs[i][j]})*{vs[j]}" for j in range(n)) for i in range(n)]
    return comps, coeffs


def nonlinear_field(rng, n):
    """A linear field plus a term that breaks every linearity class."""
    comps, *_ = linear_field(rng, n, with_constant=True)
    k = int(rng.integers(n))
    x, v, x1 = position_names(n)[k], velocity_names(n)[k], position_names(n)[0]
    extra = str(rng.choice([f"{x}^2", f"{v}^2", f"sin({x})", f"{x1}*{v}", f"{v}^3"]))
    comps[k] = f"{comps[k]} + ({_c(rng, 0.5, 2)})*{extra}"
    return comps
