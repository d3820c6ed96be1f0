import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import DOMAIN, chained_triple, max_gap, random_monotone, random_positive, random_sode
from sundman.config import RunConfig
from sundman.exprcore import grid
from sundman.sode1d import (
    COORDINATE_FIRST,
    SUNDMAN_FIRST,
    FreeParticle,
    GenSundman,
    Linear,
    NotLinearisable,
    NotQuadratic,
    QuadraticSode,
    SignChangeError,
    UnitForcing,
    apply_coordinate_change,
    apply_pure_sundman,
    apply_transform,
    compose,
    factorize,
    inverse,
    linearize,
    linearize_pieces,
    map_state,
    normalize,
    outcome_to_dict,
    p_function,
    product,
    q_invariant,
    sode_from_document,
    sode_to_document,
)
from sundman.sode1d.sode import as_function

seeds = st.integers(0, 2**32 - 1)


def values(fn, xs):
    return np.asarray(fn(xs), dtype=float) * np.ones_like(xs)


def coefficient_gap(s1, s2, xs):
    return max(max_gap(values(getattr(s1, k), xs), values(getattr(s2, k), xs)) for k in ("gamma", "A", "b"))


# --- normal form ---------------------------------------------------------------

def test_normalize_ermakov():
    s = normalize("-(2/x)*v^2 - 1/x^3", (0.3, 3.0))
    xs = grid(s.domain, 9)
    assert np.allclose(values(s.gamma, xs), 2 / xs, rtol=1e-12)
    assert np.allclose(values(s.A, xs), 0.0, atol=1e-12)
    assert np.allclose(values(s.b, xs), 1 / xs**3, rtol=1e-12)


def test_normalize_sphere():
    s = normalize("2*v^2*cot(x) + sin(x)*cos(x)", (0.3, 1.4))
    xs = grid(s.domain, 9)
    assert np.allclose(values(s.gamma, xs), -2 / np.tan(xs), rtol=1e-12)
    assert np.allclose(values(s.b, xs), -np.sin(xs) * np.cos(xs), rtol=1e-12)


def test_normalize_reads_off_all_three_coefficients():
    s = normalize("-x*v^2 - 3*v + sin(x)", (0.5, 2.0))
    x, v = 1.3, 0.7
    assert s.acceleration(x, v) == pytest.approx(-x * v * v - 3 * v + math.sin(x), rel=1e-13)


def test_normalize_rejects_cubic_velocity():
    out = normalize("-x*v^3 - x", (0.5, 2.0))
    assert isinstance(out, NotQuadratic)
    assert out.third_derivative_max > 0


# --- Q and P -------------------------------------------------------------------

def test_q_vanishes_for_power_law_friction():
    q = q_invariant(QuadraticSode("1/x", "x", "1/2", (0.5, 3.0)))
    assert np.max(np.abs(values(q, grid((0.5, 3.0), 32)))) < 1e-12


def test_q_vanishes_for_lienard_family():
    # f = x: b = k1 f F + k2 f with F = x^2/2
    s = QuadraticSode("0", "x", "k1*x^3/2 + k2*x", (0.2, 3.0), {"k1": 0.7, "k2": -1.3})
    assert np.max(np.abs(values(q_invariant(s), grid(s.domain, 32)))) < 1e-12


def test_q_vanishes_without_linear_velocity_term():
    s = QuadraticSode("sin(x)", "0", "exp(x) + x^5", (0.5, 2.0))
    assert np.all(values(q_invariant(s), grid(s.domain, 16)) == 0.0)


def test_q_matches_hand_expansion():
    # A = 1, b = x^3: P = 3x^2, Q = 6x
    s = QuadraticSode("0", "1", "x^3", (0.5, 2.0))
    xs = grid(s.domain, 8)
    assert np.allclose(values(p_function(s), xs), 3 * xs**2, rtol=1e-14)
    assert np.allclose(values(q_invariant(s), xs), 6 * xs, rtol=1e-14)


def test_q_under_doubling_picks_up_inverse_jacobian():
    # A = 1, b = x^3, phi = 2x: bbar = ybar^3 / 4, Qbar = 3 ybar / 2 = 3x = Q / J
    s = QuadraticSode("0", "1", "x^3", (0.5, 2.0))
    moved = apply_coordinate_change(s, "2*x")
    assert moved.b(3.0) == pytest.approx(27 / 4)
    assert q_invariant(moved)(2.0) == pytest.approx(3.0, rel=1e-13)
    assert q_invariant(s)(1.0) == pytest.approx(6.0, rel=1e-13)


# --- coefficient maps ----------------------------------------------------------

def test_pure_sundman_direct_substitution():
    s = apply_pure_sundman(QuadraticSode("0", "1", "1", (0.5, 4.0)), "x")
    xs = grid(s.domain, 8)
    assert np.allclose(values(s.gamma, xs), 1 / xs, rtol=1e-14)
    assert np.allclose(values(s.A, xs), 1 / xs, rtol=1e-14)
    assert np.allclose(values(s.b, xs), 1 / xs**2, rtol=1e-14)


def test_pure_sundman_unit_h_is_identity():
    s = QuadraticSode("1/x", "x^2", "cos(x)", (0.5, 2.0))
    assert coefficient_gap(apply_pure_sundman(s, "1"), s, grid(s.domain, 16)) == 0.0


def test_pure_sundman_removes_gamma():
    s = QuadraticSode("2/x + cos(x)", "1", "x", (0.5, 2.0))
    # exp(-int gamma) = x^-2 exp(-sin x)
    t = apply_pure_sundman(s, "exp(-sin(x))/x^2")
    assert np.max(np.abs(values(t.gamma, grid(s.domain, 32)))) < 1e-12


def test_coordinate_change_identity_and_scaling():
    s = QuadraticSode("0", "0", "1", (0.5, 2.0))
    same = apply_coordinate_change(s, "x")
    assert coefficient_gap(same, s, grid(s.domain, 8)) < 1e-14
    doubled = apply_coordinate_change(s, "2*x")
    assert doubled.domain == pytest.approx((1.0, 4.0))
    assert np.allclose(values(doubled.b, grid(doubled.domain, 8)), 2.0)


def test_coordinate_change_gamma_at_matched_point():
    s = QuadraticSode("2/x", "0", "1/x^3", (0.5, 3.0))
    t = apply_coordinate_change(s, "x^2")
    # J = 2x at x = 2: (1/4)(1 - 1/2)
    assert t.gamma(4.0) == pytest.approx(0.125, rel=1e-10)


def test_decreasing_coordinate_change_orients_domain():
    t = apply_coordinate_change(QuadraticSode("0", "1", "x", (0.5, 2.0)), "-x")
    assert t.domain == pytest.approx((-2.0, -0.5))
    assert t.b(-1.0) == pytest.approx(-1.0)


# --- the group -----------------------------------------------------------------

def test_compose_direct_substitution():
    t1 = GenSundman("x", "x^2", (1.0, 2.0))
    t2 = GenSundman("1", "x + 1", (0.5, 5.0))
    c = compose(t2, t1)
    xs = grid(c.domain, 16)
    assert max_gap(values(c.h, xs), xs) < 1e-14
    assert max_gap(values(c.phi, xs), xs**2 + 1) < 1e-14


def test_identity_is_neutral():
    t = GenSundman("x", "x^3/3", (1.0, 2.0))
    xs = grid(t.domain, 16)
    for c in (compose(GenSundman.identity(t.target_domain), t), compose(t, GenSundman.identity(t.domain))):
        assert max_gap(values(c.h, xs), values(t.h, xs)) < 1e-14
        assert max_gap(values(c.phi, xs), values(t.phi, xs)) < 1e-14


def test_inverse_examples():
    inv = inverse(GenSundman("x", "x^3/3", (1.0, 2.0)))
    assert inv.h(8 / 3) == pytest.approx(0.5, abs=1e-12)
    half = inverse(GenSundman("1", "2*x", (0.5, 2.0)))
    assert half.phi(3.0) == pytest.approx(1.5, abs=1e-13)
    assert half.h(3.0) == pytest.approx(1.0)
    ident = inverse(GenSundman.identity((0.5, 2.0)))
    assert ident.phi(1.2) == pytest.approx(1.2, abs=1e-14)


def test_inverse_cancels():
    t = GenSundman("x", "x^3/3", (1.0, 2.0))
    xs = grid(t.domain, 16)
    left = compose(inverse(t), t)
    assert max_gap(values(left.h, xs), 1.0) < 1e-12
    assert max_gap(values(left.phi, xs), xs) < 1e-12
    right = compose(t, inverse(t))
    ys = grid(right.domain, 16)
    assert max_gap(values(right.phi, ys), ys) < 1e-12


def test_factorize_examples():
    t = GenSundman("x", "x^2", (1.0, 2.0))
    coord, sund, order = factorize(t, COORDINATE_FIRST)
    xs = grid(t.domain, 16)
    assert np.all(values(coord.h, xs) == 1.0)
    assert np.allclose(values(sund.phi, xs), xs)
    p = product(coord, sund, order)
    assert max_gap(values(p.h, xs), xs) < 1e-12 and max_gap(values(p.phi, xs), xs**2) < 1e-12
    coord, sund, _ = factorize(GenSundman("x", "x", (1.0, 2.0)))
    assert max_gap(values(coord.phi, xs), xs) == 0.0
    coord, sund, _ = factorize(GenSundman("1", "x^2", (1.0, 2.0)))
    assert np.all(values(sund.h, xs) == 1.0)


def test_factorize_rejects_unknown_order():
    with pytest.raises(ValueError):
        factorize(GenSundman("1", "x", (0.5, 1.0)), "both")


def test_map_state():
    assert map_state(GenSundman("x", "x^3/3", (1.0, 3.0)), 2.0, 5.0) == (pytest.approx(8 / 3), pytest.approx(10.0))
    assert map_state(GenSundman.identity((0.0, 1.0)), 0.3, -2.0) == (pytest.approx(0.3), pytest.approx(-2.0))
    assert map_state(GenSundman("1 + x^2", "exp(x)", (0.0, 1.0)), 0.4, 0.0)[1] == 0.0


def test_transform_validation():
    with pytest.raises(ValueError):
        GenSundman("x - 1", "x", (0.5, 2.0))
    with pytest.raises(ValueError):
        GenSundman("1", "(x - 1)^2", (0.5, 2.0))


def test_compose_rejects_disjoint_domains():
    with pytest.raises(ValueError):
        compose(GenSundman("1", "x", (10.0, 11.0)), GenSundman("1", "x", (0.0, 1.0)))


# --- linearisation -------------------------------------------------------------

BASE = RunConfig(base_point=1.0)


def test_ermakov_is_unit_forcing():
    out = linearize(QuadraticSode("2/x", "0", "omega^2/x^3", (0.3, 3.0), {"omega": 1.0}), BASE)
    assert isinstance(out, UnitForcing)
    xs = grid((0.3, 3.0), 32)
    assert np.allclose(values(out.transform.h, xs), 1 / xs, rtol=1e-12)
    assert np.allclose(values(out.transform.phi, xs), (xs**2 - 1) / 2, rtol=1e-10, atol=1e-12)
    assert out.target() == (0.0, 0.0, 1.0)


def test_power_law_friction_is_linear():
    out = linearize(QuadraticSode("1/x", "x", "1/2", (0.5, 3.0)), BASE)
    assert isinstance(out, Linear)
    assert out.alpha == 1.0
    assert out.B == pytest.approx(0.0, abs=1e-9)
    assert out.C == pytest.approx(0.5, abs=1e-9)
    xs = grid((0.5, 3.0), 16)
    assert np.allclose(values(out.transform.phi, xs), (xs**3 - 1) / 3, atol=1e-12)
    assert np.allclose(values(out.transform.h, xs), xs)


def test_cubic_forcing_is_linear():
    # b2 = b / x^2 = k1 x + k2/x^2 = 3 k1 y + k2 with y = x^3/3 - 1/3 shifted
    out = linearize(QuadraticSode("1/x", "x", "k1*x^3 + k2", (0.5, 3.0), {"k1": 2.0, "k2": -1.0}), BASE)
    assert isinstance(out, Linear)
    assert out.B == pytest.approx(6.0, rel=1e-9)


def test_quintic_perturbation_is_not_linearisable():
    cfg = RunConfig()
    out = linearize(QuadraticSode("1/x", "x", "1/2 + 0.01*x^5", (0.5, 3.0)), cfg)
    assert isinstance(out, NotLinearisable)
    assert out.q_residual > 10 * cfg.q_tol
    assert len(out.sample_points) == cfg.grid_n


def test_free_particle_case():
    out = linearize(QuadraticSode("1/x", "0", "0", (0.5, 2.0)), BASE)
    assert isinstance(out, FreeParticle)
    xs = grid((0.5, 2.0), 8)
    assert np.allclose(values(out.transform.h, xs), 1 / xs, rtol=1e-12)


def test_sign_change_is_reported_with_subinterval():
    with pytest.raises(SignChangeError) as info:
        linearize(QuadraticSode("0", "x - 1", "0", (0.5, 2.0)))
    lo, hi = info.value.subinterval
    assert lo <= 1.0 <= hi


def test_auto_split_pieces_share_base_point():
    s = normalize("2*v^2*cot(x) + sin(x)*cos(x)", (0.3, 2.8))
    pieces = linearize_pieces(s, RunConfig(base_point=math.pi / 2))
    assert len(pieces) == 2
    (d1, o1), (d2, o2) = pieces
    assert d1[1] == pytest.approx(math.pi / 2, abs=1e-10) == d2[0]
    assert isinstance(o1, UnitForcing) and isinstance(o2, UnitForcing)
    assert o1.normalization.base_point == o2.normalization.base_point


def test_base_point_outside_domain():
    with pytest.raises(ValueError):
        linearize(QuadraticSode("0", "1", "x", (0.5, 2.0)), RunConfig(base_point=5.0))


def test_constant_coefficients():
    out = linearize(QuadraticSode("0", "2", "1/2", (0.5, 2.0)), BASE)
    assert isinstance(out, Linear)
    assert (out.alpha, out.B, out.C) == (1.0, pytest.approx(0.0, abs=1e-12), pytest.approx(0.25))


def test_linear_input_is_recovered():
    # y = -(x - x0) and b2 = b/A, so 2x + 3 becomes 2y - 5
    out = linearize(QuadraticSode("0", "-1", "2*x + 3", (0.0, 2.0)), BASE)
    assert isinstance(out, Linear)
    assert out.q.residual == 0.0
    assert (out.alpha, out.B, out.C) == (-1.0, pytest.approx(2.0), pytest.approx(-5.0))


# --- serialization -------------------------------------------------------------

def test_document_roundtrip():
    s = QuadraticSode("1/x", "x", "k*x^3", (0.5, 3.0), {"k": 2.0})
    back = sode_from_document(json.dumps(sode_to_document(s)))
    assert coefficient_gap(back, s, grid(s.domain, 16)) < 1e-14


def test_document_parameter_override_and_errors():
    doc = {"gamma": "0", "A": "0", "b": "k*x", "domain": [1, 2], "params": {"k": 1}}
    assert sode_from_document(doc, {"k": 3.0}).b(1.5) == pytest.approx(4.5)
    from sundman.sode1d import DocumentError
    for bad in ({**doc, "extra": 1}, {**doc, "domain": [2, 1]}, {"X": "v", "A": "1", "domain": [0, 1]}, "{not json"):
        with pytest.raises(DocumentError):
            sode_from_document(bad)


def test_outcome_serialization():
    out = outcome_to_dict(linearize(QuadraticSode("1/x", "x", "1/2", (0.5, 3.0)), BASE))
    assert out["case"] == "Linear" and out["linearisable"]
    assert out["normalization"]["base_point"] == 1.0
    assert "q_diagnostics" in out
    json.dumps(out, allow_nan=False)
    record = out["transform"]["phi"]
    assert record["form"] in ("closed", "numeric")
    if record["form"] == "numeric":
        assert len(record["knots"]["x"]) == 256


# --- properties ----------------------------------------------------------------

@settings(max_examples=15, deadline=None)
@given(seeds)
def test_q_scales_by_h_to_the_minus_four(seed):
    rng = np.random.default_rng(seed)
    s, h = random_sode(rng), as_function(random_positive(rng), DOMAIN)
    xs = grid(s.domain, 32)
    q = values(q_invariant(s), xs)
    qh = values(q_invariant(apply_pure_sundman(s, h)), xs)
    assert np.max(np.abs(qh * values(h, xs) ** 4 - q)) <= 1e-7 * max(1.0, np.max(np.abs(q)))


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_q_scales_by_inverse_jacobian(seed):
    # derivatives in the new coordinate pick up 1/J while P is unchanged, so
    # Q = (A d/dx - 3A') P becomes Q / J
    rng = np.random.default_rng(seed)
    s, phi = random_sode(rng), as_function(random_monotone(rng), DOMAIN)
    xs = grid(s.domain, 32)
    ys, J = values(phi, xs), values(phi.derivative(), xs)
    moved = apply_coordinate_change(s, phi)
    q, p = values(q_invariant(s), xs), values(p_function(s), xs)
    assert np.max(np.abs(values(q_invariant(moved), ys) - q / J)) <= 1e-7 * max(1.0, np.max(np.abs(q / J)))
    assert np.max(np.abs(values(p_function(moved), ys) - p)) <= 1e-8 * max(1.0, np.max(np.abs(p)))


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_group_laws(seed):
    t1, t2, t3 = chained_triple(np.random.default_rng(seed))
    xs = grid(t1.domain, 16)
    a, b = compose(t3, compose(t2, t1)), compose(compose(t3, t2), t1)
    assert max_gap(values(a.h, xs), values(b.h, xs)) < 1e-9
    assert max_gap(values(a.phi, xs), values(b.phi, xs)) < 1e-9
    left = compose(inverse(t1), t1)
    assert max_gap(values(left.h, xs), 1.0) < 1e-9
    assert max_gap(values(left.phi, xs), xs) < 1e-9
    for order in (COORDINATE_FIRST, SUNDMAN_FIRST):
        p = product(*factorize(t1, order))
        assert max_gap(values(p.h, xs), values(t1.h, xs)) < 1e-10
        assert max_gap(values(p.phi, xs), values(t1.phi, xs)) < 1e-10


@settings(max_examples=8, deadline=None)
@given(seeds)
def test_composite_acts_like_successive_transforms(seed):
    rng = np.random.default_rng(seed)
    t1, t2, _ = chained_triple(rng)
    s = random_sode(rng, t1.domain)
    one = apply_transform(s, compose(t2, t1))
    two = apply_transform(apply_transform(s, t1), t2)
    assert coefficient_gap(one, two, grid(one.domain, 16)) < 1e-7


@settings(max_examples=10, deadline=None)
@given(seeds, st.sampled_from(["free", "forced", "linear"]))
def test_linearisation_is_sound(seed, kind):
    rng = np.random.default_rng(seed)
    k1, k2 = rng.uniform(-2, 2, size=2)
    gamma = f"{rng.uniform(0.2, 2):.3f}/x + {rng.uniform(-1, 1):.3f}*cos(x)"
    s = {
        "free": QuadraticSode(gamma, "0", "0", DOMAIN),
        "forced": QuadraticSode(gamma, "0", f"{rng.uniform(0.2, 2):.3f} + x^2", DOMAIN),
        "linear": QuadraticSode("1/x", "x", f"{k1:.3f}*x^3 + {k2:.3f}", DOMAIN),
    }[kind]
    out = linearize(s, RunConfig(base_point=1.0))
    assert isinstance(out, (FreeParticle, UnitForcing, Linear))
    moved = apply_transform(s, out.transform)
    ys = grid(moved.domain, 16)
    alpha, B, C = out.target()
    assert max_gap(values(moved.gamma, ys), 0.0) < 1e-6
    assert max_gap(values(moved.A, ys), alpha) < 1e-6
    assert max_gap(values(moved.b, ys), B * ys + C) < 1e-6


@settings(max_examples=10, deadline=None)
@given(st.sampled_from([-1.0, 1.0]), st.floats(-3, 3), st.floats(-3, 3))
def test_linear_class_is_fixed(alpha, B, C):
    out = linearize(QuadraticSode("0", alpha, f"({B!r})*x + ({C!r})", (0.0, 2.0)), RunConfig(base_point=0.0))
    assert isinstance(out, Linear)
    assert out.q.residual == 0.0
    assert out.alpha == alpha
    # y = alpha x, b2 = alpha b: the slope survives, the offset picks up alpha
    assert out.B == pytest.approx(B, abs=1e-9)
    assert out.C == pytest.approx(alpha * C, abs=1e-9)
