import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from scherk import identities as ident
from scherk.errors import CorePoint, InvalidPair, LogBranchPoint, PoleError
from scherk.identities import ComplexPoint, DecompositionSpec, IdentityPoint
from scherk.surface import GrainAngle, Point, scherk_z

# 60-digit mpmath values
RAMANUJAN_1_1 = 0.454820233309949904781376
# symmetric partial sum minus closed form at (a, b) = (1, 1)
PARTIAL_ERR_1_1 = {100: 0.0020163253274808738507, 1000: 0.00020254107987475377779}
BETA_TILDE_2_PI3 = 0.4478323969289324860111327


# ---------------------------------------------------------------------------
# Ramanujan series


def test_ramanujan_lhs_values():
    assert ident.ramanujan_lhs(IdentityPoint(0.0, 1.0)) == 0.0
    assert ident.ramanujan_lhs(IdentityPoint(1.0, math.pi / 2)) == pytest.approx(0.0, abs=1e-16)
    assert ident.ramanujan_lhs(IdentityPoint(1.0, 1.0)) == pytest.approx(RAMANUJAN_1_1, abs=1e-15)


@pytest.mark.parametrize("b", [0.0, math.pi, -2 * math.pi])
def test_ramanujan_poles(b):
    with pytest.raises(PoleError):
        ident.ramanujan_lhs(IdentityPoint(1.0, b))
    with pytest.raises(PoleError):
        ident.ramanujan_partial_sum(IdentityPoint(1.0, b), 10)


def test_zero_amplitude_series():
    rep = ident.ramanujan_partial_sum(IdentityPoint(0.0, 1.0), 50)
    assert rep.value == 0.0 and rep.tail_bound == 0.0 and rep.converged


@pytest.mark.parametrize("pairs", sorted(PARTIAL_ERR_1_1))
def test_partial_sum_against_high_precision(pairs):
    q = IdentityPoint(1.0, 1.0)
    rep = ident.ramanujan_partial_sum(q, pairs)
    assert rep.value - RAMANUJAN_1_1 == pytest.approx(PARTIAL_ERR_1_1[pairs], abs=1e-14)
    assert abs(rep.value - ident.ramanujan_lhs(q)) <= rep.tail_bound
    assert rep.pairs == pairs
    assert not rep.converged  # the 1e-5 default needs ~2e4 pairs here


def test_partial_sum_mpmath_cross_check():
    mp.mp.dps = 50
    a, b, n = 0.7, 2.3, 300
    exact = mp.atan(mp.mpf(a) / b) + mp.fsum(mp.atan(a / (b + k * mp.pi)) + mp.atan(a / (b - k * mp.pi))
                                            for k in range(1, n + 1))
    assert ident.ramanujan_partial_sum(IdentityPoint(a, b), n).value == pytest.approx(float(exact), abs=1e-15)


def test_partial_sum_error_halves_when_pairs_double():
    q = IdentityPoint(1.0, 1.0)
    lhs = ident.ramanujan_lhs(q)
    for n in (100, 200, 400):
        e1 = abs(ident.ramanujan_partial_sum(q, n).value - lhs)
        e2 = abs(ident.ramanujan_partial_sum(q, 2 * n).value - lhs)
        assert 0.4 <= e2 / e1 <= 0.6


def test_tail_bound_monotone_and_vanishing():
    bounds = [ident.ramanujan_tail_bound(2.0, 2.5, n) for n in (1, 2, 5, 10, 100, 10**4, 10**6)]
    assert all(b2 <= b1 for b1, b2 in zip(bounds, bounds[1:]))
    assert bounds[-1] < 1e-5
    assert ident.ramanujan_tail_bound(1.0, 5.0, 1) == math.inf


def test_converged_flag_follows_tolerance():
    q = IdentityPoint(0.5, 0.5)
    rep = ident.ramanujan_partial_sum(q, 20000, tol=1e-5)
    assert rep.converged == (rep.tail_bound <= 1e-5)
    assert ident.ramanujan_partial_sum(q, 20000, tol=1.0).converged


@settings(max_examples=150, deadline=None)
@given(st.floats(-3, 3), st.floats(0.1, math.pi - 0.1), st.integers(1, 3000))
def test_tail_bound_is_sound(a, b, pairs):
    q = IdentityPoint(a, b)
    rep = ident.ramanujan_partial_sum(q, pairs)
    assert abs(rep.value - ident.ramanujan_lhs(q)) <= rep.tail_bound


# ---------------------------------------------------------------------------
# helicoid decomposition (difference form)


def test_theorem1_identical_points():
    g = GrainAngle(1.0)
    p = Point(1.0, 0.5)
    assert ident.theorem1_difference_check(p, p, g, 10) == 0.0


def test_theorem1_example_and_rate():
    g = GrainAngle(1.0)
    p, r = Point(1.0, 0.5), Point(1.0, 0.1)
    errs = [ident.theorem1_difference_check(p, r, g, n) for n in (500, 1000, 2000)]
    assert errs[-1] <= 1e-3
    for e1, e2 in zip(errs, errs[1:]):
        assert 0.4 <= e2 / e1 <= 0.6


def test_theorem1_right_angle_rate():
    g = GrainAngle(math.pi / 2)
    p, r = Point(0.5, 1.0), Point(2.0, 1.0)
    errs = [ident.theorem1_difference_check(p, r, g, n) for n in (500, 1000, 2000)]
    for e1, e2 in zip(errs, errs[1:]):
        assert e2 / e1 == pytest.approx(0.5, abs=0.05)
    slope = -np.polyfit(np.log([500, 1000, 2000]), np.log(errs), 1)[0]
    assert slope >= 0.9


def test_theorem1_left_half_plane():
    g = GrainAngle(1.0)
    p, r = Point(-1.0, 0.5), Point(-2.0, 1.5)
    assert ident.theorem1_difference_check(p, r, g, 4000) <= 1e-3


@pytest.mark.parametrize("p,r", [
    (Point(1.0, 0.5), Point(-1.0, 0.5)),       # opposite half-planes
    (Point(0.0, 0.5), Point(1.0, 0.5)),        # on the core line
    (Point(1.0, 0.5), Point(1.0, -0.5)),       # different branch cells
])
def test_theorem1_invalid_pairs(p, r):
    with pytest.raises(InvalidPair):
        ident.theorem1_difference_check(p, r, GrainAngle(1.0), 10)


# ---------------------------------------------------------------------------
# finite decomposition


def test_spec_angles():
    s = DecompositionSpec(2, math.pi / 3)
    assert s.beta_tilde == pytest.approx(BETA_TILDE_2_PI3, abs=1e-15)
    assert math.sin(s.beta) == pytest.approx(2 * math.sin(s.beta_tilde), rel=1e-15)
    assert s.sub_ell == pytest.approx(2 * s.ell, rel=1e-14)
    assert list(s.offsets) == [0, 1]
    assert DecompositionSpec(1, 0.9).beta_tilde == 0.9
    for bad in [(0, 0.5), (2, 0.0), (2, math.pi / 2), (1.5, 0.5)]:
        with pytest.raises(ValueError):
            DecompositionSpec(*bad)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.05, 1.5), st.floats(-5, 5), st.floats(-5, 5))
def test_theorem2_order_one_is_trivial(beta, x, y):
    spec = DecompositionSpec(1, beta)
    assume(math.hypot(x, math.remainder(y, spec.ell)) > 1e-3)
    assert ident.theorem2_residual(Point(x, y), spec).exact_error <= 1e-14
    assert ident.theorem2_gradient_check(Point(x, y), spec) <= 1e-14


def test_theorem2_examples():
    spec = DecompositionSpec(2, math.pi / 3)
    p = Point(0.3, 0.2)
    assert ident.in_central_cell(p, spec)
    assert ident.theorem2_residual(p, spec).exact_error <= 1e-12
    r = ident.theorem2_residual(Point(1.5, 2.7), DecompositionSpec(3, 1.0))
    assert r.mod_constant_error <= 1e-10
    assert ident.theorem2_gradient_check(Point(2.0, 3.0), DecompositionSpec(5, 0.7)) <= 1e-9


def test_theorem2_sides_against_direct_evaluation():
    # both sides written out independently of the module helpers
    beta = 1.0
    bt = math.asin(math.sin(beta) / 2)
    x, y = 0.4, 0.3
    lhs = float(scherk_z(x / math.cos(beta), y, 2 * beta))
    rhs = (math.cos(bt) / math.cos(beta)) * (
        float(scherk_z(x / math.cos(bt), y, 2 * bt))
        + float(scherk_z(x / math.cos(bt), y + 0.5 * math.pi / math.sin(bt), 2 * bt)))
    assert lhs == pytest.approx(rhs, abs=1e-13)


def test_theorem2_gradients_match_finite_differences():
    spec = DecompositionSpec(3, 0.9)
    (lx, ly), (rx, ry) = ident.theorem2_gradients(1.1, 0.7, spec)
    h = 1e-5
    f = lambda x, y: float(scherk_z(x / math.cos(spec.beta), y, 2 * spec.beta))
    fx = (f(1.1 + h, 0.7) - f(1.1 - h, 0.7)) / (2 * h)
    fy = (f(1.1, 0.7 + h) - f(1.1, 0.7 - h)) / (2 * h)
    assert (lx, ly) == pytest.approx((fx, fy), abs=1e-8)
    assert (rx, ry) == pytest.approx((fx, fy), abs=1e-8)


def test_theorem2_core_point():
    spec = DecompositionSpec(2, 0.5)
    with pytest.raises(CorePoint):
        ident.theorem2_gradient_check(Point(0.0, spec.ell), spec)


@settings(max_examples=300, deadline=None)
@given(st.sampled_from([1, 2, 3, 4, 5]), st.floats(0.05, 1.5), st.floats(-5, 5), st.floats(-5, 5))
def test_theorem2_property(n, beta, x, y):
    spec = DecompositionSpec(n, beta)
    assume(math.hypot(x / math.cos(beta), math.remainder(y, spec.ell)) > 1e-2)
    p = Point(x, y)
    assert ident.theorem2_gradient_check(p, spec) <= 1e-9
    r = ident.theorem2_residual(p, spec)
    assert r.mod_constant_error <= 1e-10
    if ident.in_central_cell(p, spec):
        assert r.exact_error <= 1e-12


def test_theorem2_batch_is_seeded():
    spec = DecompositionSpec(2, math.pi / 3)
    a = ident.theorem2_batch(spec, 50)
    b = ident.theorem2_batch(spec, 50)
    assert a == b
    assert a["max_gradient_error"] <= 1e-10
    assert a["central_cell_samples"] > 0


# ---------------------------------------------------------------------------
# supporting identities


def test_imag_log_sin_examples():
    assert ident.imag_log_sin_check(ComplexPoint(math.pi / 2, 0.0)) == 0.0
    assert ident.imag_log_sin_check(ComplexPoint(1.0, 1.0)) <= 1e-13
    assert ident.imag_log_sin_check(ComplexPoint(0.3, -2.0)) <= 1e-13
    with pytest.raises(LogBranchPoint):
        ident.imag_log_sin_check(ComplexPoint(0.0, 0.0))


def test_imag_log_sin_against_mpmath():
    mp.mp.dps = 50
    for re, im in [(1.0, 1.0), (0.3, -2.0), (2.5, 0.7)]:
        lhs = mp.atan(mp.tanh(im) / mp.tan(re))
        rhs = mp.im(mp.log(mp.sin(mp.mpc(re, im))))
        d = lhs - rhs
        assert abs(d - mp.pi * mp.nint(d / mp.pi)) < mp.mpf(10) ** -40
        assert ident.imag_log_sin_check(ComplexPoint(re, im)) <= 1e-13


def test_sine_product_examples():
    assert ident.sine_product_check(ComplexPoint(0.4, 1.3), 1) == 0.0
    assert ident.sine_product_check(ComplexPoint(0.7, 0.3), 2) <= 1e-13
    assert ident.sine_product_check(ComplexPoint(1.2, -0.5), 4) <= 1e-12
    with pytest.raises(ValueError):
        ident.sine_product_check(ComplexPoint(1.0, 0.0), 0)


def test_sum_of_sums_examples():
    assert ident.sum_of_sums_check(IdentityPoint(1.0, 1.0), 1) == 0.0
    assert ident.sum_of_sums_check(IdentityPoint(1.0, 1.0), 2) <= 1e-12
    assert ident.sum_of_sums_check(IdentityPoint(0.5, 2.0), 3) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(st.floats(-3, 3), st.floats(0.1, math.pi - 0.1), st.sampled_from([1, 2, 3, 5]))
def test_sum_of_sums_property(a, b, n):
    assert ident.sum_of_sums_check(IdentityPoint(a, b), n) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.integers(1, 6))
def test_sine_product_property(re, im, n):
    assume(abs(math.sin(n * re)) + abs(im) > 1e-3)
    assert ident.sine_product_check(ComplexPoint(re, im), n) <= 1e-12


def test_samplers_are_deterministic():
    assert ident.identity_sample_points(5) == ident.identity_sample_points(5)
    assert ident.identity_sample_points(5, seed=1) != ident.identity_sample_points(5, seed=2)
    pts = ident.identity_sample_points(200)
    assert all(abs(q.a) <= 3 and 0.1 < q.b < math.pi - 0.1 for q in pts)
    g = GrainAngle(1.0)
    for p, r in ident.theorem1_sample_pairs(g, 50):
        assert p.x > 0.25 and r.x > 0.25
