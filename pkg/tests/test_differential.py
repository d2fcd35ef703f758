import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scherk import differential as diff
from scherk import surface
from scherk.differential import HeightFunction, TravelingWaveProfile
from scherk.errors import DerivativeUnavailable, EmptyGrid
from scherk.surface import GrainAngle, Point, Window


def paraboloid(analytic=True):
    value = lambda x, y: np.asarray(x, float) ** 2 + np.asarray(y, float) ** 2
    if not analytic:
        return HeightFunction(value, name="paraboloid-fd")
    grad = lambda x, y: (2 * np.asarray(x, float), 2 * np.asarray(y, float))
    hess = lambda x, y: (np.full(np.shape(x), 2.0), np.zeros(np.shape(x)), np.full(np.shape(x), 2.0))
    return HeightFunction(value, grad, hess, name="paraboloid")


def sin_cosh():
    return HeightFunction(
        lambda x, y: np.sin(x) * np.cosh(y),
        lambda x, y: (np.cos(x) * np.cosh(y), np.sin(x) * np.sinh(y)),
        lambda x, y: (-np.sin(x) * np.cosh(y), np.cos(x) * np.sinh(y), np.sin(x) * np.cosh(y)),
        name="sin*cosh")


def test_plane_residual_is_exactly_zero():
    h = diff.plane_function(0.3, -1.7, 2.0)
    for p in (Point(0, 0), Point(3.1, -2.2)):
        assert diff.minimal_residual(h, p) == 0.0
        assert diff.mean_curvature(h, p) == 0.0


@pytest.mark.parametrize("analytic", [True, False])
def test_paraboloid_residual(analytic):
    h = paraboloid(analytic)
    for x, y in [(0.0, 0.0), (0.5, -1.0), (1.3, 0.2)]:
        expected = 4 + 8 * x * x + 8 * y * y
        tol = 1e-12 if analytic else 1e-7
        assert diff.minimal_residual(h, Point(x, y)) == pytest.approx(expected, abs=tol)
    assert diff.mean_curvature(h, Point(0.0, 0.0)) == pytest.approx(2.0, abs=1e-8)


@pytest.mark.parametrize("h", [paraboloid(), sin_cosh()], ids=["paraboloid", "sin_cosh"])
def test_mean_curvature_consistency(h):
    for x, y in [(0.3, 0.4), (-1.1, 0.7), (0.9, -0.2)]:
        p = Point(x, y)
        hx, hy = (float(v) for v in h.gradient(x, y))
        w = math.sqrt(1 + hx * hx + hy * hy)
        assert diff.mean_curvature(h, p) == pytest.approx(diff.minimal_residual(h, p) / (2 * w ** 3), abs=1e-10)
        assert diff.mean_curvature_divergence(h, p) == pytest.approx(diff.mean_curvature(h, p), abs=1e-8)


def test_scherk_residual_point():
    g = GrainAngle(1.0)
    h = diff.scherk_function(g)
    assert abs(diff.minimal_residual(h, Point(1.0, g.ell / 3))) <= 1e-9
    assert abs(diff.mean_curvature(h, Point(1.0, g.ell / 3))) <= 1e-9
    fd = HeightFunction(h.value, core_distance=h.core_distance)
    assert abs(diff.minimal_residual(fd, Point(1.0, g.ell / 3))) <= 1e-6


def test_residual_near_core_unavailable():
    g = GrainAngle(1.0)
    h = diff.scherk_function(g)
    with pytest.raises(DerivativeUnavailable):
        diff.minimal_residual(h, Point(0.0, g.ell))
    with pytest.raises(DerivativeUnavailable):
        diff.mean_curvature(h, Point(1e-7, 0.0))
    assert math.isfinite(diff.minimal_residual(h, Point(1e-3, 0.0), exclusion_radius=1e-4))


def test_analytic_derivatives_vs_fourth_order_fd():
    alpha = 1.0
    x0, y0 = 1.0, 1.0
    hx, hy = surface.scherk_grad(x0, y0, alpha)
    hxx, _, _ = surface.scherk_hess(x0, y0, alpha)
    fx = lambda t: surface.scherk_z(t, y0, alpha)
    errs1 = [abs(diff.d1(fx, x0, s) - hx) for s in (0.1, 0.05)]
    errs2 = [abs(diff.d2(fx, x0, s) - hxx) for s in (0.1, 0.05)]
    assert math.log2(errs1[0] / errs1[1]) >= 3.5
    assert math.log2(errs2[0] / errs2[1]) >= 3.5
    gx, gy = diff.fd_gradient(lambda x, y: surface.scherk_z(x, y, alpha), x0, y0)
    assert (gx, gy) == pytest.approx((hx, hy), abs=1e-10)


def test_grid_node_order():
    x, y = diff.grid_nodes(Window(0, 1, 10, 11), 2, 2)
    assert list(zip(x, y)) == [(0, 10), (1, 10), (0, 11), (1, 11)]
    with pytest.raises(EmptyGrid):
        diff.grid_nodes(Window(0, 1, 0, 1), 1, 5)


def test_scherk_survey():
    g = GrainAngle(math.pi / 2)
    r = diff.residual_survey(diff.scherk_function(g), Window(-4, 4, 0, g.ell), (81, 81), g)
    assert r.max_abs <= 1e-8
    assert r.max_abs >= r.rms >= 0
    assert r.method == "analytic"
    # the two cores (0, 0) and (0, ell) are grid nodes; they are kept but flagged
    assert r.n_excluded == 2
    assert len(r.residuals) == 81 * 81
    assert np.all(np.isnan(r.residuals[r.excluded]))
    assert all(surface.core_distance(p.x, p.y, g.alpha) < 1e-6 for p in np.array(r.points)[r.excluded])


def test_helicoid_survey():
    r = diff.residual_survey(diff.helicoid_function(), Window(0.5, 4, 0.5, 4), (33, 33))
    assert r.max_abs <= 1e-10 and r.n_excluded == 0


def test_dilated_helicoid_is_not_minimal():
    g = GrainAngle(math.pi / 2)
    r = diff.residual_survey(diff.dilated_helicoid_function(g), Window(0.5, 4, 0.5, 4), (33, 33))
    assert r.max_abs > 1e-3


def test_fd_survey_method_label():
    g = GrainAngle(1.0)
    h = diff.scherk_function(g)
    fd = HeightFunction(h.value, core_distance=h.core_distance)
    r = diff.residual_survey(fd, Window(0.5, 3, 0.5, 3), (9, 9))
    assert r.method == "fd(0.001)" and r.max_abs <= 1e-6


def test_empty_survey():
    with pytest.raises(EmptyGrid):
        diff.residual_survey(diff.helicoid_function(), Window(-1e-8, 1e-8, -1e-8, 1e-8), (2, 2),
                             exclusion_radius=1e-6)


# ---------------------------------------------------------------------------
# Born-Infeld


def test_sin_wave():
    prof = diff.standard_profiles(-1)["sin"]
    x = np.linspace(-3, 3, 41)
    assert np.max(np.abs(diff.born_infeld_residual(prof, x, 0.7 * x + 0.1))) <= 1e-12


def test_cubic_wave():
    cube = TravelingWaveProfile(lambda s: s ** 3, lambda s: 3 * s ** 2, lambda s: 6 * s, +1, "cube")
    assert abs(diff.born_infeld_residual(cube, 0.3, 0.7)) <= 1e-10
    # numerical derivatives of the plain callable agree up to FD error
    assert abs(diff.born_infeld_residual(lambda x, t: (x + t) ** 3, 0.3, 0.7)) <= 1e-6


def test_non_wave_by_hand():
    phi = lambda x, t: x * x + t * t
    assert diff.born_infeld_residual(phi, 0.0, 0.0) == pytest.approx(0.0, abs=1e-8)
    assert diff.born_infeld_residual(phi, 1.0, 0.0) == pytest.approx(-8.0, abs=1e-7)


def test_profile_derivatives_match_fd():
    for direction in (-1, 1):
        for prof in diff.standard_profiles(direction).values():
            for s in (-1.3, 0.2, 2.1):
                assert prof.df(s) == pytest.approx(diff.d1(prof.f, s, 1e-3), abs=1e-8)
                assert prof.d2f(s) == pytest.approx(diff.d2(prof.f, s, 1e-3), abs=1e-8)
            x, t = 0.4, -0.9
            exact = prof.derivatives(x, t)
            px, pt = diff.fd_gradient(prof, x, t)
            pxx, pxt, ptt = diff.fd_hessian(prof, x, t)
            assert (px, pt, pxx, pxt, ptt) == pytest.approx(exact, abs=1e-7)


def test_profile_direction_validated():
    with pytest.raises(ValueError):
        TravelingWaveProfile(np.sin, np.cos, np.sin, direction=0)


def test_batch():
    out = diff.born_infeld_batch(50)
    assert len(out) == 6 and max(out.values()) <= 1e-10
    assert out == diff.born_infeld_batch(50)


def test_underivable_input():
    with pytest.raises(DerivativeUnavailable):
        diff.born_infeld_residual(3.0, 0.0, 0.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.sampled_from(["sin", "tanh", "cubic"]), st.sampled_from([-1, 1]))
def test_traveling_waves_property(x, t, name, direction):
    prof = diff.standard_profiles(direction)[name]
    assert abs(diff.born_infeld_residual(prof, x, t)) <= 1e-10
