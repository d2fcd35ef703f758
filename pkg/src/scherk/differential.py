"""Minimal-surface operator, mean curvature and the Born-Infeld residual.

A height ``h(x, y)`` is minimal when

    (1 + h_y^2) h_xx - 2 h_x h_y h_xy + (1 + h_x^2) h_yy = 0.

Derivatives come from analytic providers when a :class:`HeightFunction` has
them, otherwise from 4th-order central differences with one Richardson level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import surface
from .errors import DerivativeUnavailable, EmptyGrid
from .surface import GrainAngle, Point, Window

#: base step of the finite-difference fallback
FD_STEP = 1e-3


@dataclass(frozen=True)
class HeightFunction:
    """Vectorised height ``value(x, y)`` with optional analytic derivatives.

    ``gradient`` returns ``(h_x, h_y)``, ``hessian`` returns ``(h_xx, h_xy, h_yy)``,
    ``core_distance`` the distance to the nearest singular point and
    ``core_ys(ylo, yhi)`` the y coordinates of the singular points on the
    line ``x = 0`` inside ``[ylo, yhi]`` (used by the energy quadrature).
    """

    value: Callable
    gradient: Optional[Callable] = None
    hessian: Optional[Callable] = None
    core_distance: Optional[Callable] = None
    name: str = "h"
    core_ys: Optional[Callable] = None

    @property
    def analytic(self) -> bool:
        return self.gradient is not None and self.hessian is not None


# ---------------------------------------------------------------------------
# stock height functions


def scherk_function(g: GrainAngle, sheet: int = 0) -> HeightFunction:
    a = g.alpha
    return HeightFunction(
        value=lambda x, y: surface.scherk_z(x, y, a, sheet),
        gradient=lambda x, y: surface.scherk_grad(x, y, a),
        hessian=lambda x, y: surface.scherk_hess(x, y, a),
        core_distance=lambda x, y: surface.core_distance(x, y, a),
        name=f"scherk(alpha={a!r})",
        core_ys=lambda lo, hi: lattice_points(0.0, g.ell, lo, hi),
    )


def helicoid_function(sheet: int = 0) -> HeightFunction:
    return HeightFunction(
        value=lambda x, y: surface.helicoid_z(x, y, sheet),
        gradient=surface.helicoid_grad,
        hessian=surface.helicoid_hess,
        core_distance=lambda x, y: np.hypot(x, y),
        name="helicoid",
        core_ys=lambda lo, hi: lattice_points(0.0, math.inf, lo, hi),
    )


def plane_function(a: float, b: float, c: float = 0.0) -> HeightFunction:
    def grad(x, y):
        shape = np.broadcast(np.asarray(x), np.asarray(y)).shape
        return np.full(shape, float(a)), np.full(shape, float(b))

    def hess(x, y):
        shape = np.broadcast(np.asarray(x), np.asarray(y)).shape
        return np.zeros(shape), np.zeros(shape), np.zeros(shape)

    return HeightFunction(lambda x, y: a * np.asarray(x, float) + b * np.asarray(y, float) + c,
                          grad, hess, name=f"plane({a}, {b}, {c})")


def dilated_helicoid_function(g: GrainAngle, n: int = 0) -> HeightFunction:
    """Single term ``arctan((y - n ell) / (x cos(alpha/2))) - pi/2`` of the helicoid series."""
    c = math.cos(g.half)
    y0 = n * g.ell

    def value(x, y):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.arctan((np.asarray(y, float) - y0) / (c * np.asarray(x, float))) - 0.5 * math.pi

    def grad(x, y):
        X = c * np.asarray(x, float)
        Y = np.asarray(y, float) - y0
        r2 = X * X + Y * Y
        return -c * Y / r2, X / r2

    def hess(x, y):
        X = c * np.asarray(x, float)
        Y = np.asarray(y, float) - y0
        r4 = (X * X + Y * Y) ** 2
        return c * c * 2 * X * Y / r4, c * (Y * Y - X * X) / r4, -2 * X * Y / r4

    return HeightFunction(value, grad, hess,
                          core_distance=lambda x, y: np.hypot(x, np.asarray(y, float) - y0),
                          name=f"dilated_helicoid(alpha={g.alpha!r}, n={n})",
                          core_ys=lambda lo, hi: lattice_points(y0, math.inf, lo, hi))


def lattice_points(origin: float, spacing: float, lo: float, hi: float) -> np.ndarray:
    """Points ``origin + k * spacing`` inside ``[lo, hi]``; a single point if spacing is inf."""
    if math.isinf(spacing):
        return np.array([origin]) if lo <= origin <= hi else np.empty(0)
    k0 = math.ceil((lo - origin) / spacing)
    k1 = math.floor((hi - origin) / spacing)
    return origin + spacing * np.arange(k0, k1 + 1, dtype=float)


# ---------------------------------------------------------------------------
# finite differences


def d1(f: Callable, x, h: float):
    """4th-order central first derivative of a 1-D callable."""
    return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h)


def d2(f: Callable, x, h: float):
    """4th-order central second derivative of a 1-D callable."""
    return (-f(x - 2 * h) + 16 * f(x - h) - 30 * f(x) + 16 * f(x + h) - f(x + 2 * h)) / (12 * h * h)


def _richardson(op, h):
    return (16.0 * op(0.5 * h) - op(h)) / 15.0


def fd_gradient(value: Callable, x, y, step: float = FD_STEP, richardson: bool = True):
    def gx(s):
        return d1(lambda t: value(t, y), x, s)

    def gy(s):
        return d1(lambda t: value(x, t), y, s)

    if richardson:
        return _richardson(gx, step), _richardson(gy, step)
    return gx(step), gy(step)


def fd_hessian(value: Callable, x, y, step: float = FD_STEP, richardson: bool = True):
    def hxx(s):
        return d2(lambda t: value(t, y), x, s)

    def hyy(s):
        return d2(lambda t: value(x, t), y, s)

    def hxy(s):
        return d1(lambda t: d1(lambda u: value(u, t), x, s), y, s)

    if richardson:
        return _richardson(hxx, step), _richardson(hxy, step), _richardson(hyy, step)
    return hxx(step), hxy(step), hyy(step)


def derivatives(h: HeightFunction, x, y, step: float = FD_STEP):
    """``(h_x, h_y, h_xx, h_xy, h_yy)`` from the analytic providers or by FD."""
    if h.gradient is not None:
        hx, hy = h.gradient(x, y)
    else:
        hx, hy = fd_gradient(h.value, x, y, step)
    if h.hessian is not None:
        hxx, hxy, hyy = h.hessian(x, y)
    else:
        hxx, hxy, hyy = fd_hessian(h.value, x, y, step)
    return hx, hy, hxx, hxy, hyy


def minimal_operator(hx, hy, hxx, hxy, hyy):
    return (1 + hy * hy) * hxx - 2 * hx * hy * hxy + (1 + hx * hx) * hyy


def _require_regular(h: HeightFunction, p: Point, radius: float):
    if h.core_distance is not None and float(h.core_distance(p.x, p.y)) <= radius:
        raise DerivativeUnavailable(f"{p} is within {radius} of a singular point of {h.name}")


def minimal_residual(h: HeightFunction, p: Point, exclusion_radius: float = surface.NEAR_CORE_RADIUS,
                     step: float = FD_STEP) -> float:
    _require_regular(h, p, exclusion_radius)
    return float(minimal_operator(*derivatives(h, p.x, p.y, step)))


def mean_curvature(h: HeightFunction, p: Point, exclusion_radius: float = surface.NEAR_CORE_RADIUS,
                   step: float = FD_STEP) -> float:
    """``H = residual / (2 W^3)`` with ``W = sqrt(1 + |grad h|^2)``."""
    _require_regular(h, p, exclusion_radius)
    hx, hy, hxx, hxy, hyy = derivatives(h, p.x, p.y, step)
    w = math.sqrt(1.0 + float(hx) ** 2 + float(hy) ** 2)
    return float(minimal_operator(hx, hy, hxx, hxy, hyy)) / (2.0 * w ** 3)


def mean_curvature_divergence(h: HeightFunction, p: Point, step: float = FD_STEP) -> float:
    """Independent route: ``H = div(grad h / W) / 2`` by differencing the unit flux."""

    def grad(x, y):
        if h.gradient is not None:
            return h.gradient(x, y)
        return fd_gradient(h.value, x, y, step)

    def flux(x, y, comp):
        hx, hy = grad(x, y)
        w = np.sqrt(1.0 + hx * hx + hy * hy)
        return (hx if comp == 0 else hy) / w

    def div(s):
        return d1(lambda t: flux(t, p.y, 0), p.x, s) + d1(lambda t: flux(p.x, t, 1), p.y, s)

    return 0.5 * float(_richardson(div, step))


# ---------------------------------------------------------------------------
# batch survey


@dataclass(frozen=True)
class ResidualReport:
    """Residuals on a grid in row-major order (y outer, x inner).

    Excluded nodes keep their place with ``residual = nan`` and
    ``excluded[i] = True``.
    """

    x: np.ndarray
    y: np.ndarray
    residuals: np.ndarray
    excluded: np.ndarray
    max_abs: float
    rms: float
    method: str

    @property
    def n_excluded(self) -> int:
        return int(self.excluded.sum())

    @property
    def points(self) -> list[Point]:
        return [Point(float(a), float(b)) for a, b in zip(self.x, self.y)]


def grid_nodes(window: Window, nx: int, ny: int):
    """Row-major node coordinates: index ``j * nx + i`` is ``(x_i, y_j)``."""
    if nx < 2 or ny < 2:
        raise EmptyGrid(f"grid needs at least 2x2 nodes, got {nx}x{ny}")
    xs = np.linspace(window.xmin, window.xmax, nx)
    ys = np.linspace(window.ymin, window.ymax, ny)
    X, Y = np.meshgrid(xs, ys)
    return X.ravel(), Y.ravel()


def residual_survey(h: HeightFunction, window: Window, grid: tuple[int, int],
                    g: Optional[GrainAngle] = None,
                    exclusion_radius: float = surface.NEAR_CORE_RADIUS,
                    step: float = FD_STEP) -> ResidualReport:
    """Minimal-surface residual at every grid node away from cores.

    Cores are those of ``h.core_distance`` and, when ``g`` is given, the
    Scherk cores of that angle.
    """
    nx, ny = grid
    x, y = grid_nodes(window, nx, ny)
    dist = np.full(x.shape, np.inf)
    if h.core_distance is not None:
        dist = np.minimum(dist, h.core_distance(x, y))
    if g is not None:
        dist = np.minimum(dist, surface.core_distance(x, y, g.alpha))
    excluded = dist <= exclusion_radius
    if excluded.all():
        raise EmptyGrid("every grid node lies within the core exclusion radius")
    keep = ~excluded
    res = np.full(x.shape, np.nan)
    with np.errstate(all="ignore"):
        res[keep] = minimal_operator(*derivatives(h, x[keep], y[keep], step))
    vals = res[keep]
    return ResidualReport(
        x, y, res, excluded,
        max_abs=float(np.max(np.abs(vals))),
        rms=float(np.sqrt(np.mean(vals * vals))),
        method="analytic" if h.analytic else f"fd({step:g})",
    )


# ---------------------------------------------------------------------------
# Born-Infeld


@dataclass(frozen=True)
class TravelingWaveProfile:
    """Profile ``f`` with two derivatives; the wave is ``f(x + direction * t)``."""

    f: Callable
    df: Callable
    d2f: Callable
    direction: int = -1
    name: str = "f"

    def __post_init__(self):
        if self.direction not in (-1, 1):
            raise ValueError("direction must be +1 (f(x+t)) or -1 (f(x-t))")

    def __call__(self, x, t):
        return self.f(x + self.direction * t)

    def derivatives(self, x, t):
        s = x + self.direction * t
        d, dd = self.df(s), self.d2f(s)
        c = self.direction
        return d, c * d, dd, c * dd, dd


def standard_profiles(direction: int = -1) -> dict[str, TravelingWaveProfile]:
    """The sin, tanh and cubic profiles used by the checks."""

    def sech2(s):
        return 1.0 / np.cosh(s) ** 2

    return {
        "sin": TravelingWaveProfile(np.sin, np.cos, lambda s: -np.sin(s), direction, "sin"),
        "tanh": TravelingWaveProfile(np.tanh, sech2, lambda s: -2 * np.tanh(s) * sech2(s),
                                     direction, "tanh"),
        "cubic": TravelingWaveProfile(lambda s: s ** 3 - 0.5 * s, lambda s: 3 * s ** 2 - 0.5,
                                      lambda s: 6 * s, direction, "cubic"),
    }


def born_infeld_operator(px, pt, pxx, pxt, ptt):
    return (1 - pt * pt) * pxx + 2 * px * pt * pxt - (1 + px * px) * ptt


def born_infeld_residual(phi, x: float, t: float, step: float = FD_STEP) -> float:
    """``(1 - phi_t^2) phi_xx + 2 phi_x phi_t phi_xt - (1 + phi_x^2) phi_tt``.

    ``phi`` is either an object with ``derivatives(x, t)`` returning
    ``(phi_x, phi_t, phi_xx, phi_xt, phi_tt)`` or a plain callable
    ``phi(x, t)``, differenced numerically.
    """
    if hasattr(phi, "derivatives"):
        parts = phi.derivatives(x, t)
    elif callable(phi):
        px, pt = fd_gradient(phi, x, t, step)
        pxx, pxt, ptt = fd_hessian(phi, x, t, step)
        parts = (px, pt, pxx, pxt, ptt)
    else:
        raise DerivativeUnavailable(f"cannot differentiate {phi!r}")
    r = born_infeld_operator(*parts)
    if not np.all(np.isfinite(r)):
        raise DerivativeUnavailable(f"non-finite derivatives at ({x}, {t})")
    return float(r) if np.ndim(r) == 0 else r


def born_infeld_batch(samples: int = 50, seed: int = 20000816, span: float = 3.0) -> dict:
    """Max |residual| for every standard profile in both directions."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(-span, span, samples)
    t = rng.uniform(-span, span, samples)
    out = {}
    for direction in (-1, 1):
        for name, prof in standard_profiles(direction).items():
            r = born_infeld_residual(prof, x, t)
            out[f"{name}({'x-t' if direction < 0 else 'x+t'})"] = float(np.max(np.abs(r)))
    return out
