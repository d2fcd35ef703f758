"""Variational probes of the Scherk grain boundary.

The energy is the area excess over the asymptotic planes,

    E = integral over the window of  sqrt(1 + |grad h|^2) - sec(alpha/2),

whose Euler-Lagrange equation is the minimal-surface equation, so Scherk's
surface is a critical point. Two families of deformations are scanned: the
power-law deformation ``h(sgn(x)|x|^gamma, y)`` and, for the order-2
decomposition, a rigid shift ``delta`` of one of the two sub-families of
defects.

Quadrature
----------
The window ``[-L, L] x [y0, y0 + P]`` is split into a central strip
``|x| <= strip * L``, where the integrand has 1/r core singularities and (for
gamma != 1) an |x|^(gamma-1) line singularity on ``x = 0``, and the smooth far
field. The strip is integrated with Gauss-Legendre panels graded geometrically
toward ``x = 0`` and toward every core; the far field uses composite Simpson
with ``nx x ny`` nodes, so refinement studies in ``(nx, ny)`` measure the
Simpson part only. Core disks of radius ``core_radius`` are integrated
separately in graded polar coordinates; their energy and area are reported
alongside the full-window total. The gradient field must be periodic in y with period dividing P.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

from . import quadrature as quad
from . import surface
from .differential import HeightFunction, fd_gradient, lattice_points, scherk_function
from .errors import BadBracket, NonFiniteEnergy
from .identities import DecompositionSpec
from .surface import GrainAngle, Window

log = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0

#: default radius of the excluded core disks
CORE_RADIUS = 0.05
#: geometric ratio of the graded Gauss panels in the strip and the disks
GRADING = 0.25


@dataclass(frozen=True)
class QuadratureSpec:
    """Window and composite-Simpson node counts for :func:`area_excess`."""

    window: Window
    nx: int = 129
    ny: int = 129
    core_radius: float = CORE_RADIUS
    strip: float = 0.5
    gauss_order: int = 10
    rule: str = field(default="composite Simpson", init=False)

    def __post_init__(self):
        for name in ("nx", "ny"):
            v = getattr(self, name)
            if v < 3 or v % 2 == 0:
                raise ValueError(f"{name} must be odd and >= 3, got {v}")
        if not math.isclose(self.window.xmin, -self.window.xmax, rel_tol=1e-12):
            raise ValueError("the x-range of the window must be symmetric, [-L, L]")
        if not 0.0 < self.strip < 1.0:
            raise ValueError("strip must be a fraction in (0, 1)")
        if not 0.0 <= self.core_radius:
            raise ValueError("core_radius must be non-negative")

    @classmethod
    def periodic(cls, g: GrainAngle, L: float, nx: int = 129, ny: Optional[int] = None,
                 periods: int = 1, centered: bool = False, **kw) -> "QuadratureSpec":
        """Window ``[-L, L] x [0, periods * ell]`` (or centred on ``y = 0``)."""
        height = periods * g.ell
        y0 = -0.5 * height if centered else 0.0
        return cls(Window(-L, L, y0, y0 + height), nx, nx if ny is None else ny, **kw)

    @property
    def L(self) -> float:
        return self.window.xmax

    @property
    def height(self) -> float:
        return self.window.ymax - self.window.ymin


@dataclass(frozen=True)
class EnergyReport:
    """Area excess over the full window, with the core-disk share broken out.

    ``energy`` includes the disks (integrated in polar coordinates);
    ``core_energy`` is their contribution, so ``outside_cores`` is the
    energy with the disks excluded.
    """

    energy: float
    core_energy: float
    core_area: float
    n_cores: int

    @property
    def outside_cores(self) -> float:
        return self.energy - self.core_energy


@dataclass(frozen=True)
class EnergyScan:
    parameter: str
    values: tuple
    energies: tuple
    quadrature: QuadratureSpec
    stationary_estimate: float
    derivative_at_reference: float
    reference: float
    core_energies: tuple = ()


# ---------------------------------------------------------------------------
# deformations


def gamma_deformed(h: HeightFunction, gamma: float) -> HeightFunction:
    """``h(sgn(x) |x|^gamma, y)``; gamma = 1 returns ``h`` itself."""
    if not gamma > 0.0:
        raise ValueError(f"gamma must be positive, got {gamma!r}")
    if gamma == 1.0:
        return h

    def warp(x):
        x = np.asarray(x, dtype=float)
        return np.sign(x) * np.abs(x) ** gamma

    def value(x, y):
        return h.value(warp(x), y)

    def gradient(x, y):
        x = np.asarray(x, dtype=float)
        hx, hy = h.gradient(warp(x), y)
        with np.errstate(divide="ignore"):
            return hx * gamma * np.abs(x) ** (gamma - 1.0), hy

    cd = None if h.core_distance is None else (lambda x, y: h.core_distance(warp(x), y))
    return HeightFunction(value, gradient, None, cd, f"{h.name}^gamma={gamma!r}", h.core_ys)


def dilated_scherk(g: GrainAngle, dilation: float, y_offset: float = 0.0,
                   scale: float = 1.0) -> HeightFunction:
    """``scale * h(dilation * x, y + y_offset; alpha)``."""
    a = g.alpha

    def value(x, y):
        return scale * surface.scherk_z(dilation * np.asarray(x, float), np.asarray(y, float) + y_offset, a)

    def gradient(x, y):
        hx, hy = surface.scherk_grad(dilation * np.asarray(x, float), np.asarray(y, float) + y_offset, a)
        return scale * dilation * hx, scale * hy

    return HeightFunction(value, gradient, None,
                          lambda x, y: surface.core_distance(dilation * np.asarray(x, float),
                                                             np.asarray(y, float) + y_offset, a),
                          f"{scale!r}*scherk(alpha={a!r})({dilation!r}x, y+{y_offset!r})",
                          lambda lo, hi: lattice_points(-y_offset, g.ell, lo, hi))


def superpose(parts: Sequence[HeightFunction], name: str = "sum") -> HeightFunction:
    def value(x, y):
        return sum(p.value(x, y) for p in parts)

    def gradient(x, y):
        gs = [p.gradient(x, y) for p in parts]
        return sum(g[0] for g in gs), sum(g[1] for g in gs)

    def core_distance(x, y):
        return np.minimum.reduce([p.core_distance(x, y) for p in parts])

    def core_ys(lo, hi):
        ys = np.concatenate([p.core_ys(lo, hi) for p in parts])
        return np.unique(ys)

    return HeightFunction(value, gradient, None, core_distance, name, core_ys)


def theorem2_lhs(spec: DecompositionSpec) -> HeightFunction:
    """``h(x sec(beta), y; 2 beta)``."""
    return dilated_scherk(GrainAngle(2 * spec.beta), 1.0 / math.cos(spec.beta))


def defect_shift(spec: DecompositionSpec, delta: float) -> HeightFunction:
    """Right side of the order-n decomposition with the last sub-family shifted by ``delta``.

    For ``n = 2`` this is
    ``(cos bt / cos b) [h(x sec bt, y; 2 bt) + h(x sec bt, y + pi csc(bt)/2 + delta; 2 bt)]``.
    """
    bt = spec.beta_tilde
    gt = GrainAngle(2 * bt)
    parts = []
    for m in spec.offsets:
        off = m * spec.sub_ell / spec.n
        if m == spec.n - 1 and m > 0:
            off += delta
        parts.append(dilated_scherk(gt, 1.0 / math.cos(bt), off, spec.prefactor))
    return superpose(parts, f"defect_shift(n={spec.n}, beta={spec.beta!r}, delta={delta!r})")


# ---------------------------------------------------------------------------
# area excess


def _integrand(h: HeightFunction, slope: float, x, y):
    """``sqrt(1 + |grad h|^2) - sqrt(1 + slope^2)`` in cancellation-free form."""
    if h.gradient is not None:
        hx, hy = h.gradient(x, y)
    else:
        hx, hy = fd_gradient(h.value, x, y)
    w = np.sqrt(1.0 + hx * hx + hy * hy)
    w0 = math.sqrt(1.0 + slope * slope)
    return (hx * hx + (hy - slope) * (hy + slope)) / (w + w0)


@lru_cache(maxsize=64)
def _strip_rule(xs: float, ybreaks: tuple, order: int):
    xb_right = quad.graded_breaks(0.0, xs, True, False, GRADING)
    xn, xw = quad.gauss_on_breaks(xb_right, order)
    xn = np.concatenate([-xn[::-1], xn])
    xw = np.concatenate([xw[::-1], xw])
    yn, yw = [], []
    for (lo, lo_core), (hi, hi_core) in zip(ybreaks[:-1], ybreaks[1:]):
        b = quad.graded_breaks(lo, hi, lo_core, hi_core, GRADING)
        n, w = quad.gauss_on_breaks(b, order)
        yn.append(n)
        yw.append(w)
    return quad.tensor(xn, xw, np.concatenate(yn), np.concatenate(yw))


@lru_cache(maxsize=16)
def _bulk_rule(xs: float, L: float, nx: int, y0: float, y1: float, ny: int):
    m = max(2, (nx - 1) // 2)
    m += m % 2
    xr, wr = quad.simpson_weights(xs, L, m)
    xn = np.concatenate([-xr[::-1], xr])
    xw = np.concatenate([wr[::-1], wr])
    yn, yw = quad.simpson_weights(y0, y1, ny - 1)
    return quad.tensor(xn, xw, yn, yw)


@lru_cache(maxsize=16)
def _disk_rule(radius: float, order: int):
    """Polar rule on the unit-centred disk, graded toward r = 0 and the line x = 0."""
    rb = quad.graded_breaks(0.0, radius, True, False, GRADING)
    rn, rw = quad.gauss_on_breaks(rb, order)
    half = 0.5 * math.pi
    tb = np.concatenate([
        quad.graded_breaks(-math.pi, -half, False, True, GRADING, hmax=0.5),
        quad.graded_breaks(-half, half, True, True, GRADING, hmax=0.5)[1:],
        quad.graded_breaks(half, math.pi, True, False, GRADING, hmax=0.5)[1:],
    ])
    tn, tw = quad.gauss_on_breaks(tb, order)
    R, T, W = quad.tensor(rn, rw, tn, tw)
    return R * np.cos(T), R * np.sin(T), W * R


def _core_ys(h: HeightFunction, lo: float, hi: float) -> np.ndarray:
    if h.core_ys is None:
        return np.empty(0)
    return np.asarray(h.core_ys(lo, hi), dtype=float)


def _checked_sum(vals, weights, what):
    if not np.all(np.isfinite(vals)):
        raise NonFiniteEnergy(f"non-finite area integrand in the {what}")
    return quad.reduce_sum(vals, weights)


def area_excess_report(h: HeightFunction, g: GrainAngle, q: QuadratureSpec) -> EnergyReport:
    """Area excess of ``h`` over the window of ``q``.

    The returned ``energy`` covers the whole window; the share of the core
    disks is reported separately. Excluding the disks outright would leave a
    circle boundary term in every deformation derivative that does not decay
    with ``L``.
    """
    periods = q.height / g.ell
    if abs(periods - round(periods)) > 1e-9 or round(periods) < 1:
        raise ValueError(f"window height {q.height!r} is not a whole number of periods "
                         f"ell={g.ell!r}")
    slope = math.tan(g.half)
    y0, y1 = q.window.ymin, q.window.ymax
    L = q.L
    xs = q.strip * L

    cores = _core_ys(h, y0, y1)
    tol = 1e-12 * max(1.0, abs(y0), abs(y1))
    inner = cores[(cores > y0 + tol) & (cores < y1 - tol)]
    ybreaks = [(y0, bool(np.any(np.abs(cores - y0) <= tol)))]
    ybreaks += [(float(c), True) for c in inner]
    ybreaks.append((y1, bool(np.any(np.abs(cores - y1) <= tol))))

    X, Y, W = _strip_rule(xs, tuple(ybreaks), q.gauss_order)
    with np.errstate(all="ignore"):
        strip = _checked_sum(_integrand(h, slope, X, Y), W, "core strip")
    X, Y, W = _bulk_rule(xs, L, q.nx, y0, y1, q.ny)
    with np.errstate(all="ignore"):
        bulk = _checked_sum(_integrand(h, slope, X, Y), W, "far field")
    full = math.fsum([strip, bulk])

    # one disk per core modulo the period
    distinct = cores[cores < y1 - tol]
    core_energy = 0.0
    if q.core_radius > 0.0 and distinct.size:
        dx, dy, dw = _disk_rule(q.core_radius, q.gauss_order)
        parts = []
        for yc in distinct:
            with np.errstate(all="ignore"):
                parts.append(_checked_sum(_integrand(h, slope, dx, yc + dy), dw, "core disk"))
        core_energy = math.fsum(parts)
    area = distinct.size * math.pi * q.core_radius ** 2
    return EnergyReport(full, core_energy, area, int(distinct.size))


def area_excess(h: HeightFunction, g: GrainAngle, q: QuadratureSpec) -> float:
    return area_excess_report(h, g, q).energy


# ---------------------------------------------------------------------------
# one-dimensional minimisation


def minimize_1d(f: Callable[[float], float], bracket: tuple[float, float], tol: float = 1e-6) -> float:
    """Golden-section search for the minimiser of a unimodal ``f`` on ``bracket``.

    Ties between the two probes keep the central interval, so the result
    stays centred on a flat (rounding-limited) minimum.
    """
    lo, hi = map(float, bracket)
    if not lo < hi:
        raise BadBracket(f"bracket must satisfy lo < hi, got {bracket}")
    a, b = lo, hi
    h = b - a
    c, d = a + INV_PHI2 * h, a + INV_PHI * h
    fc, fd = f(c), f(d)
    fa, fb = f(a), f(b)
    if fa < min(fc, fd) and fb < min(fc, fd):
        raise BadBracket(f"both ends of {bracket} lie below the interior probes; f is not unimodal")
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = a + INV_PHI2 * (b - a)
            fc = f(c)
        elif fc > fd:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
        else:
            a, b = c, d
            c, d = a + INV_PHI2 * (b - a), a + INV_PHI * (b - a)
            fc, fd = f(c), f(d)
    return 0.5 * (a + b)


# ---------------------------------------------------------------------------
# scans


def _map(fn, values, threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, values))
    return [fn(v) for v in values]


def _refine(fn, values, energies, tol):
    i = int(np.argmin(energies))
    lo = values[max(i - 1, 0)]
    hi = values[min(i + 1, len(values) - 1)]
    if lo == hi:
        return float(values[i])
    try:
        return minimize_1d(fn, (lo, hi), tol)
    except BadBracket:
        return float(values[i])


def _check_increasing(values):
    vals = [float(v) for v in values]
    if len(vals) < 1 or any(b <= a for a, b in zip(vals[:-1], vals[1:])):
        raise ValueError("scan values must be strictly increasing")
    return vals


def gamma_energy_scan(g: GrainAngle, gammas: Sequence[float], q: QuadratureSpec,
                      threads: int = 1, refine_tol: float = 1e-4,
                      fd_step: float = 1e-2) -> EnergyScan:
    """Energy of ``h(sgn(x)|x|^gamma, y; alpha)`` over ``gammas``.

    ``derivative_at_reference`` is dE/dgamma at gamma = 1 from the five-point
    central difference with step ``fd_step``.
    """
    vals = _check_increasing(gammas)
    if any(v <= 0 for v in vals):
        raise ValueError("gamma values must be positive")
    base = scherk_function(g)

    def report(gamma):
        return area_excess_report(gamma_deformed(base, gamma), g, q)

    def energy(gamma):
        return report(gamma).energy

    reports = _map(report, vals, threads)
    energies = [r.energy for r in reports]
    e = _map(energy, [1 - 2 * fd_step, 1 - fd_step, 1 + fd_step, 1 + 2 * fd_step], threads)
    deriv = (e[0] - 8 * e[1] + 8 * e[2] - e[3]) / (12 * fd_step)
    est = _refine(energy, vals, energies, refine_tol) if refine_tol else float("nan")
    log.info("gamma scan alpha=%g L=%g: dE/dgamma(1)=%.3e, argmin~%.6f", g.alpha, q.L, deriv, est)
    return EnergyScan("gamma", tuple(vals), tuple(energies), q, est, deriv, 1.0,
                      tuple(r.core_energy for r in reports))


def shift_quadrature(spec: DecompositionSpec, L: float, nx: int = 129, ny: Optional[int] = None,
                     **kw) -> QuadratureSpec:
    """Window ``[-L, L] x [-n ell / 2, n ell / 2]``: one period of the shifted configuration."""
    return QuadratureSpec.periodic(GrainAngle(2 * spec.beta), L, nx, ny, periods=spec.n,
                                   centered=True, **kw)


def shift_energy_scan(spec: DecompositionSpec, deltas: Sequence[float], q: QuadratureSpec,
                      threads: int = 1, refine_tol: float = 1e-4,
                      fd_step: float = 1e-3) -> EnergyScan:
    """Energy per defect period ``ell`` as one sub-family of defects is shifted by ``delta``.

    The window must span one full period ``n * ell`` of the shifted
    configuration (see :func:`shift_quadrature`); energies are divided by
    ``n`` so the ``delta = 0`` entry is directly comparable with the
    undeformed surface on ``[0, ell]``.
    """
    if spec.n != 2:
        raise ValueError("the defect-shift probe is defined for n = 2")
    vals = _check_increasing(deltas)
    if not np.allclose(vals, [-v for v in vals[::-1]], rtol=0, atol=1e-12):
        raise ValueError("delta values must be symmetric about 0")
    g = GrainAngle(2 * spec.beta)

    def report(delta):
        return area_excess_report(defect_shift(spec, delta), g, q)

    def energy(delta):
        return report(delta).energy / spec.n

    reports = _map(report, vals, threads)
    energies = [r.energy / spec.n for r in reports]
    e = _map(energy, [-fd_step, fd_step], threads)
    deriv = (e[1] - e[0]) / (2 * fd_step)
    est = _refine(energy, vals, energies, refine_tol) if refine_tol else float("nan")
    return EnergyScan("delta", tuple(vals), tuple(energies), q, est, deriv, 0.0,
                      tuple(r.core_energy / spec.n for r in reports))
