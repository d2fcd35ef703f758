"""Numerical certification of the arctangent decompositions of Scherk's surface.

Covers the Ramanujan series ``arctan(tanh a cot b) = sum_k arctan(a / (b + k pi))``,
the infinite helicoid decomposition (checked in difference form, where the
divergent per-term constants cancel), the finite decomposition into dilated
Scherk surfaces, and the elementary identities used to prove it.

Multivalued quantities are compared modulo their jump quantum; gradients are
compared exactly.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import CorePoint, InvalidPair, LogBranchPoint, PoleError
from .surface import (CORE_TOL, GrainAngle, Point, core_distance, scherk_grad,
                      scherk_height)

_EPS = np.finfo(float).eps

#: seed used by the batch samplers unless the caller overrides it
DEFAULT_SEED = 20000816


@dataclass(frozen=True)
class IdentityPoint:
    a: float
    b: float


@dataclass(frozen=True)
class ComplexPoint:
    re: float
    im: float

    @property
    def z(self) -> complex:
        return complex(self.re, self.im)


@dataclass(frozen=True)
class SeriesReport:
    value: float
    pairs: int
    tail_bound: float
    converged: bool


@dataclass(frozen=True)
class DecompositionSpec:
    """Order ``n`` split of a Scherk surface with ``sin(beta) = n sin(beta_tilde)``."""

    n: int
    beta: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"order n must be a positive integer, got {self.n!r}")
        if not 0.0 < self.beta < 0.5 * math.pi:
            raise ValueError(f"beta must lie in (0, pi/2), got {self.beta!r}")

    @property
    def beta_tilde(self) -> float:
        if self.n == 1:
            return self.beta
        return math.asin(math.sin(self.beta) / self.n)

    @property
    def offsets(self) -> range:
        return range(self.n)

    @property
    def prefactor(self) -> float:
        """cos(beta_tilde) / cos(beta)."""
        return math.cos(self.beta_tilde) / math.cos(self.beta)

    @property
    def jump(self) -> float:
        """Jump quantum shared by both sides, pi * prefactor * sec(beta_tilde)."""
        return math.pi * self.prefactor / math.cos(self.beta_tilde)

    @property
    def ell(self) -> float:
        """Core spacing of the left-hand surface."""
        return math.pi / math.sin(self.beta)

    @property
    def sub_ell(self) -> float:
        """Core spacing of each sub-surface, pi * csc(beta_tilde) = n * ell."""
        return math.pi / math.sin(self.beta_tilde)


class Theorem2Residual(NamedTuple):
    exact_error: float
    mod_constant_error: float


def reconcile(d: float, quantum: float) -> float:
    """Distance from ``d`` to the nearest integer multiple of ``quantum``."""
    return abs(d - quantum * round(d / quantum))


def _is_pi_multiple(b: float) -> bool:
    return abs(math.remainder(b, math.pi)) <= 4 * _EPS * max(1.0, abs(b))


# ---------------------------------------------------------------------------
# Ramanujan series


def ramanujan_lhs(q: IdentityPoint) -> float:
    if _is_pi_multiple(q.b):
        raise PoleError(f"cot(b) has a pole at b={q.b!r}")
    return math.atan(math.tanh(q.a) * math.cos(q.b) / math.sin(q.b))


def ramanujan_tail_bound(a: float, b: float, pairs: int) -> float:
    """Upper bound on ``|sum_{k > N} [arctan(a/(b+k pi)) + arctan(a/(b-k pi))]|``.

    With ``f(t) = arctan(a/t)`` each pair equals ``f(k pi + b) - f(k pi - b)``;
    the mean value theorem gives ``|pair_k| <= 2|ab| / ((k pi - |b|)^2 + a^2)``,
    which is decreasing in k once ``N pi > |b|``, so the tail is bounded by the
    integral from N to infinity: ``(2|b|/pi) * arctan(|a| / (N pi - |b|))``.
    """
    if a == 0.0:
        return 0.0
    gap = pairs * math.pi - abs(b)
    if gap <= 0.0:
        return math.inf
    return (2.0 * abs(b) / math.pi) * math.atan(abs(a) / gap)


def _pair_terms(a: float, b: float, pairs: int) -> np.ndarray:
    k = np.arange(1, pairs + 1, dtype=float) * math.pi
    return np.arctan(a / (b + k)) + np.arctan(a / (b - k))


def ramanujan_partial_sum(q: IdentityPoint, pairs: int, tol: float = 1e-5) -> SeriesReport:
    """Symmetric partial sum ``k = 0, +-1, ..., +-pairs`` of the Ramanujan series.

    Pairs ``(k, -k)`` are combined before accumulation (the series only
    converges conditionally) and summed exactly with ``math.fsum``. The
    reported bound covers both the truncated tail and floating-point rounding.
    """
    if pairs < 1:
        raise ValueError("pairs must be >= 1")
    if _is_pi_multiple(q.b):
        raise PoleError(f"arctan(a/b) term has a pole at b={q.b!r}")
    a, b = float(q.a), float(q.b)
    t0 = math.atan(a / b)
    terms = _pair_terms(a, b, pairs)
    value = math.fsum([t0, *terms.tolist()])
    tail = ramanujan_tail_bound(a, b, pairs)
    if tail > 0.0:
        # a few ulps per arctan evaluation, plus the closed-form side
        tail += 4 * _EPS * (abs(t0) + float(np.abs(terms).sum()) + 1.0)
    return SeriesReport(value, int(pairs), float(tail), bool(tail <= tol))


# ---------------------------------------------------------------------------
# Theorem 1: infinite superposition of dilated helicoids


def _atan_diff(u, v):
    """``arctan(u) - arctan(v)`` without cancellation when both are large."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    prod = 1.0 + u * v
    safe = prod > 0.5
    with np.errstate(divide="ignore", invalid="ignore"):
        merged = np.arctan((u - v) / prod)
    return np.where(safe, merged, np.arctan(u) - np.arctan(v))


def helicoid_sum_difference(p: Point, p_ref: Point, g: GrainAngle, pairs: int) -> float:
    """Symmetric partial sum of the helicoid decomposition, differenced at two points.

    ``sec(a/2) * sum_{n=-N}^{N} [arctan((y - n ell)/(x c)) - arctan((y_ref - n ell)/(x_ref c))]``
    with ``c = cos(alpha/2)``; the constant ``-pi/2`` of every term cancels.
    """
    c = math.cos(g.half)
    ell = g.ell
    xs, xr = p.x * c, p_ref.x * c

    def term(n):
        return _atan_diff((p.y - n * ell) / xs, (p_ref.y - n * ell) / xr)

    n = np.arange(1, pairs + 1, dtype=float)
    paired = term(n) + term(-n)
    return g.sec_half * math.fsum([float(term(0.0)), *paired.tolist()])


def _same_cell(p: Point, p_ref: Point, g: GrainAngle) -> bool:
    if p.x == 0.0 or p_ref.x == 0.0 or (p.x > 0) != (p_ref.x > 0):
        return False
    ell = g.ell
    kp, kr = math.floor(p.y / ell), math.floor(p_ref.y / ell)
    on_cut = any(abs(math.remainder(y, ell)) <= CORE_TOL for y in (p.y, p_ref.y))
    return kp == kr and not on_cut


def theorem1_difference_check(p: Point, p_ref: Point, g: GrainAngle, pairs: int) -> float:
    if pairs < 1:
        raise ValueError("pairs must be >= 1")
    if not _same_cell(p, p_ref, g):
        raise InvalidPair(f"{p} and {p_ref} are not in the same half-plane and branch cell")
    if p == p_ref:
        return 0.0
    exact = scherk_height(p, g).z - scherk_height(p_ref, g).z
    return abs(helicoid_sum_difference(p, p_ref, g, pairs) - exact)


# ---------------------------------------------------------------------------
# Theorem 2: finite superposition of dilated Scherk surfaces


def _theorem2_sides(p: Point, spec: DecompositionSpec):
    bt = spec.beta_tilde
    lhs = scherk_height(Point(p.x / math.cos(spec.beta), p.y), GrainAngle(2 * spec.beta)).z
    gt = GrainAngle(2 * bt)
    xt = p.x / math.cos(bt)
    parts = [scherk_height(Point(xt, p.y + m * spec.sub_ell / spec.n), gt).z
             for m in spec.offsets]
    return lhs, spec.prefactor * math.fsum(parts)


def theorem2_residual(p: Point, spec: DecompositionSpec) -> Theorem2Residual:
    lhs, rhs = _theorem2_sides(p, spec)
    d = lhs - rhs
    return Theorem2Residual(abs(d), reconcile(d, spec.jump))


def in_central_cell(p: Point, spec: DecompositionSpec) -> bool:
    """``|y sin(beta_tilde)| < pi / (2n)``: all principal branches align there."""
    return abs(p.y * math.sin(spec.beta_tilde)) < math.pi / (2 * spec.n)


def theorem2_gradients(x, y, spec: DecompositionSpec):
    """Gradients of both sides, arrays ``(lhs_x, lhs_y), (rhs_x, rhs_y)``."""
    cb, bt = math.cos(spec.beta), spec.beta_tilde
    ct = math.cos(bt)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lx, ly = scherk_grad(x / cb, y, 2 * spec.beta)
    lx = lx / cb
    rx = np.zeros_like(lx)
    ry = np.zeros_like(ly)
    for m in spec.offsets:
        gx, gy = scherk_grad(x / ct, y + m * spec.sub_ell / spec.n, 2 * bt)
        rx = rx + gx / ct
        ry = ry + gy
    return (lx, ly), (spec.prefactor * rx, spec.prefactor * ry)


def theorem2_gradient_check(p: Point, spec: DecompositionSpec) -> float:
    if core_distance(p.x / math.cos(spec.beta), p.y, 2 * spec.beta) <= CORE_TOL:
        raise CorePoint(f"{p} is a core of the decomposed surface")
    (lx, ly), (rx, ry) = theorem2_gradients(p.x, p.y, spec)
    return float(max(abs(lx - rx), abs(ly - ry)))


# ---------------------------------------------------------------------------
# supporting identities


def imag_log_sin_check(c: ComplexPoint) -> float:
    """``arctan(tanh x / tan y)`` against ``Im log sin(y + i x)``, modulo pi."""
    y, x = c.re, c.im
    s = cmath.sin(complex(y, x))
    if s == 0:
        raise LogBranchPoint(f"sin({complex(y, x)}) vanishes")
    t = math.tan(y)
    lhs = math.copysign(0.5 * math.pi, math.tanh(x)) if t == 0.0 else math.atan(math.tanh(x) / t)
    rhs = cmath.log(s).imag
    return reconcile(lhs - rhs, math.pi)


def sine_product_check(c: ComplexPoint, n: int) -> float:
    """Relative error of ``sin(n z) = 2^(n-1) prod_m sin(z + m pi / n)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    z = c.z
    lhs = cmath.sin(n * z)
    rhs = 2.0 ** (n - 1)
    for m in range(n):
        rhs *= cmath.sin(z + m * math.pi / n)
    err = abs(lhs - rhs)
    return err / abs(lhs) if lhs != 0 else err


def sum_of_sums_check(q: IdentityPoint, n: int) -> float:
    """Ramanujan closed form at ``(a, b)`` against the sum of the ``n`` subseries."""
    if n < 1:
        raise ValueError("n must be >= 1")
    lhs = ramanujan_lhs(q)
    parts = [ramanujan_lhs(IdentityPoint(q.a / n, (q.b + m * math.pi) / n)) for m in range(n)]
    return reconcile(lhs - math.fsum(parts), math.pi)


# ---------------------------------------------------------------------------
# seeded batch drivers (used by the CLI and the acceptance suite)


def theorem2_sample_points(spec: DecompositionSpec, samples: int, seed: int = DEFAULT_SEED,
                           box: float = 5.0, min_core_distance: float = 0.05):
    """Uniform points in ``[-box, box]^2`` at least ``min_core_distance`` from any core."""
    rng = np.random.default_rng(seed)
    ell = spec.ell
    pts = []
    while len(pts) < samples:
        x, y = rng.uniform(-box, box, size=2)
        dy = y - ell * round(y / ell)
        if math.hypot(x, dy) > min_core_distance:
            pts.append(Point(float(x), float(y)))
    return pts


def theorem2_batch(spec: DecompositionSpec, samples: int, seed: int = DEFAULT_SEED) -> dict:
    pts = theorem2_sample_points(spec, samples, seed)
    grad = [theorem2_gradient_check(p, spec) for p in pts]
    res = [theorem2_residual(p, spec) for p in pts]
    central = [r.exact_error for p, r in zip(pts, res) if in_central_cell(p, spec)]
    return {
        "n": spec.n,
        "beta": spec.beta,
        "beta_tilde": spec.beta_tilde,
        "samples": samples,
        "max_gradient_error": max(grad),
        "max_mod_constant_error": max(r.mod_constant_error for r in res),
        "central_cell_samples": len(central),
        "max_central_exact_error": max(central, default=0.0),
    }


def identity_sample_points(samples: int, seed: int = DEFAULT_SEED, amax: float = 3.0,
                           bmin: float = 0.1, bmax: float = math.pi - 0.1):
    rng = np.random.default_rng(seed)
    a = rng.uniform(-amax, amax, size=samples)
    b = rng.uniform(bmin, bmax, size=samples)
    return [IdentityPoint(float(ai), float(bi)) for ai, bi in zip(a, b)]


def complex_sample_points(samples: int, seed: int = DEFAULT_SEED, re_span=(0.1, math.pi - 0.1),
                          im_span=(-3.0, 3.0)):
    rng = np.random.default_rng(seed)
    re = rng.uniform(*re_span, size=samples)
    im = rng.uniform(*im_span, size=samples)
    return [ComplexPoint(float(r), float(i)) for r, i in zip(re, im)]


def theorem1_sample_pairs(g: GrainAngle, samples: int, seed: int = DEFAULT_SEED,
                          xmin: float = 0.25, xmax: float = 4.0):
    """Point pairs with ``x > xmin`` inside the first branch cell ``0 < y < ell``."""
    rng = np.random.default_rng(seed)
    ell = g.ell
    out = []
    for _ in range(samples):
        x, xr = rng.uniform(xmin, xmax, size=2)
        y, yr = rng.uniform(0.05 * ell, 0.95 * ell, size=2)
        out.append((Point(float(x), float(y)), Point(float(xr), float(yr))))
    return out
