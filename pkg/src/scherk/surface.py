"""Height functions of Scherk's first surface and of the helicoid.

Scherk's surface with rotation angle ``alpha`` is

    h(x, y; alpha) = -sec(alpha/2) * arctan( tanh(x sin(alpha) / 2) / tan(y sin(alpha/2)) )

with screw-dislocation cores at ``(0, k * ell)``, ``ell = pi / sin(alpha/2)``.
The height is multivalued; values returned here are principal values plus an
explicit sheet offset (see :class:`BranchPolicy`).

The array kernels (``scherk_z``, ``scherk_grad``, ``scherk_hess`` and their
helicoid counterparts) are vectorised; the height kernels return ``nan`` on
cores while the derivative kernels are left unmasked (non-finite exactly on a
core). The ``Point``-level operations validate their input and raise instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CorePoint, InvalidAngle

#: distance below which a point is treated as lying on a core
CORE_TOL = 1e-12
#: default radius of the ``near_core`` flag
NEAR_CORE_RADIUS = 1e-6


@dataclass(frozen=True)
class GrainAngle:
    """Rotation angle between the two lamellar families, in radians."""

    alpha: float

    def __post_init__(self):
        a = self.alpha
        if not (isinstance(a, (int, float, np.floating)) and math.isfinite(a)):
            raise InvalidAngle(f"alpha must be a finite real, got {a!r}")
        if not 0.0 < a < math.pi:
            raise InvalidAngle(f"alpha must lie strictly inside (0, pi), got {a!r}")

    @property
    def half(self) -> float:
        return 0.5 * self.alpha

    @property
    def ell(self) -> float:
        """Defect spacing along y."""
        return math.pi / math.sin(self.half)

    @property
    def sec_half(self) -> float:
        return 1.0 / math.cos(self.half)

    @property
    def jump(self) -> float:
        """Height jump between adjacent sheets, pi * sec(alpha/2)."""
        return math.pi * self.sec_half


@dataclass(frozen=True)
class Point:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"point coordinates must be finite: {self}")


@dataclass(frozen=True)
class BranchPolicy:
    """Sheet selection for the multivalued heights.

    ``sheet == 0`` is the principal branch; sheet ``k`` adds ``k`` jump quanta.
    """

    sheet: int = 0

    @classmethod
    def principal(cls) -> "BranchPolicy":
        return cls(0)

    @property
    def mode(self) -> str:
        return "principal" if self.sheet == 0 else f"sheet({self.sheet})"


PRINCIPAL = BranchPolicy()


@dataclass(frozen=True)
class HeightSample:
    point: Point
    z: float
    branch: BranchPolicy = PRINCIPAL
    near_core: bool = False


@dataclass(frozen=True)
class Window:
    """Axis-aligned rectangle ``[xmin, xmax] x [ymin, ymax]``."""

    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def __post_init__(self):
        vals = (self.xmin, self.xmax, self.ymin, self.ymax)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"window bounds must be finite: {vals}")
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise ValueError(f"degenerate window: {vals}")

    @classmethod
    def parse(cls, text: str) -> "Window":
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 4:
            raise ValueError(f"window must be xmin:xmax:ymin:ymax, got {text!r}")
        return cls(*parts)

    def contains(self, x: float, y: float) -> bool:
        return self.xmin <= x <= self.xmax and self.ymin <= y <= self.ymax


@dataclass(frozen=True)
class CoreSet:
    angle: GrainAngle
    points: tuple[Point, ...] = field(default_factory=tuple)
    indices: tuple[int, ...] = field(default_factory=tuple)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


# ---------------------------------------------------------------------------
# vectorised kernels


def _scales(alpha):
    return 0.5 * math.sin(alpha), math.sin(0.5 * alpha), 1.0 / math.cos(0.5 * alpha)


def _sech(a):
    e = np.exp(-np.abs(a))
    return 2.0 * e / (1.0 + e * e)


def core_distance(x, y, alpha):
    """Distance from ``(x, y)`` to the nearest Scherk core."""
    ell = math.pi / math.sin(0.5 * alpha)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dy = y - ell * np.round(y / ell)
    return np.hypot(x, dy)


def scherk_z(x, y, alpha, sheet=0):
    """Scherk height (principal value + ``sheet`` jumps); nan on cores.

    The principal arctangent is evaluated as a two-argument angle of
    ``(tanh(a) cos(b) sgn(sin b), |sin b|)`` so that the poles of ``tan(b)``
    are passed smoothly; on the cut lines ``sin b == 0`` the limit from
    ``sin b -> 0+`` is returned.
    """
    A, B, s = _scales(alpha)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    T = np.tanh(A * x)
    sb = np.sin(B * y)
    cb = np.cos(B * y)
    sgn = np.where(sb >= 0.0, 1.0, -1.0)
    z = -s * np.arctan2(T * cb * sgn, np.abs(sb))
    if sheet:
        z = z + sheet * math.pi * s
    oncore = core_distance(x, y, alpha) <= CORE_TOL
    if np.any(oncore):
        z = np.where(oncore, np.nan, z)
    return z


def _cot_parts(x, y, alpha):
    # w = b + i a; u = sin(w)/cosh(a), v = cos(w)/cosh(a)
    A, B, s = _scales(alpha)
    a = A * np.asarray(x, dtype=float)
    b = B * np.asarray(y, dtype=float)
    t = np.tanh(a)
    sb, cb = np.sin(b), np.cos(b)
    u = sb + 1j * cb * t
    v = cb - 1j * sb * t
    return A, B, s, a, u, v


def scherk_grad(x, y, alpha):
    """Closed-form ``(h_x, h_y)``; single valued.

    Not masked near cores (the energy quadrature samples within 1e-14 of
    them); an exact core yields non-finite values.
    """
    A, B, s, _, u, v = _cot_parts(x, y, alpha)
    with np.errstate(divide="ignore", invalid="ignore"):
        cot = v / u
    return -s * A * cot.real, -s * B * cot.imag


def scherk_hess(x, y, alpha):
    """Closed-form ``(h_xx, h_xy, h_yy)``; unmasked like :func:`scherk_grad`."""
    A, B, s, a, u, _ = _cot_parts(x, y, alpha)
    sech = _sech(a)
    with np.errstate(divide="ignore", invalid="ignore"):
        csc2 = (sech * sech) / (u * u)
    # theta = Im log sin(w):  theta_aa = Im csc^2, theta_bb = -Im csc^2, theta_ab = -Re csc^2
    hxx = -s * A * A * csc2.imag
    hyy = s * B * B * csc2.imag
    hxy = s * A * B * csc2.real
    return hxx, hxy, hyy


def helicoid_z(x, y, sheet=0):
    """``atan2(y, x) - pi/2 + sheet*pi``; nan at the origin."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.arctan2(y, x) - 0.5 * math.pi + sheet * math.pi
    origin = np.hypot(x, y) <= CORE_TOL
    if np.any(origin):
        z = np.where(origin, np.nan, z)
    return z


def helicoid_grad(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        r2 = x * x + y * y
        return -y / r2, x / r2


def helicoid_hess(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        r4 = (x * x + y * y) ** 2
        return 2 * x * y / r4, (y * y - x * x) / r4, -2 * x * y / r4


# ---------------------------------------------------------------------------
# point-level operations


def _check_scherk_point(p: Point, g: GrainAngle) -> float:
    d = float(core_distance(p.x, p.y, g.alpha))
    if d <= CORE_TOL:
        raise CorePoint(f"{p} lies on a dislocation core (ell={g.ell:.12g})")
    return d


def scherk_height(p: Point, g: GrainAngle, b: BranchPolicy = PRINCIPAL,
                  near_radius: float = NEAR_CORE_RADIUS) -> HeightSample:
    d = _check_scherk_point(p, g)
    z = float(scherk_z(p.x, p.y, g.alpha, b.sheet))
    return HeightSample(p, z, b, d < near_radius)


def scherk_gradient(p: Point, g: GrainAngle) -> tuple[float, float]:
    _check_scherk_point(p, g)
    hx, hy = scherk_grad(p.x, p.y, g.alpha)
    return float(hx), float(hy)


def scherk_hessian(p: Point, g: GrainAngle) -> tuple[float, float, float]:
    _check_scherk_point(p, g)
    return tuple(float(v) for v in scherk_hess(p.x, p.y, g.alpha))


def helicoid_height(p: Point, b: BranchPolicy = PRINCIPAL,
                    near_radius: float = NEAR_CORE_RADIUS) -> HeightSample:
    r = math.hypot(p.x, p.y)
    if r <= CORE_TOL:
        raise CorePoint("the helicoid axis passes through the origin")
    return HeightSample(p, float(helicoid_z(p.x, p.y, b.sheet)), b, r < near_radius)


def helicoid_limit_error(p: Point, g: GrainAngle) -> float:
    """Distance between the Scherk and helicoid principal heights at ``p``.

    Shrinks as ``alpha -> 0`` for ``x > 0`` (for ``x < 0, y < 0`` the two
    principal conventions differ by a constant pi).
    """
    if p.x == 0.0:
        raise ValueError("the alpha -> 0 comparison is undefined on x = 0")
    zs = scherk_height(p, g).z
    zh = helicoid_height(p).z
    return abs(zs - zh)


def scherk_asymptote(y, g: GrainAngle, side: int = 1, n: int = -1):
    """Asymptotic plane ``side*y*tan(alpha/2) + (n + 1/2)*pi*sec(alpha/2)``."""
    return side * np.asarray(y) * math.tan(g.half) + (n + 0.5) * math.pi * g.sec_half


def cores_in_window(g: GrainAngle, window: Window) -> CoreSet:
    if not window.xmin <= 0.0 <= window.xmax:
        return CoreSet(g)
    ell = g.ell
    k0 = math.ceil(window.ymin / ell)
    k1 = math.floor(window.ymax / ell)
    ks = tuple(range(k0, k1 + 1))
    return CoreSet(g, tuple(Point(0.0, k * ell) for k in ks), ks)
