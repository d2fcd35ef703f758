"""Quadrature building blocks: composite Simpson and geometrically graded Gauss rules.

Graded rules put Gauss-Legendre panels on geometric meshes refined toward
singular endpoints (ratio ``sigma``), which integrates point and edge
singularities of power/log type to near machine precision.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np


def simpson_weights(a: float, b: float, n_intervals: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of composite Simpson with an even number of intervals."""
    if n_intervals < 2 or n_intervals % 2:
        raise ValueError(f"composite Simpson needs an even interval count, got {n_intervals}")
    x = np.linspace(a, b, n_intervals + 1)
    w = np.full(n_intervals + 1, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return x, w * (b - a) / (3.0 * n_intervals)


@lru_cache(maxsize=None)
def _legendre(order: int):
    return np.polynomial.legendre.leggauss(order)


def graded_breaks(a: float, b: float, toward_a: bool, toward_b: bool, sigma: float = 0.5,
                  floor: float = 1e-14, hmax: float = 1.0) -> np.ndarray:
    """Panel breakpoints on ``[a, b]`` refined geometrically toward the flagged ends.

    Refinement stops once the innermost panel is shorter than ``floor * (b - a)``;
    panels longer than ``hmax`` are split uniformly.
    """
    if not b > a:
        raise ValueError("empty interval")
    if toward_a and toward_b:
        mid = 0.5 * (a + b)
        left = graded_breaks(a, mid, True, False, sigma, floor, hmax)
        right = graded_breaks(mid, b, False, True, sigma, floor, hmax)
        return np.concatenate([left, right[1:]])
    length = b - a
    if toward_a or toward_b:
        levels = int(math.ceil(math.log(floor) / math.log(sigma)))
        rel = sigma ** np.arange(levels, 0, -1)
        rel = np.concatenate([[0.0], rel, [1.0]])
    else:
        rel = np.array([0.0, 1.0])
    if toward_b:
        rel = 1.0 - rel[::-1]
    out = [rel[0]]
    for lo, hi in zip(rel[:-1], rel[1:]):
        pieces = max(1, int(math.ceil((hi - lo) * length / hmax)))
        out.extend(lo + (hi - lo) * np.arange(1, pieces + 1) / pieces)
    pts = a + length * np.asarray(out)
    pts[0], pts[-1] = a, b
    return pts


def gauss_on_breaks(breaks: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes/weights over consecutive panels."""
    t, w = _legendre(order)
    lo = breaks[:-1, None]
    half = 0.5 * (breaks[1:] - breaks[:-1])[:, None]
    nodes = lo + half * (t[None, :] + 1.0)
    weights = half * w[None, :]
    return nodes.ravel(), weights.ravel()


def tensor(xn, xw, yn, yw):
    """Row-major tensor product (y outer): returns flattened ``X, Y, W``."""
    X, Y = np.meshgrid(xn, yn)
    W = np.outer(yw, xw)
    return X.ravel(), Y.ravel(), W.ravel()


def reduce_sum(values: np.ndarray, weights: np.ndarray) -> float:
    """Compensated weighted sum; identical for identical inputs."""
    return math.fsum((values * weights).tolist())
