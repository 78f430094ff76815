"""Composite Gauss-Legendre quadrature for products of log|sin| factors.

Integrands are built from terms ``log|sin pi(r x + s)|`` whose singular
points are panel endpoints.  Each panel is split in half and each half is
graded geometrically (ratio 1/2) toward its endpoint, so the logarithmic
singularity sits at the end of ever smaller subpanels.  Points are
addressed as ``anchor +/- offset`` with the anchor phase ``frac(r a + s)``
computed exactly; near a zero the argument is then the tiny offset
itself, never a difference of nearly equal floats.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import QuadratureFailure

LEVELS = 60
ORDER = 8
_CHUNK = 1 << 21


@lru_cache(maxsize=None)
def graded_rule(levels: int = LEVELS, order: int = ORDER) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [0, 1] graded toward 0."""
    x, w = np.polynomial.legendre.leggauss(order)
    x, w = (x + 1) / 2, w / 2
    nodes, weights = [], []
    hi = 1.0
    for _ in range(levels):
        lo = hi / 2
        nodes.append(lo + (hi - lo) * x)
        weights.append((hi - lo) * w)
        hi = lo
    nodes.append(hi * x)
    weights.append(hi * w)
    return np.concatenate(nodes), np.concatenate(weights)


def log_abs_sin_pi(u: np.ndarray) -> np.ndarray:
    u = u - np.round(u)
    with np.errstate(divide="ignore"):
        return np.log(np.abs(np.sin(np.pi * u)))


def panel_integral(edges: Sequence[Fraction], maps: Sequence[tuple[int, Fraction]],
                   combine: Callable[[list[np.ndarray]], np.ndarray],
                   levels: int = LEVELS, order: int = ORDER) -> float:
    """Integrate ``combine([log|sin pi(r x + s)| for (r, s) in maps])`` over the edges.

    Every singular point of every factor must be one of ``edges``.
    """
    a, b = list(edges[:-1]), list(edges[1:])
    w = np.array([float(hi - lo) for lo, hi in zip(a, b)])
    anchors = []
    for r, s in maps:
        left = np.array([float((r * lo + s) % 1) for lo in a])
        right = np.array([float((r * hi + s) % 1) for hi in b])
        anchors.append((r, left, right))
    tau, omega = graded_rule(levels, order)
    step = max(1, _CHUNK // len(tau))
    parts = []
    for i in range(0, len(w), step):
        half = w[i:i + step, None] / 2
        t = half * tau[None, :]
        for side in (1, 2):
            vals = []
            for r, left, right in anchors:
                base = left if side == 1 else right
                sign = 1.0 if side == 1 else -1.0
                vals.append(log_abs_sin_pi(base[i:i + step, None] + sign * r * t))
            g = combine(vals)
            parts.append(float(np.sum(g * omega[None, :] * half)))
    return math.fsum(parts)


def checked_integral(edges, maps, combine, rtol: float = 1e-6, scale: float | None = None,
                     order: int = ORDER) -> float:
    """panel_integral at two Gauss orders; QuadratureFailure if they disagree.

    ``scale`` is the magnitude the relative tolerance refers to (defaults
    to the result itself).
    """
    coarse = panel_integral(edges, maps, combine, order=order)
    fine = panel_integral(edges, maps, combine, order=order + 4)
    ref = abs(fine) if scale is None else scale
    if abs(fine - coarse) > rtol * ref:
        raise QuadratureFailure(
            f"orders {order} and {order + 4} disagree: {coarse!r} vs {fine!r}")
    return fine
