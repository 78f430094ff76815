"""Periodic orbits of the doubling map and the extremes of f_c over them.

A period-p orbit is the set of points ``k/(2^p - 1)`` whose binary
expansions are the rotations of a primitive word.  The word stored on a
:class:`PeriodicOrbit` is its lexicographically smallest rotation (a Lyndon
word).  The all-ones word is the point 1 = 0 on the circle and is never
produced; the fixed point is always the word ``"0"``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

import numpy as np

from .dyadic import (
    LOG2,
    NEG_INFINITY,
    BinaryFixed,
    Potential,
    as_point,
    distance_ratio,
    log_sin_pi,
    potential_eval,
)
from .errors import SizeLimit, Undefined

MAX_PERIOD = 24
# Averages closer than this are treated as ties (smaller period, then word, wins).
TIE_TOL = 1e-12


@dataclass(frozen=True)
class PeriodicOrbit:
    word: str

    @property
    def period(self) -> int:
        return len(self.word)

    @property
    def denominator(self) -> int:
        return max((1 << self.period) - 1, 1)

    @property
    def numerators(self) -> list[int]:
        q = self.denominator
        k = int(self.word, 2) % q
        out = []
        for _ in range(self.period):
            out.append(k)
            k = 2 * k % q
        return out

    @property
    def points(self) -> list[Fraction]:
        q = self.denominator
        return [Fraction(k, q) for k in self.numerators]

    def __str__(self):
        return self.word


def _cycles_of_period(p: int) -> Iterator[list[int]]:
    """Numerators of every orbit of least period p, in order of their minimum."""
    q = (1 << p) - 1
    if p == 1:
        yield [0]
        return
    seen = bytearray(q)
    for k in range(q):
        if seen[k]:
            continue
        cyc = [k]
        seen[k] = 1
        j = 2 * k % q
        while j != k:
            seen[j] = 1
            cyc.append(j)
            j = 2 * j % q
        if len(cyc) == p:
            yield cyc


def enumerate_orbits(P: int) -> list[PeriodicOrbit]:
    """Every primitive binary necklace of length <= P, by period then word."""
    if P < 1:
        raise ValueError("P must be positive")
    if P > MAX_PERIOD:
        raise SizeLimit(f"maxPeriod {P} > {MAX_PERIOD}")
    return [PeriodicOrbit(format(cyc[0], f"0{p}b"))
            for p in range(1, P + 1) for cyc in _cycles_of_period(p)]


def orbit_average(P: Potential, o: PeriodicOrbit) -> float:
    """(1/p) sum of f_c over the orbit points; NEG_INFINITY iff b is on it."""
    vals = [potential_eval(P, x) for x in o.points]
    if NEG_INFINITY in vals:
        return NEG_INFINITY
    return math.fsum(vals) / o.period


def _period_values(P: Potential, p: int) -> np.ndarray:
    """f_c at k/(2^p - 1) for every k, with exact singularity detection."""
    q = max((1 << p) - 1, 1)
    b = P.b
    if isinstance(b, BinaryFixed):
        r, s = b.bits, 1 << b.width
    else:
        r, s = b.numerator, b.denominator
    if q * s < 2**62:
        k = np.arange(q, dtype=np.int64)
        diff = (k * s - r * q) % (q * s)
        num = np.minimum(diff, q * s - diff)
        out = np.full(q, NEG_INFINITY)
        nz = num != 0
        d = num[nz] / float(q * s)
        small = d < 1e-4
        vals = np.empty(d.shape)
        vals[~small] = np.log(np.sin(np.pi * d[~small]))
        y = np.pi * d[small]
        vals[small] = np.log(y) + np.log1p(-y * y / 6.0)
        out[nz] = vals
        return out
    return np.array([log_sin_pi(*distance_ratio(Fraction(k, q), b)) for k in range(q)])


@dataclass
class OrbitRecord:
    orbit: PeriodicOrbit
    average: float

    @property
    def is_singular(self) -> bool:
        return self.average == NEG_INFINITY


@dataclass
class ExtremesReport:
    alpha_P: float
    beta_P: float
    argmin: PeriodicOrbit
    argmax: PeriodicOrbit
    P: int
    singular_orbits: list[PeriodicOrbit] = field(default_factory=list)
    records: list[OrbitRecord] = field(default_factory=list, repr=False)


def scan_orbits(P: Potential, maxPeriod: int) -> list[OrbitRecord]:
    """Average of f_c over every orbit of period <= maxPeriod."""
    if maxPeriod > MAX_PERIOD:
        raise SizeLimit(f"maxPeriod {maxPeriod} > {MAX_PERIOD}")
    records = []
    for p in range(1, maxPeriod + 1):
        vals = _period_values(P, p)
        for cyc in _cycles_of_period(p):
            v = vals[cyc]
            avg = NEG_INFINITY if np.isneginf(v).any() else math.fsum(v.tolist()) / p
            records.append(OrbitRecord(PeriodicOrbit(format(cyc[0], f"0{p}b")), avg))
    return records


def extremes_scan(P: Potential, maxPeriod: int) -> ExtremesReport:
    """alpha_P and beta_P over all periodic measures of period <= maxPeriod.

    Records arrive ordered by period then word, so a later record replaces
    the incumbent only when it is better by more than TIE_TOL.
    """
    records = scan_orbits(P, maxPeriod)
    lo = hi = records[0]
    for rec in records[1:]:
        a = rec.average
        if a < lo.average and not (lo.average - a <= TIE_TOL):
            lo = rec
        if a > hi.average and not (a - hi.average <= TIE_TOL):
            hi = rec
    return ExtremesReport(
        alpha_P=lo.average, beta_P=hi.average, argmin=lo.orbit, argmax=hi.orbit,
        P=maxPeriod, singular_orbits=[r.orbit for r in records if r.is_singular],
        records=records)


def gelfond_exponent(P: Potential, maxPeriod: int) -> float:
    """Lower bound 1 + beta_P/log 2 for the Gelfond exponent gamma(c)."""
    beta = extremes_scan(P, maxPeriod).beta_P
    if beta == NEG_INFINITY:
        raise Undefined("every scanned orbit is singular; beta_P = -inf")
    return 1.0 + beta / LOG2


@dataclass(frozen=True)
class Arc:
    start: Fraction
    end: Fraction
    length: Fraction


def minimal_arc(points) -> Arc:
    """Smallest closed arc containing the points (complement of the largest gap)."""
    xs = sorted({as_point(x) for x in points})
    if len(xs) == 1:
        return Arc(xs[0], xs[0], Fraction(0))
    gaps = [(xs[(i + 1) % len(xs)] - xs[i]) % 1 for i in range(len(xs))]
    i = max(range(len(xs)), key=lambda j: gaps[j])
    start, end = xs[(i + 1) % len(xs)], xs[i]
    return Arc(start, end, 1 - gaps[i])


def sturmian_arc_check(report: ExtremesReport | PeriodicOrbit) -> tuple[bool, Arc]:
    """Does the maximizing orbit fit in a closed half-circle?"""
    orbit = report.argmax if isinstance(report, ExtremesReport) else report
    if isinstance(report, ExtremesReport) and report.beta_P == NEG_INFINITY:
        raise Undefined("argmax orbit is singular")
    arc = minimal_arc(orbit.points)
    return arc.length <= Fraction(1, 2), arc


def max_defect_bound(P: Potential, n: int, gridSize: int, maxPeriod: int = 13,
                     beta: float | None = None, refine_top: int = 0) -> float:
    """max over the grid k/(gridSize+1) of S_n f_c(x) - n*beta_P.

    The grid denominator is odd on purpose: dyadic grids fall onto the
    fixed point after a few doublings.  A grid coarser than 2^-n cannot see
    the sup; ``refine_top > 0`` re-samples a finer odd-denominator grid
    around that many best grid points.
    """
    if beta is None:
        beta = extremes_scan(P, maxPeriod).beta_P
    q = gridSize + 1
    S = _birkhoff_grid(P, np.arange(q, dtype=np.int64), q, n)
    best = float(np.max(S))
    if refine_top > 0:
        r = max(n - int(math.log2(gridSize)), 0) + 4
        R = (1 << r) + 1
        top = np.argsort(S)[-refine_top:]
        j = np.arange(-R + 1, R, dtype=np.int64)
        k = ((top[:, None] * R + j[None, :]) % (q * R)).ravel()
        best = max(best, float(np.max(_birkhoff_grid(P, k, q * R, n))))
    return best - n * beta


def _birkhoff_grid(P: Potential, k: np.ndarray, q: int, n: int) -> np.ndarray:
    S = np.zeros(k.shape)
    for _ in range(n):
        S += _values_at(P, k, q)
        k = 2 * k % q
    return S


def _values_at(P: Potential, k: np.ndarray, q: int) -> np.ndarray:
    b = P.b
    if isinstance(b, BinaryFixed) or q * b.denominator >= 2**62:
        return np.array([log_sin_pi(*distance_ratio(Fraction(int(j), q), b)) for j in k])
    r, s = b.numerator, b.denominator
    diff = (k * s - r * q) % (q * s)
    num = np.minimum(diff, q * s - diff)
    with np.errstate(divide="ignore"):
        return np.log(np.sin(np.pi * (num / float(q * s))))
