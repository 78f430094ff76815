"""Exact arithmetic on the circle R/Z under the doubling map T(x) = 2x mod 1.

Points are either reduced :class:`fractions.Fraction` values in [0, 1) or
:class:`BinaryFixed` numbers (a fixed number of binary digits).  Floating
point enters only at the very last step, when a logarithm of a sine is
taken; all iteration and all distances are exact.

The potential is ``f_c(x) = log|cos pi(x + c)| = log|sin pi(x - b)|`` with
singular point ``b = 1/2 - c``.  The value ``-inf`` is represented by the
float ``NEG_INFINITY``; it absorbs addition and compares below every
finite value, which is exactly the extended-real behaviour needed here.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from .errors import InsufficientPrecision, SizeLimit

NEG_INFINITY = float("-inf")
LOG2 = math.log(2.0)

# Bits that must survive after shifting for a double-precision evaluation.
SIGNIFICANT_BITS = 53
SIGMA_DIRECT_MAX = 2**24
_PI_EXT = np.longdouble("3.14159265358979323846264338327950288")


@dataclass(frozen=True)
class BinaryFixed:
    """The dyadic number ``bits / 2**width`` in [0, 1)."""

    bits: int
    width: int

    def __post_init__(self):
        if self.width < 1:
            raise ValueError("width must be positive")
        if not 0 <= self.bits < (1 << self.width):
            raise ValueError("bits must satisfy 0 <= bits < 2**width")

    @classmethod
    def random(cls, width: int, rng: random.Random | None = None) -> "BinaryFixed":
        rng = rng or random.Random()
        return cls(rng.getrandbits(width), width)

    @property
    def value(self) -> Fraction:
        return Fraction(self.bits, 1 << self.width)

    def __float__(self) -> float:
        return self.bits / (1 << self.width)

    def shift(self, n: int = 1) -> "BinaryFixed":
        """T^n as an exact left shift; the n leading bits are discarded."""
        if n >= self.width:
            raise InsufficientPrecision(
                f"cannot shift {n} bits out of a {self.width}-bit number")
        w = self.width - n
        return BinaryFixed(self.bits & ((1 << w) - 1), w)


TorusPoint = Union[Fraction, BinaryFixed]


def as_point(x) -> TorusPoint:
    """Coerce ints, Fractions, ``"p/q"`` strings or BinaryFixed to a point."""
    if isinstance(x, BinaryFixed):
        return x
    if isinstance(x, float):
        raise TypeError("floats are not exact; pass a Fraction or a string")
    return Fraction(x) % 1


def to_fraction(x: TorusPoint) -> Fraction:
    return x.value if isinstance(x, BinaryFixed) else Fraction(x)


def _num_den(x: TorusPoint) -> tuple[int, int]:
    if isinstance(x, BinaryFixed):
        return x.bits, 1 << x.width
    return x.numerator, x.denominator


@dataclass(frozen=True)
class Potential:
    """The potential f_c; ``b`` is always derived from ``c``."""

    c: TorusPoint

    def __post_init__(self):
        object.__setattr__(self, "c", as_point(self.c))

    @property
    def b(self) -> TorusPoint:
        c = self.c
        if isinstance(c, BinaryFixed):
            return BinaryFixed(((1 << (c.width - 1)) - c.bits) % (1 << c.width), c.width)
        return (Fraction(1, 2) - c) % 1

    def __call__(self, x) -> float:
        return potential_eval(self, as_point(x))


def distance_ratio(x: TorusPoint, y: TorusPoint) -> tuple[int, int]:
    """Integers (num, den) with num/den = ||x - y|| exactly (unreduced)."""
    if isinstance(x, BinaryFixed) and isinstance(y, BinaryFixed):
        w = max(x.width, y.width)
        den = 1 << w
        diff = ((x.bits << (w - x.width)) - (y.bits << (w - y.width))) % den
    else:
        p1, q1 = _num_den(x)
        p2, q2 = _num_den(y)
        den = q1 * q2
        diff = (p1 * q2 - p2 * q1) % den
    return min(diff, den - diff), den


def torus_distance(x: TorusPoint, y: TorusPoint) -> Fraction:
    """min over integers n of |x - y - n|, as an exact Fraction in [0, 1/2]."""
    num, den = distance_ratio(as_point(x), as_point(y))
    return Fraction(num, den)


def log_sin_pi(num: int, den: int) -> float:
    """log sin(pi * num/den) for 0 <= num/den <= 1/2, exact at zero.

    Handles arbitrarily large integers: tiny ratios go through logs of the
    integers themselves so nothing underflows.
    """
    if num == 0:
        return NEG_INFINITY
    d = num / den
    if d < 1e-4:
        y = math.pi * d
        return math.log(math.pi) + math.log(num) - math.log(den) + math.log1p(-y * y / 6.0)
    return math.log(math.sin(math.pi * d))


def doubling_iterate(x: TorusPoint, n: int) -> TorusPoint:
    """T^n x, exactly."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    x = as_point(x)
    if isinstance(x, BinaryFixed):
        if x.width < n + SIGNIFICANT_BITS:
            raise InsufficientPrecision(
                f"width {x.width} < {n} + {SIGNIFICANT_BITS} needed for {n} doublings")
        return x.shift(n) if n else x
    q = x.denominator
    return Fraction(pow(2, n, q) * x.numerator % q, q)


def potential_eval(P: Potential, x: TorusPoint) -> float:
    """f_c(x); NEG_INFINITY exactly when x == b."""
    num, den = distance_ratio(as_point(x), P.b)
    return log_sin_pi(num, den)


def birkhoff_sum(P: Potential, x: TorusPoint, n: int) -> float:
    """S_n f_c(x) = sum_{k<n} f_c(T^k x)."""
    if n < 1:
        raise ValueError("n must be positive")
    x = as_point(x)
    if isinstance(x, BinaryFixed) and x.width < (n - 1) + SIGNIFICANT_BITS:
        raise InsufficientPrecision(
            f"width {x.width} too small for {n} terms")
    terms = []
    for _ in range(n):
        v = potential_eval(P, x)
        if v == NEG_INFINITY:
            return NEG_INFINITY
        terms.append(v)
        x = x.shift(1) if isinstance(x, BinaryFixed) else (2 * x) % 1
    return math.fsum(terms)


def sigma_modulus(P: Potential, x: TorusPoint, n: int) -> float:
    """|sigma_{2^n}(x)| through the product 2^n prod |cos pi(2^k x + c)|."""
    if n == 0:
        return 1.0
    s = birkhoff_sum(P, x, n)
    if s == NEG_INFINITY:
        return 0.0
    return math.exp(n * LOG2 + s)


def _phases(k: np.ndarray, x: TorusPoint) -> np.ndarray:
    """Fractional parts of k*x in extended precision, exact before rounding.

    Small denominators use int64 residues; otherwise x is rounded to the
    2**-64 grid and products wrap in uint64 (phase error below k * 2**-65).
    """
    p, q = _num_den(x)
    kmax = int(k.max(initial=0))
    if q * max(kmax, 1) < 2**62:
        return (k.astype(np.int64) * p % q).astype(np.longdouble) / np.longdouble(q)
    a = np.uint64((p * 2**64 + q // 2) // q % 2**64)
    r = k.astype(np.uint64) * a
    return r.astype(np.longdouble) * np.longdouble(2.0**-64)


def sigma_direct(P: Potential, x: TorusPoint, N: int) -> complex:
    """sum_{n<N} exp(2 pi i (c s_2(n) + n x)) by direct summation."""
    if N < 1:
        raise ValueError("N must be positive")
    if N > SIGMA_DIRECT_MAX:
        raise SizeLimit(f"N={N} exceeds {SIGMA_DIRECT_MAX}")
    n = np.arange(N, dtype=np.uint64)
    s2 = np.bitwise_count(n).astype(np.int64)
    phase = (_phases(n, as_point(x)) + _phases(s2, P.c)) % 1
    angle = 2 * _PI_EXT * phase
    return complex(float(np.cos(angle).sum()), float(np.sin(angle).sum()))
