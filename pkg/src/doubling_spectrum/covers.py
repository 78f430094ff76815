"""Exact checks of the self-return covers and the index-family counts.

``Q(i, j) = {x : d(2^i x, x) <= 2^-j} = {x : ||(2^i - 1) x|| <= 2^-j}``, a
union of closed intervals of radius ``2^-j / (2^i - 1)`` around the points
``m / (2^i - 1)``.  ``Qhat(i, j)`` is the union of level-(i+j) dyadic
intervals whose closures meet Q(i, j).  Everything here is integer or
Fraction arithmetic; floats appear only in the tail sums, which are
irrational.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Sequence

import numpy as np

from .errors import PreconditionViolated, SizeLimit

M_CONST = 15
MAX_QIJ = 20
MAX_LEVEL = 22
MAX_FNM = 28


@dataclass(frozen=True)
class IntervalSet:
    """Sorted disjoint closed intervals [lo, hi] inside [0, 1]."""

    intervals: tuple[tuple[Fraction, Fraction], ...]

    @property
    def measure(self) -> Fraction:
        return sum((hi - lo for lo, hi in self.intervals), Fraction(0))

    def __len__(self):
        return len(self.intervals)

    def contains(self, x) -> bool:
        x = Fraction(x) % 1
        return any(lo <= x <= hi for lo, hi in self.intervals)


def _merge(ivs: list[tuple[Fraction, Fraction]]) -> IntervalSet:
    ivs.sort()
    out: list[list[Fraction]] = []
    for lo, hi in ivs:
        if out and lo <= out[-1][1]:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return IntervalSet(tuple((lo, hi) for lo, hi in out))


def compute_Qij(i: int, j: int) -> IntervalSet:
    if i < 1 or j < 1:
        raise ValueError("i and j must be positive")
    if i > MAX_QIJ or j > MAX_QIJ:
        raise SizeLimit(f"i, j must be <= {MAX_QIJ}")
    q = (1 << i) - 1
    r = Fraction(1, (1 << j) * q)
    if 2 * r >= Fraction(1, q):
        return IntervalSet(((Fraction(0), Fraction(1)),))
    ivs = []
    for m in range(q):
        lo, hi = Fraction(m, q) - r, Fraction(m, q) + r
        if lo < 0:
            ivs += [(lo + 1, Fraction(1)), (Fraction(0), hi)]
        else:
            ivs.append((lo, hi))
    return _merge(ivs)


def Q_measure(i: int, j: int) -> Fraction:
    """Closed form: 2^i - 1 arcs of length 2^{1-j}/(2^i - 1), capped at 1."""
    return min(Fraction(1), Fraction(2, 1 << j))


def hatQ_mask(i: int, j: int) -> np.ndarray:
    """Boolean mask over level-(i+j) dyadic intervals meeting Q(i, j)."""
    L = i + j
    if L > MAX_LEVEL:
        raise SizeLimit(f"i + j must be <= {MAX_LEVEL}")
    n = 1 << L
    q = (1 << i) - 1
    m = np.arange(q, dtype=np.int64)
    # closed arc [(m 2^j - 1) 2^i / q, (m 2^j + 1) 2^i / q] in level-L units
    a = (m * (1 << j) - 1) * (1 << i)
    e = (m * (1 << j) + 1) * (1 << i)
    lo = -((-a) // q) - 1  # ceil(a/q) - 1
    hi = e // q
    if (hi - lo + 1 >= n).any():
        return np.ones(n, dtype=bool)
    diff = np.zeros(n + 1, dtype=np.int64)
    lo_w, hi_w = lo % n, hi % n
    plain = lo_w <= hi_w
    np.add.at(diff, lo_w[plain], 1)
    np.add.at(diff, hi_w[plain] + 1, -1)
    wrap = ~plain
    np.add.at(diff, lo_w[wrap], 1)
    diff[n] -= int(wrap.sum())
    diff[0] += int(wrap.sum())
    np.add.at(diff, hi_w[wrap] + 1, -1)
    return np.cumsum(diff[:n]) > 0


@dataclass(frozen=True)
class HatQReport:
    i: int
    j: int
    max_per_J: int
    total: int
    measure: Fraction
    passed: bool


def certify_hatQ_bound(i: int, j: int, M: int = M_CONST) -> HatQReport:
    """Per level-i interval count, total count and measure of Qhat against M."""
    if i < 1 or j < 1:
        raise ValueError("i and j must be positive")
    mask = hatQ_mask(i, j)
    per = mask.reshape(1 << i, 1 << j).sum(axis=1)
    total = int(per.sum())
    meas = Fraction(total, 1 << (i + j))
    ok = int(per.max()) <= M and total <= M * (1 << i) and meas <= Fraction(M, 1 << j)
    return HatQReport(i, j, int(per.max()), total, meas, ok)


@dataclass(frozen=True)
class MultiCoverReport:
    count: int
    bound: int
    passed: bool


def certify_multi_cover(iVec: Sequence[int], jVec: Sequence[int], M: int = M_CONST) -> MultiCoverReport:
    """Intersect Qhat(i_l, j_l) at level i_k + j_k and count dyadic intervals."""
    if len(iVec) != len(jVec) or not iVec:
        raise ValueError("iVec and jVec must be nonempty and of equal length")
    k = len(iVec)
    for l in range(k - 1):
        if iVec[l + 1] - iVec[l] < jVec[l]:
            raise PreconditionViolated(f"spacing fails at l = {l + 1}")
    top = iVec[-1] + jVec[-1]
    if top > MAX_LEVEL:
        raise SizeLimit(f"i_k + j_k must be <= {MAX_LEVEL}")
    acc = np.ones(1 << top, dtype=bool)
    for i, j in zip(iVec, jVec):
        acc &= np.repeat(hatQ_mask(i, j), 1 << (top - i - j))
    count = int(acc.sum())
    exp = iVec[-1] - sum(jVec[:-1])
    bound = M ** k * (1 << exp) if exp >= 0 else Fraction(M ** k, 1 << -exp)
    return MultiCoverReport(count, bound, count <= bound)


# -- counting index families -----------------------------------------------

def _limits(n: int, epsilon) -> tuple[int, int]:
    eps = Fraction(str(epsilon)) if isinstance(epsilon, float) else Fraction(epsilon)
    kmax = math.floor(eps * n)
    smin = math.ceil(n - eps * n)
    return kmax, smin


def enumerate_Fnm(n: int, m: int, epsilon) -> int:
    """Number of (i_1 < ... < i_k = n; j_1..j_k = m) meeting the three conditions.

    The last spacing j_k enters no condition, so the count does not depend
    on m beyond m >= 1.
    """
    if n > MAX_FNM:
        raise SizeLimit(f"n must be <= {MAX_FNM}")
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive")
    kmax, smin = _limits(n, epsilon)
    # f[pos][s]: chains ending at pos with spacing sum s, for the current k
    f = np.zeros((n + 1, n + 1), dtype=object)
    f[1:, 0] = 1
    total = 0
    for k in range(1, kmax + 1):
        total += sum(int(f[n][s]) for s in range(max(smin, 0), n + 1))
        g = np.zeros_like(f)
        for pos in range(1, n):
            for s in range(n):
                c = f[pos][s]
                if not c:
                    continue
                for nxt in range(pos + 1, n + 1):
                    for j in range(1, nxt - pos + 1):
                        if s + j <= n:
                            g[nxt][s + j] += c
        f = g
    return total


def brute_force_Fnm(n: int, m: int, epsilon) -> int:
    """Direct enumeration over index subsets and spacing vectors."""
    kmax, smin = _limits(n, epsilon)
    count = 0
    for k in range(1, kmax + 1):
        for head in itertools.combinations(range(1, n), k - 1):
            iv = head + (n,)
            gaps = [iv[l + 1] - iv[l] for l in range(k - 1)]
            for js in itertools.product(*(range(1, g + 1) for g in gaps)):
                if sum(js) >= smin:
                    count += 1
    return count


def Fnm_majorant_holds(n: int, count: int, epsilon) -> bool:
    """count <= 2^{2 eps n} * sum_{k <= eps n} C(n-1, k-1), compared exactly."""
    eps = Fraction(str(epsilon)) if isinstance(epsilon, float) else Fraction(epsilon)
    kmax = math.floor(eps * n)
    S = sum(comb(n - 1, k - 1) for k in range(1, kmax + 1))
    if count == 0:
        return True
    if S == 0:
        return False
    a, b = (2 * eps * n).numerator, (2 * eps * n).denominator
    # (count / S)^b <= 2^a
    return count ** b <= S ** b * (1 << a)


def Fnm_majorant(n: int, epsilon) -> float:
    eps = float(Fraction(str(epsilon)) if isinstance(epsilon, float) else Fraction(epsilon))
    kmax = math.floor(Fraction(str(eps)) * n)
    return 2 ** (2 * eps * n) * sum(comb(n - 1, k - 1) for k in range(1, kmax + 1))


# -- tail sums -------------------------------------------------------------

@dataclass(frozen=True)
class TailSum:
    value: float
    ratio: float
    convergent: bool
    terms: tuple[float, ...]


def tail_sum_YK(K: int, alpha: float, Nstart: int, Nend: int) -> TailSum:
    """sum_{n=Nstart}^{Nend} 15 * 2^n * 2^{-(K+1) n alpha}."""
    e = 1 - (K + 1) * alpha
    terms = tuple(M_CONST * 2.0 ** (e * n) for n in range(Nstart, Nend + 1))
    return TailSum(math.fsum(terms), 2.0 ** e, e < 0, terms)


def tail_sum_Z(epsilon: float, epsilonPrime: float, delta: float, Nstart: int, Nend: int,
               C: float = 1.0, Mend: int | None = None) -> TailSum:
    """sum_n sum_{m=1}^{Mend} C 2^{(eps' + eps + eps log2 15) n} 2^{-delta (n + m)}."""
    rate = epsilonPrime + epsilon + epsilon * math.log2(M_CONST) - delta
    mend = Nend if Mend is None else Mend
    inner = math.fsum(2.0 ** (-delta * m) for m in range(1, mend + 1))
    terms = tuple(C * 2.0 ** (rate * n) * inner for n in range(Nstart, Nend + 1))
    return TailSum(math.fsum(terms), 2.0 ** rate, rate < 0, terms)
