"""Dyadic Markov subsystems, pressure brackets and the dimension spectrum.

A subsystem at level N keeps the dyadic intervals ``[k/2^N, (k+1)/2^N]``
whose closures stay at distance >= delta from b, with the doubling
transitions ``k -> 2k, 2k+1 (mod 2^N)`` between kept intervals.  On each
interval f_c is bracketed by its endpoint values, which makes the
pressure bracket certified up to the floating-point eigenvalue.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Sequence

import mpmath
import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import breadth_first_order, connected_components

from .dyadic import LOG2, NEG_INFINITY, BinaryFixed, Potential, as_point, log_sin_pi, to_fraction
from .errors import (
    EmptySystem,
    GridTooNarrow,
    HypothesisViolated,
    PowerIterationStall,
    PreconditionViolated,
    WindowViolation,
)
from .orbits import extremes_scan

MINUS_INFINITY = NEG_INFINITY
POWER_RTOL = 1e-12
POWER_MAX_ITER = 100_000
FLAT_SLOPE = 1e-9
STEEP_SLOPE = 1e-3


@dataclass
class MarkovSubsystem:
    """Transition graph on dyadic intervals with per-node bracket of f_c.

    ``nodes`` holds the interval indices k of the recurrent part;
    ``edges`` is an (m, 2) array of positions into ``nodes``.
    """

    level: int
    delta: Fraction | None
    nodes: np.ndarray
    edges: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    discarded: list[np.ndarray] = field(default_factory=list, repr=False)
    candidates: int = 0

    @property
    def size(self) -> int:
        return len(self.nodes)

    def matrix(self) -> sparse.csr_matrix:
        n = self.size
        data = np.ones(len(self.edges))
        return sparse.csr_matrix((data, (self.edges[:, 0], self.edges[:, 1])), shape=(n, n))

    @classmethod
    def from_graph(cls, n: int, edges, lower, upper=None) -> "MarkovSubsystem":
        """A synthetic subsystem on nodes 0..n-1 (no geometry attached)."""
        lower = np.asarray(lower, dtype=float) * np.ones(n)
        upper = lower if upper is None else np.asarray(upper, dtype=float) * np.ones(n)
        return cls(0, None, np.arange(n), np.asarray(edges, dtype=np.int64).reshape(-1, 2),
                   lower, upper)


def _dist_to_b(k: int, L: int, b: Fraction) -> Fraction:
    """Distance from b to the closed interval [k/L, (k+1)/L] on the circle."""
    lo = Fraction(k, L)
    off = (b - lo) % 1
    if off <= Fraction(1, L):
        return Fraction(0)
    return min(off - Fraction(1, L), 1 - off)


def _endpoint_value(x: Fraction, b: Fraction) -> float:
    d = abs((x - b) % 1)
    d = min(d, 1 - d)
    return log_sin_pi(d.numerator, d.denominator)


def build_subsystem(P: Potential, delta, N: int) -> MarkovSubsystem:
    """Level-N dyadic subsystem avoiding the open ball B(b, delta).

    Kept is the largest nontrivial strongly connected component; smaller
    ones are recorded in ``discarded``.
    """
    delta = Fraction(delta)
    c = to_fraction(as_point(P.c))
    if c == 0:
        raise HypothesisViolated("c = 0 has no mixing subsystem; use the closed form")
    if not Fraction(1, 1 << N) < delta / 4:
        raise PreconditionViolated(f"2^-{N} must be < delta/4")
    b = to_fraction(P.b)
    top = (b + Fraction(1, 2)) % 1
    L = 1 << N
    keep = [k for k in range(L) if _dist_to_b(k, L, b) >= delta]
    if not keep:
        raise EmptySystem(f"no level-{N} interval avoids B(b, {delta})")
    pos = {k: i for i, k in enumerate(keep)}
    src, dst = [], []
    for i, k in enumerate(keep):
        for j in (2 * k % L, (2 * k + 1) % L):
            if j in pos:
                src.append(i)
                dst.append(pos[j])
    n = len(keep)
    A = sparse.csr_matrix((np.ones(len(src)), (src, dst)), shape=(n, n))
    ncomp, labels = connected_components(A, directed=True, connection="strong")
    loops = np.zeros(n, dtype=bool)
    loops[np.array(src)[np.array(src) == np.array(dst)]] = True
    comps = []
    for lab in range(ncomp):
        members = np.flatnonzero(labels == lab)
        if len(members) > 1 or loops[members[0]]:
            comps.append(members)
    if not comps:
        raise EmptySystem("no cycle survives outside the hole")
    comps.sort(key=len, reverse=True)
    main = comps[0]
    keep_arr = np.array(keep, dtype=np.int64)
    remap = -np.ones(n, dtype=np.int64)
    remap[main] = np.arange(len(main))
    src_a, dst_a = remap[np.array(src)], remap[np.array(dst)]
    ok = (src_a >= 0) & (dst_a >= 0)
    nodes = keep_arr[main]
    lower = np.empty(len(nodes))
    upper = np.empty(len(nodes))
    for i, k in enumerate(nodes.tolist()):
        a, e = Fraction(k, L), Fraction(k + 1, L)
        va, ve = _endpoint_value(a, b), _endpoint_value(e, b)
        lo, hi = min(va, ve), max(va, ve)
        if a < top < e:
            hi = 0.0
        lower[i], upper[i] = lo, hi
    return MarkovSubsystem(N, delta, nodes, np.stack([src_a[ok], dst_a[ok]], axis=1),
                           lower, upper, [keep_arr[cmp] for cmp in comps[1:]], n)


def check_irreducible_aperiodic(M: MarkovSubsystem) -> tuple[bool, bool]:
    """Strong connectivity, and gcd of cycle lengths equal to 1."""
    A = M.matrix()
    ncomp, _ = connected_components(A, directed=True, connection="strong")
    if ncomp != 1 or len(M.edges) == 0:
        return False, False
    order, pred = breadth_first_order(A, 0, directed=True, return_predecessors=True)
    depth = np.zeros(M.size, dtype=np.int64)
    for v in order[1:]:
        depth[v] = depth[pred[v]] + 1
    u, v = M.edges[:, 0], M.edges[:, 1]
    g = reduce(math.gcd, (np.abs(depth[u] + 1 - depth[v])).tolist(), 0)
    return True, g == 1


def _successors(M: MarkovSubsystem) -> np.ndarray:
    """(n, 2) successor table, -1 where an edge is missing (out-degree <= 2)."""
    S = -np.ones((M.size, 2), dtype=np.int64)
    slot = np.zeros(M.size, dtype=np.int64)
    for u, v in M.edges.tolist():
        if slot[u] >= 2:
            raise PreconditionViolated("out-degree above 2")
        S[u, slot[u]] = v
        slot[u] += 1
    return S


def _perron_log(S: np.ndarray, tw: np.ndarray, lv: np.ndarray | None = None):
    """Collatz-Wielandt bounds on log rho(diag(e^tw) A), and the log Perron vector.

    Works with log entries throughout, so weights like e^{-300} neither
    underflow nor stall.  Iterates with M + sigma I, sigma the running
    estimate of rho: near-periodic dominant cycles put eigenvalues close to
    rho times roots of unity, and the shift damps them.  The bounds are
    taken for M itself, which holds for any positive vector.
    """
    lv = np.zeros(len(tw)) if lv is None else lv
    has = S >= 0
    for _ in range(POWER_MAX_ITER):
        a = np.where(has[:, 0], lv[S[:, 0]], -np.inf)
        b = np.where(has[:, 1], lv[S[:, 1]], -np.inf)
        lm = tw + np.logaddexp(a, b)
        r = lm - lv
        lo, hi = float(r.min()), float(r.max())
        if hi - lo <= POWER_RTOL:
            return lo, hi, lv
        lu = np.logaddexp(lm, (lo + hi) / 2 + lv)
        lv = lu - lu.max()
    raise PowerIterationStall(f"no convergence in {POWER_MAX_ITER} iterations")


def pressure(M: MarkovSubsystem, t: float, _warm: dict | None = None) -> tuple[float, float]:
    """(pLower, pUpper) for the pressure of t*f_c on the subsystem."""
    warm = {} if _warm is None else _warm
    S = warm.get("S")
    if S is None:
        S = warm["S"] = _successors(M)
    w_lo, w_hi = (M.lower, M.upper) if t >= 0 else (M.upper, M.lower)
    lo, _, lv = _perron_log(S, t * w_lo, warm.get("v"))
    _, hi, lv = _perron_log(S, t * w_hi, lv)
    warm["v"] = lv
    return lo, hi


@dataclass
class PressureCurve:
    c: object
    delta: Fraction | None
    level: int
    samples: list[tuple[float, float, float]]

    @property
    def t_range(self) -> tuple[float, float]:
        return self.samples[0][0], self.samples[-1][0]

    @property
    def t(self) -> np.ndarray:
        return np.array([s[0] for s in self.samples])

    @property
    def lower(self) -> np.ndarray:
        return np.array([s[1] for s in self.samples])

    @property
    def upper(self) -> np.ndarray:
        return np.array([s[2] for s in self.samples])

    @classmethod
    def from_function(cls, fn, t_grid) -> "PressureCurve":
        ts = sorted(float(t) for t in t_grid)
        return cls(None, None, 0, [(t, fn(t), fn(t)) for t in ts])


def default_t_grid() -> list[float]:
    """Dense on [-4, 4] (step 1/32, integers included), geometric out to +-64."""
    dense = [i / 32 for i in range(-128, 129)]
    geo = np.geomspace(4, 64, 17)[1:]
    return sorted(set(dense) | set(geo.tolist()) | set((-geo).tolist()))


def pressure_curve(P: Potential, delta, N: int, tGrid: Sequence[float] | None = None,
                   M: MarkovSubsystem | None = None) -> PressureCurve:
    if M is None:
        M = build_subsystem(P, delta, N)
    ts = sorted(float(t) for t in (tGrid if tGrid is not None else default_t_grid()))
    # warm-start from t = 0 outward so consecutive eigenvectors are close
    order = sorted(range(len(ts)), key=lambda i: abs(ts[i]))
    out: dict[float, tuple[float, float]] = {}
    warm_pos: dict = {}
    warm_neg: dict = {}
    for i in order:
        t = ts[i]
        out[t] = pressure(M, t, warm_pos if t >= 0 else warm_neg)
        if t == 0:
            warm_neg.update(warm_pos)
    return PressureCurve(P.c, Fraction(delta) if delta is not None else None, N,
                         [(t, *out[t]) for t in ts])


def _transform_one(t: np.ndarray, p: np.ndarray, alpha: float) -> float:
    g = p - t * alpha
    i = int(np.argmin(g))
    val = float(g[i])
    if 0 < i < len(t) - 1:
        return val
    j = 1 if i == 0 else len(t) - 2
    slope = (g[j] - g[i]) / (t[j] - t[i])
    # decreasing toward the boundary means g keeps falling off the grid
    falling = slope > 0 if i == 0 else slope < 0
    if abs(slope) <= FLAT_SLOPE or not falling:
        return val
    if abs(slope) > STEEP_SLOPE:
        return MINUS_INFINITY
    raise GridTooNarrow(f"slope {slope:.3g} at t = {t[i]} is inconclusive")


def legendre_transform(curve: PressureCurve, alpha: float):
    """inf_t p(t) - t*alpha over the grid, as (lower, upper), or MINUS_INFINITY."""
    if len(curve.samples) < 3:
        raise PreconditionViolated("need at least three samples")
    t = curve.t
    lo = _transform_one(t, curve.lower, alpha)
    hi = _transform_one(t, curve.upper, alpha)
    if lo == MINUS_INFINITY and hi == MINUS_INFINITY:
        return MINUS_INFINITY
    return lo, hi


@dataclass
class SpectrumPoint:
    alpha: float
    d_lower: float
    d_upper: float
    converged: bool
    trace: list[tuple[Fraction, float, float]] = field(default_factory=list)


@dataclass
class SpectrumCurve:
    c: object
    alpha_window: tuple[float, float]
    points: list[SpectrumPoint]

    @property
    def alpha_grid(self) -> list[float]:
        return [p.alpha for p in self.points]

    @property
    def D(self) -> list[tuple[float, float]]:
        return [(p.d_lower, p.d_upper) for p in self.points]


def _clip01(x: float) -> float:
    return min(max(x, 0.0), 1.0)


def dimension_spectrum(P: Potential, alphaGrid: Sequence[float], deltaSchedule: Sequence,
                       N: int, maxPeriod: int = 12,
                       tGrid: Sequence[float] | None = None) -> SpectrumCurve:
    """p*(alpha)/log 2 per delta; the reported bracket is the last delta's.

    ``converged`` is set when the last two delta entries differ by < 0.01.
    """
    scan = extremes_scan(P, maxPeriod)
    window = (scan.alpha_P, scan.beta_P)
    for a in alphaGrid:
        if not window[0] <= a <= window[1]:
            raise WindowViolation(f"alpha = {a} outside [{window[0]}, {window[1]}]")
    traces: list[list] = [[] for _ in alphaGrid]
    for delta in deltaSchedule:
        curve = pressure_curve(P, delta, N, tGrid)
        for i, a in enumerate(alphaGrid):
            r = legendre_transform(curve, a)
            if r == MINUS_INFINITY:
                lo = hi = 0.0
            else:
                lo, hi = _clip01(r[0] / LOG2), _clip01(r[1] / LOG2)
            traces[i].append((Fraction(delta), lo, hi))
    pts = []
    for a, tr in zip(alphaGrid, traces):
        last = tr[-1]
        conv = len(tr) > 1 and abs(tr[-1][1] - tr[-2][1]) < 0.01 and abs(tr[-1][2] - tr[-2][2]) < 0.01
        pts.append(SpectrumPoint(a, last[1], last[2], conv, tr))
    return SpectrumCurve(P.c, window, pts)


def c_zero_reference(t: float) -> float:
    """Closed-form pressure at c = 0."""
    return max((1 - t) * LOG2, 0.0)


def c_zero_spectrum(alpha: float) -> float:
    """Closed-form Legendre transform at c = 0."""
    if -LOG2 <= alpha <= 0:
        return abs(alpha)
    return MINUS_INFINITY


def good_time_detector(P: Potential, x, delta, deltaPrime, horizon: int) -> list[int]:
    """All n <= horizon that are (delta, delta')-good times of x.

    J is the level-n pullback of B(b, delta) containing x, centred at the
    preimage z of b next to x; T^j(J) has centre T^j z and radius
    delta 2^{j-n}.
    """
    delta, dp = Fraction(delta), Fraction(deltaPrime)
    if not 0 < dp < delta < Fraction(1, 2):
        raise PreconditionViolated("need 0 < delta' < delta < 1/2")
    b = to_fraction(P.b)
    x = to_fraction(as_point(x))
    good = []
    y = x
    for n in range(1, horizon + 1):
        y = (2 * y) % 1
        s = (y - b) % 1
        if s > Fraction(1, 2):
            s -= 1
        if abs(s) >= dp:
            continue
        z = (x - s / (1 << n)) % 1
        ok, zj = True, z
        for j in range(n):
            d = (zj - b) % 1
            if min(d, 1 - d) < delta / (1 << (n - j)):
                ok = False
                break
            zj = (2 * zj) % 1
        if ok:
            good.append(n)
    return good


# -- exact pressure at even integer t --------------------------------------
#
# For even t the weight |sin pi(x - b)|^t is a trigonometric polynomial of
# degree d = t/2, and the transfer operator (Lg)_k = 2 sum_m w_m g_{2k-m}
# maps Fourier degree <= d into itself.  The constant 1 lies in that space,
# so the spectral radius of the (t+1) x (t+1) matrix is exp p(t).

def _sin_power_coeffs(b: Fraction, t: int) -> dict[int, mpmath.mpc]:
    d = t // 2
    out = {}
    for m in range(t + 1):
        k = m - d
        phase = mpmath.expjpi(-2 * k * mpmath.mpf(b.numerator) / b.denominator)
        out[k] = mpmath.binomial(t, m) * (-1) ** (t - m) / mpmath.mpc(0, 2) ** t * phase
    return out


def trig_pressure(P: Potential, t: int, dps: int = 40) -> mpmath.mpf:
    """p(t) for even t >= 2 from the finite Fourier transfer matrix."""
    if t < 2 or t % 2:
        raise PreconditionViolated("t must be an even integer >= 2")
    b = to_fraction(P.b)
    with mpmath.workdps(dps):
        w = _sin_power_coeffs(b, t)
        d = t // 2
        ks = range(-d, d + 1)
        A = mpmath.matrix(len(ks), len(ks))
        for i, k in enumerate(ks):
            for j, n in enumerate(ks):
                A[i, j] = 2 * w.get(2 * k - n, 0)
        ev = mpmath.eig(A, left=False, right=False)
        return +mpmath.log(max(abs(z) for z in ev))


def orbit_average_mp(P: Potential, points, dps: int = 40) -> mpmath.mpf:
    """Orbit average of f_c in high precision (rational points only)."""
    b = to_fraction(P.b)
    with mpmath.workdps(dps):
        vals = []
        for x in points:
            d = (Fraction(x) - b) % 1
            vals.append(mpmath.log(mpmath.sinpi(mpmath.mpf(d.numerator) / d.denominator)))
        return +(mpmath.fsum(vals) / len(vals))
