"""The orbit of the singular point b and the integrals around log|sin|.

Everything that touches b's orbit is exact: distances are integer ratios
and only the final ``log sin`` is a float.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .dyadic import (
    LOG2,
    NEG_INFINITY,
    BinaryFixed,
    Potential,
    TorusPoint,
    as_point,
    distance_ratio,
    log_sin_pi,
)
from .errors import (
    HypothesisViolated,
    InsufficientPrecision,
    NonRationalInput,
    PreconditionViolated,
    SizeLimit,
)
from .quadrature import ORDER, checked_integral

GUARD_BITS = 64
MAX_CYCLE_STEPS = 10**7


class OrbitKind(str, Enum):
    PERIODIC = "PERIODIC"
    PREPERIODIC = "PREPERIODIC"
    APERIODIC_RATIONAL = "APERIODIC_RATIONAL"


class OrbitClass(NamedTuple):
    kind: OrbitKind
    tail: int
    period: int


def orbit_class_of_b(P: Potential) -> OrbitClass:
    """Tail and cycle length of b under doubling, by exact iteration."""
    b = P.b
    if isinstance(b, BinaryFixed):
        raise NonRationalInput("orbit classification needs an exact rational c")
    seen: dict[Fraction, int] = {}
    x, n = b, 0
    while x not in seen:
        if n > MAX_CYCLE_STEPS:
            return OrbitClass(OrbitKind.APERIODIC_RATIONAL, n, 0)
        seen[x] = n
        x = (2 * x) % 1
        n += 1
    tail = seen[x]
    kind = OrbitKind.PERIODIC if tail == 0 else OrbitKind.PREPERIODIC
    return OrbitClass(kind, tail, n - tail)


def _doubled(x: TorusPoint) -> TorusPoint:
    if isinstance(x, BinaryFixed):
        return x.shift(1)
    return (2 * x) % 1


@dataclass
class ReturnTrace:
    c: TorusPoint
    N: int
    q: list[float]
    partial_avg: list[float]
    m_star_estimate: float
    periodic: bool = False
    # 1-based index of the first exact return, when periodic
    terminated_at: int | None = None

    @property
    def status(self) -> str:
        return "PERIODIC" if self.periodic else "OK"


def _return_terms(x0: TorusPoint, y: TorusPoint, N: int):
    """(q_n, log sin pi d(T^n x0, y)) for n = 1..N; stops after an exact hit."""
    x = x0
    for _ in range(N):
        x = _doubled(x)
        num, den = distance_ratio(x, y)
        if num == 0:
            yield math.inf, NEG_INFINITY
            return
        yield math.log2(den) - math.log2(num), log_sin_pi(num, den)


def mcstar_trace(P: Potential, N: int, width: int | None = None) -> ReturnTrace:
    """Partial averages (1/n) sum_{k<=n} log|sin pi(2^k b - b)|.

    ``m_star_estimate`` is the infimum of the partial averages over the
    second half of the horizon, or -inf when b returns to itself.
    """
    if N < 1:
        raise ValueError("N must be positive")
    b = P.b
    if isinstance(b, BinaryFixed):
        need = N + GUARD_BITS
        if width is not None and width < need:
            raise InsufficientPrecision(f"width {width} < N + {GUARD_BITS}")
        if b.width < need:
            raise InsufficientPrecision(f"b carries {b.width} bits, need {need}")
    q, avg = [], []
    s = 0.0
    for n, (qn, term) in enumerate(_return_terms(b, b, N), start=1):
        if term == NEG_INFINITY:
            return ReturnTrace(P.c, N, q, avg, NEG_INFINITY, True, n)
        s += term
        q.append(qn)
        avg.append(s / n)
    tail = avg[len(avg) // 2:]
    return ReturnTrace(P.c, N, q, avg, min(tail))


# -- Monte Carlo for the a.e. return exponent ------------------------------

@dataclass
class MonteCarloSummary:
    samples: int
    N: int
    seed: int
    values: list[float]
    self_returns: int
    mean: float
    std: float
    within: float
    tolerance: float

    @property
    def fraction_within(self) -> float:
        return self.within


def _sample_average(xi: TorusPoint, N: int) -> float | None:
    """(1/N) sum_{n=1}^N log|sin pi(2^n xi - xi)|; None on a self-return."""
    if isinstance(xi, BinaryFixed):
        # all N iterates stay in one width: 2^n xi mod 1 = (X << n) mod 2^w
        w, X = xi.width, xi.bits
        den, mask = 1 << w, (1 << w) - 1
        half = 1 << (w - 1)
        Y, terms = X, []
        for _ in range(N):
            Y = (Y << 1) & mask
            diff = (Y - X) & mask
            if diff == 0:
                return None
            terms.append(log_sin_pi(diff if diff <= half else den - diff, den))
        return math.fsum(terms) / N
    terms = [t for _, t in _return_terms(xi, xi, N)]
    if terms[-1] == NEG_INFINITY:
        return None
    return math.fsum(terms) / N


def _draw(seed_seq: np.random.SeedSequence, width: int) -> BinaryFixed:
    rng = np.random.default_rng(seed_seq)
    raw = int.from_bytes(rng.bytes((width + 7) // 8), "little")
    return BinaryFixed(raw & ((1 << width) - 1), width)


def _draw_and_average(args) -> float | None:
    ss, width, N = args
    return _sample_average(_draw(ss, width), N)


def monte_carlo_A5(samples: int, N: int, seed: int = 0, xis: Sequence[TorusPoint] | None = None,
                   workers: int = 1, tolerance: float = 0.05) -> MonteCarloSummary:
    """Distribution of the return average at horizon N over random xi.

    Each sample has its own child seed, so results do not depend on the
    number of workers or on scheduling.  Samples that land exactly on
    themselves (periodic xi) are counted as self-returns and left out.
    """
    if N < 1 or samples < 1:
        raise ValueError("samples and N must be positive")
    if xis is not None:
        results: Iterable = [_sample_average(as_point(x), N) for x in xis]
        samples = len(xis)
    else:
        width = N + GUARD_BITS
        tasks = [(ss, width, N) for ss in np.random.SeedSequence(seed).spawn(samples)]
        if workers > 1:
            with ProcessPoolExecutor(workers) as ex:
                results = list(ex.map(_draw_and_average, tasks, chunksize=4))
        else:
            results = [_draw_and_average(t) for t in tasks]
    vals = [v for v in results if v is not None]
    flagged = samples - len(vals)
    if vals:
        arr = np.array(vals)
        mean, std = float(arr.mean()), float(arr.std())
        within = float(np.mean(np.abs(arr + LOG2) <= tolerance))
    else:
        mean = std = within = math.nan
    return MonteCarloSummary(samples, N, seed, vals, flagged, mean, std, within, tolerance)


# -- binding periods and free returns --------------------------------------

@dataclass
class BindingReport:
    rho: Fraction
    p: int
    K0: float | None
    lower_bound: float | None
    rho0: Fraction
    bind2_holds: bool
    distances: list[Fraction] = field(default_factory=list, repr=False)


def _b_distances(b: TorusPoint, horizon: int) -> list[Fraction]:
    """d(T^k b, b) for k = 1..horizon (index k-1)."""
    out, x = [], b
    for _ in range(horizon):
        x = _doubled(x)
        out.append(Fraction(*distance_ratio(x, b)))
    return out


def _check_bind0(d: list[Fraction], K0: float) -> None:
    """(1/n) sum_{i<=n} log2 d(T^i b, b) > -K0 for every n in the horizon."""
    s = 0.0
    for n, di in enumerate(d, start=1):
        if di == 0:
            raise HypothesisViolated(f"b returns to itself at step {n}")
        s += math.log2(di.numerator) - math.log2(di.denominator)
        if s / n <= -K0:
            raise HypothesisViolated(
                f"average log2-distance {s / n:.6g} <= -K0 = {-K0} at n = {n}")


def binding_period(P: Potential, rho, K0: float | None = None,
                   horizon: int = 1000) -> BindingReport:
    """Largest p with 2^{k+1} rho < d(T^k b, b) for 1 <= k <= p.

    With K0 given, the averaged-distance hypothesis is checked over the
    horizon first, and the logarithmic lower bound on p is reported when
    rho <= d(Tb, b)/8.
    """
    rho = Fraction(rho)
    if rho <= 0:
        raise ValueError("rho must be positive")
    b = P.b
    if isinstance(b, BinaryFixed) and b.width < horizon + GUARD_BITS:
        horizon = b.width - GUARD_BITS
        if horizon < 2:
            raise InsufficientPrecision("b has too few bits for any horizon")
    d = _b_distances(b, horizon)
    if K0 is not None:
        _check_bind0(d, K0)
    p = 0
    while p < horizon and (1 << (p + 2)) * rho < d[p]:
        p += 1
    if p >= horizon:
        raise SizeLimit(f"binding period exceeds the horizon {horizon}")
    rho0 = d[0] / 8
    bind2 = (1 << (p + 2)) * rho >= d[p]
    lower = None
    if K0 is not None and rho <= rho0:
        lower = math.log2(rho.denominator) - math.log2(rho.numerator)
        lower /= 2 * (K0 + 2)
    return BindingReport(rho, p, K0, lower, rho0, bind2, d[:p + 1])


def first_free_return(P: Potential, x, horizon: int) -> int | None:
    """Smallest s > p(d(x, b)) with d(T^s x, b) < d(Tb, b)/8, or None."""
    x = as_point(x)
    b = P.b
    rho = Fraction(*distance_ratio(x, b))
    if rho == 0:
        raise PreconditionViolated("x must differ from b")
    try:
        rep = binding_period(P, rho, horizon=horizon + 1)
    except SizeLimit:
        return None
    y = x
    for s in range(1, horizon + 1):
        y = _doubled(y)
        if s > rep.p and Fraction(*distance_ratio(y, b)) < rep.rho0:
            return s
    return None


def free_return_average(P: Potential, x, s: int) -> float:
    """(1/s) sum_{i<s} log2 d(T^i x, b); -inf if the orbit hits b."""
    x = as_point(x)
    b = P.b
    total = 0.0
    for _ in range(s):
        num, den = distance_ratio(x, b)
        if num == 0:
            return NEG_INFINITY
        total += math.log2(num) - math.log2(den)
        x = _doubled(x)
    return total / s


# -- integrals of log|sin pi x| --------------------------------------------

def mean_log_sin(order: int | None = None) -> float:
    """Integral of log|sin pi x| over the circle (equals -log 2)."""
    edges = [Fraction(0), Fraction(1)]
    return checked_integral(edges, [(1, Fraction(0))], lambda v: v[0], order=order or ORDER)


def modulus_of_continuity(delta, quadPoints: int | None = None) -> float:
    """L^1 modulus: integral over the circle of |f(x + delta) - f(x)|, f = log|sin pi x|.

    Panels break at the two poles (0 and 1 - delta) and at the midpoint
    between them where the integrand changes sign.
    """
    d = Fraction(delta)
    if not 0 < d < Fraction(1, 4):
        raise ValueError("delta must lie in (0, 1/4)")
    m = (1 - d) / 2
    edges = [Fraction(0), m, 1 - d, Fraction(1)]
    maps = [(1, d), (1, Fraction(0))]
    return checked_integral(edges, maps, lambda v: np.abs(v[0] - v[1]), order=quadPoints or ORDER)


def covariance_decay(j: int, k: int, quadPoints: int | None = None) -> float:
    """Cov of log|sin pi (2^j-1)x| and log|sin pi (2^k-1)x| under Lebesgue measure."""
    if not 1 <= j <= k <= 14:
        raise ValueError("need 1 <= j <= k <= 14")
    p, q = (1 << j) - 1, (1 << k) - 1
    L = p * q // math.gcd(p, q)
    ints = sorted({m * (L // p) for m in range(p)} | {m * (L // q) for m in range(q)} | {L})
    edges = [Fraction(e, L) for e in ints]
    maps = [(p, Fraction(0)), (q, Fraction(0))]
    # centred factors: each has mean -log 2
    return checked_integral(edges, maps, lambda v: (v[0] + LOG2) * (v[1] + LOG2),
                            scale=math.pi ** 2 / 12, order=quadPoints or ORDER)
