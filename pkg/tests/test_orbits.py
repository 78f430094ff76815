import math
from fractions import Fraction as F
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from doubling_spectrum.dyadic import LOG2, NEG_INFINITY, Potential, birkhoff_sum
from doubling_spectrum.errors import SizeLimit, Undefined
from doubling_spectrum.orbits import (
    PeriodicOrbit,
    enumerate_orbits,
    extremes_scan,
    gelfond_exponent,
    max_defect_bound,
    minimal_arc,
    orbit_average,
    scan_orbits,
    sturmian_arc_check,
)


def _mobius(n):
    res, k = 1, 2
    while k * k <= n:
        if n % k == 0:
            n //= k
            if n % k == 0:
                return 0
            res = -res
        k += 1
    return -res if n > 1 else res


def _necklaces(p):
    """Moreau's count of primitive binary necklaces of length p."""
    return sum(_mobius(d) * 2 ** (p // d) for d in range(1, p + 1) if p % d == 0) // p


def _brute_lyndon(p):
    out = set()
    for bits in product("01", repeat=p):
        w = "".join(bits)
        rots = [w[i:] + w[:i] for i in range(p)]
        if len(set(rots)) == p and w == min(rots):
            out.add(w)
    return out


def test_small_enumerations():
    assert [o.word for o in enumerate_orbits(1)] == ["0"]
    assert [o.word for o in enumerate_orbits(2)] == ["0", "01"]
    assert enumerate_orbits(2)[1].points == [F(1, 3), F(2, 3)]


def test_count_matches_moreau_minus_all_ones():
    # the all-ones word is the point 0 again and is not listed twice
    expected = sum(_necklaces(p) for p in range(1, 13)) - 1
    assert len(enumerate_orbits(12)) == expected == 746


@pytest.mark.parametrize("p", range(2, 11))
def test_words_are_lyndon_words(p):
    got = {o.word for o in enumerate_orbits(p) if o.period == p}
    assert got == _brute_lyndon(p) - {"1"}


@pytest.mark.parametrize("p", range(1, 13))
def test_orbits_partition_the_period_points(p):
    q = (1 << p) - 1 if p > 1 else 1
    seen = []
    for o in enumerate_orbits(p):
        if p % o.period == 0:
            seen += [int(x * q) for x in o.points]
    assert sorted(seen) == list(range(q))


def test_orbit_is_invariant():
    for o in enumerate_orbits(9):
        pts = o.points
        for i, x in enumerate(pts):
            assert (2 * x) % 1 == pts[(i + 1) % o.period]


def test_size_limit():
    with pytest.raises(SizeLimit):
        enumerate_orbits(25)


def test_orbit_average_examples():
    two = PeriodicOrbit("01")
    assert orbit_average(Potential(0), two) == pytest.approx(-LOG2, abs=1e-15)
    assert orbit_average(Potential(F(1, 2)), two) == pytest.approx(0.5 * math.log(0.75), abs=1e-15)
    assert orbit_average(Potential(F(1, 2)), PeriodicOrbit("0")) == NEG_INFINITY


def test_vectorised_scan_matches_exact_average():
    P = Potential(F(3, 10))
    for rec in scan_orbits(P, 8):
        assert rec.average == pytest.approx(orbit_average(P, rec.orbit), abs=1e-13)


def test_extremes_c_zero():
    rep = extremes_scan(Potential(0), 3)
    assert rep.beta_P == 0 and rep.argmax.word == "0"
    assert rep.alpha_P == pytest.approx(-LOG2, abs=1e-12) and rep.argmin.word == "01"


def test_extremes_c_half():
    rep = extremes_scan(Potential(F(1, 2)), 13)
    assert rep.argmax.word == "01"
    assert rep.beta_P == pytest.approx(0.5 * math.log(0.75), abs=1e-14)
    assert rep.alpha_P == NEG_INFINITY


def test_extremes_period_one_singular():
    rep = extremes_scan(Potential(F(1, 2)), 1)
    assert rep.alpha_P == rep.beta_P == NEG_INFINITY
    assert [o.word for o in rep.singular_orbits] == ["0"]


def test_gelfond():
    assert gelfond_exponent(Potential(0), 6) == 1.0
    ref = math.log(3) / math.log(4)
    assert gelfond_exponent(Potential(F(1, 2)), 2) == pytest.approx(ref, abs=1e-15)
    with pytest.raises(Undefined):
        gelfond_exponent(Potential(F(1, 2)), 1)


def test_monotone_extremes():
    P = Potential(F(2, 9))
    prev = None
    for m in range(1, 11):
        rep = extremes_scan(P, m)
        if prev:
            assert rep.alpha_P <= prev.alpha_P and rep.beta_P >= prev.beta_P
        prev = rep


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 999))
def test_symmetry_c_and_one_minus_c(k):
    a = extremes_scan(Potential(F(k, 1000)), 9)
    b = extremes_scan(Potential(F(1000 - k, 1000)), 9)
    assert a.beta_P == pytest.approx(b.beta_P, abs=1e-12)
    if a.alpha_P != NEG_INFINITY or b.alpha_P != NEG_INFINITY:
        assert a.alpha_P == pytest.approx(b.alpha_P, abs=1e-12)


def test_arc_examples():
    ok, arc = sturmian_arc_check(PeriodicOrbit("01"))
    assert ok and (arc.start, arc.end, arc.length) == (F(1, 3), F(2, 3), F(1, 3))
    ok, arc = sturmian_arc_check(PeriodicOrbit("0"))
    assert ok and arc.length == 0
    ok, arc = sturmian_arc_check(PeriodicOrbit("001"))
    assert ok and arc.length == F(3, 7)


def test_arc_wraps_zero():
    arc = minimal_arc([F(9, 10), F(1, 10)])
    assert arc.length == F(1, 5) and arc.start == F(9, 10)


def test_maximizers_are_sturmian():
    for c in (F(1, 2), F(1, 3), F(1, 5), F(2, 7), F(9, 20)):
        ok, _ = sturmian_arc_check(extremes_scan(Potential(c), 12))
        assert ok


def test_defect_c_zero():
    assert max_defect_bound(Potential(0), 8, 2**10, maxPeriod=6) == 0.0


def test_defect_n2_analytic():
    # S_2 f = log(2 sin^2 pi x |cos pi x|) has max 4/(3 sqrt 3)
    exact = math.log(4 / (3 * math.sqrt(3)) / 0.75)
    got = max_defect_bound(Potential(F(1, 2)), 2, 2**8)
    assert exact - 1e-3 < got <= exact + 1e-12


def test_defect_refinement_only_increases():
    P = Potential(F(1, 2))
    coarse = max_defect_bound(P, 10, 2**10)
    fine = max_defect_bound(P, 10, 2**10, refine_top=16)
    assert fine >= coarse


def test_defect_grid_value_is_a_birkhoff_sum():
    P = Potential(F(1, 2))
    beta = extremes_scan(P, 8).beta_P
    best = max(birkhoff_sum(P, F(k, 65), 5) for k in range(65)) - 5 * beta
    assert max_defect_bound(P, 5, 64, beta=beta) == pytest.approx(best, abs=1e-12)
