import math
import random
from fractions import Fraction as F

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from doubling_spectrum.dyadic import (
    LOG2,
    NEG_INFINITY,
    SIGMA_DIRECT_MAX,
    BinaryFixed,
    Potential,
    as_point,
    birkhoff_sum,
    doubling_iterate,
    potential_eval,
    sigma_direct,
    sigma_modulus,
    torus_distance,
)
from doubling_spectrum.errors import InsufficientPrecision, SizeLimit


def test_distance_examples():
    assert torus_distance(0, 0) == 0
    assert torus_distance(F(1, 4), F(3, 4)) == F(1, 2)
    assert torus_distance(F(1, 3), F(7, 8)) == F(11, 24)


def test_distance_mixed_representations():
    x = BinaryFixed(0b0110, 4)  # 3/8
    assert torus_distance(x, F(1, 8)) == F(1, 4)
    assert torus_distance(x, BinaryFixed(0b111, 3)) == F(1, 2)


def test_floats_rejected():
    with pytest.raises(TypeError):
        as_point(0.5)


def test_doubling_examples():
    assert doubling_iterate(F(1, 3), 1) == F(2, 3)
    assert doubling_iterate(F(1, 3), 2) == F(1, 3)
    assert doubling_iterate(F(1, 4), 2) == 0


def test_binary_shift_and_guard():
    x = BinaryFixed(random.Random(1).getrandbits(100), 100)
    y = doubling_iterate(x, 40)
    assert y.width == 60
    assert y.value == (x.value * 2**40) % 1
    with pytest.raises(InsufficientPrecision):
        doubling_iterate(x, 48)


def test_potential_examples():
    assert potential_eval(Potential(0), F(0)) == 0
    assert potential_eval(Potential(F(1, 2)), F(0)) == NEG_INFINITY
    assert potential_eval(Potential(F(1, 2)), F(1, 3)) == pytest.approx(math.log(math.sqrt(3) / 2), abs=1e-15)


def test_potential_near_singularity_is_finite_and_accurate():
    P = Potential(F(1, 2))
    x = F(1, 2**200)
    expected = float(mpmath.log(mpmath.sin(mpmath.pi * mpmath.mpf(2) ** -200)))
    assert potential_eval(P, x) == pytest.approx(expected, rel=1e-15)


def test_birkhoff_examples():
    assert birkhoff_sum(Potential(0), F(0), 5) == 0
    assert birkhoff_sum(Potential(F(1, 2)), F(1, 3), 2) == pytest.approx(math.log(0.75), abs=1e-15)
    assert birkhoff_sum(Potential(F(1, 2)), F(0), 3) == NEG_INFINITY


def test_sigma_modulus_examples():
    assert sigma_modulus(Potential(F(1, 3)), F(2, 5), 0) == 1
    assert sigma_modulus(Potential(F(1, 2)), F(1, 3), 2) == pytest.approx(3.0, rel=1e-14)
    assert sigma_modulus(Potential(F(1, 4)), F(0), 1) == pytest.approx(math.sqrt(2), rel=1e-14)


def test_sigma_direct_examples():
    assert sigma_direct(Potential(F(1, 7)), F(3, 11), 1) == 1 + 0j
    assert abs(sigma_direct(Potential(F(1, 2)), F(0), 4)) < 1e-15
    assert abs(sigma_direct(Potential(F(1, 2)), F(1, 3), 4)) == pytest.approx(3.0, rel=1e-13)


def test_sigma_direct_guard():
    with pytest.raises(SizeLimit):
        sigma_direct(Potential(F(1, 2)), F(0), SIGMA_DIRECT_MAX + 1)


def test_sigma_direct_against_mpmath():
    c, x, N = F(3, 17), F(5, 23), 257
    with mpmath.workdps(30):
        s = mpmath.fsum(mpmath.expjpi(2 * (mpmath.mpf(c.numerator) / c.denominator * bin(n).count("1")
                                           + n * mpmath.mpf(x.numerator) / x.denominator))
                        for n in range(N))
    got = sigma_direct(Potential(c), x, N)
    assert abs(got - complex(s)) < 1e-12


def test_sigma_direct_binary_point():
    rng = random.Random(5)
    x = BinaryFixed(rng.getrandbits(128), 128)
    P = Potential(F(2, 7))
    assert abs(sigma_direct(P, x, 1 << 10)) == pytest.approx(sigma_modulus(P, x, 10), rel=1e-9)


def test_exact_order_return():
    for q in (3, 5, 7, 9, 11, 13, 21, 23, 1023):
        order = next(k for k in range(1, q) if pow(2, k, q) == 1)
        for p in (1, q - 1):
            assert doubling_iterate(F(p, q), order) == F(p, q)


rationals = st.builds(lambda p, q: F(p % q, q), st.integers(0, 10**6), st.integers(1, 10**6))


@given(rationals, rationals, rationals)
def test_distance_metric(x, y, z):
    d = torus_distance
    assert d(x, y) == d(y, x)
    assert 0 <= d(x, y) <= F(1, 2)
    assert d(x, z) <= d(x, y) + d(y, z)


@given(rationals, rationals)
def test_singularity_iff_zero_distance(c, x):
    P = Potential(c)
    v = potential_eval(P, x)
    assert (v == NEG_INFINITY) == (torus_distance(x, P.b) == 0)
    assert v <= 0


@given(rationals, st.integers(1, 60))
def test_doubling_composes(x, n):
    assert doubling_iterate(doubling_iterate(x, n), 1) == doubling_iterate(x, n + 1)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 2**20 - 1), st.integers(0, 2**30 - 1), st.integers(1, 12))
def test_product_identity(cn, xn, n):
    P = Potential(F(cn, 2**20))
    x = F(xn, 2**30)
    prod = sigma_modulus(P, x, n)
    direct = abs(sigma_direct(P, x, 1 << n))
    assert direct == pytest.approx(prod, rel=1e-9, abs=1e-9)


def test_c_zero_average_minus_log2():
    P = Potential(0)
    assert birkhoff_sum(P, F(1, 7), 3) / 3 == pytest.approx(-LOG2, abs=1e-15)
