import math
from fractions import Fraction

import mpmath
import pytest
from gmpy2 import mpc
from hypothesis import given, settings
from hypothesis import strategies as st

from qlv.precision import (
    PoleError,
    binom2,
    complex_decimal,
    ipow,
    qpoch_finite,
    qpoch_infinite,
    qpoch_infinite_bounded,
    qpoch_list,
    to_prec,
    working_precision,
)

# moduli kept away from 1 so every factor is comfortably nonzero
moduli = st.floats(0.1, 0.9)
phases = st.floats(0, 2 * math.pi)


def _c(r, t):
    return mpc(r * math.cos(t), r * math.sin(t))


def _rel(a, b):
    return float(abs(a - b) / abs(b)) if b != 0 else float(abs(a))


@pytest.mark.parametrize("m, expected", [(3, 3), (0, 0), (-2, 3), (1, 0), (-1, 1)])
def test_binom2_examples(m, expected):
    assert binom2(m) == expected


@given(st.integers(-10**6, 10**6))
def test_binom2_matches_comb(m):
    expected = math.comb(m, 2) if m >= 0 else math.comb(1 - m, 2)
    assert binom2(m) == expected


def test_qpoch_finite_examples():
    with working_precision(128):
        assert qpoch_finite(Fraction(1, 2), Fraction(1, 2), 2) == mpc(3) / 8
        assert qpoch_finite(mpc(0.7, 0.1), 0.3, 0) == 1
        assert qpoch_finite(Fraction(1, 4), Fraction(1, 2), -1) == 2


def test_qpoch_finite_pole():
    with working_precision(128), pytest.raises(PoleError):
        qpoch_finite(Fraction(1, 2), Fraction(1, 2), -1)


def test_qpoch_infinite_zero_parameter():
    with working_precision(128):
        assert qpoch_infinite(0, 0.5) == 1


def test_qpoch_infinite_against_mpmath():
    with working_precision(128):
        value = qpoch_infinite_bounded(Fraction(1, 2), Fraction(1, 2), 1e-30)
    with mpmath.workdps(50):
        oracle = mpmath.qp(mpmath.mpf(1) / 2, mpmath.mpf(1) / 2)
        assert abs(mpmath.mpf(str(value.value.real)) - oracle) < 1e-30 * oracle
    assert str(value.value.real).startswith("0.288788095086602421278899721929")
    assert value.tail_bound < 1e-30


def test_qpoch_infinite_telescoping():
    with working_precision(128):
        a, q, tol = Fraction(1, 2), Fraction(1, 2), 1e-30
        lhs = qpoch_infinite(a, q, tol)
        rhs = qpoch_finite(a, q, 3) * qpoch_infinite(to_prec(a) * to_prec(q) ** 3, q, tol)
        assert _rel(lhs, rhs) < 2 * tol


def test_qpoch_list_examples():
    with working_precision(128):
        assert qpoch_list([], 0.5, 4) == 1
        assert qpoch_list([Fraction(1, 2), Fraction(1, 2)], Fraction(1, 2), 2) == mpc(9) / 64
        assert qpoch_list([0.3], 0.5, math.inf) == qpoch_infinite(0.3, 0.5)


@settings(max_examples=60, deadline=None)
@given(moduli, phases, st.floats(0.15, 0.8), st.integers(-8, 8))
def test_recurrence(ra, ta, q, k):
    with working_precision(128):
        a = _c(ra * 3, ta)
        lhs = qpoch_finite(a, q, k + 1)
        rhs = qpoch_finite(a, q, k) * (1 - a * ipow(to_prec(q), k))
        assert _rel(lhs, rhs) <= 2.0 ** -(128 - 8)


@settings(max_examples=60, deadline=None)
@given(moduli, phases, st.floats(0.15, 0.8), st.integers(1, 8))
def test_reflection(ra, ta, q, k):
    with working_precision(128):
        a = _c(ra * 3, ta)
        lhs = qpoch_finite(a, q, -k)
        rhs = 1 / qpoch_finite(a * ipow(to_prec(q), -k), q, k)
        assert _rel(lhs, rhs) <= 2.0 ** -(128 - 8)


@settings(max_examples=40, deadline=None)
@given(moduli, phases, st.floats(0.15, 0.8), st.integers(-4, 4))
def test_splitting(ra, ta, q, k):
    with working_precision(128):
        a, tol = _c(ra * 3, ta), 1e-30
        whole = qpoch_infinite_bounded(a, q, tol)
        rest = qpoch_infinite_bounded(a * ipow(to_prec(q), k), q, tol)
        rhs = qpoch_finite(a, q, k) * rest.value
        assert _rel(whole.value, rhs) <= 2 * (whole.tail_bound + rest.tail_bound) + 2.0 ** -110


@settings(max_examples=30, deadline=None)
@given(moduli, phases, st.floats(0.15, 0.8))
def test_precision_doubling(ra, ta, q):
    with working_precision(128):
        low = qpoch_infinite_bounded(_c(ra * 3, ta), q)
    with working_precision(256):
        high = qpoch_infinite_bounded(_c(ra * 3, ta), q)
        assert _rel(low.value, high.value) <= low.tail_bound + 2.0 ** -120


def test_minimum_precision():
    with pytest.raises(ValueError):
        with working_precision(32):
            pass


def test_precision_follows_context():
    with working_precision(256):
        x = to_prec("0.1")
        assert x.precision == (256, 256)
    with working_precision(128):
        assert (x + 1).precision == (128, 128)


@settings(max_examples=40)
@given(st.floats(-1e6, 1e6, allow_nan=False), st.floats(-1e6, 1e6, allow_nan=False))
def test_decimal_strings_round_trip(re, im):
    with working_precision(128):
        z = mpc(re, im) / 3
        assert to_prec(complex_decimal(z)) == z
