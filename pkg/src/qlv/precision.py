"""Arbitrary-precision complex scalars and q-shifted factorials.

Values are plain :class:`gmpy2.mpc` numbers; the binary precision is carried by
each value and arithmetic is rounded to the active gmpy2 context, which
:func:`working_precision` sets for a block of code.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import gmpy2
from gmpy2 import mpc, mpfr, mpq

PrecComplex = mpc

DEFAULT_PRECISION = 128
MIN_PRECISION = 64


class PoleError(ArithmeticError):
    """A denominator factor (1 - a q^j) vanished within the proximity threshold."""

    def __init__(self, message: str, factor: str = ""):
        super().__init__(message)
        self.factor = factor or message


@contextmanager
def working_precision(bits: int = DEFAULT_PRECISION):
    if bits < MIN_PRECISION:
        raise ValueError(f"precision_bits must be >= {MIN_PRECISION}, got {bits}")
    with gmpy2.context(precision=bits):
        yield bits


def current_precision() -> int:
    return gmpy2.get_context().precision


def pole_threshold(bits: int | None = None) -> float:
    """Proximity below which |1 - a q^j| counts as a pole: 10^-(digits/2)."""
    bits = current_precision() if bits is None else bits
    digits = bits * math.log10(2)
    return 10.0 ** (-digits / 2)


def to_prec(value) -> mpc:
    """Convert ints, floats, complex, Fractions, decimal strings or gmpy2 values."""
    if isinstance(value, mpc):
        return mpc(value)
    if isinstance(value, Fraction):
        return mpc(mpfr(mpq(value.numerator, value.denominator)))
    if isinstance(value, str):
        return mpc(value)
    if isinstance(value, (tuple, list)) and len(value) == 2:
        return mpc(to_real(value[0]), to_real(value[1]))
    return mpc(value)


def to_real(value) -> mpfr:
    if isinstance(value, Fraction):
        return mpfr(mpq(value.numerator, value.denominator))
    return mpfr(value)


@dataclass(frozen=True)
class QModulus:
    """The base q of all q-shifted factorials, 0 < |q| < 1."""

    value: mpc

    def __post_init__(self):
        v = to_prec(self.value)
        if not 0 < abs(v) < 1:
            raise ValueError(f"|q| must lie in (0, 1), got |q| = {float(abs(v))}")
        object.__setattr__(self, "value", v)


def as_q(q) -> mpc:
    return q.value if isinstance(q, QModulus) else QModulus(q).value


def binom2(m: int) -> int:
    return m * (m - 1) // 2


def ipow(x, e: int) -> mpc:
    """x**e for integer e by repeated squaring (no logarithms, no branch cut)."""
    x = to_prec(x)
    if e < 0:
        x = 1 / x
        e = -e
    result = mpc(1)
    while e:
        if e & 1:
            result = result * x
        e >>= 1
        if e:
            x = x * x
    return result


def _checked(factor: mpc, label: str) -> mpc:
    if abs(factor) < pole_threshold():
        raise PoleError(f"vanishing denominator factor {label}", label)
    return factor


def _pole_free(factor: mpc, label: str, poles: list) -> mpc:
    """The factor itself, or 1 after noting it in ``poles`` when it vanishes."""
    if abs(factor) < pole_threshold():
        poles.append(label)
        return mpc(1)
    return factor


def snap_zero(factor: mpc) -> mpc:
    """A zero-producing factor (1 - a q^j) within the pole threshold is taken as exactly zero.

    Structural zeros such as 1/(q; q)_k at k < 0 are often reached through
    rounded parameters (x q / x instead of q); without snapping the rounding
    residue gets multiplied by the huge negative-k powers of the summand.
    """
    return mpc(0) if abs(factor) < pole_threshold() else factor


def qpoch_finite(a, q, k: int) -> mpc:
    """(a; q)_k for any integer k."""
    a = to_prec(a)
    q = as_q(q)
    result = mpc(1)
    if k >= 0:
        qj = mpc(1)
        for _ in range(k):
            result = result * (1 - a * qj)
            qj = qj * q
        return result
    qinv = 1 / q
    qj = mpc(1)
    for j in range(1, -k + 1):
        qj = qj * qinv
        result = result * _checked(1 - a * qj, f"1 - a q^-{j} (a = {a})")
    return 1 / result


def qpoch_ratio(num: Sequence, den: Sequence, q, k: int) -> mpc:
    """(num_1, ..., num_r)_k / (den_1, ..., den_s)_k evaluated without spurious poles.

    Only factors that are genuine poles of the ratio (numerator parameters at
    negative k, denominator parameters at positive k) are divided by, so a
    reciprocal such as 1/(q; q)_{-1} correctly evaluates to zero.
    """
    q = as_q(q)
    num = [to_prec(a) for a in num]
    den = [to_prec(b) for b in den]
    top = mpc(1)
    bottom = mpc(1)
    poles: list[str] = []
    if k >= 0:
        qj = mpc(1)
        for j in range(k):
            for a in num:
                top = top * snap_zero(1 - a * qj)
            for b in den:
                bottom = bottom * _pole_free(1 - b * qj, f"1 - b q^{j} (b = {b})", poles)
            qj = qj * q
    else:
        qinv = 1 / q
        qj = mpc(1)
        for j in range(1, -k + 1):
            qj = qj * qinv
            for b in den:
                top = top * snap_zero(1 - b * qj)
            for a in num:
                bottom = bottom * _pole_free(1 - a * qj, f"1 - a q^-{j} (a = {a})", poles)
    # a structural zero in the numerator wins over a coincident pole
    if top == 0:
        return mpc(0)
    if poles:
        raise PoleError(f"vanishing denominator factor {poles[0]}", poles[0])
    return top / bottom


@dataclass(frozen=True)
class InfiniteProduct:
    value: mpc
    terms: int
    tail_bound: float


def qpoch_infinite_bounded(a, q, tol: float | None = None) -> InfiniteProduct:
    """(a; q)_inf truncated once the certified relative tail bound drops below tol.

    The tail obeys |log prod_{j>=J} (1 - a q^j)| <= |a||q|^J / ((1-|q|)(1-|a||q|^J))
    whenever |a||q|^J < 1/2.
    """
    a = to_prec(a)
    q = as_q(q)
    if tol is None:
        tol = 2.0 ** -(current_precision() + 4)
    if tol <= 0:
        raise ValueError("tol must be positive")
    abs_a = float(abs(a))
    abs_q = float(abs(q))
    result = mpc(1)
    qj = mpc(1)
    j = 0
    tail = abs_a  # |a||q|^j
    while True:
        if tail < 0.5:
            bound = tail / ((1 - abs_q) * (1 - tail))
            if bound < tol:
                return InfiniteProduct(result, j, bound)
        result = result * (1 - a * qj)
        qj = qj * q
        tail *= abs_q
        j += 1


def qpoch_infinite(a, q, tol: float | None = None) -> mpc:
    return qpoch_infinite_bounded(a, q, tol).value


def qpoch_list(params: Iterable, q, k) -> mpc:
    """(a_1, ..., a_m)_k where k is an integer or math.inf."""
    result = mpc(1)
    for a in params:
        if k == math.inf:
            result = result * qpoch_infinite(a, q)
        else:
            result = result * qpoch_finite(a, q, k)
    return result


def prod(values: Iterable) -> mpc:
    result = mpc(1)
    for v in values:
        result = result * v
    return result


def real_decimal(x: mpfr, digits: int) -> str:
    """Decimal string with ``digits`` significant digits; round-trips at matching precision."""
    x = mpfr(x)
    if x == 0:
        return "0"
    if not gmpy2.is_finite(x):
        return str(x)
    mant, exp, _ = x.digits(10, digits)
    sign = ""
    if mant.startswith("-"):
        sign, mant = "-", mant[1:]
    mant = mant.rstrip("0") or "0"
    frac = mant[1:]
    body = mant[0] + ("." + frac if frac else "")
    return f"{sign}{body}e{exp - 1}"


def decimal_digits(bits: int) -> int:
    return math.ceil(bits * math.log10(2)) + 2


def complex_decimal(z, bits: int | None = None) -> list[str]:
    bits = current_precision() if bits is None else bits
    z = to_prec(z)
    d = decimal_digits(bits)
    return [real_decimal(z.real, d), real_decimal(z.imag, d)]
