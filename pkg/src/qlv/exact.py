"""Exact rational evaluation of the finite identities (no tolerance)."""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Mapping, Sequence

from .precision import PoleError, binom2

ExactScalar = Fraction


class NotExactCapable(ValueError):
    """The identity involves infinite series or products."""


def _frac(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, int):
        return Fraction(v)
    raise TypeError(f"exact mode needs rationals, got {type(v).__name__}")


def qpoch_finite_exact(a, q, k: int) -> Fraction:
    a, q = _frac(a), _frac(q)
    if not 0 < q < 1:
        raise ValueError("exact mode requires 0 < q < 1")
    result = Fraction(1)
    if k >= 0:
        for j in range(k):
            result *= 1 - a * q**j
        return result
    for j in range(1, -k + 1):
        factor = 1 - a * q**-j
        if factor == 0:
            raise PoleError(f"1 - a q^-{j} = 0 for a = {a}", f"1 - a q^-{j}, a = {a}")
        result *= factor
    return 1 / result


def vandermonde_exact(x: Sequence[Fraction], k: Sequence[int], q: Fraction) -> Fraction:
    n = len(x)
    result = Fraction(1)
    for i in range(n):
        for j in range(i + 1, n):
            if x[i] == x[j]:
                raise PoleError(f"x_{i + 1} = x_{j + 1}", "x_i - x_j")
            result *= (x[i] * q ** k[i] - x[j] * q ** k[j]) / (x[i] - x[j])
    return result


def shift_identity_sides(x: Sequence, q, m: Sequence[int]) -> tuple[Fraction, Fraction]:
    """Both sides of the index-shift product identity used to prove the A_n 1psi1 sum."""
    x = [_frac(v) for v in x]
    q = _frac(q)
    n = len(x)
    total = sum(m)
    lhs = Fraction(1)
    for i in range(n):
        for j in range(n):
            lhs *= qpoch_finite_exact(x[i] * q / x[j], q, m[j] - m[i])
    exponent = -binom2(total + 1) + n * sum(binom2(mi + 1) for mi in m)
    rhs = Fraction((-1) ** ((n - 1) * total)) * q**exponent
    for i in range(n):
        rhs *= x[i] ** (total - n * m[i])
    rhs *= vandermonde_exact(x, [-mi for mi in m], q)
    return lhs, rhs


def terminating_lemma_sides(a: Sequence, x: Sequence, q, f: Sequence) -> tuple[Fraction, Fraction]:
    """Both sides of the terminating A_n lemma with f(0..N) given as a value list."""
    a = [_frac(v) for v in a]
    x = [_frac(v) for v in x]
    q = _frac(q)
    f = [_frac(v) for v in f]
    n = len(x)
    big_n = len(f) - 1
    prod_a = Fraction(1)
    for v in a:
        prod_a *= v
    lhs = sum(
        (qpoch_finite_exact(prod_a, q, m) / qpoch_finite_exact(q, q, m) * f[m] for m in range(big_n + 1)),
        Fraction(0),
    )
    rhs = Fraction(0)
    for k in itertools.product(range(big_n + 1), repeat=n):
        if sum(k) > big_n:
            continue
        term = vandermonde_exact(x, k, q)
        for i in range(n):
            for j in range(n):
                den = qpoch_finite_exact(x[i] * q / x[j], q, k[i])
                if den == 0:
                    raise PoleError(f"(x_{i + 1} q / x_{j + 1})_{k[i]} = 0", "x_i q / x_j")
                term *= qpoch_finite_exact(x[i] * a[j] / x[j], q, k[i]) / den
        rhs += term * f[sum(k)]
    return lhs, rhs


EXACT_SIDES = {
    "I05": lambda p: shift_identity_sides(p["x"], p["q"], p["m"]),
    "I06": lambda p: terminating_lemma_sides(p["a"], p["x"], p["q"], p["f"]),
}


def exact_sides(identity_id: str, point: Mapping) -> tuple[Fraction, Fraction]:
    try:
        sides = EXACT_SIDES[identity_id]
    except KeyError:
        raise NotExactCapable(f"{identity_id} is not a finite identity") from None
    return sides(point)


def verify_finite_identity_exact(identity_id: str, point: Mapping) -> bool:
    lhs, rhs = exact_sides(identity_id, point)
    return lhs == rhs
