import itertools
import math
from fractions import Fraction as F

import mpmath
import pytest
from gmpy2 import mpc
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from qlv.catalog import eval_side
from qlv.kernels import (
    ArityTooLarge,
    DegenerateXError,
    HypTerm,
    NoConvergence,
    ProductSummand,
    Summand,
    TruncationSchedule,
    adaptive_sum,
    an_summand_gustafson_type,
    an_summand_psi_type,
    classical_phi,
    classical_psi,
    classical_psi_summand,
    lattice_slice_sum,
    lattice_sum_box,
    permutation_sum,
    shell_sums,
    vandermonde_ratio,
)
from qlv.precision import to_prec, working_precision

TIGHT = TruncationSchedule(tol=1e-30, max_radius=128)


def _rel(a, b):
    return float(abs(a - b) / abs(b))


def _qp_inf(values, q):
    """Product of (v; q)_inf by mpmath, as an independent oracle."""
    out = mpmath.mpc(1)
    for v in values:
        out *= mpmath.qp(mpmath.mpmathify(v), mpmath.mpmathify(q))
    return out


def _mp(z):
    return complex(z)


def _close(value, oracle, tol):
    oracle = complex(oracle)
    return abs(complex(value) - oracle) <= tol * max(abs(oracle), 1e-300)


def _c(r, t):
    return mpc(r * math.cos(t), r * math.sin(t))


@pytest.fixture(autouse=True)
def _precision():
    with working_precision(128):
        yield


# --- Vandermonde factor


def test_vandermonde_examples():
    assert vandermonde_ratio([mpc(1), mpc(2), mpc(3, 1)], [0, 0, 0], 0.5) == 1
    assert vandermonde_ratio([mpc(2)], [5], 0.5) == 1
    assert vandermonde_ratio([1, 2], [1, 0], F(1, 2)) == mpc(3) / 2


def test_vandermonde_degenerate():
    with pytest.raises(DegenerateXError):
        vandermonde_ratio([1, 1], [0, 1], 0.5)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.tuples(st.floats(0.5, 2), st.floats(0, 6.28)), min_size=3, max_size=3, unique=True),
       st.lists(st.integers(-4, 4), min_size=3, max_size=3))
def test_vandermonde_permutation_invariance(xs, k):
    x = [_c(r, t) for r, t in xs]
    if min(abs(x[i] - x[j]) for i, j in itertools.combinations(range(3), 2)) < 1e-3:
        return
    base = vandermonde_ratio(x, k, 0.4)
    for perm in itertools.permutations(range(3)):
        other = vandermonde_ratio([x[p] for p in perm], [k[p] for p in perm], 0.4)
        assert _rel(other, base) < 1e-30


# --- classical series


def test_phi_geometric_collapse():
    assert _rel(classical_phi([F(1, 2)], [], F(1, 2), F(1, 2), TIGHT), mpc(2)) < 1e-30


def test_q_binomial_theorem():
    value = classical_phi([0.3], [], 0.5, 0.2, TIGHT)
    assert _close(value, _qp_inf([0.3 * 0.2], 0.5) / _qp_inf([0.2], 0.5), 1e-14)


def test_terminating_phi():
    q, z = F(1, 2), F(3)
    expected = F(0)
    for k in range(3):
        num = den = F(1)
        for j in range(k):
            num *= 1 - q**-2 * q**j
            den *= 1 - q ** (j + 1)
        expected += num / den * z**k
    value = classical_phi([to_prec(q) ** -2], [], q, z, TIGHT)
    assert _rel(value, to_prec(expected)) < 1e-30


def test_ramanujan_psi_example():
    # a z = 2 puts a zero factor into (az; q)_inf, so both sides vanish
    a, b, q, z = 4, 0.5, 0.5, 0.5
    value = classical_psi([a], [b], q, z, TIGHT)
    rhs = _qp_inf([q, b / a, a * z, q / (a * z)], q) / _qp_inf([b, q / a, z, b / (a * z)], q)
    assert abs(complex(rhs)) < 1e-12
    assert abs(value) < 1e-25


def test_ramanujan_psi_generic_point():
    a, b, q, z = 2, 0.1, 0.5, 0.3
    result = adaptive_sum(classical_psi_summand([a], [b], q, z), TIGHT)
    rhs = _qp_inf([q, b / a, a * z, q / (a * z)], q) / _qp_inf([b, q / a, z, b / (a * z)], q)
    assert abs(complex(result.value) - complex(rhs)) <= result.err_estimate + 1e-14 * abs(complex(rhs))


def test_b_equals_q_degeneration():
    a, q, z = mpc(0.4, 0.3), 0.5, mpc(0.2, -0.1)
    assert _rel(classical_psi([a], [q], q, z, TIGHT), classical_phi([a], [], q, z, TIGHT)) < 1e-28


def test_two_psi_two_summation():
    a, b, c, q = 4, F(1, 3), F(1, 5), F(1, 2)
    z = q / a
    value = classical_psi([a, b], [c, b * q], q, z, TIGHT)
    fq, fa, fb, fc = (float(v) for v in (q, a, b, c))
    rhs = _qp_inf([fq, fq, fb * fq / fa, fc / fb], fq) / _qp_inf([fq / fa, fb * fq, fq / fb, fc], fq)
    assert _close(value, rhs, 1e-14)
    point = {"n": 1, "q": "0.5", "a": "4", "b": str(float(b)), "c": "0.2"}
    assert _close(eval_side("I18", "rhs", point).value, rhs, 1e-14)


# --- A_n summands


def _psi_display(x, b, a, z, q, k):
    """Term of the A_n 1psi1 display, evaluated directly with mpmath."""
    n, s = len(x), sum(k)

    def poch(v, m):
        out = mpmath.mpc(1)
        if m >= 0:
            for j in range(m):
                out *= 1 - v * q**j
        else:
            for j in range(1, -m + 1):
                out /= 1 - v * q**-j
        return out

    out = poch(a, s) * (-1) ** ((n - 1) * s) * q ** (-(s * (s - 1)) // 2 + n * sum(v * (v - 1) // 2 for v in k))
    out *= z**s
    for i, j in itertools.combinations(range(n), 2):
        out *= (x[i] * q ** k[i] - x[j] * q ** k[j]) / (x[i] - x[j])
    for i in range(n):
        out *= x[i] ** (n * k[i] - s)
        for j in range(n):
            out /= poch(x[i] * b[j] / x[j], k[i])
    return out


def test_psi_type_display_n2():
    x, b, a, z, q = [1.1, 0.7 + 0.4j], [0.3 + 0.1j, 0.6], 1.7, 0.05 + 0.02j, 0.4
    summand = an_summand_psi_type(x, b, q, a, z)
    for k in [(1, -1), (0, 0), (2, -3), (-1, 2)]:
        assert _close(summand.term(k), _psi_display(x, b, a, z, q, k), 1e-13)
    assert summand.term((0, 0)) == 1


@settings(max_examples=30, deadline=None)
@given(st.integers(-6, 6), st.floats(0.3, 3), st.floats(0.05, 0.9), st.floats(0.2, 0.7), st.floats(0, 6.28))
def test_n1_summands_reduce_to_classical(k, ra, rb, q, t):
    a, b, z = _c(ra, t), _c(rb, 2 * t), _c(0.5, -t)
    # stay off the points where some factor (a)_k or (b)_k vanishes or blows up
    assume(all(abs(1 - v * q**j) > 1e-6 for v in (a, b) for j in range(-7, 7)))
    classical = classical_psi_summand([a], [b], q, z).term((k,))
    psi = an_summand_psi_type([_c(1.3, t)], [b], q, a, z).term((k,))
    gus = an_summand_gustafson_type([_c(0.9, t)], [a], [b], q, z).term((k,))
    assert _rel(psi, classical) <= 2.0 ** -(128 - 8)
    assert _rel(gus, classical) <= 2.0 ** -(128 - 8)


def test_gustafson_cancellation():
    x, a, q, z = [1.0, 0.6 + 0.5j, -0.8], [0.3, 0.5j, 0.7], 0.45, 0.2
    summand = an_summand_gustafson_type(x, a, a, q, z)
    assert summand.term((0, 0, 0)) == 1
    for k in [(1, 0, -2), (2, 2, 1), (-1, 0, 0)]:
        expected = vandermonde_ratio(x, k, q) * to_prec(z) ** sum(k)
        assert _rel(summand.term(k), expected) < 1e-30


# --- lattice sums


def _geometric(z):
    return Summand(1, lambda k: to_prec(z) ** k[0] if k[0] >= 0 else mpc(0))


def test_box_radius_zero():
    s = an_summand_gustafson_type([1.0, 2.0], [0.3, 0.4], [0.05, 0.07], 0.5, 0.1)
    assert lattice_sum_box(s, 0) == s.term((0, 0))


def test_box_finite_geometric():
    assert lattice_sum_box(_geometric(F(1, 2)), 3) == mpc(15) / 8


def test_box_additivity():
    s = an_summand_gustafson_type([1.0, 2.0], [0.3, 0.4], [0.05, 0.07], 0.5, 0.1)
    shells = shell_sums(s, 2)
    assert _rel(lattice_sum_box(s, 2), lattice_sum_box(s, 1) + shells[2]) < 1e-35


def test_slice_examples():
    s = an_summand_gustafson_type([1.0, 2.0], [0.3, 0.4], [0.05, 0.07], 0.5, 0.1)
    assert lattice_slice_sum(s, 5, 2) == 0
    one = classical_psi_summand([0.3], [0.6], 0.5, 0.2)
    assert _rel(lattice_slice_sum(one, -2, 3), one.term((-2,))) < 1e-35


@pytest.mark.parametrize("n, radius", [(1, 6), (2, 4), (2, 6), (3, 3)])
def test_slice_partition(n, radius):
    x = [_c(1 + 0.2 * i, 0.7 * i) for i in range(n)]
    a = [_c(0.4 + 0.1 * i, 1.1 * i) for i in range(n)]
    b = [_c(0.02 + 0.01 * i, -0.5 * i) for i in range(n)]
    s = an_summand_gustafson_type(x, a, b, 0.5, 0.3)
    box = lattice_sum_box(s, radius)
    slices = sum((lattice_slice_sum(s, m, radius) for m in range(-n * radius, n * radius + 1)), mpc(0))
    assert float(abs(box - slices)) <= n * (2 * radius + 1) ** n * 2.0 ** -(128 - 8) * float(abs(box))


def test_adaptive_geometric():
    result = adaptive_sum(_geometric(F(1, 2)), TruncationSchedule(tol=1e-20, max_radius=128))
    assert abs(result.value - 2) < 1e-20 * 2


def test_adaptive_divergent():
    with pytest.raises(NoConvergence):
        adaptive_sum(_geometric(F(3, 2)), TruncationSchedule())


# --- permutation sums


def _trivial(n, q):
    return ProductSummand(n, to_prec(q), [HypTerm(to_prec(q))] * n, HypTerm(to_prec(q)))


def test_permutation_n1():
    assert permutation_sum([mpc(1.3)], _trivial(1, 0.5), 0.5, 1, 0) == 1


@pytest.mark.parametrize("n", [2, 3])
def test_permutation_weyl_denominator(n):
    x = [mpc(1.0), mpc(0.4, 0.9), mpc(-1.7, 0.2)][:n]
    brute = mpc(0)
    for perm in itertools.permutations(range(n)):
        sign = (-1) ** sum(1 for i, j in itertools.combinations(range(n), 2) if perm[i] > perm[j])
        term = mpc(sign)
        for i, p in enumerate(perm):
            term *= x[p] ** (i - p)
        brute += term
    product = mpc(1)
    for i, j in itertools.combinations(range(n), 2):
        product *= 1 - x[i] / x[j]
    value = permutation_sum(x, _trivial(n, 0.5), 0.5, n, 0)
    assert _rel(value, brute) < 1e-35 and _rel(value, product) < 1e-35


def test_permutation_arity_guard():
    with pytest.raises(ArityTooLarge):
        permutation_sum([mpc(i + 1) for i in range(9)], _trivial(9, 0.5), 0.5, 9, 0)
