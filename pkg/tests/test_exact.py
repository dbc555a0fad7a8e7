import itertools
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qlv.catalog import eval_side
from qlv.exact import (
    NotExactCapable,
    terminating_lemma_sides,
    qpoch_finite_exact,
    shift_identity_sides,
    verify_finite_identity_exact,
)
from qlv.precision import PoleError, working_precision
from qlv.sampler import rng_for, sample_exact_point


def _poch(a, q, k):
    """Direct (a; q)_k, written out independently of the package."""
    out = F(1)
    if k >= 0:
        for j in range(k):
            out *= 1 - a * q**j
        return out
    for j in range(1, -k + 1):
        out /= 1 - a / q**j
    return out


def test_qpoch_finite_exact_examples():
    assert qpoch_finite_exact(F(1, 2), F(1, 2), 2) == F(3, 8)
    assert qpoch_finite_exact(F(1), F(1, 3), 1) == 0
    assert qpoch_finite_exact(F(1, 4), F(1, 2), -1) == 2


def test_qpoch_finite_exact_pole():
    with pytest.raises(PoleError):
        qpoch_finite_exact(F(1, 2), F(1, 2), -1)


def test_terminating_lemma_single_term():
    lhs, rhs = terminating_lemma_sides([F(1, 3), F(2, 5)], [F(1), F(3)], F(1, 2), [F(1)])
    assert lhs == rhs == 1


def test_shift_identity_brute_force():
    x, q, m = [F(1), F(2)], F(1, 2), [1, 0]
    n, total = 2, sum(m)
    left = F(1)
    for i in range(n):
        for j in range(n):
            left *= _poch(x[i] * q / x[j], q, m[j] - m[i])
    # closed form: (-1)^((n-1)|m|) q^(-C(|m|+1,2) + n sum C(m_i+1,2)) prod x_i^(|m|-n m_i) V(x, -m)
    right = F(-1) ** ((n - 1) * total) * q ** (-(total + 1) * total // 2 + n * sum((v + 1) * v // 2 for v in m))
    for i in range(n):
        right *= x[i] ** (total - n * m[i])
    right *= (x[0] * q ** -m[0] - x[1] * q ** -m[1]) / (x[0] - x[1])
    lhs, rhs = shift_identity_sides(x, q, m)
    assert lhs == left and rhs == right and lhs == rhs


def test_terminating_lemma_brute_force():
    x, a, q = [F(1), F(3)], [F(1, 5), F(1, 7)], F(1, 2)
    f = [q**m for m in range(4)]
    left = sum(_poch(a[0] * a[1], q, m) / _poch(q, q, m) * f[m] for m in range(4))
    right = F(0)
    for k in itertools.product(range(4), repeat=2):
        if sum(k) > 3:
            continue
        term = (x[0] * q ** k[0] - x[1] * q ** k[1]) / (x[0] - x[1])
        for i in range(2):
            for j in range(2):
                term *= _poch(x[i] * a[j] / x[j], q, k[i]) / _poch(x[i] * q / x[j], q, k[i])
        right += term * f[sum(k)]
    lhs, rhs = terminating_lemma_sides(a, x, q, f)
    assert (lhs, rhs) == (left, right)
    assert left == right


def test_not_exact_capable():
    with pytest.raises(NotExactCapable):
        verify_finite_identity_exact("I01", {"n": 1, "q": F(1, 2), "a": F(1, 3), "z": F(1, 4)})


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.integers(0, 4), st.integers(0, 2**32 - 1))
def test_random_rational_points(n, big_n, seed):
    point = sample_exact_point("I06", n, np.random.default_rng(seed), big_n)
    assert verify_finite_identity_exact("I06", point)
    point = sample_exact_point("I05", n, np.random.default_rng(seed))
    assert verify_finite_identity_exact("I05", point)


@pytest.mark.parametrize("identity_id", ["I05", "I06"])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_exact_and_numeric_agree(identity_id, n):
    point = sample_exact_point(identity_id, n, rng_for(3, identity_id, n, 0), 3 if identity_id == "I06" else None)
    exact = verify_finite_identity_exact(identity_id, point)
    with working_precision(128):
        sides = [eval_side(identity_id, s, point) for s in ("lhs", "rhs")]
    assert exact
    assert abs(sides[0].value - sides[1].value) <= 1e-25 * max(1, abs(sides[1].value))
