import json

import mpmath
import numpy as np
import pytest
from gmpy2 import mpc

from qlv.catalog import (
    CoefficientFunction,
    DomainViolation,
    UnknownIdentity,
    catalog_list,
    constraints,
    domain_check,
    eval_side,
    gustafson_lemma_pair,
    lookup,
    type1_lemma_pair,
)
from qlv.kernels import TruncationSchedule
from qlv.precision import working_precision
from qlv.sampler import SamplingBox, rng_for, sample_point
from qlv.verify import SampleConfig, check_point

TIGHT = TruncationSchedule(tol=1e-30, max_radius=128)


@pytest.fixture(autouse=True)
def _precision():
    with working_precision(128):
        yield


def _rel(a, b):
    return float(abs(a - b) / abs(b))


def test_catalog_has_thirty_entries():
    ids = [e.id for e in catalog_list()]
    assert ids == [f"I{k:02d}" for k in range(1, 31)]


def test_lookup_roles():
    assert lookup("I04").metadata()["roles"] == ["a", "b_1..b_n", "x_1..x_n", "z", "q"]


def test_unknown_identity():
    with pytest.raises(UnknownIdentity):
        lookup("I31")


def test_metadata_serializable():
    for entry in catalog_list():
        meta = json.loads(json.dumps(entry.metadata()))
        assert meta["id"] == entry.id and meta["domain"] and meta["anchor"]


def test_slice_sum_condition_at_n2():
    point = {"n": 2, "q": "0.5", "a": ["1", "1"], "b": ["1", "1"], "x": ["1", "2"]}
    ok, violations = domain_check("I12", point)
    assert not ok
    assert "|b_1...b_n q^(1-n)/a_1...a_n|<1" in violations
    (c,) = constraints("I12", point)
    assert c.value == pytest.approx(2.0)


def test_unit_circle_excluded():
    ok, violations = domain_check("I02", {"n": 1, "q": "0.5", "a": "3", "b": "0.5", "z": "1"})
    assert not ok and "|z|<1" in violations


def test_type1_upper_bound():
    point = {"n": 2, "q": "0.5", "a": "3", "b": ["0.1", "0.1"], "x": ["1", "2"], "z": "0.3"}
    (c,) = constraints("I04", point)
    # min_j |q^(1/2) x_j^-2 x_1 x_2| = min(2^(-1/2) * 2, 2^(-1/2) / 2)
    assert c.high == pytest.approx(min(2 ** -0.5 * 2, 2 ** -0.5 / 2), rel=1e-14)


def test_margin_shrinks_region():
    point = {"n": 1, "q": "0.5", "a": "0.3", "z": "0.85"}
    assert domain_check("I01", point)[0]
    assert not domain_check("I01", point, margin=0.2)[0]


@pytest.mark.parametrize("identity_id", [e.id for e in catalog_list() if e.id not in ("I05", "I06")])
def test_sampled_point_in_domain(identity_id):
    n = 1 if lookup(identity_id).classical else 2
    point = sample_point(identity_id, n, rng_for(5, identity_id, n, 0))
    assert domain_check(identity_id, point, margin=0.2) == (True, [])


def test_out_of_domain_raises():
    with pytest.raises(DomainViolation):
        eval_side("I01", "lhs", {"n": 1, "q": "0.5", "a": "0.3", "z": "1.5"})


def test_q_binomial_sides():
    point = {"n": 1, "q": "0.5", "a": "0.3", "z": "0.2"}
    lhs = eval_side("I01", "lhs", point, TIGHT).value
    rhs = eval_side("I01", "rhs", point, TIGHT).value
    with mpmath.workdps(40):
        oracle = mpmath.qp(mpmath.mpf("0.06"), mpmath.mpf("0.5")) / mpmath.qp(mpmath.mpf("0.2"), mpmath.mpf("0.5"))
    assert _rel(lhs, rhs) < 1e-28
    assert abs(complex(lhs) - complex(oracle)) < 1e-14


def test_type1_sum_at_n1_is_ramanujan():
    scalar = {"n": 1, "q": "0.5", "a": "2", "b": "0.1", "z": "0.3"}
    vector = {"n": 1, "q": "0.5", "a": "2", "b": ["0.1"], "x": ["1.7"], "z": "0.3"}
    for side in ("lhs", "rhs"):
        assert _rel(eval_side("I04", side, vector, TIGHT).value, eval_side("I02", side, scalar, TIGHT).value) < 1e-28


def test_two_psi_two_sum_collapses():
    point = {"n": 1, "q": "0.5", "a": "4", "b": "0.3333333333333333", "c": "0.2"}
    lhs = eval_side("I18", "lhs", point, TIGHT).value
    rhs = eval_side("I18", "rhs", point, TIGHT).value
    assert _rel(lhs, rhs) < 1e-25


# --- lemma pairs


def _lemma_point(identity_id, n, index=0):
    return sample_point(identity_id, n, rng_for(11, identity_id, n, index))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_type1_pair_indicator(n):
    p = _lemma_point("I07", n)
    pair = type1_lemma_pair(CoefficientFunction.finite([1]), p["b"], p["x"], p["q"], TIGHT)
    assert pair.lhs.value == 1
    assert _rel(pair.rhs, mpc(1)) < 1e-25


@pytest.mark.parametrize("n", [1, 2, 3])
def test_gustafson_pair_indicator(n):
    p = _lemma_point("I12", n)
    pair = gustafson_lemma_pair(CoefficientFunction.finite([1]), p["a"], p["b"], p["x"], p["q"], TIGHT)
    assert pair.lhs.value == 1
    assert _rel(pair.rhs, mpc(1)) < 1e-25


@pytest.mark.parametrize("n", [1, 2, 3])
def test_type1_pair_at_b_equal_q(n):
    rng = np.random.default_rng(n)
    q = "0.4"
    x = [str(1 + 0.3 * i) for i in range(n)]
    f = [[repr(float(v)) for v in rng.normal(size=2)] for _ in range(4)]
    pair = type1_lemma_pair(CoefficientFunction.finite(f), [q] * n, x, q, TIGHT)
    point = {"n": n, "q": q, "x": x, "f": f}
    assert _rel(pair.lhs.value, eval_side("I09", "lhs", point, TIGHT).value) < 1e-30
    assert _rel(pair.rhs, eval_side("I09", "rhs", point, TIGHT).value) < 1e-25
    assert _rel(pair.lhs.value, pair.rhs) < 1e-25


def test_hypergeometric_coefficient():
    f = CoefficientFunction.hypergeometric(["0.5"], ["0.25"], "0.3", "0.5")
    assert f(0) == 1
    assert _rel(f(1), mpc((1 - 0.5) / (1 - 0.25) * 0.3)) < 1e-15


def test_finite_coefficient_support():
    f = CoefficientFunction.finite([2, 3], lo=-1)
    assert (f(-2), f(-1), f(0), f(1)) == (0, 2, 3, 0)


# --- x/y symmetry of the two-vector transformations


@pytest.mark.parametrize("identity_id", ["I19", "I20", "I21", "I22", "I23", "I24"])
def test_xy_swap_keeps_status(identity_id):
    config = SampleConfig()
    checked = 0
    for index in range(6):
        point = sample_point(identity_id, 2, rng_for(3, identity_id, 2, index), SamplingBox())
        swapped = dict(point, x=point["y"], y=point["x"])
        if not domain_check(identity_id, swapped, pole_tol=1e-4)[0]:
            continue
        before = check_point(identity_id, point, config)
        after = check_point(identity_id, swapped, config)
        assert before.status == after.status == "PASS"
        checked += 1
    assert checked or identity_id in ("I19", "I20", "I23")
