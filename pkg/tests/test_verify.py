from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qlv.catalog import domain_check, eval_side
from qlv.kernels import TruncationSchedule
from qlv.ladder import RUNGS, rung
from qlv.precision import prod, to_prec, working_precision
from qlv.sampler import (
    InfeasibleAfterRetries,
    SamplingBox,
    as_complex,
    draw_q,
    rng_for,
    sample_exact_point,
    sample_point,
)
from qlv.verify import (
    SampleConfig,
    check_point,
    suite_tasks,
    verify_identity,
    verify_rung,
    verify_sample,
    verify_suite,
)

FORCED_I02 = {"a": "4", "b": "0.5", "q": "0.5"}


# --- sampler


def test_same_stream_same_point():
    a = sample_point("I10", 3, rng_for(1, "I10", 3, 4))
    b = sample_point("I10", 3, rng_for(1, "I10", 3, 4))
    assert a == b


def test_streams_differ_by_index():
    assert sample_point("I10", 2, rng_for(1, "I10", 2, 0)) != sample_point("I10", 2, rng_for(1, "I10", 2, 1))


@pytest.mark.parametrize("index", range(10))
def test_forced_draw_respects_interval(index):
    box = SamplingBox()
    point = sample_point("I02", 1, rng_for(2, "I02", 1, index), box, FORCED_I02)
    modulus = abs(as_complex(point["z"]))
    # |b/a| < |z| < 1 is (1/8, 1); the margin shrinks it on both sides
    assert 1 / 8 * (1 + box.margin) <= modulus <= 1 - box.margin
    assert point["a"] == "4" and point["q"] == "0.5"


def test_infeasible_margin():
    with pytest.raises(InfeasibleAfterRetries):
        sample_point("I02", 1, rng_for(0, "I02", 1, 0), SamplingBox(margin=0.999), FORCED_I02)


def test_classical_entry_rejects_higher_arity():
    with pytest.raises(ValueError):
        sample_point("I01", 2, rng_for(0, "I01", 2, 0))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**63 - 1), st.floats(0.05, 0.5), st.floats(0.5, 0.95))
def test_q_stays_in_band(seed, lo, hi):
    box = SamplingBox(q_band=(lo, hi))
    q = draw_q(rng_for(seed, "I03", 1, 0), box)
    assert lo <= abs(q) <= hi


def test_complex_q_has_phase():
    box = SamplingBox(complex_q=True)
    qs = [draw_q(rng_for(9, "I03", 1, i), box) for i in range(5)]
    assert any(abs(q.imag) > 1e-3 for q in qs)


def test_vector_products_are_consistent():
    # abbreviations such as A = a_1...a_n are never stored, only recomputed
    point = sample_point("I21", 3, rng_for(4, "I21", 3, 0))
    assert "A" not in point and len(point["a"]) == 3


def test_exact_points_are_rational():
    point = sample_exact_point("I06", 2, rng_for(0, "I06", 2, 0), 3)
    assert len(point["f"]) == 4 and len(set(point["x"])) == 2


# --- verification loop


def test_q_binomial_all_pass():
    records = verify_identity("I01", SampleConfig())
    assert len(records) == 20
    assert {r.status for r in records} == {"PASS"}


def test_defect_fails():
    records = verify_identity("I01", SampleConfig(samples_per_identity=5), defect=1e-6)
    assert {r.status for r in records} == {"FAIL"}


def test_small_radius_does_not_converge():
    config = SampleConfig(samples_per_identity=3, arities=(3,),
                          schedule=TruncationSchedule(initial_radius=1, max_radius=1))
    records = verify_identity("I04", config)
    assert records and {r.status for r in records} == {"NO_CONVERGENCE"}


def test_out_of_domain_point_is_skipped():
    rec = check_point("I01", {"n": 1, "q": "0.5", "a": "0.3", "z": "1.2"}, SampleConfig())
    assert rec.status == "SKIP_DOMAIN" and "|z|<1" in rec.detail


def test_config_invariants():
    with pytest.raises(ValueError):
        SampleConfig(q_band=(0.5, 1.0))
    with pytest.raises(ValueError):
        SampleConfig(precision_bits=128, probe_bits=160)


def test_one_dimensional_schedule_reaches_further():
    config = SampleConfig()
    assert config.schedule_for(1).max_radius >= 128
    assert config.schedule_for(2).max_radius == config.schedule.max_radius
    assert config.schedule_for(2, 1e-20).tol == pytest.approx(1e-22)


@pytest.fixture(scope="module")
def pass_records():
    config = SampleConfig(samples_per_identity=2)
    records = []
    for identity_id, n in [("I02", 1), ("I04", 2), ("I10", 2), ("I12", 3), ("I19", 2), ("I24", 2)]:
        records += [verify_sample(identity_id, n, i, config) for i in range(2)]
    assert {r.status for r in records} == {"PASS"}
    return config, records


def test_replay_is_bitwise(pass_records):
    config, records = pass_records
    for rec in records:
        with working_precision(config.precision_bits):
            schedule = config.schedule_for(rec.n)
            lhs = eval_side(rec.identity, "lhs", rec.point, schedule).value
            rhs = eval_side(rec.identity, "rhs", rec.point, schedule).value
        assert lhs == rec.lhs and rhs == rec.rhs


def test_doubling_the_radius_stays_within_estimate(pass_records):
    config, records = pass_records
    for rec in records:
        with working_precision(config.precision_bits):
            wider = eval_side(rec.identity, "lhs", rec.point, radius=2 * rec.radius_used).value
        scale = float(abs(rec.rhs))
        assert float(abs(wider - rec.lhs)) <= rec.err_estimate * scale + 2.0 ** -100 * scale


def test_probe_consistency(pass_records):
    config, records = pass_records
    for rec in records:
        assert rec.roundoff <= 2.0 ** -(config.precision_bits - 16)


def test_worker_count_does_not_change_records():
    config = SampleConfig(samples_per_identity=3, arities=(1, 2))
    one = verify_identity("I03", config)
    two = verify_identity("I03", replace(config, workers=2))
    assert [(r.index, r.n, r.status, r.lhs, r.rhs, r.point) for r in one] == \
           [(r.index, r.n, r.status, r.lhs, r.rhs, r.point) for r in two]


# --- suite


def test_empty_arities_give_empty_report():
    report = verify_suite(SampleConfig(arities=()))
    assert report.records == [] and not report.failed


def test_zero_samples_leave_only_structural_checks():
    config = SampleConfig(samples_per_identity=0, arities=(1, 2), exact_points=1, ladder_points=1)
    kinds = {t[0] for t in suite_tasks(config)}
    assert kinds == {"exact", "ladder", "lemma"}


def test_identity_filter():
    config = SampleConfig(samples_per_identity=1, arities=(1, 2), identities=("I01", "I05"), exact_points=1)
    report = verify_suite(config, ladder=False, lemmas=False)
    assert {r.identity for r in report.records} == {"I01", "I05"}
    assert {r.status for r in report.records} == {"PASS"}


# --- specialization ladder


def test_rung_lookup():
    assert rung("I04@n=1 = I02").parent == "I02"
    with pytest.raises(KeyError):
        rung("no such map")


def test_split_keeps_product():
    r = rung("I26 = I23 at c_i = b_i q, z_i = q/a_i")
    point = sample_point("I26", 3, rng_for(0, "I26", 3, 0))
    with working_precision(128):
        mapped = r.mapping(point)
        q = to_prec(point["q"])
        assert abs(prod(mapped["a"]) - to_prec(point["a"]) * q ** 2) < 1e-30
    assert mapped["x"] == mapped["y"]


@pytest.mark.parametrize("r", RUNGS, ids=[r.name for r in RUNGS])
def test_each_rung_once(r):
    n = r.arities[-1]
    rec = verify_rung(r, n, 0, SampleConfig())
    assert rec.status == "PASS", rec.detail


def test_mapped_points_are_in_the_parent_domain():
    for r in RUNGS:
        # at b_i = q the negative orthant vanishes, so the parent's lower bound on |z| is idle there
        if r.parent is None or r.name == "I03 = I04 at b_i = q":
            continue
        n = r.arities[0]
        point = sample_point(r.child, n, rng_for(6, r.child, n, 0))
        with working_precision(128):
            mapped = r.mapping(point)
        ok, violations = domain_check(r.parent, mapped)
        assert ok, (r.name, violations)
