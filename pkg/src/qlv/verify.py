"""Verification loop: sample, evaluate both sides, probe at higher precision, classify."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from gmpy2 import mpc

from .catalog import (
    CATALOG_VERSION,
    CoefficientFunction,
    DomainViolation,
    catalog_list,
    domain_check,
    eval_side,
    exact_check,
    type1_lemma_pair,
    gustafson_lemma_pair,
    lookup,
)
from .kernels import NoConvergence, TruncationSchedule
from .ladder import RUNGS, Rung
from .precision import PoleError, prod, to_prec, working_precision
from .sampler import InfeasibleAfterRetries, SamplingBox, rng_for, sample_exact_point, sample_point

PASS, FAIL, SKIP_DOMAIN, NO_CONVERGENCE, POLE = "PASS", "FAIL", "SKIP_DOMAIN", "NO_CONVERGENCE", "POLE"
STATUSES = (PASS, FAIL, SKIP_DOMAIN, NO_CONVERGENCE, POLE)

# lattice sums are stabilized this much below the verification tolerance
SUM_TOL_FACTOR = 1e-2
# one-dimensional sums are cheap, so they may run past the configured radius to clear slow transients
ONE_DIM_MAX_RADIUS = 128


@dataclass(frozen=True)
class SampleConfig:
    seed: int = 0
    samples_per_identity: int = 20
    arities: tuple = (1, 2, 3)
    margin: float = 0.2
    q_band: tuple = (0.2, 0.7)
    pole_threshold: float = 1e-4
    schedule: TruncationSchedule = TruncationSchedule()
    precision_bits: int = 128
    probe_bits: int = 256
    max_ratio: float = 0.05
    max_transient: float = 12.0
    complex_q: bool = False
    identities: Optional[tuple] = None
    exact_points: int = 20
    ladder_points: int = 10
    workers: int = 1

    def __post_init__(self):
        lo, hi = self.q_band
        if not 0 < lo <= hi < 1:
            raise ValueError("q_band must lie within (0, 1)")
        if not 0 < self.margin < 1:
            raise ValueError("margin must lie in (0, 1)")
        if self.probe_bits < self.precision_bits + 64:
            raise ValueError("probe_bits must be at least precision_bits + 64")
        if self.samples_per_identity < 0:
            raise ValueError("samples_per_identity must be nonnegative")

    @property
    def box(self) -> SamplingBox:
        return SamplingBox(self.margin, tuple(self.q_band), self.max_ratio, self.pole_threshold, self.complex_q,
                           self.max_transient)

    def schedule_for(self, n: int, tol: Optional[float] = None) -> TruncationSchedule:
        """Summation schedule for arity ``n`` and verification tolerance ``tol``."""
        schedule = replace(self.schedule, tol=(tol if tol is not None else self.schedule.tol) * SUM_TOL_FACTOR)
        if n == 1 and schedule.max_radius < ONE_DIM_MAX_RADIUS:
            schedule = replace(schedule, max_radius=ONE_DIM_MAX_RADIUS)
        return schedule


@dataclass
class VerificationRecord:
    identity: str
    n: int
    index: int
    status: str
    point: Optional[dict] = None
    lhs: object = None
    rhs: object = None
    abs_err: Optional[float] = None
    rel_err: Optional[float] = None
    radius_used: Optional[int] = None
    err_estimate: Optional[float] = None
    roundoff: Optional[float] = None
    precision_bits: int = 0
    kind: str = "numeric"
    detail: str = ""


def _rel(a, b) -> float:
    scale = abs(b)
    return float(abs(a - b) / scale) if scale != 0 else float(abs(a - b))


def _radius(*sides) -> Optional[int]:
    radii = [s.radius for s in sides if s.radius is not None]
    return max(radii) if radii else None


def check_point(identity_id: str, point: dict, config: SampleConfig, index: int = 0,
                defect: float = 0.0) -> VerificationRecord:
    """Evaluate both sides of one identity at one point and classify the outcome."""
    n = int(point["n"])
    rec = VerificationRecord(identity_id, n, index, SKIP_DOMAIN, point=point, precision_bits=config.precision_bits)
    tol = config.schedule.tol
    schedule = config.schedule_for(n)
    try:
        with working_precision(config.precision_bits):
            ok, violations = domain_check(identity_id, point)
            if not ok:
                rec.detail = "; ".join(violations)
                return rec
            lhs = eval_side(identity_id, "lhs", point, schedule, check_domain=False)
            rhs = eval_side(identity_id, "rhs", point, schedule, defect=defect, check_domain=False)
        with working_precision(config.probe_bits):
            lhs_p = eval_side(identity_id, "lhs", point, schedule, radius=lhs.radius, check_domain=False)
            rhs_p = eval_side(identity_id, "rhs", point, schedule, radius=rhs.radius, defect=defect,
                              check_domain=False)
            rec.lhs, rec.rhs = lhs.value, rhs.value
            rec.abs_err = float(abs(lhs_p.value - rhs_p.value))
            rec.rel_err = _rel(lhs_p.value, rhs_p.value)
            scale = float(abs(rhs_p.value)) or 1.0
            rec.err_estimate = (lhs.err_estimate + rhs.err_estimate) / scale
            rec.roundoff = max(_rel(lhs.value, lhs_p.value), _rel(rhs.value, rhs_p.value))
    except PoleError as exc:
        rec.status, rec.detail = POLE, f"{exc} [{exc.factor}]"
        return rec
    except NoConvergence as exc:
        rec.status, rec.detail = NO_CONVERGENCE, str(exc)
        rec.radius_used, rec.err_estimate = exc.radius, exc.err_estimate
        return rec
    except DomainViolation as exc:
        rec.detail = str(exc)
        return rec
    rec.radius_used = _radius(lhs, rhs)
    roundoff_bound = 2.0 ** -(config.precision_bits - 16)
    if rec.rel_err <= tol and rec.roundoff <= roundoff_bound:
        rec.status = PASS
    elif rec.rel_err > tol and rec.rel_err > 10 * (rec.err_estimate + rec.roundoff):
        rec.status = FAIL
    else:
        rec.status = NO_CONVERGENCE
        rec.detail = "difference not resolved beyond the truncation and roundoff estimates"
    return rec


def verify_sample(identity_id: str, n: int, index: int, config: SampleConfig,
                  defect: float = 0.0, fixed: Optional[dict] = None, salt: int = 0) -> VerificationRecord:
    """Draw point ``index`` (roles in ``fixed`` forced) and check it."""
    rng = rng_for(config.seed, identity_id, n, index, salt)
    try:
        point = sample_point(identity_id, n, rng, config.box, fixed)
    except InfeasibleAfterRetries as exc:
        return VerificationRecord(identity_id, n, index, SKIP_DOMAIN, precision_bits=config.precision_bits,
                                  detail=str(exc))
    return check_point(identity_id, point, config, index, defect)


def arities_for(identity_id: str, arities: Sequence[int]) -> list[int]:
    entry = lookup(identity_id)
    return [n for n in arities if n == 1 or not entry.classical]


def verify_identity(identity_id: str, config: SampleConfig = SampleConfig(), defect: float = 0.0,
                    arities: Optional[Sequence[int]] = None) -> list[VerificationRecord]:
    lookup(identity_id)
    tasks = [("numeric", identity_id, n, i, defect)
             for n in arities_for(identity_id, arities if arities is not None else config.arities)
             for i in range(config.samples_per_identity)]
    return _run(tasks, config)


# ---------------------------------------------------------------------------
# exact, ladder and lemma checks


def verify_exact(identity_id: str, n: int, index: int, config: SampleConfig,
                 big_n: Optional[int] = None) -> VerificationRecord:
    rng = rng_for(config.seed, identity_id, n, index, salt=1 if big_n is None else 10 + big_n)
    point = sample_exact_point(identity_id, n, rng, big_n)
    rec = VerificationRecord(identity_id, n, index, FAIL, point=point, kind="exact", precision_bits=0)
    try:
        lhs, rhs = exact_check(identity_id, point)
    except PoleError as exc:
        rec.status, rec.detail = POLE, str(exc)
        return rec
    rec.lhs, rec.rhs = lhs, rhs
    rec.abs_err = float(abs(lhs - rhs))
    rec.rel_err = 0.0 if lhs == rhs else float(abs(lhs - rhs) / abs(rhs)) if rhs else math.inf
    rec.status = PASS if lhs == rhs else FAIL
    return rec


def _ladder_rng(config: SampleConfig, r: Rung, n: int, index: int) -> np.random.Generator:
    return rng_for(config.seed, r.child, n, index, salt=100 + RUNGS.index(r))


def verify_rung(r: Rung, n: int, index: int, config: SampleConfig, tol: float = 1e-12) -> VerificationRecord:
    rec = VerificationRecord(r.name, n, index, SKIP_DOMAIN, kind="ladder", precision_bits=config.precision_bits)
    try:
        point = sample_point(r.child, n, _ladder_rng(config, r, n, index), config.box)
    except InfeasibleAfterRetries as exc:
        rec.detail = str(exc)
        return rec
    rec.point = point
    schedule = config.schedule_for(n, tol)
    try:
        with working_precision(config.precision_bits):
            child = [eval_side(r.child, s, point, schedule, check_domain=False) for s in ("lhs", "rhs")]
            if r.parent is None:
                parent_values = [mpc(1), mpc(1)]
            else:
                mapped = r.mapping(point)
                parent_values = [eval_side(r.parent, s, mapped, schedule, check_domain=False).value
                                 for s in ("lhs", "rhs")]
            errs = [_rel(c.value, p) for c, p in zip(child, parent_values)]
    except PoleError as exc:
        rec.status, rec.detail = POLE, str(exc)
        return rec
    except NoConvergence as exc:
        rec.status, rec.detail = NO_CONVERGENCE, str(exc)
        return rec
    rec.lhs, rec.rhs = child[0].value, parent_values[0]
    rec.rel_err = max(errs)
    rec.radius_used = _radius(*child)
    rec.detail = f"lhs {errs[0]:.3g}, rhs {errs[1]:.3g}"
    rec.status = PASS if rec.rel_err <= tol else FAIL
    return rec


# finite-support coefficient functions used with the lemma pairs: (lo, length)
FINITE_SUPPORTS = [(0, 1), (0, 4), (-2, 5), (-3, 2), (1, 3)]
LEMMA_CASES = [f"finite{i}" for i in range(len(FINITE_SUPPORTS))] + ["type1-2psi2", "type1-shifted", "gustafson-2psi2"]


def verify_lemma(case: str, which: str, n: int, index: int, config: SampleConfig,
                 tol: float = 1e-12) -> VerificationRecord:
    """Both lemma transforms with a coefficient function of the given kind."""
    name = f"{which}:{case}"
    rec = VerificationRecord(name, n, index, SKIP_DOMAIN, kind="lemma", precision_bits=config.precision_bits)
    salt = 1000 + LEMMA_CASES.index(case) * 2 + (which == "gustafson")
    rng = rng_for(config.seed, "I08" if which == "type1" else "I11", n, index, salt=salt)
    schedule = config.schedule_for(n, tol)
    try:
        if case.startswith("finite"):
            lo, length = FINITE_SUPPORTS[int(case[6:])]
            if which == "type1":
                p = sample_point("I07", n, rng, config.box)
            else:
                p = sample_point("I12", n, rng, config.box)
            values = [complex(*rng.normal(size=2)) for _ in range(length)]
        elif case == "type1-2psi2":
            p = sample_point("I19", n, rng, config.box)
        elif case == "type1-shifted":
            p = sample_point("I20", n, rng, config.box)
        else:
            p = sample_point("I21", n, rng, config.box)
    except InfeasibleAfterRetries as exc:
        rec.detail = str(exc)
        return rec
    rec.point = p
    try:
        with working_precision(config.precision_bits):
            q, big_n = to_prec(p["q"]), n
            if case.startswith("finite"):
                f = CoefficientFunction.finite([to_prec(v) for v in values], lo)
                if which == "type1":
                    pair = type1_lemma_pair(f, p["b"], p["x"], q, schedule)
                else:
                    pair = gustafson_lemma_pair(f, p["a"], p["b"], p["x"], q, schedule)
            elif case == "type1-2psi2":
                # f(m) = (a, b)_m z^m / (d)_m with b_i -> c_i
                f = CoefficientFunction.hypergeometric([p["a"], p["b"]], [p["d"]], p["z"], q)
                pair = type1_lemma_pair(f, p["c"], p["x"], q, schedule)
            elif case == "type1-shifted":
                big_a = prod(to_prec(v) for v in p["a"])
                big_z = prod(to_prec(v) for v in p["z"])
                f = CoefficientFunction.hypergeometric([big_a * q ** (1 - big_n), p["b"]], [p["d"]], big_z, q)
                pair = type1_lemma_pair(f, p["c"], p["x"], q, schedule)
            else:
                g = CoefficientFunction.hypergeometric([p["b"]], [p["d"]], p["z"], q)
                pair = gustafson_lemma_pair(g, p["a"], p["c"], p["x"], q, schedule)
            rec.lhs, rec.rhs = pair.lhs.value, pair.rhs
            rec.rel_err = _rel(pair.lhs.value, pair.rhs)
            rec.radius_used = pair.series.radius
    except PoleError as exc:
        rec.status, rec.detail = POLE, str(exc)
        return rec
    except NoConvergence as exc:
        rec.status, rec.detail = NO_CONVERGENCE, str(exc)
        return rec
    rec.status = PASS if rec.rel_err <= tol else FAIL
    return rec


# ---------------------------------------------------------------------------
# suite


def _task(task):
    kind, *args, config = task
    if kind == "numeric":
        identity_id, n, index, defect = args
        return verify_sample(identity_id, n, index, config, defect)
    if kind == "exact":
        identity_id, n, index, big_n = args
        return verify_exact(identity_id, n, index, config, big_n)
    if kind == "ladder":
        name, n, index = args
        return verify_rung(next(r for r in RUNGS if r.name == name), n, index, config)
    if kind == "lemma":
        case, which, n, index = args
        return verify_lemma(case, which, n, index, config)
    raise ValueError(kind)


def _run(tasks: list, config: SampleConfig) -> list[VerificationRecord]:
    """Run tasks; results come back in task order whatever the worker count."""
    jobs = [t + (config,) for t in tasks]
    if config.workers <= 1 or len(jobs) <= 1:
        return [_task(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=config.workers) as pool:
        return list(pool.map(_task, jobs, chunksize=1))


@dataclass
class EntrySummary:
    key: str
    kind: str
    counts: dict
    worst_rel_err: Optional[float]
    max_radius: Optional[int]


@dataclass
class SuiteReport:
    config: SampleConfig
    records: list = field(default_factory=list)
    catalog_version: str = CATALOG_VERSION

    def summaries(self) -> list[EntrySummary]:
        groups: dict = {}
        for r in self.records:
            groups.setdefault((r.kind, r.identity), []).append(r)
        out = []
        for (kind, key), recs in groups.items():
            counts = {s: sum(r.status == s for r in recs) for s in STATUSES}
            errs = [r.rel_err for r in recs if r.rel_err is not None]
            radii = [r.radius_used for r in recs if r.radius_used is not None]
            out.append(EntrySummary(key, kind, counts, max(errs) if errs else None, max(radii) if radii else None))
        return out

    def counts(self) -> dict:
        return {s: sum(r.status == s for r in self.records) for s in STATUSES}

    @property
    def failed(self) -> bool:
        return any(r.status == FAIL for r in self.records)


def suite_tasks(config: SampleConfig, exact: bool = True, ladder: bool = True, lemmas: bool = True,
                defect: float = 0.0) -> list:
    ids = list(config.identities) if config.identities else [e.id for e in catalog_list()]
    tasks = []
    for identity_id in ids:
        for n in arities_for(identity_id, config.arities):
            tasks.extend(("numeric", identity_id, n, i, defect) for i in range(config.samples_per_identity))
    arities = list(config.arities)
    if exact:
        for identity_id in ("I05", "I06"):
            if identity_id not in ids:
                continue
            for n in arities:
                sizes = range(5) if identity_id == "I06" else [None]
                for big_n in sizes:
                    tasks.extend(("exact", identity_id, n, i, big_n) for i in range(config.exact_points))
    if ladder:
        for r in RUNGS:
            if r.child not in ids and (r.parent is None or r.parent not in ids):
                continue
            for n in r.arities:
                if n in arities:
                    tasks.extend(("ladder", r.name, n, i) for i in range(config.ladder_points))
    if lemmas and ({"I08", "I11"} & set(ids)):
        for case in LEMMA_CASES:
            for which in ("type1", "gustafson"):
                if which == "type1" and case == "gustafson-2psi2" or which == "gustafson" and case.startswith("type1"):
                    continue
                for n in arities:
                    tasks.extend(("lemma", case, which, n, i) for i in range(min(config.ladder_points, 2)))
    return tasks


def verify_suite(config: SampleConfig = SampleConfig(), exact: bool = True, ladder: bool = True,
                 lemmas: bool = True, defect: float = 0.0) -> SuiteReport:
    """Run every catalog check the config selects; ``defect`` perturbs numeric right-hand sides."""
    if not config.arities:
        return SuiteReport(config)
    return SuiteReport(config, _run(suite_tasks(config, exact, ladder, lemmas, defect), config))
