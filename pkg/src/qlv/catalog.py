"""The identity catalog: one entry per printed summation or transformation.

Each entry knows its parameter roles, its convergence conditions and how to
evaluate both sides.  Side evaluators are written against a small
:class:`Evaluator` interface so the same code can also be walked by
:class:`PoleScanner`, which collects every parameter that can produce a
vanishing denominator instead of computing anything.

Products such as A = a_1 ... a_n are always recomputed from the bound factors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from gmpy2 import mpc

from .exact import NotExactCapable, exact_sides
from .kernels import (
    HypTerm,
    ProductSummand,
    SumResult,
    Summand,
    TruncationSchedule,
    adaptive_permutation_sum,
    adaptive_sum,
    an_summand_gustafson_type,
    an_summand_psi_type,
    classical_phi_summand,
    classical_psi_summand,
    vandermonde_ratio,
)
from .precision import PoleError, binom2, current_precision, working_precision, ipow, pole_threshold, prod, qpoch_finite, qpoch_infinite, qpoch_ratio, to_prec


class DomainViolation(ValueError):
    def __init__(self, identity_id: str, violations: Sequence[str]):
        super().__init__(f"{identity_id}: point outside the convergence domain: {', '.join(violations)}")
        self.violations = list(violations)


class UnknownIdentity(KeyError):
    pass


# ---------------------------------------------------------------------------
# roles and parameter points

SCALAR, VECTOR, INT, INTS, COEFFS = "scalar", "vector", "int", "ints", "coeffs"


@dataclass(frozen=True)
class Role:
    name: str
    kind: str = SCALAR

    def display(self) -> str:
        if self.kind in (VECTOR, INTS):
            return f"{self.name}_1..{self.name}_n"
        return self.name


def roles(spec: str) -> tuple[Role, ...]:
    """Parse 'a b* x* m# f$' (vector *, integer #, integer vector ##, coefficients $)."""
    out = []
    for token in spec.split():
        if token.endswith("##"):
            out.append(Role(token[:-2], INTS))
        elif token.endswith("#"):
            out.append(Role(token[:-1], INT))
        elif token.endswith("*"):
            out.append(Role(token[:-1], VECTOR))
        elif token.endswith("$"):
            out.append(Role(token[:-1], COEFFS))
        else:
            out.append(Role(token))
    return tuple(out)


class Params:
    """A parameter point converted to the working precision; roles become attributes."""

    def __init__(self, point: dict, role_list: Sequence[Role]):
        self.n = int(point["n"])
        self.q = to_prec(point["q"])
        if not 0 < abs(self.q) < 1:
            raise ValueError("|q| must lie in (0, 1)")
        for role in role_list:
            if role.name not in point:
                raise KeyError(f"missing role {role.name!r}")
            value = point[role.name]
            if role.kind == SCALAR:
                value = to_prec(value)
            elif role.kind == VECTOR:
                value = [to_prec(v) for v in value]
                if len(value) != self.n:
                    raise ValueError(f"role {role.name!r} needs {self.n} entries")
            elif role.kind == INT:
                value = int(value)
            elif role.kind == INTS:
                value = [int(v) for v in value]
                if len(value) != self.n:
                    raise ValueError(f"role {role.name!r} needs {self.n} entries")
            elif role.kind == COEFFS:
                value = [to_prec(v) for v in value]
            setattr(self, role.name, value)

    def pairs(self, fn: Callable[[int, int], mpc]) -> list:
        return [fn(i, j) for i in range(self.n) for j in range(self.n)]


# ---------------------------------------------------------------------------
# convergence conditions


@dataclass(frozen=True)
class Constraint:
    """low < value < high; either bound may be absent."""

    expr: str
    value: float
    low: Optional[float] = None
    low_label: str = ""
    high: Optional[float] = None
    high_label: str = ""

    def violations(self, margin: float) -> list[str]:
        out = []
        # the conditions are strict, so a point on the boundary fails even at margin 0
        if self.low is not None and not (math.isfinite(self.value) and self.value > self.low * (1 + margin)):
            out.append(f"{self.low_label}<{self.expr}")
        if self.high is not None and not self.value < self.high * (1 - margin):
            out.append(f"{self.expr}<{self.high_label}")
        return out

    def ratios(self) -> list[float]:
        """value/high and low/value: how fast the governed tails decay (smaller is faster)."""
        out = []
        if self.high is not None:
            out.append(self.value / self.high if self.high > 0 else math.inf)
        if self.low is not None:
            out.append(self.low / self.value if self.value > 0 else math.inf)
        return out


def upper_bound_x(x: Sequence[mpc], q: mpc) -> float:
    """min_j |q^((n-1)/2) x_j^-n x_1...x_n|, the outer radius for type-1 lattice sums."""
    n = len(x)
    logs = [math.log(abs(complex(v))) for v in x]
    base = (n - 1) / 2 * math.log(abs(complex(q))) + sum(logs)
    return math.exp(min(base - n * lj for lj in logs))


def _abs(v) -> float:
    return float(abs(v))


# ---------------------------------------------------------------------------
# evaluation


@dataclass
class Side:
    """prefactor * series (series None for a closed-form side)."""

    prefactor: mpc
    series: Optional[SumResult] = None
    value: mpc = field(init=False)

    def __post_init__(self):
        # fixed at construction so the product carries the precision it was evaluated at
        self.value = self.prefactor if self.series is None else self.prefactor * self.series.value

    @property
    def err_estimate(self) -> float:
        return 0.0 if self.series is None else _abs(self.prefactor) * self.series.err_estimate

    @property
    def radius(self) -> Optional[int]:
        return None if self.series is None else self.series.radius


class Evaluator:
    """Numeric back end for side evaluators.

    With ``radius`` set, every lattice sum is taken at that fixed radius
    (used to re-evaluate a side at a probe precision).
    """

    def __init__(self, schedule: TruncationSchedule, radius: Optional[int] = None):
        self.schedule = schedule
        self.radius = radius

    def series(self, summand, m: Optional[int] = None, radius: Optional[int] = None) -> SumResult:
        return adaptive_sum(summand, self.schedule, m=m, radius=radius if radius is not None else self.radius)

    def finite_series(self, summand, radius: int) -> SumResult:
        """Sum of a summand supported inside the box of ``radius``: no truncation error."""
        result = self.series(summand, radius=radius)
        return SumResult(result.value, 0.0, result.radius)

    def perm(self, x, inner: ProductSummand, m: int = 0) -> SumResult:
        return adaptive_permutation_sum(x, inner, inner.q, self.schedule, m=m, radius=self.radius)

    def pinf(self, num: Sequence, den: Sequence, q) -> mpc:
        """prod (num)_inf / prod (den)_inf."""
        top = prod(qpoch_infinite(a, q) for a in num)
        bottom = prod(qpoch_infinite(b, q) for b in den)
        if abs(bottom) < pole_threshold():
            raise PoleError("infinite product in a denominator vanishes", "(b; q)_inf")
        return top / bottom

    def divide(self, value, label: str) -> mpc:
        if abs(value) < pole_threshold():
            raise PoleError(f"vanishing denominator {label}", label)
        return 1 / to_prec(value)


class PoleScanner(Evaluator):
    """Walks a side evaluator and records every denominator-type parameter."""

    def __init__(self):
        super().__init__(TruncationSchedule())
        self.den: list = []  # (alpha)_k divided by for k >= 0, or (alpha)_inf in a denominator
        self.num: list = []  # (alpha)_k for k < 0 divides by 1 - alpha q^-j
        self.xs: list = []
        self.inf: list = []  # any infinite-product parameter (zeros make relative error meaningless)
        self.plain: list = []

    def series(self, summand, m=None, radius=None) -> SumResult:
        self._collect(summand)
        return SumResult(mpc(1), 0.0, 0)

    def perm(self, x, inner, m=0) -> SumResult:
        self._collect(inner)
        return SumResult(mpc(1), 0.0, 0)

    def _collect(self, summand):
        if isinstance(summand, ProductSummand):
            for h in list(summand.coords) + [summand.weight]:
                self.den.extend(h.den)
                self.num.extend(h.num)
            if summand.x is not None:
                self.xs.append(list(summand.x))

    def pinf(self, num, den, q) -> mpc:
        self.inf.extend(num)
        self.inf.extend(den)
        return mpc(1)

    def divide(self, value, label) -> mpc:
        self.plain.append(value)
        return mpc(1)

    def problems(self, q: mpc, threshold: float, depth: int = 16) -> list[str]:
        out = []
        qpows = [ipow(q, j) for j in range(-depth, depth + 1)]
        for alpha in self.den + self.inf:
            for j in range(0, depth + 1):
                if abs(1 - alpha * qpows[depth + j]) < threshold:
                    out.append(f"1 - ({complex(alpha):.6g}) q^{j} ~ 0")
                    break
        for alpha in self.num:
            for j in range(1, depth + 1):
                if abs(1 - alpha * qpows[depth - j]) < threshold:
                    out.append(f"1 - ({complex(alpha):.6g}) q^-{j} ~ 0")
                    break
        for v in self.plain:
            if abs(v) < threshold:
                out.append("vanishing scalar denominator")
        for x in self.xs:
            for i in range(len(x)):
                for j in range(i + 1, len(x)):
                    if abs(x[i] - x[j]) < threshold * max(abs(x[i]), abs(x[j])):
                        out.append(f"x_{i + 1} ~ x_{j + 1}")
        return out


GUARD_BITS = 32

SideFn = Callable[[Params, Evaluator], Side]


# ---------------------------------------------------------------------------
# catalog entry


@dataclass(frozen=True)
class IdentitySpec:
    id: str
    title: str
    anchor: str
    roles: tuple
    lhs: SideFn
    rhs: SideFn
    constraints: Callable[[Params], list]
    domain_text: str
    classical: bool = False
    mode: str = "numeric"
    notes: str = ""

    @property
    def arity_range(self) -> tuple[int, Optional[int]]:
        return (1, 1) if self.classical else (1, None)

    def metadata(self) -> dict:
        return {
            "id": self.id,
            "title": self.title,
            "anchor": self.anchor,
            "roles": [r.display() for r in self.roles] + ["q"],
            "arity": "n = 1" if self.classical else "n >= 1",
            "domain": self.domain_text,
            "mode": self.mode,
            "notes": self.notes,
        }


def T1(P: Params, x, c, num=(), den=(), z=1, coefficient=None) -> ProductSummand:
    return an_summand_psi_type(x, c, P.q, None, z, num=num, den=den, coefficient=coefficient)


def T2(P: Params, x, a, b, num=(), den=(), z=1, coefficient=None, vandermonde=True) -> ProductSummand:
    return an_summand_gustafson_type(x, a, b, P.q, z, num=num, den=den, coefficient=coefficient, vandermonde=vandermonde)


def _c(expr, value, low=None, low_label="", high=None, high_label="") -> Constraint:
    return Constraint(expr, value, low, low_label, high, high_label)


UX = "|q^((n-1)/2) x_j^-n x_1...x_n|"
UY = "|q^((n-1)/2) y_j^-n y_1...y_n|"


# ---------------------------------------------------------------------------
# section: classical and A_n 1phi0 / 1psi1


def _i01_lhs(P, ev):
    return Side(mpc(1), ev.series(classical_phi_summand([P.a], [], P.q, P.z)))


def _i01_rhs(P, ev):
    return Side(ev.pinf([P.a * P.z], [P.z], P.q))


def _i01_dom(P):
    return [_c("|z|", _abs(P.z), high=1.0, high_label="1")]


def _i02_lhs(P, ev):
    return Side(mpc(1), ev.series(classical_psi_summand([P.a], [P.b], P.q, P.z)))


def _i02_rhs(P, ev):
    a, b, q, z = P.a, P.b, P.q, P.z
    return Side(ev.pinf([q, b / a, a * z, q / (a * z)], [b, q / a, z, b / (a * z)], q))


def _i02_dom(P):
    return [_c("|z|", _abs(P.z), _abs(P.b / P.a), "|b/a|", 1.0, "1")]


def _i03_lhs(P, ev):
    return Side(mpc(1), ev.series(an_summand_psi_type(P.x, [P.q] * P.n, P.q, P.a, P.z)))


def _i03_rhs(P, ev):
    return Side(ev.pinf([P.a * P.z], [P.z], P.q))


def _i03_dom(P):
    return [_c("|z|", _abs(P.z), high=upper_bound_x(P.x, P.q), high_label=UX)]


def _i04_lhs(P, ev):
    return Side(mpc(1), ev.series(an_summand_psi_type(P.x, P.b, P.q, P.a, P.z)))


def _i04_rhs(P, ev):
    a, q, z, x, b, n = P.a, P.q, P.z, P.x, P.b, P.n
    bq = prod(b) * ipow(q, 1 - n)
    num = [a * z, q / (a * z), bq / a] + P.pairs(lambda i, j: x[i] * q / x[j])
    den = [z, bq / (a * z), q / a] + P.pairs(lambda i, j: x[i] * b[j] / x[j])
    return Side(ev.pinf(num, den, q))


def _i04_dom(P):
    low = _abs(prod(P.b) * ipow(P.q, 1 - P.n) / P.a)
    return [_c("|z|", _abs(P.z), low, "|b_1...b_n q^(1-n)/a|", upper_bound_x(P.x, P.q), UX)]


def _i05_lhs(P, ev):
    x, q, m = P.x, P.q, P.m
    return Side(prod(qpoch_finite(x[i] * q / x[j], q, m[j] - m[i]) for i in range(P.n) for j in range(P.n)))


def _i05_rhs(P, ev):
    x, q, m, n = P.x, P.q, P.m, P.n
    total = sum(m)
    exponent = -binom2(total + 1) + n * sum(binom2(mi + 1) for mi in m)
    value = mpc((-1) ** ((n - 1) * total)) * ipow(q, exponent)
    for i in range(n):
        value = value * ipow(x[i], total - n * m[i])
    return Side(value * vandermonde_ratio(x, [-mi for mi in m], q))


def _finite_coefficient(values: Sequence, lo: int = 0) -> Callable[[int], mpc]:
    def f(s: int):
        return values[s - lo] if lo <= s < lo + len(values) else mpc(0)

    return f


def _i06_lhs(P, ev):
    big_a = prod(P.a)
    return Side(sum((qpoch_ratio([big_a], [P.q], P.q, m) * P.f[m] for m in range(len(P.f))), mpc(0)))


def _i06_rhs(P, ev):
    summand = T2(P, P.x, P.a, [P.q] * P.n, coefficient=_finite_coefficient(P.f))
    return Side(mpc(1), ev.finite_series(summand, len(P.f) - 1))


def _no_constraints(P):
    return []


def _i07_lhs(P, ev):
    return Side(mpc(1), ev.series(T1(P, P.x, P.b), m=P.m))


def _i07_rhs(P, ev):
    q, x, b, n = P.q, P.x, P.b, P.n
    bq = prod(b) * ipow(q, 1 - n)
    value = ev.pinf([bq] + P.pairs(lambda i, j: x[i] * q / x[j]), [q] + P.pairs(lambda i, j: x[i] * b[j] / x[j]), q)
    return Side(value * ev.divide(qpoch_finite(bq, q, P.m), "(b_1...b_n q^(1-n))_m"))


def _type1_prefactor(P, ev, x, b):
    q, n = P.q, P.n
    bq = prod(b) * ipow(q, 1 - n)
    return ev.pinf([q] + P.pairs(lambda i, j: x[i] * b[j] / x[j]), [bq] + P.pairs(lambda i, j: x[i] * q / x[j]), q)


def _i08_lhs(P, ev):
    bq = prod(P.b) * ipow(P.q, 1 - P.n)
    f = _finite_coefficient(P.f, P.lo)
    total = mpc(0)
    for s in range(P.lo, P.lo + len(P.f)):
        total = total + qpoch_ratio([], [bq], P.q, s) * f(s)
    return Side(total)


def _i08_rhs(P, ev):
    summand = T1(P, P.x, P.b, coefficient=_finite_coefficient(P.f, P.lo))
    return Side(_type1_prefactor(P, ev, P.x, P.b), ev.series(summand))


def _i09_lhs(P, ev):
    return Side(sum((qpoch_ratio([], [P.q], P.q, m) * P.f[m] for m in range(len(P.f))), mpc(0)))


def _i09_rhs(P, ev):
    summand = T1(P, P.x, [P.q] * P.n, coefficient=_finite_coefficient(P.f))
    return Side(mpc(1), ev.finite_series(summand, max(len(P.f) - 1, 0)))


# ---------------------------------------------------------------------------
# section: Gustafson-type sums


def _gustafson_products(P, x, a, b):
    q = P.q
    num = P.pairs(lambda i, j: x[i] * q / x[j]) + P.pairs(lambda i, j: x[i] * b[j] / (x[j] * a[i]))
    den = P.pairs(lambda i, j: x[i] * b[j] / x[j]) + P.pairs(lambda i, j: x[i] * q / (x[j] * a[i]))
    return num, den


def _i10_lhs(P, ev):
    return Side(mpc(1), ev.series(T2(P, P.x, P.a, P.b, z=P.z)))


def _i10_rhs(P, ev):
    q, z, n = P.q, P.z, P.n
    big_a = prod(P.a)
    bq = prod(P.b) * ipow(q, 1 - n)
    num, den = _gustafson_products(P, P.x, P.a, P.b)
    return Side(ev.pinf([big_a * z, q / (big_a * z)] + num, [z, bq / (big_a * z)] + den, q))


def _ratio_ba(P):
    return _abs(prod(P.b) * ipow(P.q, 1 - P.n) / prod(P.a))


def _i10_dom(P):
    return [_c("|z|", _abs(P.z), _ratio_ba(P), "|b_1...b_n q^(1-n)/a_1...a_n|", 1.0, "1")]


def _slice_dom(P):
    return [_c("|b_1...b_n q^(1-n)/a_1...a_n|", _ratio_ba(P), high=1.0, high_label="1")]


def _i11_lhs(P, ev):
    return Side(mpc(1), ev.series(T2(P, P.x, P.a, P.b), m=P.m))


def _i12_prefactor(P, ev):
    q, n = P.q, P.n
    big_a = prod(P.a)
    bq = prod(P.b) * ipow(q, 1 - n)
    num, den = _gustafson_products(P, P.x, P.a, P.b)
    return ev.pinf([bq, q / big_a] + num, [q, bq / big_a] + den, q)


def _i11_rhs(P, ev):
    big_a = prod(P.a)
    bq = prod(P.b) * ipow(P.q, 1 - P.n)
    return Side(_i12_prefactor(P, ev) * qpoch_ratio([big_a], [bq], P.q, P.m))


def _i12_lhs(P, ev):
    return Side(mpc(1), ev.series(T2(P, P.x, P.a, P.b), m=0))


def _i12_rhs(P, ev):
    return Side(_i12_prefactor(P, ev))


def _x_vandermonde(x) -> mpc:
    n = len(x)
    return prod(1 - x[i] / x[j] for i in range(n) for j in range(i + 1, n))


def _i13_lhs(P, ev):
    return Side(mpc(1), ev.perm(P.x, T2(P, P.x, P.a, P.b, vandermonde=False)))


def _i13_rhs(P, ev):
    return Side(_i12_prefactor(P, ev) * _x_vandermonde(P.x))


def _aq(P):
    return [a * P.q for a in P.a]


def _well_poised_products(P):
    x, a, q = P.x, P.a, P.q
    num = P.pairs(lambda i, j: x[i] * q / x[j]) + P.pairs(lambda i, j: x[i] * a[j] * q / (x[j] * a[i]))
    den = P.pairs(lambda i, j: x[i] * a[j] * q / x[j]) + P.pairs(lambda i, j: x[i] * q / (x[j] * a[i]))
    return num, den


def _i14_lhs(P, ev):
    return Side(mpc(1), ev.perm(P.x, T2(P, P.x, P.a, _aq(P), vandermonde=False)))


def _i14_rhs(P, ev):
    q = P.q
    big_a = prod(P.a)
    num, den = _well_poised_products(P)
    return Side(ev.pinf([big_a * q, q / big_a] + num, [q, q] + den, q) * _x_vandermonde(P.x))


def _i15_lhs(P, ev):
    return Side(mpc(1), ev.series(T2(P, P.x, P.a, _aq(P)), m=P.m))


def _i15_rhs(P, ev):
    q = P.q
    big_a = prod(P.a)
    num, den = _well_poised_products(P)
    value = ev.pinf([big_a, q / big_a] + num, [q, q] + den, q)
    return Side(value * ev.divide(1 - big_a * ipow(q, P.m), "1 - a_1...a_n q^m"))


# ---------------------------------------------------------------------------
# section: classical 2psi2


def _i16_lhs(P, ev):
    return Side(mpc(1), ev.series(classical_psi_summand([P.a, P.b], [P.c, P.d], P.q, P.z)))


def _i16_rhs(P, ev):
    a, b, c, d, q, z = P.a, P.b, P.c, P.d, P.q, P.z
    pre = ev.pinf([a * z, d / a, c / b, d * q / (a * b * z)], [z, d, q / b, c * d / (a * b * z)], q)
    return Side(pre, ev.series(classical_psi_summand([a, a * b * z / d], [a * z, c], q, d / a)))


def _i16_dom(P):
    a, b, c, d, z = P.a, P.b, P.c, P.d, P.z
    return [
        _c("|z|", _abs(z), high=1.0, high_label="1"),
        _c("|cd/abz|", _abs(c * d / (a * b * z)), high=1.0, high_label="1"),
        _c("|d/a|", _abs(d / a), high=1.0, high_label="1"),
        _c("|c/b|", _abs(c / b), high=1.0, high_label="1"),
    ]


def _i17_rhs(P, ev):
    a, b, c, d, q, z = P.a, P.b, P.c, P.d, P.q, P.z
    abz = a * b * z
    pre = ev.pinf([a * z, b * z, c * q / abz, d * q / abz], [q / a, q / b, c, d], q)
    return Side(pre, ev.series(classical_psi_summand([abz / c, abz / d], [a * z, b * z], q, c * d / abz)))


def _i17_dom(P):
    return [
        _c("|z|", _abs(P.z), high=1.0, high_label="1"),
        _c("|cd/abz|", _abs(P.c * P.d / (P.a * P.b * P.z)), high=1.0, high_label="1"),
    ]


def _i18_lhs(P, ev):
    return Side(mpc(1), ev.series(classical_psi_summand([P.a, P.b], [P.c, P.b * P.q], P.q, P.q / P.a)))


def _i18_rhs(P, ev):
    a, b, c, q = P.a, P.b, P.c, P.q
    return Side(ev.pinf([q, q, b * q / a, c / b], [q / a, b * q, q / b, c], q))


def _i18_dom(P):
    return [
        _c("|q/a|", _abs(P.q / P.a), high=1.0, high_label="1"),
        _c("|c|", _abs(P.c), high=1.0, high_label="1"),
    ]


# ---------------------------------------------------------------------------
# section: A_n 2psi2 transformations


def _xy_type1_products(P, x, y, c_x, c_y):
    """prod (x_i q/x_j, y_i c_y_j/y_j) / (y_i q/y_j, x_i c_x_j/x_j)."""
    q = P.q
    num = P.pairs(lambda i, j: x[i] * q / x[j]) + P.pairs(lambda i, j: y[i] * c_y[j] / y[j])
    den = P.pairs(lambda i, j: y[i] * q / y[j]) + P.pairs(lambda i, j: x[i] * c_x[j] / x[j])
    return num, den


def _i19_lhs(P, ev):
    return Side(mpc(1), ev.series(T1(P, P.x, P.c, num=[P.a, P.b], den=[P.d], z=P.z)))


def _i19_rhs(P, ev):
    a, b, d, q, z, n = P.a, P.b, P.d, P.q, P.z, P.n
    cq = prod(P.c) * ipow(q, 1 - n)
    num, den = _xy_type1_products(P, P.x, P.y, P.c, P.c)
    pre = ev.pinf([a * z, d / a, cq / b, d * q / (a * b * z)] + num, [z, d, q / b, cq * d / (a * b * z)] + den, q)
    return Side(pre, ev.series(T1(P, P.y, P.c, num=[a, a * b * z / d], den=[a * z], z=d / a)))


def _i19_dom(P):
    q, n = P.q, P.n
    low = _abs(prod(P.c) * P.d * ipow(q, 1 - n) / (P.a * P.b))
    label = "|c_1...c_n d q^(1-n)/ab|"
    return [
        _c("|z|", _abs(P.z), low, label, upper_bound_x(P.x, q), UX),
        _c("|d/a|", _abs(P.d / P.a), low, label, upper_bound_x(P.y, q), UY),
    ]


def _az(P):
    return [ai * zi for ai, zi in zip(P.a, P.z)]


def _i20_lhs(P, ev):
    q, n = P.q, P.n
    big_a, big_z = prod(P.a), prod(P.z)
    return Side(mpc(1), ev.series(T1(P, P.x, P.c, num=[big_a * ipow(q, 1 - n), P.b], den=[P.d], z=big_z)))


def _i20_rhs(P, ev):
    b, d, q, n = P.b, P.d, P.q, P.n
    big_a, big_c, big_z = prod(P.a), prod(P.c), prod(P.z)
    q1n = ipow(q, 1 - n)
    abz = big_a * b * big_z
    num, den = _xy_type1_products(P, P.x, P.y, P.c, _az(P))
    pre = ev.pinf(
        [big_c * q1n, d * ipow(q, n - 1) / big_a, big_c * q1n / b, d * ipow(q, n) / abz] + num,
        [big_z, d, q / b, big_c * d / abz] + den,
        q,
    )
    series = T1(P, P.y, _az(P), num=[big_a * q1n, abz * q1n / d], den=[big_c * q1n], z=d * ipow(q, n - 1) / big_a)
    return Side(pre, ev.series(series))


def _i20_dom(P):
    q, n = P.q, P.n
    big_a, big_c = prod(P.a), prod(P.c)
    low = _abs(big_c * P.d / (big_a * P.b))
    label = "|CD/Ab|".replace("D", "d")
    return [
        _c("|Z|", _abs(prod(P.z)), low, label, upper_bound_x(P.x, q), UX),
        _c("|d q^(n-1)/A|", _abs(P.d * ipow(q, n - 1) / big_a), low, label, upper_bound_x(P.y, q), UY),
    ]


def _i21_lhs(P, ev):
    return Side(mpc(1), ev.series(T2(P, P.x, P.a, P.c, num=[P.b], den=[P.d], z=P.z)))


def _xy_type2_products(P, x, y, a, c):
    """prod (y_i c_j/y_j, y_i q/(y_j a_i), x_i q/x_j, x_i c_j/(x_j a_i))
    / (x_i c_j/x_j, x_i q/(x_j a_i), y_i q/y_j, y_i c_j/(y_j a_i))."""
    q = P.q
    num = (
        P.pairs(lambda i, j: y[i] * c[j] / y[j])
        + P.pairs(lambda i, j: y[i] * q / (y[j] * a[i]))
        + P.pairs(lambda i, j: x[i] * q / x[j])
        + P.pairs(lambda i, j: x[i] * c[j] / (x[j] * a[i]))
    )
    den = (
        P.pairs(lambda i, j: x[i] * c[j] / x[j])
        + P.pairs(lambda i, j: x[i] * q / (x[j] * a[i]))
        + P.pairs(lambda i, j: y[i] * q / y[j])
        + P.pairs(lambda i, j: y[i] * c[j] / (y[j] * a[i]))
    )
    return num, den


def _i21_rhs(P, ev):
    b, d, q, z, n = P.b, P.d, P.q, P.z, P.n
    big_a = prod(P.a)
    cq = prod(P.c) * ipow(q, 1 - n)
    num, den = _xy_type2_products(P, P.x, P.y, P.a, P.c)
    pre = ev.pinf(
        [big_a * z, d / big_a, cq / b, d * q / (big_a * b * z)] + num,
        [z, d, q / b, cq * d / (big_a * b * z)] + den,
        q,
    )
    series = T2(P, P.y, P.a, P.c, num=[big_a * b * z / d], den=[big_a * z], z=d / big_a)
    return Side(pre, ev.series(series))


def _i21_dom(P):
    q, n = P.q, P.n
    big_a = prod(P.a)
    cq = prod(P.c) * ipow(q, 1 - n)
    low = _abs(cq * P.d / (big_a * P.b))
    label = "|c_1...c_n d q^(1-n)/Ab|"
    return [
        _c("|z|", _abs(P.z), low, label, 1.0, "1"),
        _c("|d/A|", _abs(P.d / big_a), low, label, 1.0, "1"),
        _c("|c_1...c_n q^(1-n)/A|", _abs(cq / big_a), high=1.0, high_label="1"),
    ]


def _i22_lhs(P, ev):
    q, n = P.q, P.n
    big_a, big_z = prod(P.a), prod(P.z)
    return Side(mpc(1), ev.series(T2(P, P.x, P.b, P.d, num=[big_a * ipow(q, 1 - n)], den=[P.c], z=big_z)))


def _i22_products(P):
    x, y, a, b, d, z, q = P.x, P.y, P.a, P.b, P.d, P.z, P.q
    num = (
        P.pairs(lambda i, j: y[i] * a[j] * z[j] / y[j])
        + P.pairs(lambda i, j: y[i] * d[i] * q / (y[j] * a[i] * b[i] * z[i]))
        + P.pairs(lambda i, j: x[i] * q / x[j])
        + P.pairs(lambda i, j: x[i] * d[j] / (x[j] * b[i]))
    )
    den = (
        P.pairs(lambda i, j: x[i] * d[j] / x[j])
        + P.pairs(lambda i, j: x[i] * q / (x[j] * b[i]))
        + P.pairs(lambda i, j: y[i] * q / y[j])
        + P.pairs(lambda i, j: y[i] * d[i] * a[j] * z[j] / (y[j] * a[i] * b[i] * z[i]))
    )
    return num, den


def _i22_y_params(P):
    return [a * b * z / d for a, b, z, d in zip(P.a, P.b, P.z, P.d)], _az(P)


def _i22_rhs(P, ev):
    c, q, n = P.c, P.q, P.n
    big_a, big_b, big_d, big_z = prod(P.a), prod(P.b), prod(P.d), prod(P.z)
    num, den = _i22_products(P)
    pre = ev.pinf([big_d / big_a, c / big_b] + num, [big_z, c * big_d / (big_a * big_b * big_z)] + den, q)
    ya, yb = _i22_y_params(P)
    series = T2(P, P.y, ya, yb, num=[big_a * ipow(q, 1 - n)], den=[c], z=big_d / big_a)
    return Side(pre, ev.series(series))


def _i22_common_dom(P):
    return _c("|d_1...d_n q^(1-n)/B|", _abs(prod(P.d) * ipow(P.q, 1 - P.n) / prod(P.b)), high=1.0, high_label="1")


def _i22_dom(P):
    big_a, big_b, big_d = prod(P.a), prod(P.b), prod(P.d)
    low = _abs(P.c * big_d / (big_a * big_b))
    label = "|cD/AB|"
    return [
        _c("|Z|", _abs(prod(P.z)), low, label, 1.0, "1"),
        _c("|D/A|", _abs(big_d / big_a), low, label, 1.0, "1"),
        _i22_common_dom(P),
    ]


def _i23_rhs(P, ev):
    b, d, q, n = P.b, P.d, P.q, P.n
    big_a, big_c, big_z = prod(P.a), prod(P.c), prod(P.z)
    abz = big_a * b * big_z
    num, den = _xy_type1_products(P, P.x, P.y, P.c, _az(P))
    pre = ev.pinf(
        [b * big_z, big_c * q / abz, d * ipow(q, n) / abz] + num,
        [ipow(q, n) / big_a, q / b, d] + den,
        q,
    )
    series = T1(P, P.y, _az(P), num=[abz / big_c, abz * ipow(q, 1 - n) / d], den=[b * big_z], z=big_c * d / abz)
    return Side(pre, ev.series(series))


def _i23_dom(P):
    q = P.q
    big_a, big_c, big_z = prod(P.a), prod(P.c), prod(P.z)
    low = _abs(big_c * P.d / (big_a * P.b))
    label = "|Cd/Ab|"
    return [
        _c("|Z|", _abs(big_z), low, label, upper_bound_x(P.x, q), UX),
        _c("|Cd/AbZ|", _abs(big_c * P.d / (big_a * P.b * big_z)), low, label, upper_bound_x(P.y, q), UY),
    ]


def _i24_rhs(P, ev):
    c, q, n = P.c, P.q, P.n
    big_a, big_b, big_d, big_z = prod(P.a), prod(P.b), prod(P.d), prod(P.z)
    abz = big_a * big_b * big_z
    num, den = _i22_products(P)
    pre = ev.pinf([big_b * big_z, c * ipow(q, n) / abz] + num, [ipow(q, n) / big_a, c] + den, q)
    ya, yb = _i22_y_params(P)
    series = T2(P, P.y, ya, yb, num=[abz * ipow(q, 1 - n) / c], den=[big_b * big_z], z=c * big_d / abz)
    return Side(pre, ev.series(series))


def _i24_dom(P):
    big_a, big_b, big_d = prod(P.a), prod(P.b), prod(P.d)
    low = _abs(P.c * big_d / (big_a * big_b))
    return [_c("|Z|", _abs(prod(P.z)), low, "|cD/AB|", 1.0, "1"), _i22_common_dom(P)]


# ---------------------------------------------------------------------------
# section: A_n 2psi2 summations


def _i25_lhs(P, ev):
    a, b, q = P.a, P.b, P.q
    return Side(mpc(1), ev.series(T1(P, P.x, P.c, num=[a, b], den=[b * q], z=q / a)))


def _i25_rhs(P, ev):
    a, b, q, x, c, n = P.a, P.b, P.q, P.x, P.c, P.n
    cq = prod(c) * ipow(q, 1 - n)
    num = [q, b * q / a, cq / b] + P.pairs(lambda i, j: x[i] * q / x[j])
    den = [q / a, b * q, q / b] + P.pairs(lambda i, j: x[i] * c[j] / x[j])
    return Side(ev.pinf(num, den, q))


def _i25_dom(P):
    q = P.q
    low = _abs(prod(P.c) * ipow(q, 2 - P.n) / P.a)
    return [_c("|q/a|", _abs(q / P.a), low, "|c_1...c_n q^(2-n)/a|", upper_bound_x(P.x, q), UX)]


def _bq(P):
    return [b * P.q for b in P.b]


def _i26_lhs(P, ev):
    a, c, q = P.a, P.c, P.q
    return Side(mpc(1), ev.series(T1(P, P.x, _bq(P), num=[a, prod(P.b)], den=[c], z=q / a)))


def _i26_rhs(P, ev):
    a, c, q, x, b = P.a, P.c, P.q, P.x, P.b
    big_b = prod(b)
    num = [q, big_b * q / a, c / big_b] + P.pairs(lambda i, j: x[i] * q / x[j])
    den = [q / a, q / big_b, c] + P.pairs(lambda i, j: x[i] * b[j] * q / x[j])
    return Side(ev.pinf(num, den, q))


def _i26_dom(P):
    q = P.q
    return [_c("|q/a|", _abs(q / P.a), _abs(P.c * q / P.a), "|cq/a|", upper_bound_x(P.x, q), UX)]


def _i27_lhs(P, ev):
    b, q = P.b, P.q
    return Side(mpc(1), ev.series(T2(P, P.x, P.a, P.c, num=[b], den=[b * q], z=q / prod(P.a))))


def _i27_rhs(P, ev):
    b, q, n = P.b, P.q, P.n
    big_a = prod(P.a)
    cq = prod(P.c) * ipow(q, 1 - n)
    num, den = _gustafson_products(P, P.x, P.a, P.c)
    return Side(ev.pinf([q, b * q / big_a, cq / b] + num, [b * q, q / b, cq / big_a] + den, q))


def _i27_dom(P):
    q, n = P.q, P.n
    big_a = prod(P.a)
    cq = prod(P.c) * ipow(q, 1 - n)
    return [
        _c("|c_1...c_n q^(1-n)|", _abs(cq), high=1.0, high_label="1"),
        _c("|q/A|", _abs(q / big_a), high=1.0, high_label="1"),
        _c("|c_1...c_n q^(1-n)/A|", _abs(cq / big_a), high=1.0, high_label="1"),
    ]


def _i28_lhs(P, ev):
    a, c, q = P.a, P.c, P.q
    return Side(mpc(1), ev.series(T2(P, P.x, P.b, _bq(P), num=[a], den=[c], z=q / a)))


def _i28_rhs(P, ev):
    a, c, q, x, b = P.a, P.c, P.q, P.x, P.b
    big_b = prod(b)
    num = [big_b * q / a, c / big_b] + P.pairs(lambda i, j: x[i] * q / x[j]) + P.pairs(
        lambda i, j: x[i] * b[j] * q / (x[j] * b[i])
    )
    den = [q / a, c] + P.pairs(lambda i, j: x[i] * b[j] * q / x[j]) + P.pairs(lambda i, j: x[i] * q / (x[j] * b[i]))
    return Side(ev.pinf(num, den, q))


def _i28_dom(P):
    return [
        _c("|c|", _abs(P.c), high=1.0, high_label="1"),
        _c("|q/a|", _abs(P.q / P.a), high=1.0, high_label="1"),
    ]


def _i29_lhs(P, ev):
    a, q = P.a, P.q
    return Side(mpc(1), ev.series(T2(P, P.x, P.b, P.c, num=[a], den=[prod(P.b) * q], z=q / a)))


def _i29_rhs(P, ev):
    a, q = P.a, P.q
    big_b = prod(P.b)
    num, den = _gustafson_products(P, P.x, P.b, P.c)
    return Side(ev.pinf([q, big_b * q / a] + num, [q / a, big_b * q] + den, q))


def _i29_dom(P):
    q, n = P.q, P.n
    cq = prod(P.c) * ipow(q, 1 - n)
    return [
        _c("|c_1...c_n q^(1-n)|", _abs(cq), high=1.0, high_label="1"),
        _c("|q/a|", _abs(q / P.a), high=1.0, high_label="1"),
        _c("|c_1...c_n q^(1-n)/B|", _abs(cq / prod(P.b)), high=1.0, high_label="1"),
    ]


def _i30_lhs(P, ev):
    c, q = P.c, P.q
    return Side(mpc(1), ev.series(T2(P, P.x, P.a, _bq(P), num=[prod(P.b)], den=[c], z=q / prod(P.a))))


def _i30_rhs(P, ev):
    c, q = P.c, P.q
    big_b = prod(P.b)
    num, den = _gustafson_products(P, P.x, P.a, _bq(P))
    return Side(ev.pinf([q, c / big_b] + num, [q / big_b, c] + den, q))


def _i30_dom(P):
    q, n = P.q, P.n
    big_a = prod(P.a)
    return [
        _c("|c|", _abs(P.c), high=1.0, high_label="1"),
        _c("|q/A|", _abs(q / big_a), high=1.0, high_label="1"),
        _c("|b_1...b_n q^(2-n)/A|", _abs(prod(P.b) * ipow(q, 2 - n) / big_a), high=1.0, high_label="1"),
    ]


# ---------------------------------------------------------------------------
# the table

_T_2PSI2 = "A_n 2psi2 transformation"
_S_2PSI2 = "A_n 2psi2 sum"
_IMPLICIT = "includes the slice convergence condition needed by the Gustafson-type sums for n >= 2"

_ENTRIES = [
    IdentitySpec("I01", "classical q-binomial theorem", "q-binomial theorem (1phi0 sum)", roles("a z"),
                 _i01_lhs, _i01_rhs, _i01_dom, "|z| < 1", classical=True),
    IdentitySpec("I02", "Ramanujan's 1psi1 sum", "Ramanujan's bilateral 1psi1 sum", roles("a b z"),
                 _i02_lhs, _i02_rhs, _i02_dom, "|b/a| < |z| < 1", classical=True),
    IdentitySpec("I03", "A_n q-binomial theorem", "A_n q-binomial theorem as a type-1 lattice sum", roles("a x* z"),
                 _i03_lhs, _i03_rhs, _i03_dom, f"|z| < {UX} for all j"),
    IdentitySpec("I04", "type-1 A_n 1psi1 sum", "A_n 1psi1 as a type-1 lattice sum", roles("a b* x* z"),
                 _i04_lhs, _i04_rhs, _i04_dom, f"|b_1...b_n q^(1-n)/a| < |z| < {UX} for all j"),
    IdentitySpec("I05", "index-shift product identity", "product identity behind the index shift k -> -m", roles("x* m##"),
                 _i05_lhs, _i05_rhs, _no_constraints, "finite identity (x_i distinct)", mode="both"),
    IdentitySpec("I06", "terminating A_n lemma", "terminating A_n lemma for arbitrary f on 0..N",
                 roles("a* x* f$"), _i06_lhs, _i06_rhs, _no_constraints,
                 "finite identity, N = len(f) - 1", mode="both"),
    IdentitySpec("I07", "slice extraction for the A_n 1psi1", "coefficient of (a)_m z^m in the A_n 1psi1",
                 roles("b* x* m#"), _i07_lhs, _i07_rhs, _no_constraints, "none beyond nondegeneracy"),
    IdentitySpec("I08", "type-1 multilateral lemma", "type-1 transform for arbitrary f on the integers",
                 roles("b* x* f$ lo#"), _i08_lhs, _i08_rhs, _no_constraints,
                 "f supported on lo..lo+len(f)-1"),
    IdentitySpec("I09", "type-1 lemma at b_i = q", "type-1 transform at b_i = q", roles("x* f$"),
                 _i09_lhs, _i09_rhs, _no_constraints, "f supported on 0..len(f)-1"),
    IdentitySpec("I10", "Gustafson-type A_n 1psi1 sum", "Gustafson's A_n 1psi1",
                 roles("a* b* x* z"), _i10_lhs, _i10_rhs, _i10_dom,
                 "|b_1...b_n q^(1-n)/a_1...a_n| < |z| < 1"),
    IdentitySpec("I11", "slice extraction for the Gustafson 1psi1", "coefficient of z^m in Gustafson's A_n 1psi1",
                 roles("a* b* x* m#"), _i11_lhs, _i11_rhs, _slice_dom, "|b_1...b_n q^(1-n)/a_1...a_n| < 1"),
    IdentitySpec("I12", "Gustafson-type A_(n-1) 6psi6 sum", "Gustafson's A_(n-1) 6psi6",
                 roles("a* b* x*"), _i12_lhs, _i12_rhs, _slice_dom, "|b_1...b_n q^(1-n)/a_1...a_n| < 1"),
    IdentitySpec("I13", "1psi1 generalization of the Macdonald identities",
                 "1psi1 analogue of the Macdonald identities", roles("a* b* x*"),
                 _i13_lhs, _i13_rhs, _slice_dom, "|b_1...b_n q^(1-n)/a_1...a_n| < 1",
                 notes="the q-exponent sum runs over i = 1..n; sigma-terms share one box radius"),
    IdentitySpec("I14", "Macdonald-type sum at b_i = a_i q", "I13 at b_i = a_i q", roles("a* x*"),
                 _i14_lhs, _i14_rhs, _no_constraints, "none (|q| < 1)"),
    IdentitySpec("I15", "Gustafson slice sum at b_i = a_i q", "I11 at b_i = a_i q", roles("a* x* m#"),
                 _i15_lhs, _i15_rhs, _no_constraints, "none (|q| < 1)"),
    IdentitySpec("I16", "Bailey's 2psi2 transformation", "Bailey's 2psi2 transformation", roles("a b c d z"),
                 _i16_lhs, _i16_rhs, _i16_dom, "max(|z|, |cd/abz|, |d/a|, |c/b|) < 1", classical=True),
    IdentitySpec("I17", "iterated Bailey 2psi2 transformation",
                 "Bailey's 2psi2 transformation applied twice", roles("a b c d z"),
                 _i16_lhs, _i17_rhs, _i17_dom, "max(|z|, |cd/abz|) < 1", classical=True),
    IdentitySpec("I18", "classical 2psi2 sum", "2psi2 sum that collapses to one product", roles("a b c"),
                 _i18_lhs, _i18_rhs, _i18_dom, "max(|q/a|, |c|) < 1", classical=True),
    IdentitySpec("I19", _T_2PSI2, "type-1 2psi2 transformation with scalar a, b, d, z", roles("a b c* d x* y* z"),
                 _i19_lhs, _i19_rhs, _i19_dom,
                 f"L < |z| < {UX} and L < |d/a| < {UY}, L = |c_1...c_n d q^(1-n)/ab|"),
    IdentitySpec("I20", _T_2PSI2, "type-1 2psi2 transformation with vector a and z",
                 roles("a* b c* d x* y* z*"), _i20_lhs, _i20_rhs, _i20_dom,
                 f"|Cd/Ab| < |Z| < {UX} and |Cd/Ab| < |d q^(n-1)/A| < {UY}"),
    IdentitySpec("I21", _T_2PSI2, "Gustafson-type 2psi2 transformation with vector a",
                 roles("a* b c* d x* y* z"), _i21_lhs, _i21_rhs, _i21_dom,
                 "L < |z| < 1 and L < |d/A| < 1, L = |C d q^(1-n)/Ab|; |C q^(1-n)/A| < 1", notes=_IMPLICIT),
    IdentitySpec("I22", _T_2PSI2, "Gustafson-type 2psi2 transformation with vector a, b, d, z",
                 roles("a* b* c d* x* y* z*"), _i22_lhs, _i22_rhs, _i22_dom,
                 "|cD/AB| < |Z| < 1 and |cD/AB| < |D/A| < 1; |D q^(1-n)/B| < 1", notes=_IMPLICIT),
    IdentitySpec("I23", _T_2PSI2, "type-1 2psi2 transformation, companion of I20", roles("a* b c* d x* y* z*"),
                 _i20_lhs, _i23_rhs, _i23_dom, f"|Cd/Ab| < |Z| < {UX} and |Cd/Ab| < |Cd/AbZ| < {UY}"),
    IdentitySpec("I24", _T_2PSI2, "Gustafson-type 2psi2 transformation, companion of I22", roles("a* b* c d* x* y* z*"),
                 _i22_lhs, _i24_rhs, _i24_dom, "|cD/AB| < |Z| < 1; |D q^(1-n)/B| < 1", notes=_IMPLICIT),
    IdentitySpec("I25", _S_2PSI2, "I19 at z = q/a, d = bq", roles("a b c* x*"),
                 _i25_lhs, _i25_rhs, _i25_dom, f"|c_1...c_n q^(2-n)/a| < |q/a| < {UX}"),
    IdentitySpec("I26", _S_2PSI2, "I23 at c_i = b_i q, z_i = q/a_i", roles("a b* c x*"),
                 _i26_lhs, _i26_rhs, _i26_dom, f"|cq/a| < |q/a| < {UX}"),
    IdentitySpec("I27", _S_2PSI2, "I21 at z = q/A, d = bq", roles("a* b c* x*"),
                 _i27_lhs, _i27_rhs, _i27_dom, "max(|c_1...c_n q^(1-n)|, |q/A|) < 1; |C q^(1-n)/A| < 1",
                 notes=_IMPLICIT),
    IdentitySpec("I28", _S_2PSI2, "I22 at d_i = b_i q, z_i = q/a_i", roles("a b* c x*"),
                 _i28_lhs, _i28_rhs, _i28_dom, "max(|c|, |q/a|) < 1"),
    IdentitySpec("I29", _S_2PSI2, "I24 at c = Bq, z_i = q/a_i", roles("a b* c* x*"),
                 _i29_lhs, _i29_rhs, _i29_dom, "max(|c_1...c_n q^(1-n)|, |q/a|) < 1; |C q^(1-n)/B| < 1",
                 notes=_IMPLICIT),
    IdentitySpec("I30", _S_2PSI2, "I24 at b_i -> a_i, d_i = b_i q", roles("a* b* c x*"),
                 _i30_lhs, _i30_rhs, _i30_dom, "max(|c|, |q/A|) < 1; |b_1...b_n q^(2-n)/A| < 1",
                 notes=_IMPLICIT),
]

CATALOG = {entry.id: entry for entry in _ENTRIES}
CATALOG_VERSION = "1"


def catalog_list() -> list[IdentitySpec]:
    return list(_ENTRIES)


def lookup(identity_id: str) -> IdentitySpec:
    try:
        return CATALOG[identity_id]
    except KeyError:
        raise UnknownIdentity(identity_id) from None


def params(identity_id: str, point: dict) -> Params:
    return Params(point, lookup(identity_id).roles)


def constraints(identity_id: str, point: dict) -> list[Constraint]:
    return lookup(identity_id).constraints(params(identity_id, point))


def domain_check(identity_id: str, point: dict, margin: float = 0.0,
                 pole_tol: Optional[float] = None) -> tuple[bool, list[str]]:
    """Convergence conditions shrunk by ``margin`` plus nondegeneracy at ``pole_tol``."""
    entry = lookup(identity_id)
    if not 0 <= margin < 1:
        raise ValueError("margin must lie in [0, 1)")
    n = int(point["n"])
    if entry.classical and n != 1:
        return False, [f"{identity_id} is a one-variable identity (n = 1)"]
    try:
        P = Params(point, entry.roles)
    except (KeyError, ValueError) as exc:
        return False, [str(exc)]
    violations = []
    for c in entry.constraints(P):
        violations.extend(c.violations(margin))
    scanner = PoleScanner()
    try:
        entry.lhs(P, scanner)
        entry.rhs(P, scanner)
    except PoleError as exc:
        violations.append(f"pole: {exc.factor}")
    except ZeroDivisionError:
        violations.append("pole: division by zero")
    violations.extend(scanner.problems(P.q, pole_tol if pole_tol is not None else pole_threshold()))
    return not violations, violations


def transient_length(identity_id: str, point: dict) -> float:
    """Largest |log|alpha|| / log(1/|q|) over the Pochhammer parameters of both summands.

    A factor (1 - alpha q^j) only reaches its asymptotic regime once |alpha q^j|
    crosses 1, so terms can grow for about this many shells before the
    geometric decay promised by the convergence conditions sets in.
    """
    entry = lookup(identity_id)
    P = Params(point, entry.roles)
    scanner = PoleScanner()
    entry.lhs(P, scanner)
    entry.rhs(P, scanner)
    log_q = -math.log(float(abs(P.q)))
    logs = [abs(math.log(float(abs(alpha)))) for alpha in scanner.den + scanner.num if alpha != 0]
    return max(logs, default=0.0) / log_q


def eval_side(identity_id: str, side: str, point: dict, schedule: TruncationSchedule = TruncationSchedule(),
              radius: Optional[int] = None, defect: float = 0.0, check_domain: bool = True) -> Side:
    """Evaluate one side, rounded to the working precision; ``defect`` scales the right side's prefactor."""
    entry = lookup(identity_id)
    if check_domain:
        ok, violations = domain_check(identity_id, point)
        if not ok:
            raise DomainViolation(identity_id, violations)
    if side.lower() not in ("lhs", "rhs"):
        raise ValueError("side must be 'lhs' or 'rhs'")
    bits = current_precision()
    # lattice sums can cancel by several digits; guard bits keep the rounded result accurate
    with working_precision(bits + GUARD_BITS):
        P = Params(point, entry.roles)
        ev = Evaluator(schedule, radius)
        result = entry.lhs(P, ev) if side.lower() == "lhs" else entry.rhs(P, ev)
        if defect and side.lower() == "rhs":
            result = Side(result.prefactor * (1 + to_prec(defect)), result.series)
    series = result.series
    if series is not None:
        series = SumResult(mpc(series.value), series.err_estimate, series.radius)
    return Side(mpc(result.prefactor), series)


def exact_check(identity_id: str, point: dict) -> tuple[Fraction, Fraction]:
    entry = lookup(identity_id)
    if entry.mode not in ("exact", "both"):
        raise NotExactCapable(f"{identity_id} is not a finite identity")
    return exact_sides(identity_id, point)


# ---------------------------------------------------------------------------
# coefficient-function lemmas


@dataclass(frozen=True)
class CoefficientFunction:
    """m -> value, with support an integer interval (lo, hi) or None for all integers."""

    eval: Callable[[int], object]
    support: Optional[tuple[int, int]] = None

    def __call__(self, m: int):
        if self.support is not None and not self.support[0] <= m <= self.support[1]:
            return mpc(0)
        return to_prec(self.eval(m))

    @classmethod
    def finite(cls, values: Sequence, lo: int = 0) -> "CoefficientFunction":
        vals = list(values)
        return cls(lambda m: vals[m - lo], (lo, lo + len(vals) - 1))

    @classmethod
    def hypergeometric(cls, num: Sequence, den: Sequence, z, q) -> "CoefficientFunction":
        """m -> (num)_m / (den)_m z^m for all integers m."""
        h = HypTerm(to_prec(q), tuple(to_prec(v) for v in num), tuple(to_prec(v) for v in den), to_prec(z))
        return cls(h.term)


def _one_dim_sum(weight: Callable[[int], mpc], f: CoefficientFunction, schedule: TruncationSchedule) -> SumResult:
    if f.support is not None:
        lo, hi = f.support
        return SumResult(sum((weight(m) * f(m) for m in range(lo, hi + 1)), mpc(0)), 0.0, 0)
    return adaptive_sum(Summand(1, lambda k: weight(k[0]) * f(k[0])), schedule)


@dataclass(frozen=True)
class LemmaPair:
    lhs: SumResult
    prefactor: mpc
    series: SumResult

    @property
    def rhs(self) -> mpc:
        return self.prefactor * self.series.value


def type1_lemma_pair(f: CoefficientFunction, b_vec, x, q, schedule: TruncationSchedule = TruncationSchedule()) -> LemmaPair:
    """sum_m f(m)/(b_1...b_n q^(1-n))_m against the type-1 lattice sum with f(|k|)."""
    q = to_prec(q)
    b = [to_prec(v) for v in b_vec]
    x = [to_prec(v) for v in x]
    n = len(x)
    P = Params({"n": n, "q": q, "x": x, "b": b}, roles("x* b*"))
    bq = prod(b) * ipow(q, 1 - n)
    lhs = _one_dim_sum(lambda m: qpoch_ratio([], [bq], q, m), f, schedule)
    ev = Evaluator(schedule)
    pre = _type1_prefactor(P, ev, x, b)
    return LemmaPair(lhs, pre, ev.series(T1(P, x, b, coefficient=f)))


def gustafson_lemma_pair(g: CoefficientFunction, a_vec, b_vec, x, q,
                    schedule: TruncationSchedule = TruncationSchedule()) -> LemmaPair:
    """sum_m (A)_m/(B q^(1-n))_m g(m) against the Gustafson-type lattice sum with g(|k|)."""
    q = to_prec(q)
    a = [to_prec(v) for v in a_vec]
    b = [to_prec(v) for v in b_vec]
    x = [to_prec(v) for v in x]
    n = len(x)
    P = Params({"n": n, "q": q, "x": x, "a": a, "b": b}, roles("x* a* b*"))
    big_a = prod(a)
    bq = prod(b) * ipow(q, 1 - n)
    lhs = _one_dim_sum(lambda m: qpoch_ratio([big_a], [bq], q, m), g, schedule)
    ev = Evaluator(schedule)
    num, den = _gustafson_products(P, x, a, b)
    # reciprocal of the Gustafson slice prefactor
    pre = ev.pinf([q, bq / big_a] + den, [bq, q / big_a] + num, q)
    return LemmaPair(lhs, pre, ev.series(T2(P, x, a, b, coefficient=g)))
