"""Random parameter points inside each identity's convergence domain.

Points are built constructively: every constrained modulus is drawn
log-uniformly at a controlled distance from the bound it must respect, and
phases are uniform.  The distance is expressed as a ratio (value/upper bound
or lower bound/value); the lattice-sum tails decay roughly like that ratio per
shell, so keeping it in ``[ratio_floor, max_ratio]`` keeps truncation radii
small.  When a forced parameter makes that band empty the draw falls back to
the margin-shrunk annulus.

Sampled values are rounded to 17 significant digits and stored as decimal
strings, so a point is its own reproducible serialization.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .catalog import catalog_list, constraints, domain_check, lookup, transient_length, upper_bound_x


class InfeasibleAfterRetries(RuntimeError):
    def __init__(self, identity_id: str, n: int, retries: int, last: Sequence[str] = ()):
        detail = f" (last: {', '.join(last)})" if last else ""
        super().__init__(f"{identity_id} at n={n}: no feasible point after {retries} draws{detail}")
        self.violations = list(last)


class _Infeasible(Exception):
    pass


MAX_RETRIES = 100


@dataclass(frozen=True)
class SamplingBox:
    """Knobs shared by all recipes."""

    margin: float = 0.2
    q_band: tuple = (0.2, 0.7)
    max_ratio: float = 0.05
    pole_threshold: float = 1e-4
    complex_q: bool = False
    max_transient: float = 12.0

    @property
    def ratio_band(self) -> tuple[float, float]:
        cap = min(self.max_ratio, 1 - self.margin, 1 / (1 + self.margin))
        return cap / 10, cap


def _id_index(identity_id: str) -> int:
    return int(identity_id[1:])


def rng_for(seed: int, identity_id: str, n: int, index: int, salt: int = 0) -> np.random.Generator:
    """Independent stream per (seed, identity, n, sample index); ``salt`` separates check kinds."""
    key = (_id_index(identity_id), n, index) + ((salt,) if salt else ())
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def _decimal(v: complex):
    re, im = f"{v.real:.17g}", f"{v.imag:.17g}"
    return re if v.imag == 0 else [re, im]


def as_complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, str):
        return complex(float(v))
    return complex(v)


class Draw:
    """Random draws for one attempt; forced roles in ``fixed`` are returned unchanged."""

    def __init__(self, rng: np.random.Generator, n: int, q: complex, box: SamplingBox, fixed: dict):
        self.rng, self.n, self.q, self.box, self.fixed = rng, n, q, box, fixed
        self.qa = abs(q)

    def has(self, name: str) -> bool:
        return name in self.fixed

    def phase(self) -> complex:
        return cmath.exp(2j * math.pi * self.rng.random())

    def _loguniform(self, lo: float, hi: float) -> float:
        return math.exp(self.rng.uniform(math.log(lo), math.log(hi)))

    def free(self, name: str, lo: float = 0.3, hi: float = 3.0) -> complex:
        if name in self.fixed:
            return as_complex(self.fixed[name])
        return self._loguniform(lo, hi) * self.phase()

    def vec(self, name: str, lo: float = 0.5, hi: float = 2.0) -> list[complex]:
        if name in self.fixed:
            return [as_complex(v) for v in self.fixed[name]]
        return [self._loguniform(lo, hi) * self.phase() for _ in range(self.n)]

    def modulus(self, low: Optional[float] = None, high: Optional[float] = None) -> float:
        """A modulus with low/value and value/high inside the ratio band."""
        floor, cap = self.box.ratio_band
        if low is not None and high is not None:
            lo, hi = low / cap, high * cap
            if lo >= hi:
                lo, hi = low * (1 + self.box.margin), high * (1 - self.box.margin)
            if not 0 < lo < hi:
                raise _Infeasible
            return self._loguniform(lo, hi)
        if high is not None:
            return self._loguniform(high * floor, high * cap)
        if low is not None:
            return self._loguniform(low / cap, low / floor)
        raise ValueError("need a bound")

    def c(self, name: str, low: Optional[float] = None, high: Optional[float] = None) -> complex:
        if name in self.fixed:
            return as_complex(self.fixed[name])
        return self.modulus(low, high) * self.phase()

    def vec_product(self, name: str, low: Optional[float] = None, high: Optional[float] = None,
                    lo: float = 0.5, hi: float = 2.0) -> list[complex]:
        """A vector whose product modulus is constrained; the scaling is spread over all entries."""
        if name in self.fixed:
            return [as_complex(v) for v in self.fixed[name]]
        v = self.vec(name, lo, hi)
        target = self.modulus(low, high)
        scale = (target / abs(_prod(v))) ** (1 / self.n)
        return [u * scale for u in v]

    def integer(self, name: str, lo: int, hi: int) -> int:
        if name in self.fixed:
            return int(self.fixed[name])
        return int(self.rng.integers(lo, hi + 1))

    def coeffs(self, name: str, length: int) -> list[complex]:
        if name in self.fixed:
            return [as_complex(v) for v in self.fixed[name]]
        return [complex(*self.rng.normal(size=2)) for _ in range(length)]

    def ux(self, x: Sequence[complex]) -> float:
        return upper_bound_x(x, self.q)


def _prod(values) -> complex:
    out = 1 + 0j
    for v in values:
        out *= v
    return out


# ---------------------------------------------------------------------------
# recipes: one per identity, drawing constrained moduli from their bounds


def _r01(d):
    return {"a": d.free("a"), "z": d.c("z", high=1)}


def _r02(d):
    a = d.free("a")
    if d.has("b"):
        b = d.free("b")
        return {"a": a, "b": b, "z": d.c("z", low=abs(b / a), high=1)}
    z = d.c("z", high=1)
    return {"a": a, "b": d.c("b", high=abs(a * z)), "z": z}


def _r03(d):
    x = d.vec("x", 0.7, 1.4)
    return {"a": d.free("a"), "x": x, "z": d.c("z", high=d.ux(x))}


def _r04(d):
    x, b = d.vec("x", 0.7, 1.4), d.vec("b")
    z = d.c("z", high=d.ux(x))
    big_b = abs(_prod(b)) * d.qa ** (1 - d.n)
    return {"a": d.c("a", low=big_b / abs(z)), "b": b, "x": x, "z": z}


def _r05(d):
    m = d.fixed["m"] if d.has("m") else [int(v) for v in d.rng.integers(-3, 4, size=d.n)]
    return {"x": d.vec("x", 0.7, 1.4), "m": m}


def _r06(d):
    length = d.integer("N", 0, 4) + 1
    return {"a": d.vec("a", 0.3, 2.0), "x": d.vec("x", 0.7, 1.4), "f": d.coeffs("f", length)}


def _r07(d):
    return {"b": d.vec("b"), "x": d.vec("x", 0.7, 1.4), "m": d.integer("m", -3, 3)}


def _r08(d):
    lo = d.integer("lo", -3, 1)
    return {"b": d.vec("b"), "x": d.vec("x", 0.7, 1.4), "f": d.coeffs("f", d.integer("len", 1, 4)), "lo": lo}


def _r09(d):
    return {"x": d.vec("x", 0.7, 1.4), "f": d.coeffs("f", d.integer("len", 1, 5))}


def _gustafson_b(d, a, bound: float):
    """b with |b_1...b_n q^(1-n)/A| < bound."""
    return d.vec_product("b", high=bound * abs(_prod(a)) * d.qa ** (d.n - 1))


def _r10(d):
    a = d.vec("a")
    z = d.c("z", high=1)
    return {"a": a, "b": _gustafson_b(d, a, abs(z)), "x": d.vec("x", 0.7, 1.4), "z": z}


def _r11(d):
    a = d.vec("a")
    return {"a": a, "b": _gustafson_b(d, a, 1.0), "x": d.vec("x", 0.7, 1.4), "m": d.integer("m", -3, 3)}


def _r12(d):
    a = d.vec("a")
    return {"a": a, "b": _gustafson_b(d, a, 1.0), "x": d.vec("x", 0.7, 1.4)}


def _r14(d):
    return {"a": d.vec("a"), "x": d.vec("x", 0.7, 1.4)}


def _r15(d):
    return {"a": d.vec("a"), "x": d.vec("x", 0.7, 1.4), "m": d.integer("m", -3, 3)}


def _r16(d):
    a, b = d.free("a"), d.free("b")
    z = d.c("z", high=1)
    dd = a * d.c("d/a", high=1)
    # |c/b| < 1 and |cd/abz| < 1
    c = d.c("c", high=min(abs(b), abs(a * b * z / dd)))
    return {"a": a, "b": b, "c": c, "d": dd, "z": z}


def _r17(d):
    a, b, c = d.free("a"), d.free("b"), d.free("c")
    z = d.c("z", high=1)
    return {"a": a, "b": b, "c": c, "d": d.c("d", high=abs(a * b * z / c)), "z": z}


def _r18(d):
    return {"a": d.c("a", low=d.qa), "b": d.free("b"), "c": d.c("c", high=1)}


def _r19(d):
    x, y, c = d.vec("x", 0.7, 1.4), d.vec("y", 0.7, 1.4), d.vec("c")
    a = d.free("a")
    z = d.c("z", high=d.ux(x))
    w = d.c("d/a", high=d.ux(y))
    cq = abs(_prod(c)) * d.qa ** (1 - d.n)
    # |C q^(1-n) d/ab| = |C q^(1-n) w/b| below min(|z|, |w|)
    b = d.c("b", low=cq * abs(w) / min(abs(z), abs(w)))
    return {"a": a, "b": b, "c": c, "d": w * a, "x": x, "y": y, "z": z}


def _r20(d):
    n, q = d.n, d.q
    x, y, a, c = d.vec("x", 0.7, 1.4), d.vec("y", 0.7, 1.4), d.vec("a"), d.vec("c")
    z = d.vec_product("z", high=d.ux(x))
    big_a, big_c, big_z = _prod(a), _prod(c), _prod(z)
    w = d.c("dq^(n-1)/A", high=d.ux(y))
    dd = w * big_a / q ** (n - 1)
    b = d.c("b", low=abs(big_c * dd / big_a) / min(abs(big_z), abs(w)))
    return {"a": a, "b": b, "c": c, "d": dd, "x": x, "y": y, "z": z}


def _r21(d):
    n, q = d.n, d.q
    x, y, a = d.vec("x", 0.7, 1.4), d.vec("y", 0.7, 1.4), d.vec("a")
    big_a = _prod(a)
    z = d.c("z", high=1)
    w = d.c("d/A", high=1)
    c = d.vec_product("c", high=abs(big_a) * d.qa ** (n - 1))
    cq = _prod(c) * q ** (1 - n)
    b = d.c("b", low=abs(cq * w) / min(abs(z), abs(w)))
    return {"a": a, "b": b, "c": c, "d": w * big_a, "x": x, "y": y, "z": z}


def _r22(d):
    n = d.n
    x, y, a, b = d.vec("x", 0.7, 1.4), d.vec("y", 0.7, 1.4), d.vec("a"), d.vec("b")
    big_a, big_b = _prod(a), _prod(b)
    z = d.vec_product("z", high=1)
    # |D/A| < 1 and |D q^(1-n)/B| < 1
    dd = d.vec_product("d", high=min(abs(big_a), abs(big_b) * d.qa ** (n - 1)))
    big_d, big_z = _prod(dd), _prod(z)
    # |cD/AB| below both |Z| and |D/A|
    c = d.c("c", high=abs(big_a * big_b / big_d) * min(abs(big_z), abs(big_d / big_a)))
    return {"a": a, "b": b, "c": c, "d": dd, "x": x, "y": y, "z": z}


def _r23(d):
    x, y, a, c = d.vec("x", 0.7, 1.4), d.vec("y", 0.7, 1.4), d.vec("a"), d.vec("c")
    z = d.vec_product("z", high=d.ux(x))
    b = d.free("b")
    big_a, big_c, big_z = _prod(a), _prod(c), _prod(z)
    w = d.c("Cd/AbZ", high=d.ux(y))
    return {"a": a, "b": b, "c": c, "d": w * big_a * b * big_z / big_c, "x": x, "y": y, "z": z}


def _r24(d):
    n = d.n
    x, y, a, b = d.vec("x", 0.7, 1.4), d.vec("y", 0.7, 1.4), d.vec("a"), d.vec("b")
    big_a, big_b = _prod(a), _prod(b)
    z = d.vec_product("z", high=1)
    dd = d.vec_product("d", high=abs(big_b) * d.qa ** (n - 1))
    big_d, big_z = _prod(dd), _prod(z)
    c = d.c("c", high=abs(big_a * big_b * big_z / big_d))
    return {"a": a, "b": b, "c": c, "d": dd, "x": x, "y": y, "z": z}


def _r25(d):
    n = d.n
    x = d.vec("x", 0.7, 1.4)
    a = d.c("a", low=d.qa / d.ux(x))
    c = d.vec_product("c", high=d.qa ** (n - 1))
    return {"a": a, "b": d.free("b"), "c": c, "x": x}


def _r26(d):
    x = d.vec("x", 0.7, 1.4)
    return {"a": d.c("a", low=d.qa / d.ux(x)), "b": d.vec("b"), "c": d.c("c", high=1), "x": x}


def _r27(d):
    n = d.n
    a = d.vec_product("a", low=d.qa)
    big_a = abs(_prod(a))
    c = d.vec_product("c", high=d.qa ** (n - 1) * min(1.0, big_a))
    return {"a": a, "b": d.free("b"), "c": c, "x": d.vec("x", 0.7, 1.4)}


def _r28(d):
    return {"a": d.c("a", low=d.qa), "b": d.vec("b"), "c": d.c("c", high=1), "x": d.vec("x", 0.7, 1.4)}


def _r29(d):
    n = d.n
    b = d.vec("b")
    c = d.vec_product("c", high=d.qa ** (n - 1) * min(1.0, abs(_prod(b))))
    return {"a": d.c("a", low=d.qa), "b": b, "c": c, "x": d.vec("x", 0.7, 1.4)}


def _r30(d):
    n = d.n
    a = d.vec_product("a", low=d.qa)
    b = d.vec_product("b", high=abs(_prod(a)) * d.qa ** (n - 2))
    return {"a": a, "b": b, "c": d.c("c", high=1), "x": d.vec("x", 0.7, 1.4)}


RECIPES: dict[str, Callable] = {
    "I01": _r01, "I02": _r02, "I03": _r03, "I04": _r04, "I05": _r05, "I06": _r06, "I07": _r07,
    "I08": _r08, "I09": _r09, "I10": _r10, "I11": _r11, "I12": _r12, "I13": _r12, "I14": _r14,
    "I15": _r15, "I16": _r16, "I17": _r17, "I18": _r18, "I19": _r19, "I20": _r20, "I21": _r21,
    "I22": _r22, "I23": _r23, "I24": _r24, "I25": _r25, "I26": _r26, "I27": _r27, "I28": _r28,
    "I29": _r29, "I30": _r30,
}

# Identities whose tails decay like |q| per shell whatever the other parameters:
# q is drawn from the low end of the band so radius 32 still suffices.
Q_LIMITED = {"I14": 0.25, "I15": 0.25, "I28": 0.25}


def draw_q(rng: np.random.Generator, box: SamplingBox, identity_id: str = "") -> complex:
    lo, hi = box.q_band
    hi = min(hi, max(lo, Q_LIMITED.get(identity_id, hi)))
    modulus = math.exp(rng.uniform(math.log(lo), math.log(hi)))
    if box.complex_q:
        return modulus * cmath.exp(2j * math.pi * rng.random())
    return complex(modulus)


def _serialize(identity_id: str, n: int, q: complex, values: dict) -> dict:
    point = {"n": n, "q": _decimal(q)}
    for role in lookup(identity_id).roles:
        v = values[role.name]
        if role.kind in ("vector", "coeffs"):
            point[role.name] = [_decimal(complex(u)) for u in v]
        elif role.kind in ("int",):
            point[role.name] = int(v)
        elif role.kind == "ints":
            point[role.name] = [int(u) for u in v]
        else:
            point[role.name] = _decimal(complex(v))
    return point


def max_ratio(identity_id: str, point: dict) -> float:
    """Largest decay ratio over the convergence conditions (0 when there are none)."""
    return max((r for c in constraints(identity_id, point) for r in c.ratios()), default=0.0)


def sample_point(identity_id: str, n: int, rng: np.random.Generator, box: SamplingBox = SamplingBox(),
                 fixed: Optional[dict] = None) -> dict:
    """A point passing domain_check at ``box.margin`` whose decay ratios stay below ``box.max_ratio``."""
    entry = lookup(identity_id)
    if entry.classical and n != 1:
        raise ValueError(f"{identity_id} is a one-variable identity")
    if n < 1:
        raise ValueError("n must be positive")
    fixed = dict(fixed or {})
    # forcing a continuous parameter may make the ratio cap unreachable; integer roles never do
    continuous = any(r.name in fixed and r.kind not in ("int", "ints") for r in entry.roles) or "q" in fixed
    recipe = RECIPES[identity_id]
    last: list[str] = []
    for _ in range(MAX_RETRIES):
        q = as_complex(fixed["q"]) if "q" in fixed else draw_q(rng, box, identity_id)
        d = Draw(rng, n, q, box, fixed)
        try:
            values = recipe(d)
        except (_Infeasible, ZeroDivisionError, OverflowError, ValueError):
            last = ["no room between the bounds"]
            continue
        point = _serialize(identity_id, n, q, values)
        ok, last = domain_check(identity_id, point, box.margin, pole_tol=box.pole_threshold)
        if not ok:
            continue
        if not continuous and max_ratio(identity_id, point) > box.ratio_band[1] * (1 + 1e-9):
            last = ["decay ratio above the cap"]
            continue
        if not continuous and transient_length(identity_id, point) > box.max_transient:
            last = ["growth transient longer than the cap"]
            continue
        return point
    raise InfeasibleAfterRetries(identity_id, n, MAX_RETRIES, last)


# ---------------------------------------------------------------------------
# rational points for the finite identities


def _rational(rng: np.random.Generator, lo: int = -64, hi: int = 64, den: int = 64) -> Fraction:
    while True:
        value = Fraction(int(rng.integers(lo, hi + 1)), int(rng.integers(1, den + 1)))
        if value != 0:
            return value


def sample_exact_point(identity_id: str, n: int, rng: np.random.Generator, big_n: Optional[int] = None) -> dict:
    """Rational point for I05 (x, q, m) or I06 (a, x, q, f with f(0..N))."""
    for _ in range(MAX_RETRIES):
        q = Fraction(int(rng.integers(1, 64)), 64)
        x = [_rational(rng) for _ in range(n)]
        if len(set(x)) != n:
            continue
        if identity_id == "I05":
            m = [int(v) for v in rng.integers(-3, 4, size=n)]
            point = {"n": n, "q": q, "x": x, "m": m}
        elif identity_id == "I06":
            length = (big_n if big_n is not None else int(rng.integers(0, 5))) + 1
            point = {"n": n, "q": q, "x": x, "a": [_rational(rng) for _ in range(n)],
                     "f": [_rational(rng) for _ in range(length)]}
        else:
            raise ValueError(f"{identity_id} has no exact mode")
        # reject points where a denominator (x_i q / x_j)_k or (x_i a_j/x_j)_{-k} vanishes exactly
        ratios = {x[i] / x[j] for i in range(n) for j in range(n) if i != j}
        if any(r == q ** e for r in ratios for e in range(-8, 9)):
            continue
        return point
    raise InfeasibleAfterRetries(identity_id, n, MAX_RETRIES)


def catalog_ids() -> list[str]:
    return [e.id for e in catalog_list()]
