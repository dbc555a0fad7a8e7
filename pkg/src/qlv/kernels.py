"""Summands for classical and A_n series and the lattice summation drivers.

A lattice sum is truncated to the max-norm box max_i |k_i| <= M.  Terms are
reduced shell by shell (shell r holds the points with max_i |k_i| = r), and
inside a shell in lexicographic order of k, so the result does not depend on
how the terms were produced.

Most summands in this package factor as

    V(k) * prod_i U_i(k_i) * W(|k|)

where V is the Vandermonde-type ratio, each U_i is a one-variable
hypergeometric term and W a term in |k|.  :class:`ProductSummand` exploits
that to fill a whole box with a few broadcast products of numpy object
arrays; its pointwise ``term`` takes a separate route through
:func:`qpoch_ratio` and :func:`ipow`, which the tests use as an oracle.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from gmpy2 import mpc

from .precision import PoleError, as_q, binom2, ipow, pole_threshold, prod, qpoch_ratio, snap_zero, to_prec

LatticePoint = Tuple[int, ...]

MAX_PERMUTATION_ARITY = 8


class NoConvergence(ArithmeticError):
    """The truncated sum did not stabilize within the schedule's maximum radius."""

    def __init__(self, message: str, radius: int = 0, err_estimate: float = math.inf):
        super().__init__(message)
        self.radius = radius
        self.err_estimate = err_estimate


class DegenerateXError(PoleError):
    """Two of the x_i coincide, so the Vandermonde-type ratio is undefined."""


class ArityTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class TruncationSchedule:
    initial_radius: int = 4
    growth: int = 2
    max_radius: int = 32
    tol: float = 1e-12

    def __post_init__(self):
        if self.initial_radius < 1:
            raise ValueError("initial_radius must be positive")
        if self.initial_radius > self.max_radius:
            raise ValueError("initial_radius must not exceed max_radius")
        if self.growth < 2:
            raise ValueError("growth must be at least 2")
        if not self.tol > 0:
            raise ValueError("tol must be positive")

    def radii(self) -> list[int]:
        out = []
        r = self.initial_radius
        while r < self.max_radius:
            out.append(r)
            r *= self.growth
        out.append(self.max_radius)
        return out


@dataclass(frozen=True)
class SumResult:
    value: mpc
    err_estimate: float
    radius: int


def norm1(k: Sequence[int]) -> int:
    return sum(k)


# ---------------------------------------------------------------------------
# one-variable hypergeometric terms


@dataclass(frozen=True)
class HypTerm:
    """k -> (num_1..num_r)_k / (den_1..den_s)_k * base^k * q^(qexp * binom(k, 2))."""

    q: mpc
    num: Tuple = ()
    den: Tuple = ()
    base: mpc = mpc(1)
    qexp: int = 0

    def term(self, k: int) -> mpc:
        value = qpoch_ratio(self.num, self.den, self.q, k) * ipow(self.base, k)
        if self.qexp:
            value = value * ipow(self.q, self.qexp * binom2(k))
        return value

    def table(self, lo: int, hi: int) -> list:
        """Values for k = lo..hi, by the first-order recurrence in both directions from k = 0."""
        if lo > hi:
            return []
        q = to_prec(self.q)
        num = [to_prec(a) for a in self.num]
        den = [to_prec(b) for b in self.den]
        base = to_prec(self.base)
        thresh = pole_threshold()
        step = ipow(q, self.qexp) if self.qexp else None
        up: list = [mpc(1)]
        value = mpc(1)
        qk = mpc(1)
        qe = mpc(1)  # q^(qexp * k)
        for k in range(0, max(hi, 0)):
            if value != 0:
                top = prod(snap_zero(1 - a * qk) for a in num)
                bottom = prod(1 - b * qk for b in den)
                # a structural zero in the numerator wins over a coincident pole
                if top == 0:
                    value = mpc(0)
                elif abs(bottom) < thresh:
                    raise PoleError(f"vanishing denominator factor at k = {k + 1}", _pole_label(den, qk, thresh))
                else:
                    value = value * top / bottom * base
                    if step is not None:
                        value = value * qe
            qk = qk * q
            if step is not None:
                qe = qe * step
            up.append(value)
        down: list = []
        value = mpc(1)
        qinv = 1 / q
        qk = mpc(1)
        qe = mpc(1)
        inv_step = 1 / step if step is not None else None
        for k in range(0, min(lo, 0), -1):
            qk = qk * qinv  # q^(k-1)
            if inv_step is not None:
                qe = qe * inv_step
            if value != 0:
                top = prod(snap_zero(1 - b * qk) for b in den)
                bottom = prod(1 - a * qk for a in num)
                if top == 0:
                    value = mpc(0)
                elif abs(bottom) < thresh:
                    raise PoleError(f"vanishing denominator factor at k = {k - 1}", _pole_label(num, qk, thresh))
                else:
                    value = value * top / bottom / base
                    if step is not None:
                        value = value / qe
            down.append(value)
        full = down[::-1] + up  # k = min(lo,0) .. max(hi,0)
        start = min(lo, 0)
        return full[lo - start: hi - start + 1]


def _pole_label(params, qk, thresh) -> str:
    for p in params:
        if abs(1 - p * qk) < thresh:
            return f"1 - ({p}) * ({qk})"
    return "denominator factor"


# ---------------------------------------------------------------------------
# the Vandermonde-type factor


def _check_distinct(x: Sequence[mpc]) -> None:
    thresh = pole_threshold()
    for i, j in itertools.combinations(range(len(x)), 2):
        if abs(x[i] - x[j]) < thresh:
            raise DegenerateXError(f"x_{i + 1} and x_{j + 1} coincide", "x_i - x_j")


def vandermonde_ratio(x: Sequence, k: Sequence[int], q) -> mpc:
    """prod_{i<j} (x_i q^k_i - x_j q^k_j) / (x_i - x_j); 1 for n = 1."""
    x = [to_prec(v) for v in x]
    q = as_q(q)
    _check_distinct(x)
    xq = [xi * ipow(q, ki) for xi, ki in zip(x, k)]
    result = mpc(1)
    for i, j in itertools.combinations(range(len(x)), 2):
        result = result * (xq[i] - xq[j]) / (x[i] - x[j])
    return result


# ---------------------------------------------------------------------------
# summands


@dataclass
class Summand:
    """An n-fold summand given pointwise."""

    n: int
    term: Callable[[LatticePoint], mpc]

    def box(self, radius: int) -> np.ndarray:
        side = range(-radius, radius + 1)
        values = [self.term(k) for k in itertools.product(side, repeat=self.n)]
        out = np.empty(len(values), dtype=object)
        out[:] = values
        return out.reshape((2 * radius + 1,) * self.n)


@dataclass
class ProductSummand:
    """V(k) * prod_i coords[i](k_i) * weight(|k|) * coefficient(|k|).

    The Vandermonde-type factor is included when ``x`` is given.  The optional
    ``coefficient`` is an arbitrary function of |k| (e.g. a lemma's f(m)).
    """

    n: int
    q: mpc
    coords: Sequence[HypTerm]
    weight: HypTerm
    x: Optional[Sequence[mpc]] = None
    coefficient: Optional[Callable[[int], mpc]] = None
    scale: mpc = field(default_factory=lambda: mpc(1))

    def __post_init__(self):
        if len(self.coords) != self.n:
            raise ValueError("need one coordinate factor per summation index")
        if self.x is not None:
            _check_distinct([to_prec(v) for v in self.x])

    def term(self, k: LatticePoint) -> mpc:
        s = sum(k)
        value = self.scale * self.weight.term(s)
        for c, ki in zip(self.coords, k):
            value = value * c.term(ki)
        if self.x is not None:
            value = value * vandermonde_ratio(self.x, k, self.q)
        if self.coefficient is not None:
            value = value * to_prec(self.coefficient(s))
        return value

    def with_coord_shift(self, exponents: Sequence[int]) -> "ProductSummand":
        """Multiply the summand by prod_j q^(e_j k_j)."""
        q = to_prec(self.q)
        coords = [replace(c, base=c.base * ipow(q, e)) for c, e in zip(self.coords, exponents)]
        return replace(self, coords=coords)

    def box(self, radius: int) -> np.ndarray:
        n, m = self.n, radius
        tables = [_obj(c.table(-m, m)) for c in self.coords]
        if self.x is not None:
            q = to_prec(self.q)
            x = [to_prec(v) for v in self.x]
            qpow = _obj(_powers(q, m))
            xq = [xi * qpow for xi in x]
        side = 2 * m + 1
        total = tables[0]
        for j in range(1, n):
            # everything that depends on k_j and on the pairs (k_i, k_j), i < j
            g = tables[j].reshape((1,) * j + (side,))
            if self.x is not None:
                for i in range(j):
                    pair = np.subtract.outer(xq[i], xq[j]) / (x[i] - x[j])
                    shape = [1] * (j + 1)
                    shape[i] = shape[j] = side
                    g = g * pair.reshape(shape)
            total = total[..., None] * g
        weights = _obj(self.weight.table(-n * m, n * m))
        if self.coefficient is not None:
            weights = weights * _obj([to_prec(self.coefficient(s)) for s in range(-n * m, n * m + 1)])
        if self.scale != 1:
            weights = weights * self.scale
        return total * weights[_sum_index(n, m)]

    def slice_values(self, radius: int, m: int) -> tuple[np.ndarray, np.ndarray]:
        """Terms on |k| = m inside the box, in shell order, with their shells.

        Only the slice points are formed, so this is far cheaper than
        masking a full box when n >= 2.
        """
        n, r = self.n, radius
        idx, shells = _slice_points(n, r, m)
        tables = [_obj(c.table(-r, r)) for c in self.coords]
        values = tables[0][idx[0]]
        for i in range(1, n):
            values = values * tables[i][idx[i]]
        if self.x is not None:
            q = to_prec(self.q)
            x = [to_prec(v) for v in self.x]
            qpow = _obj(_powers(q, r))
            xq = [xi * qpow for xi in x]
            for i in range(n):
                for j in range(i + 1, n):
                    values = values * ((xq[i][idx[i]] - xq[j][idx[j]]) / (x[i] - x[j]))
        weight = self.scale * self.weight.term(m)
        if self.coefficient is not None:
            weight = weight * to_prec(self.coefficient(m))
        return values * weight, shells


@lru_cache(maxsize=256)
def _slice_points(n: int, r: int, m: int) -> tuple[tuple, np.ndarray]:
    """Box indices (k_i + r) of the points with |k| = m, ordered by shell then lexicographically."""
    side = np.arange(-r, r + 1)
    if n == 1:
        pts = np.array([[m]]) if abs(m) <= r else np.zeros((0, 1), dtype=int)
    else:
        grids = np.meshgrid(*([side] * (n - 1)), indexing="ij")
        head = np.stack([g.ravel() for g in grids], axis=1)
        last = m - head.sum(axis=1)
        keep = np.abs(last) <= r
        pts = np.concatenate([head[keep], last[keep, None]], axis=1)
    shells = np.abs(pts).max(axis=1) if len(pts) else np.zeros(0, dtype=int)
    order = np.lexsort(tuple(pts[:, i] for i in range(n - 1, -1, -1)) + (shells,))
    pts, shells = pts[order], shells[order]
    return tuple((pts[:, i] + r).astype(np.intp) for i in range(n)), shells


def _obj(values) -> np.ndarray:
    out = np.empty(len(values), dtype=object)
    out[:] = list(values)
    return out


def _powers(q: mpc, m: int) -> list:
    up = [mpc(1)]
    for _ in range(m):
        up.append(up[-1] * q)
    qinv = 1 / q
    down = [mpc(1)]
    for _ in range(m):
        down.append(down[-1] * qinv)
    return down[:0:-1] + up


@lru_cache(maxsize=64)
def _sum_index(n: int, m: int) -> np.ndarray:
    """|k| + n*m for every box point, as an index array."""
    side = np.arange(2 * m + 1) - m
    grids = np.meshgrid(*([side] * n), indexing="ij")
    return (sum(grids) + n * m).astype(np.intp)


@lru_cache(maxsize=64)
def _shell_order(n: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Flat box indices ordered by shell, then lexicographically; and each point's shell."""
    side = np.abs(np.arange(2 * m + 1) - m)
    grids = np.meshgrid(*([side] * n), indexing="ij")
    shell = np.maximum.reduce(grids).ravel() if n > 1 else grids[0].ravel()
    order = np.argsort(shell, kind="stable")
    return order, shell[order]


def _shell_sums(values: np.ndarray, shells: np.ndarray, radius: int) -> list:
    """Per-shell sums, each reduced sequentially in the given order."""
    bounds = np.searchsorted(shells, np.arange(radius + 2))
    return [sum(values[bounds[r]:bounds[r + 1]], mpc(0)) for r in range(radius + 1)]


def _ordered(summand, radius: int, m: Optional[int]):
    if m is not None and isinstance(summand, ProductSummand):
        return summand.slice_values(radius, m)
    order, shells = _shell_order(summand.n, radius)
    values = summand.box(radius).ravel()[order]
    if m is not None:
        mask = _sum_index(summand.n, radius).ravel()[order] == m + summand.n * radius
        values, shells = values[mask], shells[mask]
    return values, shells


def shell_sums(summand, radius: int, m: Optional[int] = None) -> list:
    """Contribution of each shell r = 0..radius (restricted to |k| = m if given)."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    values, shells = _ordered(summand, radius, m)
    return _shell_sums(values, shells, radius)


def _total(parts: Sequence) -> mpc:
    return sum(parts, mpc(0))


def lattice_sum_box(summand, radius: int) -> mpc:
    return _total(shell_sums(summand, radius))


def lattice_slice_sum(summand, m: int, radius: int) -> mpc:
    return _total(shell_sums(summand, radius, m))


def _stabilize(shells_at: Callable[[int], list], schedule: TruncationSchedule, fixed_radius: Optional[int]) -> SumResult:
    if fixed_radius is not None:
        parts = shells_at(fixed_radius)
        value = _total(parts)
        return SumResult(value, _tail_estimate(parts), fixed_radius)
    last = None
    for radius in schedule.radii():
        parts = shells_at(radius)
        value = _total(parts)
        err = _tail_estimate(parts)
        if radius >= 1 and err <= schedule.tol * float(abs(value)):
            return SumResult(value, err, radius)
        last = (radius, err)
    raise NoConvergence(
        f"no stabilization up to radius {schedule.max_radius} (tail {last[1]:.3g})",
        radius=last[0],
        err_estimate=last[1],
    )


def _tail_estimate(parts: Sequence) -> float:
    """|last shell| + |previous shell|."""
    tail = parts[-2:] if len(parts) >= 2 else parts
    return float(sum(abs(p) for p in tail))


def adaptive_sum(summand, schedule: TruncationSchedule, m: Optional[int] = None, radius: Optional[int] = None) -> SumResult:
    """Box sum at radii initial, initial*growth, ... until the two outermost shells are negligible.

    Both outermost unit shells must lie below tol relative to the running
    total.  With ``m`` the sum is restricted to the slice |k| = m; with
    ``radius`` a single fixed radius is used (the error estimate is still
    reported).
    """
    return _stabilize(lambda r: shell_sums(summand, r, m), schedule, radius)


# ---------------------------------------------------------------------------
# classical series


def _classical_summand(upper, lower, q, z, bilateral: bool) -> ProductSummand:
    q = as_q(q)
    r, s = len(upper), len(lower)
    den = list(lower) if bilateral else list(lower) + [q]
    excess = (s - r) if bilateral else (1 + s - r)
    sign = -1 if excess % 2 else 1
    hyp = HypTerm(q, tuple(to_prec(a) for a in upper), tuple(to_prec(b) for b in den), sign * to_prec(z), excess)
    return ProductSummand(1, q, [HypTerm(q)], hyp)


def classical_phi_summand(upper, lower, q, z) -> ProductSummand:
    return _classical_summand(upper, lower, q, z, bilateral=False)


def classical_psi_summand(upper, lower, q, z) -> ProductSummand:
    return _classical_summand(upper, lower, q, z, bilateral=True)


def classical_phi(upper, lower, q, z, schedule: TruncationSchedule = TruncationSchedule()) -> mpc:
    return adaptive_sum(classical_phi_summand(upper, lower, q, z), schedule).value


def classical_psi(upper, lower, q, z, schedule: TruncationSchedule = TruncationSchedule()) -> mpc:
    return adaptive_sum(classical_psi_summand(upper, lower, q, z), schedule).value


# ---------------------------------------------------------------------------
# A_n summands


def an_summand_psi_type(x, b_vec, q, a=None, z=1, n=None, *, num=(), den=(), coefficient=None) -> ProductSummand:
    """V(k) prod_{ij} (x_i b_j/x_j)_{k_i}^-1 prod_i x_i^(n k_i - |k|) (-1)^((n-1)|k|)
    q^(-binom(|k|,2) + n sum binom(k_i,2)) * (a, num)_{|k|}/(den)_{|k|} z^{|k|}.

    ``a=None`` drops the (a)_{|k|} factor; ``coefficient`` multiplies by an
    arbitrary function of |k|.
    """
    q = as_q(q)
    x = [to_prec(v) for v in x]
    b = [to_prec(v) for v in b_vec]
    n = len(x) if n is None else n
    if len(x) != n or len(b) != n:
        raise ValueError("x and b_vec must have length n")
    big_x = prod(x)
    coords = [HypTerm(q, (), tuple(x[i] * b[j] / x[j] for j in range(n)), ipow(x[i], n), n) for i in range(n)]
    upper = ((to_prec(a),) if a is not None else ()) + tuple(to_prec(v) for v in num)
    sign = -1 if (n - 1) % 2 else 1
    weight = HypTerm(q, upper, tuple(to_prec(v) for v in den), sign * to_prec(z) / big_x, -1)
    return ProductSummand(n, q, coords, weight, x=x if n > 1 else None, coefficient=coefficient)


def an_summand_gustafson_type(x, a_vec, b_vec, q, z=1, n=None, *, num=(), den=(), coefficient=None,
                              vandermonde: bool = True) -> ProductSummand:
    """V(k) prod_{ij} (x_i a_j/x_j)_{k_i} / (x_i b_j/x_j)_{k_i} * (num)_{|k|}/(den)_{|k|} z^{|k|}."""
    q = as_q(q)
    x = [to_prec(v) for v in x]
    a = [to_prec(v) for v in a_vec]
    b = [to_prec(v) for v in b_vec]
    n = len(x) if n is None else n
    if not len(x) == len(a) == len(b) == n:
        raise ValueError("x, a_vec and b_vec must have length n")
    coords = [
        HypTerm(q, tuple(x[i] * a[j] / x[j] for j in range(n)), tuple(x[i] * b[j] / x[j] for j in range(n)))
        for i in range(n)
    ]
    weight = HypTerm(q, tuple(to_prec(v) for v in num), tuple(to_prec(v) for v in den), to_prec(z))
    use_x = x if (vandermonde and n > 1) else None
    return ProductSummand(n, q, coords, weight, x=use_x, coefficient=coefficient)


# ---------------------------------------------------------------------------
# permutation sums


def _sign(perm: Sequence[int]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _permutation_terms(x, inner: ProductSummand, q, n: int):
    """(sign * prod_i x_sigma(i)^(i - sigma(i)), inner shifted by q^(sum_i (i-1) k_sigma(i))) per sigma."""
    if n > MAX_PERMUTATION_ARITY:
        raise ArityTooLarge(f"permutation sums are limited to n <= {MAX_PERMUTATION_ARITY}, got {n}")
    x = [to_prec(v) for v in x]
    out = []
    for perm in itertools.permutations(range(n)):
        pre = mpc(_sign(perm))
        for i, si in enumerate(perm):
            pre = pre * ipow(x[si], i - si)
        # the exponent of q attached to k_j is (sigma^-1(j)) with 0-based positions
        exponents = [0] * n
        for i, si in enumerate(perm):
            exponents[si] = i
        out.append((pre, inner.with_coord_shift(exponents)))
    return out


def _permutation_shells(terms, radius: int, m: int) -> list:
    total = [mpc(0)] * (radius + 1)
    for pre, summand in terms:
        parts = shell_sums(summand, radius, m)
        total = [t + pre * p for t, p in zip(total, parts)]
    return total


def permutation_sum(x, inner: ProductSummand, q, n: int, radius: int, m: int = 0) -> mpc:
    """sum_sigma eps(sigma) prod_i x_sigma(i)^(i - sigma(i)) sum_{|k|=m, box} q^(sum_i (i-1) k_sigma(i)) inner(k)."""
    terms = _permutation_terms(x, inner, q, n)
    return _total(_permutation_shells(terms, radius, m))


def adaptive_permutation_sum(x, inner: ProductSummand, q, schedule: TruncationSchedule, m: int = 0,
                             radius: Optional[int] = None) -> SumResult:
    """Permutation sum with one box radius shared by all sigma, stabilized on the combined shells."""
    terms = _permutation_terms(x, inner, q, inner.n)
    return _stabilize(lambda r: _permutation_shells(terms, r, m), schedule, radius)
