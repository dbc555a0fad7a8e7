"""Specialization ladder: parameter maps under which one catalog entry becomes another.

Each rung maps a point of the child identity to a point of the parent; both
sides of the parent evaluated at the mapped point must agree with the
corresponding sides of the child.  Mapped parameters are computed at the
working precision.  A parent of ``None`` means the child collapses to the
constant 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from gmpy2 import mpc

from .precision import ipow, prod, to_prec


@dataclass(frozen=True)
class Rung:
    name: str
    child: str
    parent: Optional[str]
    arities: tuple
    mapping: Callable[[dict], dict]


def _q(p):
    return to_prec(p["q"])


def _v(p, key):
    return [to_prec(v) for v in p[key]]


def _s(p, key):
    return to_prec(p[key])


def _first(p, key):
    return to_prec(p[key][0])


def _base(p, **values):
    return {"n": p["n"], "q": p["q"], **values}


def _split_a(a, q, n):
    """a_1...a_n = a q^(n-1) with a_1 carrying the whole product."""
    return [a * ipow(q, n - 1)] + [mpc(1)] * (n - 1)


def _i26_from_i23(p):
    q, n = _q(p), p["n"]
    a = _split_a(_s(p, "a"), q, n)
    return _base(p, a=a, b=prod(_v(p, "b")), c=[b * q for b in _v(p, "b")], d=_s(p, "c"),
                 x=_v(p, "x"), y=_v(p, "x"), z=[q / ai for ai in a])


def _i28_from_i22(p):
    q, n = _q(p), p["n"]
    a = _split_a(_s(p, "a"), q, n)
    return _base(p, a=a, b=_v(p, "b"), c=_s(p, "c"), d=[b * q for b in _v(p, "b")],
                 x=_v(p, "x"), y=_v(p, "x"), z=[q / ai for ai in a])


def _i29_from_i24(p):
    q, n = _q(p), p["n"]
    a = _split_a(_s(p, "a"), q, n)
    b = _v(p, "b")
    return _base(p, a=a, b=b, c=prod(b) * q, d=_v(p, "c"), x=_v(p, "x"), y=_v(p, "x"), z=[q / ai for ai in a])


def _i30_from_i24(p):
    q, n = _q(p), p["n"]
    root = q ** (mpc(1) / n)
    a, b = _v(p, "a"), _v(p, "b")
    return _base(p, a=[bi * q / root for bi in b], b=a, c=_s(p, "c"), d=[bi * q for bi in b],
                 x=_v(p, "x"), y=_v(p, "x"), z=[root / ai for ai in a])


RUNGS = [
    # n = 1 reductions to the classical layer
    Rung("I03@n=1 = I01", "I03", "I01", (1,), lambda p: _base(p, a=_s(p, "a"), z=_s(p, "z"))),
    Rung("I04@n=1 = I02", "I04", "I02", (1,), lambda p: _base(p, a=_s(p, "a"), b=_first(p, "b"), z=_s(p, "z"))),
    Rung("I10@n=1 = I02", "I10", "I02", (1,), lambda p: _base(p, a=_first(p, "a"), b=_first(p, "b"), z=_s(p, "z"))),
    Rung("I12@n=1 = 1", "I12", None, (1,), lambda p: p),
    Rung("I13@n=1 = 1", "I13", None, (1,), lambda p: p),
    Rung("I19@n=1 = I16", "I19", "I16", (1,),
         lambda p: _base(p, a=_s(p, "a"), b=_s(p, "b"), c=_first(p, "c"), d=_s(p, "d"), z=_s(p, "z"))),
    Rung("I20@n=1 = I16", "I20", "I16", (1,),
         lambda p: _base(p, a=_first(p, "a"), b=_s(p, "b"), c=_first(p, "c"), d=_s(p, "d"), z=_first(p, "z"))),
    Rung("I21@n=1 = I16", "I21", "I16", (1,),
         lambda p: _base(p, a=_first(p, "a"), b=_s(p, "b"), c=_first(p, "c"), d=_s(p, "d"), z=_s(p, "z"))),
    Rung("I22@n=1 = I16", "I22", "I16", (1,),
         lambda p: _base(p, a=_first(p, "a"), b=_first(p, "b"), c=_s(p, "c"), d=_first(p, "d"), z=_first(p, "z"))),
    Rung("I23@n=1 = I17", "I23", "I17", (1,),
         lambda p: _base(p, a=_first(p, "a"), b=_s(p, "b"), c=_first(p, "c"), d=_s(p, "d"), z=_first(p, "z"))),
    Rung("I24@n=1 = I17", "I24", "I17", (1,),
         lambda p: _base(p, a=_first(p, "a"), b=_first(p, "b"), c=_s(p, "c"), d=_first(p, "d"), z=_first(p, "z"))),
    Rung("I25@n=1 = I18", "I25", "I18", (1,), lambda p: _base(p, a=_s(p, "a"), b=_s(p, "b"), c=_first(p, "c"))),
    Rung("I26@n=1 = I18", "I26", "I18", (1,), lambda p: _base(p, a=_s(p, "a"), b=_first(p, "b"), c=_s(p, "c"))),
    Rung("I27@n=1 = I18", "I27", "I18", (1,), lambda p: _base(p, a=_first(p, "a"), b=_s(p, "b"), c=_first(p, "c"))),
    Rung("I28@n=1 = I18", "I28", "I18", (1,), lambda p: _base(p, a=_s(p, "a"), b=_first(p, "b"), c=_s(p, "c"))),
    Rung("I29@n=1 = I18", "I29", "I18", (1,), lambda p: _base(p, a=_s(p, "a"), b=_first(p, "b"), c=_first(p, "c"))),
    Rung("I30@n=1 = I18", "I30", "I18", (1,), lambda p: _base(p, a=_first(p, "a"), b=_first(p, "b"), c=_s(p, "c"))),
    # specializations inside the A_n layer
    Rung("I03 = I04 at b_i = q", "I03", "I04", (2, 3),
         lambda p: _base(p, a=_s(p, "a"), b=[_q(p)] * p["n"], x=_v(p, "x"), z=_s(p, "z"))),
    Rung("I12 = I11 at m = 0", "I12", "I11", (2, 3),
         lambda p: _base(p, a=_v(p, "a"), b=_v(p, "b"), x=_v(p, "x"), m=0)),
    Rung("I14 = I13 at b_i = a_i q", "I14", "I13", (2, 3),
         lambda p: _base(p, a=_v(p, "a"), b=[a * _q(p) for a in _v(p, "a")], x=_v(p, "x"))),
    Rung("I15 = I11 at b_i = a_i q", "I15", "I11", (2, 3),
         lambda p: _base(p, a=_v(p, "a"), b=[a * _q(p) for a in _v(p, "a")], x=_v(p, "x"), m=p["m"])),
    Rung("I25 = I19 at z = q/a, d = bq", "I25", "I19", (1, 2, 3),
         lambda p: _base(p, a=_s(p, "a"), b=_s(p, "b"), c=_v(p, "c"), d=_s(p, "b") * _q(p),
                         x=_v(p, "x"), y=_v(p, "x"), z=_q(p) / _s(p, "a"))),
    Rung("I26 = I23 at c_i = b_i q, z_i = q/a_i", "I26", "I23", (1, 2, 3), _i26_from_i23),
    Rung("I27 = I21 at z = q/A, d = bq", "I27", "I21", (1, 2, 3),
         lambda p: _base(p, a=_v(p, "a"), b=_s(p, "b"), c=_v(p, "c"), d=_s(p, "b") * _q(p),
                         x=_v(p, "x"), y=_v(p, "x"), z=_q(p) / prod(_v(p, "a")))),
    Rung("I28 = I22 at d_i = b_i q, z_i = q/a_i", "I28", "I22", (1, 2, 3), _i28_from_i22),
    Rung("I29 = I24 at c = Bq, z_i = q/a_i", "I29", "I24", (1, 2, 3), _i29_from_i24),
    Rung("I30 = I24 at b_i -> a_i, d_i = b_i q", "I30", "I24", (1, 2, 3), _i30_from_i24),
]


def rung(name: str) -> Rung:
    for r in RUNGS:
        if r.name == name:
            return r
    raise KeyError(name)

