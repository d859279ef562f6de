"""Modular-method finisher for survivors with ``A = 1`` or ``B = 1``.

Such systems reduce to ``z1^p - D z2^p = 1``.  Exponents are first filtered by
the odd primes of ``phi(D)``; the rest go through the Frey curve
``Y^2 = X(X + 1)(X - D z2^p)``, whose mod-``p`` representation arises from a
weight-2 newform at level ``2 * Rad_2(D)`` or ``32 * Rad_2(D)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
import sympy

from .arith import (
    DomainError,
    FactoredInteger,
    euler_phi,
    factorize,
    is_prime,
    primes_in,
    rad_odd,
)
from .sieve import SurvivorClass, ThueSystem, candidate_primes, count_solutions_mod
from .triples import TripleABC


class DataError(ValueError):
    """Newform data is missing, malformed or inconsistent."""


# --------------------------------------------------------------------------
# number-field arithmetic

def _trim(c: list) -> list:
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return c


def _poly_rem(num: list[Fraction], den: list[Fraction]) -> list[Fraction]:
    num = list(num)
    lead = den[-1]
    while len(num) >= len(den) and any(num):
        if num[-1] == 0:
            num.pop()
            continue
        factor = num[-1] / lead
        shift = len(num) - len(den)
        for i, c in enumerate(den):
            num[shift + i] -= factor * c
        num.pop()
    return _trim(num or [Fraction(0)])


def resultant(f: Sequence, g: Sequence) -> Fraction:
    """Resultant of two polynomials (coefficient lists, constant term first) over Q."""
    f = _trim([Fraction(c) for c in f])
    g = _trim([Fraction(c) for c in g])
    out = Fraction(1)
    while True:
        df, dg = len(f) - 1, len(g) - 1
        if dg == 0:
            return out * g[0] ** df
        if df == 0:
            return out * f[0] ** dg
        if df < dg:
            if df * dg % 2:
                out = -out
            f, g = g, f
            continue
        r = _poly_rem(f, g)
        if len(r) == 1 and r[0] == 0:
            return Fraction(0)
        # Res(f, g) = (-1)^(df dg) lc(g)^(df - dr) Res(g, r)
        dr = len(r) - 1
        if df * dg % 2:
            out = -out
        out *= g[-1] ** (df - dr)
        f, g = g, r


@dataclass(frozen=True)
class AlgebraicNumber:
    """Element of ``Q[y]/(field_poly)`` in power-basis coordinates."""

    field_poly: tuple[int, ...]  # monic, constant term first
    coords: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        d = len(self.field_poly) - 1
        if d < 1 or self.field_poly[-1] != 1:
            raise DomainError(f"field polynomial {self.field_poly} is not monic of degree >= 1")
        coords = tuple(Fraction(c) for c in self.coords)
        if len(coords) > d:
            coords = tuple(_poly_rem(list(coords), [Fraction(c) for c in self.field_poly]))
        coords = coords + (Fraction(0),) * (d - len(coords))
        object.__setattr__(self, "coords", coords)

    @property
    def degree(self) -> int:
        return len(self.field_poly) - 1

    @classmethod
    def scalar(cls, field_poly: tuple[int, ...], n) -> "AlgebraicNumber":
        return cls(field_poly, (Fraction(n),))

    def _check(self, other: "AlgebraicNumber") -> None:
        if other.field_poly != self.field_poly:
            raise DomainError("elements of different fields")

    def _lift(self, other) -> "AlgebraicNumber":
        if isinstance(other, AlgebraicNumber):
            self._check(other)
            return other
        return AlgebraicNumber.scalar(self.field_poly, other)

    def __add__(self, other) -> "AlgebraicNumber":
        o = self._lift(other)
        return AlgebraicNumber(self.field_poly, tuple(a + b for a, b in zip(self.coords, o.coords)))

    __radd__ = __add__

    def __neg__(self) -> "AlgebraicNumber":
        return AlgebraicNumber(self.field_poly, tuple(-a for a in self.coords))

    def __sub__(self, other) -> "AlgebraicNumber":
        return self + (-self._lift(other))

    def __rsub__(self, other) -> "AlgebraicNumber":
        return self._lift(other) - self

    def __mul__(self, other) -> "AlgebraicNumber":
        o = self._lift(other)
        prod = [Fraction(0)] * (2 * self.degree - 1)
        for i, a in enumerate(self.coords):
            if a:
                for j, b in enumerate(o.coords):
                    prod[i + j] += a * b
        return AlgebraicNumber(self.field_poly, tuple(_poly_rem(prod, [Fraction(c) for c in self.field_poly])))

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "AlgebraicNumber":
        out = AlgebraicNumber.scalar(self.field_poly, 1)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def embeddings(self) -> list[complex]:
        roots = np.roots([float(c) for c in reversed(self.field_poly)])
        return [sum(complex(float(c)) * r**j for j, c in enumerate(self.coords)) for r in roots]


@lru_cache(maxsize=1024)
def _irreducible(field_poly: tuple[int, ...]) -> bool:
    if len(field_poly) <= 2:
        return True
    y = sympy.Symbol("y")
    return sympy.Poly(list(reversed(field_poly)), y, domain="QQ").is_irreducible


def norm(alpha: AlgebraicNumber) -> Fraction:
    """``Norm_{K/Q}`` as ``Res(field_poly, coordinate polynomial)``."""
    if not _irreducible(alpha.field_poly):
        raise DataError(f"field polynomial {alpha.field_poly} is reducible")
    return resultant(alpha.field_poly, list(alpha.coords))


def numeric_norm(alpha: AlgebraicNumber) -> complex:
    out = complex(1)
    for z in alpha.embeddings():
        out *= z
    return out


# --------------------------------------------------------------------------
# newform records

@dataclass(frozen=True)
class NewformRecord:
    label: str
    level: int
    weight: int
    dim: int
    field_poly: tuple[int, ...]
    eigenvalues: dict[int, tuple[Fraction, ...]] = field(hash=False, compare=True)
    traces: tuple[int, ...] = field(default=(), hash=False)

    def ap(self, q: int) -> AlgebraicNumber:
        try:
            coords = self.eigenvalues[q]
        except KeyError:
            bound = max(self.eigenvalues, default=0)
            raise DataError(
                f"{self.label}: no eigenvalue a_{q} (data reaches q <= {bound}); extend ingestion"
            ) from None
        return AlgebraicNumber(self.field_poly, coords)

    @property
    def eigenvalue_bound(self) -> int:
        return max(self.eigenvalues, default=0)

    @property
    def is_rational(self) -> bool:
        return self.dim == 1


# --------------------------------------------------------------------------
# D, prime filtering and levels

@dataclass(frozen=True)
class FreyContext:
    D: FactoredInteger
    levels: tuple[int, int]
    p: int

    @classmethod
    def of(cls, D: FactoredInteger, p: int) -> "FreyContext":
        return cls(D, frey_levels(D), p)


def d_value(triple: TripleABC, cls: SurvivorClass) -> FactoredInteger:
    if cls.tag == "case-II":
        return triple.B
    if cls.tag == "case-III":
        return triple.A
    raise DomainError(f"D is defined only for case-II/III survivors, not {cls.tag}")


EXCEPTIONAL_TUPLE = (18, 7, 17, 3)  # 18^3 - 17 * 7^3 = 1


@dataclass(frozen=True)
class ThmDFilter:
    """Odd primes of ``phi(D)``: the exponents the Bartolome-Mihailescu bound leaves open."""

    primes: tuple[int, ...]
    note: str | None = None
    exceptional: bool = False

    def __contains__(self, p: int) -> bool:
        return p in self.primes

    def __iter__(self):
        return iter(self.primes)

    def __len__(self) -> int:
        return len(self.primes)

    def closes(self, p: int) -> bool:
        """True when ``|z2| > 1`` solutions are excluded at ``p`` (below 163 * 10^12)."""
        if p in self.primes:
            return False
        return not (self.exceptional and p == EXCEPTIONAL_TUPLE[3])


def thmD_prime_filter(D: FactoredInteger) -> ThmDFilter:
    if D.is_unit():
        raise DomainError("D = 1")
    odd = tuple(q for q in euler_phi(D).primes() if q != 2)
    note = None
    if D.exponent(17):
        note = "exceptional solution (z1, z2, D, p) = (18, 7, 17, 3) when D = 17 and p = 3"
    return ThmDFilter(odd, note, D == factorize(17))


def gp_rule_applies(D: FactoredInteger, p: int) -> bool:
    qs = D.primes()
    return p >= 11 and len(qs) <= 2 and max(qs, default=0) < 30


def frey_levels(D: FactoredInteger) -> tuple[int, int]:
    if D.exponent(2) != 1:
        raise DomainError(f"ord_2(D) = {D.exponent(2)} != 1 for D = {D}")
    r = rad_odd(D).value()
    return 2 * r, 32 * r


# --------------------------------------------------------------------------
# trace comparisons

def _numerator_divisible(value: Fraction, p: int) -> bool:
    return value.numerator % p == 0


def trace_criterion(f: NewformRecord, ell: int, p: int) -> bool:
    """True iff ``p | Norm((ell + 1)^2 - a_ell(f)^2)``, i.e. ``ell`` cannot serve as a witness."""
    if p < 3 or p % 2 == 0:
        raise DomainError(f"p = {p} must be an odd prime")
    a = f.ap(ell)
    return _numerator_divisible(norm((ell + 1) ** 2 - a * a), p)


def reducibility_check(f: NewformRecord, p: int, D: FactoredInteger, q_bound: int = 200) -> bool:
    """True iff ``p | Norm(q + 1 - a_q(f))`` for every prime ``q <= q_bound``, ``q`` not dividing ``2D``."""
    if q_bound < 3:
        raise DomainError("q_bound < 3 makes the check vacuous")
    if p < 11:
        raise DomainError("the reducibility argument needs p >= 11")
    bad = set(D.primes()) | {2}
    tested = 0
    for q in primes_in(3, q_bound):
        if q in bad:
            continue
        tested += 1
        if not _numerator_divisible(norm((q + 1) - f.ap(q)), p):
            return False
    return tested > 0


@dataclass(frozen=True)
class NewformVerdict:
    label: str
    level: int
    kind: str  # witness | suspect-reducible | reducible | data-error
    ell: int | None = None
    k: int | None = None
    q_bound: int | None = None
    detail: str | None = None

    def to_json(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}


def _known_classes(cls: SurvivorClass, p: int, ell: int) -> tuple[int, int, int]:
    return tuple(pow(y, p, ell) for y in cls.known_solution)  # type: ignore[union-attr]


def eliminate_newform(
    system: ThueSystem, cls: SurvivorClass, f: NewformRecord, kmax: int = 150
) -> NewformVerdict:
    """Search ``ell = 2kp + 1`` with a unique class solution equal to the known one
    and ``p`` not dividing ``Norm((ell + 1)^2 - a_ell^2)``."""
    if cls.tag not in ("case-II", "case-III"):
        raise DomainError(f"modular elimination needs a case-II/III survivor, not {cls.tag}")
    D = d_value(system.triple, cls)
    if D.exponent(2) != 1:
        raise DomainError(f"ord_2(D) != 1 for D = {D}")
    p = system.p
    bad = set(D.primes())
    for k, ell in candidate_primes(p, kmax):
        if ell in bad or not system.admissible(ell):
            continue
        w = count_solutions_mod(system, ell)
        if w.count != 1 or w.solutions[0] != _known_classes(cls, p, ell):
            continue
        if not trace_criterion(f, ell, p):
            assert w.count < 2
            return NewformVerdict(f.label, f.level, "witness", ell=ell, k=k)
    return NewformVerdict(f.label, f.level, "suspect-reducible")


# --------------------------------------------------------------------------
# point counting

def _b_invariants(a1, a2, a3, a4, a6):
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    return b2, b4, b6, b8


def discriminant(ainvs: Sequence[int]) -> int:
    b2, b4, b6, b8 = _b_invariants(*ainvs)
    return -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6


def elliptic_ap(ainvs: Sequence[int], ell: int) -> int:
    """``ell + 1 - #E(F_ell)`` by a Legendre-symbol sum over ``x`` in ``F_ell``."""
    if len(ainvs) != 5:
        raise DomainError("expected [a1, a2, a3, a4, a6]")
    if not is_prime(ell) or ell == 2 or discriminant(ainvs) % ell == 0:
        raise DomainError(f"bad reduction (or ell = 2) at ell = {ell}")
    b2, b4, b6, _ = _b_invariants(*ainvs)
    # 4y'^2 = 4x^3 + b2 x^2 + 2 b4 x + b6 after completing the square
    x = np.arange(ell, dtype=np.int64)
    rhs = (((4 * x + b2 % ell) % ell * x + 2 * b4 % ell) % ell * x + b6 % ell) % ell
    chi = np.full(ell, -1, dtype=np.int64)
    chi[(x * x) % ell] = 1
    chi[0] = 0
    ap = -int(chi[rhs].sum())
    assert ap * ap <= 4 * ell, (ainvs, ell, ap)
    return ap


def hasse_ok(f: NewformRecord, tol: float = 1e-6) -> list[str]:
    """Primes at which some embedding of ``a_q`` exceeds ``2 sqrt(q)`` (empty when fine)."""
    bad = []
    roots = np.roots([float(c) for c in reversed(f.field_poly)])
    for q, coords in f.eigenvalues.items():
        lim = 2 * math.sqrt(q) + tol
        for r in roots:
            z = sum(float(c) * r**j for j, c in enumerate(coords))
            if abs(z) > lim:
                bad.append(f"a_{q} = {z:.6g} exceeds 2*sqrt({q})")
                break
    return bad
