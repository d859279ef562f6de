"""Enumeration of the ``(A, B, C)`` triples for ``x = A y1^p, x+1 = B y2^p, a x - b = C y3^p``.

Patterns are symbolic in ``p`` and built one prime at a time over the support
``{2, 3} | primes(b) | primes(a + b)``; :func:`instantiate` evaluates them at a
concrete odd prime.  Exponents are reduced modulo ``p`` on instantiation, i.e. a
perfect ``p``-th power is always removed, not only when an exponent equals ``p``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

from .arith import DomainError, FactoredInteger, factorize, pth_power_free, valuation
from .pyramidal import PyramidalInstance, coefficients


@dataclass(frozen=True, order=True)
class ExponentForm:
    """``(coef * p + const) / denom`` with ``coef`` in {-1, 0, 1} and ``denom`` in {1, 2}."""

    coef: int = 0
    const: int = 0
    denom: int = 1

    def __post_init__(self) -> None:
        if self.coef not in (-1, 0, 1) or self.denom not in (1, 2):
            raise DomainError(f"unsupported exponent shape {self}")
        if self.denom == 2 and self.coef == 0:
            raise DomainError("constant exponents must be integral")
        # p itself is a removable p-th power
        if (self.coef, self.const, self.denom) == (1, 0, 1):
            object.__setattr__(self, "coef", 0)

    def __call__(self, p: int) -> int:
        num = self.coef * p + self.const
        if num % self.denom or num < 0:
            raise DomainError(f"{self} is not a non-negative integer at p = {p}")
        return num // self.denom

    def __str__(self) -> str:
        if self.coef == 0:
            return str(self.const)
        s = "p" if self.coef == 1 else "-p"
        if self.const:
            s += f"{self.const:+d}"
        return f"({s})/2" if self.denom == 2 else s


def E(const: int = 0) -> ExponentForm:
    return ExponentForm(0, const)


def P(minus: int = 0) -> ExponentForm:
    """The form ``p - minus``."""
    return ExponentForm(1, -minus)


HALF = ExponentForm(1, 1, 2)  # (p + 1) / 2

Slots = tuple[ExponentForm, ExponentForm, ExponentForm]


@dataclass(frozen=True)
class Choice:
    slots: Slots
    only: frozenset[int] | None = None
    min_p: int = 3


# 2-adic exponent choices (alpha_1, alpha_2, alpha_3), keyed by t = ord_2(b_m).
_Z = E(0)
TWO_ADIC: dict[int, tuple[Choice, ...]] = {
    0: (Choice((E(1), _Z, _Z)), Choice((_Z, E(1), _Z))),
    1: (Choice((E(1), _Z, _Z)), Choice((_Z, E(1), _Z)), Choice((_Z, _Z, E(1)))),
    2: (Choice((_Z, E(1), _Z)), Choice((E(2), _Z, P(1))), Choice((P(1), _Z, E(2)))),
    3: (
        Choice((_Z, E(1), _Z)),
        Choice((E(3), _Z, P(2))),
        Choice((P(2), _Z, E(3))),
        Choice((E(2), _Z, E(2)), only=frozenset({3})),
    ),
    4: (
        Choice((_Z, E(1), _Z)),
        Choice((E(4), _Z, P(3))),
        Choice((P(3), _Z, E(4))),
        Choice((HALF, _Z, HALF), only=frozenset({3, 5})),
    ),
    5: (
        Choice((_Z, E(1), _Z)),
        Choice((E(5), _Z, P(4)), min_p=5),
        Choice((P(4), _Z, E(5)), min_p=5),
        Choice((E(2), _Z, E(2)), only=frozenset({3})),
        Choice((HALF, _Z, HALF), only=frozenset({3, 5, 7})),
    ),
}

# exactly one of A, B, C absorbs the 3 of c_m = 6
THREE_ADIC = (Choice((E(1), _Z, _Z)), Choice((_Z, E(1), _Z)), Choice((_Z, _Z, E(1))))


def _pair_choices(r: int, first: int) -> tuple[Choice, ...]:
    """Exponent choices for an odd prime dividing ``b`` (first=0: A vs C) or ``a+b`` (first=1: B vs C)."""
    out = []
    for gamma, rest in ((E(0), E(0)), (E(r), P(r)), (P(r), E(r))):
        slots = [_Z, _Z, rest]
        slots[first] = gamma
        out.append(Choice(tuple(slots)))
    return tuple(out)


@dataclass(frozen=True)
class CaseShape:
    """Factor shape of ``b_m`` and ``a_m + b_m``: ``b = 2^t p1^r1 q1^s1``, ``a+b = p2^r2 q2^s2``."""

    m: int
    case: int
    t: int
    b_odd: tuple[tuple[int, int], ...]  # ((p1, r1), (q1, s1)) as present
    ab: tuple[tuple[int, int], ...]  # ((p2, r2), (q2, s2)) as present

    @property
    def p1(self):
        return self.b_odd[0] if self.b_odd else None

    @property
    def q1(self):
        return self.b_odd[1] if len(self.b_odd) > 1 else None

    @property
    def p2(self):
        return self.ab[0]

    @property
    def q2(self):
        return self.ab[1] if len(self.ab) > 1 else None


def _shape_order(f: FactoredInteger) -> tuple[tuple[int, int], ...]:
    # p_i carries the larger exponent, q_i the other
    return tuple(sorted(f.factors, key=lambda qe: (-qe[1], qe[0])))


# allowed (r, s) exponents of the odd part of b and of a + b, per case
_B_SHAPES = {0: ({0, 1, 2}, {0, 1})}
_AB_SHAPES = {0: ({1, 2, 3}, {0, 1}), 1: ({1}, {0, 1}), 2: ({1, 2}, {0, 1}), 3: ({1}, {0}), 4: ({1}, {1}), 5: ({1}, {0})}


def classify_case(m: int) -> CaseShape:
    if not 6 <= m <= 50:
        raise DomainError(f"m = {m} outside [6, 50]")
    inst = coefficients(m)
    bf = factorize(inst.b)
    t = bf.exponent(2)
    b_odd = _shape_order(FactoredInteger(tuple(qe for qe in bf if qe[0] != 2)))
    ab = _shape_order(factorize(inst.a + inst.b))
    if t > 5:
        raise AssertionError(f"ord_2(b_m) = {t} > 5 at m = {m}")
    rs, ss = _B_SHAPES.get(t, ({0, 1}, {0}))
    exps = [e for _, e in b_odd] + [0, 0]
    if len(b_odd) > 2 or exps[0] not in rs or exps[1] not in ss:
        raise AssertionError(f"unexpected shape of b_m = {inst.b} at m = {m}")
    if t >= 4 and b_odd:
        raise AssertionError(f"unexpected shape of b_m = {inst.b} at m = {m}")
    r2s, s2s = _AB_SHAPES[t]
    exps = [e for _, e in ab] + [0, 0]
    if len(ab) > 2 or exps[0] not in r2s or exps[1] not in s2s:
        raise AssertionError(f"unexpected shape of a_m + b_m = {inst.a + inst.b} at m = {m}")
    for q, _ in b_odd + ab:
        assert inst.c % q, (m, q)
    return CaseShape(m, t + 1, t, b_odd, ab)


@dataclass(frozen=True)
class TriplePattern:
    """Symbolic triple: for each support prime, its exponent forms in (A, B, C)."""

    m: int
    case: int
    exponents: tuple[tuple[int, Slots], ...]
    only: frozenset[int] | None = None
    min_p: int = 3

    def valid_for(self, p: int) -> bool:
        return p >= self.min_p and (self.only is None or p in self.only)

    def describe(self) -> str:
        parts = []
        for q, (ea, eb, ec) in self.exponents:
            parts.append(f"{q}:({ea},{eb},{ec})")
        tag = "" if self.only is None else f" p in {sorted(self.only)}"
        return " ".join(parts) + tag


@dataclass(frozen=True, order=True)
class TripleABC:
    A: FactoredInteger = field(compare=False)
    B: FactoredInteger = field(compare=False)
    C: FactoredInteger = field(compare=False)
    key: tuple = field(default=(), repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "key", (self.A.factors, self.B.factors, self.C.factors))

    def __hash__(self) -> int:
        return hash(self.key)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, TripleABC) and self.key == other.key

    def __str__(self) -> str:
        return f"({self.A}, {self.B}, {self.C})"

    def check(self, inst: PyramidalInstance, p: int) -> None:
        """Assert p-th-power-freeness and the divisibility constraints by exponent comparison."""
        cf, bf, sf = factorize(inst.c), factorize(inst.b), factorize(inst.a + inst.b)
        for name, val in (("A", self.A), ("B", self.B), ("C", self.C)):
            if not val.is_pth_power_free(p):
                raise AssertionError(f"{name} = {val} not {p}-th power free")
        for q, e in self.A:
            assert e <= cf.exponent(q) + p * bf.exponent(q), ("A", q)
        for q, e in self.B:
            assert e <= cf.exponent(q) + p * sf.exponent(q), ("B", q)
        for q, e in self.C:
            assert e <= cf.exponent(q) + p * (bf.exponent(q) + sf.exponent(q)), ("C", q)


@lru_cache(maxsize=None)
def enumerate_patterns(m: int) -> tuple[TriplePattern, ...]:
    shape = classify_case(m)
    inst = coefficients(m)
    per_prime: list[tuple[int, tuple[Choice, ...]]] = [(2, TWO_ADIC[shape.t])]
    if inst.c == 6:
        per_prime.append((3, THREE_ADIC))
    for q, r in shape.b_odd:
        per_prime.append((q, _pair_choices(r, 0)))
    for q, r in shape.ab:
        per_prime.append((q, _pair_choices(r, 1)))
    per_prime.sort()

    seen: set = set()
    out: list[TriplePattern] = []
    for combo in itertools.product(*(choices for _, choices in per_prime)):
        only: frozenset[int] | None = None
        min_p = 3
        for ch in combo:
            if ch.only is not None:
                only = ch.only if only is None else only & ch.only
            min_p = max(min_p, ch.min_p)
        exps = tuple((q, ch.slots) for (q, _), ch in zip(per_prime, combo))
        pat = TriplePattern(m, shape.case, exps, only, min_p)
        if pat not in seen:
            seen.add(pat)
            out.append(pat)
    return tuple(out)


def instantiate(pattern: TriplePattern, p: int) -> TripleABC:
    if not pattern.valid_for(p):
        raise DomainError(f"pattern {pattern.describe()} not valid at p = {p}")
    cols: list[list[tuple[int, int]]] = [[], [], []]
    for q, slots in pattern.exponents:
        for i, form in enumerate(slots):
            cols[i].append((q, form(p) % p))
    triple = TripleABC(*(FactoredInteger(tuple(c)) for c in cols))
    triple.check(coefficients(pattern.m), p)
    return triple


@lru_cache(maxsize=4096)
def triples_for(m: int, p: int) -> tuple[TripleABC, ...]:
    """Distinct triples at the odd prime ``p``, in deterministic order."""
    found = {instantiate(pat, p) for pat in enumerate_patterns(m) if pat.valid_for(p)}
    return tuple(sorted(found))


@lru_cache(maxsize=None)
def _support(m: int) -> tuple[int, ...]:
    inst = coefficients(m)
    return factorize(inst.c * inst.b * (inst.a + inst.b)).primes()


def support(inst: PyramidalInstance) -> tuple[int, ...]:
    return _support(inst.m)


def residual_triple(m: int, p: int, x: int) -> TripleABC | None:
    """p-th-power-free parts of ``(x, x+1, a x - b)`` on the support, or ``None``
    if some support prime violates ``ord(x(x+1)(ax-b)) = ord(c) (mod p)``."""
    inst = coefficients(m)
    u, v, w = x, x + 1, inst.a * x - inst.b
    sup = _support(m)
    for q in sup:
        total = sum(valuation(n, q) for n in (u, v, w))
        if (total - valuation(inst.c, q)) % p:
            return None
    return TripleABC(*(pth_power_free(n, p, sup) for n in (u, v, w)))
