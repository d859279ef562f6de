"""Local elimination of the Thue system ``B y2^p - A y1^p = 1, a A y1^p - C y3^p = b``.

For ``ell = 2kp + 1`` every ``y^p`` is either 0 or a ``2k``-th root of unity mod
``ell``, so the system mod ``ell`` has at most ``2k + 1`` candidate classes for
``y1^p``; each determines ``y2^p`` and ``y3^p`` linearly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator

from .arith import DomainError, FactoredInteger, eval_mod, factorize, integer_root, is_prime, primitive_root
from .pyramidal import PyramidalInstance, coefficients
from .triples import TripleABC

DEFAULT_KMAX = 150


@dataclass(frozen=True)
class ThueSystem:
    instance: PyramidalInstance
    p: int
    triple: TripleABC

    @classmethod
    def of(cls, m: int, p: int, triple: TripleABC) -> "ThueSystem":
        return cls(coefficients(m), p, triple)

    @property
    def A(self) -> FactoredInteger:
        return self.triple.A

    @property
    def B(self) -> FactoredInteger:
        return self.triple.B

    @property
    def C(self) -> FactoredInteger:
        return self.triple.C

    def equations(self) -> tuple[str, str]:
        a, b, p = self.instance.a, self.instance.b, self.p
        A, B, C = self.A, self.B, self.C
        return (
            f"({B})*y2^{p}-({A})*y1^{p}=1",
            f"{a}*({A})*y1^{p}-({C})*y3^{p}={b}",
        )

    def admissible(self, ell: int) -> bool:
        """``ell`` avoids every coefficient that must be inverted."""
        bad = self.A * self.B * self.C * factorize(self.instance.a) * factorize(self.instance.c)
        return ell not in bad.primes()

    def residues(self, ell: int) -> tuple[int, int, int]:
        return eval_mod(self.A, ell), eval_mod(self.B, ell), eval_mod(self.C, ell)


@dataclass(frozen=True)
class SieveWitness:
    ell: int
    k: int
    count: int
    solutions: tuple[tuple[int, int, int], ...] = field(default=())


@lru_cache(maxsize=65536)
def mu_set(ell: int, p: int) -> frozenset[int]:
    """The ``2k``-th roots of unity in ``F_ell``, ``ell = 2kp + 1``, as powers of ``g^p``."""
    if p < 3 or (ell - 1) % (2 * p) or not is_prime(ell):
        raise DomainError(f"ell = {ell} is not a prime = 1 mod 2p for p = {p}")
    two_k = (ell - 1) // p
    h = pow(primitive_root(ell), p, ell)
    out = set()
    x = 1
    for _ in range(two_k):
        out.add(x)
        x = x * h % ell
    return frozenset(out)


def _class_solutions(system: ThueSystem, ell: int, first_only: bool = False) -> Iterator[tuple[int, int, int]]:
    if not system.admissible(ell):
        raise DomainError(f"ell = {ell} divides a coefficient of the system")
    mu = mu_set(ell, system.p)
    a, b = system.instance.a % ell, system.instance.b % ell
    A, B, C = system.residues(ell)
    b_inv, c_inv = pow(B, -1, ell), pow(C, -1, ell)
    aA = a * A % ell
    for v1 in (0, *sorted(mu)):
        v2 = (1 + A * v1) * b_inv % ell
        if v2 and v2 not in mu:
            continue
        v3 = (aA * v1 - b) * c_inv % ell
        if v3 and v3 not in mu:
            continue
        yield (v1, v2, v3)
        if first_only:
            return


def count_solutions_mod(system: ThueSystem, ell: int) -> SieveWitness:
    sols = tuple(_class_solutions(system, ell))
    return SieveWitness(ell, (ell - 1) // (2 * system.p), len(sols), sols)


def candidate_primes(p: int, kmax: int) -> Iterator[tuple[int, int]]:
    for k in range(1, kmax + 1):
        ell = 2 * k * p + 1
        if is_prime(ell):
            yield k, ell


def find_eliminating_prime(system: ThueSystem, kmax: int = DEFAULT_KMAX) -> SieveWitness | None:
    """First ``ell = 2kp + 1`` (ascending ``k <= kmax``) with no solution mod ``ell``."""
    for k, ell in candidate_primes(system.p, kmax):
        if not system.admissible(ell):
            continue
        if next(_class_solutions(system, ell, first_only=True), None) is None:
            return SieveWitness(ell, k, 0, ())
    return None


@dataclass(frozen=True)
class SurvivorClass:
    tag: str  # case-I | case-II | case-III | global-solution | unclassified
    known_solution: tuple[int, int, int] | None = None


def classify_survivor(system: ThueSystem) -> SurvivorClass:
    inst = system.instance
    A, B, C = system.A, system.B, system.C
    if A.is_unit() and B == factorize(2) and C == factorize(inst.a - inst.b):
        return SurvivorClass("case-I", (1, 1, 1))
    if A.is_unit() and C == factorize(inst.a + inst.b):
        return SurvivorClass("case-II", (-1, 0, -1))
    if B.is_unit() and C == factorize(inst.b):
        return SurvivorClass("case-III", (0, 1, -1))
    return SurvivorClass("unclassified")


def darmon_merel_rule(system: ThueSystem) -> dict:
    """Close a case-I system: ``2 y2^p - y1^p = 1`` forces ``y1 = y2 = 1``, hence ``x = 1``."""
    if system.p < 3 or classify_survivor(system).tag != "case-I":
        raise DomainError("Darmon-Merel rule applies only to case-I systems with p >= 3")
    return {
        "rule": "darmon-merel",
        "equation": f"2*y2^{system.p}-y1^{system.p}=1",
        "conclusion": "y1 = y2 = 1, so x = 1 and y = 1",
    }


def search_small_solutions(system: ThueSystem, height: int) -> list[tuple[int, int, int]]:
    """All integer solutions with ``|y1| <= height`` (exact big-integer arithmetic)."""
    if height < 1:
        return []
    inst, p = system.instance, system.p
    A, B, C = system.A.value(), system.B.value(), system.C.value()
    hits = []
    for y1 in range(-height, height + 1):
        ay = A * y1**p
        n2, r = divmod(1 + ay, B)
        if r:
            continue
        y2 = integer_root(n2, p)
        if y2 is None:
            continue
        n3, r = divmod(inst.a * ay - inst.b, C)
        if r:
            continue
        y3 = integer_root(n3, p)
        if y3 is None:
            continue
        hits.append((y1, y2, y3))
    return hits


def thue_line(system: ThueSystem) -> str:
    """One residual equation in the export format ``THUE m p A B C eq1|eq2``."""
    eq1, eq2 = system.equations()
    return f"THUE {system.instance.m} {system.p} {system.A} {system.B} {system.C} {eq1}|{eq2}"
