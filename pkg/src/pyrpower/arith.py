"""Exact integer, modular and multiplicative-function arithmetic.

Large coefficients such as ``23**(p - 1)`` with ``p`` near 80000 are never
expanded during sieving; they live as :class:`FactoredInteger` and are reduced
modulo auxiliary primes factor by factor.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator

import gmpy2


class DomainError(ValueError):
    """Raised when an argument lies outside an operation's domain."""


# Deterministic Miller-Rabin bases for n < 3.3 * 10**24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def primes_in(lo: int, hi: int) -> list[int]:
    """All primes ``q`` with ``lo <= q <= hi`` (segmented Eratosthenes)."""
    if hi < lo or lo < 0:
        raise DomainError(f"bad range [{lo}, {hi}]")
    if hi < 2:
        return []
    lo = max(lo, 2)
    base = _small_sieve(math.isqrt(hi))
    seg = bytearray([1]) * (hi - lo + 1)
    for q in base:
        start = max(q * q, (lo + q - 1) // q * q)
        if start > hi:
            continue
        seg[start - lo :: q] = bytes(len(range(start, hi + 1, q)))
    return [lo + i for i, flag in enumerate(seg) if flag]


@lru_cache(maxsize=8)
def _small_sieve(n: int) -> tuple[int, ...]:
    if n < 2:
        return ()
    flags = bytearray([1]) * (n + 1)
    flags[0] = flags[1] = 0
    for q in range(2, math.isqrt(n) + 1):
        if flags[q]:
            flags[q * q :: q] = bytes(len(range(q * q, n + 1, q)))
    return tuple(i for i, f in enumerate(flags) if f)


@dataclass(frozen=True)
class FactoredInteger:
    """A positive integer held as sorted ``(prime, exponent)`` pairs.

    The unit is the empty tuple.  Construction normalises (merges repeated
    primes, drops zero exponents, sorts) and checks that every base is prime.
    """

    factors: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        merged: dict[int, int] = {}
        for q, e in self.factors:
            q, e = int(q), int(e)
            if e < 0:
                raise DomainError(f"negative exponent {e} at {q}")
            if e == 0:
                continue
            if not is_prime(q):
                raise DomainError(f"{q} is not prime")
            merged[q] = merged.get(q, 0) + e
        object.__setattr__(self, "factors", tuple(sorted(merged.items())))

    @classmethod
    def of(cls, mapping: dict[int, int] | Iterable[tuple[int, int]]) -> "FactoredInteger":
        items = mapping.items() if isinstance(mapping, dict) else mapping
        return cls(tuple(items))

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self.factors)

    def __mul__(self, other: "FactoredInteger") -> "FactoredInteger":
        return FactoredInteger(self.factors + other.factors)

    def __str__(self) -> str:
        if not self.factors:
            return "1"
        return "*".join(f"{q}^{e}" if e > 1 else str(q) for q, e in self.factors)

    @classmethod
    def parse(cls, text: str) -> "FactoredInteger":
        """Inverse of ``str``: ``"2*3^4*23^10"``."""
        if text.strip() == "1":
            return cls()
        pairs = []
        for tok in text.split("*"):
            q, _, e = tok.partition("^")
            pairs.append((int(q), int(e) if e else 1))
        return cls(tuple(pairs))

    def primes(self) -> tuple[int, ...]:
        return tuple(q for q, _ in self.factors)

    def exponent(self, q: int) -> int:
        for r, e in self.factors:
            if r == q:
                return e
        return 0

    def is_unit(self) -> bool:
        return not self.factors

    def divides(self, other: "FactoredInteger") -> bool:
        return all(other.exponent(q) >= e for q, e in self.factors)

    def value(self) -> int:
        """Expand to a plain integer.  Only call on values known to be small."""
        out = 1
        for q, e in self.factors:
            out *= q**e
        return out

    def is_pth_power_free(self, p: int) -> bool:
        return all(e < p for _, e in self.factors)

    def to_json(self) -> list[list[int]]:
        return [[q, e] for q, e in self.factors]

    @classmethod
    def from_json(cls, data: list[list[int]]) -> "FactoredInteger":
        return cls(tuple((int(q), int(e)) for q, e in data))


UNIT = FactoredInteger()


def factorize(n: int) -> FactoredInteger:
    """Trial division; every integer factored by the pipeline is at most ~10^9."""
    if n < 1:
        raise DomainError(f"cannot factor {n}")
    out: list[tuple[int, int]] = []
    for q in (2, 3):
        e = 0
        while n % q == 0:
            n //= q
            e += 1
        if e:
            out.append((q, e))
    q = 5
    step = 2
    while q * q <= n:
        e = 0
        while n % q == 0:
            n //= q
            e += 1
        if e:
            out.append((q, e))
        q += step
        step = 6 - step
    if n > 1:
        out.append((n, 1))
    return FactoredInteger(tuple(out))


def mod_pow(base: int, exp: int, modulus: int) -> int:
    if modulus < 2:
        raise DomainError(f"modulus {modulus} < 2")
    if exp < 0:
        raise DomainError("negative exponent")
    return pow(base, exp, modulus)


def eval_mod(f: FactoredInteger, ell: int) -> int:
    """``f mod ell`` computed factor by factor; the integer is never expanded."""
    out = 1 % ell
    for q, e in f.factors:
        out = out * mod_pow(q, e, ell) % ell
    return out


def valuation(n: int, q: int) -> int:
    """Exponent of the prime ``q`` in the nonzero integer ``n``."""
    if n == 0:
        raise DomainError("valuation of 0")
    n = abs(n)
    e = 0
    while n % q == 0:
        n //= q
        e += 1
    return e


@lru_cache(maxsize=4096)
def primitive_root(ell: int) -> int:
    """Least generator of ``(Z/ell)^*``."""
    if not is_prime(ell):
        raise DomainError(f"{ell} is not prime")
    if ell == 2:
        return 1
    order = ell - 1
    cofactors = [order // q for q in factorize(order).primes()]
    for g in range(2, ell):
        if all(pow(g, c, ell) != 1 for c in cofactors):
            return g
    raise AssertionError("no primitive root found")  # unreachable for prime ell


def euler_phi(f: FactoredInteger) -> FactoredInteger:
    out = UNIT
    for q, e in f.factors:
        out = out * FactoredInteger(((q, e - 1),)) * factorize(q - 1)
    return out


def rad(f: FactoredInteger) -> FactoredInteger:
    return FactoredInteger(tuple((q, 1) for q in f.primes()))


def rad_odd(f: FactoredInteger) -> FactoredInteger:
    """Product of the odd primes dividing ``f``."""
    return FactoredInteger(tuple((q, 1) for q in f.primes() if q != 2))


def pth_power_free(n: int, p: int, support: Iterable[int]) -> FactoredInteger:
    """The ``p``-th-power-free part of ``n`` restricted to the primes in ``support``."""
    return FactoredInteger(tuple((q, valuation(n, q) % p) for q in support if n % q == 0))


def integer_root(n: int, k: int) -> int | None:
    """Exact ``k``-th root of ``n`` (odd ``k`` allows negative ``n``), else ``None``."""
    if n < 0:
        if k % 2 == 0:
            return None
        r = integer_root(-n, k)
        return None if r is None else -r
    root, exact = gmpy2.iroot(n, k)
    return int(root) if exact else None
