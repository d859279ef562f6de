"""Upper bound on the prime exponent from linear forms in logarithms."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import mpmath

from .arith import DomainError, primes_in
from .pyramidal import coefficients

BOUND_CONSTANT = 10676
# Largest exponent for which the Bartolome-Mihailescu dichotomy is informative.
THM_D_LIMIT = 163 * 10**12


@dataclass(frozen=True)
class BoundResult:
    m: int
    product: int  # c_m^2 * b_m * (a_m + b_m)
    bound: int


def _floor_bound(product: int, dps: int) -> int:
    with mpmath.workdps(dps):
        return int(mpmath.floor(BOUND_CONSTANT * mpmath.log(product)))


@lru_cache(maxsize=None)
def prime_bound(m: int) -> BoundResult:
    """``floor(10676 * log(c^2 b (a + b)))``, agreed at 30 and 60 digits."""
    if not 6 <= m <= 50:
        raise DomainError(f"m = {m} outside [6, 50]")
    inst = coefficients(m)
    product = inst.c**2 * inst.b * (inst.a + inst.b)
    lo, hi = _floor_bound(product, 30), _floor_bound(product, 60)
    if lo != hi:
        raise ArithmeticError(f"floor of the bound is precision-sensitive at m = {m}")
    return BoundResult(m, product, hi)


def primes_to_test(m: int) -> list[int]:
    return primes_in(3, prime_bound(m).bound)
