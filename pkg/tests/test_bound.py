import math
from decimal import Decimal, getcontext

import pytest
import sympy

from pyrpower.arith import DomainError
from pyrpower.bound import prime_bound, primes_to_test
from pyrpower.pyramidal import coefficients


def decimal_bound(m):
    getcontext().prec = 50
    inst = coefficients(m)
    return int((10676 * Decimal(inst.c**2 * inst.b * (inst.a + inst.b)).ln()).to_integral_value(rounding="ROUND_FLOOR"))


def test_bound_values():
    assert prime_bound(6).bound == 55440
    assert prime_bound(50).bound == 80372


def test_bound_matches_decimal_oracle():
    for m in range(6, 51):
        assert prime_bound(m).bound == decimal_bound(m)
        assert abs(prime_bound(m).bound - 10676 * math.log(prime_bound(m).product)) < 1


def test_bound_domain():
    with pytest.raises(DomainError):
        prime_bound(5)


def test_primes_to_test():
    ps = primes_to_test(6)
    assert ps[0] == 3 and ps[-1] == 55439
    assert len(ps) == sympy.primepi(55440) - 1 == 5627
