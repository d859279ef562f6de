import random

import pytest
from hypothesis import given, settings, strategies as st

from pyrpower.arith import DomainError, FactoredInteger
from pyrpower.sieve import (
    ThueSystem,
    candidate_primes,
    classify_survivor,
    count_solutions_mod,
    darmon_merel_rule,
    find_eliminating_prime,
    mu_set,
    search_small_solutions,
    thue_line,
)
from pyrpower.triples import TripleABC, triples_for

from sysgen import brute_count, fac, planted, random_system


def T(A, B, C):
    return TripleABC(fac(A), fac(B), fac(C))


def test_mu_set_examples():
    assert mu_set(23, 11) == {1, 22}
    assert mu_set(29, 7) == {1, 12, 17, 28}
    with pytest.raises(DomainError):
        mu_set(31, 7)


def test_mu_set_matches_power_image():
    for p in (3, 5, 7, 11, 13):
        for k, ell in candidate_primes(p, 40):
            mu = mu_set(ell, p)
            assert len(mu) == 2 * k
            assert mu == {pow(y, p, ell) for y in range(1, ell)}


def test_known_solution_never_eliminated():
    s = ThueSystem.of(26, 3, T(2, 3, 9))
    for k, ell in candidate_primes(3, 150):
        if s.admissible(ell):
            assert count_solutions_mod(s, ell).count >= 1
    assert find_eliminating_prime(s) is None


def test_count_against_brute_force_m26():
    s = ThueSystem.of(26, 7, triples_for(26, 7)[1])
    n = 0
    for k, ell in candidate_primes(7, 20):
        if s.admissible(ell):
            assert count_solutions_mod(s, ell).count == brute_count(s, ell)
            n += 1
    assert n >= 5


def test_eliminating_prime_regression():
    s = ThueSystem.of(6, 11, T(2, 3, 1))
    w = find_eliminating_prime(s)
    assert (w.ell, w.k, w.count) == (23, 1, 0)
    assert count_solutions_mod(s, 23).count == 0
    assert find_eliminating_prime(s, kmax=0) is None


def test_admissibility_guard():
    s = ThueSystem.of(6, 11, T(2, 3, 1))
    assert not s.admissible(3) and s.admissible(23)
    bad = ThueSystem.of(26, 3, T(2 * 7, 1, 7**2))
    with pytest.raises(DomainError):
        count_solutions_mod(bad, 7)


@given(st.integers(0, 2**32))
@settings(max_examples=150, deadline=None)
def test_planted_solutions_survive(seed):
    system, sol = planted(random.Random(seed))
    assert find_eliminating_prime(system, 150) is None
    y1, y2, y3 = sol
    for k, ell in candidate_primes(system.p, 30):
        if system.admissible(ell):
            w = count_solutions_mod(system, ell)
            assert tuple(pow(y, system.p, ell) for y in sol) in w.solutions


@given(st.integers(0, 2**32))
@settings(max_examples=40, deadline=None)
def test_count_matches_brute_force(seed):
    system = random_system(random.Random(seed))
    for k, ell in candidate_primes(system.p, 500):
        if ell > 500:
            break
        if system.admissible(ell):
            assert count_solutions_mod(system, ell).count == brute_count(system, ell)


def test_classify_survivor():
    assert classify_survivor(ThueSystem.of(7, 11, T(1, 2, 3))).tag == "case-I"
    # m = 15: a + b = 23, b = 10
    assert classify_survivor(ThueSystem.of(15, 11, TripleABC(fac(1), FactoredInteger.of({2: 1, 3: 1, 23: 10}), fac(23)))).tag == "case-II"
    assert classify_survivor(ThueSystem.of(15, 11, T(6, 1, 10))).tag == "case-III"
    assert classify_survivor(ThueSystem.of(15, 11, T(2, 3, 1))).tag == "unclassified"


def test_darmon_merel_rule():
    out = darmon_merel_rule(ThueSystem.of(7, 11, T(1, 2, 3)))
    assert "x = 1" in out["conclusion"]
    assert darmon_merel_rule(ThueSystem.of(6, 5, T(1, 2, 3)))["rule"] == "darmon-merel"
    with pytest.raises(DomainError):
        darmon_merel_rule(ThueSystem.of(6, 5, T(2, 3, 1)))


def test_search_small_solutions():
    assert (1, 1, 1) in search_small_solutions(ThueSystem.of(26, 3, T(2, 3, 9)), 10)
    assert (1, 2, 1) in search_small_solutions(ThueSystem.of(50, 3, T(15, 2, 225)), 10)
    assert search_small_solutions(ThueSystem.of(26, 3, T(2, 3, 9)), 0) == []


def test_search_finds_planted():
    rng = random.Random(7)
    for _ in range(50):
        system, sol = planted(rng)
        assert sol in search_small_solutions(system, 5)


def test_thue_line_format():
    line = thue_line(ThueSystem.of(21, 7, TripleABC(FactoredInteger.of({2: 4, 3: 1}), FactoredInteger(), FactoredInteger.of({2: 4}))))
    assert line == "THUE 21 7 2^4*3 1 2^4 (1)*y2^7-(2^4*3)*y1^7=1|19*(2^4*3)*y1^7-(2^4)*y3^7=16"
