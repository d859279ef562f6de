"""Pyramidal numbers and the coefficient triple ``(a_m, b_m, c_m)``."""
from __future__ import annotations

from dataclasses import dataclass

from .arith import DomainError


@dataclass(frozen=True)
class PyramidalInstance:
    """``x(x+1)(a x - b) = c * Pyr_m(x)`` with ``c`` in ``{2, 6}``."""

    m: int
    a: int
    b: int
    c: int


@dataclass(frozen=True)
class Solution:
    m: int
    x: int
    y: int
    n: int


def pyr_eval(m: int, x: int) -> int:
    if m < 3 or x < 1:
        raise DomainError(f"Pyr_{m}({x}) is outside m >= 3, x >= 1")
    num = x * (x + 1) * ((m - 2) * x + 5 - m)
    q, r = divmod(num, 6)
    assert r == 0, (m, x)
    return q


def coefficients(m: int) -> PyramidalInstance:
    if not 5 <= m <= 50:
        raise DomainError(f"m = {m} outside [5, 50]")
    if m % 3 == 2:
        return PyramidalInstance(m, (m - 2) // 3, (m - 5) // 3, 2)
    return PyramidalInstance(m, m - 2, m - 5, 6)


def verify_solution(s: Solution) -> bool:
    if s.y <= 1 or s.n < 1 or s.x < 1 or s.m < 3:
        return False
    return pyr_eval(s.m, s.x) == s.y**s.n


_THEOREM1 = (
    (5, 57121, 3107, 4),
    (7, 2, 2, 3),
    (15, 2, 2, 4),
    (17, 8, 6, 4),
    (26, 2, 3, 3),
    (31, 2, 2, 5),
    (50, 15, 30, 3),
)


def theorem1_table() -> list[Solution]:
    """Every solution of ``Pyr_m(x) = y^n`` with ``y > 1``, ``3 <= m <= 50``, ``n >= 3``."""
    return [Solution(*t) for t in _THEOREM1]


# n = 4 reduces to the square case and m = 5 to Ljunggren's equation and a
# consecutive-powers result; both are closed by citation, not computation.
CLOSED_BRANCHES = {
    "n=4": "reduces to Pyr_m(x) = (y^2)^2; solutions (15,2,2,4), (17,8,6,4) from the n = 2 tables",
    "m=5": "reduces to y1^2 + 1 = 2 y2^4 (Ljunggren); only (57121, 3107, 4)",
}
