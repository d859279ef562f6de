"""Perfect powers among pyramidal numbers: sieve, modular method and reporting."""

from .arith import DomainError, FactoredInteger, factorize
from .bound import prime_bound
from .modular import DataError, NewformRecord
from .pyramidal import Solution, coefficients, pyr_eval, theorem1_table, verify_solution
from .triples import TripleABC, triples_for

__version__ = "0.1.0"

__all__ = [
    "DataError",
    "DomainError",
    "FactoredInteger",
    "NewformRecord",
    "Solution",
    "TripleABC",
    "coefficients",
    "factorize",
    "prime_bound",
    "pyr_eval",
    "theorem1_table",
    "triples_for",
    "verify_solution",
]
