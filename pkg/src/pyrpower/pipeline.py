"""End-to-end elimination over ``(m, p, triple)`` and the JSON-lines report.

Per triple the order is fixed: local sieve, survivor classification, then
case I (Darmon-Merel), the hand-off table, the ``phi(D)`` prime filter, the
Gyory-Pink rule and finally the modular method; unclassified survivors get a
bounded search for small solutions.  Work units are ``(m, p)`` pairs.
"""
from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .arith import DomainError, FactoredInteger, UNIT, integer_root, is_prime
from .bound import THM_D_LIMIT, primes_to_test
from .modular import (
    DataError,
    NewformVerdict,
    d_value,
    eliminate_newform,
    frey_levels,
    gp_rule_applies,
    reducibility_check,
    thmD_prime_filter,
)
from .newforms import NewformStore, bundled_fixture_dir
from .pyramidal import pyr_eval
from .sieve import (
    DEFAULT_KMAX,
    SurvivorClass,
    ThueSystem,
    classify_survivor,
    count_solutions_mod,
    darmon_merel_rule,
    find_eliminating_prime,
    search_small_solutions,
    thue_line,
)
from .triples import TripleABC, triples_for

log = logging.getLogger(__name__)

REPORT_HEADER = "# pyrpower report v1"

CLOSED = frozenset({
    "eliminated-local",
    "global-solution",
    "case-I-closed",
    "gp-rule-closed",
    "thmD-closed",
    "eliminated-modular",
    "reducible-closed",
})
STATUSES = CLOSED | {"needs-external-solver", "open", "data-error"}

# Survivors that are finished by solving the Thue system directly.
HANDOFF: dict[tuple[int, int, FactoredInteger, FactoredInteger], str] = {
    (21, 7, FactoredInteger.of({2: 4, 3: 1}), UNIT): "survives the sieve; hand the Thue system to an external solver",
}


@dataclass(frozen=True)
class RunConfig:
    m_values: tuple[int, ...] = (6, 26)
    p_policy: str | tuple[int, ...] = (7, 11)  # "auto" or explicit primes
    kmax: int = DEFAULT_KMAX
    q_bound: int = 200
    height: int = 1000
    fixture_dirs: tuple[str, ...] = ()
    cache_dir: str | None = None
    online: bool = False
    parallel: int = 1
    out: str | None = None

    def __post_init__(self) -> None:
        if min(self.kmax, self.q_bound, self.height, self.parallel) < 1:
            raise DomainError("kmax, q_bound, height and parallel must be positive")
        if not self.m_values:
            raise DomainError("empty m range")
        if self.p_policy == "auto":
            if not all(6 <= m <= 50 for m in self.m_values):
                raise DomainError("p auto needs 6 <= m <= 50")
        else:
            bad = [p for p in self.p_policy if p < 3 or not is_prime(p)]
            if bad:
                raise DomainError(f"not odd primes: {bad}")
        bad_m = [m for m in self.m_values if not 6 <= m <= 50]
        if bad_m:
            raise DomainError(f"m outside [6, 50]: {bad_m}")

    def primes_for(self, m: int) -> list[int]:
        if self.p_policy == "auto":
            return primes_to_test(m)
        return sorted(set(self.p_policy))

    def units(self) -> list[tuple[int, int]]:
        return [(m, p) for m in sorted(set(self.m_values)) for p in self.primes_for(m)]

    def store(self) -> NewformStore:
        dirs = [Path(d) for d in self.fixture_dirs] + [bundled_fixture_dir()]
        return NewformStore(
            fixture_dirs=dirs,
            cache_dir=Path(self.cache_dir) if self.cache_dir else None,
            online=self.online,
            eigenvalue_bound=self.q_bound,
        )


@dataclass(frozen=True)
class EliminationRecord:
    m: int
    p: int
    triple: TripleABC
    status: str
    detail: dict = field(default_factory=dict, compare=False)
    ms: float = field(default=0.0, compare=False)

    def __post_init__(self) -> None:
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status}")

    @property
    def sort_key(self) -> tuple:
        return (self.m, self.p, self.triple.key)

    @property
    def closed(self) -> bool:
        return self.status in CLOSED

    def system(self) -> ThueSystem:
        return ThueSystem.of(self.m, self.p, self.triple)

    def to_json(self, timing: bool = False) -> dict:
        out = {
            "m": self.m,
            "p": self.p,
            "A": str(self.triple.A),
            "B": str(self.triple.B),
            "C": str(self.triple.C),
            "status": self.status,
            "detail": self.detail,
        }
        if timing:
            out["ms"] = round(self.ms, 3)
        return out

    @classmethod
    def from_json(cls, d: dict) -> "EliminationRecord":
        triple = TripleABC(*(FactoredInteger.parse(d[k]) for k in "ABC"))
        return cls(int(d["m"]), int(d["p"]), triple, d["status"], d.get("detail", {}), float(d.get("ms", 0.0)))


# --------------------------------------------------------------------------
# one triple

def _genuine(m: int, p: int, x: int) -> int | None:
    """``y > 1`` with ``Pyr_m(x) = y^p``, if any."""
    if x < 2:
        return None
    y = integer_root(pyr_eval(m, x), p)
    return y if y is not None and y > 1 else None


def _global_from(system: ThueSystem, hits: Iterable[tuple[int, int, int]]) -> dict | None:
    m, p = system.instance.m, system.p
    A = system.A.value()
    for y1, _, _ in hits:
        x = A * y1**p
        y = _genuine(m, p, x)
        if y is not None:
            return {"x": x, "y": y}
    return None


def _small_z2(system: ThueSystem, cls: SurvivorClass) -> dict | None:
    """Solutions with ``z2 = +-1`` in ``z1^p - D z2^p = 1``; the prime filter only excludes ``|z2| > 1``."""
    inst, p = system.instance, system.p
    A, B, C = system.A.value(), system.B.value(), system.C.value()
    for s in (1, -1):
        x = B * s - 1 if cls.tag == "case-II" else A * s
        if x % A or integer_root(x // A, p) is None:
            continue
        if (x + 1) % B or integer_root((x + 1) // B, p) is None:
            continue
        w = inst.a * x - inst.b
        if w % C or integer_root(w // C, p) is None:
            continue
        y = _genuine(inst.m, p, x)
        if y is not None:
            return {"x": x, "y": y}
    return None


def _modular(system: ThueSystem, cls: SurvivorClass, D: FactoredInteger, cfg: RunConfig,
             store: NewformStore) -> tuple[str, dict]:
    p = system.p
    levels = frey_levels(D)
    detail: dict = {"D": str(D), "levels": list(levels), "newforms": []}
    need = max(cfg.q_bound, 2 * cfg.kmax * p + 1)
    verdicts: list[NewformVerdict] = []
    for level in levels:
        try:
            forms = store.newforms(level, need)
        except DataError as exc:
            detail["error"] = str(exc)
            return "data-error", detail
        for f in forms:
            try:
                v = eliminate_newform(system, cls, f, cfg.kmax)
                if v.kind == "suspect-reducible" and p >= 11 and reducibility_check(f, p, D, cfg.q_bound):
                    v = NewformVerdict(f.label, f.level, "reducible", q_bound=cfg.q_bound)
            except DataError as exc:
                v = NewformVerdict(f.label, f.level, "data-error", detail=str(exc))
            verdicts.append(v)
    detail["newforms"] = [v.to_json() for v in verdicts]
    kinds = {v.kind for v in verdicts}
    if "data-error" in kinds:
        return "data-error", detail
    if "suspect-reducible" in kinds:
        return "open", detail
    return ("reducible-closed" if "reducible" in kinds else "eliminated-modular"), detail


def process_triple(m: int, p: int, triple: TripleABC, cfg: RunConfig, store: NewformStore) -> EliminationRecord:
    t0 = time.perf_counter()
    status, detail = _decide(ThueSystem.of(m, p, triple), cfg, store)
    return EliminationRecord(m, p, triple, status, detail, (time.perf_counter() - t0) * 1e3)


def _decide(system: ThueSystem, cfg: RunConfig, store: NewformStore) -> tuple[str, dict]:
    m, p, triple = system.instance.m, system.p, system.triple
    w = find_eliminating_prime(system, cfg.kmax)
    if w is not None:
        assert count_solutions_mod(system, w.ell).count == 0, (m, p, str(triple), w.ell)
        return "eliminated-local", {"ell": w.ell, "k": w.k}

    cls = classify_survivor(system)
    if cls.tag == "case-I":
        return "case-I-closed", darmon_merel_rule(system)

    if cls.tag in ("case-II", "case-III"):
        D = d_value(triple, cls)
        base = {"case": cls.tag, "D": str(D)}
        note = HANDOFF.get((m, p, triple.A, triple.B))
        if note is not None:
            return "needs-external-solver", {**base, "reason": note}
        filt = thmD_prime_filter(D)
        if filt.closes(p) and p < THM_D_LIMIT:
            sol = _small_z2(system, cls)
            if sol is not None:
                return "global-solution", sol
            out = {**base, "phi_odd_primes": list(filt)}
            if filt.note:
                out["note"] = filt.note
            return "thmD-closed", out
        if gp_rule_applies(D, p):
            return "gp-rule-closed", {**base, "primes": list(D.primes())}
        if p >= 7 and D.exponent(2) == 1:
            return _modular(system, cls, D, cfg, store)
        reason = "p <= 5" if p <= 5 else f"ord_2(D) = {D.exponent(2)} != 1"
        return "needs-external-solver", {**base, "reason": reason}

    hits = search_small_solutions(system, cfg.height)
    sol = _global_from(system, hits)
    if sol is not None:
        return "global-solution", sol
    detail = {"case": cls.tag, "height": cfg.height}
    if p <= 7:
        return "needs-external-solver", detail
    return "open", detail


# --------------------------------------------------------------------------
# fan-out

_STORE: dict[RunConfig, NewformStore] = {}


def _store_for(cfg: RunConfig) -> NewformStore:
    if cfg not in _STORE:
        _STORE[cfg] = cfg.store()
    return _STORE[cfg]


def process_unit(cfg: RunConfig, m: int, p: int) -> list[EliminationRecord]:
    store = _store_for(cfg)
    return [process_triple(m, p, t, cfg, store) for t in triples_for(m, p)]


def _unit_star(args: tuple[RunConfig, int, int]) -> list[EliminationRecord]:
    return process_unit(*args)


def run(cfg: RunConfig) -> Iterator[EliminationRecord]:
    """All records, ordered by ``(m, p, triple)`` whatever the parallelism."""
    units = cfg.units()
    jobs = [(cfg, m, p) for m, p in units]
    if cfg.parallel == 1 or len(jobs) < 2:
        batches: Iterable[list[EliminationRecord]] = map(_unit_star, jobs)
        for batch in batches:
            yield from sorted(batch, key=lambda r: r.sort_key)
        return
    with ProcessPoolExecutor(max_workers=cfg.parallel) as pool:
        # map preserves submission order; units are already sorted
        for batch in pool.map(_unit_star, jobs, chunksize=max(1, len(jobs) // (8 * cfg.parallel))):
            yield from sorted(batch, key=lambda r: r.sort_key)


# --------------------------------------------------------------------------
# output

def emit_report(records: Iterable[EliminationRecord], path: str | Path, timing: bool = False) -> int:
    """JSON lines after a header comment; sorted so the file does not depend on execution order."""
    rows = sorted(records, key=lambda r: r.sort_key)
    with open(path, "w") as fh:
        fh.write(REPORT_HEADER + "\n")
        for r in rows:
            fh.write(json.dumps(r.to_json(timing), sort_keys=True, separators=(",", ":")) + "\n")
    return len(rows)


def parse_report(path: str | Path) -> list[EliminationRecord]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != REPORT_HEADER:
        raise ValueError(f"{path}: missing header {REPORT_HEADER!r}")
    return [EliminationRecord.from_json(json.loads(s)) for s in lines[1:] if s.strip()]


def export_residuals(records: Iterable[EliminationRecord], path: str | Path) -> int:
    """One ``THUE`` line per needs-external-solver record."""
    rows = sorted((r for r in records if r.status == "needs-external-solver"), key=lambda r: r.sort_key)
    with open(path, "w") as fh:
        for r in rows:
            fh.write(thue_line(r.system()) + "\n")
    return len(rows)


def summarize(records: Sequence[EliminationRecord]) -> dict[str, int]:
    out: dict[str, int] = {}
    for r in records:
        out[r.status] = out.get(r.status, 0) + 1
    return dict(sorted(out.items()))
