"""Loading, validating and caching weight-2 newform eigenvalue data.

On-disk schema (fixtures and cache entries share it)::

    {"schema": 1, "level": N, "weight": 2, "source": "fixture" | "remote",
     "eigenvalue_bound": B, "count": n, "fetched_at": "...",
     "records": [{"label": "138.2.a.d", "level": 138, "weight": 2, "dim": 2,
                  "field_poly": ["-1", "-1", "1"],
                  "eigenvalues": {"2": ["1", "0"], "3": ["1", "0"], ...}}]}

Integers and rationals are strings so that exactness survives JSON.  Eigenvalue
coordinates are in the power basis of ``field_poly`` (constant term first).

Remote data comes from the LMFDB API (``/api/mf_newforms`` and
``/api/mf_hecke_nf``); the base URL is read from ``PYRPOWER_LMFDB_URL``.
"""
from __future__ import annotations

import json
import logging
import os
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from importlib import resources
from pathlib import Path

import httpx
import numpy as np
import sympy

from .arith import is_prime, primes_in
from .modular import DataError, NewformRecord, hasse_ok

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
DEFAULT_BASE_URL = "https://www.lmfdb.org"
BASE_URL_ENV = "PYRPOWER_LMFDB_URL"


class RetryableError(RuntimeError):
    """Transient failure talking to the remote source."""


@dataclass(frozen=True)
class NewformQuery:
    level: int
    weight: int = 2
    eigenvalue_bound: int = 200


@dataclass
class CacheEntry:
    query: NewformQuery
    fetched_at: str
    records: list[NewformRecord]
    source: str  # remote | fixture


# --------------------------------------------------------------------------
# (de)serialisation

def record_to_json(r: NewformRecord) -> dict:
    out = {
        "label": r.label,
        "level": r.level,
        "weight": r.weight,
        "dim": r.dim,
        "field_poly": [str(c) for c in r.field_poly],
        "eigenvalues": {str(q): [str(c) for c in v] for q, v in sorted(r.eigenvalues.items())},
    }
    if r.traces:
        out["traces"] = list(r.traces)
    return out


def record_from_json(d: dict, where: str = "record") -> NewformRecord:
    try:
        eig = {int(q): tuple(Fraction(c) for c in v) for q, v in d["eigenvalues"].items()}
        return NewformRecord(
            label=str(d["label"]),
            level=int(d["level"]),
            weight=int(d["weight"]),
            dim=int(d["dim"]),
            field_poly=tuple(int(c) for c in d["field_poly"]),
            eigenvalues=eig,
            traces=tuple(int(t) for t in d.get("traces", ())),
        )
    except KeyError as exc:
        raise DataError(f"{where}: missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise DataError(f"{where}: malformed value ({exc})") from None


def validate_record(r: NewformRecord) -> tuple[bool, list[str]]:
    """Consistency checks; returns ``(ok, diagnostics)``."""
    problems = []
    parts = r.label.split(".")
    if len(parts) != 4 or parts[0] != str(r.level) or parts[1] != str(r.weight) or parts[2] != "a":
        problems.append(f"label {r.label} does not match level {r.level}, weight {r.weight}, trivial character")
    if r.weight != 2:
        problems.append(f"weight {r.weight} != 2")
    if len(r.field_poly) != r.dim + 1 or r.field_poly[-1] != 1:
        problems.append(f"field polynomial {r.field_poly} is not monic of degree {r.dim}")
    elif r.dim > 1:
        y = sympy.Symbol("y")
        if not sympy.Poly(list(reversed(r.field_poly)), y, domain="QQ").is_irreducible:
            problems.append(f"field polynomial {r.field_poly} is reducible")
    for q, coords in r.eigenvalues.items():
        if len(coords) != r.dim:
            problems.append(f"a_{q} has {len(coords)} coordinates, expected {r.dim}")
        if not is_prime(q):
            problems.append(f"eigenvalue index {q} is not prime")
    if not problems:
        problems.extend(hasse_ok(r))
    return not problems, problems


def _check_records(records: list[NewformRecord], where: str) -> None:
    for r in records:
        ok, diag = validate_record(r)
        if not ok:
            raise DataError(f"{where}: {r.label}: " + "; ".join(diag[:3]))


def load_fixture(path: str | os.PathLike) -> list[NewformRecord]:
    path = Path(path)
    text = path.read_text()
    if not text.strip():
        raise DataError(f"{path}: empty file")
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(payload, dict) or "records" not in payload:
        raise DataError(f"{path}: missing field 'records'")
    if payload.get("schema", SCHEMA_VERSION) != SCHEMA_VERSION:
        raise DataError(f"{path}: unsupported schema {payload.get('schema')}")
    records = [record_from_json(d, f"{path}: records[{i}]") for i, d in enumerate(payload["records"])]
    if "count" in payload and payload["count"] != len(records):
        raise DataError(f"{path}: count {payload['count']} != {len(records)} records")
    _check_records(records, str(path))
    return records


def dump_entry(entry: CacheEntry, path: Path) -> None:
    """Atomic write: temp file in the same directory, then ``os.replace``."""
    payload = {
        "schema": SCHEMA_VERSION,
        "level": entry.query.level,
        "weight": entry.query.weight,
        "source": entry.source,
        "eigenvalue_bound": entry.query.eigenvalue_bound,
        "fetched_at": entry.fetched_at,
        "count": len(entry.records),
        "records": [record_to_json(r) for r in entry.records],
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(payload, fh, separators=(",", ":"))
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def bundled_fixture_dir() -> Path:
    return Path(str(resources.files("pyrpower") / "data" / "newforms"))


# --------------------------------------------------------------------------
# LMFDB client

def _get(client: httpx.Client, url: str, params: dict) -> dict:
    try:
        resp = client.get(url, params=params)
    except httpx.TransportError as exc:
        raise RetryableError(f"GET {url}: {exc}") from exc
    if resp.status_code >= 500 or resp.status_code == 429:
        raise RetryableError(f"GET {url}: HTTP {resp.status_code}")
    if resp.status_code != 200:
        raise DataError(f"GET {url}: HTTP {resp.status_code}")
    try:
        return resp.json()
    except ValueError:
        raise DataError(f"GET {url}: response is not JSON") from None


def _field(d: dict, name: str, where: str):
    if name not in d:
        raise DataError(f"{where}: missing field {name!r}")
    return d[name]


def _power_basis(ap: list, numerators: list, denominators: list) -> tuple[Fraction, ...]:
    """Convert Hecke-ring coordinates to power-basis coordinates."""
    dim = len(numerators)
    out = [Fraction(0)] * dim
    for c, num, den in zip(ap, numerators, denominators):
        for j, n in enumerate(num):
            out[j] += Fraction(c) * Fraction(n) / Fraction(den)
    return tuple(out)


def _trace(field_poly: tuple[int, ...], coords: tuple[Fraction, ...]) -> float:
    roots = np.roots([float(c) for c in reversed(field_poly)])
    return float(sum(sum(float(c) * r**j for j, c in enumerate(coords)) for r in roots).real)


def fetch_newforms_by_level(
    level: int,
    eigenvalue_bound: int = 200,
    *,
    client: httpx.Client | None = None,
    base_url: str | None = None,
) -> list[NewformRecord]:
    """All weight-2 trivial-character newforms at ``level`` with ``a_q`` for ``q <= eigenvalue_bound``."""
    base = (base_url or os.environ.get(BASE_URL_ENV) or DEFAULT_BASE_URL).rstrip("/")
    own = client is None
    client = client or httpx.Client(timeout=60.0)
    try:
        space = _get(client, f"{base}/api/mf_newspaces/", {
            "label": f"{level}.2.a", "_format": "json", "_fields": "label,num_forms"})
        spaces = _field(space, "data", "mf_newspaces")
        expected = int(_field(spaces[0], "num_forms", "mf_newspaces")) if spaces else 0

        rows: list[dict] = []
        offset = 0
        while True:
            page = _get(client, f"{base}/api/mf_newforms/", {
                "level": level, "weight": 2, "char_order": 1, "_format": "json",
                "_fields": "label,level,weight,dim,field_poly,traces", "_offset": offset})
            data = _field(page, "data", "mf_newforms")
            rows.extend(data)
            if not page.get("next") or not data:
                break
            offset += len(data)
        if len(rows) != expected:
            raise DataError(f"level {level}: {len(rows)} newforms returned, newspace reports {expected}")

        qs = primes_in(2, eigenvalue_bound)
        records = []
        for row in sorted(rows, key=lambda r: r["label"]):
            where = f"mf_newforms[{row.get('label')}]"
            label = _field(row, "label", where)
            dim = int(_field(row, "dim", where))
            traces = [int(t) for t in _field(row, "traces", where)]
            if dim == 1:
                if len(traces) < eigenvalue_bound:
                    raise DataError(f"{label}: traces stop at n = {len(traces)} < {eigenvalue_bound}")
                poly = (0, 1)
                eig = {q: (Fraction(traces[q - 1]),) for q in qs}
            else:
                nf = _get(client, f"{base}/api/mf_hecke_nf/", {
                    "label": label, "_format": "json",
                    "_fields": "label,field_poly,hecke_ring_numerators,hecke_ring_denominators,ap,maxp"})
                entries = _field(nf, "data", "mf_hecke_nf")
                if not entries:
                    raise DataError(f"{label}: no mf_hecke_nf entry")
                e = entries[0]
                w = f"mf_hecke_nf[{label}]"
                poly = tuple(int(c) for c in _field(e, "field_poly", w))
                nums = _field(e, "hecke_ring_numerators", w)
                dens = _field(e, "hecke_ring_denominators", w)
                ap = _field(e, "ap", w)
                if int(_field(e, "maxp", w)) < eigenvalue_bound or len(ap) < len(qs):
                    raise DataError(f"{label}: eigenvalues stop before q = {eigenvalue_bound}")
                eig = {}
                for q, vec in zip(qs, ap):
                    coords = _power_basis(vec, nums, dens)
                    # the basis conversion is checked against the independent trace form
                    if q <= len(traces) and abs(_trace(poly, coords) - traces[q - 1]) > 1e-6:
                        raise DataError(f"{label}: a_{q} disagrees with the trace form after basis change")
                    eig[q] = coords
            records.append(NewformRecord(label, int(row["level"]), int(row["weight"]), dim, poly, eig,
                                         tuple(traces[:100])))
        _check_records(records, f"LMFDB level {level}")
        return records
    finally:
        if own:
            client.close()


# --------------------------------------------------------------------------
# store

@dataclass
class NewformStore:
    """Serves newforms by level: cache, then bundled/explicit fixtures, then (opt-in) the LMFDB."""

    fixture_dirs: list[Path] = field(default_factory=lambda: [bundled_fixture_dir()])
    cache_dir: Path | None = None
    online: bool = False
    eigenvalue_bound: int = 200
    client: httpx.Client | None = None
    _memo: dict[int, list[NewformRecord]] = field(default_factory=dict, repr=False)

    def _cache_path(self, level: int) -> Path | None:
        return None if self.cache_dir is None else Path(self.cache_dir) / f"level-{level}.json"

    def newforms(self, level: int, eigenvalue_bound: int | None = None) -> list[NewformRecord]:
        """Records at ``level``; online mode refetches when local data stop below ``eigenvalue_bound``."""
        bound = max(self.eigenvalue_bound, eigenvalue_bound or 0)
        hit = self._memo.get(level)
        if hit is not None and (not self.online or _reaches(hit, bound)):
            return hit
        records = self._load(level, bound)
        self._memo[level] = records
        return records

    def _load(self, level: int, bound: int) -> list[NewformRecord]:
        cached = self._cache_path(level)
        if cached is not None and cached.exists():
            records = load_fixture(cached)
            if not self.online or _reaches(records, bound):
                return records
        for d in self.fixture_dirs:
            path = Path(d) / f"level-{level}.json"
            if path.exists():
                records = load_fixture(path)
                if not self.online or _reaches(records, bound):
                    return records
        if not self.online:
            raise DataError(f"no newform data for level {level} (fixtures: {[str(d) for d in self.fixture_dirs]})")
        records = fetch_newforms_by_level(level, bound, client=self.client)
        if cached is not None:
            entry = CacheEntry(NewformQuery(level, 2, bound),
                               datetime.now(timezone.utc).isoformat(timespec="seconds"), records, "remote")
            dump_entry(entry, cached)
        return records


def _reaches(records: list[NewformRecord], bound: int) -> bool:
    top = bound
    while top > 2 and not is_prime(top):
        top -= 1
    return all(r.eigenvalue_bound >= top for r in records)
