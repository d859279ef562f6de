"""Command line entry point: ``pyrpower run ...``.

Exit status is 0 iff the report has no ``open`` or ``data-error`` record.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from .arith import DomainError
from .pipeline import RunConfig, emit_report, export_residuals, run, summarize

log = logging.getLogger("pyrpower")

DEFAULTS = {
    "m": "6,26",
    "p": "7,11",
    "kmax": 150,
    "qbound": 200,
    "height": 1000,
    "newforms": None,
    "cache": None,
    "out": "report.jsonl",
    "residuals": None,
    "parallel": 1,
    "full": False,
    "online": False,
    "timing": False,
}


def parse_range(text: str) -> tuple[int, ...]:
    """``"6..50"``, ``"6,26"`` or a mix such as ``"6,10..12"``."""
    out: list[int] = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return tuple(sorted(set(out)))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pyrpower", description="Perfect powers among pyramidal numbers")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run the elimination pipeline and write a report")
    r.add_argument("--config", type=Path, help="JSON file with the same keys as the flags")
    r.add_argument("--m", help="m values, e.g. 6..50 or 6,26 (default 6,26)")
    r.add_argument("--p", help="'auto' (all primes up to the bound) or a list such as 7,11,13")
    r.add_argument("--kmax", type=int, help="largest k in ell = 2kp + 1 (default 150)")
    r.add_argument("--qbound", type=int, help="prime bound for the reducibility check (default 200)")
    r.add_argument("--height", type=int, help="|y1| bound for the small-solution search (default 1000)")
    r.add_argument("--newforms", help="extra directory of level-N.json newform fixtures")
    r.add_argument("--cache", help="cache directory for fetched newform data")
    r.add_argument("--out", help="report path (default report.jsonl)")
    r.add_argument("--residuals", help="write THUE lines for needs-external-solver records here")
    r.add_argument("--parallel", type=int, help="worker processes (default 1)")
    r.add_argument("--full", action="store_true", default=None, help="all m in 6..50 and all p up to the bound")
    r.add_argument("--online", action="store_true", default=None, help="allow fetching newforms from the LMFDB")
    r.add_argument("--timing", action="store_true", default=None, help="include per-record milliseconds")
    return ap


def resolve(args: argparse.Namespace) -> dict:
    opts = dict(DEFAULTS)
    if args.config is not None:
        loaded = json.loads(args.config.read_text())
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise DomainError(f"unknown config keys: {sorted(unknown)}")
        opts.update(loaded)
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            opts[key] = val
    return opts


def config_from(opts: dict) -> RunConfig:
    if opts["full"]:
        m_values, p_policy = tuple(range(6, 51)), "auto"
    else:
        m_values = parse_range(opts["m"]) if isinstance(opts["m"], str) else tuple(opts["m"])
        if str(opts["p"]).strip() == "auto":
            raise DomainError("--p auto covers tens of thousands of primes per m; pass --full to request it")
        p_policy = parse_range(opts["p"]) if isinstance(opts["p"], str) else tuple(opts["p"])
    return RunConfig(
        m_values=m_values,
        p_policy=p_policy,
        kmax=int(opts["kmax"]),
        q_bound=int(opts["qbound"]),
        height=int(opts["height"]),
        fixture_dirs=(opts["newforms"],) if opts["newforms"] else (),
        cache_dir=opts["cache"],
        online=bool(opts["online"]),
        parallel=int(opts["parallel"]),
        out=opts["out"],
    )


def cmd_run(opts: dict) -> int:
    cfg = config_from(opts)
    t0 = time.perf_counter()
    records = list(run(cfg))
    emit_report(records, cfg.out, timing=bool(opts["timing"]))
    if opts["residuals"]:
        export_residuals(records, opts["residuals"])
    counts = summarize(records)
    print(f"{len(records)} records in {time.perf_counter() - t0:.1f}s -> {cfg.out}")
    for status, n in counts.items():
        print(f"  {status:24s} {n}")
    return 1 if counts.get("open") or counts.get("data-error") else 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return cmd_run(resolve(args))
    except (DomainError, ValueError, OSError) as exc:
        print(f"pyrpower: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
