"""Generate bundled newform fixtures offline with PARI/GP (via ``cypari``).

The LMFDB is the reference source for these records; this script rebuilds the
same spaces locally so the test-suite never needs the network.  Labels follow
the LMFDB convention: within a level, Hecke orbits are ordered by dimension and
then by the trace form (Tr a_1, Tr a_2, ...) lexicographically.

Coefficient fields are reduced with ``polredabs`` and eigenvalues are written
as rational coordinates in the power basis of that polynomial.

usage: python tools/make_newform_fixtures.py OUTDIR LEVEL [LEVEL ...] [--qmax N]
"""
import argparse
import json
import time
from fractions import Fraction
from pathlib import Path

from cypari import pari

TRACE_TERMS = 1000


def newforms_at(level, qmax):
    mf = pari.mfinit([level, 2], 0)
    forms = []
    for f in pari.mfeigenbasis(mf):
        params = pari.mfparams(f)
        field = params[3]
        degree = int(pari.poldegree(field))
        coefs = pari.mfcoefs(f, max(qmax, TRACE_TERMS))
        traces = [_trace(c) for c in coefs[1:TRACE_TERMS + 1]]
        if degree == 1:
            field_red = pari("y")
            shift = None
        else:
            red = pari.polredabs(field, 1)
            field_red = red[0]
            shift = pari.lift(red[1])
        field_red = pari.subst(field_red, pari.variable(field_red), "y")
        eig = {}
        for q in pari.primes([2, qmax]):
            c = coefs[int(q)]
            if degree == 1:
                eig[str(int(q))] = [str(Fraction(str(pari.lift(c) if _ty(c) == "t_POLMOD" else c)))]
            else:
                lifted = pari.lift(c)
                poly = pari.subst(lifted, "y", pari.Mod(pari.subst(shift, pari.variable(shift), "y"), field_red))
                poly = pari.lift(poly)
                eig[str(int(q))] = [str(Fraction(str(pari.polcoef(poly, j, "y")))) for j in range(degree)]
        field_coeffs = [int(pari.polcoef(field_red, j, "y")) for j in range(degree + 1)]
        if degree == 1:
            field_coeffs = [0, 1]
        forms.append({"dim": degree, "traces": traces, "field_poly": field_coeffs, "eigenvalues": eig})
    forms.sort(key=lambda r: (r["dim"], r["traces"]))
    records = []
    for idx, r in enumerate(forms):
        label = f"{level}.2.a.{_letters(idx)}"
        records.append({
            "label": label,
            "level": level,
            "weight": 2,
            "dim": r["dim"],
            "field_poly": [str(c) for c in r["field_poly"]],
            "traces": r["traces"][:100],
            "eigenvalues": r["eigenvalues"],
        })
    return records


def _ty(x):
    return str(pari.type(x)).strip('"')


def _trace(c):
    if _ty(c) == "t_POLMOD":
        return int(pari.trace(c))
    return int(c)


def _letters(i):
    s = ""
    i += 1
    while i:
        i, rem = divmod(i - 1, 26)
        s = chr(ord("a") + rem) + s
    return s


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("outdir")
    ap.add_argument("levels", nargs="+", type=int)
    ap.add_argument("--qmax", type=int, default=1000)
    args = ap.parse_args()
    pari.allocatemem(6 * 10**9)
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    for level in args.levels:
        t0 = time.time()
        records = newforms_at(level, args.qmax)
        payload = {
            "schema": 1,
            "level": level,
            "weight": 2,
            "source": "fixture",
            "eigenvalue_bound": args.qmax,
            "count": len(records),
            "records": records,
        }
        path = out / f"level-{level}.json"
        path.write_text(json.dumps(payload, separators=(",", ":")) + "\n")
        print(f"level {level}: {len(records)} forms, {time.time() - t0:.1f}s", flush=True)


if __name__ == "__main__":
    main()
