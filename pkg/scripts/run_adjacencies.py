#!/usr/bin/env python3
"""Locate and verify the phase-lock adjacency points for omega = 0.7.

Writes out/adjacencies_l{0,1,2}.csv plus a combined JSON verification
report, mirroring `heunlock adjacencies -l L --omega 0.7 --a-max 20`.
"""

import json
import pathlib
import sys

from heunlock.heunrec import HeunParams, entire_solution_defect
from heunlock.reports import dump_json, write_roots_csv
from heunlock.torusflow import adjacency_verify
from heunlock.xiprod import polish_root_by_defect, xi_roots_on_line

OMEGA = 0.7
A_MAX = 20.0
OUT = pathlib.Path(__file__).resolve().parent.parent / "out"


def main() -> int:
    OUT.mkdir(exist_ok=True)
    all_reports = []
    for l in (0, 1, 2):
        roots = [
            polish_root_by_defect(r) if not r.suspected else r
            for r in xi_roots_on_line(l, OMEGA, A_MAX)
        ]
        defects = [
            abs(entire_solution_defect(HeunParams(l=l, lam=r.lam, mu=r.mu)))
            for r in roots
        ]
        with open(OUT / f"adjacencies_l{l}.csv", "w") as fh:
            write_roots_csv(fh, roots, defects)
        for r in roots:
            print(f"l={l}  A={r.A:.9f}  |xi|={abs(r.xi_value):.2e}")
            all_reports.append(adjacency_verify(l, OMEGA, r.A, periods=2000))
    with open(OUT / "adjacency_reports.json", "w") as fh:
        dump_json(fh, all_reports)
    bad = [r for r in all_reports if r["monodromy_identity_distance"] > 1e-6]
    print(f"{len(all_reports)} adjacencies verified, {len(bad)} flagged")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
