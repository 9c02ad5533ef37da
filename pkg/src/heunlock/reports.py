"""File-format helpers: root tables, verification reports, solution dumps.

All floats print with 12 significant digits so identical runs produce
byte-identical bodies; timestamps appear only when explicitly requested.
"""

from __future__ import annotations

import csv
import json
from datetime import datetime, timezone


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def header_lines(seed=None, timestamp: bool = False) -> list[str]:
    out = []
    if seed is not None:
        out.append(f"# seed={seed}")
    if timestamp:
        out.append(f"# generated={datetime.now(timezone.utc).isoformat()}")
    return out


def write_roots_csv(fh, roots, defects=None, seed=None, timestamp=False) -> None:
    """Root table: l, omega, A, B=l*omega, lambda, mu, xi_residual, defect."""
    for line in header_lines(seed, timestamp):
        fh.write(line + "\n")
    w = csv.writer(fh)
    w.writerow(["l", "omega", "A", "B", "lambda", "mu", "xi_residual", "defect_crosscheck"])
    for i, r in enumerate(roots):
        d = defects[i] if defects is not None else float("nan")
        w.writerow(
            [
                r.l,
                _fmt(r.omega),
                _fmt(r.A),
                _fmt(r.l * r.omega),
                _fmt(r.lam),
                _fmt(r.mu),
                _fmt(abs(r.xi_value)),
                _fmt(d),
            ]
        )


def write_taylor_csv(fh, sol, seed=None, timestamp=False) -> None:
    """Solution dump: rows (n, a_n)."""
    for line in header_lines(seed, timestamp):
        fh.write(line + "\n")
    w = csv.writer(fh)
    w.writerow(["n", "a_n"])
    for n, a in enumerate(sol.coeffs):
        w.writerow([n, _fmt(float(a))])


def write_existence_csv(fh, rows, seed=None, timestamp=False) -> None:
    """Existence locus table: rows (l, mu, lambda_root, defect, xi_value)."""
    for line in header_lines(seed, timestamp):
        fh.write(line + "\n")
    w = csv.writer(fh)
    w.writerow(["l", "mu", "lambda_root", "defect", "xi_value"])
    for l, mu, lam, defect, xi in rows:
        w.writerow([l, _fmt(mu), _fmt(lam), _fmt(defect), _fmt(xi)])


def dump_json(fh, payload) -> None:
    json.dump(payload, fh, indent=2, sort_keys=True)
    fh.write("\n")
