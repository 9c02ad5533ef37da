#!/usr/bin/env python3
"""Render the omega = 0.7 phase-lock portrait with adjacency overlay.

Produces out/portrait.csv and out/portrait.svg: integer rotation-number
regions colored by level, adjacency points from the analytic equation
overlaid as dots on the vertical lines B = l * omega.
"""

import pathlib
import sys

from heunlock.torusflow import portrait
from heunlock.xiprod import xi_roots_on_line

OMEGA = 0.7
OUT = pathlib.Path(__file__).resolve().parent.parent / "out"


def main() -> int:
    OUT.mkdir(exist_ok=True)
    grid = (200, 200)
    print(f"integrating {grid[0]}x{grid[1]} cells (several minutes)...")
    g = portrait(OMEGA, (-4.0, 4.0), (0.0, 10.0), grid, tol=3e-4, periods=384)
    with open(OUT / "portrait.csv", "w") as fh:
        g.to_csv(fh)
    adjacencies = []
    for l in range(0, 6):
        b = l * OMEGA
        if b > 4.0:
            break
        for r in xi_roots_on_line(l, OMEGA, 10.0):
            adjacencies.append((b, r.A))
            if l > 0:
                adjacencies.append((-b, r.A))
    with open(OUT / "portrait.svg", "w") as fh:
        g.to_svg(fh, width=800, height=800, adjacencies=adjacencies)
    print(f"wrote {OUT/'portrait.csv'} and {OUT/'portrait.svg'} "
          f"({len(adjacencies)} adjacency markers)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
