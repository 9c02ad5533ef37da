"""Named invariant suites behind `heunlock verify <suite>`.

Each suite returns a machine-readable dict: suite name, overall pass
flag, and one entry per check with its measured figure of merit.  These
are the fast, operational versions of the full acceptance tests.
"""

from __future__ import annotations

import cmath
import math

from .heunrec import (
    HeunParams,
    entire_solution_defect,
    delta_det,
    poly_existence_lambdas,
    poly_solution_heun2,
    romb_laurent_coeffs,
)
from .specfun import Precision, bessel_i, bessel_integral_oracle, bessel_table
from .torusflow import JosephsonParams, rotation_number
from .xiprod import xi_l, xi_roots_on_line
from .youngdet import positivity_scan

SUITES = {}


def _suite(name):
    def deco(fn):
        SUITES[name] = fn
        return fn

    return deco


def _check(checks, name, passed, detail):
    checks.append({"name": name, "passed": bool(passed), "detail": detail})


@_suite("bessel")
def _bessel_suite(prec: Precision) -> list:
    checks = []
    worst = 0.0
    h = 1e-5
    tight = Precision(tol=1e-13, bits=prec.bits)
    for x in (0.5, 1.0, 5.0, 10.0):
        for j in range(0, 21):
            fd = (bessel_i(j, x + h, tight) - bessel_i(j, x - h, tight)) / (2 * h)
            ident = 0.5 * (bessel_i(j - 1, x, tight) + bessel_i(j + 1, x, tight))
            # normalized: the raw h^2 truncation exceeds 1e-8 for large values
            worst = max(worst, abs(fd - ident) / max(1.0, abs(ident)))
    _check(checks, "derivative identity", worst < 1e-8, f"max residual {worst:.3e}")

    worst = 0.0
    for x in (1.0, 2.0, 5.0):
        tab = bessel_table(40, x, prec)
        for m in range(8):
            z = cmath.exp(2j * cmath.pi * m / 8)
            total = tab[0] + sum(tab[j] * (z**j + z**-j) for j in range(1, 41))
            target = cmath.exp((x / 2) * (z + 1 / z))
            worst = max(worst, abs(total - target))
    _check(checks, "generating function", worst < 1e-10, f"max defect {worst:.3e}")

    worst = 0.0
    for x in (0.5, 2.0, 10.0):
        tab = bessel_table(30, x, prec, method="miller" if x > 0 else "series")
        for j in range(0, 31, 3):
            se = bessel_i(j, x, prec)
            qu = bessel_integral_oracle(j, x, 512)
            worst = max(worst, abs(se - qu), abs(se - tab[j]), abs(qu - tab[j]))
    _check(checks, "cross oracles", worst < 1e-11, f"max disagreement {worst:.3e}")
    return checks


@_suite("positivity-l2")
def _positivity_l2(prec: Precision) -> list:
    checks = []
    for l in (1, 2):
        rep = positivity_scan(l, 6, (0.1, 1.0, 5.0, 10.0), prec)
        _check(
            checks,
            f"l={l} exhaustive scan",
            rep.all_positive and rep.complete,
            f"{rep.total} pairs, min certified {rep.min_certified:.3e}",
        )
    return checks


@_suite("heun-exclusion")
def _heun_exclusion(prec: Precision) -> list:
    checks = []
    for l in (1, 2, 3):
        for mu in (0.5, 1.0, 2.0):
            for lam in poly_existence_lambdas(l, mu):
                p = HeunParams(l=l, lam=lam, mu=mu)
                sol = poly_solution_heun2(p, prec)
                ok_sol = sol is not None and sol.kernel_residual < 1e-8
                xi, xi_err = xi_l(p)
                ok_xi = abs(xi) > xi_err
                dd = delta_det(l, 2.0 * mu, prec)
                ok_det = dd.sign == "positive"
                ok_romb = True
                if sol is not None:
                    lc = romb_laurent_coeffs(sol, mu, l, prec)
                    ok_romb = max(abs(v) for v in lc) > 1e-12
                _check(
                    checks,
                    f"l={l} mu={mu} lam={lam:.6g}",
                    ok_sol and ok_xi and ok_det and ok_romb,
                    f"kernel={'-' if sol is None else f'{sol.kernel_residual:.1e}'} "
                    f"|xi|={abs(xi):.3e}>{xi_err:.1e} det={dd.sign}",
                )
    return checks


@_suite("xi-defect")
def _xi_defect(prec: Precision) -> list:
    checks = []
    omega = 0.7
    for l in (0, 1):
        roots = xi_roots_on_line(l, omega, 6.0)
        worst = 0.0
        for r in roots:
            if r.suspected:
                continue
            d = abs(entire_solution_defect(HeunParams(l=l, lam=r.lam, mu=r.mu)))
            worst = max(worst, d)
        _check(
            checks,
            f"l={l} roots have small defect",
            bool(roots) and worst < 1e-5,
            f"{len(roots)} roots, max defect {worst:.3e}",
        )
    return checks


@_suite("rotation")
def _rotation(prec: Precision) -> list:
    checks = []
    omega = 0.7
    worst = 0.0
    for B in (0.5, 1.5, 2.0, 3.0):
        rr = rotation_number(JosephsonParams(omega=omega, B=B, A=0.0), periods=1000)
        exact = math.sqrt(max(B * B - 1.0, 0.0)) / omega
        worst = max(worst, abs(rr.rho - exact))
    _check(checks, "closed-form oracle at A=0", worst < 1e-3, f"max error {worst:.3e}")
    return checks


def run_suite(name: str, prec: Precision) -> dict:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; available: {sorted(SUITES)}")
    checks = SUITES[name](prec)
    return {
        "suite": name,
        "passed": all(c["passed"] for c in checks),
        "checks": checks,
    }
