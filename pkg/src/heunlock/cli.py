"""Command-line surface: reproducible, file-based runs of every pipeline.

Exit codes: 0 success, 1 invariant violation, 2 usage or domain error,
3 convergence failure.  All floats print with 12 significant digits;
--seed is recorded in output headers and --timestamp adds a header line
(off by default so reruns are byte-identical).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

from . import verify as verify_suites
from .errors import (
    ConvergenceError,
    InternalConsistencyError,
    PositivityContradictionError,
)
from .heunrec import HeunParams
from .reports import dump_json, header_lines, write_roots_csv
from .specfun import Precision, bessel_i_with_error
from .torusflow import adjacency_verify, portrait
from .xiprod import (
    josephson_lambda_mu,
    polish_root_by_defect,
    xi_l,
    xi_roots_on_line,
)
from .youngdet import positivity_scan


@dataclass
class RunConfig:
    """Settings shared by every command; the seed rides along in headers."""

    precision_bits: int = 53
    tol: float = 1e-9
    periods: int | None = None  # commands fill their own default
    grid: tuple[int, int] = (200, 200)
    out: str | None = None
    seed: int = 0
    as_json: bool = False
    timestamp: bool = False

    def precision(self) -> Precision:
        bits = self.precision_bits
        return Precision(bits=bits) if bits != 53 else Precision()


def _env_bits() -> int:
    raw = os.environ.get("HEUNLOCK_PRECISION_BITS")
    if raw is None:
        return 53
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"HEUNLOCK_PRECISION_BITS must be an integer, got {raw!r}")


def _common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--precision-bits", type=int, default=None)
    sub.add_argument("--tol", type=float, default=None)
    sub.add_argument("--periods", type=int, default=None)
    sub.add_argument("--grid", type=str, default="200x200")
    sub.add_argument("--out", type=str, default=None)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--json", action="store_true")
    sub.add_argument("--timestamp", action="store_true")


def _config(args, default_tol: float) -> RunConfig:
    bits = args.precision_bits if args.precision_bits is not None else _env_bits()
    gw, _, gh = args.grid.partition("x")
    return RunConfig(
        precision_bits=bits,
        tol=args.tol if args.tol is not None else default_tol,
        periods=args.periods,
        grid=(int(gw), int(gh or gw)),
        out=args.out,
        seed=args.seed,
        as_json=args.json,
        timestamp=args.timestamp,
    )


def _open_out(cfg: RunConfig):
    if cfg.out is None or cfg.out == "-":
        return sys.stdout, False
    return open(cfg.out, "w"), True


def cmd_bessel(args) -> int:
    cfg = _config(args, default_tol=1e-15)
    prec = Precision(tol=cfg.tol, bits=cfg.precision_bits)
    value, err = bessel_i_with_error(args.j, args.x, prec)
    if cfg.as_json:
        print(json.dumps({"j": args.j, "x": args.x, "value": value, "err": err}))
    else:
        print(f"{value:.12g} (err <= {err:.12g})")
    return 0


def cmd_scan_positivity(args) -> int:
    cfg = _config(args, default_tol=1e-15)
    xs = [float(t) for t in args.xs.split(",") if t]
    report = positivity_scan(args.l, args.radius, xs, cfg.precision())
    fh, close = _open_out(cfg)
    try:
        for line in header_lines(cfg.seed, cfg.timestamp):
            fh.write(line + "\n")
        report.to_csv(fh)
    finally:
        if close:
            fh.close()
    summary = (
        f"scanned={report.total} unresolved={len(report.unresolved)} "
        f"min_certified={report.min_certified:.12g}"
    )
    print(summary, file=sys.stderr)
    return 0 if report.all_positive else 1


def cmd_xi(args) -> int:
    cfg = _config(args, default_tol=1e-6)
    if args.A is not None:
        if args.omega is None:
            raise ValueError("xi with -A requires --omega")
        lam, mu = josephson_lambda_mu(args.omega, args.A)
    else:
        if args.lam is None or args.mu is None:
            raise ValueError("xi requires either --lam and --mu, or --omega and -A")
        lam, mu = args.lam, args.mu
    value, err = xi_l(HeunParams(l=args.l, lam=lam, mu=mu), tol=cfg.tol)
    if cfg.as_json:
        print(json.dumps({"l": args.l, "lambda": lam, "mu": mu, "value": value, "err": err}))
    else:
        print(f"{value:.12g} (err <= {err:.12g})")
    return 0


def cmd_adjacencies(args) -> int:
    from .heunrec import entire_solution_defect

    cfg = _config(args, default_tol=1e-8)
    roots = xi_roots_on_line(args.l, args.omega, args.a_max, tol=cfg.tol)
    roots = [polish_root_by_defect(r) if not r.suspected else r for r in roots]
    defects = []
    for r in roots:
        defects.append(
            abs(entire_solution_defect(HeunParams(l=r.l, lam=r.lam, mu=r.mu)))
        )
    fh, close = _open_out(cfg)
    try:
        write_roots_csv(fh, roots, defects, seed=cfg.seed, timestamp=cfg.timestamp)
    finally:
        if close:
            fh.close()
    if cfg.as_json:
        periods = cfg.periods or 2000
        reports = [
            adjacency_verify(r.l, r.omega, r.A, periods=periods) for r in roots
        ]
        path = (cfg.out or "adjacencies") + ".reports.json"
        with open(path, "w") as jf:
            dump_json(jf, reports)
        print(f"verification reports written to {path}", file=sys.stderr)
    return 0


def cmd_portrait(args) -> int:
    cfg = _config(args, default_tol=3e-4)
    g = portrait(
        args.omega,
        (args.b_min, args.b_max),
        (args.a_min, args.a_max),
        cfg.grid,
        tol=cfg.tol,
        periods=cfg.periods or 384,
    )
    fh, close = _open_out(cfg)
    try:
        for line in header_lines(cfg.seed, cfg.timestamp):
            fh.write(line + "\n")
        g.to_csv(fh)
    finally:
        if close:
            fh.close()
    if args.svg:
        adjacencies = None
        if args.overlay_adjacencies:
            adjacencies = []
            for lvl in range(0, 1 + int(abs(args.b_max) / args.omega)):
                for r in xi_roots_on_line(lvl, args.omega, args.a_max):
                    adjacencies.append((lvl * args.omega, r.A))
                    if lvl > 0:
                        adjacencies.append((-lvl * args.omega, r.A))
        with open(args.svg, "w") as sfh:
            g.to_svg(sfh, width=args.svg_width, height=args.svg_height, adjacencies=adjacencies)
    return 0


def cmd_verify(args) -> int:
    cfg = _config(args, default_tol=1e-9)
    result = verify_suites.run_suite(args.suite, cfg.precision())
    print(json.dumps(result, indent=2, sort_keys=True))
    return 0 if result["passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="heunlock",
        description="Bessel determinants, Heun entire solutions, Josephson adjacencies",
    )
    sp = ap.add_subparsers(dest="command", required=True)

    b = sp.add_parser("bessel", help="modified Bessel function I_j(x)")
    b.add_argument("-j", type=int, required=True)
    b.add_argument("-x", type=float, required=True)
    _common(b)
    b.set_defaults(func=cmd_bessel)

    s = sp.add_parser("scan-positivity", help="certified determinant positivity scan")
    s.add_argument("-l", type=int, required=True)
    s.add_argument("--radius", type=int, required=True)
    s.add_argument("--xs", type=str, required=True, help="comma-separated x values")
    _common(s)
    s.set_defaults(func=cmd_scan_positivity)

    x = sp.add_parser("xi", help="evaluate xi_l(lambda, mu)")
    x.add_argument("-l", type=int, required=True)
    x.add_argument("--lam", type=float, default=None)
    x.add_argument("--mu", type=float, default=None)
    x.add_argument("--omega", type=float, default=None)
    x.add_argument("-A", type=float, default=None)
    _common(x)
    x.set_defaults(func=cmd_xi)

    a = sp.add_parser("adjacencies", help="adjacency points on the line B = l*omega")
    a.add_argument("-l", type=int, required=True)
    a.add_argument("--omega", type=float, required=True)
    a.add_argument("--a-max", type=float, required=True)
    _common(a)
    a.set_defaults(func=cmd_adjacencies)

    p = sp.add_parser("portrait", help="rotation-number grid over the (B, A) plane")
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--b-min", type=float, default=-4.0)
    p.add_argument("--b-max", type=float, default=4.0)
    p.add_argument("--a-min", type=float, default=0.0)
    p.add_argument("--a-max", type=float, default=10.0)
    p.add_argument("--svg", type=str, default=None)
    p.add_argument("--svg-width", type=int, default=640)
    p.add_argument("--svg-height", type=int, default=640)
    p.add_argument("--overlay-adjacencies", action="store_true")
    _common(p)
    p.set_defaults(func=cmd_portrait)

    v = sp.add_parser("verify", help="run a named invariant suite")
    v.add_argument("suite", type=str)
    _common(v)
    v.set_defaults(func=cmd_verify)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
        return args.func(args)
    except (PositivityContradictionError, InternalConsistencyError) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 1
    except ConvergenceError as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
