"""Infinite products of the recurrence matrices and the function xi_l.

With q = j (j - l) the factors are

    M_j = [[1 + lambda / q, mu^2 / q], [1, 0]],   j >= l + 1,

multiplied left to right in increasing j, R_m = M_m M_{m+1} ...  and

    xi_l(lambda, mu) = (lambda  mu^2) . R_{l+1} . (1, 0)^T.

xi_l is analytic in (lambda, mu) and vanishes exactly at the parameters
where the primary Heun equation has a nontrivial entire solution, which
along a Josephson line B = l omega pins the phase-lock adjacency points.

Truncation behavior: partial products converge to R_m with absolute
error Theta(1/J) (the factor deviations |lambda|/q + mu^2/q sum like a
harmonic tail), while the error is almost purely a multiplicative drift,
so zero locations converge orders of magnitude faster.  xi_l removes the
1/J and 1/J^2 terms by two-level Richardson extrapolation over snapshots
at J, 2J, 4J and reports the observed extrapolation gap as its error.
The tail estimate attached to r_m is the observed doubling increment
plus the analytic envelope (|lambda| + mu^2) * ||P|| / (J - l); the
envelope constant is heuristic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import product_extend, product_extend_dd, xi_from_state_dd
from .errors import ConvergenceError
from .heunrec import HeunParams, entire_solution_defect

__all__ = [
    "TruncatedProduct",
    "RootRecord",
    "m_j",
    "r_m",
    "xi_l",
    "xi_roots_on_line",
    "polish_root_by_defect",
    "josephson_lambda_mu",
]

#: hard cap on the truncation index of any partial product
PRODUCT_CAP = 10**6

#: cap on the extrapolation schedule inside xi_l
_XI_CAP = 3 * 10**7


def m_j(j: int, p: HeunParams) -> np.ndarray:
    """The 2x2 factor at index j; requires j >= l + 1."""
    if j <= p.l:
        raise ValueError(f"j must be >= l + 1 = {p.l + 1}, got {j}")
    q = float(j) * float(j - p.l)
    return np.array([[1.0 + p.lam / q, p.mu * p.mu / q], [1.0, 0.0]])


@dataclass(frozen=True)
class TruncatedProduct:
    """Partial product M_m ... M_J with a tail estimate for the remainder."""

    value: np.ndarray = field(repr=False)
    m: int
    J: int
    tail_est: float


def _as_matrix(t) -> np.ndarray:
    return np.array([[t[0], t[1]], [t[2], t[3]]])


def r_m(m: int, p: HeunParams, tol: float, cap: int = PRODUCT_CAP) -> TruncatedProduct:
    """Truncated R_m by doubling: stop once ||P_2J - P_J|| < tol * scale.

    scale is max(1, ||P||); J beyond `cap` raises ConvergenceError.  The
    achievable tol is limited by the Theta(1/J) convergence of the raw
    partial products (see module docstring).
    """
    if m < p.l + 1:
        raise ValueError(f"m must be >= l + 1 = {p.l + 1}, got {m}")
    if not tol > 0:
        raise ValueError("tol must be positive")
    lam, mu2, l = p.lam, p.mu * p.mu, p.l
    J = max(2 * m, m + 63)
    state = product_extend(l, lam, mu2, m, J, 1.0, 0.0, 0.0, 1.0)
    while True:
        nxt = product_extend(l, lam, mu2, J + 1, 2 * J, *state)
        diff = max(abs(a - b) for a, b in zip(nxt, state))
        norm = max(abs(v) for v in nxt)
        J *= 2
        state = nxt
        if diff < tol * max(1.0, norm):
            envelope = (abs(lam) + mu2) * max(1.0, norm) / (J - l)
            return TruncatedProduct(value=_as_matrix(state), m=m, J=J, tail_est=diff + envelope)
        if J > cap:
            raise ConvergenceError(
                f"partial product past J={J} without meeting tol={tol} "
                f"(last doubling increment {diff:.3e})"
            )


def xi_l(p: HeunParams, tol: float = 1e-6) -> tuple[float, float]:
    """(value, err) of xi_l by Richardson-extrapolated partial products.

    The products run in compensated (double-double) arithmetic: their
    intermediate entries can sit many orders of magnitude above the
    final value, and the rounding committed at that peak is exactly what
    limits plain doubles near the zeros of xi.  err combines the gap
    between the two extrapolation levels with the peak-scale rounding
    floor; the truncation schedule doubles until
    err <= tol * max(1, |value|).
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    lam, mu2, l = p.lam, p.mu * p.mu, p.l
    weight = 1.0 + abs(lam) + mu2
    J = max(256, int(64.0 * weight))
    ident = np.array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0])
    while True:
        s1 = product_extend_dd(l, lam, mu2, l + 1, J, ident)
        s2 = product_extend_dd(l, lam, mu2, J + 1, 2 * J, s1)
        s3 = product_extend_dd(l, lam, mu2, 2 * J + 1, 4 * J, s2)
        x1 = xi_from_state_dd(lam, mu2, s1)
        x2 = xi_from_state_dd(lam, mu2, s2)
        x3 = xi_from_state_dd(lam, mu2, s3)
        r1 = 2.0 * x2 - x1
        r2 = 2.0 * x3 - x2
        value = (4.0 * r2 - r1) / 3.0
        floor = s3[8] * weight * 8e-31
        err = abs(r2 - r1) + 1e-26 * abs(value) + floor + 5e-308
        if err <= tol * max(1.0, abs(value)):
            return value, err
        if 4 * J > _XI_CAP:
            raise ConvergenceError(
                f"xi extrapolation stalled at J={4 * J}: err={err:.3e} > tol={tol}"
            )
        J *= 4


def josephson_lambda_mu(omega: float, A: float) -> tuple[float, float]:
    """Map (omega, A) to (lambda, mu): mu = A/(2 omega), lambda = 1/(2 omega)^2 - mu^2."""
    if not omega > 0:
        raise ValueError("omega must be positive")
    mu = A / (2.0 * omega)
    lam = 1.0 / (4.0 * omega * omega) - mu * mu
    return lam, mu


@dataclass(frozen=True)
class RootRecord:
    """A certified (or suspected) zero of xi_l along a Josephson line."""

    l: int
    omega: float
    A: float
    lam: float
    mu: float
    xi_value: float
    xi_err: float
    bracket: tuple[float, float]
    suspected: bool = False


def _xi_at_A(l: int, omega: float, A: float, tol: float) -> tuple[float, float]:
    lam, mu = josephson_lambda_mu(omega, A)
    return xi_l(HeunParams(l=l, lam=lam, mu=mu), tol=tol)


def xi_roots_on_line(
    l: int,
    omega: float,
    A_max: float,
    tol: float = 1e-8,
    grid_step: float = 0.02,
    xi_tol: float = 1e-6,
) -> list[RootRecord]:
    """Zeros of A -> xi_l(lambda(A), mu(A)) on (0, A_max].

    Sign changes on the grid are refined by bisection to bracket width
    tol * max(1, A); cells where |xi| dips below a small fraction of the
    neighborhood scale without a sign change are reported as suspected
    even-multiplicity roots.
    """
    if l < 0:
        raise ValueError("l must be >= 0")
    if not (omega > 0 and A_max > 0):
        raise ValueError("omega and A_max must be positive")
    n = max(16, int(math.ceil(A_max / grid_step)))
    As = [A_max * (i + 1) / n for i in range(n)]
    vals = []
    for A in As:
        v, e = _xi_at_A(l, omega, A, xi_tol)
        vals.append((A, v, e))
    out: list[RootRecord] = []
    for (A0, v0, e0), (A1, v1, e1) in zip(vals, vals[1:]):
        if v0 == 0.0:  # grid node exactly on a root
            lam, mu = josephson_lambda_mu(omega, A0)
            out.append(
                RootRecord(
                    l=l, omega=omega, A=A0, lam=lam, mu=mu,
                    xi_value=0.0, xi_err=e0, bracket=(A0, A0),
                )
            )
            continue
        if v0 * v1 < 0.0 and abs(v0) > e0 and abs(v1) > e1:
            lo, flo = A0, v0
            hi = A1
            while hi - lo > tol * max(1.0, hi):
                mid = 0.5 * (lo + hi)
                fm, _ = _xi_at_A(l, omega, mid, xi_tol)
                if fm == 0.0:
                    lo = hi = mid
                    break
                if flo * fm < 0.0:
                    hi = mid
                else:
                    lo, flo = mid, fm
            root = 0.5 * (lo + hi)
            v, e = _xi_at_A(l, omega, root, xi_tol)
            lam, mu = josephson_lambda_mu(omega, root)
            out.append(
                RootRecord(
                    l=l, omega=omega, A=root, lam=lam, mu=mu,
                    xi_value=v, xi_err=e, bracket=(lo, hi),
                )
            )
    # suspected dips: |xi| locally minimal and far below the neighborhood scale
    scale = np.median([abs(v) for _, v, _ in vals]) or 1.0
    covered = [r.A for r in out]
    for i in range(1, n - 1):
        A, v, _ = vals[i]
        if abs(v) < 1e-6 * scale and abs(vals[i - 1][1]) > abs(v) < abs(vals[i + 1][1]):
            if vals[i - 1][1] * vals[i + 1][1] > 0 and not any(
                abs(A - c) < 2 * A_max / n for c in covered
            ):
                lam, mu = josephson_lambda_mu(omega, A)
                out.append(
                    RootRecord(
                        l=l, omega=omega, A=A, lam=lam, mu=mu,
                        xi_value=v, xi_err=vals[i][2],
                        bracket=(vals[i - 1][0], vals[i + 1][0]), suspected=True,
                    )
                )
    out.sort(key=lambda r: r.A)
    return out


def polish_root_by_defect(rec: RootRecord, tol: float = 1e-12) -> RootRecord:
    """Tighten a root bracket by bisection on the entire-solution defect.

    The defect changes sign at the same parameters as xi_l; evaluated in
    extended precision its noise floor sits far below the product's, so
    it supports much deeper refinement.  At large mu the defect scale
    collapses (the minimal solution's peak coefficient dwarfs the n = 0
    region), which is exactly why the extra bits are needed.
    """
    from .specfun import Precision

    lo, hi = rec.bracket
    if rec.suspected or lo >= hi:
        return rec
    eprec = Precision(bits=106)

    def defect_at(A: float) -> float:
        lam, mu = josephson_lambda_mu(rec.omega, A)
        return entire_solution_defect(HeunParams(l=rec.l, lam=lam, mu=mu), prec=eprec)

    flo = defect_at(lo)
    fhi = defect_at(hi)
    if flo == 0.0 or fhi == 0.0 or flo * fhi > 0.0:
        return rec
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        fm = defect_at(mid)
        if fm == 0.0:
            lo = hi = mid
            break
        if flo * fm < 0.0:
            hi = mid
        else:
            lo, flo = mid, fm
    root = 0.5 * (lo + hi)
    v, e = _xi_at_A(rec.l, rec.omega, root, 1e-6)
    lam, mu = josephson_lambda_mu(rec.omega, root)
    return RootRecord(
        l=rec.l, omega=rec.omega, A=root, lam=lam, mu=mu,
        xi_value=v, xi_err=e, bracket=(lo, hi), suspected=False,
    )
