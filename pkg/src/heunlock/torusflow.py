"""Torus dynamics of the overdamped Josephson junction equation.

The family dphi/dt = -sin(phi) + B + A cos(omega t) becomes, after
tau = omega t, the flow on the 2-torus

    dphi/dtau = -sin(phi)/omega + l + 2 mu cos(tau),   l = B/omega,
                                                        mu = A/(2 omega).

The rotation number rho(B, A) is the asymptotic lift advance per 2 pi of
tau, normalized so a rigid rotation by angle alpha has rho = alpha/(2 pi);
numerically it is estimated as (phi lift)/(2 pi * periods) with a
windowed average over period marks.  Phase-lock areas are the integer
level sets of rho with interior; their component chains pinch at
adjacency points, where the monodromy of the associated linear system

    dv/dtau = u / (2 omega)
    du/dtau = -i (l + 2 mu cos tau) u + v / (2 omega)

(the unit-circle restriction of the projectivized Riccati form of the
complexified equation; Phi = e^{i phi} = v/u) degenerates to the
identity.  The trace of the coefficient matrix is -i(l + 2 mu cos tau),
so Liouville gives det M = exp(-2 pi i l).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from ._kernels import (
    TWO_PI,
    field_scale,
    portrait_rho,
    rk4_phase,
    rotation_lift_windowed,
)
from .heunrec import HeunParams, entire_solution_defect
from .xiprod import xi_l

__all__ = [
    "JosephsonParams",
    "RotationResult",
    "Monodromy2",
    "LockInterval",
    "PortraitGrid",
    "flow_step",
    "rotation_number",
    "phase_lock_interval",
    "monodromy",
    "adjacency_verify",
    "portrait",
]


@dataclass(frozen=True)
class JosephsonParams:
    """Parameters (omega, B, A); l, mu, lambda are always derived fresh."""

    omega: float
    B: float
    A: float

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")

    @property
    def l(self) -> float:
        return self.B / self.omega

    @property
    def mu(self) -> float:
        return self.A / (2.0 * self.omega)

    @property
    def lam(self) -> float:
        return 1.0 / (4.0 * self.omega**2) - self.mu**2

    def heun_params(self) -> HeunParams:
        lint = round(self.l)
        if abs(self.l - lint) > 1e-9:
            raise ValueError(f"l = B/omega = {self.l} is not an integer")
        return HeunParams(l=abs(int(lint)), lam=self.lam, mu=abs(self.mu))


@dataclass(frozen=True)
class RotationResult:
    """Rotation number estimate with a crude confidence radius."""

    rho: float
    conf: float
    periods: int


def flow_step(
    p: JosephsonParams,
    phi0: float,
    tau0: float,
    tau1: float,
    tol: float = 1e-10,
) -> float:
    """Lift phi(tau1) of the trajectory through (tau0, phi0).

    Fixed-step RK4 with the step chosen so the local error stays below
    about tol per unit tau; halving tol quarters the step-size budget's
    error term.  Deterministic for identical inputs.
    """
    if not tau1 > tau0:
        raise ValueError("tau1 must exceed tau0")
    if not tol > 0:
        raise ValueError("tol must be positive")
    F = field_scale(p.omega, p.l, p.mu)
    s = min(0.25, 0.8 * (120.0 * tol / F) ** 0.25)
    s = max(s, 1e-3)
    span = tau1 - tau0
    nsteps = max(1, int(math.ceil(span * F / s)))
    return float(rk4_phase(p.omega, p.l, p.mu, phi0, tau0, span / nsteps, nsteps))


def rotation_number(
    p: JosephsonParams,
    periods: int,
    tol: float = 1e-4,
    window: int | None = None,
) -> RotationResult:
    """Estimate rho(B, A) from `periods` forcing periods of the lift.

    The estimate is a windowed long-trajectory average; conf is the crude
    O(1/periods) envelope plus the integrator budget tol, deliberately
    conservative.
    """
    if periods < 50:
        raise ValueError(f"periods must be >= 50, got {periods}")
    if window is None:
        window = max(1, min(64, periods // 8))
    rho = float(
        rotation_lift_windowed(p.omega, p.l, p.mu, periods, window, tol)
    )
    return RotationResult(rho=rho, conf=2.0 / periods + tol, periods=periods)


# --------------------------------------------------------------------------
# phase-lock boundaries in B at fixed A

@dataclass(frozen=True)
class LockInterval:
    """Measured [B-, B+] slice of a rho level set, or empty if sub-tol."""

    level: float
    A: float
    b_minus: float
    b_plus: float
    empty: bool
    reliable: bool

    @property
    def width(self) -> float:
        return 0.0 if self.empty else self.b_plus - self.b_minus


def _rho_at(level_params, B: float) -> float:
    omega, A, periods, tol, window = level_params
    p = JosephsonParams(omega=omega, B=B, A=A)
    return rotation_number(p, periods, tol, window).rho


def _crossing(level_params, y: float, lo: float, hi: float, btol: float) -> float:
    """Bisect the monotone rho(B) for the crossing rho = y in [lo, hi]."""
    flo = _rho_at(level_params, lo) - y
    fhi = _rho_at(level_params, hi) - y
    if flo > 0 or fhi < 0:
        raise ValueError("crossing not bracketed")
    while hi - lo > btol:
        mid = 0.5 * (lo + hi)
        if _rho_at(level_params, mid) - y < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def phase_lock_interval(
    level: float,
    A: float,
    omega: float,
    tol: float = 1e-3,
    periods: int = 2000,
    rho_tol: float = 1e-5,
    window: int = 128,
    level_eps: float = 1e-4,
) -> LockInterval:
    """Boundary [B-, B+] of {rho = level} at fixed A by bisection in B.

    The edges are located as the B-crossings of rho = level -+ level_eps,
    so the result is the measured width of {|rho - level| < level_eps}.
    Relies on rho being nondecreasing in B (spot-checked; violations mark
    the result unreliable).  The interval counts as empty when its width
    falls below tol, which is the expected outcome for non-integer levels.
    """
    lp = (omega, A, periods, rho_tol, window)
    # rho(B) ~ B/omega far from the lock plateaus: bracket generously
    span = omega * (2.0 + abs(A))
    lo = omega * level - span
    hi = omega * level + span
    for _ in range(64):
        if _rho_at(lp, lo) < level - level_eps:
            break
        lo -= span
    for _ in range(64):
        if _rho_at(lp, hi) > level + level_eps:
            break
        hi += span
    samples = [_rho_at(lp, lo + (hi - lo) * i / 6.0) for i in range(7)]
    reliable = all(b - a >= -2.0 * (rho_tol + 2.0 / periods) for a, b in zip(samples, samples[1:]))
    btol = max(tol / 8.0, 1e-12)
    b_minus = _crossing(lp, level - level_eps, lo, hi, btol)
    b_plus = _crossing(lp, level + level_eps, lo, hi, btol)
    width = b_plus - b_minus
    return LockInterval(
        level=level,
        A=A,
        b_minus=b_minus,
        b_plus=b_plus,
        empty=width < tol,
        reliable=reliable,
    )


# --------------------------------------------------------------------------
# monodromy of the linear system along the unit circle

@dataclass(frozen=True)
class Monodromy2:
    """Monodromy matrix of the linear system over one forcing period."""

    matrix: np.ndarray = field(repr=False)
    tol: float
    expected_det: complex = 1.0 + 0.0j  # exp of the integrated trace

    def liouville_defect(self) -> float:
        """|det M - exp(-2 pi i l)| with l the (possibly non-integer) B/omega."""
        det = complex(np.linalg.det(self.matrix))
        return abs(det - self.expected_det)

    def identity_distance(self) -> float:
        return float(np.max(np.abs(self.matrix - np.eye(2))))


def monodromy(p: JosephsonParams, tol: float = 1e-11) -> Monodromy2:
    """Integrate the linear system around the unit circle once.

    The path tau: 0 -> 2 pi keeps |z| = 1, away from the two irregular
    singularities at 0 and infinity.  Columns of the result are the
    images of the standard basis.
    """
    if p.A == 0:
        raise ValueError("monodromy requires A != 0")
    lpar = p.l
    mu = p.mu
    inv2w = 1.0 / (2.0 * p.omega)

    def rhs(tau, y):
        v, u = y[0], y[1]
        return [inv2w * u, -1j * (lpar + 2.0 * mu * np.cos(tau)) * u + inv2w * v]

    cols = []
    for y0 in ([1.0 + 0.0j, 0.0j], [0.0j, 1.0 + 0.0j]):
        sol = solve_ivp(
            rhs,
            (0.0, TWO_PI),
            y0,
            method="DOP853",
            rtol=tol,
            atol=tol * 1e-2,
            dense_output=False,
        )
        if not sol.success:
            raise RuntimeError(f"monodromy integration failed: {sol.message}")
        cols.append(sol.y[:, -1])
    mat = np.column_stack(cols)
    return Monodromy2(
        matrix=mat, tol=tol, expected_det=complex(np.exp(-2j * np.pi * lpar))
    )


def adjacency_verify(
    lvl: int,
    omega: float,
    A: float,
    tol: float = 1e-3,
    periods: int = 2000,
) -> dict:
    """Evidence report for a candidate adjacency at (B, A) = (lvl*omega, A).

    Collects the xi residual, the entire-solution defect, the measured
    rotation number with the rho = lvl comparison (evidence for the open
    conjecture, not a theorem), the parity and magnitude constraints, and
    the monodromy distance to the identity.  Failures are report entries,
    never exceptions.
    """
    if lvl < 0:
        raise ValueError("lvl must be >= 0")
    p = JosephsonParams(omega=omega, B=lvl * omega, A=A)
    hp = HeunParams(l=lvl, lam=p.lam, mu=p.mu)
    xi_value, xi_err = xi_l(hp)
    defect = entire_solution_defect(hp)
    rr = rotation_number(p, periods=periods, tol=min(tol, 1e-4))
    rho_int = round(rr.rho)
    mono = monodromy(p)
    return {
        "l": lvl,
        "omega": omega,
        "A": A,
        "B": lvl * omega,
        "lambda": p.lam,
        "mu": p.mu,
        "xi_residual": abs(xi_value),
        "xi_err": xi_err,
        "entire_solution_defect": abs(defect),
        "rotation_number": rr.rho,
        "rotation_conf": rr.conf,
        "rho_equals_level_within_tol": bool(abs(rr.rho - lvl) <= tol),
        "rho_equality_is_conjecture_evidence": True,
        "parity_constraint_ok": bool(
            abs(rr.rho - rho_int) <= tol and (rho_int - lvl) % 2 == 0
        ),
        "magnitude_constraint_ok": bool(abs(lvl) <= abs(rr.rho) + tol),
        "monodromy_identity_distance": mono.identity_distance(),
        "monodromy_liouville_defect": mono.liouville_defect(),
    }


# --------------------------------------------------------------------------
# portraits

@dataclass(frozen=True)
class PortraitGrid:
    """rho sampled on a rectangular (B, A) grid, row-major in A."""

    omega: float
    bs: np.ndarray = field(repr=False)
    as_: np.ndarray = field(repr=False)
    rho: np.ndarray = field(repr=False)
    conf: float
    periods: int

    def to_csv(self, fh) -> None:
        fh.write(f"omega,{self.omega:.12g}\n")
        fh.write("B,A,rho,conf\n")
        for ia, a in enumerate(self.as_):
            for ib, b in enumerate(self.bs):
                fh.write(
                    f"{b:.12g},{a:.12g},{self.rho[ia, ib]:.12g},{self.conf:.12g}\n"
                )

    def to_svg(self, fh, width: int = 640, height: int = 640, adjacencies=None) -> None:
        write_portrait_svg(self, fh, width=width, height=height, adjacencies=adjacencies)


def portrait(
    omega: float,
    B_range: tuple[float, float],
    A_range: tuple[float, float],
    grid: tuple[int, int],
    tol: float = 3e-4,
    periods: int = 384,
    window: int = 64,
) -> PortraitGrid:
    """rho on a grid over B_range x A_range; deterministic cell order."""
    nb, na = grid
    if nb < 2 or na < 2:
        raise ValueError("grid must be at least 2x2")
    if nb * na > 4_000_000:
        raise ValueError("grid exceeds the configured budget")
    bs = np.linspace(B_range[0], B_range[1], nb)
    as_ = np.linspace(A_range[0], A_range[1], na)
    rho = portrait_rho(omega, bs, as_, periods, window, tol)
    return PortraitGrid(
        omega=omega,
        bs=bs,
        as_=as_,
        rho=np.asarray(rho),
        conf=2.0 / periods + tol,
        periods=periods,
    )


_PALETTE = [
    "#4472c4", "#ed7d31", "#70ad47", "#ffc000", "#5b9bd5",
    "#c00000", "#7030a0", "#2e75b6", "#548235", "#bf8f00",
]
_NEUTRAL = "#d9d9d9"


def write_portrait_svg(
    g: PortraitGrid, fh, width: int = 640, height: int = 640, adjacencies=None
) -> None:
    """Render integer-rho regions with a fixed palette keyed to round(rho).

    Cells with |rho - round(rho)| > 0.05 are neutral; adjacency points,
    if given as (B, A) pairs, are overlaid as black circles.
    """
    nb = len(g.bs)
    na = len(g.as_)
    cw = width / nb
    ch = height / na
    fh.write(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n'
    )
    fh.write(f'<rect width="{width}" height="{height}" fill="white"/>\n')
    for ia in range(na):
        y = height - (ia + 1) * ch  # A increases upward
        for ib in range(nb):
            r = g.rho[ia, ib]
            k = round(r)
            color = _PALETTE[int(k) % len(_PALETTE)] if abs(r - k) <= 0.05 else _NEUTRAL
            fh.write(
                f'<rect x="{ib * cw:.2f}" y="{y:.2f}" width="{cw + 0.5:.2f}" '
                f'height="{ch + 0.5:.2f}" fill="{color}"/>\n'
            )
    if adjacencies:
        b0, b1 = g.bs[0], g.bs[-1]
        a0, a1 = g.as_[0], g.as_[-1]
        for b, a in adjacencies:
            if not (b0 <= b <= b1 and a0 <= a <= a1):
                continue
            x = (b - b0) / (b1 - b0) * width
            y = height - (a - a0) / (a1 - a0) * height
            fh.write(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="black"/>\n')
    fh.write("</svg>\n")
