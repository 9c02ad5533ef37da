"""Taylor recurrences for the double confluent Heun equations.

The primary equation (parameters l >= 0, mu > 0, lambda real) is

    z^2 E'' + ((l+1) z + mu (1 - z^2)) E' + (lambda - mu (l+1) z) E = 0,

and its companion is the same equation with l replaced by -l.  The
substitution v = e^{-mu z} E brings the primary equation to canonical
double confluent Heun form; everything here works with the E-form.

Substituting E = sum a_n z^n yields the three-term relation

    mu (n+1) a_{n+1} + (n (n+l) + lambda) a_n - mu (n+l) a_{n-1} = 0,

derived by direct substitution and locked in by the residual oracle
below.  Entire solutions of the primary equation are the minimal
solutions of this recurrence that also satisfy the n = 0 boundary
relation mu a_1 + lambda a_0 = 0; the normalized boundary defect is
computed by Miller-type backward recursion.  Polynomial solutions of the
companion equation (degree exactly l - 1 when they exist) come from the
kernel of the l x l leading block, and the transform

    E(z) = e^{mu (z + 1/z)} Ehat(-1/z)

maps them to solutions of the primary equation, with Laurent
coefficients at z^{-l}..z^{-1} expressible through the Bessel matrix
with k = (l, ..., 1), n = (l-1, ..., 0) at argument 2 mu.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import backward_defect, backward_defect_dd
from .errors import InternalConsistencyError, UndeterminedResultError
from .specfun import DEFAULT_PRECISION, Precision, bessel_i
from .youngdet import SignedDet, det_f

__all__ = [
    "HeunParams",
    "TaylorSolution",
    "PolySolution",
    "recurrence_coeffs_heun1",
    "recurrence_coeffs_heun2",
    "taylor_solution_backward",
    "entire_solution_defect",
    "heun1_residual",
    "poly_solution_heun2",
    "poly_existence_lambdas",
    "romb_laurent_coeffs",
    "delta_det",
]


@dataclass(frozen=True)
class HeunParams:
    """Parameter triple (l, lambda, mu) with l >= 0 and mu > 0."""

    l: int
    lam: float
    mu: float

    def __post_init__(self):
        if self.l < 0:
            raise ValueError(f"l must be >= 0, got {self.l}")
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")


def recurrence_coeffs_heun1(n: int, p: HeunParams) -> tuple[float, float, float]:
    """(c_plus, c_zero, c_minus) with c+ a_{n+1} + c0 a_n + c- a_{n-1} = 0."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return (p.mu * (n + 1), n * (n + p.l) + p.lam, -p.mu * (n + p.l))


def recurrence_coeffs_heun2(n: int, p: HeunParams) -> tuple[float, float, float]:
    """Companion-equation coefficients: l replaced by -l.

    c_minus vanishes at n = l, which is what lets the recurrence
    terminate on a degree-(l-1) polynomial.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    return (p.mu * (n + 1), n * (n - p.l) + p.lam, -p.mu * (n - p.l))


@dataclass(frozen=True)
class TaylorSolution:
    """Truncated Taylor coefficients a_0..a_N of a candidate solution."""

    coeffs: np.ndarray = field(repr=False)
    N: int
    normalization: str
    boundary_defect: float


def default_backward_depth(p: HeunParams) -> int:
    return max(200, 20 * p.l + 10 * math.ceil(abs(p.lam) + p.mu * p.mu))


def _backward_defect_extended(p: HeunParams, N: int, bits: int) -> float:
    """Backward defect in mpmath working precision.

    Near zeros the defect is a deep cancellation whose double-precision
    noise floor (~1e-12 times the parameter scale) blocks fine root
    refinement at large mu; extended bits push that floor out of the way.
    """
    from mpmath import mp

    with mp.workprec(bits):
        lam = mp.mpf(p.lam)
        mu = mp.mpf(p.mu)
        hi = mp.mpf(0)
        lo = mp.mpf(1)
        biggest = mp.mpf(1)
        for n in range(N, 0, -1):
            nxt = (mu * (n + 1) * hi + (n * (n + p.l) + lam) * lo) / (mu * (n + p.l))
            hi = lo
            lo = nxt
            mag = abs(lo)
            if mag > biggest:
                biggest = mag
            if mag > mp.mpf("1e200000"):
                hi /= mag
                lo /= mag
                biggest /= mag
        return float((mu * hi + lam * lo) / biggest)


def _backward_pass(p: HeunParams, N: int):
    """Miller recursion a_N = 1, a_{N+1} = 0 down to a_0, with rescaling.

    Returns (coeffs array, defect) where defect is the residual of the
    unused n = 0 relation, (mu a_1 + lambda a_0) / max |a_n|.
    """
    mu, lam, l = p.mu, p.lam, p.l
    a = np.zeros(N + 2)
    a[N] = 1.0
    biggest = 1.0
    for n in range(N, 0, -1):
        # relation at n solved for a_{n-1}; mu (n+l) > 0 for n >= 1
        a[n - 1] = (mu * (n + 1) * a[n + 1] + (n * (n + l) + lam) * a[n]) / (mu * (n + l))
        mag = abs(a[n - 1])
        if mag > biggest:
            biggest = mag
        if mag > 1e250:
            a[: N + 2] /= mag
            biggest /= mag
    defect = (mu * a[1] + lam * a[0]) / biggest
    return a[: N + 1], defect


def taylor_solution_backward(p: HeunParams, N: int | None = None) -> TaylorSolution:
    """Minimal-solution coefficients by backward recurrence, a_0-normalized.

    Falls back to max-norm normalization when a_0 is negligible.
    """
    if N is None:
        N = default_backward_depth(p)
    a, defect = _backward_pass(p, N)
    peak = np.max(np.abs(a))
    if abs(a[0]) > 1e-3 * peak:
        return TaylorSolution(coeffs=a / a[0], N=N, normalization="a0", boundary_defect=defect)
    return TaylorSolution(coeffs=a / peak, N=N, normalization="max", boundary_defect=defect)


def entire_solution_defect(
    p: HeunParams,
    N: int | None = None,
    prec: Precision = DEFAULT_PRECISION,
) -> float:
    """Normalized boundary defect of the minimal recurrence solution.

    Vanishes (in the N -> infinity limit) exactly at parameters where the
    primary equation has a nontrivial entire solution; this is the
    independent oracle for the zero locus of the matrix-product function
    in the xiprod module.  The depth is doubled until the defect
    stabilizes to two significant figures or hits the double-precision
    noise floor (near zeros the defect is a deep cancellation, so
    relative stabilization is unreachable there).
    """
    def one_pass(depth: int) -> float:
        if not prec.extended:
            return float(backward_defect(p.l, p.lam, p.mu, depth))
        if prec.bits <= 106:  # double-double covers this range at jit speed
            return float(backward_defect_dd(p.l, p.lam, p.mu, depth))
        return _backward_defect_extended(p, depth, prec.bits)

    if N is not None:
        if N < 50 + 10 * p.l:
            raise ValueError(f"N must be >= {50 + 10 * p.l}")
        return one_pass(N)
    if prec.extended:
        return one_pass(2 * default_backward_depth(p))
    N = default_backward_depth(p)
    noise = 2e-12 * (1.0 + abs(p.lam) + p.mu * p.mu)
    d_prev = float(backward_defect(p.l, p.lam, p.mu, N))
    for _ in range(8):
        N *= 2
        d_next = float(backward_defect(p.l, p.lam, p.mu, N))
        if abs(d_next - d_prev) <= max(0.01 * abs(d_next), noise):
            return d_next
        d_prev = d_next
    return d_prev


def heun1_residual(sol: TaylorSolution, p: HeunParams, z: complex, trunc: int) -> float:
    """|z^2 E'' + ((l+1)z + mu(1-z^2)) E' + (lambda - mu(l+1)z) E| at z.

    E and its derivatives are evaluated from the truncated series; tends
    to 0 with trunc for a genuine entire solution and |z| <= 1.
    """
    if trunc > sol.N:
        raise ValueError(f"trunc={trunc} exceeds available coefficients N={sol.N}")
    a = sol.coeffs[: trunc + 1]
    z = complex(z)
    E = 0.0 + 0.0j
    E1 = 0.0 + 0.0j
    E2 = 0.0 + 0.0j
    for n in range(trunc, -1, -1):  # Horner for E, E', E''
        E2 = E2 * z + (a[n] * n * (n - 1) if n >= 2 else 0.0)
        E1 = E1 * z + (a[n] * n if n >= 1 else 0.0)
        E = E * z + a[n]
    # the z-powers of E'' and E' are folded back in below
    if z != 0:
        E2 /= z * z
        E1 /= z
    else:
        E1 = a[1] if trunc >= 1 else 0.0
        E2 = 2.0 * a[2] if trunc >= 2 else 0.0
    lhs = (
        z * z * E2
        + ((p.l + 1) * z + p.mu * (1.0 - z * z)) * E1
        + (p.lam - p.mu * (p.l + 1) * z) * E
    )
    return abs(lhs)


# --------------------------------------------------------------------------
# polynomial solutions of the companion equation

@dataclass(frozen=True)
class PolySolution:
    """Polynomial solution coefficients a_0..a_{l-1} of the companion equation."""

    coeffs: np.ndarray = field(repr=False)
    kernel_residual: float


def _companion_block(p: HeunParams) -> np.ndarray:
    """The l x l system from relations n = 0..l-1 with a_l := 0."""
    l = p.l
    m = np.zeros((l, l))
    for n in range(l):
        cp, cz, cm = recurrence_coeffs_heun2(n, p)
        m[n, n] = cz
        if n + 1 < l:
            m[n, n + 1] = cp
        if n - 1 >= 0:
            m[n, n - 1] = cm
    return m


def poly_solution_heun2(p: HeunParams, prec: Precision = DEFAULT_PRECISION):
    """Kernel vector of the companion block, or None.

    Existence requires det of the block to vanish; the determinant is a
    degree-l polynomial in lambda, so at fixed mu the existence locus is
    a finite lambda-set.  Near-zero determinants that cannot be resolved
    raise UndeterminedResultError.
    """
    if p.l < 1:
        raise ValueError("polynomial solutions require l >= 1")
    m = _companion_block(p)
    scale = max(np.max(np.abs(m)), 1.0)
    d = float(np.linalg.det(m))
    zero_thresh = 1e-10 * scale**p.l
    gray_thresh = 1e-6 * scale**p.l
    if abs(d) >= gray_thresh:
        return None
    if abs(d) >= zero_thresh:
        raise UndeterminedResultError(
            f"companion determinant {d:.3e} in the gray zone "
            f"[{zero_thresh:.3e}, {gray_thresh:.3e}) at lam={p.lam}, mu={p.mu}"
        )
    if p.l == 1:
        vec = np.array([1.0])
    else:
        _, _, vt = np.linalg.svd(m)
        vec = vt[-1]
        idx = int(np.argmax(np.abs(vec)))
        vec = vec / vec[idx]
    residual = float(np.max(np.abs(m @ vec)) / np.max(np.abs(vec)))
    return PolySolution(coeffs=vec, kernel_residual=residual)


def poly_existence_lambdas(l: int, mu: float, refine_tol: float = 1e-12) -> list[float]:
    """All lambda at which the companion equation has a polynomial solution.

    The block is T + lambda I with T independent of lambda, so the roots
    are the eigenvalues of -T (real: T is sign-similar to a symmetric
    tridiagonal).  Each eigenvalue is polished by bisection on det(block).
    """
    if l < 1:
        raise ValueError("l must be >= 1")
    if not mu > 0:
        raise ValueError("mu must be positive")
    t = _companion_block(HeunParams(l=l, lam=0.0, mu=mu))
    eigs = np.linalg.eigvals(-t)
    if np.max(np.abs(eigs.imag)) > 1e-9 * max(1.0, np.max(np.abs(eigs))):
        raise InternalConsistencyError("companion block produced complex roots")
    roots = sorted(float(v) for v in eigs.real)

    def block_det(lam: float) -> float:
        return float(np.linalg.det(_companion_block(HeunParams(l=l, lam=lam, mu=mu))))

    gap = min([b - a for a, b in zip(roots, roots[1:])], default=1.0)
    half = max(min(0.45 * gap, 0.5), 16 * refine_tol)
    polished = []
    for r in roots:
        lo, hi = r - half, r + half
        flo, fhi = block_det(lo), block_det(hi)
        if flo == 0.0:
            polished.append(lo)
            continue
        if fhi == 0.0 or flo * fhi > 0:
            polished.append(r)  # eigenvalue already at working accuracy
            continue
        while hi - lo > refine_tol * max(1.0, abs(r)):
            mid = 0.5 * (lo + hi)
            fm = block_det(mid)
            if fm == 0.0:
                lo = hi = mid
                break
            if flo * fm < 0:
                hi, fhi = mid, fm
            else:
                lo, flo = mid, fm
        polished.append(0.5 * (lo + hi))
    return polished


# --------------------------------------------------------------------------
# the exponential transform and its Bessel-matrix expression

def _romb_via_convolution(coeffs: np.ndarray, mu: float, l: int) -> np.ndarray:
    """Laurent coefficients at z^{-l}..z^{-1} of e^{mu(z+1/z)} Ehat(-1/z).

    Builds e^{mu z} and e^{mu / z} as explicit truncated exponential
    series and convolves; no Bessel evaluation is involved.
    """
    P = int(math.e * mu + 60)
    c = np.empty(P + 1)
    c[0] = 1.0
    for i in range(1, P + 1):
        c[i] = c[i - 1] * mu / i
    # conv1[j + P] = coefficient of z^j in e^{mu z} e^{mu/z}, j in [-P, P]
    conv1 = np.zeros(2 * P + 1)
    for p_ in range(P + 1):
        for q in range(P + 1):
            conv1[p_ - q + P] += c[p_] * c[q]
    out = np.zeros(l)
    for s in range(-l, 0):
        acc = 0.0
        for m_ in range(l):
            j = s + m_
            if -P <= j <= P:
                acc += conv1[j + P] * coeffs[m_] * ((-1.0) ** m_)
        out[s + l] = acc
    return out


def _romb_via_bessel_matrix(
    coeffs: np.ndarray, mu: float, l: int, prec: Precision
) -> np.ndarray:
    """Same coefficients through the Bessel matrix with k=(l..1), n=(l-1..0).

    Entry (i, j) of that matrix is I_{i-j+1}(2 mu); the polynomial vector
    enters with alternating signs.
    """
    vec = np.array([((-1.0) ** m) * coeffs[m] for m in range(l)])
    out = np.zeros(l)
    for i in range(1, l + 1):
        acc = 0.0
        for j in range(1, l + 1):
            acc += bessel_i(i - j + 1, 2.0 * mu, prec) * vec[j - 1]
        out[l - i] = acc  # position of s = -i in the s = -l..-1 ordering
    return out


def romb_laurent_coeffs(
    poly: PolySolution,
    mu: float,
    l: int,
    prec: Precision = DEFAULT_PRECISION,
) -> np.ndarray:
    """Laurent coefficients at z^s, s = -l..-1, of the transformed polynomial.

    Computed independently by exponential-series convolution and by the
    Bessel-matrix product; the two must agree or an
    InternalConsistencyError is raised.
    """
    if not mu > 0:
        raise ValueError("mu must be positive")
    coeffs = np.asarray(poly.coeffs, dtype=float)
    if len(coeffs) != l:
        raise ValueError(f"expected {l} coefficients, got {len(coeffs)}")
    if not np.any(coeffs):
        return np.zeros(l)
    a = _romb_via_convolution(coeffs, mu, l)
    b = _romb_via_bessel_matrix(coeffs, mu, l, prec)
    scale = max(1.0, float(np.max(np.abs(a))), float(np.max(np.abs(b))))
    if float(np.max(np.abs(a - b))) > 1e-10 * scale:
        raise InternalConsistencyError(
            f"transform paths disagree: convolution {a} vs matrix {b}"
        )
    return a


def delta_det(l: int, x: float, prec: Precision = DEFAULT_PRECISION) -> SignedDet:
    """The determinant for k = (l, ..., 1), n = (l-1, ..., 0); positive for x > 0."""
    if l < 1:
        raise ValueError("l must be >= 1")
    k = tuple(range(l, 0, -1))
    n = tuple(range(l - 1, -1, -1))
    return det_f(k, n, x, prec)
