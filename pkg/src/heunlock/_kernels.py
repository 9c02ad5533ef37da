"""Numba kernels: hot loops for matrix products and torus integration.

Everything here is deterministic: fixed-step integrators, no fastmath,
grid results written by cell index.  Pure-Python callers own all
validation and all tolerance-to-step-size policy beyond `_steps_per_period`.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

TWO_PI = 2.0 * np.pi


@njit(cache=True)
def product_extend(l, lam, mu2, j_start, j_end, p00, p01, p10, p11):
    """Multiply the running 2x2 product by M_j for j = j_start..j_end.

    M_j = [[1 + lam/(j(j-l)), mu2/(j(j-l))], [1, 0]]; factors with larger
    j multiply on the right.
    """
    for j in range(j_start, j_end + 1):
        q = float(j) * float(j - l)
        a = 1.0 + lam / q
        b = mu2 / q
        n00 = p00 * a + p01
        n01 = p00 * b
        n10 = p10 * a + p11
        n11 = p10 * b
        p00, p01, p10, p11 = n00, n01, n10, n11
    return p00, p01, p10, p11


# ---------------------------------------------------------------------------
# double-double (compensated) arithmetic: the matrix products pass through
# intermediate entries many orders of magnitude above the final values, so
# plain doubles commit absolute rounding at the peak scale that swamps the
# function near its zeros; ~106 mantissa bits remove that floor at numba
# speed.  Standard Dekker/Knuth error-free transforms.

@njit(cache=True, inline="always")
def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


@njit(cache=True, inline="always")
def _quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


@njit(cache=True, inline="always")
def _two_prod(a, b):
    p = a * b
    c = 134217729.0 * a
    ahi = c - (c - a)
    alo = a - ahi
    c = 134217729.0 * b
    bhi = c - (c - b)
    blo = b - bhi
    return p, ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo


@njit(cache=True, inline="always")
def _dd_add(ah, al, bh, bl):
    s, e = _two_sum(ah, bh)
    e += al + bl
    return _quick_two_sum(s, e)


@njit(cache=True, inline="always")
def _dd_mul(ah, al, bh, bl):
    p, e = _two_prod(ah, bh)
    e += ah * bl + al * bh
    return _quick_two_sum(p, e)


@njit(cache=True, inline="always")
def _dd_div_d(ah, al, b):
    q1 = ah / b
    p, e = _two_prod(q1, b)
    q2 = (((ah - p) - e) + al) / b
    return _quick_two_sum(q1, q2)


@njit(cache=True)
def product_extend_dd(l, lam, mu2, j_start, j_end, state):
    """Double-double version of product_extend.

    state holds (hi, lo) pairs of the four entries row-major, plus the
    running peak magnitude of the first column in slot 8 (the rounding
    committed at the peak scale is the accuracy floor of the result).
    """
    p00h, p00l = state[0], state[1]
    p01h, p01l = state[2], state[3]
    p10h, p10l = state[4], state[5]
    p11h, p11l = state[6], state[7]
    peak = state[8]
    for j in range(j_start, j_end + 1):
        q = float(j) * float(j - l)
        dh, dl = _dd_div_d(lam, 0.0, q)
        ah, al = _dd_add(1.0, 0.0, dh, dl)
        bh, bl = _dd_div_d(mu2, 0.0, q)
        th, tl = _dd_mul(p00h, p00l, ah, al)
        n00h, n00l = _dd_add(th, tl, p01h, p01l)
        n01h, n01l = _dd_mul(p00h, p00l, bh, bl)
        th, tl = _dd_mul(p10h, p10l, ah, al)
        n10h, n10l = _dd_add(th, tl, p11h, p11l)
        n11h, n11l = _dd_mul(p10h, p10l, bh, bl)
        p00h, p00l = n00h, n00l
        p01h, p01l = n01h, n01l
        p10h, p10l = n10h, n10l
        p11h, p11l = n11h, n11l
        m = abs(p00h)
        if abs(p10h) > m:
            m = abs(p10h)
        if m > peak:
            peak = m
    out = np.empty(9)
    out[0] = p00h
    out[1] = p00l
    out[2] = p01h
    out[3] = p01l
    out[4] = p10h
    out[5] = p10l
    out[6] = p11h
    out[7] = p11l
    out[8] = peak
    return out


@njit(cache=True)
def xi_from_state_dd(lam, mu2, state):
    """(lam mu^2) . P . (1 0)^T in double-double, rounded once at the end."""
    th, tl = _dd_mul(lam, 0.0, state[0], state[1])
    uh, ul = _dd_mul(mu2, 0.0, state[4], state[5])
    rh, rl = _dd_add(th, tl, uh, ul)
    return rh + rl


@njit(cache=True)
def backward_defect_dd(l, lam, mu, N):
    """Double-double variant of backward_defect (same contract).

    The recurrence coefficients are themselves assembled error-free
    (two_prod / two_sum) so no per-step 1-ulp perturbation sneaks in.
    """
    hih, hil = 0.0, 0.0
    loh, lol = 1.0, 0.0
    biggest = 1.0
    for n in range(N, 0, -1):
        cph, cpl = _two_prod(mu, float(n + 1))
        czh, czl = _two_sum(float(n) * float(n + l), lam)
        cmh, cml = _two_prod(mu, float(n + l))
        t1h, t1l = _dd_mul(cph, cpl, hih, hil)
        t2h, t2l = _dd_mul(czh, czl, loh, lol)
        sh, sl = _dd_add(t1h, t1l, t2h, t2l)
        # divide the dd sum by the dd coefficient: one Newton correction
        q1 = sh / cmh
        ph, pl = _dd_mul(cmh, cml, q1, 0.0)
        rh, rl = _dd_add(sh, sl, -ph, -pl)
        nh, nl = _quick_two_sum(q1, (rh + rl) / cmh)
        hih, hil = loh, lol
        loh, lol = nh, nl
        mag = abs(loh)
        if mag > biggest:
            biggest = mag
        if mag > 1e250:
            hih /= mag
            hil /= mag
            loh /= mag
            lol /= mag
            biggest /= mag
    t1h, t1l = _dd_mul(mu, 0.0, hih, hil)
    t2h, t2l = _dd_mul(lam, 0.0, loh, lol)
    sh, sl = _dd_add(t1h, t1l, t2h, t2l)
    return (sh + sl) / biggest


@njit(cache=True)
def backward_defect(l, lam, mu, N):
    """Miller backward pass a_N = 1, a_{N+1} = 0 for the primary Heun
    recurrence; returns (mu a_1 + lam a_0) / max |a_n|, the residual of
    the unused n = 0 relation.  Only the running pair is kept, rescaled
    when it grows, so the cost is O(N) regardless of coefficient growth.
    """
    hi = 0.0  # a_{n+1}
    lo = 1.0  # a_n
    biggest = 1.0
    for n in range(N, 0, -1):
        nxt = (mu * (n + 1) * hi + (n * (n + l) + lam) * lo) / (mu * (n + l))
        hi = lo
        lo = nxt
        mag = abs(lo)
        if mag > biggest:
            biggest = mag
        if mag > 1e250:
            hi /= mag
            lo /= mag
            biggest /= mag
    # lo = a_0, hi = a_1 at the same running scale as biggest
    return (mu * hi + lam * lo) / biggest


@njit(cache=True)
def rk4_phase(omega, lpar, mu, phi0, tau0, h, nsteps):
    """Classical RK4 for dphi/dtau = -sin(phi)/omega + l + 2 mu cos(tau)."""
    phi = phi0
    tau = tau0
    inv_om = 1.0 / omega
    twomu = 2.0 * mu
    half = 0.5 * h
    sixth = h / 6.0
    for _ in range(nsteps):
        c0 = twomu * np.cos(tau)
        ch = twomu * np.cos(tau + half)
        c1 = twomu * np.cos(tau + h)
        k1 = -np.sin(phi) * inv_om + lpar + c0
        k2 = -np.sin(phi + half * k1) * inv_om + lpar + ch
        k3 = -np.sin(phi + half * k2) * inv_om + lpar + ch
        k4 = -np.sin(phi + h * k3) * inv_om + lpar + c1
        phi += sixth * (k1 + 2.0 * (k2 + k3) + k4)
        tau += h
    return phi


@njit(cache=True)
def field_scale(omega, lpar, mu):
    """Crude bound on the phase rate, used to pick step sizes."""
    return 1.0 / omega + abs(lpar) + 2.0 * abs(mu) + 2.0


@njit(cache=True)
def _steps_per_period(omega, lpar, mu, rho_tol):
    """Steps so the RK4 drift contributes <= rho_tol to the rotation number.

    Per unit tau the local error is about (s^4 F)/120 for phase advance s
    per step and field scale F; s is clamped to [0.02, 0.25].
    """
    F = field_scale(omega, lpar, mu)
    s = 0.8 * (120.0 * rho_tol / F) ** 0.25
    if s > 0.25:
        s = 0.25
    if s < 0.02:
        s = 0.02
    n = int(np.ceil(TWO_PI * F / s))
    if n < 96:
        n = 96
    return n


@njit(cache=True)
def rotation_lift_windowed(omega, lpar, mu, periods, window, rho_tol):
    """Windowed lift average: (mean of phi over the last `window` period
    marks minus mean over the first `window`) / (2 pi periods).

    Restarting tau at 0 each period keeps the forcing exactly periodic.
    """
    spp = _steps_per_period(omega, lpar, mu, rho_tol)
    h = TWO_PI / spp
    phi = 0.0
    head = 0.0
    tail = 0.0
    last = periods + window - 1
    for n in range(last + 1):
        if n < window:
            head += phi
        if n >= periods:
            tail += phi
        if n < last:
            phi = rk4_phase(omega, lpar, mu, phi, 0.0, h, spp)
    return (tail - head) / (window * TWO_PI * periods)


@njit(cache=True, parallel=True)
def portrait_rho(omega, bs, as_, periods, window, rho_tol):
    """Rotation-number estimates on the (B, A) grid.

    The flat parallel index walks columns-first so static scheduling mixes
    cheap (small A) and expensive (large A) cells across threads; each
    cell writes its own slot, so results are thread-count independent.
    """
    nb = bs.shape[0]
    na = as_.shape[0]
    out = np.empty((na, nb))
    total = na * nb
    for idx in prange(total):
        ia = idx % na
        ib = idx // na
        mu = as_[ia] / (2.0 * omega)
        lpar = bs[ib] / omega
        out[ia, ib] = rotation_lift_windowed(omega, lpar, mu, periods, window, rho_tol)
    return out
