"""Determinants of Bessel matrices over two-sided Young diagrams.

A two-sided Young diagram of order l is a strictly decreasing integer
tuple k = (k_1, ..., k_l).  For a pair (k, n) the matrix A has entries
a_ij = I_{k_j - n_i}(x) and f_{k,n}(x) = det A.  These determinants are
positive for every such pair and every x > 0; the module certifies that
sign numerically with interval arithmetic, checks the lattice ODE

    d f_{k,n} / dx = (discrete Laplacian + 2l) f  (with f = 0 on repeats)

by finite differences, and cross-validates the determinants against the
Laurent coefficients of Delta_n(z) * prod_i M(a; z_i).

All operations are pure functions of their inputs.  The certified paths
run on mpmath interval arithmetic, whose precision setting is a global
context: concurrent callers should stick to one process per scan (scans
themselves aggregate deterministically in index order).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from itertools import combinations, permutations

from mpmath import iv, mp

from .errors import PositivityContradictionError
from .specfun import DEFAULT_PRECISION, Precision, bessel_table

__all__ = [
    "Diagram",
    "SignedDet",
    "LatticeWindow",
    "ScanReport",
    "as_diagram",
    "delta_diagram",
    "diagrams_in_box",
    "build_matrix",
    "det_f",
    "det_f_signed",
    "positivity_scan",
    "laplacian_rhs",
    "ode_residual",
    "hilbert_norm_partial",
    "generating_coeff_oracle",
    "vandermonde_delta",
    "schur_identity_check",
]

Diagram = tuple[int, ...]

#: escalation ceiling for sign certification (working precision in bits)
MAX_CERT_BITS = 512


def as_diagram(parts) -> Diagram:
    """Validate strict decrease and return the tuple."""
    t = tuple(int(p) for p in parts)
    if not t:
        raise ValueError("diagram must be nonempty")
    if any(a <= b for a, b in zip(t, t[1:])):
        raise ValueError(f"diagram components must strictly decrease, got {t}")
    return t


def delta_diagram(l: int) -> Diagram:
    """The staircase (l-1, l-2, ..., 0)."""
    if l < 1:
        raise ValueError("l must be >= 1")
    return tuple(range(l - 1, -1, -1))


def diagrams_in_box(l: int, radius: int):
    """All order-l diagrams with components in [-radius, radius]."""
    rng = range(-radius, radius + 1)
    return [tuple(reversed(c)) for c in combinations(rng, l)]


@dataclass(frozen=True)
class SignedDet:
    """Determinant value with rigorous error bound and certified sign.

    sign == "positive" implies value - err > 0; "undetermined" means the
    enclosing interval straddles 0 after precision escalation.
    """

    value: float
    err: float
    sign: str  # positive | negative | zero | undetermined


# --------------------------------------------------------------------------
# interval Bessel entries and permutation-expansion determinants

_iv_cache: dict[tuple[str, int], list] = {}
_parity_cache: dict[int, list] = {}


def _signed_perms(l: int):
    if l > 6:
        raise ValueError("permutation expansion is limited to l <= 6")
    if l not in _parity_cache:
        out = []
        for perm in permutations(range(l)):
            inv = sum(
                1 for i in range(l) for j in range(i + 1, l) if perm[i] > perm[j]
            )
            out.append((perm, -1.0 if inv % 2 else 1.0))
        _parity_cache[l] = out
    return _parity_cache[l]


def _iv_bessel(j: int, x: float, bits: int):
    """Rigorous interval enclosure of I_j(x) via the positive-term series."""
    j = abs(j)
    key = (float(x).hex(), bits)
    cache = _iv_cache.setdefault(key, [])
    if j < len(cache):
        return cache[j]
    old = iv.prec
    try:
        iv.prec = bits
        xi = iv.mpf(x)
        y = xi / 2
        for jj in range(len(cache), j + 1):
            term = iv.mpf(1)
            for i in range(1, jj + 1):
                term = term * y / i
            s = term
            k = 0
            cutoff = mp.mpf(2) ** (-bits - 8)
            while True:
                k += 1
                term = term * y * y / (k * (jj + k))
                s = s + term
                ratio = (x / 2.0) ** 2 / ((k + 1) * (jj + k + 1))
                if ratio < 0.5 and term.b < cutoff * max(s.a, mp.mpf(1e-300)):
                    # tail of a positive-term series with ratio < 1/2
                    s = s + (term * (2.0 * ratio)) * iv.mpf([0, 1])
                    break
                if k > 100_000:
                    break
            cache.append(s)
    finally:
        iv.prec = old
    return cache[j]


def _det_interval(k: Diagram, n: Diagram, x: float, bits: int):
    """Interval enclosure of f_{k,n}(x) by full permutation expansion."""
    l = len(k)
    old = iv.prec
    try:
        iv.prec = bits
        ent = [[_iv_bessel(k[c] - n[r], x, bits) for c in range(l)] for r in range(l)]
        total = iv.mpf(0)
        for perm, sgn in _signed_perms(l):
            prod = ent[0][perm[0]]
            for r in range(1, l):
                prod = prod * ent[r][perm[r]]
            total = total + prod if sgn > 0 else total - prod
    finally:
        iv.prec = old
    return total


def _classify(d) -> tuple[float, float, str]:
    value = float(d.mid)
    err = float(d.delta) / 2.0
    if d.a > 0:
        return value, err, "positive"
    if d.b < 0:
        return value, err, "negative"
    if d.a == 0 and d.b == 0:
        return 0.0, 0.0, "zero"
    return value, err, "undetermined"


def build_matrix(k, n, x: float, prec: Precision = DEFAULT_PRECISION):
    """The l x l matrix with entry (i, j) = I_{k_j - n_i}(x), as floats."""
    k = as_diagram(k)
    n = as_diagram(n)
    if len(k) != len(n):
        raise ValueError(f"k and n must have equal length, got {len(k)} and {len(n)}")
    jmax = max(abs(kj - ni) for kj in k for ni in n)
    tab = bessel_table(jmax, x, prec, method="series")
    return [[tab[kj - ni] for kj in k] for ni in n]


def det_f(
    k,
    n,
    x: float,
    prec: Precision = DEFAULT_PRECISION,
    max_bits: int = MAX_CERT_BITS,
) -> SignedDet:
    """f_{k,n}(x) with certified sign.

    Evaluates in interval arithmetic at prec.bits, doubling the working
    precision up to max_bits until the enclosure excludes zero.  For x > 0
    a certified non-positive sign is impossible and raises
    PositivityContradictionError.
    """
    k = as_diagram(k)
    n = as_diagram(n)
    if len(k) != len(n):
        raise ValueError(f"k and n must have equal length, got {len(k)} and {len(n)}")
    if x < 0:
        raise ValueError(f"x must be >= 0, got {x}")
    bits = max(prec.bits, 53)
    while True:
        value, err, sign = _classify(_det_interval(k, n, x, bits))
        if sign != "undetermined":
            break
        if bits >= max_bits:
            break
        bits = min(2 * bits, max_bits)
    if x > 0 and sign in ("negative", "zero"):
        raise PositivityContradictionError(
            f"f_{{{k},{n}}}({x}) certified {sign}: value={value}, err={err}"
        )
    return SignedDet(value=value, err=err, sign=sign)


def _sort_parity(t):
    """Sort descending; return (sorted tuple, parity of the permutation)."""
    lst = list(t)
    parity = 0
    for i in range(1, len(lst)):
        j = i
        while j > 0 and lst[j - 1] < lst[j]:
            lst[j - 1], lst[j] = lst[j], lst[j - 1]
            parity ^= 1
            j -= 1
    return tuple(lst), parity


def det_f_signed(
    k,
    n,
    x: float,
    prec: Precision = DEFAULT_PRECISION,
) -> SignedDet:
    """f_{k,n} for arbitrary integer tuples.

    Zero on repeated components; otherwise sorts both tuples to diagrams
    and applies the permutation sign rule.
    """
    k = tuple(int(p) for p in k)
    n = tuple(int(p) for p in n)
    if len(k) != len(n):
        raise ValueError(f"k and n must have equal length, got {len(k)} and {len(n)}")
    if len(set(k)) < len(k) or len(set(n)) < len(n):
        return SignedDet(value=0.0, err=0.0, sign="zero")
    ks, pk = _sort_parity(k)
    ns, pn = _sort_parity(n)
    base = det_f(ks, ns, x, prec)
    if (pk + pn) % 2 == 0:
        return base
    flip = {"positive": "negative", "negative": "positive"}.get(base.sign, base.sign)
    return SignedDet(value=-base.value, err=base.err, sign=flip)


# --------------------------------------------------------------------------
# positivity scans

@dataclass
class ScanReport:
    """Outcome of a certified positivity scan over (k, n, x) triples."""

    l: int
    radius: int
    xs: tuple
    rows: list = field(repr=False)  # (k, n, x, value, err, sign)
    unresolved: list
    min_certified: float
    complete: bool
    all_positive: bool

    @property
    def total(self) -> int:
        return len(self.rows)

    def to_csv(self, fh) -> None:
        w = csv.writer(fh)
        w.writerow(["k", "n", "x", "value", "err", "sign"])
        for k, n, x, value, err, sign in self.rows:
            w.writerow(
                [
                    ";".join(map(str, k)),
                    ";".join(map(str, n)),
                    f"{x:.12g}",
                    f"{value:.12g}",
                    f"{err:.12g}",
                    sign,
                ]
            )


def positivity_scan(
    l: int,
    radius: int,
    xs,
    prec: Precision = DEFAULT_PRECISION,
    max_bits: int = MAX_CERT_BITS,
) -> ScanReport:
    """Certify f_{k,n}(x) > 0 for all order-l diagram pairs in the box.

    Scans every pair of diagrams with components in [-radius, radius] at
    every x in xs.  Undetermined signs that survive escalation are listed
    and mark the scan incomplete.
    """
    if not 1 <= l <= 4:
        raise ValueError("scan budget covers 1 <= l <= 4")
    if not 1 <= radius <= 8:
        raise ValueError("scan budget covers 1 <= radius <= 8")
    xs = tuple(float(x) for x in xs)
    if any(x <= 0 for x in xs):
        raise ValueError("positivity scan requires x > 0")
    diags = diagrams_in_box(l, radius)
    rows = []
    unresolved = []
    min_cert = math.inf
    for x in xs:
        for k in diags:
            for n in diags:
                sd = det_f(k, n, x, prec, max_bits)
                rows.append((k, n, x, sd.value, sd.err, sd.sign))
                if sd.sign == "undetermined":
                    unresolved.append((k, n, x))
                else:
                    min_cert = min(min_cert, sd.value - sd.err)
    complete = not unresolved
    all_positive = complete and all(r[5] == "positive" for r in rows)
    return ScanReport(
        l=l,
        radius=radius,
        xs=xs,
        rows=rows,
        unresolved=unresolved,
        min_certified=min_cert,
        complete=complete,
        all_positive=all_positive,
    )


# --------------------------------------------------------------------------
# lattice window and the discrete-Laplacian ODE

@dataclass(frozen=True)
class LatticeWindow:
    """Finite window of a function on order-l diagrams.

    entries maps every diagram with components in [-radius, radius] to a
    value; lookups at tuples with repeated components return 0 by the
    repeated-component convention.
    """

    l: int
    radius: int
    entries: dict = field(repr=False)

    @classmethod
    def from_function(cls, l: int, radius: int, fn) -> "LatticeWindow":
        return cls(l=l, radius=radius, entries={k: fn(k) for k in diagrams_in_box(l, radius)})

    def value(self, k) -> float:
        k = tuple(int(p) for p in k)
        if len(set(k)) < len(k):
            return 0.0
        if k not in self.entries:
            raise ValueError(f"{k} lies outside the window (radius {self.radius})")
        return self.entries[k]


def _neighbors(k: Diagram):
    for s in range(len(k)):
        for step in (-1, 1):
            yield k[:s] + (k[s] + step,) + k[s + 1 :]


def laplacian_rhs(w: LatticeWindow, k) -> float:
    """Right-hand side sum_s [f(k - e_s) + f(k + e_s)] at an interior diagram.

    The -2l f and +2l f contributions of the Laplacian and of the zeroth
    order term cancel, leaving the plain neighbor sum; each neighbor enters
    with coefficient +1, repeats contribute 0.
    """
    k = as_diagram(k)
    if len(k) != w.l:
        raise ValueError(f"diagram order {len(k)} does not match window order {w.l}")
    total = 0.0
    for nb in _neighbors(k):
        if len(set(nb)) < len(nb):
            continue
        if any(abs(c) > w.radius for c in nb):
            raise ValueError(f"{k} is a boundary diagram of the window")
        total += w.value(nb)
    return total


def ode_residual(
    k,
    n,
    x: float,
    h: float,
    prec: Precision = DEFAULT_PRECISION,
) -> float:
    """|centered difference of f_{k,n} minus the lattice ODE right side|.

    Differentiating the determinant column by column through
    I' = (I_{j-1} + I_{j+1})/2 gives df/dx = (1/2) sum over +-1 component
    shifts of k of f_{k',n}(x), with the repeats-to-zero convention; the
    residual is O(h^2) for the true solution.
    """
    if not 0 < h <= 1e-3:
        raise ValueError(f"h must lie in (0, 1e-3], got {h}")
    if x <= h:
        raise ValueError(f"need x > h, got x={x}, h={h}")
    k = as_diagram(k)
    n = as_diagram(n)
    fd = (det_f(k, n, x + h, prec).value - det_f(k, n, x - h, prec).value) / (2.0 * h)
    rhs = 0.0
    for nb in _neighbors(k):
        rhs += det_f_signed(nb, n, x, prec).value
    return abs(fd - 0.5 * rhs)


def hilbert_norm_partial(
    n,
    x: float,
    radius: int,
    prec: Precision = DEFAULT_PRECISION,
) -> float:
    """sum |f_{k,n}(x)|^2 over diagrams k with components in [-radius, radius]."""
    n = as_diagram(n)
    if radius < max(abs(c) for c in n):
        raise ValueError("radius must cover the components of n")
    total = 0.0
    for k in diagrams_in_box(len(n), radius):
        v = det_f(k, n, x, prec).value
        total += v * v
    return total


# --------------------------------------------------------------------------
# generating-function oracle and Schur identities

def generating_coeff_oracle(
    n,
    k,
    x: float,
    J: int,
    prec: Precision = DEFAULT_PRECISION,
) -> float:
    """Laurent coefficient of z^k in Delta_n(z) * prod_i M(a; z_i).

    Computed by honest truncated multivariate Laurent multiplication with
    a_j = I_j(x) for |j| <= J; independent of the determinant path and
    must agree with det_f within combined tolerance.
    """
    n = as_diagram(n)
    k = as_diagram(k)
    l = len(n)
    if len(k) != l:
        raise ValueError("k and n must have equal length")
    if l > 3:
        raise ValueError("oracle is limited to l <= 3")
    need = max(abs(c) for c in k) + max(abs(c) for c in n) + 20
    if J < need:
        raise ValueError(f"J={J} too small, need >= {need}")
    tab = bessel_table(J, x, prec)
    # Delta_n(z) as a sparse Laurent polynomial: exponent tuple -> coeff
    poly: dict[tuple, float] = {}
    for perm, sgn in _signed_perms(l):
        expo = tuple(n[perm[c]] for c in range(l))
        poly[expo] = poly.get(expo, 0.0) + sgn
    for axis in range(l):
        nxt: dict[tuple, float] = {}
        for expo, coef in poly.items():
            for j in range(-J, J + 1):
                aj = tab[j]
                if aj == 0.0:
                    continue
                e2 = expo[:axis] + (expo[axis] + j,) + expo[axis + 1 :]
                nxt[e2] = nxt.get(e2, 0.0) + coef * aj
        poly = nxt
    return poly.get(k, 0.0)


def vandermonde_delta(n, z) -> complex:
    """Generalized Vandermonde determinant det(z_c^{n_r})."""
    n = tuple(int(p) for p in n)
    z = tuple(complex(w) for w in z)
    l = len(n)
    if len(z) != l:
        raise ValueError("n and z must have equal length")
    if any(w == 0 for w in z) and any(e < 0 for e in n):
        raise ValueError("zero z_i with negative exponent")
    ent = [[z[c] ** n[r] for c in range(l)] for r in range(l)]
    total = 0.0 + 0.0j
    for perm, sgn in _signed_perms(l):
        prod = 1.0 + 0.0j
        for r in range(l):
            prod *= ent[r][perm[r]]
        total += sgn * prod
    return total


def _series_value(w: complex, tab, J: int) -> complex:
    """Truncated generating function sum_{|j|<=J} I_j(x) w^j."""
    val = tab[0] + 0.0j
    wp = 1.0 + 0.0j
    wm = 1.0 + 0.0j
    for j in range(1, J + 1):
        wp *= w
        wm /= w
        val += tab[j] * (wp + wm)
    return val


def schur_identity_check(lam, n_base, x: float, z, J: int) -> float:
    """|M_{n+lam}(a; z) - s(z) M_n(a; z)| with s = Delta_{n+lam}/Delta_n.

    Both sides use the truncated series M(a; w) = sum_{|j|<=J} I_j(x) w^j;
    the result must sit below truncation tolerance when |z_i| = 1.
    """
    n_base = as_diagram(n_base)
    lam = tuple(int(p) for p in lam)
    l = len(n_base)
    if len(lam) != l:
        raise ValueError("lam and n_base must have equal length")
    shifted = tuple(a + b for a, b in zip(n_base, lam))
    z = tuple(complex(w) for w in z)
    if len(z) != l:
        raise ValueError("z must have length l")
    tab = bessel_table(J, x)
    prod = 1.0 + 0.0j
    for w in z:
        prod *= _series_value(w, tab, J)
    d_base = vandermonde_delta(n_base, z)
    d_shift = vandermonde_delta(shifted, z)
    if d_base == 0:
        raise ValueError("z_i must be pairwise distinct (Delta_n vanished)")
    lhs = d_shift * prod
    rhs = (d_shift / d_base) * (d_base * prod)
    return abs(lhs - rhs)
