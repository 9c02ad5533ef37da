import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from heunlock.errors import ConvergenceError
from heunlock.heunrec import HeunParams, entire_solution_defect, poly_existence_lambdas
from heunlock.xiprod import (
    josephson_lambda_mu,
    m_j,
    polish_root_by_defect,
    r_m,
    xi_l,
    xi_roots_on_line,
)

import oracles


class TestFactorMatrix:
    def test_first_factor(self):
        p = HeunParams(l=2, lam=0.5, mu=1.5)
        m = m_j(3, p)
        q = 3.0 * 1.0
        assert m[0, 0] == pytest.approx(1 + 0.5 / q)
        assert m[0, 1] == pytest.approx(2.25 / q)
        assert m[1, 0] == 1.0 and m[1, 1] == 0.0

    def test_limit_matrix(self):
        p = HeunParams(l=0, lam=1e-12, mu=1e-8)
        m = m_j(10**6, p)
        assert np.max(np.abs(m - np.array([[1.0, 0.0], [1.0, 0.0]]))) < 1e-12

    def test_domain_error(self):
        p = HeunParams(l=3, lam=0.0, mu=1.0)
        with pytest.raises(ValueError):
            m_j(3, p)
        with pytest.raises(ValueError):
            m_j(0, p)

    @given(st.integers(1, 50))
    def test_second_row_structure(self, j):
        p = HeunParams(l=0, lam=0.7, mu=0.4)
        m = m_j(j, p)
        assert m[1, 0] == 1.0 and m[1, 1] == 0.0


class TestProduct:
    def test_idempotent_limit(self):
        p = HeunParams(l=0, lam=1e-300, mu=1e-300)
        tp = r_m(1, p, tol=1e-10)
        assert np.max(np.abs(tp.value - np.array([[1.0, 0.0], [1.0, 0.0]]))) < 1e-12

    def test_self_consistency_within_tail(self):
        p = HeunParams(l=0, lam=0.25, mu=0.1)
        a = r_m(1, p, tol=1e-5)
        b = r_m(1, p, tol=2.5e-6)
        assert np.max(np.abs(a.value - b.value)) <= a.tail_est

    def test_nesting_relation(self):
        # R_m = M_m R_{m+1} within combined tolerance
        p = HeunParams(l=1, lam=-0.8, mu=0.6)
        for m in range(2, 12):
            rm = r_m(m, p, tol=1e-6)
            rn = r_m(m + 1, p, tol=1e-6)
            lhs = rm.value
            rhs = m_j(m, p) @ rn.value
            assert np.max(np.abs(lhs - rhs)) < 4 * (rm.tail_est + rn.tail_est)

    def test_row_shift_structure(self):
        # second row of M_m ... M_J equals first row of M_{m+1} ... M_J
        p = HeunParams(l=0, lam=0.3, mu=0.2)
        prod_from = lambda m, J: np.linalg.multi_dot([m_j(j, p) for j in range(m, J)])
        full = prod_from(1, 40)
        tail = prod_from(2, 40)
        assert np.allclose(full[1], tail[0], rtol=0, atol=1e-14)

    def test_cauchy_rate(self):
        # doubling increments shrink like 1/J
        from heunlock._kernels import product_extend

        p = HeunParams(l=0, lam=0.25, mu=0.1)
        diffs = []
        state = product_extend(0, p.lam, p.mu**2, 1, 1000, 1.0, 0.0, 0.0, 1.0)
        J = 1000
        for _ in range(4):
            nxt = product_extend(0, p.lam, p.mu**2, J + 1, 2 * J, *state)
            diffs.append(max(abs(a - b) for a, b in zip(nxt, state)))
            state = nxt
            J *= 2
        for a, b in zip(diffs, diffs[1:]):
            assert b < 0.75 * a

    def test_unreachable_tol_raises(self):
        p = HeunParams(l=0, lam=0.25, mu=0.1)
        with pytest.raises(ConvergenceError):
            r_m(1, p, tol=1e-13, cap=10**5)

    def test_m_validation(self):
        p = HeunParams(l=2, lam=0.0, mu=1.0)
        with pytest.raises(ValueError):
            r_m(2, p, tol=1e-6)


class TestXi:
    def test_left_vector_vanishes(self):
        v, err = xi_l(HeunParams(l=0, lam=0.0, mu=1e-12))
        assert abs(v) < 1e-20

    def test_closed_form_at_small_mu(self):
        for l in (0, 1, 2, 3):
            for lam in (0.25, -0.5, 2.0, -3.7, 5.5):
                v, err = xi_l(HeunParams(l=l, lam=lam, mu=1e-9), tol=1e-8)
                ref = oracles.xi_mu_zero(l, lam)
                assert v == pytest.approx(ref, abs=max(4 * err, 1e-9 * abs(ref)))

    def test_err_is_honest_against_finer_run(self):
        for lam, mu in ((0.25, 0.4), (-2.3, 1.1), (3.0, 2.0)):
            p = HeunParams(l=1, lam=lam, mu=mu)
            v1, e1 = xi_l(p, tol=1e-6)
            v2, e2 = xi_l(p, tol=1e-9)
            assert abs(v1 - v2) <= e1 + e2

    def test_zero_locus_matches_euler_roots(self):
        # sign change of xi across lam = -r(r+l) at tiny mu
        for l, lam0 in ((0, -1.0), (1, -2.0), (2, -3.0)):
            lo, _ = xi_l(HeunParams(l=l, lam=lam0 - 1e-3, mu=1e-9))
            hi, _ = xi_l(HeunParams(l=l, lam=lam0 + 1e-3, mu=1e-9))
            assert lo * hi < 0

    def test_nonzero_at_poly_existence_points(self):
        for l, mu in ((1, 0.5), (2, 1.0), (3, 2.0)):
            for lam in poly_existence_lambdas(l, mu):
                v, err = xi_l(HeunParams(l=l, lam=lam, mu=mu))
                assert abs(v) > err


class TestDefectEquivalence:
    def test_lambda_grid_brackets_match(self):
        # sign changes of xi and of the defect along lambda coincide
        # (grid offset keeps exact roots like lam = -mu^2 off the nodes)
        l, mu = 1, 0.5
        lams = np.linspace(-8.0131, 1.0171, 181)
        xi_vals = [xi_l(HeunParams(l=l, lam=t, mu=mu))[0] for t in lams]
        de_vals = [
            entire_solution_defect(HeunParams(l=l, lam=t, mu=mu)) for t in lams
        ]
        xi_brackets = [
            i for i in range(len(lams) - 1) if xi_vals[i] * xi_vals[i + 1] < 0
        ]
        de_brackets = [
            i for i in range(len(lams) - 1) if de_vals[i] * de_vals[i + 1] < 0
        ]
        assert xi_brackets == de_brackets
        assert len(xi_brackets) >= 3

        # refine both detectors inside each bracket: zeros match to 1e-6
        from heunlock.specfun import Precision

        eprec = Precision(bits=106)

        def bisect(fn, lo, hi):
            flo = fn(lo)
            for _ in range(40):
                mid = 0.5 * (lo + hi)
                fm = fn(mid)
                if fm == 0.0:
                    return mid
                if flo * fm < 0:
                    hi = mid
                else:
                    lo, flo = mid, fm
            return 0.5 * (lo + hi)

        for i in xi_brackets:
            z_xi = bisect(
                lambda t: xi_l(HeunParams(l=l, lam=t, mu=mu))[0], lams[i], lams[i + 1]
            )
            z_de = bisect(
                lambda t: entire_solution_defect(
                    HeunParams(l=l, lam=t, mu=mu), prec=eprec
                ),
                lams[i],
                lams[i + 1],
            )
            assert abs(z_xi - z_de) < 1e-6

    def test_exponential_solution_family(self):
        # E = e^{mu z} solves the primary equation whenever lam = -mu^2,
        # so both zero detectors must fire there for every l
        for l, mu in ((0, 0.5), (1, 0.5), (2, 1.3), (4, 2.0)):
            p = HeunParams(l=l, lam=-mu * mu, mu=mu)
            assert entire_solution_defect(p) == pytest.approx(0.0, abs=1e-12)
            v, err = xi_l(p)
            assert abs(v) <= max(err, 1e-12)


class TestRootsOnLine:
    def test_josephson_map(self):
        lam, mu = josephson_lambda_mu(0.7, 2.0)
        assert mu == pytest.approx(2.0 / 1.4)
        assert lam == pytest.approx(1.0 / (4 * 0.49) - mu * mu)

    def test_roots_found_and_bracketed(self):
        roots = xi_roots_on_line(0, 0.7, 6.0)
        certified = [r for r in roots if not r.suspected]
        assert len(certified) == 2
        for r in certified:
            assert r.bracket[0] <= r.A <= r.bracket[1]
            assert r.bracket[1] - r.bracket[0] < 1e-5

    def test_roots_match_independent_defect_bisection(self):
        # independent in-test bisection of the defect sign change
        omega = 0.7
        r = xi_roots_on_line(0, omega, 3.0)[0]

        def defect_at(A):
            lam, mu = josephson_lambda_mu(omega, A)
            return entire_solution_defect(HeunParams(l=0, lam=lam, mu=mu))

        lo, hi = r.A - 0.05, r.A + 0.05
        flo = defect_at(lo)
        assert flo * defect_at(hi) < 0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            fm = defect_at(mid)
            if flo * fm < 0:
                hi = mid
            else:
                lo, flo = mid, fm
        assert abs(0.5 * (lo + hi) - r.A) < 1e-6

    def test_defect_small_at_roots(self):
        for l in (0, 1):
            for r in xi_roots_on_line(l, 0.7, 8.0):
                if r.suspected:
                    continue
                d = entire_solution_defect(HeunParams(l=l, lam=r.lam, mu=r.mu))
                assert abs(d) < 1e-6

    def test_gaps_certified_nonzero(self):
        roots = xi_roots_on_line(0, 0.7, 6.0)
        a_mid = 0.5 * (roots[0].A + roots[1].A)
        lam, mu = josephson_lambda_mu(0.7, a_mid)
        v, err = xi_l(HeunParams(l=0, lam=lam, mu=mu))
        assert abs(v) > err

    def test_polish_narrows_bracket(self):
        r = xi_roots_on_line(1, 0.7, 4.0)[0]
        rp = polish_root_by_defect(r)
        assert rp.bracket[1] - rp.bracket[0] < 1e-11
        assert abs(rp.A - r.A) < 1e-7

    def test_validation(self):
        with pytest.raises(ValueError):
            xi_roots_on_line(-1, 0.7, 5.0)
        with pytest.raises(ValueError):
            xi_roots_on_line(0, -0.7, 5.0)
