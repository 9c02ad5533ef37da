import io
import math

import numpy as np
import pytest

from heunlock.heunrec import HeunParams
from heunlock.torusflow import (
    JosephsonParams,
    adjacency_verify,
    flow_step,
    monodromy,
    phase_lock_interval,
    portrait,
    rotation_number,
)
from heunlock.xiprod import polish_root_by_defect, xi_roots_on_line

import oracles

OMEGA = 0.7


class TestParams:
    def test_derived_fields(self):
        p = JosephsonParams(omega=0.7, B=1.4, A=2.8)
        assert p.l == pytest.approx(2.0)
        assert p.mu == pytest.approx(2.0)
        assert p.lam == pytest.approx(1.0 / (4 * 0.49) - 4.0)

    def test_heun_params_requires_integer_level(self):
        with pytest.raises(ValueError):
            JosephsonParams(omega=0.7, B=1.0, A=1.0).heun_params()
        hp = JosephsonParams(omega=0.7, B=2.1, A=1.0).heun_params()
        assert hp.l == 3

    def test_omega_positive(self):
        with pytest.raises(ValueError):
            JosephsonParams(omega=0.0, B=0.0, A=0.0)


class TestFlowStep:
    def test_rest_point(self):
        p = JosephsonParams(omega=OMEGA, B=0.0, A=0.0)
        assert flow_step(p, 0.0, 0.0, 10.0) == 0.0

    def test_attraction_to_zero(self):
        p = JosephsonParams(omega=OMEGA, B=0.0, A=0.0)
        assert abs(flow_step(p, 0.1, 0.0, 60.0)) < 1e-12

    def test_tolerance_self_convergence(self):
        p = JosephsonParams(omega=OMEGA, B=1.3, A=2.0)
        a = flow_step(p, 0.2, 0.0, 2 * math.pi * 5, tol=1e-8)
        b = flow_step(p, 0.2, 0.0, 2 * math.pi * 5, tol=5e-9)
        assert abs(a - b) < 1e-8 * 2 * math.pi * 5

    def test_tau_ordering(self):
        p = JosephsonParams(omega=OMEGA, B=0.0, A=0.0)
        with pytest.raises(ValueError):
            flow_step(p, 0.0, 1.0, 1.0)


class TestRotationNumber:
    def test_locked_region_is_zero(self):
        # the estimate carries an O(transient/periods) term from the
        # approach to the rest point, so it is small rather than exact
        for B in (0.0, 0.5, 0.9):
            rr = rotation_number(JosephsonParams(OMEGA, B, 0.0), periods=200)
            assert abs(rr.rho) < 1e-4

    def test_closed_form_oracle(self):
        for B in (1.5, 2.0, 3.0):
            rr = rotation_number(JosephsonParams(OMEGA, B, 0.0), periods=1000)
            assert rr.rho == pytest.approx(
                oracles.rotation_closed_form(B, OMEGA), abs=1e-4
            )

    def test_mirror_symmetry(self):
        a = rotation_number(JosephsonParams(OMEGA, 1.2, 2.0), periods=600)
        b = rotation_number(JosephsonParams(OMEGA, -1.2, 2.0), periods=600)
        assert a.rho == pytest.approx(-b.rho, abs=1e-3)

    def test_period_doubling_consistency(self):
        p = JosephsonParams(OMEGA, 1.8, 1.0)
        a = rotation_number(p, periods=400)
        b = rotation_number(p, periods=800)
        assert abs(a.rho - b.rho) <= a.conf
        assert b.conf < a.conf

    def test_monotone_in_B(self):
        rhos = [
            rotation_number(JosephsonParams(OMEGA, b, 1.5), periods=300).rho
            for b in np.linspace(-2.5, 2.5, 11)
        ]
        assert all(y >= x - 1e-4 for x, y in zip(rhos, rhos[1:]))

    def test_periods_floor(self):
        with pytest.raises(ValueError):
            rotation_number(JosephsonParams(OMEGA, 0.0, 0.0), periods=10)


class TestPhaseLock:
    def test_zero_level_at_a_zero(self):
        li = phase_lock_interval(0, 0.0, OMEGA, periods=800)
        assert not li.empty
        assert li.b_minus == pytest.approx(-1.0, abs=2e-3)
        assert li.b_plus == pytest.approx(1.0, abs=2e-3)
        assert li.reliable

    def test_half_level_is_empty(self):
        li = phase_lock_interval(0.5, 1.0, OMEGA, periods=2000, window=128)
        assert li.empty
        assert li.width < 1e-3

    def test_level_one_narrow_at_small_A(self):
        li = phase_lock_interval(1, 0.35, OMEGA, periods=1500)
        assert not li.empty
        assert 0.0 < li.width < 0.6
        # tongue tip sits near B = sqrt(1 + (l omega)^2)? no closed form;
        # the locked interval must straddle a point with rho = 1
        mid = 0.5 * (li.b_minus + li.b_plus)
        rr = rotation_number(JosephsonParams(OMEGA, mid, 0.35), periods=1500)
        assert rr.rho == pytest.approx(1.0, abs=1e-3)


class TestMonodromy:
    def test_requires_forcing(self):
        with pytest.raises(ValueError):
            monodromy(JosephsonParams(OMEGA, 0.0, 0.0))

    def test_liouville(self):
        m = monodromy(JosephsonParams(OMEGA, 0.33, 1.7))
        assert m.liouville_defect() < 1e-8

    def test_reverse_orientation_inverts(self):
        from scipy.integrate import solve_ivp

        p = JosephsonParams(OMEGA, 0.33, 1.7)
        inv2w = 1.0 / (2 * p.omega)
        lpar, mu = p.l, p.mu

        def rhs(tau, y):
            v, u = y
            return [inv2w * u, -1j * (lpar + 2 * mu * np.cos(tau)) * u + inv2w * v]

        cols = []
        for y0 in ([1 + 0j, 0j], [0j, 1 + 0j]):
            sol = solve_ivp(rhs, (2 * np.pi, 0.0), y0, method="DOP853",
                            rtol=1e-11, atol=1e-13)
            cols.append(sol.y[:, -1])
        reverse = np.column_stack(cols)
        forward = monodromy(p).matrix
        assert np.max(np.abs(reverse @ forward - np.eye(2))) < 1e-8

    def test_identity_at_adjacency(self):
        r = polish_root_by_defect(xi_roots_on_line(0, OMEGA, 3.0)[0])
        m = monodromy(JosephsonParams(OMEGA, 0.0, r.A))
        assert m.identity_distance() < 1e-6

    def test_far_from_identity_off_adjacency(self):
        r = polish_root_by_defect(xi_roots_on_line(0, OMEGA, 3.0)[0])
        m = monodromy(JosephsonParams(OMEGA, 0.0, r.A + 0.1))
        assert m.identity_distance() > 1e-2


class TestAdjacencyVerify:
    def test_report_fields_and_constraints(self):
        r = polish_root_by_defect(xi_roots_on_line(1, OMEGA, 4.0)[0])
        rep = adjacency_verify(1, OMEGA, r.A, periods=600)
        assert rep["parity_constraint_ok"]
        assert rep["magnitude_constraint_ok"]
        assert rep["rho_equals_level_within_tol"]
        assert rep["monodromy_identity_distance"] < 1e-6
        assert rep["entire_solution_defect"] < 1e-6
        assert rep["xi_residual"] < 1e-8
        assert rep["rho_equality_is_conjecture_evidence"] is True


class TestPortrait:
    def test_small_grid_properties(self):
        g = portrait(OMEGA, (-2.0, 2.0), (0.0, 3.0), (21, 13),
                     tol=3e-4, periods=256, window=48)
        # mirror symmetry of the grid
        assert np.max(np.abs(g.rho + g.rho[:, ::-1])) < 1e-3
        # closed form on the A = 0 row (signed)
        exact = np.array(
            [math.copysign(oracles.rotation_closed_form(b, OMEGA), b) for b in g.bs]
        )
        assert np.max(np.abs(g.rho[0] - exact)) < 1e-3

    def test_csv_deterministic(self):
        kw = dict(tol=5e-4, periods=128, window=32)
        a, b = io.StringIO(), io.StringIO()
        portrait(OMEGA, (-1.0, 1.0), (0.0, 1.0), (5, 4), **kw).to_csv(a)
        portrait(OMEGA, (-1.0, 1.0), (0.0, 1.0), (5, 4), **kw).to_csv(b)
        assert a.getvalue() == b.getvalue()
        lines = a.getvalue().splitlines()
        assert lines[0] == "omega,0.7"
        assert lines[1] == "B,A,rho,conf"
        assert len(lines) == 2 + 5 * 4

    def test_svg_output(self):
        g = portrait(OMEGA, (-1.0, 1.0), (0.0, 1.0), (5, 4),
                     tol=5e-4, periods=128, window=32)
        buf = io.StringIO()
        g.to_svg(buf, width=100, height=80, adjacencies=[(0.0, 0.5)])
        svg = buf.getvalue()
        assert svg.startswith("<svg ")
        assert svg.rstrip().endswith("</svg>")
        assert svg.count("<rect") == 1 + 5 * 4
        assert "<circle" in svg

    def test_grid_budget(self):
        with pytest.raises(ValueError):
            portrait(OMEGA, (-1, 1), (0, 1), (4000, 4000))
