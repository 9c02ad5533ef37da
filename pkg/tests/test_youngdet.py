import cmath
import io
import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from heunlock.specfun import Precision, bessel_i
from heunlock.youngdet import (
    LatticeWindow,
    as_diagram,
    build_matrix,
    delta_diagram,
    det_f,
    det_f_signed,
    diagrams_in_box,
    generating_coeff_oracle,
    hilbert_norm_partial,
    laplacian_rhs,
    ode_residual,
    positivity_scan,
    schur_identity_check,
    vandermonde_delta,
)

import oracles


diagram_strategy = st.lists(
    st.integers(-8, 8), min_size=1, max_size=4, unique=True
).map(lambda v: tuple(sorted(v, reverse=True)))


class TestDiagram:
    def test_validation(self):
        assert as_diagram((3, 1, 0)) == (3, 1, 0)
        with pytest.raises(ValueError):
            as_diagram((1, 1))
        with pytest.raises(ValueError):
            as_diagram((0, 1))
        with pytest.raises(ValueError):
            as_diagram(())

    def test_delta(self):
        assert delta_diagram(3) == (2, 1, 0)

    def test_box_count(self):
        assert len(diagrams_in_box(1, 3)) == 7
        assert len(diagrams_in_box(3, 6)) == math.comb(13, 3)


class TestBuildMatrix:
    def test_single_entry(self):
        m = build_matrix((1,), (0,), 2.0)
        assert m[0][0] == pytest.approx(oracles.I1_OF_2, abs=1e-11)

    def test_symmetric_layout(self):
        m = build_matrix((1, 0), (1, 0), 2.0)
        # row i, column j holds I_{k_j - n_i}
        assert m[0][0] == m[1][1]  # I_0
        assert m[0][1] == m[1][0]  # I_1
        assert m[0][0] == pytest.approx(oracles.I0_OF_2, abs=1e-11)
        assert m[0][1] == pytest.approx(oracles.I1_OF_2, abs=1e-11)

    def test_identity_at_zero(self):
        m = build_matrix((5, 2, -1), (5, 2, -1), 0.0)
        for i in range(3):
            for j in range(3):
                assert m[i][j] == (1.0 if i == j else 0.0)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            build_matrix((1, 0), (0,), 1.0)


class TestDetF:
    def test_frozen_2x2(self):
        d = det_f((1, 0), (1, 0), 2.0)
        assert d.sign == "positive"
        assert d.value == pytest.approx(oracles.DET2_AT_2, abs=1e-11)
        assert d.value - d.err > 0

    def test_initial_condition_exact(self):
        assert det_f((5, 2), (5, 2), 0.0).value == 1.0
        assert det_f((3, 1), (2, 0), 0.0).value == 0.0
        assert det_f((3, 1), (2, 0), 0.0).sign == "zero"

    def test_sign_rule_odd_permutation(self):
        d = det_f_signed((0, 1), (1, 0), 2.0)
        assert d.value == pytest.approx(-oracles.DET2_AT_2, abs=1e-11)
        assert d.sign == "negative"
        d2 = det_f_signed((1, 0), (0, 1), 2.0)
        assert d2.value == pytest.approx(-oracles.DET2_AT_2, abs=1e-11)

    def test_repeats_vanish(self):
        d = det_f_signed((2, 2), (1, 0), 1.7)
        assert d.value == 0.0 and d.err == 0.0 and d.sign == "zero"

    @given(diagram_strategy, st.sampled_from([0.5, 1.0, 3.0]))
    def test_theorem_positivity_sampled(self, k, x):
        n = tuple(sorted(k, reverse=True))
        d = det_f(k, n, x)
        assert d.sign == "positive"

    @given(
        st.tuples(st.integers(-5, 5), st.integers(-5, 5), st.integers(-5, 5)),
        st.permutations([0, 1, 2]),
    )
    def test_antisymmetry(self, k, perm):
        n = (2, 0, -1)
        x = 1.0
        base = det_f_signed(k, n, x)
        permuted = tuple(k[i] for i in perm)
        inv = sum(
            1 for a in range(3) for b in range(a + 1, 3) if perm[a] > perm[b]
        )
        d = det_f_signed(permuted, n, x)
        expected = -base.value if inv % 2 else base.value
        assert d.value == pytest.approx(expected, abs=1e-12 + 1e-9 * abs(expected))

    def test_monotone_in_x(self):
        for k, n in [((1, 0), (2, -1)), ((3, 1), (1, 0)), ((0,), (2,))]:
            vals = [det_f(k, n, x).value for x in (0.25, 0.5, 1.0, 2.0, 4.0)]
            assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


class TestPositivityScan:
    def test_l1_radius3_counts(self):
        rep = positivity_scan(1, 3, (1.0,))
        assert rep.total == 49
        assert rep.all_positive and rep.complete
        assert rep.min_certified > 0

    def test_l2_multiple_x(self):
        rep = positivity_scan(2, 4, (0.1, 1.0, 5.0))
        assert rep.all_positive
        assert rep.total == 3 * math.comb(9, 2) ** 2

    def test_csv_format(self):
        rep = positivity_scan(1, 1, (1.0,))
        buf = io.StringIO()
        rep.to_csv(buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "k,n,x,value,err,sign"
        assert len(lines) == 1 + rep.total
        assert lines[1].endswith("positive")

    def test_budget_pre(self):
        with pytest.raises(ValueError):
            positivity_scan(5, 3, (1.0,))
        with pytest.raises(ValueError):
            positivity_scan(2, 9, (1.0,))
        with pytest.raises(ValueError):
            positivity_scan(2, 3, (0.0,))


class TestLaplacian:
    def test_l1_matches_doubled_derivative(self):
        x = 1.3
        w = LatticeWindow.from_function(1, 4, lambda k: bessel_i(k[0], x))
        assert laplacian_rhs(w, (0,)) == pytest.approx(2.0 * bessel_i(1, x), rel=1e-12)

    def test_repeat_neighbors_drop_out(self):
        w = LatticeWindow.from_function(2, 3, lambda k: 1.0)
        # neighbors of (1, 0) include (0, 0) and (1, 1): both repeats, zero
        assert laplacian_rhs(w, (1, 0)) == 2.0

    def test_zero_window(self):
        w = LatticeWindow.from_function(2, 3, lambda k: 0.0)
        assert laplacian_rhs(w, (2, 0)) == 0.0

    def test_boundary_raises(self):
        w = LatticeWindow.from_function(1, 2, lambda k: 1.0)
        with pytest.raises(ValueError):
            laplacian_rhs(w, (2,))


class TestOdeResidual:
    def test_l1_exact_identity(self):
        assert ode_residual((0,), (0,), 1.0, 1e-4) < 1e-7

    def test_l2(self):
        assert ode_residual((1, 0), (1, 0), 2.0, 1e-4) < 1e-6

    def test_l3(self):
        assert ode_residual((2, 1, 0), (2, 1, 0), 1.0, 1e-4) < 1e-6

    def test_h_squared_scaling(self):
        prec = Precision(bits=128)
        r1 = ode_residual((2, 0), (1, -1), 1.5, 4e-4, prec)
        r2 = ode_residual((2, 0), (1, -1), 1.5, 2e-4, prec)
        assert r1 / r2 >= 3.5

    def test_h_validation(self):
        with pytest.raises(ValueError):
            ode_residual((0,), (0,), 1.0, 2e-3)
        with pytest.raises(ValueError):
            ode_residual((0,), (0,), 5e-5, 1e-4)


class TestHilbertNorm:
    def test_at_zero_single(self):
        assert hilbert_norm_partial((0,), 0.0, 5) == 1.0

    def test_at_zero_l2(self):
        assert hilbert_norm_partial((1, 0), 0.0, 4) == 1.0

    def test_stabilizes_in_radius(self):
        a = hilbert_norm_partial((0,), 1.0, 10)
        b = hilbert_norm_partial((0,), 1.0, 20)
        assert b >= a
        assert b - a < 1e-12

    def test_bounded_by_tail_aggregate(self):
        # partial sums stay below a constant assembled from the tail bound
        from heunlock.specfun import bessel_tail_bound

        x = 1.0
        total = hilbert_norm_partial((0,), x, 12)
        head = sum(bessel_i(j, x) ** 2 for j in range(-4, 5))
        tail = 2 * sum(bessel_tail_bound(j, 2.0) ** 2 for j in range(5, 13))
        assert total <= head + tail

    def test_radius_pre(self):
        with pytest.raises(ValueError):
            hilbert_norm_partial((3, 0), 1.0, 2)


class TestGeneratingOracle:
    def test_l1_plain_coefficient(self):
        v = generating_coeff_oracle((0,), (2,), 1.0, 25)
        assert v == pytest.approx(oracles.I2_OF_1, abs=1e-11)

    def test_l2_matches_det(self):
        v = generating_coeff_oracle((1, 0), (1, 0), 2.0, 25)
        assert v == pytest.approx(oracles.DET2_AT_2, abs=1e-9)

    def test_l2_offdiagonal_matches_det(self):
        v = generating_coeff_oracle((1, 0), (3, 2), 1.0, 28)
        d = det_f((3, 2), (1, 0), 1.0)
        assert v == pytest.approx(d.value, abs=1e-9)

    def test_truncation_pre(self):
        with pytest.raises(ValueError):
            generating_coeff_oracle((1, 0), (3, 2), 1.0, 10)


class TestVandermonde:
    def test_classical(self):
        z1, z2 = 1.7 + 0.3j, -0.4 + 1.1j
        assert vandermonde_delta((1, 0), (z1, z2)) == pytest.approx(z1 - z2)

    def test_direct_2x2(self):
        assert vandermonde_delta((2, 0), (2.0, 1.0)) == pytest.approx(3.0)

    def test_equal_points_vanish(self):
        assert vandermonde_delta((3, 1), (0.5, 0.5)) == 0.0

    def test_negative_exponent_at_zero(self):
        with pytest.raises(ValueError):
            vandermonde_delta((1, -1), (0.0, 1.0))


class TestSchurIdentity:
    def test_zero_shift_is_exact(self):
        z = (cmath.exp(1j * 0.7), cmath.exp(-1j * 0.3))
        assert schur_identity_check((0, 0), delta_diagram(2), 1.0, z, 30) == 0.0

    def test_row_shift(self):
        z = (cmath.exp(1j * math.pi / 3), cmath.exp(-1j * math.pi / 5))
        assert schur_identity_check((1, 0), delta_diagram(2), 1.0, z, 40) < 1e-9

    def test_full_shift(self):
        z = (cmath.exp(1j * 0.9), cmath.exp(1j * 2.2))
        assert schur_identity_check((1, 1), delta_diagram(2), 2.0, z, 40) < 1e-9
