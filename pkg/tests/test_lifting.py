"""Lift assembly and the closed D-family coefficient formula."""

from fractions import Fraction

from refltower.series import TruncationWindow
from refltower import jacobi, lifting


def test_lift_layer_grids():
    assert lifting.lift_layers("psi_8_D4", 6) == [(2, 1), (4, 2), (6, 3)]
    assert lifting.lift_layers("psi_5_A1", 6) == [(1, 1), (3, 3), (5, 5)]
    assert lifting.lift_layers("psi_3_3A2", 3) == [(2, 1)]


def test_lift_cells_are_hecke_translates():
    w = TruncationWindow(96, 4)
    lift = lifting.gritsenko_lift("psi_9_D3", w)
    assert lift.weight == 9
    assert lift.index_step == 2
    ser = lift.series
    for (s, q), sl in ser.cells.items():
        assert sl == jacobi.member_hecke_slice("psi_9_D3", s // 2, q)
    # the s^1 layer is the block itself
    for q in (24, 48, 72, 96):
        assert ser.cells.get((2, q), {}) == jacobi.member_slice("psi_9_D3", q)


def test_fourier_jacobi_extraction():
    w = TruncationWindow(72, 4)
    lift = lifting.gritsenko_lift("psi_10_D2", w)
    layer = lifting.fourier_jacobi(lift, 2)
    psi = jacobi.member_series("psi_10_D2", TruncationWindow(72, 0))
    assert layer.first_difference(psi) is None


def test_half_grid_lift_layers_are_odd():
    w = TruncationWindow(96, 5)
    lift = lifting.gritsenko_lift("psi_4_2A1", w)
    s_values = {s for (s, q) in lift.series.cells}
    assert s_values == {1, 3, 5}
    q_values = {q for (s, q) in lift.series.cells}
    assert all(q % 12 == 0 and (q // 12) % 2 for q in q_values)


def test_closed_form_agrees_with_lift():
    w = TruncationWindow(96, 6)
    for k in (2, 3, 4):
        key = "psi_%d_D%d" % (12 - k, k)
        closed = lifting.closed_form_Dk(k, w).series
        lift = lifting.gritsenko_lift(key, w).series
        assert closed.first_difference(lift) is None


def test_closed_form_divisor_term():
    # at n = m = 2, z = (2, 2) only d = 2 contributes: the d = 1 eta index
    # falls off the 24-grid, the rescaled one hits the constant term
    assert lifting.closed_form_slice(2, 2, 2)[(2, 2)] == 512
    assert lifting.closed_form_slice(2, 2, 4)[(2, 2)] == -9216
    assert lifting.closed_form_slice(2, 3, 3)[(3, 3)] == 12645


def test_closed_form_support_is_odd_for_coprime_indices():
    # with gcd(n, m) = 1 only d = 1 contributes, and the Kronecker
    # factor keeps exactly the odd vectors; d > 1 terms such as the
    # 512 above live on rescaled, even support
    for n, m in [(2, 1), (3, 2), (4, 3)]:
        for z in lifting.closed_form_slice(3, n, m):
            assert all(a % 2 for a in z)


def test_closed_form_nm_symmetry():
    for n, m in [(1, 2), (2, 3), (1, 4)]:
        assert lifting.closed_form_slice(4, n, m) == \
            lifting.closed_form_slice(4, m, n)
