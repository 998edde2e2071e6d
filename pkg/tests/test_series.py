import random
from fractions import Fraction

from refltower.series import (
    FourierSeries,
    TruncationWindow,
    _div_binomial_slice,
    _peel_divide,
    _slice_mul_py,
)


def rand_series(rng, r, den_z, wq, ws, nterms, fractions=False):
    f = FourierSeries(r, den_z, TruncationWindow(wq, ws))
    for _ in range(nterms):
        q = rng.randrange(0, wq + 1)
        s = rng.randrange(0, ws + 1)
        z = tuple(rng.randrange(-4, 5) for _ in range(r))
        c = rng.randrange(-9, 10)
        if fractions and rng.random() < 0.3:
            c = Fraction(c, rng.randrange(1, 5))
        f.add_term(q, z, s, c)
    return f


def naive_mul(a, b):
    w = TruncationWindow(
        min(a.window.q_max + b.q_valuation(), b.window.q_max + a.q_valuation()),
        min(a.window.s_max + b.s_valuation(), b.window.s_max + a.s_valuation()),
    )
    out = FourierSeries(a.r, a.den_z, w)
    for qa, za, sa, ca in a.terms():
        for qb, zb, sb, cb in b.terms():
            z = tuple(x + y for x, y in zip(za, zb))
            out.add_term(qa + qb, z, sa + sb, ca * cb)
    return out


def test_add_sub_roundtrip():
    rng = random.Random(7)
    for _ in range(20):
        a = rand_series(rng, 2, 2, 30, 4, 25)
        b = rand_series(rng, 2, 2, 30, 4, 25)
        c = (a + b) - b
        assert c.first_difference(a) is None


def test_mul_matches_naive():
    rng = random.Random(11)
    for _ in range(15):
        a = rand_series(rng, 2, 2, 20, 2, 20)
        b = rand_series(rng, 2, 2, 20, 2, 20)
        got = a.mul(b)
        want = naive_mul(a, b)
        assert got.first_difference(want) is None


def test_mul_commutes_and_associates():
    rng = random.Random(13)
    for _ in range(10):
        a = rand_series(rng, 1, 2, 16, 2, 10)
        b = rand_series(rng, 1, 2, 16, 2, 10)
        c = rand_series(rng, 1, 2, 16, 2, 10)
        assert a.mul(b).first_difference(b.mul(a)) is None
        lhs = a.mul(b).mul(c)
        rhs = a.mul(b.mul(c))
        assert lhs.first_difference(rhs) is None


def test_mul_distributes():
    rng = random.Random(17)
    for _ in range(10):
        a = rand_series(rng, 2, 2, 16, 2, 12)
        b = rand_series(rng, 2, 2, 16, 2, 12)
        c = rand_series(rng, 2, 2, 16, 2, 12)
        lhs = a.mul(b + c)
        rhs = a.mul(b) + a.mul(c)
        assert lhs.first_difference(rhs) is None


def test_numpy_kernel_agrees_with_python():
    rng = random.Random(19)
    A = {}
    B = {}
    for _ in range(200):
        A[tuple(rng.randrange(-6, 7) for _ in range(3))] = rng.randrange(-50, 51) or 1
        B[tuple(rng.randrange(-6, 7) for _ in range(3))] = rng.randrange(-50, 51) or 1
    a = FourierSeries(3, 2, TruncationWindow(0, 0))
    b = FourierSeries(3, 2, TruncationWindow(0, 0))
    a.cells[(0, 0)] = dict(A)
    b.cells[(0, 0)] = dict(B)
    got = a.mul(b)  # large enough to hit the packed path
    want = {}
    _slice_mul_py(want, A, B)
    assert got.cells.get((0, 0), {}) == want


def test_division_roundtrip_integer():
    rng = random.Random(23)
    for _ in range(10):
        b = FourierSeries(2, 2, TruncationWindow(24, 4))
        b.add_term(2, (1, 0), 0, 1)  # unit pivot at the corner
        for _ in range(8):
            b.add_term(rng.randrange(2, 12), (rng.randrange(-3, 2), rng.randrange(-3, 4)),
                       rng.randrange(0, 3), rng.randrange(-5, 6))
        a = rand_series(rng, 2, 2, 20, 3, 15)
        prod = a.mul(b)
        back = prod.div(b)
        assert back.first_difference(a) is None


def test_division_roundtrip_fraction():
    rng = random.Random(29)
    b = FourierSeries(1, 2, TruncationWindow(20, 2))
    b.add_term(0, (2,), 0, -1)
    b.add_term(3, (0,), 0, Fraction(1, 2))
    b.add_term(5, (-1,), 1, 3)
    a = rand_series(rng, 1, 2, 14, 1, 12, fractions=True)
    prod = a.mul(b)
    back = prod.div(b)
    assert back.first_difference(a) is None


def test_division_detects_remainder():
    a = FourierSeries.monomial(1, 0, (0,), 0, 2, TruncationWindow(10, 0))
    b = FourierSeries(1, 2, TruncationWindow(10, 0))
    b.add_term(0, (1,), 0, 1)
    b.add_term(0, (-1,), 0, -1)
    try:
        a.div(b)
    except ArithmeticError:
        pass
    else:
        assert False, "expected a remainder error"


def test_peel_and_binomial_division_agree():
    rng = random.Random(31)
    dvec = (1, -1)
    binom = {(1, -1): 1, (-1, 1): -1}
    for _ in range(12):
        Q = {}
        for _ in range(10):
            Q[tuple(rng.randrange(-4, 5) for _ in range(2))] = rng.randrange(-7, 8)
        Q = {z: c for z, c in Q.items() if c}
        if not Q:
            continue
        R = {}
        _slice_mul_py(R, Q, binom)
        assert _peel_divide(dict(R), binom, 2) == Q
        assert _div_binomial_slice(dict(R), dvec) == Q


def test_exp_s_inverse():
    rng = random.Random(37)
    for _ in range(6):
        x = FourierSeries(1, 2, TruncationWindow(12, 6))
        for _ in range(6):
            x.add_term(rng.randrange(0, 10), (rng.randrange(-2, 3),),
                       rng.randrange(1, 4), rng.randrange(-4, 5))
        e = x.exp_s()
        einv = (-x).exp_s()
        prod = e.mul(einv)
        one = FourierSeries.monomial(1, 0, (0,), 0, 2, prod.window)
        assert prod.first_difference(one) is None


def test_scale_variables_grid_check():
    f = FourierSeries.monomial(3, 5, (1,), 0, 2, TruncationWindow(40, 0))
    g = f.scale_variables(2, 2)
    assert g.coefficient(10, (2,)) == 3
    try:
        f.scale_variables(Fraction(1, 2), 1)
    except ValueError:
        pass
    else:
        assert False, "expected an off-grid error"


def test_restrict_and_derivative():
    f = FourierSeries(2, 2, TruncationWindow(10, 0))
    f.add_term(1, (1, 2), 0, 5)
    f.add_term(1, (-1, 2), 0, 4)
    f.add_term(2, (3, -1), 0, 2)
    g = f.restrict_z(0)
    assert g.r == 1
    assert g.coefficient(1, (2,)) == 9
    d = f.derivative_z(0)
    assert d.coefficient(1, (1, 2)) == Fraction(5, 2)
    assert d.coefficient(1, (-1, 2)) == -2


def test_map_z_relabel():
    f = FourierSeries(1, 2, TruncationWindow(10, 0))
    f.add_term(3, (2,), 0, 7)
    g = f.map_z([[3, 0]], den_z_new=6)
    assert g.r == 2
    assert g.den_z == 6
    assert g.coefficient(3, (6, 0)) == 7


def test_json_roundtrip_bytes():
    rng = random.Random(41)
    f = rand_series(rng, 3, 6, 25, 4, 30, fractions=True)
    text = f.to_json()
    g = FourierSeries.from_json(text)
    assert g == f
    assert g.to_json() == text


def test_lowest_term_and_valuations():
    f = FourierSeries(2, 2, TruncationWindow(20, 4))
    f.add_term(7, (0, 1), 2, 4)
    f.add_term(5, (1, -1), 2, -2)
    f.add_term(9, (0, 0), 4, 1)
    assert f.q_valuation() == 5
    assert f.s_valuation() == 2
    assert f.corner_cell() == (2, 5)
    assert f.lowest_term() == (5, (1, -1), 2, -2)
