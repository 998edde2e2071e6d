from fractions import Fraction

import pytest

from refltower.lattices import CATALOGUE, lattice


def test_gram_matrices_even_and_symmetric():
    for name in CATALOGUE:
        lat = lattice(name)
        g = lat.gram()
        assert len(g) == lat.rank
        for i in range(lat.rank):
            assert g[i][i] % 2 == 0
            for j in range(lat.rank):
                assert g[i][j] == g[j][i]


def test_inner_binding_values():
    d8 = lattice("D8")
    e1 = (1,) + (0,) * 7
    assert d8.inner(e1, e1) == 1
    a2 = lattice("A2")
    assert a2.inner((1, 0), (1, 0)) == Fraction(2, 3)
    assert a2.inner((1, 0), (0, 1)) == Fraction(1, 3)
    a1 = lattice("A1")
    assert a1.inner((1,), (1,)) == 2
    d1 = lattice("D1")
    assert d1.gram() == ((4,),)


def test_discriminant_structure():
    for n in range(1, 9):
        disc = lattice("D%d" % n).discriminant_group()
        assert disc.order == 4
        assert disc.invariants == ((4,) if n % 2 else (2, 2))
    for k in range(1, 4):
        name = "A2" if k == 1 else "%dA2" % k
        disc = lattice(name).discriminant_group()
        assert disc.order == 3 ** k
    for n in range(1, 5):
        name = "A1" if n == 1 else "%dA1" % n
        disc = lattice(name).discriminant_group()
        assert disc.order == 2 ** n


def test_disc_reduce_consistency():
    for name in CATALOGUE:
        lat = lattice(name)
        disc = lat.discriminant_group()
        for rep in disc.reps:
            assert lat.disc_reduce(rep) == rep
            shifted = tuple(a + b for a, b in zip(rep, lat.basis()[0]))
            assert lat.disc_reduce(shifted) == rep


def test_d8_coset_norms():
    d8 = lattice("D8")
    disc = d8.discriminant_group()
    norms = sorted(d8.norm(r) for r in disc.reps)
    assert norms == [0, 1, 2, 2]


def test_dual_vector_counts_low_norm():
    a2 = lattice("A2")
    shells = {}
    for v in a2.dual_vectors_up_to_norm(2):
        shells.setdefault(a2.norm(v), []).append(v)
    assert len(shells[Fraction(2, 3)]) == 6  # the weight vectors
    assert len(shells[Fraction(2)]) == 6  # the roots
    d2 = lattice("D2")
    vs = d2.dual_vectors_up_to_norm(1)
    assert len([v for v in vs if d2.norm(v) == 1]) == 4  # (+-1, 0) type
    assert len([v for v in vs if d2.norm(v) == Fraction(1, 2)]) == 4  # (+-1/2, +-1/2)


def test_dual_vectors_norm_bound_sharp():
    a2 = lattice("A2")
    got = {v for v in a2.dual_vectors_up_to_norm(32)}
    # the bound must include long vectors like 4*lambda_1 - 4*lambda_2 of norm 32/3*2
    for v in got:
        assert a2.norm(v) <= 32
    brute = set()
    for a in range(-10, 11):
        for b in range(-10, 11):
            if a2.norm((a, b)) <= 32:
                brute.add((Fraction(a), Fraction(b)))
    assert got == brute


def test_divisor_and_content():
    d8 = lattice("D8")
    v = (2,) + (0,) * 7
    assert d8.divisor(v) == 2
    assert d8.content((Fraction(1, 2),) * 8) == 1
    a2 = lattice("A2")
    assert a2.divisor((3, 0)) == 3
    a1 = lattice("A1")
    assert a1.divisor((1,)) == 2


def test_eichler_invariant_examples():
    d8 = lattice("D8")
    e1 = (1,) + (0,) * 7
    cls = d8.eichler_invariant(0, e1, 0)
    assert cls.v2 == -4 and cls.div == 2 and cls.is_reflective
    d1 = lattice("D1")
    # the same dual vector b/2 sits in the z=1/2 class for n=1 and in the
    # z=0 class for n=0 because div(v) feels the hyperbolic components
    inner_class = d1.eichler_invariant(1, (1,), 0)
    assert (inner_class.v2, inner_class.div) == (-4, 2)
    outer_class = d1.eichler_invariant(0, (1,), 0)
    assert (outer_class.v2, outer_class.div) == (-4, 4)
    a2 = lattice("A2")
    cls = a2.eichler_invariant(0, (1, 0), 0)
    assert (cls.v2, cls.div) == (-6, 3) and cls.is_reflective
    a1 = lattice("A1")
    cls = a1.eichler_invariant(0, (Fraction(1, 2),), 0)
    assert (cls.v2, cls.div) == (-2, 2) and cls.is_reflective


def test_classify_d5_unique_stable_class():
    d5 = lattice("D5")
    classes = lattice("D5").classify_reflective()
    stable = [c for c in classes if c.in_tilde_so]
    assert len(stable) == 1
    c = stable[0]
    assert (c.v2, c.div) == (-4, 2)
    assert c.t_action == "-id"
    n, ell, m = c.witness
    got = d5.eichler_invariant(n, ell, m)
    assert (got.v2, got.div) == (c.v2, c.div)
    assert got.kappa in c.kappas


def test_classify_odd_vs_even_dn():
    for n in range(2, 9):
        classes = lattice("D%d" % n).classify_reflective()
        stable = [c for c in classes if c.in_tilde_so]
        if n % 2:
            assert len(stable) == 1
        else:
            assert stable == []
        # the divisor class of the tower members is present for every n
        assert any((c.v2, c.div) == (-4, 2) for c in classes)


def test_classify_d1_three_negative_classes():
    classes = lattice("D1").classify_reflective()
    assert {(c.v2, c.div) for c in classes} == {(-2, 1), (-4, 2), (-4, 4)}
    by_div = {c.div: c for c in classes}
    assert by_div[4].kappas == ((Fraction(1, 2),), (Fraction(3, 2),))
    assert by_div[2].kappas == ((Fraction(1),),)


def test_classify_a2_and_a1():
    a2 = lattice("3A2")
    classes = a2.classify_reflective()
    assert all(c.v2 in (-2, -6) for c in classes)
    assert any((c.v2, c.div) == (-6, 3) for c in classes)
    a1 = lattice("4A1")
    classes = a1.classify_reflective()
    assert any((c.v2, c.div) == (-2, 2) for c in classes)
    for c in classes:
        n, ell, m = c.witness
        got = a1.eichler_invariant(n, ell, m)
        assert (got.v2, got.div) == (c.v2, c.div)


def test_witness_consistency_everywhere():
    for name in CATALOGUE:
        lat = lattice(name)
        for c in lat.classify_reflective():
            n, ell, m = c.witness
            got = lat.eichler_invariant(n, ell, m)
            assert (got.v2, got.div) == (c.v2, c.div)
            assert got.kappa in c.kappas


def test_unknown_lattice_rejected():
    with pytest.raises(ValueError):
        lattice("E8")
