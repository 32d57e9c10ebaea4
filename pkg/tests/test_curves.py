from fractions import Fraction
from itertools import product

import pytest
from _fans import FANS, data, fan

from fanmirror.curves import galois_phase, mori_cone, refined_sequence
from fanmirror.errors import ProfileError, ValidationError
from fanmirror.lattice import same_rational_lattice

F = Fraction


def test_lambda_p1():
    _, ref, _, _ = data("P1")
    assert ref.lambda_basis == [(1, 1)]
    assert same_rational_lattice(ref.lambda_basis, [tuple(F(x) for x in r) for r in ref.L_basis], 2)


def test_lambda_p112():
    _, ref, _, _ = data("P112")
    assert same_rational_lattice(ref.lambda_basis, [(F(1, 2), F(1, 2), 1)], 3)
    assert same_rational_lattice(ref.o_lattice, [(1, 0, 0), (0, 1, 0), (0, 0, 1), (F(1, 2), F(1, 2), 0)], 3)


def test_lambda_bmu2():
    _, ref, _, _ = data("Bmu2")
    assert ref.rank == 0
    assert ref.o_group.torsion == (2,)


def test_dclass_examples():
    _, ref, _, _ = data("P1")
    assert ref.dclass((1,), (0,)) == (0, 0)
    assert ref.dclass((1,), (-1,)) == (1, 1)
    _, ref, _, _ = data("P12")
    assert ref.dclass((1,), (-1,)) == (F(1, 2), 1)
    assert ref.coords(ref.dclass((1,), (-1,))) == (1,)


def test_effective_examples():
    _, ref, mori, _ = data("P1")
    assert mori.wall_classes == [(1, 1)]
    assert mori.is_effective((1, 1))
    assert not mori.is_effective((-1, -1))
    assert mori.is_effective((0, 0))
    assert mori.enumerate_effective(3) == [(0,), (1,), (2,), (3,)]
    _, _, mori, _ = data("P12")
    assert mori.enumerate_effective(2) == [(0,), (1,), (2,), (3,), (4,)]
    _, _, mori, _ = data("C2mu2")
    assert mori.enumerate_effective(5) == [()]


def test_bad_ample_class():
    _, ref, _, _ = data("P1")
    with pytest.raises(ProfileError):
        mori_cone(ref, (1, -1))
    with pytest.raises(ProfileError):
        mori_cone(ref, (1,))


def test_sigma0_range():
    with pytest.raises(ValidationError):
        refined_sequence(fan("P1"), 5)


def test_pic_st_examples():
    _, ref, _, _ = data("P1")
    group, lifts = ref.pic_st
    assert group.rank == 0 and group.torsion == () and lifts == []
    _, ref, _, _ = data("P12")
    group, (xi,) = ref.pic_st
    assert group.torsion == (2,)
    assert ref.age_pairing(xi, fan("P12").psi((1,))[0], (1,)) == F(1, 2)
    _, ref, _, _ = data("Bmu2")
    assert ref.pic_st[0].torsion == (2,)


# invariants ----------------------------------------------------------------------


@pytest.mark.parametrize("name", sorted(FANS))
def test_refined_sequence_exact(name):
    f, ref, _, _ = data(name)
    # Lambda sits between L and L_Q; every O generator maps onto N and lam(k) lies in Lambda
    L = [tuple(F(x) for x in r) for r in ref.L_basis]
    for v in L:
        assert ref.in_lambda(v)
    for lam, k in ref.o_generators:
        assert ref.in_O(lam, k)
    for k in f.points_by_height(2):
        assert ref.in_lambda(ref.lam(k))


@pytest.mark.parametrize("name", sorted(FANS))
def test_lambda_generated_by_dclasses(name):
    f, ref, _, _ = data(name)
    # Box and rays alone do not suffice (all such classes vanish on P^2)
    pts = sorted({b.v for b in f.box} | set(f.points_by_height(2)))
    d = [ref.dclass(k, l) for k in pts for l in pts if f.in_support(f.add(k, l))]
    d = [v for v in d if any(v)]
    assert same_rational_lattice(d, ref.lambda_basis, f.m) if d else ref.rank == 0


@pytest.mark.parametrize("name", sorted(FANS))
def test_age_of_rays_vanishes(name):
    f, ref, _, _ = data(name)
    _, lifts = ref.pic_st
    for xi in lifts:
        for i, b in enumerate(f.rays):
            e = tuple(F(int(j == i)) for j in range(f.m))
            assert ref.age_pairing(xi, e, b) == 0


@pytest.mark.parametrize("name", sorted(FANS))
def test_age_on_lambda_is_dot_product(name):
    f, ref, _, _ = data(name)
    _, lifts = ref.pic_st
    for xi in lifts:
        for c in product(range(-2, 3), repeat=ref.rank):
            lam = ref.to_q(c)
            dot = sum(F(x) * l for x, l in zip(xi[: f.m], lam))
            assert ref.age_pairing(xi, lam, f.N.zero()) == dot - (dot.numerator // dot.denominator)


@pytest.mark.parametrize("name", sorted(FANS))
def test_pic_st_finite(name):
    # Lambda* has full rank in L^vee on all the examples, so Pic^st is finite
    f, ref, _, _ = data(name)
    group, lifts = ref.pic_st
    assert group.rank == 0
    order = 1
    for t in group.torsion:
        order *= t
    mult = 1
    for fp in f.fixed_points:
        mult *= fp.order
    assert mult % order == 0


def test_galois_phase_p12():
    f, ref, _, G = data("P12")
    _, (xi,) = ref.pic_st
    assert galois_phase(ref, xi, qexp=(1,)) == F(1, 2)
    assert galois_phase(ref, xi, yexp=(1,), G=G) == F(1, 2)
    assert galois_phase(ref, xi, sector=(1,)) == F(1, 2)
    assert galois_phase(ref, xi, yexp=(1,), G=G, sector=(1,)) == 0
