from fractions import Fraction
from itertools import product
from math import lcm

import pytest
from _fans import extension, fan

from fanmirror.curves import galois_phase
from fanmirror.errors import ProfileError, ValidationError
from fanmirror.iseries import (
    MirrorSetup,
    Profile,
    compositions,
    enumerate_K,
    hyp_factor,
    ifunction,
    loc_series,
    loc_zero,
    make_index,
    restricted_summand,
    series_key_degree,
    verify_loc_ode,
)

F = Fraction
S0 = frozenset({0})


def setup(name, profile, chi=None):
    return MirrorSetup(fan(name), extension(name), Profile(*profile), chi)


def test_compositions():
    assert compositions(2, 1) == [(0, 0), (1, 0), (0, 1)]
    assert compositions(0, 3) == [()]


def test_profile_rejects_negative():
    with pytest.raises(ProfileError):
        Profile(-1, 0, 0)


def test_enumerate_p1():
    s = setup("P1", (3, 1, 0))
    got = [(h.lam, h.d, h.v) for h in enumerate_K(s, (0,))]
    assert got == [((F(d), F(d)), (d,), (0,)) for d in range(4)]


def test_enumerate_p12_twisted_index():
    s = setup("P12", (2, 0, 2))
    hs = enumerate_K(s, (0,))
    h = next(h for h in hs if h.lamG == (1,) and h.d == (0,))
    assert h.lam == (F(-1, 2), F(0)) and h.v == (1,)


def test_enumerate_outside_support():
    s = setup("C2mu2", (0, 0, 1))
    with pytest.raises(ValidationError):
        enumerate_K(s, (-1, 0))


def test_hyp_factor_p1_degree_one():
    s = setup("P1", (1, 0, 0))
    h = make_index(s, (0,), (1,), ())
    chi = s.field.chi[0]
    z = s.field.z
    assert hyp_factor(s, h, S0) == 1 / ((chi + z) * z)
    # at the other fixed point u_0 = 0 and u_1 = -chi
    assert hyp_factor(s, h, frozenset({1})) == 1 / ((z - chi) * z)


def test_loc_zero_p12():
    s = setup("P12", (0, 0, 0))
    F_ = s.field
    assert loc_zero(s, (1,)) == s.idx.from_map({(S0, (1,)): 1})
    assert loc_zero(s, (-1,)) == s.idx.from_map({(frozenset({1}), (0,)): -F_.chi[0]})
    assert loc_zero(s, (0,)) == s.idx.unit()


def test_ifunction_at_q_zero():
    s = setup("P1", (0, 0, 0))
    I = ifunction(s)
    assert dict(I.items()) == {s.key(): s.idx.unit() * s.field.z}


@pytest.mark.parametrize(
    "name,profile",
    [("P1", (3, 1, 0)), ("P12", (2, 1, 3)), ("P1", (0, 0, 0)), ("P112", (2, 0, 1)), ("C2mu2", (0, 0, 4)),
     ("P2", (2, 0, 1)), ("Bmu2", (0, 0, 3))],
)
def test_loc_ode(name, profile):
    rep = verify_loc_ode(setup(name, profile))
    assert rep.ok, rep.failures
    assert rep.checked > 0


def test_loc_ode_specialized():
    rep = verify_loc_ode(setup("P12", (2, 1, 2), chi=(F(3, 7),)))
    assert rep.ok, rep.failures


def test_specialized_non_generic_point():
    with pytest.raises(ProfileError):
        setup("P12", (1, 0, 0), chi=(0,))


# brute-force completeness -------------------------------------------------------------


def brute_force(s, k, box=3):
    """Nonzero summands from a raw grid of lambda, filtered only by balance and degree."""
    fan = s.fan
    den = lcm(*(fp.order for fp in fan.fixed_points))
    grid = [F(a, den) for a in range(-box * den, box * den + 1)]
    found = {}
    for lamG in compositions(len(s.G), s.profile.yord):
        for lam in product(grid, repeat=s.m):
            # d(lambda) = lambda + Psi(k) + sum a_l Psi(l)
            dq = [x + p for x, p in zip(lam, s.psi(k))]
            for a, l in zip(lamG, s.G):
                dq = [x + a * p for x, p in zip(dq, s.psi(l))]
            if not s.ref.in_lambda(tuple(dq)):
                continue
            d = s.ref.coords(tuple(dq))
            if s.mori.degree(tuple(dq)) > s.profile.qdeg:
                continue
            h = make_index(s, k, d, lamG)
            assert h.lam == tuple(lam)
            if frozenset(i for i, x in enumerate(lam) if x.denominator != 1) not in fan.cones:
                continue
            vec = restricted_summand(s, h)
            if not vec.is_zero():
                found[(h.d, h.lamG)] = vec
    return found


@pytest.mark.parametrize(
    "name,profile,box", [("P1", (3, 0, 0), 4), ("P12", (2, 0, 2), 6), ("P112", (F(3, 2), 0, 1), 3)]
)
def test_enumeration_complete(name, profile, box):
    s = setup(name, profile)
    for k in [b.v for b in s.fan.box] + list(s.fan.rays):
        listed = {}
        for h in enumerate_K(s, k):
            vec = restricted_summand(s, h)
            if not vec.is_zero():
                listed[(h.d, h.lamG)] = vec
        assert brute_force(s, k, box) == listed


# invariants ----------------------------------------------------------------------


@pytest.mark.parametrize("name,profile", [("P12", (2, 0, 3)), ("P112", (2, 0, 2)), ("Bmu2", (0, 0, 3))])
def test_loc_galois_equivariant(name, profile):
    s = setup(name, profile)
    ref = s.ref
    _, lifts = ref.pic_st
    assert lifts
    for xi in lifts:
        for k in [b.v for b in s.fan.box] + [s.fan.N.zero()]:
            target = ref.age_pairing(xi, s.psi(k), k)
            for key, vec in loc_series(s, k).items():
                for (_, w), c in zip(s.idx.keys, vec):
                    if c:
                        assert galois_phase(ref, xi, key.q, key.y, s.G, sector=w) == target


@pytest.mark.parametrize("name,profile", [("P1", (3, 1, 0)), ("P12", (2, 0, 3)), ("P2", (2, 0, 1))])
def test_ifunction_homogeneous(name, profile):
    s = setup(name, profile)
    for key, vec in ifunction(s).items():
        for (_, w), c in zip(s.idx.keys, vec):
            if c:
                assert c.homogeneous_degree() == 1 - series_key_degree(s, key) - s.fan.age(w)
