from fractions import Fraction
from itertools import combinations
from math import gcd

import flint
from hypothesis import given, settings
from hypothesis import strategies as st

from fanmirror.lattice import (
    FgAbGroup,
    GroupHom,
    det,
    gale_dual,
    hermite_rows,
    integer_kernel,
    kernel,
    matmul,
    rational_lattice_basis,
    same_rational_lattice,
    smith_normal_form,
    solve_section,
)
from fanmirror.rationallp import feasible_point, maximize


def diag(D):
    return [D[i][i] for i in range(min(len(D), len(D[0]) if D else 0))]


def test_snf_scalar():
    _, D, _ = smith_normal_form([[2]])
    assert D == [[2]]


def test_snf_column():
    _, D, _ = smith_normal_form([[1], [1], [2]])
    assert D == [[1], [0], [0]]


def test_snf_diag_2_3():
    U, D, V = smith_normal_form([[2, 0], [0, 3]])
    assert diag(D) == [1, 6]
    assert matmul(matmul(U, [[2, 0], [0, 3]]), V) == D


def test_kernel_p1():
    assert kernel(GroupHom(FgAbGroup(2), FgAbGroup(1), [(1,), (-1,)])) in ([[1, 1]], [[-1, -1]])


def test_kernel_p112():
    ker = kernel(GroupHom(FgAbGroup(3), FgAbGroup(2), [(1, 0), (-1, 2), (0, -1)]))
    assert same_rational_lattice(ker, [(1, 1, 2)], 3)


def test_kernel_injective():
    assert kernel(GroupHom(FgAbGroup(1), FgAbGroup(1), [(3,)])) == []


def test_gale_dual_examples():
    _, L, D = gale_dual(FgAbGroup(1), [(1,), (-1,)])
    assert L.group == FgAbGroup(1) and D == [(1,), (1,)]
    _, L, D = gale_dual(FgAbGroup(1), [(2,), (-1,)])
    assert L.group == FgAbGroup(1) and sorted(abs(d[0]) for d in D) == [1, 2]
    _, L, D = gale_dual(FgAbGroup(0, (2,)), [])
    assert L.group == FgAbGroup(0, (2,)) and D == []


def test_gale_dual_kills_M():
    N = FgAbGroup(2)
    rays = [(1, 0), (-1, 2), (0, -1)]
    M_rows, L, D = gale_dual(N, rays)
    for row in M_rows:
        assert L.is_zero(list(row) + [0] * len(N.torsion))


def test_sections():
    ident = GroupHom(FgAbGroup(2), FgAbGroup(2), [(1, 0), (0, 1)])
    s = solve_section(ident)
    assert [s(e) for e in [(1, 0), (0, 1)]] == [(1, 0), (0, 1)]
    assert solve_section(GroupHom(FgAbGroup(1), FgAbGroup(1), [(2,)])) is None
    # automorphism of Z + Z/2 mixing the free and torsion generators
    T = FgAbGroup(1, (2,))
    pi = GroupHom(T, T, [(1, 1), (0, 1)])
    s = solve_section(pi)
    assert s is not None
    assert all(pi(s(g)) == g for g in [(1, 0), (0, 1)])


def test_torsion_group_arith():
    N = FgAbGroup(1, (2, 4))
    x = N.normalize((3, 3, 5))
    assert x == (3, 1, 1)
    assert N.add(x, x) == (6, 0, 2)
    assert N.neg(x) == (-3, 1, 3)
    assert len(list(N.torsion_elements())) == 8


def test_rational_lattices():
    b = rational_lattice_basis([(Fraction(1, 2), Fraction(1, 2)), (1, 0), (0, 1)], 2)
    assert same_rational_lattice(b, [(Fraction(1, 2), Fraction(1, 2)), (0, 1)], 2)


def test_lp_small():
    # max x + y, x + 2y <= 4, 3x + y <= 6, x, y >= 0 -> (8/5, 6/5)
    res = maximize([1, 1], [[1, 2], [3, 1]], [4, 6], nonneg=[0, 1])
    assert res.status == "optimal" and res.value == Fraction(14, 5)
    # unbounded with a free variable (the case that broke an off-the-shelf solver)
    assert maximize([1, 0], [[-1, 1]], [3], nonneg=[0]).status == "unbounded"
    assert feasible_point([[1], [-1]], [-1, -1], n=1) is None


# properties ----------------------------------------------------------------------

mats = st.integers(1, 3).flatmap(
    lambda m: st.integers(1, 3).flatmap(
        lambda n: st.lists(st.lists(st.integers(-6, 6), min_size=n, max_size=n), min_size=m, max_size=m)
    )
)


def determinantal_divisors(A):
    m, n = len(A), len(A[0])
    out = []
    for k in range(1, min(m, n) + 1):
        g = 0
        for rows in combinations(range(m), k):
            for cols in combinations(range(n), k):
                sub = flint.fmpz_mat([[A[r][c] for c in cols] for r in rows])
                g = gcd(g, int(sub.det()))
        out.append(g)
    return out


@given(mats)
@settings(max_examples=80, deadline=None)
def test_snf_against_minors(A):
    U, D, V = smith_normal_form(A)
    assert abs(det(U)) == 1 and abs(det(V)) == 1
    assert matmul(matmul(U, A), V) == D
    d = diag(D)
    for i in range(len(D)):
        for j in range(len(D[0])):
            if i != j:
                assert D[i][j] == 0
    for a, b in zip(d, d[1:]):
        assert (a == 0 and b == 0) or (a != 0 and b % a == 0)
    prods = []
    p = 1
    for x in d:
        p *= abs(x)
        prods.append(p)
    assert prods == determinantal_divisors(A)


@given(mats)
@settings(max_examples=60, deadline=None)
def test_kernel_and_rank(A):
    n = len(A[0])
    ker = integer_kernel(A, n)
    for v in ker:
        assert all(sum(a * x for a, x in zip(row, v)) == 0 for row in A)
    rank = int(flint.fmpz_mat(A).rank())
    assert len(ker) + rank == n


@given(mats)
@settings(max_examples=60, deadline=None)
def test_hermite_spans_rows(A):
    H, T = hermite_rows(A)
    assert matmul(T, A) == H
    assert abs(det(T)) == 1
    assert same_rational_lattice([r for r in H if any(r)], [r for r in A if any(r)], len(A[0]))
