"""Exact linear programming over the rationals (two-phase simplex, Bland's rule)."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


@dataclass
class LPResult:
    status: str  # "optimal", "infeasible" or "unbounded"
    value: Fraction | None = None
    x: list | None = None


def _pivot(T, basis, r, c):
    piv = T[r][c]
    T[r] = [v / piv for v in T[r]]
    for i in range(len(T)):
        if i != r and T[i][c]:
            f = T[i][c]
            T[i] = [a - f * b for a, b in zip(T[i], T[r])]
    basis[r] = c


def _simplex(T, basis, ncols, allowed):
    """Minimize the objective in the last row of T; returns False if unbounded."""
    obj = len(T) - 1
    while True:
        # Bland: smallest entering index with negative reduced cost
        c = next((j for j in range(ncols) if allowed[j] and T[obj][j] < 0), None)
        if c is None:
            return True
        best = None
        for i in range(obj):
            if T[i][c] > 0:
                ratio = T[i][-1] / T[i][c]
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            return False
        _pivot(T, basis, best[1], c)


def maximize(c, A_ub=(), b_ub=(), A_eq=(), b_eq=(), nonneg=None) -> LPResult:
    """Maximize c.x subject to A_ub x <= b_ub and A_eq x = b_eq.

    Variables are free unless ``nonneg`` lists the indices constrained to be >= 0.
    """
    n = len(c)
    nonneg = set(nonneg or ())
    # split free variables as x = p - q
    cols = []
    for j in range(n):
        cols.append((j, 1))
        if j not in nonneg:
            cols.append((j, -1))
    nv = len(cols)

    def expand(row):
        return [Fraction(row[j]) * s for j, s in cols]

    rows, rhs = [], []
    n_slack = len(A_ub)
    for k, (row, b) in enumerate(zip(A_ub, b_ub)):
        slack = [Fraction(int(i == k)) for i in range(n_slack)]
        rows.append(expand(row) + slack)
        rhs.append(Fraction(b))
    for row, b in zip(A_eq, b_eq):
        rows.append(expand(row) + [Fraction(0)] * n_slack)
        rhs.append(Fraction(b))
    for i in range(len(rows)):
        if rhs[i] < 0:
            rows[i] = [-v for v in rows[i]]
            rhs[i] = -rhs[i]
    m = len(rows)
    ncore = nv + n_slack
    ncols = ncore + m
    T = [rows[i] + [Fraction(int(i == k)) for k in range(m)] + [rhs[i]] for i in range(m)]
    basis = [ncore + i for i in range(m)]
    # phase one: minimize sum of artificials
    obj = [Fraction(0)] * (ncols + 1)
    for i in range(m):
        obj = [a - b for a, b in zip(obj, T[i])]
        obj[ncore + i] += 1
    T.append(obj)
    _simplex(T, basis, ncols, [True] * ncols)
    if T[-1][-1] != 0:
        return LPResult("infeasible")
    # drive artificials out of the basis where possible
    for i in range(m):
        if basis[i] >= ncore:
            c_in = next((j for j in range(ncore) if T[i][j]), None)
            if c_in is not None:
                _pivot(T, basis, i, c_in)
    T.pop()
    cost = expand(c) + [Fraction(0)] * n_slack
    obj = [-v for v in cost] + [Fraction(0)] * m + [Fraction(0)]
    for i in range(m):
        if basis[i] < ncore and obj[basis[i]]:
            f = obj[basis[i]]
            obj = [a - f * b for a, b in zip(obj, T[i])]
    T.append(obj)
    allowed = [j < ncore for j in range(ncols)]
    if not _simplex(T, basis, ncols, allowed):
        return LPResult("unbounded")
    vals = [Fraction(0)] * ncols
    for i in range(m):
        vals[basis[i]] = T[i][-1]
    x = [Fraction(0)] * n
    for k, (j, s) in enumerate(cols):
        x[j] += s * vals[k]
    value = sum((Fraction(a) * b for a, b in zip(c, x)), Fraction(0))
    return LPResult("optimal", value, x)


def feasible_point(A_ub=(), b_ub=(), A_eq=(), b_eq=(), n=None, nonneg=None):
    """Some feasible point, or None."""
    if n is None:
        n = len((list(A_ub) + list(A_eq))[0])
    res = maximize([0] * n, A_ub, b_ub, A_eq, b_eq, nonneg)
    return res.x if res.status == "optimal" else None
