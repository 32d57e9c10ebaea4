"""Stacky fans: validation, cone coordinates, Box elements and fixed-point data.

Ray and cone indices are 0-based here; the text input format is 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations, product
from math import floor

from . import lattice as lat
from .errors import Diagnostic, SupportError, ValidationError
from .lattice import FgAbGroup
from .rationallp import maximize


@dataclass(frozen=True)
class BoxElement:
    v: tuple
    cone: frozenset  # minimal cone containing the image of v
    psi: tuple
    age: Fraction


@dataclass(frozen=True)
class FixedPointData:
    cone: frozenset
    weights: dict  # i -> coefficient vector of u_i(sigma) in the chi basis
    order: int  # |N(sigma)|


class StackyFan:
    """Finitely generated group N, rays b_1..b_m in N and a simplicial fan on their images.

    ``cones`` lists cones as index collections. With ``maximal_only`` (the
    default) the face family is their closure; otherwise the list must already
    be closed under faces and ``validate`` reports missing faces.
    """

    def __init__(self, N: FgAbGroup, rays, cones, name: str = "", maximal_only: bool = True):
        self.N = N
        self.name = name
        self.rays = [N.normalize(b) for b in rays]
        self.m = len(self.rays)
        self.n = N.rank
        self.rays_bar = [b[: self.n] for b in self.rays]
        listed = {frozenset(c) for c in cones}
        self._listed = listed
        self._maximal_only = maximal_only
        self.maximal = sorted(
            (c for c in listed if not any(c < d for d in listed)),
            key=lambda c: (sorted(c), len(c)),
        )

    def __repr__(self):
        return f"StackyFan({self.name or 'unnamed'}: m={self.m}, n={self.n}, torsion={self.N.torsion})"

    @cached_property
    def cones(self) -> set:
        out = set()
        for c in self.maximal:
            for r in range(len(c) + 1):
                out.update(frozenset(s) for s in combinations(sorted(c), r))
        return out

    @cached_property
    def walls(self) -> list:
        """Pairs (sigma, sigma', tau) of maximal cones meeting along a codimension-one face."""
        out = []
        for a, b in combinations(self.maximal, 2):
            tau = a & b
            if len(tau) == self.n - 1 and len(a) == self.n and len(b) == self.n:
                out.append((a, b, tau))
        return out

    @cached_property
    def boundary_walls(self) -> list:
        """Codimension-one faces contained in exactly one maximal cone."""
        count = {}
        for c in self.maximal:
            if len(c) != self.n:
                continue
            for i in c:
                count.setdefault(c - {i}, []).append(c)
        return [(cs[0], tau) for tau, cs in sorted(count.items(), key=lambda t: sorted(t[0])) if len(cs) == 1]

    # coordinates --------------------------------------------------------

    def _basis_matrix(self, sigma) -> list:
        idx = sorted(sigma)
        return [[self.rays_bar[i][r] for i in idx] for r in range(self.n)]

    def cone_coords(self, sigma, kbar):
        """Coordinates c with kbar = sum c_i b_i over a full-dimensional simplicial cone."""
        idx = sorted(sigma)
        sol = lat.rational_solve(self._basis_matrix(sigma), kbar)
        if sol is None:
            raise ValueError(f"cone {sorted(sigma)} is not full-dimensional")
        return dict(zip(idx, sol))

    def locate(self, k):
        """Return (coords, minimal cone) for k in N, or raise SupportError."""
        kbar = tuple(k[: self.n])
        if not any(kbar):
            return {}, frozenset()
        for sigma in self.maximal:
            if len(sigma) != self.n:
                continue
            c = self.cone_coords(sigma, kbar)
            if all(x >= 0 for x in c.values()):
                return {i: x for i, x in c.items() if x}, frozenset(i for i, x in c.items() if x)
        raise SupportError(f"{tuple(k)} is outside the support of the fan")

    def in_support(self, k) -> bool:
        try:
            self.locate(k)
        except SupportError:
            return False
        return True

    def psi(self, k):
        """(Psi(k) as an m-tuple of Fractions, minimal cone)."""
        c, sigma = self.locate(k)
        return tuple(Fraction(c.get(i, 0)) for i in range(self.m)), sigma

    def age(self, k) -> Fraction:
        return sum(self.psi(k)[0], Fraction(0))

    def add(self, k, l):
        return self.N.add(k, l)

    def combine(self, base, coeffs: dict):
        """base + sum_i coeffs[i] * b_i in N (integer coefficients)."""
        out = self.N.normalize(base)
        for i, c in coeffs.items():
            if c:
                out = self.N.add(out, self.N.scale(int(c), self.rays[i]))
        return out

    # Box ------------------------------------------------------------------

    def box_of_cone(self, sigma) -> list:
        """All v in N whose image has cone coordinates in [0, 1) over sigma."""
        sigma = frozenset(sigma)
        idx = sorted(sigma)
        if not idx:
            frees = [(0,) * self.n]
        else:
            B = self._basis_matrix(sigma)
            U, D, _ = lat.smith_normal_form(B)
            Uinv = lat.unimodular_inverse(U)
            k = len(idx)
            ranges = [range(D[j][j]) for j in range(k)]
            frees = set()
            for y in product(*ranges):
                y = list(y) + [0] * (self.n - k)
                x = lat.matvec(Uinv, y)
                frees.add(tuple(self._reduce_to_parallelepiped(sigma, x)))
            frees = sorted(frees)
        out = []
        for f in frees:
            for t in self.N.torsion_elements():
                v = tuple(f) + tuple(t[self.n:])
                out.append(self._box_element(v))
        return out

    def _reduce_to_parallelepiped(self, sigma, x):
        c = self._span_coords(sigma, x)
        out = list(x)
        for i, ci in c.items():
            fl = floor(ci)
            if fl:
                out = [a - fl * b for a, b in zip(out, self.rays_bar[i])]
        return out

    def _span_coords(self, sigma, x) -> dict:
        """Coordinates of x in the span of the rays of sigma (assumed to lie in it)."""
        idx = sorted(sigma)
        rows = [[Fraction(self.rays_bar[i][r]) for i in idx] + [Fraction(x[r])] for r in range(self.n)]
        # least-squares free exact solve: row-reduce the augmented system
        sol = _solve_consistent(rows, len(idx))
        if sol is None:
            raise ValueError(f"{x} is not in the span of cone {idx}")
        return dict(zip(idx, sol))

    def _box_element(self, v) -> BoxElement:
        p, sigma = self.psi(v)
        return BoxElement(tuple(v), sigma, p, sum(p, Fraction(0)))

    @cached_property
    def box(self) -> list:
        """Box elements over all cones, sorted by (age, v)."""
        seen = {}
        for sigma in self.maximal:
            for b in self.box_of_cone(sigma):
                seen[b.v] = b
        return sorted(seen.values(), key=lambda b: (b.age, b.v))

    def box_element(self, v) -> BoxElement:
        v = self.N.normalize(v)
        for b in self.box:
            if b.v == v:
                return b
        raise ValueError(f"{v} is not a Box element")

    def inv_box(self, sigma, v):
        """The Box(sigma) element v' with v + v' in the subgroup generated by the rays of sigma."""
        sigma = frozenset(sigma)
        v = self.N.normalize(v)
        if v not in {b.v for b in self.box_of_cone(sigma)}:
            raise ValueError(f"{v} is not in Box({sorted(sigma)})")
        w = self.N.neg(v)
        c = self._span_coords(sigma, w[: self.n]) if sigma else {}
        return self.combine(w, {i: -floor(ci) for i, ci in c.items()})

    # fixed points -----------------------------------------------------------

    def local_group_order(self, sigma) -> int:
        d = lat.det(self._basis_matrix(sigma))
        order = abs(int(d))
        for t in self.N.torsion:
            order *= t
        return order

    def fixed_point_weights(self, sigma) -> FixedPointData:
        """Solve chi = sum_{j in sigma} b_j u_j(sigma) for the weights u_j(sigma) as linear forms in chi."""
        sigma = frozenset(sigma)
        if sigma not in self.maximal or len(sigma) != self.n:
            raise ValueError(f"{sorted(sigma)} is not a full-dimensional maximal cone")
        idx = sorted(sigma)
        inv = lat.rational_inverse(self._basis_matrix(sigma))
        weights = {i: tuple(inv[r]) for r, i in enumerate(idx)}
        return FixedPointData(sigma, weights, self.local_group_order(sigma))

    @cached_property
    def fixed_points(self) -> list:
        return [self.fixed_point_weights(s) for s in self.maximal]

    @cached_property
    def fixed_point_keys(self) -> list:
        """Keys (sigma, v) with sigma maximal and v in Box(sigma)."""
        return [(s, b.v) for s in self.maximal for b in self.box_of_cone(s)]

    @property
    def euler_number(self) -> int:
        return sum(f.order for f in self.fixed_points)

    def points_by_height(self, height: int) -> list:
        """Points k of N in the support with l1-norm of the free part at most ``height``."""
        out = []
        for x in product(range(-height, height + 1), repeat=self.n):
            if sum(abs(a) for a in x) > height:
                continue
            for t in self.N.torsion_elements():
                k = tuple(x) + tuple(t[self.n:])
                if self.in_support(k):
                    out.append(k)
        return out


def _solve_consistent(rows, nvars):
    """Solve an augmented consistent system with independent columns; None if inconsistent."""
    a = [list(r) for r in rows]
    piv_rows = []
    r = 0
    for c in range(nvars):
        p = next((i for i in range(r, len(a)) if a[i][c]), None)
        if p is None:
            return None
        a[r], a[p] = a[p], a[r]
        pv = a[r][c]
        a[r] = [x / pv for x in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        piv_rows.append(r)
        r += 1
    if any(a[i][-1] for i in range(r, len(a))):
        return None
    return [a[i][-1] for i in piv_rows]


# validation -----------------------------------------------------------------


def support_function_lp(fan: StackyFan):
    """Maximize the convexity slack s <= 1 over piecewise-linear functions m_sigma.

    Returns (s, {sigma: m_sigma}). A positive s certifies a strictly convex
    support function: m_sigma and m_sigma' agree on shared rays and
    m_sigma'.b_j >= m_sigma.b_j + s for j in sigma' outside sigma.
    """
    n = fan.n
    cones = list(fan.maximal)
    pos = {c: k for k, c in enumerate(cones)}
    nvar = n * len(cones) + 1
    s_idx = nvar - 1

    def dot_row(c, b, sign=1):
        row = [0] * nvar
        for r in range(n):
            row[pos[c] * n + r] += sign * b[r]
        return row

    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for a, b, tau in fan.walls:
        for i in tau:
            row = [x - y for x, y in zip(dot_row(a, fan.rays_bar[i]), dot_row(b, fan.rays_bar[i]))]
            A_eq.append(row)
            b_eq.append(0)
        for one, other in ((a, b), (b, a)):
            for j in other - one:
                # m_one.b_j - m_other.b_j + s <= 0
                row = [x - y for x, y in zip(dot_row(one, fan.rays_bar[j]), dot_row(other, fan.rays_bar[j]))]
                row[s_idx] = 1
                A_ub.append(row)
                b_ub.append(0)
    row = [0] * nvar
    row[s_idx] = 1
    A_ub.append(row)
    b_ub.append(1)
    c = [0] * nvar
    c[s_idx] = 1
    res = maximize(c, A_ub, b_ub, A_eq, b_eq)
    if res.status != "optimal":
        return Fraction(-1), {}
    ms = {cn: tuple(res.x[pos[cn] * n: pos[cn] * n + n]) for cn in cones}
    return res.value, ms


def _proper_intersection(fan: StackyFan, a, b) -> bool:
    """True when the cones of a and b meet exactly in the cone of a & b (separating hyperplane exists)."""
    n = fan.n
    tau = a & b
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for i in tau:
        A_eq.append(list(fan.rays_bar[i]) + [0])
        b_eq.append(0)
    for i in a - tau:
        A_ub.append([-x for x in fan.rays_bar[i]] + [1])
        b_ub.append(0)
    for j in b - tau:
        A_ub.append(list(fan.rays_bar[j]) + [1])
        b_ub.append(0)
    A_ub.append([0] * n + [1])
    b_ub.append(1)
    res = maximize([0] * n + [1], A_ub, b_ub, A_eq, b_eq)
    return res.status == "optimal" and res.value > 0


def validate(fan: StackyFan) -> list:
    """Return the list of violated conditions (empty when the fan is valid)."""
    diags = []
    n = fan.n
    for i, b in enumerate(fan.rays_bar):
        if not any(b):
            diags.append(Diagnostic("ray", f"ray {i + 1} has zero image in N/torsion", i + 1))
    for c in sorted(fan._listed, key=sorted):
        if any(i < 0 or i >= fan.m for i in c):
            diags.append(Diagnostic("index", "cone refers to a missing ray", sorted(j + 1 for j in c)))
    if diags:
        return diags
    for c in sorted(fan.cones, key=lambda c: (len(c), sorted(c))):
        if lat.rational_rank([fan.rays_bar[i] for i in sorted(c)]) < len(c):
            diags.append(
                Diagnostic("simplicial", "rays of a cone are linearly dependent", sorted(j + 1 for j in c))
            )
            break
    if diags:
        return diags
    if not fan._maximal_only:
        for c in sorted(fan._listed, key=sorted):
            for i in c:
                if c - {i} not in fan._listed:
                    diags.append(Diagnostic("face_closure", "a face of a listed cone is missing", sorted(j + 1 for j in c - {i})))
                    return diags
    used = set().union(*fan.maximal) if fan.maximal else set()
    for i in range(fan.m):
        if i not in used:
            diags.append(Diagnostic("ray_cone", f"ray {i + 1} is not a cone of the fan", i + 1))
    if not any(len(c) == n for c in fan.maximal):
        diags.append(Diagnostic("full_cone", "no maximal-dimension cone", None))
        return diags
    for c in fan.maximal:
        if len(c) != n:
            diags.append(Diagnostic("pure", "maximal cone of lower dimension", sorted(j + 1 for j in c)))
    if diags:
        return diags
    for a, b in combinations(fan.maximal, 2):
        if not _proper_intersection(fan, a, b):
            diags.append(
                Diagnostic("fan", "two cones overlap beyond a common face", (sorted(i + 1 for i in a), sorted(i + 1 for i in b)))
            )
            return diags
    for sigma, tau in fan.boundary_walls:
        (j,) = sigma - tau
        normal = _wall_normal(fan, tau)
        if sum(x * y for x, y in zip(normal, fan.rays_bar[j])) < 0:
            normal = [-x for x in normal]
        for i, b in enumerate(fan.rays_bar):
            if sum(x * y for x, y in zip(normal, b)) < 0:
                diags.append(
                    Diagnostic(
                        "convex_support",
                        "boundary wall is not on a supporting hyperplane",
                        {"wall": sorted(t + 1 for t in tau), "ray": i + 1},
                    )
                )
                return diags
    s, _ = support_function_lp(fan)
    if s <= 0:
        diags.append(
            Diagnostic("semi_projective", "no strictly convex piecewise-linear support function", f"max slack {s}")
        )
    return diags


def _wall_normal(fan: StackyFan, tau):
    rows = [list(fan.rays_bar[i]) for i in sorted(tau)]
    ns = lat.rational_nullspace(rows, fan.n) if rows else [[Fraction(int(r == 0)) for r in range(fan.n)]]
    return ns[0]


def checked(fan: StackyFan) -> StackyFan:
    diags = validate(fan)
    if diags:
        raise ValidationError("invalid stacky fan: " + "; ".join(str(d) for d in diags), diags)
    return fan
