"""Curve classes: the lattices Lambda and O, splitting, Mori cone, ample degree, age pairing."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import product
from math import ceil, floor, gcd, lcm

from . import lattice as lat
from .errors import ProfileError, ValidationError
from .lattice import FgAbGroup, GroupHom, QuotientGroup
from .rationallp import feasible_point
from .stackyfan import StackyFan, support_function_lp


def _qvec(v):
    return tuple(Fraction(x) for x in v)


def _vadd(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _vsub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def _dot(a, b):
    return sum((Fraction(x) * y for x, y in zip(a, b)), Fraction(0))


def frac(x: Fraction) -> Fraction:
    """Representative of x mod 1 in [0, 1)."""
    x = Fraction(x)
    return x - floor(x)


class RefinedFanData:
    """Refined fan sequence 0 -> Lambda -> O -> N -> 0 for a validated fan.

    Elements of O are pairs (lambda in Q^m, k in N). Lambda elements are
    stored as Q^m vectors and addressed by integer coordinates in
    ``lambda_basis``.
    """

    def __init__(self, fan: StackyFan, sigma0: int = 0):
        self.fan = fan
        if not 0 <= sigma0 < len(fan.maximal):
            raise ValidationError(f"sigma0 index {sigma0 + 1} is out of range")
        self.sigma0 = fan.maximal[sigma0]
        if len(self.sigma0) != fan.n:
            raise ValidationError("sigma0 must be a full-dimensional cone")
        m = fan.m
        gens = []
        for b in fan.box:
            gens.append((b.psi, b.v))
        for i in range(m):
            gens.append((tuple(Fraction(int(j == i)) for j in range(m)), fan.rays[i]))
        self.o_generators = gens
        # Lambda: integer combinations of generators whose N-part vanishes
        src = FgAbGroup(len(gens))
        proj = GroupHom(src, fan.N, [k for _, k in gens])
        rel = lat.kernel(proj)
        lam_gens = []
        for x in rel:
            v = (Fraction(0),) * m
            for c, (lam, _) in zip(x, gens):
                if c:
                    v = _vadd(v, tuple(c * a for a in lam))
            lam_gens.append(v)
        self.lambda_basis = [tuple(r) for r in lat.rational_lattice_basis(lam_gens, m)]
        self.rank = len(self.lambda_basis)
        self.o_lattice = [tuple(r) for r in lat.rational_lattice_basis([g[0] for g in gens], m)]
        self.o_group = FgAbGroup(len(self.o_lattice), fan.N.torsion)
        # fan sequence and its Gale dual
        self.L_basis = lat.kernel(GroupHom(FgAbGroup(m), fan.N, fan.rays)) if m else []
        self.M_rows, self.Lvee, self.D = lat.gale_dual(fan.N, fan.rays)

    def orient(self, omega):
        """Flip rank-one bases so the generator has positive ample degree."""
        if self.rank == 1 and _dot(omega, self.lambda_basis[0]) < 0:
            self.lambda_basis = [tuple(-x for x in self.lambda_basis[0])]

    # coordinates ----------------------------------------------------------

    def to_q(self, coords) -> tuple:
        """Lambda-basis integer coordinates -> vector in Q^m."""
        out = (Fraction(0),) * self.fan.m
        for c, b in zip(coords, self.lambda_basis):
            if c:
                out = _vadd(out, tuple(c * x for x in b))
        return out

    def coords(self, lam) -> tuple:
        """Vector in Lambda -> integer coordinates; ValueError if lam is not in Lambda."""
        c = lat.rational_lattice_coords(self.lambda_basis, lam) if self.lambda_basis else (
            [] if not any(lam) else None
        )
        if c is None or any(x.denominator != 1 for x in c):
            raise ValueError(f"{tuple(str(x) for x in lam)} is not in Lambda")
        return tuple(int(x) for x in c)

    def rational_coords(self, lam):
        c = lat.rational_lattice_coords(self.lambda_basis, lam) if self.lambda_basis else []
        if c is None:
            raise ValueError("vector is not in the span of Lambda")
        return tuple(c)

    def in_lambda(self, lam) -> bool:
        try:
            self.coords(lam)
        except ValueError:
            return False
        return True

    def in_O(self, lam, k) -> bool:
        """Membership of (lam, k) in O: subtracting the splitting must land in Lambda."""
        fan = self.fan
        if tuple(sum(l * b[r] for l, b in zip(lam, fan.rays_bar)) for r in range(fan.n)) != tuple(
            Fraction(x) for x in k[: fan.n]
        ):
            return False
        return self.in_lambda(_vsub(_qvec(lam), self.section(k)[0]))

    # splitting -----------------------------------------------------------

    def section(self, k):
        """The splitting N -> O with (e_i, b_i) for i in sigma0."""
        fan = self.fan
        k = fan.N.normalize(k)
        c = fan.cone_coords(self.sigma0, k[: fan.n])
        lam = tuple(Fraction(c.get(i, 0)) for i in range(fan.m))
        return lam, k

    def lam(self, k) -> tuple:
        """lambda(k) = Psi(k) - section(k) as a vector in Q^m (an element of Lambda)."""
        return _vsub(self.fan.psi(k)[0], self.section(k)[0])

    def dclass(self, k, l) -> tuple:
        """d(k, l) = Psi(k) + Psi(l) - Psi(k + l)."""
        fan = self.fan
        return _vsub(_vadd(fan.psi(k)[0], fan.psi(l)[0]), fan.psi(fan.add(k, l))[0])

    # age pairing -----------------------------------------------------------

    def age_pairing(self, xi, lam, k) -> Fraction:
        """Pairing of xi in (Z^m)* + K* with (lam, k) in O, in [0, 1).

        Lifts through the resolution F = Z^(rank) + Z^(#torsion) -> N: the
        K-component of (lam, k) is (k_tor - sum lam_i b_i,tor) / d_j.
        """
        return frac(self._linear_age(list(xi), lam, self.fan.N.normalize(k)))

    @cached_property
    def pic_st(self):
        """(group, lifts of its generators to (Z^m)* + K*) for Pic^st = L^vee / Pic(X).

        Pic(X) is the set of xi pairing to zero with all of O; the Box
        generators (Psi(v), v) suffice since (e_i, b_i) always pairs to zero.
        """
        fan = self.fan
        J = fan.m + len(fan.N.torsion)
        rows = [list(r) for r in self.Lvee.relations]
        forms = []
        for b in fan.box:
            if not any(b.v):
                continue
            forms.append([self._linear_age([int(i == j) for i in range(J)], b.psi, b.v) for j in range(J)])
        if forms:
            den = lcm(*(x.denominator for f in forms for x in f))
            A = [[int(x * den) for x in f] for f in forms]
            cols = [[A[r][j] for r in range(len(A))] for j in range(J)]
            cols += [[den if r == s else 0 for r in range(len(A))] for s in range(len(A))]
            ker = lat.integer_kernel(lat.transpose(cols), len(cols))
            rows += [r[:J] for r in ker]
        else:
            rows += lat.identity(J)
        q = QuotientGroup(J, rows)
        return q.group, q.generators()

    def _linear_age(self, xi, lam, k) -> Fraction:
        """Unreduced rational value of the pairing with (lam, k)."""
        fan = self.fan
        m, n = fan.m, fan.n
        val = _dot(xi[:m], lam)
        for j, d in enumerate(fan.N.torsion):
            t = Fraction(k[n + j]) - sum((Fraction(l) * fan.rays[i][n + j] for i, l in enumerate(lam)), Fraction(0))
            val += xi[m + j] * t / d
        return val


def refined_sequence(fan: StackyFan, sigma0: int = 0) -> RefinedFanData:
    return RefinedFanData(fan, sigma0)


# Mori cone -----------------------------------------------------------------


@dataclass
class Wall:
    cones: tuple
    cls: tuple  # primitive in the relation lattice L, positive on the two non-shared rays
    lam_cls: tuple  # primitive in Lambda


class MoriData:
    """Wall classes generating the Mori cone, and a validated ample class."""

    def __init__(self, ref: RefinedFanData, ample=None):
        self.ref = ref
        fan = ref.fan
        m = fan.m
        walls = []
        seen = set()
        for a, b, tau in fan.walls:
            idx = sorted(a | b)
            rows = [[fan.rays_bar[i][r] for i in idx] for r in range(fan.n)]
            (ns,) = lat.rational_nullspace(rows, len(idx))
            vec = [Fraction(0)] * m
            for i, c in zip(idx, ns):
                vec[i] = c
            (j,) = a - tau
            if vec[j] < 0:
                vec = [-x for x in vec]
            cls = _primitive_in(vec, [tuple(Fraction(x) for x in r) for r in ref.L_basis])
            lam_cls = _primitive_in(vec, ref.lambda_basis)
            key = cls
            walls.append(Wall((a, b), cls, lam_cls))
            seen.add(key)
        self.walls = walls
        self.wall_classes = sorted(seen)
        if ample is None:
            ample = self._default_ample()
        self.omega = tuple(Fraction(x) for x in ample)
        if len(self.omega) != m:
            raise ProfileError(f"ample class needs {m} coefficients")
        for w in self.walls:
            if _dot(self.omega, w.cls) <= 0:
                raise ProfileError(
                    f"class {tuple(str(x) for x in self.omega)} is not ample: pairing with wall class "
                    f"{tuple(str(x) for x in w.cls)} is {_dot(self.omega, w.cls)}"
                )
        ref.orient(self.omega)

    def _default_ample(self):
        fan = self.ref.fan
        s, ms = support_function_lp(fan)
        if s <= 0:
            raise ProfileError("no strictly convex support function")
        omega = [Fraction(0)] * fan.m
        for i in range(fan.m):
            sigma = next(c for c in fan.maximal if i in c)
            omega[i] = _dot(ms[sigma], fan.rays_bar[i])
        if not self.walls:
            return [Fraction(0)] * fan.m
        low = min(_dot(omega, w.cls) for w in self.walls)
        return [x / low for x in omega]

    def degree(self, lam) -> Fraction:
        return _dot(self.omega, lam)

    def is_effective(self, lam) -> bool:
        """Exact LP test of lam in the cone spanned by the wall classes."""
        lam = _qvec(lam)
        if not any(lam):
            return True
        gens = self.wall_classes
        if not gens:
            return False
        m = len(lam)
        A_eq = [[g[r] for g in gens] for r in range(m)]
        return feasible_point(A_eq=A_eq, b_eq=list(lam), n=len(gens), nonneg=range(len(gens))) is not None

    def in_C_union(self, lam) -> bool:
        """lam in the union over maximal cones sigma of {lam_i >= 0 for i outside sigma}."""
        fan = self.ref.fan
        return any(all(lam[i] >= 0 for i in range(fan.m) if i not in s) for s in fan.maximal)

    def enumerate_effective(self, dmax) -> list:
        """Integer Lambda-coordinates of effective classes with ample degree <= dmax, sorted by degree."""
        ref = self.ref
        dmax = Fraction(dmax)
        if ref.rank == 0:
            return [()]
        verts = [(Fraction(0),) * ref.rank]
        for w in self.wall_classes:
            verts.append(tuple(c * dmax / self.degree(w) for c in ref.rational_coords(w)))
        lo = [floor(min(v[j] for v in verts)) for j in range(ref.rank)]
        hi = [ceil(max(v[j] for v in verts)) for j in range(ref.rank)]
        out = []
        for c in product(*(range(a, b + 1) for a, b in zip(lo, hi))):
            lam = ref.to_q(c)
            deg = self.degree(lam)
            if deg <= dmax and self.is_effective(lam):
                out.append((deg, c))
        out.sort()
        return [c for _, c in out]


def _primitive_in(vec, basis):
    """Positive multiple of vec that is primitive in the lattice spanned by ``basis``."""
    c = lat.rational_lattice_coords(basis, vec)
    den = lcm(*(x.denominator for x in c))
    ints = [int(x * den) for x in c]
    g = 0
    for x in ints:
        g = gcd(g, x)
    return tuple(x * den / g for x in vec)


def mori_cone(ref: RefinedFanData, ample=None) -> MoriData:
    return MoriData(ref, ample)


def galois_phase(ref: RefinedFanData, xi, qexp=None, yexp=None, G=(), sector=None) -> Fraction:
    """Phase label in [0, 1) of xi acting on Q^qexp * prod y_l^yexp_l (times a sector class).

    Q^d picks up age(xi, (d, 0)), y_l picks up -age(xi, (Psi(l), l)), the
    sector class of v picks up age(xi, (Psi(v), v)); t-variables are fixed.
    """
    fan = ref.fan
    total = Fraction(0)
    if qexp is not None and any(qexp):
        total += ref.age_pairing(xi, ref.to_q(qexp), fan.N.zero())
    for e, l in zip(yexp or (), G):
        if e:
            total -= e * ref.age_pairing(xi, fan.psi(l)[0], l)
    if sector is not None:
        total += ref.age_pairing(xi, fan.psi(sector)[0], sector)
    return frac(total)
