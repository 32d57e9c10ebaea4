"""Mirror map, mirror isomorphism and quantum connection from truncated Loc series.

All matrices act on the fixed-point model of localized Chen-Ruan cohomology.
The selected B-side basis Omega_j = w_{k_j} omega gives the matrix series L
whose columns are Loc(Omega_j); its Birkhoff factorization L = M Y yields the
fundamental solution M (proper in z) and the mirror isomorphism Y (polynomial
in z).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import factorial

from .chenruan import local_euler, phi_class
from .curves import galois_phase
from .errors import InvariantError
from .exactalg import (
    Mat,
    TruncSeries,
    Vec,
    rank_of_vectors,
    residue_at_infinity,
    zrat_coefficient,
    zrat_split,
)
from .fandmod import DModElement
from .iseries import (
    MirrorSetup,
    divisor_class,
    loc_of,
    loc_series,
    loc_zero,
    q_derivative,
    series_key_degree,
    t_derivative,
    xi_directions,
    xi_operator,
    y_derivative,
)


# matrix series helpers ---------------------------------------------------------


def columns_to_series(setup: MirrorSetup, cols) -> TruncSeries:
    """Matrix series whose j-th column is the Vec series cols[j]."""
    F = setup.field
    size = setup.idx.size
    keys = set()
    for c in cols:
        keys.update(c.coeffs)
    zero = Vec([F.zero] * size)
    out = {}
    for key in keys:
        out[key] = Mat.from_columns(F, [c.get(key, zero) for c in cols])
    return TruncSeries(setup.trunc, out)


def constant_series(setup: MirrorSetup, value) -> TruncSeries:
    return TruncSeries(setup.trunc, {setup.trunc.origin(): value})


def series_inverse(s: TruncSeries) -> TruncSeries:
    """Inverse of a matrix series with invertible constant term (Neumann series)."""
    tr = s.trunc
    o = tr.origin()
    a0 = s.get(o)
    if a0 is None:
        raise ZeroDivisionError("constant term is not invertible")
    inv0 = a0.inverse()
    n = a0.shape[0]
    rest = TruncSeries(tr, {k: c for k, c in s.coeffs.items() if k != o})
    step = -(constant_series_like(tr, inv0) * rest)
    term = constant_series_like(tr, Mat.identity(a0.field, n))
    total = term
    while True:
        term = step * term
        if term.is_zero():
            break
        total = total + term
    return total * constant_series_like(tr, inv0)


def constant_series_like(tr, value) -> TruncSeries:
    return TruncSeries(tr, {tr.origin(): value})


def map_entries(s: TruncSeries, f) -> TruncSeries:
    return s.map(lambda c: c.map(f))


def restrict(s: TruncSeries, keep) -> TruncSeries:
    return TruncSeries(s.trunc, {k: c for k, c in s.coeffs.items() if keep(k)})


def at_z_zero(r):
    """Value at z = 0 of a z-polynomial scalar."""
    return zrat_coefficient(r, 0)


def _keys_closure(tr, gens):
    gens = [g for g in gens if not g.is_origin()]
    seen = {tr.origin()}
    frontier = [tr.origin()]
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                k = a + g
                if k not in seen and tr.admits(k):
                    seen.add(k)
                    nxt.append(k)
        frontier = nxt
    return sorted(seen, key=lambda k: (tr.weight(k), k))


# Birkhoff factorization -----------------------------------------------------


@dataclass
class BirkhoffResult:
    M: TruncSeries
    Y: TruncSeries


def birkhoff_factorize(L: TruncSeries) -> BirkhoffResult:
    """L = M Y with M = I + (proper in z) and Y polynomial in z, recursively in the series order."""
    tr = L.trunc
    o = tr.origin()
    Y0 = L.get(o)
    if Y0 is None:
        raise InvariantError("L has no constant term")
    F = Y0.field
    n = Y0.shape[0]
    try:
        Y0inv = Y0.inverse()
    except ZeroDivisionError:
        raise InvariantError("constant term of L is singular") from None
    zero = Mat.zeros(F, n)
    M = {o: Mat.identity(F, n)}
    Y = {o: Y0}
    for q in _keys_closure(tr, list(L.coeffs)):
        if q == o:
            continue
        R = L.get(q, zero)
        for q1, m1 in M.items():
            if q1 == o:
                continue
            q2 = q - q1
            if q2 != o and q2 in Y:
                R = R - m1 * Y[q2]
        X = R * Y0inv
        parts = [[zrat_split(a) for a in row] for row in X.rows]
        Mq = Mat(F, [[p[1] for p in row] for row in parts])
        Pq = Mat(F, [[p[0] for p in row] for row in parts])
        if not Mq.is_zero():
            M[q] = Mq
        Yq = Pq * Y0
        if not Yq.is_zero():
            Y[q] = Yq
    return BirkhoffResult(TruncSeries(tr, M), TruncSeries(tr, Y))


# directions -------------------------------------------------------------------


@dataclass(frozen=True)
class Direction:
    """A coordinate vector field: ('xi', j) for xi = e_j^*, ('t', i), or ('y', j) for G[j]."""

    kind: str
    index: int

    def label(self, setup: MirrorSetup) -> str:
        if self.kind == "xi":
            return f"xi{self.index + 1}"
        if self.kind == "t":
            return f"t{self.index + 1}"
        return f"y{self.index + 1}"


def directions(setup: MirrorSetup) -> list:
    out = [Direction("xi", next(i for i, x in enumerate(xi) if x)) for xi in xi_directions(setup)]
    if setup.profile.tord:
        out += [Direction("t", i) for i in range(setup.m)]
    if setup.profile.yord:
        out += [Direction("y", j) for j in range(len(setup.G))]
    return out


def _xi_vec(setup, d: Direction):
    return tuple(int(i == d.index) for i in range(setup.m))


def derivative(setup: MirrorSetup, d: Direction, s: TruncSeries) -> TruncSeries:
    if d.kind == "xi":
        return q_derivative(setup, s, _xi_vec(setup, d))
    if d.kind == "t":
        return t_derivative(s, d.index)
    return y_derivative(s, d.index)


def b_action(setup: MirrorSetup, d: Direction, e: DModElement) -> DModElement:
    """z nabla_d on the fan D-module."""
    mod = setup.module
    if d.kind == "xi":
        return xi_operator(setup, _xi_vec(setup, d), e)
    if d.kind == "t":
        return mod.mul_y(d.index, mod.partial_action(d.index, e))
    return mod.partial_action(setup.m + d.index, e)


def valid_for(setup: MirrorSetup, dirs):
    """Predicate on keys still exact after differentiating along ``dirs``."""
    tr = setup.trunc
    nt = sum(1 for d in dirs if d.kind == "t")
    ny = sum(1 for d in dirs if d.kind == "y")

    def keep(key):
        return sum(key.t) <= tr.tord - nt and sum(key.y) <= tr.yord - ny

    return keep


# the mirror flow --------------------------------------------------------------


@dataclass
class CheckReport:
    name: str
    ok: bool = True
    checked: int = 0
    failures: list = field(default_factory=list)

    def fail(self, message):
        self.ok = False
        if len(self.failures) < 5:
            self.failures.append(message)


def _sort_key(setup: MirrorSetup, k):
    psi = setup.psi(k)
    return (sum(psi, Fraction(0)), sum(abs(x) for x in k[: setup.fan.n]), tuple(-x for x in psi), k)


class MirrorFlow:
    """Basis, Birkhoff factorization and everything derived from it for one setup."""

    def __init__(self, setup: MirrorSetup, height_bound: int = 6):
        self.setup = setup
        self.field = setup.field
        self.height_bound = height_bound

    # basis ----------------------------------------------------------------

    @cached_property
    def basis(self) -> list:
        """Greedy choice of k_1..k_N by (age, l1-height, Psi descending) with Loc^0 rank increase."""
        setup = self.setup
        fan = setup.fan
        N = setup.idx.size
        cands = sorted(set(fan.points_by_height(self.height_bound)), key=lambda k: _sort_key(setup, k))
        chosen, vecs = [], []
        for k in cands:
            v = loc_zero(setup, k)
            if rank_of_vectors(self.field, vecs + [v]) > len(vecs):
                chosen.append(k)
                vecs.append(v)
                if len(chosen) == N:
                    break
        if len(chosen) < N:
            raise InvariantError(
                f"only {len(chosen)} of {N} basis elements found up to height {self.height_bound}",
                {"height_bound": self.height_bound},
            )
        return chosen

    @cached_property
    def L0(self) -> Mat:
        L0 = Mat.from_columns(self.field, [loc_zero(self.setup, k) for k in self.basis])
        det = L0.det()
        if not det.is_z_free():
            raise InvariantError("det L0 depends on z", {"det": str(det)})
        return L0

    @cached_property
    def T(self) -> Mat:
        """The T-basis: phi_{k_j} = Loc^0(w_{k_j} omega) at z = 0."""
        return self.L0.map(at_z_zero)

    @cached_property
    def Tinv(self) -> Mat:
        return self.T.inverse()

    @cached_property
    def L(self) -> TruncSeries:
        return columns_to_series(self.setup, [loc_series(self.setup, k) for k in self.basis])

    @cached_property
    def Linv(self) -> TruncSeries:
        return series_inverse(self.L)

    # factorization -------------------------------------------------------------

    @cached_property
    def birkhoff(self) -> BirkhoffResult:
        self.L0
        return birkhoff_factorize(self.L)

    @property
    def M(self) -> TruncSeries:
        return self.birkhoff.M

    @property
    def Y(self) -> TruncSeries:
        return self.birkhoff.Y

    @cached_property
    def Minv(self) -> TruncSeries:
        return series_inverse(self.M)

    @cached_property
    def Yinv(self) -> TruncSeries:
        return series_inverse(self.Y)

    def factorization_check(self) -> CheckReport:
        rep = CheckReport("factorization")
        diff = self.M * self.Y - self.L
        rep.checked = len(self.L)
        if not diff.is_zero():
            rep.fail(f"M Y != L at {diff.keys()[0]}")
        for key, mat in self.M.items():
            if key.is_origin():
                continue
            if any(a.zdegrees()[0] >= a.zdegrees()[1] for row in mat.rows for a in row if a):
                rep.fail(f"M not proper at {key}")
        for key, mat in self.Y.items():
            if any(not a.is_z_polynomial() for row in mat.rows for a in row):
                rep.fail(f"Y not polynomial at {key}")
        return rep

    # mirror map ---------------------------------------------------------------

    @cached_property
    def tau(self) -> TruncSeries:
        """tau = z^0-coefficient of z M 1, as a series of classes in the fixed-point model."""
        unit = self.setup.idx.unit()
        out = {}
        for key, mat in self.M.items():
            if key.is_origin():
                continue
            v = Vec(residue_at_infinity(a) for a in mat * unit)
            if not v.is_zero():
                out[key] = v
        return TruncSeries(self.setup.trunc, out)

    @cached_property
    def tau_coordinates(self) -> TruncSeries:
        """tau in the T-basis."""
        return self.tau.map(lambda v: self.Tinv * v)

    # B-side expansions ---------------------------------------------------------

    def expand_in_basis(self, k) -> TruncSeries:
        """Coordinates c(z, Q, t, y) with Loc(w_k omega) = sum_j c_j Loc(Omega_j)."""
        return self.Linv * loc_series(self.setup, k)

    def expand_element(self, e: DModElement) -> TruncSeries:
        return self.Linv * loc_of(self.setup, e)

    def theta_image(self, k) -> TruncSeries:
        """Theta(w_k omega) = Y c_k as a series of z-polynomial classes."""
        return self.Y * self.expand_in_basis(k)

    def gm_matrix(self, d: Direction) -> TruncSeries:
        """Matrix of z nabla_d in the Omega-basis."""
        mod = self.setup.module
        cols = [self.expand_element(b_action(self.setup, d, mod.unit(k))) for k in self.basis]
        return columns_to_series(self.setup, cols)

    # quantum connection ------------------------------------------------------------

    def _U(self, d: Direction):
        if d.kind != "xi":
            return None
        cls = divisor_class(self.setup, _xi_vec(self.setup, d))
        n = len(cls)
        F = self.field
        return Mat(F, [[cls[i] if i == j else F.zero for j in range(n)] for i in range(n)])

    def connection(self, d: Direction) -> TruncSeries:
        """A_d = Y B_d Y^-1 - z (D_d Y) Y^-1 on the keys where it is exact."""
        setup = self.setup
        z = self.field.z
        B = self.gm_matrix(d)
        A = self.Y * B * self.Yinv - derivative(setup, d, self.Y).scale(z) * self.Yinv
        return restrict(A, valid_for(setup, [d]))

    def connection_from_M(self, d: Direction) -> TruncSeries:
        """Independent route: M^-1 (z D_d M + U_d M)."""
        setup = self.setup
        z = self.field.z
        inner = derivative(setup, d, self.M).scale(z)
        U = self._U(d)
        if U is not None:
            inner = inner + constant_series(setup, U) * self.M
        return restrict(self.Minv * inner, valid_for(setup, [d]))

    @cached_property
    def connections(self) -> dict:
        out = {}
        for d in directions(self.setup):
            A = self.connection(d)
            for key, mat in A.items():
                for row in mat.rows:
                    for a in row:
                        if a and not a.is_z_free():
                            raise InvariantError(
                                f"connection matrix for {d.label(self.setup)} depends on z",
                                {"key": str(key), "entry": str(a)},
                            )
            out[d] = A
        return out

    def connection_in_T_basis(self, d: Direction) -> TruncSeries:
        return self.connections[d].map(lambda m: self.Tinv * m * self.T)

    # quantum product ------------------------------------------------------------------

    @cached_property
    def _product_span(self):
        """Words in the connection matrices whose action on 1 spans H at the origin."""
        setup = self.setup
        tr = setup.trunc
        N = setup.idx.size
        o = tr.origin()
        unit = setup.idx.unit()
        ident = constant_series(setup, Mat.identity(self.field, N))
        mats = [ident]
        vecs = [unit]
        level = [ident]
        gens = list(self.connections.values())
        for _ in range(N):
            if len(mats) == N:
                break
            nxt = []
            for W in level:
                for A in gens:
                    P = A * W
                    v = P.get(o, Mat.zeros(self.field, N)) * unit
                    if rank_of_vectors(self.field, vecs + [v]) > len(vecs):
                        mats.append(P)
                        vecs.append(v)
                        nxt.append(P)
            level = nxt
        if len(mats) < N:
            raise InvariantError("connection matrices do not generate the cohomology at the origin; "
                                 "add the missing twisted sectors to G")
        C = columns_to_series(setup, [W.map(lambda m: m * unit) for W in mats])
        keep = valid_for(setup, list(self.connections))
        return mats, restrict(series_inverse(C), keep), keep

    def multiplication(self, alpha: TruncSeries) -> TruncSeries:
        """Matrix series of alpha star (-) in the fixed-point model."""
        mats, Cinv, keep = self._product_span
        coords = Cinv * alpha
        tr = self.setup.trunc
        out = {}
        for kc, cv in coords.coeffs.items():
            for j, c in enumerate(cv):
                if not c:
                    continue
                for km, mat in mats[j].coeffs.items():
                    key = kc + km
                    if not tr.admits(key):
                        continue
                    p = mat * c
                    out[key] = out[key] + p if key in out else p
        return restrict(TruncSeries(tr, out), keep)

    def star(self, alpha: TruncSeries, beta: TruncSeries) -> TruncSeries:
        _, _, keep = self._product_span
        return restrict(self.multiplication(alpha) * beta, keep)

    def p_class(self, k) -> TruncSeries:
        """P_k = Theta(w_k omega) at z = 0."""
        return self.theta_image(k).map(lambda v: Vec(at_z_zero(a) for a in v))

    def quantum_product(self, k, l) -> TruncSeries:
        """P_k star P_l in the T-basis."""
        return self.star(self.p_class(k), self.p_class(l)).map(lambda v: self.Tinv * v)

    def product_transport_check(self, window) -> CheckReport:
        """P_k star P_l = Q^d(k,l) P_{k+l} for k, l in the window."""
        setup = self.setup
        rep = CheckReport("product transport")
        _, _, keep = self._product_span
        for k in window:
            for l in window:
                lhs = self.star(self.p_class(k), self.p_class(l))
                dq = setup.module.dq(setup.fan.N.normalize(k), setup.fan.N.normalize(l))
                rhs = self.p_class(setup.fan.add(k, l)).shift(setup.key(q=dq))
                rep.checked += 1
                diff = restrict(lhs - rhs, keep)
                if not diff.is_zero():
                    rep.fail(f"k={k} l={l} key={diff.keys()[0]}")
        return rep

    # checks -----------------------------------------------------------------------

    def connection_routes_check(self) -> CheckReport:
        rep = CheckReport("connection routes")
        for d, A in self.connections.items():
            rep.checked += 1
            if not (A - self.connection_from_M(d)).is_zero():
                rep.fail(f"Y-route and M-route differ for {d.label(self.setup)}")
        return rep

    def classical_limit_check(self) -> CheckReport:
        """A_d at the origin equals multiplication by the classical class of the direction."""
        setup = self.setup
        rep = CheckReport("classical limit")
        o = setup.trunc.origin()
        N = setup.idx.size
        for d, A in self.connections.items():
            A0 = A.get(o, Mat.zeros(self.field, N))
            if d.kind == "xi":
                expected = self._U(d)
            else:
                k = setup.fan.rays[d.index] if d.kind == "t" else setup.G[d.index]
                expected = self._classical_mult(k)
            rep.checked += 1
            if A0 != expected:
                rep.fail(f"{d.label(setup)} at the origin")
        return rep

    def _classical_mult(self, k) -> Mat:
        """Chen-Ruan multiplication by phi_k, from phi_k phi_l = [share cone] phi_{k+l} on the T-basis."""
        setup = self.setup
        fan = setup.fan
        cols = []
        for kj in self.basis:
            if (fan.psi(k)[1] | fan.psi(kj)[1]) in fan.cones:
                cols.append(phi_class(setup.idx, fan.add(k, kj)))
            else:
                cols.append(setup.idx.zero())
        image = Mat.from_columns(self.field, cols)
        return image * self.Tinv

    def flatness_check(self) -> CheckReport:
        """D_a A_b = D_b A_a and [A_a, A_b] = 0 on the doubly valid keys."""
        setup = self.setup
        rep = CheckReport("flatness")
        dirs = list(self.connections)
        for i, a in enumerate(dirs):
            for b in dirs[i + 1:]:
                keep = valid_for(setup, [a, b, a, b])
                Aa, Ab = self.connections[a], self.connections[b]
                d1 = derivative(setup, a, Ab) - derivative(setup, b, Aa)
                comm = Aa * Ab - Ab * Aa
                rep.checked += 1
                if not restrict(d1, keep).is_zero():
                    rep.fail(f"D_{a.label(setup)} A_{b.label(setup)} != D_{b.label(setup)} A_{a.label(setup)}")
                if not restrict(comm, keep).is_zero():
                    rep.fail(f"[A_{a.label(setup)}, A_{b.label(setup)}] != 0")
        return rep

    def z_independence_check(self) -> CheckReport:
        rep = CheckReport("z-independence")
        try:
            rep.checked = len(self.connections)
        except InvariantError as e:
            rep.fail(str(e))
        return rep

    def product_laws_check(self) -> CheckReport:
        """Commutativity and associativity of star on the T-basis."""
        setup = self.setup
        rep = CheckReport("product laws")
        T = [constant_series(setup, self.T.column(j)) for j in range(self.T.shape[1])]
        for i, a in enumerate(T):
            for j, b in enumerate(T):
                rep.checked += 1
                if not (self.star(a, b) - self.star(b, a)).is_zero():
                    rep.fail(f"T{i + 1} * T{j + 1} not commutative")
                for k, c in enumerate(T):
                    if k < j:
                        continue
                    lhs = self.star(self.star(a, b), c)
                    rhs = self.star(a, self.star(b, c))
                    if not (lhs - rhs).is_zero():
                        rep.fail(f"(T{i + 1} T{j + 1}) T{k + 1} != T{i + 1} (T{j + 1} T{k + 1})")
        return rep

    def tau_derivative_check(self) -> CheckReport:
        """d tau / d y_k at the origin equals phi_k for every k in S."""
        setup = self.setup
        rep = CheckReport("tau derivative")
        zero = setup.idx.zero()
        if setup.profile.tord:
            for i in range(setup.m):
                e = tuple(int(j == i) for j in range(setup.m))
                rep.checked += 1
                got = self.tau.get(setup.key(t=e), zero)
                if got != phi_class(setup.idx, setup.fan.rays[i]):
                    rep.fail(f"d tau / d t{i + 1}")
        if setup.profile.yord:
            for j, l in enumerate(setup.G):
                e = tuple(int(a == j) for a in range(len(setup.G)))
                rep.checked += 1
                got = self.tau.get(setup.key(y=e), zero)
                if got != phi_class(setup.idx, l):
                    rep.fail(f"d tau / d y{j + 1}")
        return rep

    def euler_grading_check(self) -> CheckReport:
        """(E^B + Gr_0) tau = tau and homogeneity of the Theta columns."""
        setup = self.setup
        rep = CheckReport("euler grading")
        if self.field.specialized:
            return rep
        fan = setup.fan
        keys = setup.idx.keys
        for key, vec in self.tau.items():
            rep.checked += 1
            base = 1 - series_key_degree(setup, key)
            for (sigma, w), c in zip(keys, vec):
                if c and c.homogeneous_degree() != base - fan.age(w):
                    rep.fail(f"tau at {key}")
                    break
        for j, k in enumerate(self.basis):
            target = fan.age(k)
            for key, mat in self.Y.items():
                rep.checked += 1
                base = target - series_key_degree(setup, key)
                for (sigma, w), c in zip(keys, mat.column(j)):
                    if c and c.homogeneous_degree() != base - fan.age(w):
                        rep.fail(f"Theta(Omega_{j + 1}) at {key}")
                        break
        return rep

    def galois_check(self) -> CheckReport:
        """tau invariant and Theta(Omega_j) of the phase of w_{k_j} under every Pic^st generator."""
        setup = self.setup
        ref = setup.ref
        rep = CheckReport("galois")
        group, lifts = ref.pic_st
        keys = setup.idx.keys
        for xi in lifts:
            for key, vec in self.tau.items():
                for (sigma, w), c in zip(keys, vec):
                    if c:
                        rep.checked += 1
                        ph = galois_phase(ref, xi, key.q, key.y, setup.G, sector=w)
                        if ph:
                            rep.fail(f"tau term {key} sector {w} has phase {ph}")
            for j, k in enumerate(self.basis):
                target = ref.age_pairing(xi, setup.psi(k), k)
                for key, mat in self.Y.items():
                    for (sigma, w), c in zip(keys, mat.column(j)):
                        if c:
                            rep.checked += 1
                            ph = galois_phase(ref, xi, key.q, key.y, setup.G, sector=w)
                            if ph != target:
                                rep.fail(f"Theta(Omega_{j + 1}) term {key} sector {w}: {ph} != {target}")
        return rep

    # pairing ------------------------------------------------------------------------

    @cached_property
    def pairing_form(self) -> Mat:
        """Atiyah-Bott form: (a, b) = a^T G b in the fixed-point model."""
        idx = self.setup.idx
        F = self.field
        n = idx.size
        rows = [[F.zero] * n for _ in range(n)]
        for key in idx.keys:
            rows[idx.pos[key]][idx.pos[idx.inv[key]]] = F.one / local_euler(idx, key)
        return Mat(F, rows)

    def _pair(self, A: TruncSeries, B: TruncSeries) -> TruncSeries:
        At = A.map(lambda m: m.map(lambda a: a.neg_z()).transpose())
        return At * constant_series(self.setup, self.pairing_form) * B

    @cached_property
    def pairing_matrix(self) -> TruncSeries:
        """P_ij = (Loc(Omega_i)(-z), Loc(Omega_j)(z)) as a series of matrices."""
        return self._pair(self.L, self.L)

    def pairing_check(self) -> CheckReport:
        """Polynomiality in z (and in chi when the support is complete), symmetry, match with Theta."""
        rep = CheckReport("pairing")
        P = self.pairing_matrix
        compact = not self.setup.fan.boundary_walls
        for key, mat in P.items():
            n = mat.shape[0]
            for i in range(n):
                for j in range(n):
                    a = mat[i, j]
                    rep.checked += 1
                    if a and not (a.is_polynomial() if compact else a.is_z_polynomial()):
                        rep.fail(f"P[{i + 1},{j + 1}] at {key} is not polynomial: {a}")
                    if a != mat[j, i].neg_z():
                        rep.fail(f"P[{i + 1},{j + 1}](z) != P[{j + 1},{i + 1}](-z) at {key}")
        if not (P - self._pair(self.Y, self.Y)).is_zero():
            rep.fail("higher residue pairing differs from the Poincare pairing of the Theta images")
        return rep


# Bernoulli factor -------------------------------------------------------------------


def bernoulli_polynomial(k: int, h) -> Fraction:
    """B_k(h) from the generating function t e^(ht) / (e^t - 1)."""
    h = Fraction(h)
    # t / (e^t - 1) = 1 / (sum_j t^j / (j+1)!)
    den = [Fraction(1, factorial(j + 1)) for j in range(k + 1)]
    inv = [Fraction(1)]
    for n in range(1, k + 1):
        inv.append(-sum((den[j] * inv[n - j] for j in range(1, n + 1)), Fraction(0)))
    # coefficient of t^k in inv * e^(ht), times k!
    c = sum((inv[j] * h ** (k - j) / factorial(k - j) for j in range(k + 1)), Fraction(0))
    return c * factorial(k)


@dataclass
class DeltaFactor:
    """(1/order) * prod_i u_i^(-1/2) * (sum_j coeffs[j] z^j)."""

    order: int
    sqrt_weights: list
    coeffs: list


def bernoulli_delta(setup: MirrorSetup, key, order: int, sign: int = 1) -> DeltaFactor:
    """Delta_(sigma, v)(sign * z) truncated at z^order."""
    sigma, v = key
    F = setup.field
    psi = setup.psi(v)
    expo = [F.zero] * (order + 1)
    weights = []
    for i in sorted(sigma):
        u = setup.idx.u(sigma, i)
        weights.append(u)
        for k in range(2, order + 2):
            c = bernoulli_polynomial(k, psi[i]) / (k * (k - 1))
            if c:
                expo[k - 1] = expo[k - 1] - F.const(c * sign ** (k - 1)) / u ** (k - 1)
    return DeltaFactor(setup.idx.order[sigma], weights, _exp_series(F, expo, order))


def _exp_series(F, a, order):
    """exp of a power series with zero constant term, truncated."""
    out = [F.one] + [F.zero] * order
    # e' = a' e
    for n in range(1, order + 1):
        acc = F.zero
        for j in range(1, n + 1):
            if a[j]:
                acc = acc + a[j] * out[n - j] * j
        out[n] = acc / n
    return out


def delta_cancellation(setup: MirrorSetup, key, order: int):
    """(scalar prefactor, z-series) of Delta_(s,v)(-z) Delta_(s,inv v)(z)."""
    F = setup.field
    a = bernoulli_delta(setup, key, order, sign=-1)
    b = bernoulli_delta(setup, setup.idx.inv[key], order)
    prod = [F.zero] * (order + 1)
    for i, x in enumerate(a.coeffs):
        for j, y in enumerate(b.coeffs):
            if i + j <= order and x and y:
                prod[i + j] = prod[i + j] + x * y
    pref = F.const(Fraction(1, a.order * b.order))
    for u in a.sqrt_weights:
        pref = pref / u
    return pref, prod


# non-equivariant limits -------------------------------------------------------------


def nonequivariant_limit(setup: MirrorSetup, s: TruncSeries, direction) -> TruncSeries:
    """Entrywise limit chi = s * direction, s -> 0, of a matrix or vector series."""
    F = setup.field

    def lim(c):
        if isinstance(c, Mat):
            return c.map(lambda a: F.line_limit(a, direction))
        return Vec(F.line_limit(a, direction) for a in c)

    return s.map(lim)


def generic_direction(setup: MirrorSetup):
    """A direction chi^0 on which no fixed-point weight vanishes."""
    n = setup.fan.n
    for base in range(2, 50):
        d = tuple(Fraction(base ** i + i) for i in range(n))
        ok = all(
            sum((Fraction(c) * x for c, x in zip(w, d)), Fraction(0)) != 0
            for fp in setup.fan.fixed_points
            for w in fp.weights.values()
        )
        if ok:
            return d
    raise InvariantError("no generic direction found")
