"""Integer linear algebra over finitely generated abelian groups."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm


def identity(n: int) -> list:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def transpose(A: list) -> list:
    return [list(r) for r in zip(*A)] if A else []


def matmul(A: list, B: list) -> list:
    Bt = list(zip(*B))
    return [[sum(a * b for a, b in zip(r, c)) for c in Bt] for r in A]


def matvec(A: list, x) -> list:
    return [sum(a * b for a, b in zip(r, x)) for r in A]


def det(A: list):
    """Exact determinant of a square rational matrix."""
    n = len(A)
    a = [[Fraction(x) for x in r] for r in A]
    out = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if a[i][c]), None)
        if p is None:
            return Fraction(0)
        if p != c:
            a[c], a[p] = a[p], a[c]
            out = -out
        out *= a[c][c]
        for i in range(c + 1, n):
            if a[i][c]:
                f = a[i][c] / a[c][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return out


def rational_inverse(A: list) -> list:
    n = len(A)
    aug = [[Fraction(x) for x in r] + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(A)]
    for c in range(n):
        p = next((i for i in range(c, n) if aug[i][c]), None)
        if p is None:
            raise ZeroDivisionError("singular matrix")
        aug[c], aug[p] = aug[p], aug[c]
        piv = aug[c][c]
        aug[c] = [x / piv for x in aug[c]]
        for i in range(n):
            if i != c and aug[i][c]:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[c])]
    return [r[n:] for r in aug]


def unimodular_inverse(A: list) -> list:
    inv = rational_inverse(A)
    out = [[int(x) for x in r] for r in inv]
    if any(Fraction(x) != y for r, s in zip(out, inv) for x, y in zip(r, s)):
        raise ValueError("matrix is not unimodular")
    return out


def rational_solve(A: list, b) -> list | None:
    """Unique rational solution of A x = b for A square and invertible, else None."""
    try:
        inv = rational_inverse(A)
    except ZeroDivisionError:
        return None
    return [sum(Fraction(a) * y for a, y in zip(r, b)) for r in inv]


def rational_rank(rows) -> int:
    a = [[Fraction(x) for x in r] for r in rows]
    rank = 0
    ncols = len(a[0]) if a else 0
    for c in range(ncols):
        p = next((i for i in range(rank, len(a)) if a[i][c]), None)
        if p is None:
            continue
        a[rank], a[p] = a[p], a[rank]
        for i in range(rank + 1, len(a)):
            if a[i][c]:
                f = a[i][c] / a[rank][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[rank])]
        rank += 1
    return rank


def rational_nullspace(A: list, ncols: int) -> list:
    """Basis of {x in Q^ncols : A x = 0}."""
    a = [[Fraction(x) for x in r] for r in A]
    pivots = []
    row = 0
    for c in range(ncols):
        p = next((i for i in range(row, len(a)) if a[i][c]), None)
        if p is None:
            continue
        a[row], a[p] = a[p], a[row]
        piv = a[row][c]
        a[row] = [x / piv for x in a[row]]
        for i in range(len(a)):
            if i != row and a[i][c]:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[row])]
        pivots.append(c)
        row += 1
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fcol in free:
        v = [Fraction(0)] * ncols
        v[fcol] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -a[r][fcol]
        basis.append(v)
    return basis


# normal forms ---------------------------------------------------------------


def smith_normal_form(A: list):
    """Return (U, D, V) with U*A*V = D diagonal, d_1 | d_2 | ..., U and V unimodular."""
    m = len(A)
    n = len(A[0]) if m else 0
    D = [list(r) for r in A]
    U = identity(m)
    V = identity(n)

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for r in D:
            r[i], r[j] = r[j], r[i]
        for r in V:
            r[i], r[j] = r[j], r[i]

    def add_row(dst, src, f):
        D[dst] = [x + f * y for x, y in zip(D[dst], D[src])]
        U[dst] = [x + f * y for x, y in zip(U[dst], U[src])]

    def add_col(dst, src, f):
        for r in D:
            r[dst] += f * r[src]
        for r in V:
            r[dst] += f * r[src]

    for t in range(min(m, n)):
        entries = [(abs(D[i][j]), i, j) for i in range(t, m) for j in range(t, n) if D[i][j]]
        if not entries:
            break
        _, pi, pj = min(entries)
        swap_rows(t, pi)
        swap_cols(t, pj)
        while True:
            done = True
            for i in range(t + 1, m):
                if D[i][t]:
                    add_row(i, t, -(D[i][t] // D[t][t]))
                    if D[i][t]:
                        done = False
            for j in range(t + 1, n):
                if D[t][j]:
                    add_col(j, t, -(D[t][j] // D[t][t]))
                    if D[t][j]:
                        done = False
            if not done:
                entries = [(abs(D[i][t]), i, t) for i in range(t, m) if D[i][t]]
                entries += [(abs(D[t][j]), t, j) for j in range(t, n) if D[t][j]]
                _, pi, pj = min(entries)
                swap_rows(t, pi)
                swap_cols(t, pj)
                continue
            bad = next(
                (i for i in range(t + 1, m) for j in range(t + 1, n) if D[i][j] % D[t][t]),
                None,
            )
            if bad is None:
                break
            add_row(t, bad, 1)
        if D[t][t] < 0:
            D[t] = [-x for x in D[t]]
            U[t] = [-x for x in U[t]]
    return U, D, V


def hermite_rows(rows: list, ncols: int | None = None):
    """Row-style Hermite reduction.

    Returns (H, T) with H = T*rows, T unimodular, H in echelon form with
    positive pivots and reduced entries above each pivot; zero rows of H come
    last.
    """
    H = [list(r) for r in rows]
    k = len(H)
    ncols = len(H[0]) if H else (ncols or 0)
    T = identity(k)
    prow = 0
    for c in range(ncols):
        if prow >= k:
            break
        while True:
            nz = [(abs(H[i][c]), i) for i in range(prow, k) if H[i][c]]
            if not nz:
                break
            _, p = min(nz)
            H[prow], H[p] = H[p], H[prow]
            T[prow], T[p] = T[p], T[prow]
            clean = True
            for i in range(prow + 1, k):
                if H[i][c]:
                    q = H[i][c] // H[prow][c]
                    H[i] = [x - q * y for x, y in zip(H[i], H[prow])]
                    T[i] = [x - q * y for x, y in zip(T[i], T[prow])]
                    if H[i][c]:
                        clean = False
            if clean:
                break
        if prow < k and H[prow][c]:
            if H[prow][c] < 0:
                H[prow] = [-x for x in H[prow]]
                T[prow] = [-x for x in T[prow]]
            for i in range(prow):
                q = H[i][c] // H[prow][c]
                if q:
                    H[i] = [x - q * y for x, y in zip(H[i], H[prow])]
                    T[i] = [x - q * y for x, y in zip(T[i], T[prow])]
            prow += 1
    return H, T


def row_lattice_basis(rows: list, ncols: int) -> list:
    """Echelon basis of the integer row span."""
    if not rows:
        return []
    H, _ = hermite_rows(rows, ncols)
    return [r for r in H if any(r)]


def integer_kernel(A: list, ncols: int) -> list:
    """Basis (as rows) of {x in Z^ncols : A x = 0}."""
    if not A:
        return identity(ncols)
    H, T = hermite_rows(transpose(A), len(A))
    return row_lattice_basis([T[i] for i in range(len(H)) if not any(H[i])], ncols)


def rational_lattice_basis(vectors, dim: int):
    """Echelon basis of the Z-span of rational vectors in Q^dim."""
    vectors = [[Fraction(x) for x in v] for v in vectors]
    if not vectors:
        return []
    den = lcm(*(x.denominator for v in vectors for x in v))
    ints = [[int(x * den) for x in v] for v in vectors]
    return [[Fraction(x, den) for x in r] for r in row_lattice_basis(ints, dim)]


def same_rational_lattice(a, b, dim: int) -> bool:
    return rational_lattice_basis(a, dim) == rational_lattice_basis(b, dim)


def rational_lattice_coords(basis, v):
    """Coordinates of v in an echelon basis of a rational lattice (None if outside the span)."""
    coords = []
    rest = [Fraction(x) for x in v]
    for b in basis:
        piv = next(i for i, x in enumerate(b) if x)
        c = rest[piv] / b[piv]
        coords.append(c)
        rest = [x - c * y for x, y in zip(rest, b)]
    if any(rest):
        return None
    return coords


# groups -------------------------------------------------------------------


@dataclass(frozen=True)
class FgAbGroup:
    """Z^rank + Z/d_1 + ... + Z/d_t with d_1 | d_2 | ... and each d_i >= 2."""

    rank: int
    torsion: tuple = ()

    def __post_init__(self):
        for a, b in zip(self.torsion, self.torsion[1:]):
            if b % a:
                raise ValueError(f"torsion factors {self.torsion} are not a divisibility chain")
        if any(d < 2 for d in self.torsion):
            raise ValueError("torsion factors must be >= 2")

    @property
    def ngens(self) -> int:
        return self.rank + len(self.torsion)

    def normalize(self, x) -> tuple:
        x = tuple(int(a) for a in x)
        if len(x) != self.ngens:
            raise ValueError(f"element {x} has the wrong length for {self}")
        return x[: self.rank] + tuple(a % d for a, d in zip(x[self.rank:], self.torsion))

    def zero(self) -> tuple:
        return (0,) * self.ngens

    def add(self, x, y) -> tuple:
        return self.normalize(tuple(a + b for a, b in zip(x, y)))

    def neg(self, x) -> tuple:
        return self.normalize(tuple(-a for a in x))

    def scale(self, c: int, x) -> tuple:
        return self.normalize(tuple(c * a for a in x))

    def order(self):
        """Group order, or None if infinite."""
        if self.rank:
            return None
        out = 1
        for d in self.torsion:
            out *= d
        return out

    def relation_rows(self) -> list:
        """Rows spanning the relations of the standard presentation."""
        n = self.ngens
        return [[d if j == self.rank + i else 0 for j in range(n)] for i, d in enumerate(self.torsion)]

    def torsion_elements(self):
        """All elements with zero free part."""
        out = [()]
        for d in self.torsion:
            out = [e + (r,) for e in out for r in range(d)]
        return [(0,) * self.rank + e for e in out]


@dataclass
class QuotientGroup:
    """Z^J modulo a row lattice, with explicit coordinates in invariant-factor form."""

    ambient: int
    relations: list
    group: FgAbGroup = field(init=False)
    _V: list = field(init=False, repr=False)
    _Vinv: list = field(init=False, repr=False)
    _factors: list = field(init=False, repr=False)

    def __post_init__(self):
        J = self.ambient
        rel = [list(r) for r in self.relations if any(r)]
        if rel:
            _, D, V = smith_normal_form(rel)
            diag = [D[i][i] if i < len(D) and i < J else 0 for i in range(J)]
        else:
            V = identity(J)
            diag = [0] * J
        # diag is a divisibility chain: units first, then torsion, then free
        self._V = V
        self._Vinv = unimodular_inverse(V) if J else []
        self._factors = diag
        tors = tuple(d for d in diag if d > 1)
        free = sum(1 for d in diag if d == 0)
        self.group = FgAbGroup(free, tors)

    def coords(self, x) -> tuple:
        """Element of ``group`` represented by x in Z^J."""
        y = [sum(a * self._V[i][j] for i, a in enumerate(x)) for j in range(self.ambient)]
        free = [y[j] for j, d in enumerate(self._factors) if d == 0]
        tors = [y[j] % d for j, d in enumerate(self._factors) if d > 1]
        return tuple(free) + tuple(tors)

    def generators(self) -> list:
        """Lifts to Z^J of the standard generators of ``group``."""
        free = [j for j, d in enumerate(self._factors) if d == 0]
        tors = [j for j, d in enumerate(self._factors) if d > 1]
        return [list(self._Vinv[j]) for j in free + tors]

    def is_zero(self, x) -> bool:
        return not any(self.coords(x))


@dataclass
class GroupHom:
    """Homomorphism given by the images of the standard generators of ``source``."""

    source: FgAbGroup
    target: FgAbGroup
    images: list

    def __post_init__(self):
        self.images = [self.target.normalize(v) for v in self.images]
        if len(self.images) != self.source.ngens:
            raise ValueError("need one image per source generator")
        for i, d in enumerate(self.source.torsion):
            img = self.images[self.source.rank + i]
            if any(self.target.scale(d, img)):
                raise ValueError("map is not well defined on torsion")

    def __call__(self, x) -> tuple:
        out = self.target.zero()
        for c, img in zip(self.source.normalize(x), self.images):
            if c:
                out = self.target.add(out, self.target.scale(c, img))
        return out


def solve_in_group(columns: list, target_group: FgAbGroup, rhs):
    """Integer x with sum_j x_j columns[j] = rhs in target_group, or None."""
    n = target_group.ngens
    rel = target_group.relation_rows()
    cols = [list(c) for c in columns] + rel
    if not cols:
        return [] if not any(target_group.normalize(rhs)) else None
    A = transpose(cols)
    U, D, V = smith_normal_form(A)
    b = matvec(U, rhs)
    w = [0] * len(cols)
    for i in range(n):
        d = D[i][i] if i < len(cols) else 0
        if d == 0:
            if b[i]:
                return None
        else:
            if b[i] % d:
                return None
            w[i] = b[i] // d
    x = matvec(V, w)
    return x[: len(columns)]


def kernel(f: GroupHom) -> list:
    """Basis rows of ker f for a free source, as vectors in Z^rank."""
    if f.source.torsion:
        raise ValueError("kernel needs a free source")
    m = f.source.rank
    T = f.target
    # x in Z^m with sum x_i img_i in the relation lattice of T
    cols = [list(img) for img in f.images] + T.relation_rows()
    if not cols:
        return identity(m)
    ker = integer_kernel(transpose(cols), len(cols))
    return row_lattice_basis([r[:m] for r in ker], m)


def solve_section(pi: GroupHom):
    """A homomorphism s with pi(s(y)) = y for all y, or None if none exists."""
    S, T = pi.source, pi.target
    images = []
    for j in range(T.ngens):
        e = tuple(int(i == j) for i in range(T.ngens))
        if j < T.rank:
            x = solve_in_group(pi.images, T, e)
            if x is None:
                return None
            images.append(S.normalize(x[: S.ngens]))
            continue
        d = T.torsion[j - T.rank]
        # s(e) must lie in the d-torsion of S: free part 0, torsion part in multiples of d_k/gcd
        gens = []
        for k, dk in enumerate(S.torsion):
            g = [0] * S.ngens
            g[S.rank + k] = dk // gcd(d, dk)
            gens.append(g)
        cols = [list(pi(g)) for g in gens]
        x = solve_in_group(cols, T, e)
        if x is None:
            return None
        s = S.zero()
        for c, g in zip(x, gens):
            s = S.add(s, S.scale(c, g))
        images.append(s)
    return GroupHom(T, S, images)


def gale_dual(N: FgAbGroup, rays: list):
    """Divisor-sequence data for beta: Z^m -> N, e_i -> rays[i].

    Returns (M_rows, Lvee, D) where M_rows are the images in (Z^m)* of a basis
    of M = Hom(N, Z), Lvee is the quotient presentation of L^vee =
    ((Z^m)* + K*) / F* from the resolution 0 -> K -> F -> N -> 0 with
    F = Z^(rank + #torsion), and D[i] is the class of e_i* in Lvee's coordinates.
    """
    m = len(rays)
    n, t = N.rank, len(N.torsion)
    rays = [N.normalize(b) for b in rays]
    rows = []
    for r in range(n + t):
        row = [rays[i][r] for i in range(m)]
        row += [N.torsion[j] if r == n + j else 0 for j in range(t)]
        rows.append(row)
    Lvee = QuotientGroup(m + t, rows)
    D = [Lvee.coords([int(k == i) for k in range(m + t)]) for i in range(m)]
    M_rows = [rows[r][:m] for r in range(n)]
    return M_rows, Lvee, D
