"""Exact scalars, small dense matrices and truncated multivariate series.

Every scalar in the package lives in the field Q(z, chi_1, ..., chi_n) of
rational functions in the loop parameter ``z`` and the equivariant
parameters.  Elements are stored as a numerator/denominator pair of FLINT
integer polynomials, reduced by their gcd, with the denominator's leading
coefficient made positive.  That makes the representation canonical, so
equality is structural.

In specialized mode the chi_i are fixed rational numbers and only ``z``
remains a variable.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

import flint

Rat = Fraction


class ScalarField:
    """The field Q(z, chi) in which every exact computation happens.

    ``chi_values`` switches to specialized mode: each chi_i becomes the given
    rational constant.
    """

    def __init__(self, n: int, chi_values=None):
        self.n = n
        self.specialized = chi_values is not None
        if self.specialized:
            chi_values = tuple(Fraction(v) for v in chi_values)
            if len(chi_values) != n:
                raise ValueError(f"expected {n} chi values, got {len(chi_values)}")
            names = ("z",)
        else:
            names = ("z",) + tuple(f"chi{i + 1}" for i in range(n))
        self.chi_values = chi_values
        self.names = names
        self.ctx = flint.fmpz_mpoly_ctx.get(names, "lex")
        gens = self.ctx.gens()
        self._gens = gens
        self._pone = self.ctx.constant(1)
        self._pzero = self.ctx.constant(0)
        self.zero = ZRat._raw(self, self._pzero, self._pone)
        self.one = ZRat._raw(self, self._pone, self._pone)
        self.z = ZRat._raw(self, gens[0], self._pone)
        if self.specialized:
            self.chi = tuple(self.const(v) for v in chi_values)
        else:
            self.chi = tuple(ZRat._raw(self, g, self._pone) for g in gens[1:])
        self._zneg = (-gens[0],) + tuple(gens[1:])

    def const(self, value) -> "ZRat":
        q = Fraction(value)
        return ZRat._raw(self, self.ctx.constant(q.numerator), self.ctx.constant(q.denominator))

    def coerce(self, value) -> "ZRat":
        if isinstance(value, ZRat):
            if value.field is not self:
                raise ValueError("scalars from different fields")
            return value
        if isinstance(value, (int, Fraction)):
            return self.const(value)
        raise TypeError(f"cannot coerce {type(value).__name__} into the scalar field")

    def linear_form(self, coeffs) -> "ZRat":
        """The element sum_i coeffs[i] * chi_i."""
        out = self.zero
        for c, x in zip(coeffs, self.chi):
            if c:
                out = out + x * Fraction(c)
        return out

    def line_limit(self, r: "ZRat", direction) -> "ZRat":
        """Value at s = 0 of r restricted to the line chi = s * direction.

        Raises ZeroDivisionError if r has a pole at s = 0 along the line.
        """
        if self.specialized:
            raise ValueError("line limits need symbolic chi")
        if self.n == 0:
            return r
        s = self._gens[1]
        direction = [Fraction(d) for d in direction]
        den_l = lcm(*(d.denominator for d in direction))
        # chi_i -> (d_i * den_l) * s / den_l; the common 1/den_l is a rescaling of s
        images = [self._gens[0]] + [int(d * den_l) * s for d in direction]
        num = r.num.compose(*images)
        den = r.den.compose(*images)
        if den.is_zero():
            raise ZeroDivisionError("denominator vanishes identically on the line")
        q = ZRat(self, num, den)
        num0 = q.num.subs({"chi1": 0})
        den0 = q.den.subs({"chi1": 0})
        if den0.is_zero():
            raise ZeroDivisionError("pole at the origin along the chosen line")
        return ZRat(self, num0, den0)

    def specialize(self, r: "ZRat", target: "ScalarField") -> "ZRat":
        """Map r into ``target``, a specialized field with the same n."""
        if self.specialized or not target.specialized or target.n != self.n:
            raise ValueError("specialize maps a symbolic field onto a specialized one")
        den_l = lcm(*(v.denominator for v in target.chi_values)) if self.n else 1
        zt = target._gens[0]
        images = [zt * den_l] + [target.ctx.constant(int(v * den_l)) for v in target.chi_values]
        # every generator was scaled by den_l; undo by homogenizing degree-wise
        num = _scaled_compose(r.num, images, den_l, target)
        den = _scaled_compose(r.den, images, den_l, target)
        return num / den


def _scaled_compose(p, images, scale, target):
    # substitute x -> image/scale monomial-wise, exact over Q
    out = target.zero
    for exps, coeff in p.to_dict().items():
        deg = sum(exps)
        term = target.ctx.constant(int(coeff))
        for img, e in zip(images, exps):
            if e:
                term = term * img**e
        out = out + ZRat(target, term, target.ctx.constant(scale**deg))
    return out


class ZRat:
    """Element of Q(z, chi) kept as a reduced fraction of integer polynomials."""

    __slots__ = ("field", "num", "den")

    def __init__(self, field: ScalarField, num, den):
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        g = num.gcd(den)
        if not g.is_one():
            num = num / g
            den = den / g
        if den.leading_coefficient() < 0:
            num = -num
            den = -den
        self.field = field
        self.num = num
        self.den = den

    @classmethod
    def _raw(cls, field, num, den):
        obj = cls.__new__(cls)
        obj.field = field
        obj.num = num
        obj.den = den
        return obj

    # arithmetic ---------------------------------------------------------
    def _other(self, other):
        if isinstance(other, ZRat):
            return other
        if isinstance(other, (int, Fraction)):
            return self.field.const(other)
        return NotImplemented

    def __add__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        if o.num.is_zero():
            return self
        if self.num.is_zero():
            return o
        if self.den == o.den:
            return ZRat(self.field, self.num + o.num, self.den)
        return ZRat(self.field, self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return ZRat._raw(self.field, -self.num, self.den)

    def __sub__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return o + (-self)

    def __mul__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        if self.num.is_zero() or o.num.is_zero():
            return self.field.zero
        if o.den.is_one() and o.num.is_one():
            return self
        if self.den.is_one() and self.num.is_one():
            return o
        return ZRat(self.field, self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        if o.num.is_zero():
            raise ZeroDivisionError("division by zero scalar")
        return ZRat(self.field, self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return o / self

    def __pow__(self, e: int):
        if e >= 0:
            return ZRat._raw(self.field, self.num**e, self.den**e)
        return self.field.one / (self ** (-e))

    def __eq__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return False
        return self.num == o.num and self.den == o.den

    def __hash__(self):
        return hash((str(self.num), str(self.den)))

    def __bool__(self):
        return not self.num.is_zero()

    def is_zero(self) -> bool:
        return self.num.is_zero()

    # structure in z ---------------------------------------------------------
    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError("not a constant")
        return Fraction(int(self.num.leading_coefficient()) if not self.num.is_zero() else 0,
                        int(self.den.leading_coefficient()))

    def zdegrees(self):
        """(degree of numerator in z, degree of denominator in z); numerator -1 if zero."""
        nd = -1 if self.num.is_zero() else self.num.degrees()[0]
        return nd, self.den.degrees()[0]

    def is_z_free(self) -> bool:
        nd, dd = self.zdegrees()
        return nd <= 0 and dd == 0

    def is_z_polynomial(self) -> bool:
        return self.den.degrees()[0] == 0

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def neg_z(self) -> "ZRat":
        """The substitution z -> -z."""
        g = self.field._zneg
        return ZRat(self.field, self.num.compose(*g), self.den.compose(*g))

    def homogeneous_degree(self):
        """Total degree in (z, chi) if homogeneous, else None; None for zero too."""
        if self.num.is_zero():
            return None
        dn = _homog_deg(self.num)
        dd = _homog_deg(self.den)
        if dn is None or dd is None:
            return None
        return int(dn) - int(dd)

    def __repr__(self):
        return f"ZRat({self})"

    def __str__(self):
        if self.den.is_one():
            return str(self.num)
        return f"{_wrap(self.num)}/{_wrap(self.den)}"


def _wrap(p):
    s = str(p)
    return s if len(p) <= 1 and not s.startswith("-") else f"({s})"


def _homog_deg(p):
    degs = {sum(e) for e in p.to_dict()}
    return degs.pop() if len(degs) == 1 else None


def _zcoeffs(field: ScalarField, p) -> list:
    """Coefficients of p as a polynomial in z, each a z-free ZRat."""
    if p.is_zero():
        return []
    buckets: dict[int, dict] = {}
    for exps, c in p.to_dict().items():
        buckets.setdefault(exps[0], {})[(0,) + tuple(exps[1:])] = c
    top = max(buckets)
    one = field._pone
    return [
        ZRat._raw(field, field.ctx.from_dict(buckets[j]), one) if j in buckets else field.zero
        for j in range(top + 1)
    ]


def zrat_split(r: ZRat):
    """Split r = pol + prop with pol a z-polynomial and prop vanishing at z = oo."""
    F = r.field
    nd, dd = r.zdegrees()
    if nd < dd:
        return F.zero, r
    num = _zcoeffs(F, r.num)
    den = _zcoeffs(F, r.den)
    lc = den[-1]
    rem = list(num)
    pol = F.zero
    for j in range(nd - dd, -1, -1):
        c = rem[j + dd] / lc
        if c:
            for i, d in enumerate(den):
                if d:
                    rem[j + i] = rem[j + i] - c * d
            pol = pol + c * F.z**j
    return pol, r - pol


def zrat_expand_at_zero(r: ZRat, order: int) -> dict:
    """Laurent coefficients {k: c_k} of r at z = 0 for pole order <= k <= order."""
    F = r.field
    if r.is_zero():
        return {}
    num = _zcoeffs(F, r.num)
    den = _zcoeffs(F, r.den)
    a = next(i for i, c in enumerate(num) if c)
    b = next(i for i, c in enumerate(den) if c)
    num, den = num[a:], den[b:]
    shift = a - b
    d0 = den[0]
    series = []
    for k in range(max(0, order - shift + 1)):
        acc = num[k] if k < len(num) else F.zero
        for i in range(1, min(k, len(den) - 1) + 1):
            if den[i]:
                acc = acc - den[i] * series[k - i]
        series.append(acc / d0)
    return {k + shift: c for k, c in enumerate(series) if c}


def residue_at_infinity(r: ZRat) -> ZRat:
    """Coefficient of 1/z in the expansion of a proper r at z = oo."""
    F = r.field
    if r.is_zero():
        return F.zero
    nd, dd = r.zdegrees()
    if nd >= dd:
        raise ValueError("residue_at_infinity needs a proper fraction")
    if nd < dd - 1:
        return F.zero
    return _zcoeffs(F, r.num)[-1] / _zcoeffs(F, r.den)[-1]


def zrat_coefficient(r: ZRat, k: int) -> ZRat:
    """Coefficient of z^k of a z-polynomial."""
    if not r.is_z_polynomial():
        raise ValueError("not a polynomial in z")
    coeffs = _zcoeffs(r.field, r.num)
    if k >= len(coeffs) or k < 0:
        return r.field.zero
    return coeffs[k] / ZRat._raw(r.field, r.den, r.field._pone)


# vectors and matrices ----------------------------------------------------


class Vec(tuple):
    """Immutable vector of scalars with pointwise arithmetic."""

    def __add__(self, other):
        return Vec(a + b for a, b in zip(self, other))

    def __sub__(self, other):
        return Vec(a - b for a, b in zip(self, other))

    def __neg__(self):
        return Vec(-a for a in self)

    def __mul__(self, s):
        if isinstance(s, (Vec, Mat)):
            return NotImplemented
        return Vec(a * s for a in self)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return all(not a for a in self)

    def map(self, f):
        return Vec(f(a) for a in self)


class Mat:
    """Small dense matrix over the scalar field; rows are tuples."""

    __slots__ = ("rows", "field")

    def __init__(self, field: ScalarField, rows):
        self.field = field
        self.rows = tuple(tuple(r) for r in rows)

    @classmethod
    def identity(cls, field, n):
        return cls(field, [[field.one if i == j else field.zero for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, field, n, m=None):
        m = n if m is None else m
        return cls(field, [[field.zero] * m for _ in range(n)])

    @classmethod
    def from_columns(cls, field, cols):
        cols = list(cols)
        if not cols:
            return cls(field, [])
        return cls(field, list(zip(*cols)))

    @property
    def shape(self):
        return len(self.rows), (len(self.rows[0]) if self.rows else 0)

    def column(self, j) -> Vec:
        return Vec(r[j] for r in self.rows)

    def columns(self):
        return [self.column(j) for j in range(self.shape[1])]

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __add__(self, other):
        return Mat(self.field, [[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __sub__(self, other):
        return Mat(self.field, [[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __neg__(self):
        return Mat(self.field, [[-a for a in r] for r in self.rows])

    def __mul__(self, other):
        if isinstance(other, Mat):
            cols = list(zip(*other.rows))
            out = []
            for r in self.rows:
                row = []
                for c in cols:
                    acc = self.field.zero
                    for a, b in zip(r, c):
                        if a and b:
                            acc = acc + a * b
                    row.append(acc)
                out.append(row)
            return Mat(self.field, out)
        if isinstance(other, Vec):
            out = []
            for r in self.rows:
                acc = self.field.zero
                for a, b in zip(r, other):
                    if a and b:
                        acc = acc + a * b
                out.append(acc)
            return Vec(out)
        return Mat(self.field, [[a * other for a in r] for r in self.rows])

    def __rmul__(self, s):
        return Mat(self.field, [[s * a for a in r] for r in self.rows])

    def __eq__(self, other):
        return isinstance(other, Mat) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def is_zero(self) -> bool:
        return all(not a for r in self.rows for a in r)

    def map(self, f):
        return Mat(self.field, [[f(a) for a in r] for r in self.rows])

    def transpose(self):
        return Mat(self.field, list(zip(*self.rows)))

    def inverse(self) -> "Mat":
        n = self.shape[0]
        F = self.field
        aug = [list(r) + [F.one if i == j else F.zero for j in range(n)] for i, r in enumerate(self.rows)]
        for col in range(n):
            piv = next((i for i in range(col, n) if aug[i][col]), None)
            if piv is None:
                raise ZeroDivisionError("singular matrix")
            aug[col], aug[piv] = aug[piv], aug[col]
            inv = F.one / aug[col][col]
            aug[col] = [a * inv for a in aug[col]]
            for i in range(n):
                if i != col and aug[i][col]:
                    f = aug[i][col]
                    aug[i] = [a - f * b for a, b in zip(aug[i], aug[col])]
        return Mat(F, [r[n:] for r in aug])

    def det(self):
        n = self.shape[0]
        F = self.field
        a = [list(r) for r in self.rows]
        det = F.one
        for col in range(n):
            piv = next((i for i in range(col, n) if a[i][col]), None)
            if piv is None:
                return F.zero
            if piv != col:
                a[col], a[piv] = a[piv], a[col]
                det = -det
            det = det * a[col][col]
            inv = F.one / a[col][col]
            for i in range(col + 1, n):
                if a[i][col]:
                    f = a[i][col] * inv
                    a[i] = [x - f * y for x, y in zip(a[i], a[col])]
        return det

    def __repr__(self):
        return "Mat(" + "; ".join(", ".join(str(a) for a in r) for r in self.rows) + ")"


def rank_of_vectors(field: ScalarField, vectors) -> int:
    """Rank over Q(z, chi) of a list of equal-length vectors."""
    rows = [list(v) for v in vectors]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if rows[i][col]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = field.one / rows[rank][col]
        for i in range(rank + 1, len(rows)):
            if rows[i][col]:
                f = rows[i][col] * inv
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[rank])]
        rank += 1
    return rank


# truncated series ---------------------------------------------------------


@dataclass(frozen=True, order=True)
class SeriesKey:
    """Exponents of Q (in the integer basis of the curve lattice), t and y."""

    q: tuple
    t: tuple
    y: tuple

    def __add__(self, other):
        return SeriesKey(
            tuple(a + b for a, b in zip(self.q, other.q)),
            tuple(a + b for a, b in zip(self.t, other.t)),
            tuple(a + b for a, b in zip(self.y, other.y)),
        )

    def __sub__(self, other):
        return SeriesKey(
            tuple(a - b for a, b in zip(self.q, other.q)),
            tuple(a - b for a, b in zip(self.t, other.t)),
            tuple(a - b for a, b in zip(self.y, other.y)),
        )

    def is_origin(self) -> bool:
        return not any(self.q) and not any(self.t) and not any(self.y)


@dataclass(frozen=True)
class Truncation:
    """A truncation profile: Q-degree cap against an ample class, t-order, y-order.

    ``qweights[j]`` is the ample degree of the j-th basis vector of the curve
    lattice; ``nt`` and ``ny`` are the numbers of t and y variables.
    """

    qweights: tuple
    qdeg: Fraction
    tord: int
    yord: int
    nt: int
    ny: int

    def qdegree(self, key: SeriesKey) -> Fraction:
        return sum((w * e for w, e in zip(self.qweights, key.q)), Fraction(0))

    def admits(self, key: SeriesKey) -> bool:
        return (
            self.qdegree(key) <= self.qdeg
            and sum(key.t) <= self.tord
            and sum(key.y) <= self.yord
            and min(key.t, default=0) >= 0
            and min(key.y, default=0) >= 0
        )

    def weight(self, key: SeriesKey):
        """Total order used to sequence recursions; strictly additive."""
        return self.qdegree(key) + sum(key.t) + sum(key.y)

    def origin(self) -> SeriesKey:
        return SeriesKey((0,) * len(self.qweights), (0,) * self.nt, (0,) * self.ny)


class TruncSeries:
    """Finitely supported map SeriesKey -> coefficient, truncated to a profile.

    Coefficients may be scalars, Vec or Mat; products use ``*`` on
    coefficients, so matrix-times-vector series work as expected.
    """

    __slots__ = ("trunc", "coeffs")

    def __init__(self, trunc: Truncation, coeffs=None):
        self.trunc = trunc
        self.coeffs = {}
        for k, c in (coeffs or {}).items():
            if not trunc.admits(k):
                continue
            if _is_zero(c):
                continue
            self.coeffs[k] = c

    def __getitem__(self, key):
        return self.coeffs.get(key)

    def get(self, key, default=None):
        return self.coeffs.get(key, default)

    def keys(self):
        return sorted(self.coeffs, key=lambda k: (self.trunc.weight(k), k))

    def items(self):
        return [(k, self.coeffs[k]) for k in self.keys()]

    def __len__(self):
        return len(self.coeffs)

    def _check(self, other):
        if self.trunc != other.trunc:
            raise ValueError("truncation profile mismatch")

    def __add__(self, other):
        self._check(other)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out[k] + c if k in out else c
        return TruncSeries(self.trunc, out)

    def __neg__(self):
        return TruncSeries(self.trunc, {k: -c for k, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s):
        return TruncSeries(self.trunc, {k: c * s for k, c in self.coeffs.items()})

    def map(self, f):
        return TruncSeries(self.trunc, {k: f(c) for k, c in self.coeffs.items()})

    def __mul__(self, other):
        return series_mul(self, other)

    def is_zero(self) -> bool:
        return not self.coeffs

    def shift(self, key: SeriesKey, coeff=None):
        """Multiply by the monomial ``key`` (and an optional coefficient)."""
        out = {}
        for k, c in self.coeffs.items():
            nk = k + key
            out[nk] = c if coeff is None else c * coeff
        return TruncSeries(self.trunc, out)

    def __eq__(self, other):
        if not isinstance(other, TruncSeries):
            return NotImplemented
        return self.trunc == other.trunc and (self - other).is_zero()


def _is_zero(c) -> bool:
    if isinstance(c, (Vec, Mat)):
        return c.is_zero()
    return not c


def series_mul(a: TruncSeries, b: TruncSeries) -> TruncSeries:
    """Cauchy product truncated to the shared profile."""
    a._check(b)
    tr = a.trunc
    out = {}
    for ka, ca in a.coeffs.items():
        for kb, cb in b.coeffs.items():
            k = ka + kb
            if not tr.admits(k):
                continue
            p = ca * cb
            out[k] = out[k] + p if k in out else p
    return TruncSeries(tr, out)
