"""Truncated localization series Loc(w_k omega) and the extended I-function.

Series live in the variables Q (Lambda-coordinates), t_1..t_m with
y_i = e^(t_i) for the rays, and y_l for l in G.  Coefficients are ``Vec``
values indexed by the fixed-point keys of ``FixedPointIndex``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import ceil, factorial, floor

from .chenruan import FixedPointIndex
from .curves import MoriData, RefinedFanData, mori_cone, refined_sequence
from .errors import ProfileError, ValidationError
from .exactalg import ScalarField, SeriesKey, Truncation, TruncSeries, Vec
from .fandmod import DModElement, FanDModule
from .stackyfan import StackyFan


def compositions(n: int, total: int):
    """Non-negative integer tuples of length n with sum <= total, in graded order."""
    out = []
    for s in range(total + 1):
        out.extend(_exact(n, s))
    return out


def _exact(n, s):
    if n == 0:
        return [()] if s == 0 else []
    if n == 1:
        return [(s,)]
    return [(a,) + rest for a in range(s, -1, -1) for rest in _exact(n - 1, s - a)]


@dataclass(frozen=True)
class Profile:
    qdeg: Fraction = Fraction(2)
    tord: int = 0
    yord: int = 2

    def __post_init__(self):
        if Fraction(self.qdeg) < 0 or self.tord < 0 or self.yord < 0:
            raise ProfileError("truncation orders must be non-negative")
        object.__setattr__(self, "qdeg", Fraction(self.qdeg))


class MirrorSetup:
    """Fan, extension set, truncation profile and scalar mode, with derived data."""

    def __init__(self, fan: StackyFan, G=(), profile: Profile | None = None, chi_values=None,
                 ample=None, sigma0: int = 0):
        self.fan = fan
        self.ref: RefinedFanData = refined_sequence(fan, sigma0)
        self.mori: MoriData = mori_cone(self.ref, ample)
        self.module = FanDModule(self.ref, G, reduced=False)
        self.G = self.module.G
        self.S = self.module.S
        self.profile = profile or Profile()
        self.field = ScalarField(fan.n, chi_values)
        self.idx = FixedPointIndex(fan, self.field)
        if self.field.specialized:
            for sigma, ws in self.idx.weights.items():
                for i, w in ws.items():
                    if not w:
                        raise ProfileError(
                            f"chi point is not generic: weight u_{i + 1} vanishes at cone "
                            f"{sorted(j + 1 for j in sigma)}"
                        )
        ref = self.ref
        qweights = tuple(self.mori.degree(ref.to_q([int(i == j) for i in range(ref.rank)]))
                         for j in range(ref.rank))
        p = self.profile
        self.trunc = Truncation(qweights, p.qdeg, p.tord, p.yord, fan.m, len(self.G))
        self._loc = {}

    @property
    def m(self):
        return self.fan.m

    def psi(self, k):
        return self.fan.psi(k)[0]

    @cached_property
    def effective(self):
        return [d for d in self.mori.enumerate_effective(self.profile.qdeg)
                if self.mori.in_C_union(self.ref.to_q(d))]

    def key(self, q=None, t=None, y=None) -> SeriesKey:
        o = self.trunc.origin()
        return SeriesKey(tuple(q) if q is not None else o.q, tuple(t) if t is not None else o.t,
                         tuple(y) if y is not None else o.y)

    def with_profile(self, profile: Profile) -> "MirrorSetup":
        """Same fan data with another truncation profile (shares nothing mutable)."""
        other = MirrorSetup.__new__(MirrorSetup)
        other.__dict__.update(self.__dict__)
        other.profile = profile
        other.trunc = Truncation(self.trunc.qweights, profile.qdeg, profile.tord, profile.yord,
                                 self.trunc.nt, self.trunc.ny)
        other._loc = {}
        other.__dict__.pop("effective", None)
        return other


@dataclass(frozen=True)
class HypIndex:
    k: tuple
    lam: tuple  # Q^m part
    lamG: tuple  # integer part over G
    d: tuple  # Lambda-coordinates of d(lambda)
    v: tuple  # v(lambda) in N

    @property
    def frac_support(self):
        return frozenset(i for i, x in enumerate(self.lam) if x.denominator != 1)


def make_index(setup: MirrorSetup, k, d, lamG) -> HypIndex:
    """The lambda with given d(lambda) and G-part; no validity checks."""
    fan = setup.fan
    k = fan.N.normalize(k)
    dq = setup.ref.to_q(d)
    lam = list(dq)
    pk = setup.psi(k)
    for i in range(setup.m):
        lam[i] -= pk[i]
    base = k
    for a, l in zip(lamG, setup.G):
        if a:
            pl = setup.psi(l)
            for i in range(setup.m):
                lam[i] -= a * pl[i]
            base = fan.N.add(base, fan.N.scale(a, l))
    v = fan.combine(base, {i: ceil(x) for i, x in enumerate(lam) if ceil(x)})
    return HypIndex(k, tuple(lam), tuple(lamG), tuple(d), v)


def _balanced(setup: MirrorSetup, h: HypIndex) -> bool:
    fan = setup.fan
    for r in range(fan.n):
        s = Fraction(h.k[r]) + sum((x * b[r] for x, b in zip(h.lam, fan.rays_bar)), Fraction(0))
        s += sum((Fraction(a) * l[r] for a, l in zip(h.lamG, setup.G)), Fraction(0))
        if s:
            return False
    return True


def enumerate_K(setup: MirrorSetup, k) -> list:
    """All lambda in K^G_k whose summand can be nonzero within the profile."""
    fan = setup.fan
    k = fan.N.normalize(k)
    if not fan.in_support(k):
        raise ValidationError(f"{k} is outside the support")
    out = []
    for d in setup.effective:
        for a in compositions(len(setup.G), setup.profile.yord):
            h = make_index(setup, k, d, a)
            if h.frac_support not in fan.cones:
                continue
            if not _balanced(setup, h):
                raise AssertionError(f"unbalanced hypergeometric index {h}")
            out.append(h)
    return out


def hyp_factor(setup: MirrorSetup, h: HypIndex, sigma):
    """The product over rays and G of shifted factorials, restricted at the fixed point of sigma."""
    F = setup.field
    z = F.z
    val = F.one
    for i, x in enumerate(h.lam):
        u = setup.idx.u(sigma, i)
        val = val * _shifted(F, u, x, z)
        if not val:
            return val
    for a in h.lamG:
        if a < 0:
            return F.zero
        if a:
            val = val / (F.const(factorial(a)) * z**a)
    return val


def _shifted(F, u, x: Fraction, z):
    """prod_{c <= 0, <c> = <x>} (u + cz) / prod_{c <= x, <c> = <x>} (u + cz)."""
    out = F.one
    if x > 0:
        c = x
        while c > 0:
            out = out * (u + z * c)
            c -= 1
        return F.one / out
    c = x + 1
    while c <= 0:
        f = u + z * c
        if not f:
            return F.zero
        out = out * f
        c += 1
    return out


def restricted_summand(setup: MirrorSetup, h: HypIndex) -> Vec:
    """hyp_factor(h) * 1_v(h) as a class in the fixed-point model."""
    idx = setup.idx
    F = setup.field
    vals = []
    for sigma, w in idx.keys:
        vals.append(hyp_factor(setup, h, sigma) if w == h.v else F.zero)
    return Vec(vals)


def _t_powers(setup: MirrorSetup, sigma, lam):
    """pw[i][a] = (u_i(sigma)/z + lam_i)^a / a! up to the t-order."""
    F = setup.field
    T = setup.profile.tord
    pw = []
    for i, x in enumerate(lam):
        base = setup.idx.u(sigma, i) / F.z + x
        row = [F.one]
        for a in range(1, T + 1):
            row.append(row[-1] * base / a)
        pw.append(row)
    return pw


def loc_series(setup: MirrorSetup, k) -> TruncSeries:
    """Loc(w_k omega) truncated to the setup's profile."""
    k = setup.fan.N.normalize(k)
    if k in setup._loc:
        return setup._loc[k]
    idx = setup.idx
    F = setup.field
    talphas = compositions(setup.m, setup.profile.tord)
    acc: dict = {}
    for h in enumerate_K(setup, k):
        for sigma, w in idx.keys:
            if w != h.v:
                continue
            base = hyp_factor(setup, h, sigma)
            if not base:
                continue
            pos = idx.pos[(sigma, w)]
            pw = _t_powers(setup, sigma, h.lam)
            for alpha in talphas:
                c = base
                for i, a in enumerate(alpha):
                    if a:
                        c = c * pw[i][a]
                if not c:
                    continue
                key = SeriesKey(h.d, alpha, h.lamG)
                slot = acc.setdefault(key, {})
                slot[pos] = slot[pos] + c if pos in slot else c
    coeffs = {key: Vec(slot.get(p, F.zero) for p in range(idx.size)) for key, slot in acc.items()}
    out = TruncSeries(setup.trunc, coeffs)
    setup._loc[k] = out
    return out


def loc_zero(setup: MirrorSetup, k) -> Vec:
    """Loc^0(w_k omega): the d = 0 summand, computed from Psi(k) directly."""
    fan = setup.fan
    F = setup.field
    k = fan.N.normalize(k)
    psi = setup.psi(k)
    v = fan.combine(k, {i: -floor(p) for i, p in enumerate(psi) if floor(p)})
    vals = []
    for sigma, w in setup.idx.keys:
        if w != v:
            vals.append(F.zero)
            continue
        val = F.one
        for i, p in enumerate(psi):
            c = -p + 1
            while c <= 0:
                val = val * (setup.idx.u(sigma, i) + F.z * c)
                c += 1
        vals.append(val)
    return Vec(vals)


def ifunction(setup: MirrorSetup) -> TruncSeries:
    """The extended I-function z * Loc(w_0 omega) in the (Q, t, y) coordinates."""
    return loc_series(setup, setup.fan.N.zero()).scale(setup.field.z)


# Loc applied to fan D-module elements ----------------------------------------


def exp_series(setup: MirrorSetup, a) -> TruncSeries:
    """e^(sum_i a_i t_i) with rational a_i."""
    tr = setup.trunc
    F = setup.field
    o = tr.origin()
    coeffs = {}
    for alpha in compositions(setup.m, setup.profile.tord):
        c = Fraction(1)
        for ai, e in zip(a, alpha):
            if e:
                c *= Fraction(ai) ** e / factorial(e)
        if c:
            coeffs[SeriesKey(o.q, alpha, o.y)] = F.const(c)
    return TruncSeries(tr, coeffs)


def loc_of(setup: MirrorSetup, e: DModElement) -> TruncSeries:
    """Loc of an element of the unreduced fan D-module; ray variables become e^(t_i)."""
    tr = setup.trunc
    F = setup.field
    m = setup.m
    out = TruncSeries(tr)
    groups: dict = {}
    for (k, q, y, zp), c in e.terms.items():
        groups.setdefault((k, tuple(y[:m])), []).append((q, tuple(y[m:]), zp, c))
    for (k, yr), items in sorted(groups.items()):
        coeffs = {}
        o = tr.origin()
        for q, yg, zp, c in items:
            key = SeriesKey(tuple(q), o.t, yg)
            val = F.const(c) * F.z**zp
            coeffs[key] = coeffs[key] + val if key in coeffs else val
        mono = TruncSeries(tr, coeffs)
        if any(yr):
            mono = mono * exp_series(setup, yr)
        out = out + _scalar_times(mono, loc_series(setup, k))
    return out


def _scalar_times(s: TruncSeries, v: TruncSeries) -> TruncSeries:
    tr = s.trunc
    out = {}
    for ka, ca in s.coeffs.items():
        for kb, cb in v.coeffs.items():
            key = ka + kb
            if not tr.admits(key):
                continue
            p = cb * ca
            out[key] = out[key] + p if key in out else p
    return TruncSeries(tr, out)


# differential operators on series ------------------------------------------------


def q_derivative(setup: MirrorSetup, s: TruncSeries, xi) -> TruncSeries:
    """xi Q d/dQ: multiplies the Q^d coefficient by xi . d (xi in (Q^m)*)."""
    ref = setup.ref
    out = {}
    for key, c in s.coeffs.items():
        w = sum((Fraction(a) * b for a, b in zip(xi, ref.to_q(key.q))), Fraction(0))
        if w:
            out[key] = c * w
    return TruncSeries(s.trunc, out)


def t_derivative(s: TruncSeries, i: int) -> TruncSeries:
    out = {}
    for key, c in s.coeffs.items():
        a = key.t[i]
        if a:
            t = list(key.t)
            t[i] -= 1
            out[SeriesKey(key.q, tuple(t), key.y)] = c * a
    return TruncSeries(s.trunc, out)


def y_derivative(s: TruncSeries, j: int) -> TruncSeries:
    out = {}
    for key, c in s.coeffs.items():
        a = key.y[j]
        if a:
            y = list(key.y)
            y[j] -= 1
            out[SeriesKey(key.q, key.t, tuple(y))] = c * a
    return TruncSeries(s.trunc, out)


def times_class(setup: MirrorSetup, s: TruncSeries, cls: Vec) -> TruncSeries:
    """Pointwise product with an untwisted class (restrictions multiply)."""
    return s.map(lambda v: Vec(a * b for a, b in zip(v, cls)))


def divisor_class(setup: MirrorSetup, xi) -> Vec:
    """The class sum_i xi_i u_i in the fixed-point model."""
    F = setup.field
    vals = []
    for sigma, _ in setup.idx.keys:
        acc = F.zero
        for i, x in enumerate(xi):
            if x:
                acc = acc + setup.idx.u(sigma, i) * Fraction(x)
        vals.append(acc)
    return Vec(vals)


def xi_directions(setup: MirrorSetup) -> list:
    """Lifts xi in (Q^m)* vanishing on the sigma0 coordinates: a basis of L^vee tensor Q."""
    s0 = setup.ref.sigma0
    return [tuple(int(i == j) for i in range(setup.m)) for j in range(setup.m) if j not in s0]


def xi_operator(setup: MirrorSetup, xi, e: DModElement) -> DModElement:
    """z nabla_{xi Q dQ} on the fan D-module: sum_i xi_i z theta_i."""
    mod = setup.module
    out = DModElement()
    for i, x in enumerate(xi):
        if x:
            out = out + mod.theta_action(i, e).scale(Fraction(x))
    return out


@dataclass
class ODEReport:
    ok: bool = True
    checked: int = 0
    failures: list = field(default_factory=list)

    def fail(self, what, key):
        self.ok = False
        if len(self.failures) < 5:
            self.failures.append((what, key))


def _compare(rep: ODEReport, what, a: TruncSeries, b: TruncSeries, keep):
    diff = a - b
    rep.checked += 1
    for key in diff.keys():
        if keep(key):
            rep.fail(what, key)
            return


def verify_loc_ode(setup: MirrorSetup, window=None) -> ODEReport:
    """Check the localization differential equations and the grading identity on a window of k."""
    fan = setup.fan
    F = setup.field
    mod = setup.module
    tr = setup.trunc
    rep = ODEReport()
    if window is None:
        window = sorted({tuple(b.v) for b in fan.box} | {tuple(fan.N.zero())} | set(map(tuple, fan.rays)))
    for k in window:
        unit = mod.unit(k)
        loc = loc_series(setup, k)
        for xi in xi_directions(setup):
            lhs = loc_of(setup, xi_operator(setup, xi, unit))
            rhs = q_derivative(setup, loc, xi).scale(F.z) + times_class(setup, loc, divisor_class(setup, xi))
            _compare(rep, f"xi={xi} k={k}", lhs, rhs, lambda key: True)
        for i in range(setup.m):
            lhs = loc_of(setup, mod.mul_y(i, mod.partial_action(i, unit)))
            rhs = t_derivative(loc, i).scale(F.z)
            _compare(rep, f"t{i + 1} k={k}", lhs, rhs, lambda key: sum(key.t) < tr.tord)
        for j in range(len(setup.G)):
            lhs = loc_of(setup, mod.partial_action(setup.m + j, unit))
            rhs = y_derivative(loc, j).scale(F.z)
            _compare(rep, f"y{j + 1} k={k}", lhs, rhs, lambda key: sum(key.y) < tr.yord)
        if not F.specialized:
            target = mod.age(k)
            rep.checked += 1
            for key, vec in loc.items():
                base = target - series_key_degree(setup, key)
                for (sigma, w), c in zip(setup.idx.keys, vec):
                    if c and c.homogeneous_degree() != base - fan.age(w):
                        rep.fail(f"grading k={k}", key)
                        break
    return rep


def series_key_degree(setup: MirrorSetup, key: SeriesKey) -> Fraction:
    """Degree of Q^d t^a y^b: c_1 . d plus (1 - |l|) per y_l; t has degree 0."""
    deg = sum(setup.ref.to_q(key.q), Fraction(0))
    for a, l in zip(key.y, setup.G):
        if a:
            deg += a * (1 - setup.fan.age(l))
    return deg
