"""The fan D-module: explicit actions on the basis 1_k, operator words and GKZ-type relations.

Elements are finite sums c * z^p * Q^q * y^a * 1_k with rational c. The
unreduced module carries a y-variable for every element of S = rays + G;
the reduced module sets the ray variables to 1 and keeps only those of G.
Equivariant parameters act through ``chi_action``, so coefficients never
contain chi and the representation is canonical.

Operator words act right to left: in ``A*B :: unit(k)`` B is applied first.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product

from .curves import MoriData, RefinedFanData
from .errors import ValidationError


class DModElement:
    """Finite map (k, q, y, zpow) -> Fraction."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {}
        for key, c in (terms or {}).items():
            if c:
                self.terms[key] = Fraction(c)

    def _acc(self, key, c):
        v = self.terms.get(key, 0) + c
        if v:
            self.terms[key] = v
        else:
            self.terms.pop(key, None)

    def __add__(self, other):
        out = DModElement(self.terms)
        for k, c in other.terms.items():
            out._acc(k, c)
        return out

    def __neg__(self):
        return DModElement({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return DModElement({k: v * c for k, v in self.terms.items()})

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, DModElement) and self.terms == other.terms

    def __repr__(self):
        return f"DModElement({len(self.terms)} terms)"

    def by_unit(self) -> dict:
        """k -> {(q, y, zpow): c}."""
        out = {}
        for (k, q, y, zp), c in self.terms.items():
            out.setdefault(k, {})[(q, y, zp)] = c
        return out


# operator words ---------------------------------------------------------


@dataclass(frozen=True, order=True)
class Gen:
    """One generator: kind in {zT, zD, y, z, chi, Q}; ``arg`` is an index or a Q-exponent tuple."""

    kind: str
    arg: object = None


class Operator:
    """Linear combination of words in the generators; words are tuples applied right to left."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {}
        for w, c in (terms or {}).items():
            if c:
                self.terms[tuple(w)] = Fraction(c)

    @classmethod
    def gen(cls, kind, arg=None):
        return cls({(Gen(kind, arg),): 1})

    @classmethod
    def scalar(cls, c):
        return cls({(): c})

    def __add__(self, other):
        other = _as_op(other)
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, 0) + c
        return Operator(out)

    __radd__ = __add__

    def __neg__(self):
        return Operator({w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-_as_op(other))

    def __rsub__(self, other):
        return _as_op(other) - self

    def __mul__(self, other):
        other = _as_op(other)
        out = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                w = w1 + w2
                out[w] = out.get(w, 0) + c1 * c2
        return Operator(out)

    def __rmul__(self, other):
        return _as_op(other) * self

    def __pow__(self, e: int):
        out = Operator.scalar(1)
        for _ in range(e):
            out = out * self
        return out

    def is_zero(self):
        return not self.terms


def _as_op(x):
    if isinstance(x, Operator):
        return x
    return Operator.scalar(Fraction(x))


@dataclass
class Relation:
    """Sum of operators applied to basis elements; holds when the total vanishes."""

    parts: list  # [(Operator, k)]
    label: str = ""


# the module -----------------------------------------------------------------


class FanDModule:
    """Actions of z theta_i, z d_l and chi on the fan D-module of (fan, G)."""

    def __init__(self, ref: RefinedFanData, G=(), reduced: bool = False):
        fan = ref.fan
        self.ref = ref
        self.fan = fan
        self.G = [fan.N.normalize(g) for g in G]
        rays = set(map(tuple, fan.rays))
        for g in self.G:
            if g in rays:
                raise ValidationError(f"extension element {g} is a ray")
            if not fan.in_support(g):
                raise ValidationError(f"extension element {g} is outside the support")
        self.S = list(fan.rays) + self.G
        self.m = fan.m
        self.reduced = reduced
        # y-variables: over S (unreduced) or over G (reduced)
        self.nyvars = len(self.S) if not reduced else len(self.G)
        self.nq = ref.rank

    # combinatorial caches ---------------------------------------------------

    @lru_cache(maxsize=None)
    def psi(self, k):
        return self.fan.psi(k)[0]

    def age(self, k) -> Fraction:
        return sum(self.psi(k), Fraction(0))

    @lru_cache(maxsize=None)
    def dq(self, k, l):
        """Lambda-coordinates of d(k, l)."""
        return self.ref.coords(self.ref.dclass(k, l))

    @lru_cache(maxsize=None)
    def qvec(self, q):
        return self.ref.to_q(q)

    def yslot(self, s):
        """Index of the y-variable of S[s] or None (ray in the reduced module)."""
        if not self.reduced:
            return s
        return s - self.m if s >= self.m else None

    def add(self, k, l):
        return self.fan.add(k, l)

    def _qadd(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def _yinc(self, y, slot, e=1):
        if slot is None:
            return y
        y = list(y)
        y[slot] += e
        return tuple(y)

    # elements ---------------------------------------------------------------

    def unit(self, k, coeff=1) -> DModElement:
        k = self.fan.N.normalize(k)
        if not self.fan.in_support(k):
            raise ValidationError(f"{k} is outside the support")
        return DModElement({(k, (0,) * self.nq, (0,) * self.nyvars, 0): coeff})

    def monomial(self, k, q=None, y=None, zp=0, coeff=1) -> DModElement:
        k = self.fan.N.normalize(k)
        return DModElement({(k, tuple(q or (0,) * self.nq), tuple(y or (0,) * self.nyvars), zp): coeff})

    # actions --------------------------------------------------------------

    def theta_action(self, i: int, e: DModElement) -> DModElement:
        """z theta_i, with z D_i.d on Q^d (Leibniz) and no action on y."""
        out = DModElement()
        for (k, q, y, zp), c in e.terms.items():
            w = self.qvec(q)[i] + self.psi(k)[i]
            if w:
                out._acc((k, q, y, zp + 1), c * w)
            for s, l in enumerate(self.S):
                p = self.psi(l)[i]
                if not p:
                    continue
                kl = self.add(k, l)
                out._acc((kl, self._qadd(q, self.dq(k, l)), self._yinc(y, self.yslot(s)), zp), c * p)
        return out

    def partial_action(self, s: int, e: DModElement) -> DModElement:
        """z d_l for l = S[s]; product rule on y_l."""
        slot = self.yslot(s)
        if slot is None:
            raise ValidationError("the reduced module has no derivative in ray directions")
        l = self.S[s]
        out = DModElement()
        for (k, q, y, zp), c in e.terms.items():
            if y[slot]:
                out._acc((k, q, self._yinc(y, slot, -1), zp + 1), c * y[slot])
            kl = self.add(k, l)
            out._acc((kl, self._qadd(q, self.dq(k, l)), y, zp), c)
        return out

    def chi_action(self, a: int, e: DModElement) -> DModElement:
        """chi_a = z theta_chi: z (chi_a . k) 1_k + sum_l (chi_a . l) y_l Q^d(k,l) 1_(k+l)."""
        out = DModElement()
        for (k, q, y, zp), c in e.terms.items():
            if k[a]:
                out._acc((k, q, y, zp + 1), c * k[a])
            for s, l in enumerate(self.S):
                if not l[a]:
                    continue
                kl = self.add(k, l)
                out._acc((kl, self._qadd(q, self.dq(k, l)), self._yinc(y, self.yslot(s)), zp), c * l[a])
        return out

    def mul_y(self, s: int, e: DModElement) -> DModElement:
        slot = self.yslot(s)
        if slot is None:
            return e
        return DModElement({(k, q, self._yinc(y, slot), zp): c for (k, q, y, zp), c in e.terms.items()})

    def mul_q(self, qexp, e: DModElement) -> DModElement:
        return DModElement({(k, self._qadd(q, qexp), y, zp): c for (k, q, y, zp), c in e.terms.items()})

    def mul_z(self, e: DModElement) -> DModElement:
        return DModElement({(k, q, y, zp + 1): c for (k, q, y, zp), c in e.terms.items()})

    def apply_gen(self, g: Gen, e: DModElement) -> DModElement:
        if g.kind == "zT":
            return self.theta_action(g.arg, e)
        if g.kind == "zD":
            return self.partial_action(g.arg, e)
        if g.kind == "chi":
            return self.chi_action(g.arg, e)
        if g.kind == "y":
            return self.mul_y(g.arg, e)
        if g.kind == "Q":
            return self.mul_q(g.arg, e)
        if g.kind == "z":
            return self.mul_z(e)
        raise ValueError(f"unknown generator {g}")

    def apply(self, op: Operator, e: DModElement) -> DModElement:
        """Apply an operator (words right to left)."""
        out = DModElement()
        for word, c in op.terms.items():
            cur = e
            for g in reversed(word):
                cur = self.apply_gen(g, cur)
                if cur.is_zero():
                    break
            out = out + cur.scale(c)
        return out

    apply_word = apply

    def evaluate(self, rel: Relation) -> DModElement:
        out = DModElement()
        for op, k in rel.parts:
            out = out + self.apply(op, self.unit(k))
        return out

    def verify_relation(self, rel: Relation) -> bool:
        return self.evaluate(rel).is_zero()

    # grading -----------------------------------------------------------------

    def term_degree(self, key) -> Fraction:
        k, q, y, zp = key
        deg = self.age(k) + zp + sum(self.qvec(q), Fraction(0))
        for slot, a in enumerate(y):
            if a:
                l = self.S[slot + (self.m if self.reduced else 0)]
                deg += a * (1 - self.age(l))
        return deg

    def grading_degree(self, e: DModElement):
        """Common degree of all terms, or None when inhomogeneous (0 for the zero element)."""
        degs = {self.term_degree(key) for key in e.terms}
        if not degs:
            return Fraction(0)
        if len(degs) > 1:
            return None
        return degs.pop()

    # generators of the module -------------------------------------------------

    def generators_check(self, candidates):
        """(ok, witness): every Box(sigma) point must be reachable from a candidate in sigma using S in sigma."""
        fan = self.fan
        cands = [fan.N.normalize(k) for k in candidates]
        for sigma in fan.maximal:
            def in_sigma(k):
                return fan.in_support(k) and fan.psi(k)[1] <= sigma
            gens = [l for l in self.S if in_sigma(l)]
            starts = [k for k in cands if in_sigma(k)]
            targets = [b.v for b in fan.box_of_cone(sigma)]
            bound = max((sum(fan.psi(v)[0]) for v in targets), default=0)
            seen = set()
            frontier = [k for k in starts if sum(fan.psi(k)[0]) <= bound]
            seen.update(frontier)
            while frontier:
                nxt = []
                for k in frontier:
                    for l in gens:
                        kl = fan.add(k, l)
                        if kl not in seen and sum(fan.psi(kl)[0]) <= bound:
                            seen.add(kl)
                            nxt.append(kl)
                frontier = nxt
            for v in targets:
                if v not in seen:
                    return False, {"cone": sorted(i + 1 for i in sigma), "point": v}
        return True, None

    def commuting_generators(self) -> list:
        gens = [Gen("zT", i) for i in range(self.m)]
        gens += [Gen("zD", s) for s in range(len(self.S)) if self.yslot(s) is not None]
        gens += [Gen("chi", a) for a in range(self.fan.n)]
        return gens

    def flatness_check(self, window=None):
        """(ok, witness): all pairs of zT, zD and chi commute on 1_k for k in the window."""
        gens = self.commuting_generators()
        for k in window or self._window():
            e = self.unit(k)
            for i, g in enumerate(gens):
                ge = self.apply_gen(g, e)
                for h in gens[i + 1:]:
                    lhs = self.apply_gen(g, self.apply_gen(h, e))
                    if not (lhs - self.apply_gen(h, ge)).is_zero():
                        return False, {"pair": (self.format_gen(g), self.format_gen(h)), "k": k}
        return True, None

    # relation families ---------------------------------------------------------

    def _window(self):
        fan = self.fan
        out = {tuple(b.v) for b in fan.box} | {tuple(b) for b in fan.rays} | {fan.N.zero()}
        return sorted(out)

    def r_relations(self, window=None) -> list:
        """R_{i,k}: z theta_i - z Psi_i(k) - sum_l Psi_i(l) y_l z d_l on 1_k (unreduced)."""
        if self.reduced:
            raise ValueError("R-relations live in the unreduced module")
        out = []
        for k in window or self._window():
            for i in range(self.m):
                op = Operator.gen("zT", i) - Operator.gen("z") * self.psi(k)[i]
                for s, l in enumerate(self.S):
                    p = self.psi(l)[i]
                    if p:
                        op = op - p * Operator.gen("y", s) * Operator.gen("zD", s)
                out.append(Relation([(op, k)], f"R[{i + 1},{k}]"))
        return out

    def _side(self, d, a, k):
        """Q^d prod (z d_l)^{a_l} 1_k, or its reduced counterpart, as (Operator, k)."""
        op = Operator.scalar(1)
        if any(d):
            op = Operator.gen("Q", tuple(d))
        if not self.reduced:
            for s, e in enumerate(a):
                if e:
                    op = op * Operator.gen("zD", s) ** e
            return op
        for s in range(self.m, len(self.S)):
            if a[s]:
                op = op * Operator.gen("zD", s) ** a[s]
        for i in range(self.m):
            for nu in range(a[i]):
                f = Operator.gen("zT", i) - Operator.gen("z") * (nu + self.psi(k)[i])
                for s in range(self.m, len(self.S)):
                    p = self.psi(self.S[s])[i]
                    if p:
                        f = f - p * Operator.gen("y", s) * Operator.gen("zD", s)
                op = op * f
        return op

    def p_relations(self, mori: MoriData, max_degree=3, max_order=3, window=None) -> list:
        """All non-trivial P (or reduced P') relations within the bounds."""
        fan = self.fan
        window = window or self._window()
        ds = mori.enumerate_effective(max_degree)
        nS = len(self.S)
        avecs = [a for a in product(range(max_order + 1), repeat=nS) if sum(a) <= max_order]
        groups = {}
        for k in window:
            pk = self.psi(k)
            for a in avecs:
                end = k
                lam = list(pk)
                for s, e in enumerate(a):
                    if e:
                        end = fan.N.add(end, fan.N.scale(e, self.S[s]))
                        lam = [x + e * y for x, y in zip(lam, self.psi(self.S[s]))]
                for d in ds:
                    key = (end, tuple(x + y for x, y in zip(lam, self.qvec(d))))
                    groups.setdefault(key, []).append((d, a, k))
        out = []
        for key in sorted(groups, key=repr):
            sides = sorted(groups[key])
            for x in range(len(sides)):
                for y in range(x + 1, len(sides)):
                    d1, a1, k1 = sides[x]
                    d2, a2, k2 = sides[y]
                    rel = Relation(
                        [(self._side(d1, a1, k1), k1), (-self._side(d2, a2, k2), k2)],
                        f"P[{d1},{d2};{a1},{a2};{k1},{k2}]",
                    )
                    out.append(rel)
        return out

    def gkz_relations(self, mori: MoriData, max_degree=3, max_order=3, window=None) -> list:
        rels = [] if self.reduced else self.r_relations(window)
        return rels + self.p_relations(mori, max_degree, max_order, window)

    # text syntax ----------------------------------------------------------------

    def format_gen(self, g: Gen) -> str:
        if g.kind == "zT":
            return f"zT{g.arg + 1}"
        if g.kind in ("zD", "y"):
            return f"{g.kind}{g.arg + 1}"
        if g.kind == "chi":
            return f"chi{g.arg + 1}"
        if g.kind == "z":
            return "z"
        if g.kind == "Q":
            return format_q(g.arg)
        raise ValueError(g)

    def format_operator(self, op: Operator) -> str:
        if op.is_zero():
            return "0"
        parts = []
        for w in sorted(op.terms, key=lambda w: (len(w), w)):
            c = op.terms[w]
            body = "*".join(self.format_gen(g) for g in w)
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            if not body:
                txt = str(mag)
            elif mag == 1:
                txt = body
            else:
                txt = f"{mag}*{body}"
            parts.append((sign, txt))
        s = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, txt in parts[1:]:
            s += f" {sign} {txt}"
        return s

    def format_unit(self, k) -> str:
        n = self.fan.n
        free = ",".join(str(x) for x in k[:n])
        tors = ",".join(str(x) for x in k[n:])
        return f"unit({free}|{tors})" if tors else f"unit({free})"

    def format_relation(self, rel: Relation) -> str:
        return " & ".join(f"{self.format_operator(op)} :: {self.format_unit(k)}" for op, k in rel.parts)

    def parse_relation(self, text: str) -> Relation:
        parts = []
        for seg in text.split("&"):
            if "::" not in seg:
                raise ValidationError(f"missing '::' in relation segment {seg.strip()!r}")
            lhs, rhs = seg.rsplit("::", 1)
            parts.append((self.parse_operator(lhs), self.parse_unit(rhs)))
        return Relation(parts, text.strip())

    def parse_unit(self, text: str):
        m = re.fullmatch(r"\s*unit\(([^)]*)\)\s*", text)
        if not m:
            raise ValidationError(f"expected unit(...), got {text.strip()!r}")
        body = m.group(1)
        free, _, tors = body.partition("|")
        vals = [int(x) for x in free.split(",") if x.strip()] + [int(x) for x in tors.split(",") if x.strip()]
        n = self.fan.n
        if len(vals) == n and self.fan.N.torsion:
            vals += [0] * len(self.fan.N.torsion)
        if n == 0 and not free.strip() and not tors:
            vals = [0] * len(self.fan.N.torsion)
        return self.fan.N.normalize(vals)

    def parse_operator(self, text: str) -> Operator:
        return _OpParser(self, text).parse()


def format_q(q) -> str:
    if len(q) == 1:
        return "Q" if q[0] == 1 else f"Q^{q[0]}"
    return "*".join(f"Q{j + 1}" + ("" if e == 1 else f"^{e}") for j, e in enumerate(q) if e) or "1"


_TOKEN = re.compile(r"\s*(?:(\d+)|(zT\d+|zD\d+|chi\d+|y\d+|Q\d*|z)|(\^-?\d+)|([-+*/()]))")


class _OpParser:
    def __init__(self, mod: FanDModule, text: str):
        self.mod = mod
        self.text = text
        self.toks = []
        pos = 0
        text = text.rstrip()
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise ValidationError(f"unexpected character at column {pos + 1} in {text!r}")
            if m.group(1):
                self.toks.append(("num", int(m.group(1))))
            elif m.group(2):
                self.toks.append(("name", m.group(2)))
            elif m.group(3):
                self.toks.append(("pow", int(m.group(3)[1:])))
            else:
                self.toks.append(("op", m.group(4)))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self):
        t = self.peek()
        self.i += 1
        return t

    def parse(self) -> Operator:
        op = self.expr()
        if self.i != len(self.toks):
            raise ValidationError(f"trailing input in operator {self.text!r}")
        return op

    def expr(self):
        sign = 1
        if self.peek() == ("op", "-"):
            self.take()
            sign = -1
        elif self.peek() == ("op", "+"):
            self.take()
        out = self.term() * sign
        while self.peek() in (("op", "+"), ("op", "-")):
            s = self.take()[1]
            t = self.term()
            out = out + t if s == "+" else out - t
        return out

    def term(self):
        out = self.factor()
        while self.peek() in (("op", "*"), ("op", "/")):
            s = self.take()[1]
            if s == "*":
                out = out * self.factor()
            else:
                kind, val = self.take()
                if kind != "num":
                    raise ValidationError("only division by integers is supported")
                out = out * Fraction(1, val)
        return out

    def factor(self):
        kind, val = self.take()
        if kind == "num":
            base = Operator.scalar(val)
        elif kind == "op" and val == "(":
            base = self.expr()
            if self.take() != ("op", ")"):
                raise ValidationError(f"unbalanced parentheses in {self.text!r}")
        elif kind == "name":
            base = None
            if val.startswith("Q"):
                e = 1
                if self.peek()[0] == "pow":
                    e = self.take()[1]
                return Operator.gen("Q", self._qexp(val, e))
            base = self._gen(val)
        else:
            raise ValidationError(f"unexpected token {val!r} in {self.text!r}")
        if self.peek()[0] == "pow":
            e = self.take()[1]
            if e < 0:
                raise ValidationError("negative powers are only allowed on Q")
            base = base**e
        return base

    def _qexp(self, name, e):
        nq = self.mod.nq
        j = int(name[1:]) - 1 if len(name) > 1 else 0
        if nq == 0 or not 0 <= j < nq or (len(name) == 1 and nq != 1):
            raise ValidationError(f"{name} does not name a curve-lattice basis vector")
        return tuple(e if t == j else 0 for t in range(nq))

    def _gen(self, name):
        mod = self.mod
        if name == "z":
            return Operator.gen("z")
        m = re.fullmatch(r"(zT|zD|chi|y)(\d+)", name)
        if not m:
            raise ValidationError(f"unknown generator {name!r}")
        kind, idx = m.group(1), int(m.group(2)) - 1
        limit = {"zT": mod.m, "zD": len(mod.S), "y": len(mod.S), "chi": mod.fan.n}[kind]
        if not 0 <= idx < limit:
            raise ValidationError(f"{name} is out of range")
        return Operator.gen(kind, idx)
