"""Equivariant Chen-Ruan cohomology in the fixed-point model.

A class is a ``Vec`` of scalars indexed by the fixed-point keys (sigma, v)
with sigma a maximal cone and v in Box(sigma): its restriction to the fixed
point of sigma on the sector of v.
"""

from __future__ import annotations

from math import floor

from .exactalg import ScalarField, Vec
from .stackyfan import StackyFan


class FixedPointIndex:
    """Fixed-point keys with their weights u_i(sigma), local group orders and involution."""

    def __init__(self, fan: StackyFan, field: ScalarField):
        if field.n != fan.n:
            raise ValueError("scalar field and fan have different ranks")
        self.fan = fan
        self.field = field
        self.keys = list(fan.fixed_point_keys)
        self.pos = {k: i for i, k in enumerate(self.keys)}
        self.size = len(self.keys)
        self.weights = {}
        self.order = {}
        for fp in fan.fixed_points:
            self.weights[fp.cone] = {i: field.linear_form(c) for i, c in fp.weights.items()}
            self.order[fp.cone] = fp.order
        self.min_cone = {k: fan.box_element(k[1]).cone for k in self.keys}
        self.inv = {k: (k[0], fan.inv_box(k[0], k[1])) for k in self.keys}

    def u(self, sigma, i):
        """Restriction of the i-th toric divisor class to the fixed point of sigma."""
        return self.weights[sigma].get(i, self.field.zero)

    def zero(self) -> Vec:
        return Vec([self.field.zero] * self.size)

    def constant(self, c) -> Vec:
        """The class c * 1 (c on untwisted keys, 0 on twisted ones)."""
        c = self.field.coerce(c)
        return Vec([c if not any(v) else self.field.zero for _, v in self.keys])

    def unit(self) -> Vec:
        return self.constant(1)

    def from_map(self, values: dict) -> Vec:
        return Vec([self.field.coerce(values.get(k, 0)) for k in self.keys])

    def as_map(self, cls: Vec) -> dict:
        return {k: c for k, c in zip(self.keys, cls) if c}


def phi_class(idx: FixedPointIndex, k) -> Vec:
    """phi_k = prod_i u_i^floor(Psi_i(k)) * 1_v with v = k - sum floor(Psi_i(k)) b_i."""
    fan = idx.fan
    psi, _ = fan.psi(k)
    fl = {i: floor(p) for i, p in enumerate(psi) if floor(p)}
    v = fan.combine(k, {i: -f for i, f in fl.items()})
    out = []
    for sigma, w in idx.keys:
        if w != v or any(i not in sigma for i in fl):
            out.append(idx.field.zero)
            continue
        val = idx.field.one
        for i, f in fl.items():
            val = val * idx.u(sigma, i) ** f
        out.append(val)
    return Vec(out)


def share_cone(fan: StackyFan, k, l) -> bool:
    return (fan.psi(k)[1] | fan.psi(l)[1]) in fan.cones


def cr_product(fan: StackyFan, k, l):
    """phi_k * phi_l as (coefficient, label): (1, k + l) on a common cone, else (0, None)."""
    if share_cone(fan, k, l):
        return 1, fan.add(k, l)
    return 0, None


def pointwise_product(a: Vec, b: Vec) -> Vec:
    """Product of restrictions; agrees with the Chen-Ruan product on untwisted classes only."""
    return Vec([x * y for x, y in zip(a, b)])


def chi_as_divisors(idx: FixedPointIndex, a: int) -> Vec:
    """sum_i (chi_a . b_i) phi_{b_i}; equals the constant class chi_a."""
    fan = idx.fan
    out = idx.zero()
    for i, b in enumerate(fan.rays_bar):
        if b[a]:
            out = out + phi_class(idx, fan.rays[i]) * b[a]
    return out


def ab_pairing(idx: FixedPointIndex, alpha: Vec, beta: Vec):
    """sum over keys of alpha|(s,v) * beta|(s,inv v) / (|N(s)| * prod_{j in s minus s(v)} u_j(s))."""
    total = idx.field.zero
    for key, a in zip(idx.keys, alpha):
        if not a:
            continue
        b = beta[idx.pos[idx.inv[key]]]
        if not b:
            continue
        total = total + a * b / local_euler(idx, key)
    return total


def local_euler(idx: FixedPointIndex, key):
    """|N(sigma)| times the product of u_j(sigma) over j in sigma outside the minimal cone of v."""
    sigma, _ = key
    den = idx.field.const(idx.order[sigma])
    for j in sorted(sigma - idx.min_cone[key]):
        den = den * idx.u(sigma, j)
    return den
