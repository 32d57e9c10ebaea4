"""Command-line front end: ``fanmirror COMMAND FILE [options]``.

Input documents are plain text, one ``key = value`` per line, ``#`` starts a
comment.  Keys::

    name    = P(1,2)
    rank    = 1                 free rank of N
    torsion = 2, 4              invariant factors of the torsion part (optional)
    rays    = 2; -1             rays separated by ';', torsion residues after '|'
    cones   = 1; 2              maximal cones, 1-based ray indices, '-' for the zero cone
    G       = 1                 extension set, same syntax as rays (optional)
    ample   = 1, 0              ample class as a vector over the rays (optional)
    profile = qdeg=2, tord=0, yord=4
    chi     = symbolic          or a generic rational point a/b, c/d
    sigma0  = 1                 maximal cone used for the splitting (1-based)
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass, field, replace
from fractions import Fraction

from .errors import FanMirrorError, ProfileError, ValidationError
from .exactalg import Mat, Vec
from .fandmod import FanDModule, format_q
from .iseries import MirrorSetup, Profile, ifunction, verify_loc_ode
from .lattice import FgAbGroup
from .mirrorflow import MirrorFlow, delta_cancellation, directions
from .stackyfan import StackyFan, validate

KEYS = ("name", "rank", "torsion", "rays", "cones", "G", "ample", "profile", "chi", "sigma0")


@dataclass
class InputDocument:
    name: str = ""
    rank: int = 0
    torsion: tuple = ()
    rays: tuple = ()
    cones: tuple = ()
    G: tuple = ()
    ample: tuple | None = None
    profile: Profile = field(default_factory=Profile)
    chi: tuple | None = None
    sigma0: int = 1

    def group(self) -> FgAbGroup:
        return FgAbGroup(self.rank, tuple(self.torsion))

    def fan(self) -> StackyFan:
        return StackyFan(self.group(), list(self.rays), [[i - 1 for i in c] for c in self.cones], self.name)

    def setup(self) -> MirrorSetup:
        fan = self.fan()
        diags = validate(fan)
        if diags:
            raise ValidationError("invalid stacky fan: " + "; ".join(map(str, diags)), diags)
        return MirrorSetup(fan, list(self.G), self.profile, self.chi, self.ample, self.sigma0 - 1)


class ParseError(ValidationError):
    def __init__(self, line, col, message):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col


def _ints(text, line, col):
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            out.append(int(part))
        except ValueError:
            raise ParseError(line, col, f"expected an integer, got {part!r}") from None
    return out


def _rats(text, line, col):
    if not text.strip():
        return ()
    out = []
    for part in text.split(","):
        part = part.strip()
        try:
            out.append(Fraction(part))
        except (ValueError, ZeroDivisionError):
            raise ParseError(line, col, f"expected a rational number, got {part!r}") from None
    return tuple(out)


def _elements(text, line, col):
    out = []
    for item in text.split(";"):
        item = item.strip()
        if not item:
            continue
        free, _, tors = item.partition("|")
        out.append(tuple(_ints(free, line, col) + _ints(tors, line, col)))
    return tuple(out)


def parse_input(text: str) -> InputDocument:
    doc = InputDocument()
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        if "=" not in line:
            raise ParseError(lineno, 1, "expected 'key = value'")
        key, _, value = line.partition("=")
        col = len(key) + 2 + len(value) - len(value.lstrip())
        key = key.strip()
        value = value.strip()
        if key not in KEYS:
            raise ParseError(lineno, 1, f"unknown key {key!r}")
        if key in seen:
            raise ParseError(lineno, 1, f"duplicate key {key!r}")
        seen.add(key)
        if key == "name":
            doc.name = value
        elif key == "rank":
            (doc.rank,) = _ints(value, lineno, col) or [0]
        elif key == "torsion":
            doc.torsion = tuple(_ints(value, lineno, col))
        elif key == "rays":
            doc.rays = _elements(value, lineno, col)
        elif key == "G":
            doc.G = _elements(value, lineno, col)
        elif key == "cones":
            cones = []
            for item in value.split(";"):
                item = item.strip()
                cones.append(() if item == "-" else tuple(_ints(item, lineno, col)))
            doc.cones = tuple(cones)
        elif key == "ample":
            doc.ample = _rats(value, lineno, col)
        elif key == "profile":
            doc.profile = _parse_profile(value, lineno, col)
        elif key == "chi":
            doc.chi = None if value == "symbolic" else _rats(value, lineno, col)
        elif key == "sigma0":
            (doc.sigma0,) = _ints(value, lineno, col)
    for req in ("rays", "cones"):
        if req not in seen:
            raise ParseError(0, 0, f"missing key {req!r}")
    _check_shapes(doc)
    return doc


def _parse_profile(value, lineno=0, col=0) -> Profile:
    vals = {}
    for part in value.split(","):
        part = part.strip()
        if not part:
            continue
        k, eq, v = part.partition("=")
        k = k.strip()
        if not eq or k not in ("qdeg", "tord", "yord"):
            raise ParseError(lineno, col, f"bad profile entry {part!r}")
        try:
            vals[k] = Fraction(v.strip()) if k == "qdeg" else int(v)
        except ValueError:
            raise ParseError(lineno, col, f"bad profile value {part!r}") from None
    try:
        return Profile(**vals)
    except ProfileError as e:
        raise ParseError(lineno, col, str(e)) from None


def _check_shapes(doc: InputDocument):
    try:
        N = doc.group()
    except ValueError as e:
        raise ValidationError(str(e)) from None
    for what, items in (("ray", doc.rays), ("G element", doc.G)):
        for i, b in enumerate(items, 1):
            if len(b) != N.ngens:
                raise ValidationError(f"{what} {i} has {len(b)} coordinates, expected {N.ngens}")
    for c in doc.cones:
        for i in c:
            if not 1 <= i <= len(doc.rays):
                raise ValidationError(f"cone {list(c)} refers to ray {i}, but there are {len(doc.rays)} rays")


def _fmt_elements(items, rank):
    parts = []
    for b in items:
        free = ", ".join(str(x) for x in b[:rank])
        tors = b[rank:]
        parts.append(free + (" | " + ", ".join(str(x) for x in tors) if tors else ""))
    return "; ".join(parts)


def serialize(doc: InputDocument) -> str:
    """Canonical text form; parse(serialize(d)) == d."""
    lines = []
    if doc.name:
        lines.append(f"name = {doc.name}")
    lines.append(f"rank = {doc.rank}")
    if doc.torsion:
        lines.append("torsion = " + ", ".join(map(str, doc.torsion)))
    lines.append("rays = " + _fmt_elements(doc.rays, doc.rank))
    lines.append("cones = " + "; ".join(", ".join(map(str, c)) if c else "-" for c in doc.cones))
    if doc.G:
        lines.append("G = " + _fmt_elements(doc.G, doc.rank))
    if doc.ample is not None:
        lines.append("ample = " + ", ".join(map(str, doc.ample)))
    p = doc.profile
    lines.append(f"profile = qdeg={p.qdeg}, tord={p.tord}, yord={p.yord}")
    lines.append("chi = " + ("symbolic" if doc.chi is None else ", ".join(map(str, doc.chi))))
    lines.append(f"sigma0 = {doc.sigma0}")
    return "\n".join(lines) + "\n"


# output helpers -----------------------------------------------------------


def rat(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def scalar(x) -> str:
    return str(x)


def jsonable(x):
    if isinstance(x, Fraction):
        return rat(x)
    if isinstance(x, Mat):
        return [[scalar(a) for a in r] for r in x.rows]
    if isinstance(x, Vec):
        return [scalar(a) for a in x]
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, (str, int, bool)) or x is None:
        return x
    return str(x)


def series_json(setup: MirrorSetup, s) -> list:
    out = []
    for key, c in s.items():
        out.append({
            "q": list(key.q),
            "q_L": [rat(x) for x in setup.ref.to_q(key.q)],
            "t": list(key.t),
            "y": list(key.y),
            "value": jsonable(c),
        })
    return out


def _series_text(setup, s, label="") -> list:
    lines = []
    for key, c in s.items():
        mono = []
        if any(key.q):
            mono.append(format_q(key.q))
        mono += [f"t{i + 1}^{a}" for i, a in enumerate(key.t) if a]
        mono += [f"y{j + 1}^{a}" for j, a in enumerate(key.y) if a]
        lines.append(f"  {label}[{'*'.join(mono) or '1'}] = {jsonable(c)}")
    return lines


def _check_json(rep) -> dict:
    return {"name": rep.name, "ok": rep.ok, "checked": rep.checked, "failures": [str(f) for f in rep.failures]}


# commands ---------------------------------------------------------------------


def cmd_validate(doc: InputDocument):
    fan = doc.fan()
    diags = validate(fan)
    if diags:
        raise ValidationError("invalid stacky fan: " + "; ".join(map(str, diags)), diags)
    res = {
        "valid": True,
        "m": fan.m,
        "n": fan.n,
        "torsion": list(fan.N.torsion),
        "maximal_cones": [sorted(i + 1 for i in c) for c in fan.maximal],
        "compact": not fan.boundary_walls,
    }
    text = [f"valid stacky fan {fan.name or ''}: m={fan.m}, n={fan.n}, {len(fan.maximal)} maximal cones"]
    return res, text, []


def cmd_inertia(doc: InputDocument):
    setup = doc.setup()
    fan = setup.fan
    rows = []
    for b in fan.box:
        rows.append({"v": list(b.v), "cone": sorted(i + 1 for i in b.cone), "age": rat(b.age),
                     "psi": [rat(x) for x in b.psi]})
    fps = []
    for fp in fan.fixed_points:
        fps.append({"cone": sorted(i + 1 for i in fp.cone), "order": fp.order,
                    "weights": {str(i + 1): [rat(x) for x in w] for i, w in sorted(fp.weights.items())}})
    text = ["Box elements:"] + [f"  v={r['v']} cone={r['cone']} age={r['age']}" for r in rows]
    text.append(f"fixed points: {len(fps)}, rank of H_CR = {fan.euler_number}")
    return {"box": rows, "fixed_points": fps, "rank": fan.euler_number}, text, []


def cmd_sequences(doc: InputDocument):
    setup = doc.setup()
    ref, mori = setup.ref, setup.mori
    group, lifts = ref.pic_st
    res = {
        "L_basis": [list(r) for r in ref.L_basis],
        "divisor_map": ref.D,
        "Lambda_basis": [[rat(x) for x in b] for b in ref.lambda_basis],
        "O_lattice_basis": [[rat(x) for x in b] for b in ref.o_lattice],
        "O_torsion": list(ref.o_group.torsion),
        "O_generators": [{"lambda": [rat(x) for x in lam], "k": list(k)} for lam, k in ref.o_generators],
        "Lvee": {"rank": ref.Lvee.group.rank, "torsion": list(ref.Lvee.group.torsion)},
        "Pic_st": {"rank": group.rank, "torsion": list(group.torsion), "lifts": [list(x) for x in lifts]},
        "wall_classes": [[rat(x) for x in w] for w in mori.wall_classes],
        "ample": [rat(x) for x in mori.omega],
        "sigma0": sorted(i + 1 for i in ref.sigma0),
    }
    text = [
        f"Lambda basis: {res['Lambda_basis']}",
        f"O lattice basis: {res['O_lattice_basis']} torsion {res['O_torsion']}",
        f"Pic^st: rank {group.rank}, torsion {list(group.torsion)}",
        f"wall classes: {res['wall_classes']}",
        f"ample class: {res['ample']}",
    ]
    return res, text, []


def cmd_gkz(doc: InputDocument, max_degree=3, max_order=3):
    setup = doc.setup()
    out = []
    text = []
    ok = True
    for reduced in (False, True):
        mod = FanDModule(setup.ref, setup.G, reduced=reduced)
        rels = mod.gkz_relations(setup.mori, max_degree, max_order)
        for rel in rels:
            good = mod.verify_relation(rel)
            ok &= good
            s = mod.format_relation(rel)
            out.append({"module": "reduced" if reduced else "unreduced", "label": rel.label, "relation": s,
                        "verified": good})
        text.append(f"{'reduced' if reduced else 'unreduced'}: {len(rels)} relations, all verified: "
                    f"{all(r['verified'] for r in out if r['module'] == ('reduced' if reduced else 'unreduced'))}")
    checks = [{"name": "gkz relations", "ok": ok, "checked": len(out), "failures": [
        r["relation"] for r in out if not r["verified"]][:5]}]
    return {"relations": out}, text, checks


def cmd_iseries(doc: InputDocument):
    setup = doc.setup()
    I = ifunction(setup)
    keys = [{"cone": sorted(i + 1 for i in s), "sector": list(v)} for s, v in setup.idx.keys]
    text = [f"fixed-point keys: {keys}"] + _series_text(setup, I, "I")
    return {"fixed_point_keys": keys, "I": series_json(setup, I)}, text, []


def cmd_mirror(doc: InputDocument):
    setup = doc.setup()
    mf = MirrorFlow(setup)
    basis = [list(k) for k in mf.basis]
    conns = {d.label(setup): series_json(setup, mf.connection_in_T_basis(d)) for d in mf.connections}
    gm = {d.label(setup): series_json(setup, mf.gm_matrix(d)) for d in directions(setup)}
    res = {
        "basis": basis,
        "T_basis": jsonable(mf.T),
        "tau": series_json(setup, mf.tau_coordinates),
        "tau_restrictions": series_json(setup, mf.tau),
        "gauss_manin": gm,
        "quantum_connection": conns,
    }
    text = [f"basis k_j: {basis}", "mirror map (T-basis coordinates):"] + _series_text(setup, mf.tau_coordinates, "tau")
    checks = [_check_json(mf.factorization_check()), _check_json(mf.z_independence_check())]
    return res, text, checks


def cmd_qring(doc: InputDocument):
    setup = doc.setup()
    mf = MirrorFlow(setup)
    products = []
    text = []
    for i, k in enumerate(mf.basis):
        for l in mf.basis[i:]:
            s = mf.quantum_product(k, l)
            products.append({"k": list(k), "l": list(l), "product_T": series_json(setup, s)})
            text.append(f"P{list(k)} * P{list(l)} in T-basis:")
            text += _series_text(setup, s, "c")
    checks = [_check_json(mf.product_transport_check(mf.basis)), _check_json(mf.product_laws_check())]
    return {"basis": [list(k) for k in mf.basis], "products": products}, text, checks


def cmd_pairing(doc: InputDocument):
    setup = doc.setup()
    mf = MirrorFlow(setup)
    P = mf.pairing_matrix
    text = ["higher residue pairing P(Omega_i, Omega_j):"] + _series_text(setup, P, "P")
    return {"basis": [list(k) for k in mf.basis], "pairing": series_json(setup, P)}, text, [
        _check_json(mf.pairing_check())]


def cmd_checks(doc: InputDocument):
    setup = doc.setup()
    mf = MirrorFlow(setup)
    reps = []
    ode = verify_loc_ode(setup)
    reps.append({"name": "loc ode", "ok": ode.ok, "checked": ode.checked, "failures": [str(f) for f in ode.failures]})
    for mod in (setup.module, FanDModule(setup.ref, setup.G, reduced=True)):
        ok, witness = mod.flatness_check()
        name = "reduced d-module flatness" if mod.reduced else "d-module flatness"
        reps.append({"name": name, "ok": ok, "checked": 1, "failures": [] if ok else [str(witness)]})
    for f in (mf.factorization_check, mf.z_independence_check, mf.connection_routes_check,
              mf.classical_limit_check, mf.flatness_check, mf.product_laws_check, mf.tau_derivative_check,
              mf.euler_grading_check, mf.galois_check, mf.pairing_check):
        reps.append(_check_json(f()))
    reps.append(_check_json(mf.product_transport_check(mf.basis)))
    # Bernoulli reflection for every fixed-point key
    F = setup.field
    bad = []
    for key in setup.idx.keys:
        _, series = delta_cancellation(setup, key, 6)
        if series[0] != F.one or any(series[1:]):
            bad.append(str(key))
    reps.append({"name": "bernoulli cancellation", "ok": not bad, "checked": len(setup.idx.keys), "failures": bad[:5]})
    return {}, [], reps


COMMANDS = {
    "validate": cmd_validate,
    "inertia": cmd_inertia,
    "sequences": cmd_sequences,
    "gkz": cmd_gkz,
    "iseries": cmd_iseries,
    "mirror": cmd_mirror,
    "qring": cmd_qring,
    "pairing": cmd_pairing,
    "checks": cmd_checks,
}


def run(command: str, doc: InputDocument) -> dict:
    """Run a command and return the report document."""
    if command not in COMMANDS:
        raise ValidationError(f"unknown command {command!r}")
    results, text, checks = COMMANDS[command](doc)
    digest = hashlib.sha256(serialize(doc).encode()).hexdigest()
    return {
        "command": command,
        "input_digest": digest,
        "results": jsonable(results),
        "checks": checks,
        "text": text,
        "ok": all(c["ok"] for c in checks),
    }


def _apply_overrides(doc: InputDocument, args) -> InputDocument:
    if args.profile:
        doc = replace(doc, profile=_parse_profile(args.profile))
    if args.chi:
        doc = replace(doc, chi=None if args.chi == "symbolic" else _rats(args.chi, 0, 0))
    if args.sigma0 is not None:
        doc = replace(doc, sigma0=args.sigma0)
    return doc


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="fanmirror", description="Mirror symmetry computations for toric stacks.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("input", help="fan document (key = value format)")
    ap.add_argument("--json", metavar="PATH", help="write the machine-readable report here")
    ap.add_argument("--profile", help="qdeg=K,tord=K,yord=K")
    ap.add_argument("--chi", help="'symbolic' or a rational point a1/b1,...")
    ap.add_argument("--sigma0", type=int, help="maximal cone index for the splitting (1-based)")
    args = ap.parse_args(argv)
    try:
        with open(args.input, encoding="utf-8") as fh:
            doc = parse_input(fh.read())
        doc = _apply_overrides(doc, args)
        report = run(args.command, doc)
    except FanMirrorError as e:
        print(f"error: {e}", file=sys.stderr)
        for d in getattr(e, "diagnostics", []):
            print(f"  {d}", file=sys.stderr)
        if getattr(e, "witness", None) is not None:
            print(f"  witness: {e.witness}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    print("\n".join(report["text"]))
    for c in report["checks"]:
        print(f"check {c['name']}: {'pass' if c['ok'] else 'FAIL'} ({c['checked']} checked)")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump({k: v for k, v in report.items() if k != "text"}, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0 if report["ok"] else 4


if __name__ == "__main__":
    sys.exit(main())
