import json
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fanmirror.cli import COMMANDS, InputDocument, ParseError, main, parse_input, run, serialize
from fanmirror.errors import ValidationError
from fanmirror.iseries import Profile

FANS = sorted((Path(__file__).parent.parent / "fans").glob("*.fan"))

P1 = """\
# the projective line
name = P1
rank = 1
rays = 1; -1
cones = 1; 2
profile = qdeg=2, tord=0, yord=0
"""


def write(tmp_path, text, name="in.fan"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_parse_p1():
    doc = parse_input(P1)
    assert doc.name == "P1" and doc.rank == 1
    assert doc.rays == ((1,), (-1,))
    assert doc.cones == ((1,), (2,))
    assert doc.profile == Profile(2, 0, 0)
    assert doc.chi is None and doc.sigma0 == 1


def test_parse_torsion_and_zero_cone():
    doc = parse_input("rank = 0\ntorsion = 2\nrays =\ncones = -\nG = | 1\n")
    assert doc.group().torsion == (2,)
    assert doc.cones == ((),)
    assert doc.G == ((1,),)


def test_parse_error_position():
    with pytest.raises(ParseError) as e:
        parse_input("rank = 1\nrays = 1; x\ncones = 1\n")
    assert e.value.line == 2 and e.value.col == 8
    with pytest.raises(ParseError) as e:
        parse_input("rank = 1\nbogus = 3\n")
    assert e.value.line == 2
    with pytest.raises(ParseError):
        parse_input("rank = 1\nrank = 2\nrays = 1\ncones = 1\n")
    with pytest.raises(ParseError):
        parse_input("rank = 1\nrays = 1; -1\n")


def test_shape_errors():
    with pytest.raises(ValidationError, match="coordinates"):
        parse_input("rank = 2\nrays = 1; -1\ncones = 1; 2\n")
    with pytest.raises(ValidationError, match="refers to ray 3"):
        parse_input("rank = 1\nrays = 1; -1\ncones = 1; 3\n")


def test_bad_profile():
    with pytest.raises(ParseError):
        parse_input(P1.replace("qdeg=2", "qdeg=-1"))
    with pytest.raises(ParseError):
        parse_input(P1.replace("qdeg=2", "deg=2"))


def test_run_report_shape():
    rep = run("validate", parse_input(P1))
    assert set(rep) == {"command", "input_digest", "results", "checks", "text", "ok"}
    assert rep["ok"]
    # comments and spacing do not change the digest
    other = run("validate", parse_input(P1.replace("# the projective line\n", "").replace(" = ", "=")))
    assert rep["input_digest"] == other["input_digest"]


def test_unknown_command():
    with pytest.raises(ValidationError):
        run("frobnicate", parse_input(P1))


# exit codes --------------------------------------------------------------------------


def test_exit_ok(tmp_path, capsys):
    assert main(["validate", write(tmp_path, P1)]) == 0
    assert "error" not in capsys.readouterr().err


def test_exit_missing_file(tmp_path):
    assert main(["validate", str(tmp_path / "nope.fan")]) == 2


def test_exit_parse_error(tmp_path, capsys):
    assert main(["validate", write(tmp_path, "rank = 1\nrays = 1; x\n")]) == 2
    assert "line 2" in capsys.readouterr().err


def test_exit_invalid_fan(tmp_path, capsys):
    bad = "rank = 2\nrays = 1, 0; 2, 0\ncones = 1, 2\n"
    assert main(["validate", write(tmp_path, bad)]) == 2
    assert "simplicial" in capsys.readouterr().err


def test_exit_profile_error(tmp_path):
    # chi = 0 makes a fixed-point weight vanish
    assert main(["iseries", write(tmp_path, P1), "--chi", "0"]) == 3


def test_exit_invariant_error(tmp_path, capsys):
    p12 = "rank = 1\nrays = 2; -1\ncones = 1; 2\nprofile = qdeg=1, tord=0, yord=0\n"
    assert main(["qring", write(tmp_path, p12)]) == 4
    assert "twisted sectors" in capsys.readouterr().err


def test_overrides(tmp_path, capsys):
    path = write(tmp_path, P1)
    out = tmp_path / "r.json"
    assert main(["iseries", path, "--profile", "qdeg=1,tord=0,yord=0", "--chi", "3/7", "--json", str(out)]) == 0
    data = json.loads(out.read_text())
    assert all(sum(Fraction(x) for x in t["q"]) <= 1 for t in data["results"]["I"])


def test_json_deterministic(tmp_path):
    path = write(tmp_path, P1)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["mirror", path, "--json", str(a)]) == 0
    assert main(["mirror", path, "--json", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    data = json.loads(a.read_text())
    assert "text" not in data and data["command"] == "mirror" and data["ok"]


@pytest.mark.parametrize("path", FANS, ids=lambda p: p.stem)
@pytest.mark.parametrize("command", sorted(COMMANDS))
def test_examples(path, command, tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main([command, str(path), "--json", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["ok"]
    assert all(c["ok"] for c in data["checks"])
    if command == "checks":
        assert data["checks"]


# round trip ----------------------------------------------------------------------------

small = st.integers(-3, 3)


@st.composite
def documents(draw):
    rank = draw(st.integers(0, 2))
    torsion = tuple(draw(st.lists(st.integers(2, 4), max_size=1)))
    width = rank + len(torsion)
    elem = st.lists(small, min_size=width, max_size=width).map(tuple)
    rays = tuple(draw(st.lists(elem, min_size=1, max_size=3))) if width else ()
    nrays = len(rays)
    cone = st.lists(st.integers(1, nrays), max_size=rank, unique=True).map(tuple) if nrays else st.just(())
    cones = tuple(draw(st.lists(cone, min_size=1, max_size=3)))
    # a width-0 element has no text form
    G = tuple(draw(st.lists(elem, max_size=2 if width else 0)))
    ample = draw(st.none() | st.lists(st.fractions(-3, 3, max_denominator=3), min_size=nrays, max_size=nrays)
                 .map(tuple))
    profile = Profile(draw(st.fractions(0, 3, max_denominator=2)), draw(st.integers(0, 2)), draw(st.integers(0, 2)))
    chi = draw(st.none() | st.lists(st.fractions(-5, 5, max_denominator=5), min_size=rank, max_size=rank).map(tuple))
    name = draw(st.text(alphabet="abcXYZ()12,", max_size=8))
    return InputDocument(name, rank, torsion, rays, cones, G, ample, profile, chi, draw(st.integers(1, 3)))


@given(documents())
@settings(max_examples=100, deadline=None)
def test_serialize_round_trip(doc):
    text = serialize(doc)
    back = parse_input(text)
    assert back == doc
    assert serialize(back) == text
