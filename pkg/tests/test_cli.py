import csv
import io
import os
import subprocess
import sys

import pytest
import yaml

from conftest import make_contact, make_twisted_contact
from twisted_jacobi.cli import main
from twisted_jacobi.io import StructureFileError, dump_structure, load_structure_text

CONTACT = """\
coordinates: [x, y, z]
bivector: {"(0,1)": "1", "(1,2)": "-y"}
vector: ["0", "0", "1"]
omega: {}
"""

TWISTED = """\
coordinates: [x, y, z]
bivector: {"(0,1)": "1/(x + 1)", "(1,2)": "-y/(x + 1)"}
vector: ["0", "0", "1"]
omega: {"(0,1)": "x"}
constraints: ["x + 1"]
"""

BAD = """\
coordinates: [x, y, z]
bivector: {"(0,1)": "1"}
vector: ["0", "0", "1"]
omega: {}
"""

E_ONLY = """\
coordinates: [x, y, z]
bivector: {}
vector: ["0", "0", "1"]
omega: {}
"""

LCS2 = """\
coordinates: [x, y]
bivector: {"(0,1)": "1"}
vector: ["0", "1"]
omega: {}
"""

PRODUCT = """\
coordinates: [x, y, z, w]
bivector: {"(0,1)": "1", "(1,2)": "-y"}
vector: ["0", "0", "1", "0"]
omega: {}
"""

TRANSCENDENTAL = """\
coordinates: [x, y]
bivector: {"(0,1)": "exp(x)"}
vector: ["0", "0"]
omega: {}
"""

SAMPLED = """\
coordinates: [x, y, z]
bivector: {"(1,2)": "sin(y)"}
vector: ["1", "0", "0"]
omega: {}
"""


@pytest.fixture
def files(tmp_path):
    out = {}
    for name, text in [("contact", CONTACT), ("twisted", TWISTED), ("bad", BAD), ("e_only", E_ONLY),
                       ("lcs2", LCS2), ("product", PRODUCT), ("transcendental", TRANSCENDENTAL), ("sampled", SAMPLED)]:
        p = tmp_path / f"{name}.yaml"
        p.write_text(text)
        out[name] = str(p)
    return out


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def kv(text):
    return dict(line.split("=", 1) for line in text.strip().splitlines())


# -- structure files ---------------------------------------------------------------


def test_load_contact_file():
    s = load_structure_text(CONTACT)
    assert s.lam == make_contact().lam
    assert s.e_field == make_contact().e_field


def test_dump_load_round_trip():
    s = make_twisted_contact()
    back = load_structure_text(dump_structure(s))
    assert back.lam == s.lam and back.e_field == s.e_field and back.omega == s.omega
    assert back.chart == s.chart


@pytest.mark.parametrize(
    "text, message",
    [
        (CONTACT.replace('"(0,1)": "1"', '"(1,0)": "1"'), "indices not increasing"),
        (CONTACT.replace('"(0,1)"', '"(0,3)"'), "out of range"),
        (CONTACT.replace('"(0,1)"', '"(0)"'), "needs 2 indices"),
        (CONTACT.replace('"(0,1)"', '"0-1"'), "malformed index key"),
        (CONTACT.replace('["0", "0", "1"]', '["0", "1"]'), "expected 3 entries"),
        (CONTACT.replace('"-y"', '"-q"'), "unknown identifier"),
        (CONTACT.replace('"-y"', '"-y +"'), "offset"),
        (CONTACT + "extra: 1\n", "unknown keys"),
        (CONTACT.replace("omega: {}\n", ""), "missing keys"),
        ("coordinates: [x, x]\nbivector: {}\nvector: [0, 0]\nomega: {}\n", "duplicate"),
        ("- just a list\n", "key/value"),
        ("coordinates: [x\n", "not a valid structure file"),
    ],
)
def test_malformed_files(text, message):
    with pytest.raises(StructureFileError, match=message):
        load_structure_text(text)


# -- commands -----------------------------------------------------------------------


def test_verify(files):
    code, out, _ = run("verify", files["contact"])
    assert code == 0
    assert "R2: ExactZero" in out and "R3: ExactZero" in out


def test_verify_negative_control(files):
    code, out, _ = run("verify", files["bad"], "--format", "kv")
    assert code == 1
    d = kv(out)
    assert d["R2.status"] == "NonZero"
    assert d["R2.witness[0,1,2]"] == "NonZero (value 2 at (0, 0, 0))"
    assert d["exit_code"] == "1"


def test_verify_malformed(files, tmp_path):
    p = tmp_path / "m.yaml"
    p.write_text(CONTACT.replace('"(0,1)": "1"', '"(1,0)": "1"'))
    code, out, err = run("verify", p)
    assert code == 2 and out == ""
    assert "indices not increasing" in err


def test_verify_missing_file(tmp_path):
    code, _, err = run("verify", tmp_path / "nope.yaml")
    assert code == 2 and "cannot read" in err


def test_verify_transcendental(files):
    code, out, _ = run("verify", files["transcendental"])
    assert code == 0


def test_bracket(files):
    assert run("bracket", files["contact"], "-f", "x", "-g", "y")[1] == "1\n"
    assert run("bracket", files["contact"], "-f", "x", "-g", "x")[1] == "0\n"
    assert run("bracket", files["contact"], "-f", "x", "-g", "z")[1] == "x\n"
    code, _, err = run("bracket", files["contact"], "-f", "x +", "-g", "y")
    assert code == 2 and "offset" in err


def test_jacobiator(files):
    code, out, _ = run("jacobiator", files["twisted"], "-f", "x", "-g", "y", "-h", "z")
    assert code == 0
    assert "residual: ExactZero" in out
    code, out, _ = run("jacobiator", files["contact"], "-f", "x^2*y", "-g", "z - y", "-h", "x*z", "--format", "kv")
    d = kv(out)
    assert code == 0 and d["lhs"] == "0" and d["rhs"] == "0"


def test_jacobiator_gate_warning(files):
    code, out, _ = run("jacobiator", files["bad"], "-f", "x", "-g", "y", "-h", "z")
    assert "warning: structure residuals nonzero; identity not expected to hold" in out
    assert code == 1


def test_classify(files):
    code, out, _ = run("classify", files["twisted"], "--format", "kv")
    d = kv(out)
    assert code == 0 and d["parity"] == "Odd"
    assert d["theta"] == "-y*dx + dz" and d["Theta"] == "(x + 1)*dx^dy"
    code, out, _ = run("classify", files["twisted"])
    assert out.startswith("Odd; theta = -y*dx + dz; Theta = (x + 1)*dx^dy")
    code, out, _ = run("classify", files["lcs2"])
    assert code == 0 and out.startswith("Even; theta = dx;")
    code, out, _ = run("classify", files["product"])
    assert code == 1 and "not transitive: generic rank 3 of 4" in out


def test_rank(files):
    assert run("rank", files["contact"], "--point", "0,0,0")[1] == "rank 3\n"
    assert run("rank", files["e_only"], "--point", "0.5,-1,2")[1] == "rank 1\n"
    code, out, _ = run("rank", files["twisted"], "--point=-1,0,0")
    assert code == 1 and "x + 1" in out
    code, _, err = run("rank", files["contact"], "--point", "0,0")
    assert code == 2 and "expected 3 numbers" in err


def test_leaf_csv(files, tmp_path):
    out_csv = tmp_path / "leaf.csv"
    code, out, _ = run("leaf", files["product"], "--point", "0,0,0,5", "--steps", 1000, "--out", out_csv)
    assert code == 0
    rows = list(csv.reader(out_csv.open()))
    assert rows[0] == ["step", "flow_function_index", "x_0", "x_1", "x_2", "x_3", "rank"]
    assert len(rows) == 1001
    assert all(abs(float(r[5]) - 5) <= 1e-6 for r in rows[1:])
    assert {r[6] for r in rows[1:]} == {"3"}


def test_leaf_truncation_reported(files):
    code, out, _ = run("leaf", files["twisted"], "--point=-0.99,0.5,0", "--steps", 2000, "--format", "kv")
    d = kv(out)
    assert code == 0
    assert int(d["steps"]) < 2000
    assert "x + 1" in d["truncated"]


def test_make_contact(tmp_path):
    target = tmp_path / "c.yaml"
    code, _, _ = run("make-contact", "--coordinates", "x,y,z", "--theta", "[-y, 0, 1]",
                     "--omega", '{"(0,1)": x}', "--out", target)
    assert code == 0
    s = load_structure_text(target.read_text())
    assert s.lam == make_twisted_contact().lam
    assert run("verify", target)[0] == 0
    code, out, _ = run("make-contact", "--coordinates", "x,y,z", "--theta", "[0, 0, 1]")
    assert code == 1 and "vanishes identically" in out


def test_make_lcs():
    code, out, _ = run("make-lcs", "--coordinates", "x,y", "--big-theta", '{"(0,1)": 1}', "--theta", "[1, 0]")
    assert code == 0
    doc = yaml.safe_load(out)
    assert doc["bivector"] == {"(0,1)": "1"} and doc["vector"] == ["0", "1"]
    code, out, _ = run("make-lcs", "--coordinates", "x,y", "--big-theta", '{"(0,1)": 1}', "--theta", "[y, 0]")
    assert code == 1 and "not closed" in out
    code, _, err = run("make-lcs", "--coordinates", "x,y", "--big-theta", '{"(1,0)": 1}', "--theta", "[1, 0]")
    assert code == 2 and "indices not increasing" in err


def test_usage_errors(files):
    assert run("verify")[0] == 2
    assert run("frobnicate")[0] == 2
    assert run("bracket", files["contact"], "-f", "x")[0] == 2


def test_kv_is_deterministic(files):
    a = run("verify", files["bad"], "--format", "kv")[1]
    b = run("verify", files["bad"], "--format", "kv")[1]
    assert a == b and "timing" not in a
    t = run("verify", files["contact"], "--format", "kv", "--timings")[1]
    assert "timing.verify=" in t


def test_seed_environment(files, monkeypatch):
    # a transcendental residual is sampled, so the seed shows up in the witness
    base = run("verify", files["sampled"], "--format", "kv")
    assert base[0] == 1 and base == run("verify", files["sampled"], "--format", "kv")
    monkeypatch.setenv("TJM_SEED", "7")
    seeded = run("verify", files["sampled"], "--format", "kv")
    assert seeded[0] == 1 and seeded[1] != base[1]
    assert seeded == run("verify", files["sampled"], "--format", "kv", "--seed", "7")
    monkeypatch.setenv("TJM_SEED", "0")
    assert run("verify", files["sampled"], "--format", "kv") == base
    monkeypatch.setenv("TJM_SEED", "nope")
    code, _, err = run("verify", files["contact"])
    assert code == 2 and "TJM_SEED" in err


def test_exit_code_corpus(tmp_path):
    valid = [CONTACT, TWISTED, E_ONLY, LCS2, PRODUCT]
    corrupt = [
        CONTACT.replace('"(0,1)"', '"(2,1)"'),
        CONTACT.replace("coordinates: [x, y, z]", "coordinates: [x, y]"),
        CONTACT.replace('"-y"', '"sin(y"'),
        CONTACT.replace('"-y"', '"1/0"'),
        CONTACT.replace("bivector", "bivectors"),
        "",
    ]
    for i, text in enumerate(valid + [BAD] + corrupt):
        p = tmp_path / f"f{i}.yaml"
        p.write_text(text)
        code, out, err = run("verify", p, "--format", "kv")
        expected = 0 if i < len(valid) else 1 if i == len(valid) else 2
        assert code == expected, (text, out, err)
        if code != 2:
            assert kv(out)["exit_code"] == str(code)


def test_entry_point(files):
    env = dict(os.environ, TJM_SEED="3")
    proc = subprocess.run([sys.executable, "-m", "twisted_jacobi.cli", "bracket", files["contact"], "-f", "x", "-g", "z"],
                          capture_output=True, text=True, env=env)
    assert proc.returncode == 0 and proc.stdout == "x\n"
