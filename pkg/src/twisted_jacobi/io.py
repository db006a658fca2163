"""Structure files: YAML documents describing a structure on one chart.

Example::

    coordinates: [x, y, z]
    bivector: {"(0,1)": "1", "(1,2)": "-y"}
    vector: ["0", "0", "1"]
    omega: {}
    constraints: []

Index keys are 0-based and strictly increasing.  Expressions use the grammar
of :mod:`twisted_jacobi.expr`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import yaml

from .expr import Chart, ParseError, ScalarExpr, parse
from .jacobi import TwistedJacobiStructure
from .multivec import DiffForm, Multivector

REQUIRED_KEYS = ("coordinates", "bivector", "vector", "omega")
OPTIONAL_KEYS = ("constraints",)

_INDEX_KEY = re.compile(r"^\s*\(\s*(\d+)\s*(?:,\s*(\d+)\s*)*\)\s*$")


class StructureFileError(ValueError):
    """Malformed structure file (CLI exit code 2)."""


@dataclass(frozen=True)
class StructureFile:
    structure: TwistedJacobiStructure
    text: str


def _expr(value, chart: Chart, where: str) -> ScalarExpr:
    if isinstance(value, bool) or not isinstance(value, (str, int, float)):
        raise StructureFileError(f"{where}: expected an expression string, got {value!r}")
    text = str(value)
    try:
        return parse(text, chart)
    except ParseError as err:
        raise StructureFileError(f"{where}: {err} in {text!r}") from err
    except ZeroDivisionError as err:
        raise StructureFileError(f"{where}: division by zero in {text!r}") from err


def parse_index_key(key, degree: int, dim: int, where: str) -> tuple[int, ...]:
    text = str(key)
    if not _INDEX_KEY.match(text):
        raise StructureFileError(f"{where}: malformed index key {text!r}, expected like '(0,1)'")
    idx = tuple(int(t) for t in re.findall(r"\d+", text))
    if len(idx) != degree:
        raise StructureFileError(f"{where}: key {text!r} needs {degree} indices")
    if any(i >= dim for i in idx):
        raise StructureFileError(f"{where}: key {text!r} has an index out of range for dim {dim}")
    if any(a >= b for a, b in zip(idx, idx[1:])):
        raise StructureFileError(f"{where}: key {text!r} indices not increasing")
    return idx


def _tensor_map(raw, chart: Chart, degree: int, where: str) -> dict:
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise StructureFileError(f"{where}: expected a map of index keys to expressions")
    out = {}
    for key, value in raw.items():
        idx = parse_index_key(key, degree, chart.dim, where)
        if idx in out:
            raise StructureFileError(f"{where}: duplicate key {key!r}")
        out[idx] = _expr(value, chart, f"{where}[{key}]")
    return out


def _expr_list(raw, chart: Chart, where: str, length: int | None = None) -> list[ScalarExpr]:
    if raw is None:
        raw = []
    if not isinstance(raw, list):
        raise StructureFileError(f"{where}: expected a list of expressions")
    if length is not None and len(raw) != length:
        raise StructureFileError(f"{where}: expected {length} entries, got {len(raw)}")
    return [_expr(v, chart, f"{where}[{i}]") for i, v in enumerate(raw)]


def parse_chart(raw) -> Chart:
    if not isinstance(raw, list) or not raw or not all(isinstance(n, str) for n in raw):
        raise StructureFileError("coordinates: expected a nonempty list of identifiers")
    for n in raw:
        if not re.fullmatch(r"[A-Za-z][A-Za-z0-9_]*", n) or n in ("sin", "cos", "exp"):
            raise StructureFileError(f"coordinates: invalid identifier {n!r}")
    if len(set(raw)) != len(raw):
        raise StructureFileError("coordinates: duplicate identifier")
    return Chart(tuple(raw))


def load_structure_text(text: str) -> TwistedJacobiStructure:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as err:
        mark = getattr(err, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise StructureFileError(f"not a valid structure file{where}: {err}") from err
    if not isinstance(doc, dict):
        raise StructureFileError("structure file must be a key/value document")
    unknown = set(doc) - set(REQUIRED_KEYS) - set(OPTIONAL_KEYS)
    if unknown:
        raise StructureFileError(f"unknown keys: {sorted(unknown)}")
    missing = [k for k in REQUIRED_KEYS if k not in doc]
    if missing:
        raise StructureFileError(f"missing keys: {missing}")
    chart = parse_chart(doc["coordinates"])
    constraints = _expr_list(doc.get("constraints"), chart, "constraints")
    chart = Chart(chart.names, tuple(constraints))
    lam = Multivector(chart, 2, _tensor_map(doc["bivector"], chart, 2, "bivector"))
    e = Multivector.from_components(chart, _expr_list(doc["vector"], chart, "vector", chart.dim))
    omega = DiffForm(chart, 2, _tensor_map(doc["omega"], chart, 2, "omega"))
    return TwistedJacobiStructure(chart, lam, e, omega)


def load_structure(path) -> StructureFile:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as err:
        raise StructureFileError(f"cannot read {path}: {err}") from err
    return StructureFile(load_structure_text(text), text)


def _key(idx) -> str:
    return "(" + ",".join(str(i) for i in idx) + ")"


def dump_structure(s: TwistedJacobiStructure) -> str:
    doc = {
        "coordinates": list(s.chart.names),
        "bivector": {_key(k): str(v) for k, v in sorted(s.lam.coeffs.items())},
        "vector": [str(v) for v in s.e_field.components()],
        "omega": {_key(k): str(v) for k, v in sorted(s.omega.coeffs.items())},
    }
    if s.chart.domain_constraints:
        doc["constraints"] = [str(c) for c in s.chart.domain_constraints]
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=None, width=1000)


def parse_form_arg(raw: str, chart: Chart, degree: int, where: str) -> DiffForm:
    """Form given on the command line: a YAML list (degree 1) or a YAML map
    of index keys (any degree)."""
    try:
        value = yaml.safe_load(raw) if raw is not None else None
    except yaml.YAMLError as err:
        raise StructureFileError(f"{where}: not valid YAML: {err}") from err
    if value is None:
        return DiffForm.zero(chart, degree)
    if isinstance(value, list):
        if degree != 1:
            raise StructureFileError(f"{where}: a list is only accepted for 1-forms")
        return DiffForm.from_components(chart, _expr_list(value, chart, where, chart.dim))
    return DiffForm(chart, degree, _tensor_map(value, chart, degree, where))
