"""Command-line front end (``tjm``).

Exit codes: 0 when every checked identity is ExactZero or ProbablyZero, 1 when
an identity or a precondition (transitivity, domain) fails, 2 for malformed
input.  ``--format kv`` prints line-oriented ``key=value`` output that is
byte-identical across runs for a fixed seed; timings appear only with
``--timings``.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys
import time
from dataclasses import dataclass, field

from .expr import Chart, DomainError, EvaluationError, ParseError, ScalarExpr, parse
from .foliation import (
    ClassificationError,
    LeafControls,
    NotTransitiveError,
    classify_transitive,
    rank_at,
    trace_leaf,
    write_leaf_csv,
)
from .io import StructureFileError, dump_structure, load_structure, parse_chart, parse_form_arg
from .jacobi import jacobiator_check, bracket_fun, verify_structure
from .structures import StructureError, TwistedContactData, TwistedLcsData, from_twisted_contact, from_twisted_lcs

EXIT_OK, EXIT_FAIL, EXIT_MALFORMED = 0, 1, 2


def default_seed() -> int:
    raw = os.environ.get("TJM_SEED")
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise StructureFileError(f"TJM_SEED must be an integer, got {raw!r}") from None


@dataclass
class Report:
    command: str
    items: list = field(default_factory=list)
    lines: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    exit_code: int = EXIT_OK

    def put(self, key: str, value) -> None:
        self.items.append((key, str(value).replace("\n", " ")))

    def say(self, line: str) -> None:
        self.lines.append(line)

    def render(self, fmt: str, show_timings: bool = False) -> str:
        if fmt == "kv":
            out = [f"command={self.command}"] + [f"{k}={v}" for k, v in self.items]
            if show_timings:
                out += [f"timing.{k}={v:.6f}" for k, v in self.timings.items()]
            out.append(f"exit_code={self.exit_code}")
        else:
            out = list(self.lines)
            if show_timings:
                out += [f"[{k}: {v:.3f} s]" for k, v in self.timings.items()]
        return "\n".join(out) + "\n"


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _load(report: Report, path: str):
    sf = load_structure(path)
    report.put("input_sha256", _digest(sf.text))
    return sf.structure


def _expr_arg(text: str, chart: Chart, flag: str) -> ScalarExpr:
    try:
        return parse(text, chart)
    except ParseError as err:
        raise StructureFileError(f"{flag}: {err} in {text!r}") from err
    except ZeroDivisionError as err:
        raise StructureFileError(f"{flag}: division by zero in {text!r}") from err


def _point_arg(text: str, chart: Chart) -> tuple:
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise StructureFileError(f"--point: expected comma-separated numbers, got {text!r}") from None
    if len(values) != chart.dim:
        raise StructureFileError(f"--point: expected {chart.dim} numbers, got {len(values)}")
    return tuple(values)


def _report_checks(report: Report, checks) -> None:
    for c in checks:
        report.put(f"{c.name}.status", c.status)
        report.say(f"{c.name}: {c.status}")
        for idx, st in c.failures().items():
            key = ",".join(map(str, idx))
            report.put(f"{c.name}.witness[{key}]", st)
            report.say(f"  component ({key}): {st}")
        if not c.passed and c.note:
            report.put(f"{c.name}.note", c.note)
            report.say(f"  note: {c.note}")


def cmd_verify(args, report: Report) -> None:
    s = _load(report, args.file)
    t0 = time.perf_counter()
    rep = verify_structure(s, seed=args.seed)
    report.timings["verify"] = time.perf_counter() - t0
    _report_checks(report, rep.checks)
    report.exit_code = EXIT_OK if rep.passed else EXIT_FAIL


def cmd_bracket(args, report: Report) -> None:
    s = _load(report, args.file)
    f = _expr_arg(args.f, s.chart, "-f")
    g = _expr_arg(args.g, s.chart, "-g")
    value = bracket_fun(s, f, g)
    report.put("bracket", value)
    report.say(str(value))


def cmd_jacobiator(args, report: Report) -> None:
    s = _load(report, args.file)
    f, g, h = (_expr_arg(v, s.chart, flag) for v, flag in ((args.f, "-f"), (args.g, "-g"), (args.h, "-h")))
    gate = verify_structure(s, seed=args.seed)
    if not gate.passed:
        msg = "structure residuals nonzero; identity not expected to hold"
        report.put("warning", msg)
        report.say(f"warning: {msg}")
    res = jacobiator_check(s, f, g, h, seed=args.seed)
    report.put("lhs", res.lhs)
    report.put("rhs", res.rhs)
    report.put("residual.status", res.status)
    report.say(f"lhs = {res.lhs}")
    report.say(f"rhs = {res.rhs}")
    report.say(f"residual: {res.status}")
    report.exit_code = EXIT_OK if res.status.vanishes else EXIT_FAIL


def cmd_classify(args, report: Report) -> None:
    s = _load(report, args.file)
    try:
        cl = classify_transitive(s, seed=args.seed)
    except NotTransitiveError as err:
        report.put("error", err)
        report.say(str(err))
        report.exit_code = EXIT_FAIL
        return
    except ClassificationError as err:
        report.put("error", err)
        report.say(f"classification failed: {err}")
        report.exit_code = EXIT_FAIL
        return
    report.put("parity", cl.parity)
    report.put("theta", cl.theta)
    report.put("Theta", cl.big_theta)
    report.say(f"{cl.parity}; theta = {cl.theta}; Theta = {cl.big_theta}")
    _report_checks(report, cl.residuals.checks)
    report.exit_code = EXIT_OK if cl.passed else EXIT_FAIL


def _domain_failure(report: Report, err: Exception) -> None:
    report.put("error", err)
    report.say(f"domain violation: {err}")
    report.exit_code = EXIT_FAIL


def cmd_rank(args, report: Report) -> None:
    s = _load(report, args.file)
    p = _point_arg(args.point, s.chart)
    try:
        r = rank_at(s, p)
    except (DomainError, EvaluationError) as err:
        _domain_failure(report, err)
        return
    report.put("rank", r)
    report.say(f"rank {r}")


def cmd_leaf(args, report: Report) -> None:
    s = _load(report, args.file)
    p = _point_arg(args.point, s.chart)
    controls = LeafControls(step=args.step, steps_per_flow=args.steps_per_flow, seed=args.seed, steps=args.steps)
    t0 = time.perf_counter()
    try:
        sample = trace_leaf(s, p, controls)
    except (DomainError, EvaluationError) as err:
        _domain_failure(report, err)
        return
    report.timings["trace"] = time.perf_counter() - t0
    report.put("steps", len(sample.points))
    report.put("leaf_dimension", sample.leaf_dimension)
    report.put("rank_constant", sample.rank_constant())
    report.say(f"{len(sample.points)} steps, leaf dimension {sample.leaf_dimension}")
    if not sample.rank_constant():
        report.say("diagnostic: rank changes along the trace")
    if sample.truncated:
        report.put("truncated", sample.truncated)
        report.say(f"truncated: {sample.truncated}")
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            write_leaf_csv(sample, fh, s.chart.dim)
        report.put("csv", args.out)
        report.say(f"wrote {args.out}")


def _emit_structure(args, report: Report, s) -> None:
    text = dump_structure(s)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        report.put("structure_file", args.out)
        report.say(f"wrote {args.out}")
    else:
        report.lines.extend(text.rstrip("\n").split("\n"))
        report.put("structure_sha256", _digest(text))


def _chart_arg(text: str) -> Chart:
    return parse_chart([n.strip() for n in text.split(",")])


def cmd_make_contact(args, report: Report) -> None:
    chart = _chart_arg(args.coordinates)
    theta = parse_form_arg(args.theta, chart, 1, "--theta")
    omega = parse_form_arg(args.omega, chart, 2, "--omega")
    try:
        s = from_twisted_contact(TwistedContactData(theta, omega))
    except StructureError as err:
        report.put("error", err)
        report.say(f"error: {err}")
        report.exit_code = EXIT_FAIL
        return
    _emit_structure(args, report, s)


def cmd_make_lcs(args, report: Report) -> None:
    chart = _chart_arg(args.coordinates)
    big = parse_form_arg(args.big_theta, chart, 2, "--big-theta")
    theta = parse_form_arg(args.theta, chart, 1, "--theta")
    omega = parse_form_arg(args.omega, chart, 2, "--omega")
    try:
        s = from_twisted_lcs(TwistedLcsData(big, theta, omega))
    except StructureError as err:
        report.put("error", err)
        report.say(f"error: {err}")
        report.exit_code = EXIT_FAIL
        return
    _emit_structure(args, report, s)


COMMANDS = {
    "verify": cmd_verify,
    "bracket": cmd_bracket,
    "jacobiator": cmd_jacobiator,
    "classify": cmd_classify,
    "rank": cmd_rank,
    "leaf": cmd_leaf,
    "make-contact": cmd_make_contact,
    "make-lcs": cmd_make_lcs,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "kv"), default="text")
    common.add_argument("--timings", action="store_true", help="include wall-clock timings")
    common.add_argument("--seed", type=int, default=None, help="RNG seed (default: $TJM_SEED or 0)")

    parser = argparse.ArgumentParser(prog="tjm", description="Twisted Jacobi structure toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", parents=[common], help="check the defining identities")
    p.add_argument("file")
    p = sub.add_parser("bracket", parents=[common], help="bracket of two functions")
    p.add_argument("file")
    p.add_argument("-f", required=True)
    p.add_argument("-g", required=True)
    # '-h' is the third function here, so help is '--help' only
    p = sub.add_parser("jacobiator", parents=[common], add_help=False, help="Jacobiator defect identity")
    p.add_argument("--help", action="help")
    p.add_argument("file")
    p.add_argument("-f", required=True)
    p.add_argument("-g", required=True)
    p.add_argument("-h", dest="h", required=True)
    p = sub.add_parser("classify", parents=[common], help="classify a transitive structure")
    p.add_argument("file")
    p = sub.add_parser("rank", parents=[common], help="rank of the characteristic distribution")
    p.add_argument("file")
    p.add_argument("--point", required=True)
    p = sub.add_parser("leaf", parents=[common], help="trace a characteristic leaf")
    p.add_argument("file")
    p.add_argument("--point", required=True)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--step", type=float, default=1e-2)
    p.add_argument("--steps-per-flow", type=int, default=200)
    p.add_argument("--out")
    p = sub.add_parser("make-contact", parents=[common], help="structure file of a twisted contact form")
    p.add_argument("--coordinates", required=True, help="comma-separated names")
    p.add_argument("--theta", required=True, help="YAML list or map, e.g. '[-y, 0, 1]'")
    p.add_argument("--omega", default=None, help="YAML map, e.g. '{\"(0,1)\": x}'")
    p.add_argument("--out")
    p = sub.add_parser("make-lcs", parents=[common], help="structure file of a twisted LCS triple")
    p.add_argument("--coordinates", required=True)
    p.add_argument("--big-theta", required=True)
    p.add_argument("--theta", required=True)
    p.add_argument("--omega", default=None)
    p.add_argument("--out")
    return parser


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_MALFORMED if exc.code else EXIT_OK
    report = Report(args.command)
    try:
        if args.seed is None:
            args.seed = default_seed()
        COMMANDS[args.command](args, report)
    except (StructureFileError, ParseError) as err:
        stderr.write(f"tjm {args.command}: {err}\n")
        return EXIT_MALFORMED
    stdout.write(report.render(args.format, args.timings))
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
