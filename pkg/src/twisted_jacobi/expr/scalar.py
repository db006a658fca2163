"""Exact scalar functions of chart coordinates.

A :class:`ScalarExpr` is stored in canonical form: a reduced quotient of two
expanded polynomials over Q whose generators are the chart coordinates and
opaque transcendental atoms ``sin(u)``, ``cos(u)``, ``exp(u)`` (each keyed by
the canonical form of its argument ``u``).  Two expressions are equal iff
their canonical forms coincide, so equality on the rational fragment is
decided exactly.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

from . import _poly as P

FUNCTIONS = ("sin", "cos", "exp")

#: Absolute tolerance used by the sampling zero test.
ZERO_TOLERANCE = 1e-9
#: Domain constraints must exceed this in absolute value at admissible points.
SINGULARITY_THRESHOLD = 1e-9
#: Number of random sample points used by :func:`is_zero`.
N_SAMPLES = 64


class EvaluationError(ArithmeticError):
    """Raised when an expression cannot be evaluated at a point."""


class DomainError(EvaluationError):
    """A point violates a chart's domain constraints."""


class SamplingError(RuntimeError):
    """No admissible sample point could be drawn for a zero test."""


# -- generators -----------------------------------------------------------


class _Gen:
    __slots__ = ("key", "_hash")

    def __eq__(self, other):
        return isinstance(other, _Gen) and self.key == other.key

    def __hash__(self):
        return self._hash

    def __lt__(self, other):
        return self.key < other.key


class Coordinate(_Gen):
    __slots__ = ("index", "name")

    def __init__(self, index: int, name: str):
        self.index = index
        self.name = name
        self.key = (0, index, name)
        self._hash = hash(self.key)

    def __repr__(self):
        return self.name


class Atom(_Gen):
    """``func(arg)`` for a transcendental ``func``; treated as an independent
    generator of the polynomial ring."""

    __slots__ = ("func", "arg")

    def __init__(self, func: str, arg: "ScalarExpr"):
        self.func = func
        self.arg = arg
        self.key = (1, func, str(arg))
        self._hash = hash(self.key)

    def __repr__(self):
        return f"{self.func}({self.arg})"


# -- the expression type --------------------------------------------------


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, float):
        # decimal literal semantics: 0.5 -> 1/2
        return Fraction(repr(value))
    raise TypeError(f"cannot convert {value!r} to an exact rational")


def _operand(value):
    if isinstance(value, ScalarExpr):
        return value
    if isinstance(value, (int, float, Rational)):
        return ScalarExpr.const(value)
    return None


class ScalarExpr:
    """Immutable canonical rational function of coordinates and atoms."""

    __slots__ = ("num", "den", "_hash", "_str", "_compiled")

    def __init__(self, num: dict, den: dict | None = None, *, _reduced: bool = False):
        if den is None:
            den = P.constant(1)
        elif not den:
            raise ZeroDivisionError("zero denominator")
        if not _reduced:
            num, den = P.cancel(num, den)
        self.num = num
        self.den = den
        self._hash = None
        self._str = None
        self._compiled = None

    # construction

    @classmethod
    def const(cls, value) -> "ScalarExpr":
        return cls(P.constant(_as_fraction(value)), _reduced=True)

    @classmethod
    def coordinate(cls, index: int, name: str) -> "ScalarExpr":
        return cls({((Coordinate(index, name), 1),): Fraction(1)}, _reduced=True)

    @classmethod
    def _poly(cls, p: dict) -> "ScalarExpr":
        return cls(p, _reduced=True)

    @staticmethod
    def coerce(value) -> "ScalarExpr":
        if isinstance(value, ScalarExpr):
            return value
        return ScalarExpr.const(value)

    # structure

    @property
    def is_polynomial(self) -> bool:
        return P.is_constant(self.den)

    @property
    def is_constant(self) -> bool:
        return P.is_constant(self.num) and P.is_constant(self.den)

    def is_zero_exact(self) -> bool:
        return not self.num

    def constant_value(self) -> Fraction:
        if not self.is_constant:
            raise ValueError(f"{self} is not constant")
        return P.constant_value(self.num)

    def generators(self) -> set:
        return P.generators(self.num) | P.generators(self.den)

    def atoms(self) -> set:
        """All transcendental atoms, including nested ones."""
        out = set()
        for g in self.generators():
            if isinstance(g, Atom):
                out.add(g)
                out |= g.arg.atoms()
        return out

    @property
    def is_rational(self) -> bool:
        return not any(isinstance(g, Atom) for g in self.generators())

    def coordinates(self) -> set:
        out = set()
        for g in self.generators():
            if isinstance(g, Coordinate):
                out.add(g)
            else:
                out |= g.arg.coordinates()
        return out

    def n_terms(self) -> int:
        return len(self.num) + len(self.den) - 1

    # arithmetic

    def __add__(self, other):
        other = _operand(other)
        if other is None:
            return NotImplemented
        if not other.num:
            return self
        if not self.num:
            return other
        if self.den == other.den:
            if P.is_constant(self.den):
                return ScalarExpr(P.add(self.num, other.num), self.den, _reduced=True)
            return ScalarExpr(P.add(self.num, other.num), self.den)
        num = P.add(P.mul(self.num, other.den), P.mul(other.num, self.den))
        return ScalarExpr(num, P.mul(self.den, other.den))

    __radd__ = __add__

    def __neg__(self):
        return ScalarExpr(P.neg(self.num), self.den, _reduced=True)

    def __sub__(self, other):
        other = _operand(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = _operand(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = _operand(other)
        if other is None:
            return NotImplemented
        if not self.num or not other.num:
            return ZERO
        if self.is_polynomial and other.is_polynomial:
            return ScalarExpr(P.mul(self.num, other.num), _reduced=True)
        return ScalarExpr(P.mul(self.num, other.num), P.mul(self.den, other.den))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _operand(other)
        if other is None:
            return NotImplemented
        if not other.num:
            raise ZeroDivisionError(f"division of {self} by zero")
        return ScalarExpr(P.mul(self.num, other.den), P.mul(self.den, other.num))

    def __rtruediv__(self, other):
        other = _operand(other)
        if other is None:
            return NotImplemented
        return other / self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("only integer powers are supported")
        if n < 0:
            if not self.num:
                raise ZeroDivisionError("zero to a negative power")
            return ScalarExpr(P.power(self.den, -n), P.power(self.num, -n))
        return ScalarExpr(P.power(self.num, n), P.power(self.den, n), _reduced=True)

    # comparison

    def __eq__(self, other):
        if not isinstance(other, ScalarExpr):
            try:
                other = ScalarExpr.coerce(other)
            except TypeError:
                return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((frozenset(self.num.items()), frozenset(self.den.items())))
        return self._hash

    def __bool__(self):
        return bool(self.num)

    # calculus

    def diff(self, index: int) -> "ScalarExpr":
        return differentiate(self, index)

    # evaluation

    def evaluate(self, point: Sequence, chart: "Chart | None" = None):
        return evaluate(self, point, chart)

    def compile(self):
        """Return a fast float-valued callable ``f(point)``."""
        if self._compiled is None:
            src = _pysource(self)
            code = compile(f"lambda _p: {src}", "<ScalarExpr>", "eval")
            self._compiled = eval(code, {"math": math})
        return self._compiled

    # printing

    def __str__(self):
        if self._str is None:
            self._str = _format(self)
        return self._str

    def __repr__(self):
        return f"ScalarExpr({str(self)!r})"


ZERO = ScalarExpr.const(0)
ONE = ScalarExpr.const(1)


def _apply(func: str, arg: ScalarExpr) -> ScalarExpr:
    arg = ScalarExpr.coerce(arg)
    if not arg.num:
        return ZERO if func == "sin" else ONE
    return ScalarExpr({((Atom(func, arg), 1),): Fraction(1)}, _reduced=True)


def sin(u) -> ScalarExpr:
    return _apply("sin", u)


def cos(u) -> ScalarExpr:
    return _apply("cos", u)


def exp(u) -> ScalarExpr:
    return _apply("exp", u)


APPLY = {"sin": sin, "cos": cos, "exp": exp}


# -- differentiation ------------------------------------------------------


def _gen_derivative(g, index: int) -> ScalarExpr:
    if isinstance(g, Coordinate):
        return ONE if g.index == index else ZERO
    du = differentiate(g.arg, index)
    if not du:
        return ZERO
    if g.func == "sin":
        return cos(g.arg) * du
    if g.func == "cos":
        return -sin(g.arg) * du
    return exp(g.arg) * du


def _poly_derivative(p: dict, index: int) -> ScalarExpr:
    total = ZERO
    for g in P.generators(p):
        dg = _gen_derivative(g, index)
        if dg:
            total = total + ScalarExpr._poly(P.partial(p, g)) * dg
    return total


def differentiate(e: ScalarExpr, index: int) -> ScalarExpr:
    """Exact partial derivative with respect to coordinate ``index``."""
    dn = _poly_derivative(e.num, index)
    if e.is_polynomial:
        return dn
    dd = _poly_derivative(e.den, index)
    if not dd:
        return dn / ScalarExpr._poly(e.den)
    n, d = ScalarExpr._poly(e.num), ScalarExpr._poly(e.den)
    return (dn * d - n * dd) / (d * d)


# -- printing -------------------------------------------------------------


def _format_gen(g) -> str:
    if isinstance(g, Coordinate):
        return g.name
    return f"{g.func}({g.arg})"


def _format_mono(m: tuple) -> str:
    parts = []
    for g, e in m:
        s = _format_gen(g)
        parts.append(s if e == 1 else f"{s}^{e}")
    return "*".join(parts)


def _format_poly(p: dict) -> str:
    if not p:
        return "0"
    out = []
    for i, (m, c) in enumerate(P.sorted_terms(p)):
        sign = "-" if c < 0 else "+"
        a = abs(c)
        if not m:
            body = str(a)
        elif a == 1:
            body = _format_mono(m)
        else:
            body = f"{a}*{_format_mono(m)}"
        if i == 0:
            if sign == "-":
                # '-x^2' would parse as (-x)^2; keep the power off the negation
                if m and a == 1 and m[0][1] != 1:
                    body = f"1*{body}"
                out.append(f"-{body}")
            else:
                out.append(body)
        else:
            out.append(f" {sign} {body}")
    return "".join(out)


def _needs_parens_den(p: dict) -> bool:
    if len(p) != 1:
        return True
    m, c = next(iter(p.items()))
    return c != 1 or len(m) != 1


def _format(e: ScalarExpr) -> str:
    num = _format_poly(e.num)
    if e.is_polynomial:
        return num
    if len(e.num) > 1:
        num = f"({num})"
    den = _format_poly(e.den)
    if _needs_parens_den(e.den):
        den = f"({den})"
    return f"{num}/{den}"


def _pysource_poly(p: dict) -> str:
    if not p:
        return "0.0"
    terms = []
    for m, c in p.items():
        factors = [repr(float(c))]
        for g, e in m:
            if isinstance(g, Coordinate):
                s = f"_p[{g.index}]"
            else:
                s = f"math.{g.func}({_pysource(g.arg)})"
            factors.append(s if e == 1 else f"{s}**{e}")
        terms.append("*".join(factors))
    return "(" + " + ".join(terms) + ")"


def _pysource(e: ScalarExpr) -> str:
    if e.is_polynomial:
        return _pysource_poly(e.num)
    return f"({_pysource_poly(e.num)} / {_pysource_poly(e.den)})"


# -- charts and evaluation ------------------------------------------------


@dataclass(frozen=True)
class Chart:
    """Ordered coordinate names plus expressions required nonzero on the
    working domain."""

    names: tuple[str, ...]
    domain_constraints: tuple[ScalarExpr, ...] = ()

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "domain_constraints", tuple(self.domain_constraints))
        if not names:
            raise ValueError("a chart needs at least one coordinate")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate coordinate names in {names}")
        for n in names:
            if n in FUNCTIONS or not n.isidentifier() or not n.isascii():
                raise ValueError(f"invalid coordinate name {n!r}")

    @property
    def dim(self) -> int:
        return len(self.names)

    def coordinate(self, i: int) -> ScalarExpr:
        return ScalarExpr.coordinate(i, self.names[i])

    def coordinates(self) -> list[ScalarExpr]:
        return [self.coordinate(i) for i in range(self.dim)]

    def index(self, name: str) -> int:
        return self.names.index(name)

    def parse(self, text: str) -> ScalarExpr:
        from .parser import parse

        return parse(text, self)

    def with_constraints(self, *constraints: ScalarExpr) -> "Chart":
        extra = [c for c in constraints if c not in self.domain_constraints]
        return Chart(self.names, self.domain_constraints + tuple(extra))

    def violated_constraint(self, point: Sequence) -> ScalarExpr | None:
        """First domain constraint that is (numerically) zero at ``point``."""
        for c in self.domain_constraints:
            try:
                v = _eval(c, point, exact=False)
            except EvaluationError:
                return c
            if abs(v) <= SINGULARITY_THRESHOLD:
                return c
        return None

    def check_point(self, point: Sequence) -> tuple:
        point = tuple(point)
        if len(point) != self.dim:
            raise DomainError(f"point has {len(point)} coordinates, chart has {self.dim}")
        bad = self.violated_constraint(point)
        if bad is not None:
            raise DomainError(f"domain constraint {bad} != 0 violated at {point}")
        return point


def _is_exact(v) -> bool:
    return isinstance(v, (int, Fraction))


def _eval_poly(p: dict, point: Sequence, exact: bool, cache: dict):
    total = Fraction(0) if exact else 0.0
    for m, c in p.items():
        term = c if exact else float(c)
        for g, e in m:
            v = cache.get(g)
            if v is None:
                if isinstance(g, Coordinate):
                    v = point[g.index]
                    v = Fraction(v) if exact else float(v)
                else:
                    a = float(_eval(g.arg, point, exact=False))
                    try:
                        v = getattr(math, g.func)(a)
                    except OverflowError as err:
                        raise EvaluationError(f"overflow evaluating {g!r}") from err
                cache[g] = v
            term = term * v**e
        total += term
    return total


def _eval(e: ScalarExpr, point: Sequence, exact: bool):
    cache: dict = {}
    num = _eval_poly(e.num, point, exact, cache)
    if e.is_polynomial:
        return num / P.constant_value(e.den) if exact else num / float(P.constant_value(e.den))
    den = _eval_poly(e.den, point, exact, cache)
    if den == 0:
        raise EvaluationError(f"division by zero evaluating {e} at {tuple(point)}")
    return num / den


def evaluate(e: ScalarExpr, point: Sequence, chart: Chart | None = None):
    """Value of ``e`` at ``point``.

    The result is an exact ``Fraction`` when every coordinate is rational and
    ``e`` has no transcendental atoms, otherwise a float.
    """
    point = tuple(point)
    if chart is not None:
        chart.check_point(point)
    exact = e.is_rational and all(_is_exact(v) for v in point)
    return _eval(e, point, exact)


# -- zero testing ---------------------------------------------------------


class Zero(enum.Enum):
    EXACT = "ExactZero"
    PROBABLE = "ProbablyZero"
    NONZERO = "NonZero"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class ZeroTest:
    status: Zero
    witness: tuple | None = None
    value: float | Fraction | None = None

    @property
    def vanishes(self) -> bool:
        return self.status is not Zero.NONZERO

    def __str__(self):
        if self.status is Zero.NONZERO:
            pt = ", ".join(_fmt_num(v) for v in self.witness)
            return f"NonZero (value {_fmt_num(self.value)} at ({pt}))"
        return str(self.status)


def _fmt_num(v) -> str:
    if isinstance(v, Fraction):
        return str(v)
    return f"{v:.12g}"


def sample_points(chart: Chart, rng: random.Random, n: int = N_SAMPLES, *, max_tries: int = 20):
    """Draw ``n`` rational points in [-1, 1]^dim satisfying the chart's
    domain constraints.  The origin is tried first."""
    pts = []
    origin = tuple(Fraction(0) for _ in range(chart.dim))
    if chart.violated_constraint(origin) is None:
        pts.append(origin)
    tries = 0
    while len(pts) < n and tries < n * max_tries:
        tries += 1
        p = tuple(Fraction(rng.randint(-997, 997), 997) for _ in range(chart.dim))
        if chart.violated_constraint(p) is None:
            pts.append(p)
    if not pts:
        raise SamplingError("every sample point violates the domain constraints")
    return pts


def _infer_chart(e: ScalarExpr) -> Chart:
    coords = sorted(e.coordinates(), key=lambda g: g.index)
    dim = coords[-1].index + 1 if coords else 1
    names = {g.index: g.name for g in coords}
    return Chart(tuple(names.get(i, f"_u{i}") for i in range(dim)))


def is_zero(e: ScalarExpr, chart: Chart | None = None, *, rng: random.Random | None = None,
            seed: int = 0) -> ZeroTest:
    """Decide whether ``e`` vanishes identically on the chart's domain.

    Canonical zero gives ``ExactZero``.  A nonzero rational expression is
    ``NonZero`` and a witness point is found by exact evaluation.  Anything
    involving sin/cos/exp is sampled at rational points and reported as
    ``ProbablyZero`` when every sample is within ``ZERO_TOLERANCE``.
    """
    if not e.num:
        return ZeroTest(Zero.EXACT)
    if chart is None:
        chart = _infer_chart(e)
    if rng is None:
        rng = random.Random(seed)
    if e.is_constant:
        pt = tuple(Fraction(0) for _ in range(chart.dim))
        return ZeroTest(Zero.NONZERO, pt, e.constant_value())
    points = sample_points(chart, rng)
    exact = e.is_rational
    for pt in points:
        try:
            v = _eval(e, pt, exact)
        except EvaluationError:
            continue
        if (exact and v != 0) or (not exact and abs(v) > ZERO_TOLERANCE):
            return ZeroTest(Zero.NONZERO, pt, v)
    if exact:
        # a nonzero rational function cannot vanish on all samples unless they
        # all hit its zero set; report the failure honestly
        raise SamplingError(f"could not find a witness for nonzero expression {e}")
    return ZeroTest(Zero.PROBABLE)


def as_scalar(value) -> ScalarExpr:
    return ScalarExpr.coerce(value)


def sum_exprs(items: Iterable[ScalarExpr]) -> ScalarExpr:
    total = ZERO
    for it in items:
        total = total + it
    return total
