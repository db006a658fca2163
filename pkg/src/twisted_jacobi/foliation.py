"""Characteristic foliation of a twisted Jacobi structure.

The characteristic distribution is spanned at each point by
``Lambda#(dx_0), .., Lambda#(dx_{n-1}), E``.  Symbolic questions (generic rank,
the transitive classification) are answered exactly; leaf geometry is probed
numerically by flowing along ``Lambda#(df) + f E`` with fixed-step RK4.
"""

from __future__ import annotations

import csv
import enum
import math
import random
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .expr import ONE, ZERO, Chart, ScalarExpr, EvaluationError
from .expr.scalar import SINGULARITY_THRESHOLD
from .jacobi import TwistedJacobiStructure, VerificationReport, bracket_fun, check_tensor, hamiltonian_vector
from .linalg import InconsistentSystemError, SingularSystemError, rank as symbolic_rank, solve
from .multivec import DiffForm, Multivector, exterior_derivative, sharp, wedge
from .structures import top_coefficient, wedge_power

#: Relative pivot threshold for numeric rank.
RANK_TOLERANCE = 1e-9
#: Two extensions must agree on the leaf to within this.
EXTENSION_TOLERANCE = 1e-8


class NotTransitiveError(ValueError):
    pass


class ClassificationError(ArithmeticError):
    """The linear systems of the classification are inconsistent, which
    means the input does not verify as a twisted Jacobi structure."""


class ExtensionMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class DistributionGenerators:
    fields: tuple[Multivector, ...]

    def __iter__(self):
        return iter(self.fields)

    def __len__(self):
        return len(self.fields)

    def matrix(self) -> list[list[ScalarExpr]]:
        return [f.components() for f in self.fields]


def generators(s: TwistedJacobiStructure) -> DistributionGenerators:
    chart = s.chart
    out = [sharp(s.lam, DiffForm.basis(chart, i)) for i in range(chart.dim)]
    out.append(s.e_field)
    return DistributionGenerators(tuple(out))


def numeric_rank(mat: np.ndarray, tol: float = RANK_TOLERANCE) -> int:
    """Rank by Gaussian elimination with partial pivoting; a pivot counts when
    it exceeds ``tol`` times the largest absolute entry of ``mat``."""
    a = np.array(mat, dtype=float)
    scale = np.max(np.abs(a)) if a.size else 0.0
    if not np.isfinite(scale):
        raise EvaluationError("non-finite generator values")
    if scale == 0.0:
        return 0
    thresh = tol * scale
    rows, cols = a.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = r + int(np.argmax(np.abs(a[r:, c])))
        if abs(a[p, c]) <= thresh:
            continue
        a[[r, p]] = a[[p, r]]
        a[r + 1:] -= np.outer(a[r + 1:, c] / a[r, c], a[r])
        r += 1
    return r


class _Evaluator:
    """Compiled float evaluation of the generator matrix."""

    def __init__(self, s: TwistedJacobiStructure):
        self.chart = s.chart
        self.cells = [[c.compile() for c in row] for row in generators(s).matrix()]

    def __call__(self, point) -> np.ndarray:
        return np.array([[f(point) for f in row] for row in self.cells], dtype=float)


def rank_at(s: TwistedJacobiStructure, point: Sequence, *, _ev: _Evaluator | None = None) -> int:
    """Dimension of the characteristic distribution at ``point``."""
    point = s.chart.check_point(point)
    ev = _ev or _Evaluator(s)
    try:
        return numeric_rank(ev(tuple(float(v) for v in point)))
    except (ZeroDivisionError, OverflowError) as err:
        raise EvaluationError(f"cannot evaluate generators at {point}: {err}") from err


@dataclass
class TransitivityReport:
    transitive: bool
    ranks: list[int]
    failing: list[tuple]

    def __bool__(self):
        return self.transitive


def is_transitive(s: TwistedJacobiStructure, sample: Sequence[Sequence]) -> TransitivityReport:
    if not sample:
        raise ValueError("empty sample")
    ev = _Evaluator(s)
    ranks, failing = [], []
    for p in sample:
        r = rank_at(s, p, _ev=ev)
        ranks.append(r)
        if r != s.chart.dim:
            failing.append(tuple(p))
    return TransitivityReport(not failing, ranks, failing)


def generic_rank(s: TwistedJacobiStructure) -> int:
    return symbolic_rank(generators(s).matrix(), s.chart)


# -- Proposition-3.1-style classification --------------------------------


class Parity(enum.Enum):
    EVEN = "Even"
    ODD = "Odd"

    def __str__(self):
        return self.value


@dataclass
class TransitiveClassification:
    parity: Parity
    theta: DiffForm
    big_theta: DiffForm
    residuals: VerificationReport

    @property
    def passed(self) -> bool:
        return self.residuals.passed


def _lam_matrix(s: TwistedJacobiStructure):
    n = s.chart.dim
    return [[s.lam[i, j] for j in range(n)] for i in range(n)]


def _form_from_matrix(chart: Chart, mat) -> DiffForm:
    n = chart.dim
    return DiffForm(chart, 2, {(i, j): mat[i][j] for i in range(n) for j in range(i + 1, n)})


def classify_transitive(s: TwistedJacobiStructure, *, seed: int = 0) -> TransitiveClassification:
    """Recover the twisted LCS (even) or twisted contact (odd) data of a
    transitive structure, with residuals of the identities they must satisfy."""
    chart = s.chart
    n = chart.dim
    r = generic_rank(s)
    if r < n:
        raise NotTransitiveError(f"not transitive: generic rank {r} of {n}")
    L = _lam_matrix(s)
    e = s.e_field.components()
    report = VerificationReport()
    try:
        if n % 2 == 0:
            # E = Lambda#(theta): sum_i theta_i L_ij = E_j
            (th,) = solve([[L[i][j] for i in range(n)] for j in range(n)], [e], chart)
            # Theta = -L^{-1}
            rhs = [[ScalarExpr.const(-1 if i == j else 0) for i in range(n)] for j in range(n)]
            cols = solve(L, rhs, chart)
            T = [[cols[j][i] for j in range(n)] for i in range(n)]
        else:
            # <theta, E> = 1 and Lambda#(theta) = 0
            rows = [e] + [[L[i][j] for i in range(n)] for j in range(n)]
            (th,) = solve(rows, [[ONE] + [ZERO] * n], chart)
            # i(Lambda# a) Theta = -(a - <a, E> theta) and i(E) Theta = 0
            rows = [list(L[k]) for k in range(n)] + [e]
            rhs = [[-((1 if k == j else 0) - e[k] * th[j]) for k in range(n)] + [ZERO] for j in range(n)]
            cols = solve(rows, rhs, chart)
            T = [[cols[j][i] for j in range(n)] for i in range(n)]
    except (SingularSystemError, InconsistentSystemError) as err:
        raise ClassificationError(f"classification systems fail: {err}") from err

    skew = DiffForm(chart, 2, {(i, j): T[i][j] + T[j][i] for i in range(n) for j in range(i, n)})
    report.add(check_tensor("Theta skew", skew, chart, seed=seed))
    theta = DiffForm.from_components(chart, th)
    big = _form_from_matrix(chart, T)
    d_theta = exterior_derivative(theta)
    if n % 2 == 0:
        parity = Parity.EVEN
        report.add(check_tensor("d theta", d_theta, chart, seed=seed))
        diff = big - s.omega
        report.add(check_tensor("d(Theta - omega) + theta^(Theta - omega)",
                                exterior_derivative(diff) + wedge(theta, diff), chart, seed=seed))
    else:
        parity = Parity.ODD
        vol = top_coefficient(wedge(theta, wedge_power(big, (n - 1) // 2)))
        if not vol:
            raise ClassificationError("theta ^ Theta^n vanishes identically")
        report.add(check_tensor("Theta - d theta - omega", big - d_theta - s.omega, chart, seed=seed))
    return TransitiveClassification(parity, theta, big, report)


# -- leaf tracing ---------------------------------------------------------


@dataclass(frozen=True)
class LeafControls:
    """Flow controls for :func:`trace_leaf`.

    ``functions`` defaults to the coordinate functions plus the constant 1.
    ``steps`` caps the total number of steps (default
    ``steps_per_flow * segments``).
    """

    functions: tuple | None = None
    step: float = 1e-2
    steps_per_flow: int = 200
    segments: int = 20
    seed: int = 0
    steps: int | None = None

    @property
    def total_steps(self) -> int:
        return self.steps if self.steps is not None else self.steps_per_flow * self.segments


@dataclass
class FlowSegment:
    function_index: int
    function: str
    steps: int
    duration: float


@dataclass
class LeafSample:
    base: tuple
    points: list[tuple] = field(default_factory=list)
    rank_estimates: list[int] = field(default_factory=list)
    flow_indices: list[int] = field(default_factory=list)
    flow_log: list[FlowSegment] = field(default_factory=list)
    truncated: str | None = None

    @property
    def leaf_dimension(self) -> int:
        # rank is lower semicontinuous, samples can only under-count
        return max(self.rank_estimates, default=0)

    def rank_constant(self) -> bool:
        return len(set(self.rank_estimates)) <= 1

    def all_points(self) -> list[tuple]:
        return [self.base] + self.points


def rk4_step(field_fn, y: np.ndarray, h: float) -> np.ndarray:
    k1 = field_fn(y)
    k2 = field_fn(y + 0.5 * h * k1)
    k3 = field_fn(y + 0.5 * h * k2)
    k4 = field_fn(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _compile_field(x: Multivector):
    comps = [c.compile() for c in x.components()]

    def fn(y):
        t = tuple(y)
        return np.array([c(t) for c in comps], dtype=float)

    return fn


class _LeftDomain(Exception):
    pass


class _DomainGuard:
    """Keeps a trajectory in the connected piece of the domain it starts in:
    every constraint must stay away from zero and keep its sign at the base
    point.  A fixed-step integrator can otherwise jump across a singular set."""

    def __init__(self, chart: Chart, base: tuple):
        self.constraints = [(c, c.compile()) for c in chart.domain_constraints]
        self.signs = [math.copysign(1.0, fn(base)) for _, fn in self.constraints]

    def problem(self, y) -> str | None:
        if not np.all(np.isfinite(y)):
            return "non-finite state"
        t = tuple(float(v) for v in y)
        for (c, fn), sign in zip(self.constraints, self.signs):
            try:
                v = fn(t)
            except (ZeroDivisionError, OverflowError, ValueError):
                return f"domain constraint {c} not evaluable"
            if abs(v) <= SINGULARITY_THRESHOLD:
                return f"domain constraint {c} violated"
            if math.copysign(1.0, v) != sign:
                return f"domain constraint {c} changed sign"
        return None

    def wrap(self, field_fn):
        def fn(y):
            bad = self.problem(y)
            if bad is not None:
                raise _LeftDomain(bad)
            return field_fn(y)
        return fn


def trace_leaf(s: TwistedJacobiStructure, point: Sequence, controls: LeafControls = LeafControls()) -> LeafSample:
    """Sample the characteristic leaf through ``point`` by concatenating flows
    of Hamiltonian-type vector fields, one randomly chosen function per segment."""
    chart = s.chart
    base = tuple(float(v) for v in chart.check_point(point))
    funcs = controls.functions
    if funcs is None:
        funcs = tuple(chart.coordinates()) + (ONE,)
    funcs = tuple(ScalarExpr.coerce(f) for f in funcs)
    if not funcs:
        raise ValueError("no flow functions")
    guard = _DomainGuard(chart, base)
    fields = [guard.wrap(_compile_field(hamiltonian_vector(s, f))) for f in funcs]
    ev = _Evaluator(s)
    rng = random.Random(controls.seed)
    sample = LeafSample(base)
    y = np.array(base)
    remaining = controls.total_steps
    while remaining > 0 and sample.truncated is None:
        k = rng.randrange(len(funcs))
        n_steps = min(controls.steps_per_flow, remaining)
        t0 = time.perf_counter()
        done = 0
        for _ in range(n_steps):
            try:
                with np.errstate(all="raise"):
                    y_new = rk4_step(fields[k], y, controls.step)
            except _LeftDomain as err:
                sample.truncated = f"{err} during step {len(sample.points) + 1}"
                break
            except (ZeroDivisionError, OverflowError, FloatingPointError) as err:
                sample.truncated = f"flow of {funcs[k]} failed after step {len(sample.points)}: {err}"
                break
            bad = guard.problem(y_new)
            if bad is not None:
                sample.truncated = f"{bad} at step {len(sample.points) + 1}"
                break
            pt = tuple(float(v) for v in y_new)
            y = y_new
            sample.points.append(pt)
            sample.flow_indices.append(k)
            sample.rank_estimates.append(numeric_rank(ev(pt)))
            done += 1
        sample.flow_log.append(FlowSegment(k, str(funcs[k]), done, time.perf_counter() - t0))
        remaining -= n_steps
    return sample


def leaf_bracket_check(s: TwistedJacobiStructure, point: Sequence, f, g, f_alt, g_alt,
                       sample: LeafSample) -> float:
    """Max deviation between ``{f, g}`` and ``{f_alt, g_alt}`` over the leaf
    sample, where ``(f, f_alt)`` and ``(g, g_alt)`` must agree on the leaf."""
    f, g, f_alt, g_alt = (ScalarExpr.coerce(v) for v in (f, g, f_alt, g_alt))
    pts = [tuple(float(v) for v in s.chart.check_point(point))] + sample.all_points()
    df, dg = (f - f_alt).compile(), (g - g_alt).compile()
    for p in pts:
        for name, fn in (("f", df), ("g", dg)):
            if abs(fn(p)) > EXTENSION_TOLERANCE:
                raise ExtensionMismatchError(
                    f"{name} and its alternative differ by {fn(p):.3g} at {p}; not extensions of one leaf function")
    diff = (bracket_fun(s, f, g) - bracket_fun(s, f_alt, g_alt)).compile()
    return max(abs(diff(p)) for p in pts)


def write_leaf_csv(sample: LeafSample, out, dim: int | None = None) -> None:
    """Write ``step,flow_function_index,x_0..x_{n-1},rank``, one row per step."""
    dim = dim if dim is not None else len(sample.base)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["step", "flow_function_index"] + [f"x_{i}" for i in range(dim)] + ["rank"])
    for i, (pt, k, r) in enumerate(zip(sample.points, sample.flow_indices, sample.rank_estimates), start=1):
        writer.writerow([i, k] + [f"{v:#.12g}" for v in pt] + [r])
