"""Twisted contact and twisted locally conformal symplectic structures.

Both constructors build ``(Lambda, E)`` by exact linear solves and refuse to
return anything that fails :func:`~twisted_jacobi.jacobi.verify_structure`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .expr import ZERO, Chart, ScalarExpr
from .jacobi import TwistedJacobiStructure, VerificationReport, check_tensor, residual_r2, residual_r3, verify_structure
from .linalg import SingularSystemError, determinant, solve
from .multivec import DiffForm, Multivector, exterior_derivative, schouten, sharp, sharp_ext, wedge


class StructureError(ValueError):
    """Input data does not define the requested structure."""


class NondegeneracyError(StructureError):
    pass


class ClosednessError(StructureError):
    pass


class CompatibilityError(StructureError):
    pass


class VerificationError(StructureError):
    def __init__(self, message: str, report: VerificationReport):
        super().__init__(f"{message}\n{report.summary()}")
        self.report = report


@dataclass(frozen=True)
class TwistedContactData:
    """A 1-form ``theta`` and 2-form ``omega`` on an odd-dimensional chart."""

    theta: DiffForm
    omega: DiffForm

    def __post_init__(self):
        if self.theta.degree != 1 or self.omega.degree != 2:
            raise TypeError("twisted contact data is a 1-form and a 2-form")
        if self.chart.dim % 2 != 1:
            raise StructureError(f"twisted contact structures need odd dimension, got {self.chart.dim}")

    @property
    def chart(self) -> Chart:
        return self.theta.chart


@dataclass(frozen=True)
class TwistedLcsData:
    """Nondegenerate 2-form ``big_theta``, closed 1-form ``theta`` and a 2-form
    ``omega`` on an even-dimensional chart."""

    big_theta: DiffForm
    theta: DiffForm
    omega: DiffForm

    def __post_init__(self):
        if self.big_theta.degree != 2 or self.theta.degree != 1 or self.omega.degree != 2:
            raise TypeError("twisted LCS data is a 2-form, a 1-form and a 2-form")
        if self.chart.dim % 2 != 0:
            raise StructureError(f"twisted LCS structures need even dimension, got {self.chart.dim}")

    @property
    def chart(self) -> Chart:
        return self.big_theta.chart


def wedge_power(form: DiffForm, n: int) -> DiffForm:
    out = DiffForm.scalar(form.chart, 1)
    for _ in range(n):
        out = wedge(out, form)
    return out


def top_coefficient(form: DiffForm) -> ScalarExpr:
    return form.coeffs.get(tuple(range(form.chart.dim)), ZERO)


def form_matrix(form: DiffForm) -> list[list[ScalarExpr]]:
    n = form.chart.dim
    return [[form[i, j] for j in range(n)] for i in range(n)]


def bivector_from_matrix(chart: Chart, mat) -> Multivector:
    n = chart.dim
    return Multivector(chart, 2, {(i, j): mat[i][j] for i in range(n) for j in range(i + 1, n)})


def _constrained(chart: Chart, c: ScalarExpr) -> Chart:
    if c.is_constant:
        return chart
    return chart.with_constraints(c)


def _checked(s: TwistedJacobiStructure, what: str) -> TwistedJacobiStructure:
    report = verify_structure(s)
    if not report.passed:
        raise VerificationError(f"{what} does not verify", report)
    return s


def from_twisted_contact(data: TwistedContactData) -> TwistedJacobiStructure:
    """Twisted Jacobi structure of a twisted contact manifold.

    ``E`` solves ``<theta, E> = 1``, ``i(E)(d theta + omega) = 0`` and
    ``Lambda#(dx_k)`` solves ``i(v)(d theta + omega) = -(dx_k - <dx_k, E> theta)``
    with ``<theta, v> = 0``.  The nonvanishing of ``theta ^ (d theta + omega)^n``
    is added to the chart's domain constraints.
    """
    chart = data.chart
    n = (chart.dim - 1) // 2
    big = exterior_derivative(data.theta) + data.omega
    vol = top_coefficient(wedge(data.theta, wedge_power(big, n)))
    if not vol:
        raise NondegeneracyError("theta ^ (d theta + omega)^n vanishes identically")
    chart = _constrained(chart, vol)
    dim = chart.dim
    th = data.theta.components()
    T = form_matrix(big)
    # row 0: <theta, v>; row 1+j: (i(v) Theta)_j = sum_i v^i Theta_ij
    matrix = [th] + [[T[i][j] for i in range(dim)] for j in range(dim)]
    rhs_e = [ScalarExpr.const(1)] + [ZERO] * dim
    try:
        (e_comps,) = solve(matrix, [rhs_e], chart)
    except SingularSystemError as err:
        raise NondegeneracyError(f"Reeb-type system is degenerate: {err}") from err
    rhs_cols = []
    for k in range(dim):
        col = [ZERO]
        for j in range(dim):
            delta = 1 if j == k else 0
            col.append(-(delta - e_comps[k] * th[j]))
        rhs_cols.append(col)
    rows = solve(matrix, rhs_cols, chart)  # rows[k] = Lambda#(dx_k)
    for k in range(dim):
        for j in range(k, dim):
            if rows[k][j] + rows[j][k]:
                raise StructureError(f"Lambda#(dx_{k}) and Lambda#(dx_{j}) are not skew")
    s = TwistedJacobiStructure(
        chart,
        bivector_from_matrix(chart, rows),
        Multivector.from_components(chart, e_comps),
        DiffForm(chart, 2, data.omega.coeffs),
    )
    return _checked(s, "twisted contact structure")


def lcs_compatibility(data: TwistedLcsData) -> DiffForm:
    """``d(Theta - omega) + theta ^ (Theta - omega)``."""
    diff = data.big_theta - data.omega
    return exterior_derivative(diff) + wedge(data.theta, diff)


def invert_two_form(form: DiffForm, chart: Chart | None = None) -> Multivector:
    """The bivector ``Lambda`` with ``i(Lambda# a) Theta = -a`` (nondegenerate ``Theta``)."""
    chart = chart or form.chart
    n = chart.dim
    T = form_matrix(form)
    rhs = [[ScalarExpr.const(-1 if i == j else 0) for i in range(n)] for j in range(n)]
    cols = solve(T, rhs, chart)  # T L = -I, cols[j] = column j of L
    return bivector_from_matrix(chart, [[cols[j][i] for j in range(n)] for i in range(n)])


def from_twisted_lcs(data: TwistedLcsData) -> TwistedJacobiStructure:
    """Twisted Jacobi structure of a twisted locally conformal symplectic manifold:
    ``Lambda`` inverts ``Theta`` and ``E = Lambda#(theta)``."""
    chart = data.chart
    d_theta = exterior_derivative(data.theta)
    closed = check_tensor("d theta", d_theta, chart)
    if not closed.passed:
        raise ClosednessError(f"theta is not closed: d theta = {d_theta}")
    compat = check_tensor("compatibility", lcs_compatibility(data), chart)
    if not compat.passed:
        raise CompatibilityError(f"d(Theta - omega) + theta^(Theta - omega) != 0\n{compat.summary()}")
    det = determinant(form_matrix(data.big_theta), chart)
    if not det:
        raise NondegeneracyError("Theta is degenerate: its coefficient determinant vanishes identically")
    chart = _constrained(chart, det)
    lam = invert_two_form(data.big_theta, chart)
    e = sharp(lam, DiffForm(chart, 1, data.theta.coeffs))
    s = TwistedJacobiStructure(chart, lam, e, DiffForm(chart, 2, data.omega.coeffs))
    _checked(s, "twisted LCS structure")
    back = check_tensor("Lambda#(Theta) - Lambda", sharp_ext(lam, data.big_theta) - lam, chart)
    if not back.passed:
        raise StructureError(f"Lambda#(Theta) != Lambda\n{back.summary()}")
    return s


class Reduction(enum.Enum):
    POISSON = "Poisson"
    TWISTED_POISSON = "TwistedPoisson"
    JACOBI = "Jacobi"
    NONE = "None"

    def __str__(self):
        return self.value


def twisted_poisson_residual(s: TwistedJacobiStructure) -> Multivector:
    """``[Lambda, Lambda] - 2 Lambda#(d omega)``."""
    return schouten(s.lam, s.lam) - 2 * sharp_ext(s.lam, exterior_derivative(s.omega))


def recognize_reduction(s: TwistedJacobiStructure) -> Reduction:
    no_e, no_omega = s.e_field.is_zero(), s.omega.is_zero()
    if no_e:
        # with E = 0 the defining identities collapse to the twisted Poisson condition
        if residual_r2(s) != twisted_poisson_residual(s) or not residual_r3(s).is_zero():
            raise AssertionError("E = 0 but the residuals do not reduce to the twisted Poisson form")
        return Reduction.POISSON if no_omega else Reduction.TWISTED_POISSON
    if no_omega:
        return Reduction.JACOBI
    return Reduction.NONE


def product_with_line(s: TwistedJacobiStructure, name: str) -> TwistedJacobiStructure:
    """The same structure on ``chart x R`` with an inert extra coordinate."""
    chart = Chart(s.chart.names + (name,), s.chart.domain_constraints)
    return TwistedJacobiStructure(
        chart,
        Multivector(chart, 2, s.lam.coeffs),
        Multivector(chart, 1, s.e_field.coeffs),
        DiffForm(chart, 2, s.omega.coeffs),
    )
