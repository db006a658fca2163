"""Twisted Jacobi structures ``((Lambda, E), omega)`` and their brackets.

A structure is a bivector ``Lambda``, a vector field ``E`` and a 2-form
``omega`` on one chart.  It is twisted Jacobi when both residuals below vanish::

    R2 = [L, L] + 2 E^L - 2 L#(d omega) - 2 (L# omega)^E
    R3 = [E, L] - (L# (x) 1)(d omega)(E) + ((L# (x) 1)(omega)(E))^E

Sections of ``T*M x R`` and ``TM x R`` are :class:`FormPair` and
:class:`SectionPair`.  ``(alpha, f)`` pairs with ``(X, g)`` as
``alpha(X) + f g``, and a k-form pair ``(eta, xi)`` is evaluated by::

    (eta, xi)((X1, g1), .., (Xk, gk)) = eta(X1..Xk) + sum_i (-1)^(i+1) g_i xi(X1..^Xi..Xk)
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Sequence

from .expr import ONE, ZERO, Chart, ScalarExpr, Zero, ZeroTest, is_zero
from .multivec import (
    ChartMismatchError,
    DiffForm,
    Multivector,
    exterior_derivative,
    interior_product,
    lie_derivative,
    pair_form,
    pair_multivector,
    schouten,
    sharp,
    sharp_ext,
    sharp_tensor_one_at,
    wedge,
)

#: The bracket on sections of ``T*M x R`` underlying ``{.,.}^omega``.  Printed
#: in reports whenever an algebroid axiom fails, since it is the first suspect.
BASE_BRACKET_NOTE = (
    "base bracket {(a,f),(b,g)} = (L_{L#a} b - L_{L#b} a - d(L(a,b)) + f L_E b - g L_E a"
    " - i(E)(a^b), -L(a,b) + anchor(a,f)(g) - anchor(b,g)(f)); a failing axiom implicates"
    " this formula or its sign conventions"
)


@dataclass(frozen=True)
class TwistedJacobiStructure:
    chart: Chart
    lam: Multivector
    e_field: Multivector
    omega: DiffForm

    def __post_init__(self):
        if self.chart.dim < 1:
            raise ValueError("chart dimension must be at least 1")
        for name, t, kind, deg in (("lam", self.lam, Multivector, 2),
                                   ("e_field", self.e_field, Multivector, 1),
                                   ("omega", self.omega, DiffForm, 2)):
            if not isinstance(t, kind) or t.degree != deg:
                raise TypeError(f"{name} must be a degree-{deg} {kind.__name__}")
            if t.chart.names != self.chart.names:
                raise ChartMismatchError(f"{name} lives on {t.chart.names}, not {self.chart.names}")

    @classmethod
    def on(cls, chart: Chart, lam=None, e_field=None, omega=None) -> "TwistedJacobiStructure":
        """Build with missing tensors set to zero and all tensors moved onto ``chart``."""
        lam = Multivector(chart, 2, lam.coeffs if lam is not None else {})
        e_field = Multivector(chart, 1, e_field.coeffs if e_field is not None else {})
        omega = DiffForm(chart, 2, omega.coeffs if omega is not None else {})
        return cls(chart, lam, e_field, omega)


@dataclass(frozen=True)
class FormPair:
    """Section ``(eta, xi)`` of ``wedge^k(T*M x R) = wedge^k T*M + wedge^{k-1} T*M``."""

    eta: DiffForm
    xi: DiffForm

    def __post_init__(self):
        if self.eta.degree != self.xi.degree + 1:
            raise ValueError(f"degrees ({self.eta.degree}, {self.xi.degree}) do not differ by one")
        if self.eta.chart.names != self.xi.chart.names:
            raise ChartMismatchError("form pair components on different charts")

    @property
    def degree(self) -> int:
        return self.eta.degree

    @property
    def chart(self) -> Chart:
        return self.eta.chart

    @classmethod
    def of(cls, alpha: DiffForm, f) -> "FormPair":
        return cls(alpha, DiffForm.scalar(alpha.chart, f))

    @classmethod
    def exact(cls, chart: Chart, f) -> "FormPair":
        """``(df, f)``."""
        return cls.of(DiffForm.differential(chart, f), f)

    @property
    def fun(self) -> ScalarExpr:
        return self.xi.as_scalar()

    def __add__(self, other: "FormPair") -> "FormPair":
        return FormPair(self.eta + other.eta, self.xi + other.xi)

    def __sub__(self, other: "FormPair") -> "FormPair":
        return FormPair(self.eta - other.eta, self.xi - other.xi)

    def __mul__(self, f) -> "FormPair":
        return FormPair(self.eta * f, self.xi * f)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return self.eta.is_zero() and self.xi.is_zero()

    def __str__(self):
        return f"({self.eta}, {self.xi})"


@dataclass(frozen=True)
class SectionPair:
    """Section ``(X, g)`` of ``TM x R``."""

    vec: Multivector
    fun: ScalarExpr

    def __str__(self):
        return f"({self.vec}, {self.fun})"


# -- verification ---------------------------------------------------------


@dataclass
class IdentityCheck:
    """One named tensor identity and the zero status of each coefficient."""

    name: str
    residual: object
    statuses: dict = field(default_factory=dict)
    note: str = ""

    @property
    def status(self) -> Zero:
        if any(s.status is Zero.NONZERO for s in self.statuses.values()):
            return Zero.NONZERO
        if any(s.status is Zero.PROBABLE for s in self.statuses.values()):
            return Zero.PROBABLE
        return Zero.EXACT

    @property
    def passed(self) -> bool:
        return self.status is not Zero.NONZERO

    def failures(self):
        return {k: s for k, s in self.statuses.items() if s.status is Zero.NONZERO}

    def summary(self) -> str:
        out = f"{self.name}: {self.status}"
        for k, s in self.failures().items():
            out += f"\n  component {k}: {s}"
        if self.note and not self.passed:
            out += f"\n  note: {self.note}"
        return out


@dataclass
class VerificationReport:
    checks: list[IdentityCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def exact(self) -> bool:
        return all(c.status is Zero.EXACT for c in self.checks)

    def __getitem__(self, name: str) -> IdentityCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def add(self, check: IdentityCheck) -> IdentityCheck:
        self.checks.append(check)
        return check

    def summary(self) -> str:
        return "\n".join(c.summary() for c in self.checks)


def check_tensor(name: str, residual, chart: Chart, *, seed: int = 0, note: str = "") -> IdentityCheck:
    """Zero test every coefficient of a multivector/form (or a scalar)."""
    rng = random.Random(seed)
    if isinstance(residual, ScalarExpr):
        statuses = {(): is_zero(residual, chart, rng=rng)} if residual else {}
    else:
        statuses = {k: is_zero(c, chart, rng=rng) for k, c in sorted(residual.coeffs.items())}
    return IdentityCheck(name, residual, statuses, note)


def residual_r2(s: TwistedJacobiStructure) -> Multivector:
    lam, e, omega = s.lam, s.e_field, s.omega
    d_omega = exterior_derivative(omega)
    return (schouten(lam, lam) + 2 * wedge(e, lam)
            - 2 * sharp_ext(lam, d_omega) - 2 * wedge(sharp_ext(lam, omega), e))


def residual_r3(s: TwistedJacobiStructure) -> Multivector:
    lam, e, omega = s.lam, s.e_field, s.omega
    d_omega = exterior_derivative(omega)
    return (lie_derivative(e, lam) - sharp_tensor_one_at(lam, d_omega, e)
            + wedge(sharp_tensor_one_at(lam, omega, e), e))


def verify_structure(s: TwistedJacobiStructure, *, seed: int = 0) -> VerificationReport:
    """Residuals of both defining identities, coefficient by coefficient."""
    report = VerificationReport()
    note = ("the Schouten sign convention is pinned by [L,L](df,dg,dh) = 2 Jacobiator(f,g,h);"
            " a global sign mismatch points there first")
    report.add(check_tensor("R2", residual_r2(s), s.chart, seed=seed, note=note))
    report.add(check_tensor("R3", residual_r3(s), s.chart, seed=seed, note=note))
    return report


# -- brackets -------------------------------------------------------------


def bracket_fun(s: TwistedJacobiStructure, f, g) -> ScalarExpr:
    """``{f, g} = Lambda(df, dg) + <f dg - g df, E>``."""
    f, g = ScalarExpr.coerce(f), ScalarExpr.coerce(g)
    df, dg = DiffForm.differential(s.chart, f), DiffForm.differential(s.chart, g)
    return (pair_multivector(s.lam, [df, dg])
            + f * s.e_field.apply(g) - g * s.e_field.apply(f))


def hamiltonian_vector(s: TwistedJacobiStructure, f) -> Multivector:
    """``Lambda#(df) + f E``."""
    f = ScalarExpr.coerce(f)
    return sharp(s.lam, DiffForm.differential(s.chart, f)) + s.e_field * f


def pair_sharp(s: TwistedJacobiStructure, p: FormPair) -> SectionPair:
    """``(Lambda, E)#(alpha, f) = (Lambda# alpha + f E, -<alpha, E>)``."""
    if p.degree != 1:
        raise ValueError(f"pair_sharp needs a (1, 0) form pair, got degree {p.degree}")
    alpha, f = p.eta, p.fun
    return SectionPair(sharp(s.lam, alpha) + s.e_field * f, -pair_form(alpha, [s.e_field]))


def anchor(s: TwistedJacobiStructure, p: FormPair) -> Multivector:
    return pair_sharp(s, p).vec


def pair_eval(p: FormPair, sections: Sequence[SectionPair]) -> ScalarExpr:
    k = p.degree
    if len(sections) != k:
        raise ValueError(f"degree-{k} form pair evaluated on {len(sections)} sections")
    vecs = [t.vec for t in sections]
    total = pair_form(p.eta, vecs)
    if p.xi.is_zero():
        return total
    for i, t in enumerate(sections):
        if not t.fun:
            continue
        term = t.fun * pair_form(p.xi, vecs[:i] + vecs[i + 1:])
        total = total + term if i % 2 == 0 else total - term
    return total


def twisting_pair(s: TwistedJacobiStructure) -> FormPair:
    """``(d omega, omega)``."""
    return FormPair(exterior_derivative(s.omega), s.omega)


@dataclass(frozen=True)
class JacobiatorResult:
    lhs: ScalarExpr
    rhs: ScalarExpr
    status: ZeroTest

    @property
    def residual(self) -> ScalarExpr:
        return self.lhs - self.rhs


def jacobiator_check(s: TwistedJacobiStructure, f, g, h, *, seed: int = 0) -> JacobiatorResult:
    """Compare the cyclic sum of nested brackets with
    ``(Lambda, E)#(d omega, omega)((df, f), (dg, g), (dh, h))``."""
    f, g, h = (ScalarExpr.coerce(v) for v in (f, g, h))
    b = lambda u, v: bracket_fun(s, u, v)  # noqa: E731
    lhs = b(f, b(g, h)) + b(g, b(h, f)) + b(h, b(f, g))
    sections = [pair_sharp(s, FormPair.exact(s.chart, u)) for u in (f, g, h)]
    rhs = -pair_eval(twisting_pair(s), sections)
    return JacobiatorResult(lhs, rhs, is_zero(lhs - rhs, s.chart, seed=seed))


def lie_derivative_form(x: Multivector, beta: DiffForm) -> DiffForm:
    """Cartan formula ``L_X beta = i(X) d beta + d(i(X) beta)``."""
    out = interior_product(x, exterior_derivative(beta))
    if beta.degree >= 1:
        out = out + exterior_derivative(interior_product(x, beta))
    return out


def base_bracket(s: TwistedJacobiStructure, a: FormPair, b: FormPair) -> FormPair:
    """Bracket on ``T*M x R`` induced by ``(Lambda, E)`` alone (see
    :data:`BASE_BRACKET_NOTE`)."""
    alpha, f = a.eta, a.fun
    beta, g = b.eta, b.fun
    e = s.e_field
    la, lb = sharp(s.lam, alpha), sharp(s.lam, beta)
    lam_ab = pair_multivector(s.lam, [alpha, beta])
    form = (lie_derivative_form(la, beta) - lie_derivative_form(lb, alpha)
            - DiffForm.differential(s.chart, lam_ab)
            + lie_derivative_form(e, beta) * f - lie_derivative_form(e, alpha) * g
            - interior_product(e, wedge(alpha, beta)))
    fun = -lam_ab + anchor(s, a).apply(g) - anchor(s, b).apply(f)
    return FormPair.of(form, fun)


def algebroid_correction(s: TwistedJacobiStructure, a: FormPair, b: FormPair) -> FormPair:
    """``(d omega, omega)((L,E)#a, (L,E)#b, .)`` with the free slot expanded
    over the sections ``(d/dx_j, 0)`` and ``(0, 1)``."""
    chart = s.chart
    tw = twisting_pair(s)
    sa, sb = pair_sharp(s, a), pair_sharp(s, b)
    comps = [pair_eval(tw, [sa, sb, SectionPair(Multivector.basis(chart, j), ZERO)])
             for j in range(chart.dim)]
    c = pair_eval(tw, [sa, sb, SectionPair(Multivector.zero(chart, 1), ONE)])
    return FormPair.of(DiffForm.from_components(chart, comps), c)


def algebroid_bracket_omega(s: TwistedJacobiStructure, a: FormPair, b: FormPair) -> FormPair:
    """The Lie algebroid bracket ``{a, b}^omega`` on ``T*M x R``."""
    for p in (a, b):
        if p.degree != 1:
            raise ValueError("algebroid bracket acts on (1, 0) form pairs")
    return base_bracket(s, a, b) + algebroid_correction(s, a, b)
