"""Multivector fields and differential forms on a chart.

Both are stored as maps from strictly increasing index tuples to nonzero
:class:`ScalarExpr` coefficients, e.g. ``{(0, 1): 1}`` is ``dx^dy`` (or
``d/dx ^ d/dy``).  Pairings use the determinant convention, so
``(dx^dy)(d/dx, d/dy) = 1``.

The Schouten bracket is built from the Lie bracket of vector fields by the
graded Leibniz rule and graded antisymmetry.  With these conventions, for a
bivector ``L`` and ``{f, g} = L(df, dg)``::

    [L, L](df, dg, dh) = 2 ({f, {g, h}} + {g, {h, f}} + {h, {f, g}})
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations, permutations
from typing import Mapping, Sequence

from .expr import ONE, ZERO, Chart, ScalarExpr, differentiate, is_zero
from .expr.scalar import sum_exprs


class ChartMismatchError(ValueError):
    pass


class VarianceError(TypeError):
    """Mixing multivectors with forms where one kind is required."""


def _sort_sign(idx: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Sign of the permutation sorting ``idx`` and the sorted tuple; sign 0
    when an index repeats."""
    idx = list(idx)
    if len(set(idx)) != len(idx):
        return 0, ()
    sign = 1
    # insertion sort counting transpositions
    for i in range(1, len(idx)):
        j = i
        while j > 0 and idx[j - 1] > idx[j]:
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            sign = -sign
            j -= 1
    return sign, tuple(idx)


@lru_cache(maxsize=None)
def _perm_signs(k: int):
    out = []
    for perm in permutations(range(k)):
        out.append((perm, _sort_sign(perm)[0]))
    return out


def det(rows: Sequence[Sequence[ScalarExpr]]) -> ScalarExpr:
    """Determinant by permutation expansion (small matrices only)."""
    k = len(rows)
    if k == 0:
        return ONE
    total = ZERO
    for perm, sign in _perm_signs(k):
        term = ONE
        for r, c in enumerate(perm):
            term = term * rows[r][c]
            if not term:
                break
        if term:
            total = total + term if sign > 0 else total - term
    return total


class _Alternating:
    """Shared implementation of alternating tensor fields."""

    kind = "alternating"

    __slots__ = ("chart", "degree", "coeffs")

    def __init__(self, chart: Chart, degree: int, coeffs: Mapping | None = None):
        if degree < 0:
            raise ValueError("negative degree")
        self.chart = chart
        self.degree = degree
        clean = {}
        for idx, c in (coeffs or {}).items():
            idx = tuple(idx)
            if len(idx) != degree:
                raise ValueError(f"index {idx} does not have length {degree}")
            if any(not 0 <= i < chart.dim for i in idx):
                raise IndexError(f"index {idx} out of range for dim {chart.dim}")
            sign, key = _sort_sign(idx)
            if sign == 0:
                continue
            c = ScalarExpr.coerce(c)
            if sign < 0:
                c = -c
            total = clean.get(key, ZERO) + c
            if total:
                clean[key] = total
            else:
                clean.pop(key, None)
        self.coeffs = clean

    # construction helpers

    @classmethod
    def zero(cls, chart: Chart, degree: int):
        return cls(chart, degree)

    @classmethod
    def scalar(cls, chart: Chart, f):
        return cls(chart, 0, {(): f})

    @classmethod
    def basis(cls, chart: Chart, *idx: int):
        return cls(chart, len(idx), {idx: ONE})

    @classmethod
    def from_components(cls, chart: Chart, components: Sequence):
        """Degree-1 field from a list of ``dim`` components."""
        if len(components) != chart.dim:
            raise ValueError(f"expected {chart.dim} components, got {len(components)}")
        return cls(chart, 1, {(i,): c for i, c in enumerate(components)})

    def _new(self, degree: int, coeffs: Mapping):
        return type(self)(self.chart, degree, coeffs)

    # access

    def __getitem__(self, idx) -> ScalarExpr:
        """Coefficient for any index order, with the permutation sign."""
        if isinstance(idx, int):
            idx = (idx,)
        sign, key = _sort_sign(idx)
        if sign == 0:
            return ZERO
        c = self.coeffs.get(key, ZERO)
        return c if sign > 0 else -c

    def components(self) -> list[ScalarExpr]:
        if self.degree != 1:
            raise ValueError("components() is only defined in degree 1")
        return [self.coeffs.get((i,), ZERO) for i in range(self.chart.dim)]

    def as_scalar(self) -> ScalarExpr:
        if self.degree != 0:
            raise ValueError("not a degree-0 field")
        return self.coeffs.get((), ZERO)

    def is_zero(self) -> bool:
        return not self.coeffs

    def all_indices(self):
        return combinations(range(self.chart.dim), self.degree)

    # algebra

    def _check(self, other):
        if type(other) is not type(self):
            raise VarianceError(f"cannot combine {type(self).__name__} with {type(other).__name__}")
        if other.chart.names != self.chart.names:
            raise ChartMismatchError(f"charts {self.chart.names} and {other.chart.names} differ")
        if other.degree != self.degree:
            raise ValueError(f"degrees {self.degree} and {other.degree} differ")

    def __add__(self, other):
        self._check(other)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, ZERO) + c
        return self._new(self.degree, out)

    def __neg__(self):
        return self._new(self.degree, {k: -c for k, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, f):
        if isinstance(f, _Alternating):
            return NotImplemented
        f = ScalarExpr.coerce(f)
        return self._new(self.degree, {k: c * f for k, c in self.coeffs.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        return (
            type(other) is type(self)
            and other.chart.names == self.chart.names
            and other.degree == self.degree
            and other.coeffs == self.coeffs
        )

    def __hash__(self):
        return hash((type(self).__name__, self.degree, frozenset(self.coeffs.items())))

    def map(self, fn):
        return self._new(self.degree, {k: fn(c) for k, c in self.coeffs.items()})

    def residual_status(self, **kw) -> dict:
        """Zero test of every coefficient (absent coefficients are exact zeros)."""
        return {k: is_zero(c, self.chart, **kw) for k, c in sorted(self.coeffs.items())}

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for k in sorted(self.coeffs):
            c = self.coeffs[k]
            basis = self._basis_name(k)
            parts.append(_term(c, basis))
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out

    def __repr__(self):
        return f"{type(self).__name__}(deg {self.degree}: {self})"


def _term(c: ScalarExpr, basis: str) -> str:
    if not basis:
        return str(c)
    if c == ONE:
        return basis
    if c == -ONE:
        return f"-{basis}"
    s = str(c)
    if c.is_polynomial and len(c.num) == 1:
        return f"{s}*{basis}"
    return f"({s})*{basis}"


class Multivector(_Alternating):
    """Contravariant alternating field; degree 1 is a vector field."""

    __slots__ = ()

    def _basis_name(self, idx):
        return "^".join(f"d/d{self.chart.names[i]}" for i in idx)

    def apply(self, f: ScalarExpr) -> ScalarExpr:
        """Directional derivative ``X(f)`` of a vector field."""
        if self.degree != 1:
            raise ValueError("apply() needs a vector field")
        return sum_exprs(c * differentiate(f, i) for (i,), c in self.coeffs.items())


class DiffForm(_Alternating):
    """Covariant alternating field; degree 0 is a function."""

    __slots__ = ()

    def _basis_name(self, idx):
        return "^".join(f"d{self.chart.names[i]}" for i in idx)

    @classmethod
    def differential(cls, chart: Chart, f) -> "DiffForm":
        return exterior_derivative(cls.scalar(chart, f))


def _as_field(x, chart: Chart, cls):
    if isinstance(x, _Alternating):
        return x
    return cls.scalar(chart, x)


def vector_field(chart: Chart, components: Sequence) -> Multivector:
    return Multivector.from_components(chart, components)


def one_form(chart: Chart, components: Sequence) -> DiffForm:
    return DiffForm.from_components(chart, components)


# -- exterior algebra -----------------------------------------------------


def wedge(a, b):
    """Exterior product of two multivectors or two forms.

    A bare :class:`ScalarExpr` on either side acts as a degree-0 field.
    """
    if not isinstance(a, _Alternating) and not isinstance(b, _Alternating):
        return ScalarExpr.coerce(a) * ScalarExpr.coerce(b)
    if not isinstance(a, _Alternating):
        return b * a
    if not isinstance(b, _Alternating):
        return a * b
    if type(a) is not type(b):
        raise VarianceError("wedge of a multivector with a form")
    if a.chart.names != b.chart.names:
        raise ChartMismatchError(f"charts {a.chart.names} and {b.chart.names} differ")
    k = a.degree + b.degree
    out: dict = {}
    for i, ca in a.coeffs.items():
        for j, cb in b.coeffs.items():
            sign, key = _sort_sign(i + j)
            if sign == 0:
                continue
            term = ca * cb
            out[key] = out.get(key, ZERO) + (term if sign > 0 else -term)
    return type(a)(a.chart, k, out)


def exterior_derivative(eta: DiffForm) -> DiffForm:
    """``(d eta)_{i0<..<ik} = sum_j (-1)^j d_{ij} eta_{i0..^ij..ik}``."""
    if not isinstance(eta, DiffForm):
        raise VarianceError("exterior derivative needs a DiffForm")
    out: dict = {}
    for idx, c in eta.coeffs.items():
        for i in range(eta.chart.dim):
            if i in idx:
                continue
            dc = differentiate(c, i)
            if not dc:
                continue
            sign, key = _sort_sign((i,) + idx)
            out[key] = out.get(key, ZERO) + (dc if sign > 0 else -dc)
    return DiffForm(eta.chart, eta.degree + 1, out)


def interior_product(x: Multivector, eta: DiffForm) -> DiffForm:
    """``(i(X) eta)(Y1..Y_{k-1}) = eta(X, Y1..Y_{k-1})``."""
    if not isinstance(x, Multivector) or x.degree != 1:
        raise VarianceError("interior product needs a vector field")
    if not isinstance(eta, DiffForm):
        raise VarianceError("interior product acts on a DiffForm")
    if eta.degree == 0:
        raise ValueError("interior product of a degree-0 form")
    out: dict = {}
    for idx, c in eta.coeffs.items():
        for pos, i in enumerate(idx):
            xi = x.coeffs.get((i,))
            if xi is None:
                continue
            rest = idx[:pos] + idx[pos + 1:]
            term = xi * c
            out[rest] = out.get(rest, ZERO) + (term if pos % 2 == 0 else -term)
    return DiffForm(eta.chart, eta.degree - 1, out)


def pair_form(eta: DiffForm, vectors: Sequence[Multivector]) -> ScalarExpr:
    """``eta(X1, .., Xk)`` by determinant expansion over basis tuples."""
    if len(vectors) != eta.degree:
        raise ValueError(f"{eta.degree}-form evaluated on {len(vectors)} vectors")
    if eta.degree == 0:
        return eta.as_scalar()
    comps = [v.components() for v in vectors]
    total = ZERO
    for idx, c in eta.coeffs.items():
        rows = [[comps[b][a] for b in range(len(vectors))] for a in idx]
        total = total + c * det(rows)
    return total


def pair_multivector(p: Multivector, forms: Sequence[DiffForm]) -> ScalarExpr:
    """``P(a1, .., ak)`` for 1-forms ``a1..ak``."""
    if len(forms) != p.degree:
        raise ValueError(f"{p.degree}-vector evaluated on {len(forms)} forms")
    if p.degree == 0:
        return p.as_scalar()
    comps = [f.components() for f in forms]
    total = ZERO
    for idx, c in p.coeffs.items():
        rows = [[comps[b][a] for b in range(len(forms))] for a in idx]
        total = total + c * det(rows)
    return total


# -- Schouten bracket -----------------------------------------------------


def _lie_bracket(x: Multivector, y: Multivector) -> Multivector:
    xs, ys = x.components(), y.components()
    out = {}
    for j in range(x.chart.dim):
        v = sum_exprs(xs[i] * differentiate(ys[j], i) - ys[i] * differentiate(xs[j], i)
                      for i in range(x.chart.dim) if xs[i] or ys[i])
        if v:
            out[(j,)] = v
    return Multivector(x.chart, 1, out)


def _bracket_terms(p: Multivector, q: Multivector) -> Multivector:
    """Bracket of two single-term multivectors ``f d_I`` and ``g d_J``."""
    a, b = p.degree, q.degree
    if a == 1 and b == 0:
        return Multivector.scalar(p.chart, p.apply(q.as_scalar()))
    if a == 1 and b == 1:
        return _lie_bracket(p, q)
    if b >= 2:
        # q = (g d_j1) ^ (d_j2 ^ .. ^ d_jq); [P, A^R] = [P,A]^R + (-1)^{(p-1)} A^[P,R]
        (idx, g), = q.coeffs.items()
        head = Multivector(q.chart, 1, {idx[:1]: g})
        rest = Multivector.basis(q.chart, *idx[1:])
        first = wedge(schouten(p, head), rest)
        second = wedge(head, schouten(p, rest))
        return first + second if (a - 1) % 2 == 0 else first - second
    # remaining cases have b <= 1: swap with [P,Q] = -(-1)^{(p-1)(q-1)} [Q,P]
    swapped = schouten(q, p)
    return -swapped if ((a - 1) * (b - 1)) % 2 == 0 else swapped


def _single_terms(p: Multivector):
    for idx, c in p.coeffs.items():
        yield Multivector(p.chart, p.degree, {idx: c})


def schouten(p: Multivector, q: Multivector) -> Multivector:
    """Schouten-Nijenhuis bracket of a ``p``-vector and a ``q``-vector.

    Computed term by term from the Lie bracket of vector fields, ``[X, f] =
    X(f)``, the graded Leibniz rule in the second slot and graded
    antisymmetry.  The result has degree ``p + q - 1``.
    """
    if not isinstance(p, Multivector) or not isinstance(q, Multivector):
        raise VarianceError("Schouten bracket needs multivectors")
    if p.chart.names != q.chart.names:
        raise ChartMismatchError(f"charts {p.chart.names} and {q.chart.names} differ")
    deg = p.degree + q.degree - 1
    if deg < 0:
        raise ValueError("Schouten bracket of two functions is undefined")
    total = Multivector.zero(p.chart, deg)
    for s in _single_terms(p):
        for t in _single_terms(q):
            total = total + _bracket_terms(s, t)
    return total


def lie_derivative(x: Multivector, p: Multivector) -> Multivector:
    """Lie derivative of a multivector along a vector field, ``[X, P]``."""
    if x.degree != 1:
        raise ValueError("Lie derivative needs a vector field")
    return schouten(x, p)


# -- sharp maps -----------------------------------------------------------


def sharp(lam: Multivector, alpha: DiffForm) -> Multivector:
    """``Lambda^#(alpha)``, characterized by ``<beta, Lambda^# alpha> =
    Lambda(alpha, beta)``."""
    if lam.degree != 2 or alpha.degree != 1:
        raise ValueError("sharp needs a bivector and a 1-form")
    n = lam.chart.dim
    a = alpha.components()
    comps = [sum_exprs(a[i] * lam[i, j] for i in range(n) if a[i]) for j in range(n)]
    return Multivector.from_components(lam.chart, comps)


def _coframe_sharps(lam: Multivector) -> tuple:
    return _coframe_sharps_cached(lam, lam.chart)


@lru_cache(maxsize=256)
def _coframe_sharps_cached(lam: Multivector, chart: Chart) -> tuple:
    return tuple(sharp(lam, DiffForm.basis(chart, i)) for i in range(chart.dim))


def sharp_ext(lam: Multivector, eta: DiffForm) -> Multivector:
    """Extension of ``Lambda^#`` to k-forms:
    ``Lambda^#(eta)(a1..ak) = (-1)^k eta(Lambda^# a1, .., Lambda^# ak)``."""
    k = eta.degree
    if k < 1:
        raise ValueError("sharp_ext needs a form of degree >= 1")
    if not eta.coeffs or not lam.coeffs:
        return Multivector.zero(lam.chart, k)
    frames = _coframe_sharps(lam)
    sign = -1 if k % 2 else 1
    out = {}
    for idx in combinations(range(lam.chart.dim), k):
        v = pair_form(eta, [frames[i] for i in idx])
        if v:
            out[idx] = v * sign
    return Multivector(lam.chart, k, out)


class MixedContraction:
    """Section of ``(wedge^p TM) (x) T*M``: coefficients keyed by a strictly
    increasing ``p``-tuple and one covariant index."""

    def __init__(self, chart: Chart, p: int, coeffs: Mapping):
        self.chart = chart
        self.p = p
        self.coeffs = {k: c for k, c in coeffs.items() if c}

    def contract(self, x: Multivector) -> Multivector:
        """Feed a vector field to the covariant slot."""
        xs = x.components()
        out: dict = {}
        for (idx, c), v in self.coeffs.items():
            if xs[c]:
                out[idx] = out.get(idx, ZERO) + v * xs[c]
        return Multivector(self.chart, self.p, out)


def sharp_tensor_one(lam: Multivector, eta: DiffForm) -> MixedContraction:
    """``(Lambda^# (x) 1)(eta)`` with
    ``(a1..a_{k-1})(X) -> (-1)^k eta(Lambda^# a1, .., Lambda^# a_{k-1}, X)``."""
    k = eta.degree
    if k < 1:
        raise ValueError("(Lambda^# (x) 1) needs a form of degree >= 1")
    chart = lam.chart
    frames = _coframe_sharps(lam)
    sign = -1 if k % 2 else 1
    out = {}
    for idx in combinations(range(chart.dim), k - 1):
        for c in range(chart.dim):
            v = pair_form(eta, [frames[i] for i in idx] + [Multivector.basis(chart, c)])
            if v:
                out[(idx, c)] = v * sign
    return MixedContraction(chart, k - 1, out)


def sharp_tensor_one_at(lam: Multivector, eta: DiffForm, x: Multivector) -> Multivector:
    """``(Lambda^# (x) 1)(eta)(X)`` as a degree ``k-1`` multivector."""
    return sharp_tensor_one(lam, eta).contract(x)
