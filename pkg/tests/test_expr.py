import math
import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import random_poly
from twisted_jacobi.expr import (
    ONE,
    ZERO,
    Chart,
    DomainError,
    EvaluationError,
    ParseError,
    SamplingError,
    ScalarExpr,
    UnknownIdentifierError,
    Zero,
    cos,
    differentiate,
    evaluate,
    exp,
    is_zero,
    parse,
    parse_tree,
    sin,
)

XY = Chart(("x", "y"))
XYZ = Chart(("x", "y", "z"))


def p(text, chart=XY):
    return parse(text, chart)


# -- parsing -------------------------------------------------------------


def test_parse_tree_shape():
    assert str(parse_tree("3/2 * x^2 + sin(y)", XY)) == "Sum(Prod(3/2, x^2), sin(y))"


def test_syntax_error_offset():
    with pytest.raises(ParseError) as info:
        parse("x +", Chart(("x",)))
    assert info.value.position == 3
    assert "offset 3" in str(info.value)


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifierError):
        parse("w", XY)


@pytest.mark.parametrize("text", ["x ^ y", "sin x", "(x", "x)", "2 3", "tan(x)", "x^1.5", "x $ y", ""])
def test_malformed(text):
    with pytest.raises(ParseError):
        parse(text, XY)


def test_decimal_literals_are_exact():
    assert p("0.5*x") == p("x/2")
    assert p("1.25") == ScalarExpr.const(Fraction(5, 4))


def test_unary_minus_binds_to_base():
    # '-' base, then '^': (-x)^2
    assert p("-x^2") == p("x^2")
    assert p("-(x^2)") == -p("x^2")


def test_whitespace_insignificant():
    assert p(" x*y +\t1 ") == p("x*y+1")


def test_negative_exponent():
    assert p("x^-2") == 1 / (p("x") ** 2)


# -- canonical form ------------------------------------------------------


def test_canonical_equality():
    assert p("(x+1)^2") == p("x^2 + 2*x + 1")
    assert p("(x^2 - 1)/(x - 1)") == p("x + 1")
    assert p("x/(2*x)") == ScalarExpr.const(Fraction(1, 2))


def test_atoms_keyed_by_canonical_argument():
    assert p("sin(x + x)") == p("sin(2*x)")
    assert p("exp(x)*exp(x)") == p("exp(x)^2")
    assert p("sin(0)") == ZERO and p("cos(0)") == ONE and p("exp(0)") == ONE


@pytest.mark.parametrize(
    "text",
    ["3/2*x^2 + sin(y)", "-x", "x/(1 + x)", "-y/(x + 1)", "exp(-x)*(x - y)", "x^-2 - 1/3", "cos(x*y)^2/(y^2 + 1)", "0", "-7/3"],
)
def test_print_parse_round_trip_examples(text):
    e = p(text)
    assert p(str(e)) == e


def _sympy(e, names):
    return sympy.sympify(str(e).replace("^", "**"), locals={n: sympy.Symbol(n) for n in names})


def test_arithmetic_against_sympy():
    rng = random.Random(7)
    syms = {n: sympy.Symbol(n) for n in XYZ.names}
    for _ in range(40):
        a = random_poly(rng, XYZ, 3, 4)
        b = random_poly(rng, XYZ, 2, 3) + 1
        for got in (a * b, a - b, a / b, a ** 2):
            ref = sympy.sympify(str(got).replace("^", "**"), locals=syms)
            assert _sympy(got, XYZ.names) == ref
        diff = sympy.simplify(_sympy(a / b, XYZ.names) - _sympy(a, XYZ.names) / _sympy(b, XYZ.names))
        assert diff == 0


# -- differentiation -----------------------------------------------------


def test_derivative_examples():
    assert differentiate(p("x^2*y"), 0) == p("2*x*y")
    assert differentiate(p("sin(x)"), 0) == p("cos(x)")
    assert differentiate(p("x/(1+x)"), 1) == ZERO
    assert differentiate(p("exp(x*y)"), 1) == p("x*exp(x*y)")
    assert differentiate(p("x/(1+x)"), 0) == p("1/(1+x)^2")


def test_derivative_against_sympy():
    rng = random.Random(3)
    syms = [sympy.Symbol(n) for n in XYZ.names]
    for _ in range(30):
        e = random_poly(rng, XYZ, 3, 4) / (random_poly(rng, XYZ, 1, 2) + 2)
        for i in range(3):
            ref = sympy.diff(_sympy(e, XYZ.names), syms[i])
            assert sympy.simplify(_sympy(differentiate(e, i), XYZ.names) - ref) == 0


# -- zero testing --------------------------------------------------------


def test_zero_test_examples():
    assert is_zero(p("(x+1)^2 - x^2 - 2*x - 1")).status is Zero.EXACT
    assert is_zero(p("sin(x)^2 + cos(x)^2 - 1")).status is Zero.PROBABLE
    r = is_zero(p("x*y - 1"))
    assert r.status is Zero.NONZERO
    assert r.witness == (0, 0)
    assert r.value == -1


def test_zero_test_never_upgrades_transcendental():
    r = is_zero(p("exp(x)*exp(-x) - 1"))
    assert r.status is Zero.PROBABLE
    assert "ProbablyZero" in str(r)


def test_nonzero_witness_really_is_nonzero():
    rng = random.Random(11)
    for _ in range(20):
        e = random_poly(rng, XY, 2, 3)
        if not e:
            continue
        r = is_zero(e, XY)
        assert r.status is Zero.NONZERO
        assert abs(evaluate(e, r.witness)) > 1e-9


def test_transcendental_nonzero_has_witness():
    e = p("sin(x) - x")
    r = is_zero(e, XY)
    assert r.status is Zero.NONZERO
    assert abs(evaluate(e, r.witness)) > 1e-9


def test_sampling_is_seeded():
    e = p("sin(x*y) - x*y")
    assert is_zero(e, XY, seed=4).witness == is_zero(e, XY, seed=4).witness


def test_sampling_failure():
    # a constraint that is zero everywhere rejects every sample point
    x = Chart(("x",)).coordinate(0)
    chart = Chart(("x",), (x - x,))
    with pytest.raises(SamplingError):
        is_zero(sin(x) - x, chart)


# -- evaluation ----------------------------------------------------------


def test_evaluate_examples():
    e = p("x/(1+x)", Chart(("x",)))
    assert evaluate(e, (1,)) == Fraction(1, 2)
    assert isinstance(evaluate(e, (1,)), Fraction)
    with pytest.raises(EvaluationError):
        evaluate(e, (-1,))
    assert evaluate(p("exp(0)"), (0, 0)) == 1


def test_evaluate_float_path():
    v = evaluate(p("sin(x)"), (0.5, 0))
    assert isinstance(v, float) and v == pytest.approx(math.sin(0.5))


def test_evaluate_respects_constraints():
    chart = Chart(("x",)).with_constraints(p("1 + x", Chart(("x",))))
    with pytest.raises(DomainError):
        evaluate(chart.coordinate(0), (-1,), chart)


def test_compile_matches_evaluate():
    e = p("sin(x)*exp(y)/(1 + x^2) - 2/3*y")
    fn = e.compile()
    for pt in [(0.1, 0.2), (-0.7, 0.4), (1.5, -2.0)]:
        assert fn(pt) == pytest.approx(float(evaluate(e, pt)), rel=1e-12)


# -- properties ----------------------------------------------------------

coeff = st.fractions(min_value=-5, max_value=5, max_denominator=4)
monomial = st.tuples(coeff, st.integers(0, 3), st.integers(0, 3))


@st.composite
def polys(draw, max_terms=4):
    x, y = XY.coordinates()
    total = ZERO
    for c, a, b in draw(st.lists(monomial, max_size=max_terms)):
        total = total + c * x ** a * y ** b
    return total


@st.composite
def rational_exprs(draw):
    num = draw(polys())
    den = draw(polys(max_terms=2)) + draw(st.sampled_from([1, 2, 3]))
    if not den:
        den = ONE
    return num / den


@st.composite
def mixed_exprs(draw):
    """Rational expressions with sin/cos/exp atoms of polynomial arguments."""
    base = draw(rational_exprs())
    f = draw(st.sampled_from([sin, cos, exp]))
    arg = draw(polys(max_terms=2))
    return base * f(arg) + draw(polys(max_terms=2))


@settings(max_examples=200, deadline=None)
@given(polys(), polys())
def test_multiplication_commutes(a, b):
    assert is_zero(a * b - b * a, XY).status is Zero.EXACT


@settings(max_examples=100, deadline=None)
@given(rational_exprs(), rational_exprs(), st.sampled_from([0, 1]))
def test_product_rule(a, b, i):
    r = differentiate(a * b, i) - a * differentiate(b, i) - b * differentiate(a, i)
    assert is_zero(r, XY).status is Zero.EXACT


@settings(max_examples=150, deadline=None)
@given(st.one_of(rational_exprs(), mixed_exprs()))
def test_parse_print_round_trip(e):
    assert parse(str(e), XY) == e


@settings(max_examples=100, deadline=None)
@given(polys(), polys(), coeff)
def test_derivative_is_linear(a, b, c):
    assert differentiate(a + c * b, 0) == differentiate(a, 0) + c * differentiate(b, 0)


def test_derivative_matches_finite_difference():
    rng = random.Random(2024)
    h = 1e-5
    checked = 0
    x, y = XY.coordinates()
    exprs = [
        sin(x * y) * exp(x) / (1 + x ** 2),
        cos(x - y) ** 2 + x ** 3 * y,
        exp(-x) * (x - y) / (y ** 2 + 2),
        sin(exp(y)) - x / (3 + x * y),
        (x ** 2 + 1) ** 3 * cos(x),
    ]
    while checked < 50:
        e = exprs[checked % len(exprs)]
        pt = [rng.uniform(-1, 1), rng.uniform(-1, 1)]
        i = rng.randrange(2)
        up, down = list(pt), list(pt)
        up[i] += h
        down[i] -= h
        fd = (float(evaluate(e, up)) - float(evaluate(e, down))) / (2 * h)
        exact = float(evaluate(differentiate(e, i), pt))
        assert abs(fd - exact) <= 1e-6 * max(1.0, abs(exact))
        checked += 1
