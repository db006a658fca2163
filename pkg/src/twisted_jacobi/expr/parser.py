"""Recursive-descent parser for the expression grammar::

    expr     := term (('+'|'-') term)*
    term     := factor (('*'|'/') factor)*
    factor   := base ('^' integer)?
    base     := rational | identifier | func '(' expr ')' | '(' expr ')' | '-' base
    func     := 'sin' | 'cos' | 'exp'
    rational := integer ('/' positive-integer)? | decimal

A rational literal is read greedily, so ``x/2/3`` is ``x / (2/3)``.  Note
also that ``-x^2`` is ``(-x)^2`` because negation binds inside ``base``.
The exponent may carry a leading minus sign.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .scalar import APPLY, FUNCTIONS, Chart, ScalarExpr


class ParseError(ValueError):
    """Syntax error; ``position`` is the character offset of the problem."""

    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        super().__init__(f"{message} at offset {position}")


class UnknownIdentifierError(ParseError):
    pass


# -- syntax tree ----------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: Fraction

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class Var:
    name: str
    index: int

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Sum:
    terms: tuple

    def __str__(self):
        return f"Sum({', '.join(map(str, self.terms))})"


@dataclass(frozen=True)
class Neg:
    arg: object

    def __str__(self):
        return f"Neg({self.arg})"


@dataclass(frozen=True)
class Prod:
    factors: tuple

    def __str__(self):
        return f"Prod({', '.join(map(str, self.factors))})"


@dataclass(frozen=True)
class Quot:
    num: object
    den: object

    def __str__(self):
        return f"Quot({self.num}, {self.den})"


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: int

    def __str__(self):
        return f"{self.base}^{self.exponent}"


@dataclass(frozen=True)
class Func:
    name: str
    arg: object

    def __str__(self):
        return f"{self.name}({self.arg})"


# -- tokenizer ------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<decimal>\d+\.\d*|\.\d+)|(?P<int>\d+)|(?P<ident>[A-Za-z][A-Za-z0-9_]*)|(?P<op>[-+*/^()]))"
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if m is None or m.lastgroup is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        start = m.start(kind)
        toks.append(_Tok(kind, m.group(kind), start))
        pos = m.end()
    toks.append(_Tok("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, chart: Chart):
        self.text = text
        self.chart = chart
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.peek()
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        return ParseError(f"{msg}, found {found}", tok.pos, self.text)

    def expect_op(self, op: str):
        tok = self.peek()
        if tok.kind != "op" or tok.text != op:
            raise self.error(f"expected {op!r}")
        return self.take()

    def parse(self):
        node = self.expr()
        if self.peek().kind != "end":
            raise self.error("unexpected token")
        return node

    def expr(self):
        terms = [self.term()]
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.take().text
            t = self.term()
            terms.append(t if op == "+" else Neg(t))
        return terms[0] if len(terms) == 1 else Sum(tuple(terms))

    def term(self):
        node = self.factor()
        factors = [node]
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.take().text
            f = self.factor()
            if op == "*":
                factors.append(f)
            else:
                left = factors[0] if len(factors) == 1 else Prod(tuple(factors))
                factors = [Quot(left, f)]
        return factors[0] if len(factors) == 1 else Prod(tuple(factors))

    def factor(self):
        base = self.base()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.take()
            sign = 1
            if self.peek().kind == "op" and self.peek().text == "-":
                self.take()
                sign = -1
            tok = self.peek()
            if tok.kind != "int":
                raise self.error("expected integer exponent")
            self.take()
            return Pow(base, sign * int(tok.text))
        return base

    def base(self):
        tok = self.peek()
        if tok.kind == "int":
            self.take()
            value = Fraction(int(tok.text))
            nxt, after = self.toks[self.i], self.toks[self.i + 1] if self.i + 1 < len(self.toks) else None
            if nxt.kind == "op" and nxt.text == "/" and after is not None and after.kind == "int":
                if int(after.text) == 0:
                    raise ParseError("zero denominator in rational literal", after.pos, self.text)
                self.i += 2
                value /= int(after.text)
            return Const(value)
        if tok.kind == "decimal":
            self.take()
            return Const(Fraction(tok.text))
        if tok.kind == "ident":
            self.take()
            if tok.text in FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Func(tok.text, arg)
            if tok.text not in self.chart.names:
                raise UnknownIdentifierError(f"unknown identifier {tok.text!r}", tok.pos, self.text)
            return Var(tok.text, self.chart.index(tok.text))
        if tok.kind == "op" and tok.text == "(":
            self.take()
            node = self.expr()
            self.expect_op(")")
            return node
        if tok.kind == "op" and tok.text == "-":
            self.take()
            return Neg(self.base())
        raise self.error("expected a number, identifier, function or '('")


def parse_tree(text: str, chart: Chart):
    """Parse ``text`` into a syntax tree without canonicalizing."""
    return _Parser(text, chart).parse()


def build(node) -> ScalarExpr:
    """Canonical :class:`ScalarExpr` for a syntax tree."""
    if isinstance(node, Const):
        return ScalarExpr.const(node.value)
    if isinstance(node, Var):
        return ScalarExpr.coordinate(node.index, node.name)
    if isinstance(node, Sum):
        total = build(node.terms[0])
        for t in node.terms[1:]:
            total = total + build(t)
        return total
    if isinstance(node, Neg):
        return -build(node.arg)
    if isinstance(node, Prod):
        total = build(node.factors[0])
        for f in node.factors[1:]:
            total = total * build(f)
        return total
    if isinstance(node, Quot):
        return build(node.num) / build(node.den)
    if isinstance(node, Pow):
        return build(node.base) ** node.exponent
    if isinstance(node, Func):
        return APPLY[node.name](build(node.arg))
    raise TypeError(f"unknown node {node!r}")


def parse(text: str, chart: Chart) -> ScalarExpr:
    """Parse an expression over ``chart`` into canonical form.

    Raises :class:`ParseError` (with ``position``) on malformed input and
    :class:`UnknownIdentifierError` for names that are neither coordinates nor
    functions.  Division by an expression that is identically zero raises
    ``ZeroDivisionError``.
    """
    return build(parse_tree(text, chart))
