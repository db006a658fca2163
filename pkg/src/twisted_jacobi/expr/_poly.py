"""Sparse multivariate polynomials over the rationals.

A polynomial is a plain ``dict`` mapping monomials to nonzero ``Fraction``
coefficients.  A monomial is a tuple of ``(generator, exponent)`` pairs sorted
by ``generator.key`` with strictly positive exponents; the empty tuple is the
unit monomial.  Generators only need ``key`` (a totally ordered tuple) and
value-based hashing.

The helpers here never mutate their arguments.
"""

from __future__ import annotations

from fractions import Fraction
from functools import cmp_to_key, lru_cache

from sympy import QQ
from sympy.polys.rings import ring

ONE_MONO: tuple = ()


def _gen_key(pair):
    return pair[0].key


@lru_cache(maxsize=65536)
def mono_mul(a: tuple, b: tuple) -> tuple:
    if not a:
        return b
    if not b:
        return a
    merged = dict(a)
    for g, e in b:
        merged[g] = merged.get(g, 0) + e
    return tuple(sorted(merged.items(), key=_gen_key))


def mono_degree(m: tuple) -> int:
    return sum(e for _, e in m)


def _mono_cmp(a: tuple, b: tuple) -> int:
    # graded lexicographic with earlier generators dominating
    da, db = mono_degree(a), mono_degree(b)
    if da != db:
        return -1 if da < db else 1
    for (ga, ea), (gb, eb) in zip(a, b):
        if ga != gb:
            return 1 if ga.key < gb.key else -1
        if ea != eb:
            return -1 if ea < eb else 1
    return (len(a) > len(b)) - (len(a) < len(b))


mono_sort_key = cmp_to_key(_mono_cmp)


def constant(c) -> dict:
    c = Fraction(c)
    return {ONE_MONO: c} if c else {}


def add(p: dict, q: dict) -> dict:
    if len(p) < len(q):
        p, q = q, p
    out = dict(p)
    for m, c in q.items():
        s = out.get(m, 0) + c
        if s:
            out[m] = s
        else:
            out.pop(m, None)
    return out


def neg(p: dict) -> dict:
    return {m: -c for m, c in p.items()}


def sub(p: dict, q: dict) -> dict:
    return add(p, neg(q))


def scale(p: dict, c) -> dict:
    if not c:
        return {}
    return {m: v * c for m, v in p.items()}


def mul(p: dict, q: dict) -> dict:
    if not p or not q:
        return {}
    if len(p) == 1 and ONE_MONO in p:
        return scale(q, p[ONE_MONO])
    if len(q) == 1 and ONE_MONO in q:
        return scale(p, q[ONE_MONO])
    out: dict = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            m = mono_mul(m1, m2)
            s = out.get(m, 0) + c1 * c2
            if s:
                out[m] = s
            else:
                out.pop(m, None)
    return out


def power(p: dict, n: int) -> dict:
    if n < 0:
        raise ValueError("negative power of a polynomial")
    result = constant(1)
    base = p
    while n:
        if n & 1:
            result = mul(result, base)
        n >>= 1
        if n:
            base = mul(base, base)
    return result


def is_constant(p: dict) -> bool:
    return not p or (len(p) == 1 and ONE_MONO in p)


def constant_value(p: dict) -> Fraction:
    return p.get(ONE_MONO, Fraction(0))


def generators(p: dict) -> set:
    return {g for m in p for g, _ in m}


def partial(p: dict, gen) -> dict:
    """Formal derivative with respect to one generator."""
    out: dict = {}
    for m, c in p.items():
        for pos, (g, e) in enumerate(m):
            if g == gen:
                if e == 1:
                    rest = m[:pos] + m[pos + 1:]
                else:
                    rest = m[:pos] + ((g, e - 1),) + m[pos + 1:]
                out[rest] = out.get(rest, 0) + c * e
                break
    return {m: c for m, c in out.items() if c}


def leading(p: dict):
    m = max(p, key=mono_sort_key)
    return m, p[m]


def sorted_terms(p: dict) -> list:
    return sorted(p.items(), key=lambda t: mono_sort_key(t[0]), reverse=True)


# -- cancellation ---------------------------------------------------------


@lru_cache(maxsize=None)
def _ring(n: int):
    names = ",".join(f"g{i}" for i in range(n))
    return ring(names, QQ)[0]


def _to_ring(p: dict, index: dict, R):
    n = len(index)
    terms = {}
    for m, c in p.items():
        exps = [0] * n
        for g, e in m:
            exps[index[g]] = e
        terms[tuple(exps)] = QQ(c.numerator, c.denominator)
    return R.from_dict(terms)


def _from_ring(P, gens: list) -> dict:
    out = {}
    for exps, c in P.terms():
        m = tuple((gens[i], e) for i, e in enumerate(exps) if e)
        out[m] = Fraction(int(c.numerator), int(c.denominator))
    return out


def _monomial_gcd(p: dict) -> tuple:
    it = iter(p)
    common = dict(next(it))
    for m in it:
        if not common:
            break
        powers = dict(m)
        for g in list(common):
            e = powers.get(g, 0)
            if e == 0:
                del common[g]
            else:
                common[g] = min(common[g], e)
    return tuple(sorted(common.items(), key=_gen_key))


def _mono_div(m: tuple, d: tuple) -> tuple:
    powers = dict(m)
    for g, e in d:
        powers[g] -= e
    return tuple((g, e) for g, e in sorted(powers.items(), key=_gen_key) if e)


def _divide_monomial(p: dict, d: tuple) -> dict:
    if not d:
        return p
    return {_mono_div(m, d): c for m, c in p.items()}


def cancel(num: dict, den: dict) -> tuple[dict, dict]:
    """Reduce ``num/den`` to lowest terms with a denominator whose leading
    coefficient is 1.  ``den`` must be nonzero."""
    if not num:
        return {}, constant(1)
    if is_constant(den):
        return scale(num, 1 / constant_value(den)), constant(1)
    if len(den) == 1:
        common = _monomial_gcd({**num, **den})
        num, den = _divide_monomial(num, common), _divide_monomial(den, common)
    else:
        gens = sorted(generators(num) | generators(den), key=lambda g: g.key)
        index = {g: i for i, g in enumerate(gens)}
        R = _ring(len(gens))
        P, Q = _to_ring(num, index, R), _to_ring(den, index, R)
        g = P.gcd(Q)
        if not g.is_ground:
            P, Q = P.exquo(g), Q.exquo(g)
            num, den = _from_ring(P, gens), _from_ring(Q, gens)
    lc = leading(den)[1]
    if lc != 1:
        num, den = scale(num, 1 / lc), scale(den, 1 / lc)
    return num, den
