"""Exact linear algebra over the field of :class:`ScalarExpr`.

Elimination is fraction-free (Bareiss): every update is an exact division by
the previous pivot, which keeps polynomial entries polynomial.  A pivot is
taken to be nonzero when it is not identically zero; for entries with
transcendental atoms that is decided by :func:`~twisted_jacobi.expr.is_zero`
on the supplied chart.
"""

from __future__ import annotations

from typing import Sequence

from .expr import ONE, ZERO, Chart, ScalarExpr, is_zero


class SingularSystemError(ArithmeticError):
    """The coefficient matrix does not have full column rank."""


class InconsistentSystemError(ArithmeticError):
    """The linear system has no solution."""


def _nonzero(e: ScalarExpr, chart: Chart | None) -> bool:
    if not e.num:
        return False
    if e.is_rational:
        return True
    return not is_zero(e, chart).vanishes


def _pick(rows, col: int, start: int, chart):
    best = None
    for r in range(start, len(rows)):
        e = rows[r][col]
        if _nonzero(e, chart) and (best is None or e.n_terms() < rows[best][col].n_terms()):
            best = r
    return best


def echelon(matrix: Sequence[Sequence[ScalarExpr]], chart: Chart | None = None, ncols: int | None = None):
    """Fraction-free row echelon form.

    Only the first ``ncols`` columns are eligible as pivot columns (the rest
    are carried along, e.g. right-hand sides).  Returns ``(rows, pivots)``.
    """
    rows = [[ScalarExpr.coerce(v) for v in row] for row in matrix]
    if not rows:
        return rows, []
    width = len(rows[0])
    ncols = width if ncols is None else ncols
    pivots = []
    prev = ONE
    r = 0
    for c in range(ncols):
        if r == len(rows):
            break
        p = _pick(rows, c, r, chart)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        piv = rows[r][c]
        for i in range(r + 1, len(rows)):
            a = rows[i][c]
            new = [ZERO] * width
            for j in range(c + 1, width):
                v = piv * rows[i][j] - a * rows[r][j]
                new[j] = v / prev if prev != ONE else v
            rows[i] = new
        pivots.append(c)
        prev = piv
        r += 1
    return rows, pivots


def rank(matrix: Sequence[Sequence[ScalarExpr]], chart: Chart | None = None) -> int:
    """Generic (symbolic) rank."""
    return len(echelon(matrix, chart)[1])


def determinant(matrix: Sequence[Sequence[ScalarExpr]], chart: Chart | None = None) -> ScalarExpr:
    n = len(matrix)
    if n == 0:
        return ONE
    rows = [[ScalarExpr.coerce(v) for v in row] for row in matrix]
    sign = 1
    prev = ONE
    for c in range(n):
        p = _pick(rows, c, c, chart)
        if p is None:
            return ZERO
        if p != c:
            rows[c], rows[p] = rows[p], rows[c]
            sign = -sign
        piv = rows[c][c]
        for i in range(c + 1, n):
            a = rows[i][c]
            for j in range(c + 1, n):
                rows[i][j] = (piv * rows[i][j] - a * rows[c][j]) / prev
            rows[i][c] = ZERO
        prev = piv
    return rows[-1][-1] if sign > 0 else -rows[-1][-1]


def solve(matrix: Sequence[Sequence[ScalarExpr]], rhs: Sequence[Sequence[ScalarExpr]],
          chart: Chart | None = None) -> list[list[ScalarExpr]]:
    """Solve ``matrix @ X = rhs`` for a matrix with full column rank.

    ``rhs`` is a list of right-hand-side columns; the result is the list of
    solution columns.  Overdetermined systems are allowed and are checked for
    consistency.
    """
    m = len(matrix)
    n = len(matrix[0]) if m else 0
    k = len(rhs)
    aug = [list(matrix[i]) + [col[i] for col in rhs] for i in range(m)]
    rows, pivots = echelon(aug, chart, ncols=n)
    if len(pivots) < n:
        raise SingularSystemError(f"coefficient matrix has generic rank {len(pivots)} < {n}")
    for i in range(n, m):
        for j in range(n, n + k):
            if _nonzero(rows[i][j], chart):
                raise InconsistentSystemError(f"equation {i} is not satisfied: residual {rows[i][j]}")
    solutions = []
    for j in range(n, n + k):
        x = [ZERO] * n
        for i in range(n - 1, -1, -1):
            acc = rows[i][j]
            for t in range(i + 1, n):
                if rows[i][t]:
                    acc = acc - rows[i][t] * x[t]
            x[i] = acc / rows[i][i]
        solutions.append(x)
    return solutions
