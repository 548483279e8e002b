"""Dense exact linear algebra over the rationals for small systems.

Everything here is deterministic: pivots are chosen by first nonzero entry,
free variables are set to zero, bases come out in a canonical order.
"""

from __future__ import annotations

from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .rationals import QVector

Matrix = List[List[Fraction]]


def _copy(rows: Sequence[Sequence[Fraction]]) -> Matrix:
    return [list(r) for r in rows]


def rref(rows: Sequence[Sequence[Fraction]]) -> Tuple[Matrix, List[int]]:
    """Reduced row echelon form and the list of pivot columns."""
    m = _copy(rows)
    if not m:
        return m, []
    nrows, ncols = len(m), len(m[0])
    pivots: List[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        pivot_row = next((i for i in range(r, nrows) if m[i][c] != 0), None)
        if pivot_row is None:
            continue
        m[r], m[pivot_row] = m[pivot_row], m[r]
        inv = Fraction(1) / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(nrows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    return m, pivots


def rank(vectors: Sequence[QVector]) -> int:
    rows = [list(v) for v in vectors if any(x != 0 for x in v)]
    if not rows:
        return 0
    _, pivots = rref(rows)
    return len(pivots)


def solve(a_rows: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> Optional[List[Fraction]]:
    """One exact solution of A x = b (free variables zero), or None if inconsistent."""
    nrows = len(a_rows)
    ncols = len(a_rows[0]) if nrows else 0
    aug = [list(a_rows[i]) + [b[i]] for i in range(nrows)]
    red, pivots = rref(aug)
    for row in red:
        if all(x == 0 for x in row[:-1]) and row[-1] != 0:
            return None
    x = [Fraction(0)] * ncols
    for r, c in enumerate(pivots):
        if c == ncols:  # pivot in the augmented column: inconsistent (caught above)
            return None
        x[c] = red[r][-1]
    return x


def nullspace(a_rows: Sequence[Sequence[Fraction]], ncols: int) -> List[QVector]:
    """Canonical basis of {x : A x = 0} (free variables set to unit vectors)."""
    rows = [list(r) for r in a_rows if any(v != 0 for v in r)]
    if not rows:
        return [tuple(Fraction(1) if j == i else Fraction(0) for j in range(ncols))
                for i in range(ncols)]
    red, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis: List[QVector] = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for r, c in enumerate(pivots):
            v[c] = -red[r][f]
        basis.append(tuple(v))
    return basis


def mat_vec(rows: Sequence[Sequence[Fraction]], v: Sequence[Fraction]) -> List[Fraction]:
    return [sum((a * x for a, x in zip(row, v)), Fraction(0)) for row in rows]


def is_positive_definite(gram: Sequence[Sequence[Fraction]]) -> bool:
    """Sylvester's criterion via symmetric elimination: all pivots positive."""
    n = len(gram)
    m = _copy(gram)
    for k in range(n):
        if m[k][k] <= 0:
            return False
        for i in range(k + 1, n):
            f = m[i][k] / m[k][k]
            for j in range(k, n):
                m[i][j] -= f * m[k][j]
    return True
