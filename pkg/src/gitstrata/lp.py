"""Exact two-phase simplex over the rationals.

Equality standard form: maximise c.x subject to A x = b, x >= 0.
Bland's rule keeps the pivoting deterministic and cycle-free; everything
is Fraction arithmetic, so feasibility and optimality are exact decisions.
Sizes here are tiny (tens of rows), no effort is spent on sparsity.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence


@dataclass
class LpResult:
    feasible: bool
    bounded: bool
    value: Optional[Fraction]
    solution: Optional[List[Fraction]]


def _pivot(tab: List[List[Fraction]], basis: List[int], row: int, col: int) -> None:
    piv = tab[row][col]
    tab[row] = [x / piv for x in tab[row]]
    for i, r in enumerate(tab):
        if i != row and r[col] != 0:
            f = r[col]
            tab[i] = [a - f * b for a, b in zip(r, tab[row])]
    basis[row] = col


def _optimise(tab: List[List[Fraction]], basis: List[int], nvars: int) -> bool:
    """Run simplex on the tableau (last row = objective, maximisation).

    Returns False when unbounded.  Bland's rule: entering variable is the
    smallest index with positive reduced cost, leaving row is the smallest
    basis index among the minimising ratios.
    """
    while True:
        obj = tab[-1]
        col = next((j for j in range(nvars) if obj[j] > 0), None)
        if col is None:
            return True
        best_row = None
        best_ratio: Optional[Fraction] = None
        for i in range(len(tab) - 1):
            if tab[i][col] > 0:
                ratio = tab[i][-1] / tab[i][col]
                if (best_ratio is None or ratio < best_ratio
                        or (ratio == best_ratio and basis[i] < basis[best_row])):
                    best_row, best_ratio = i, ratio
        if best_row is None:
            return False
        _pivot(tab, basis, best_row, col)


def simplex_max(a_rows: Sequence[Sequence[Fraction]], b: Sequence[Fraction],
                c: Sequence[Fraction]) -> LpResult:
    """Maximise c.x subject to A x = b, x >= 0, exactly."""
    m = len(a_rows)
    n = len(c)
    rows = [list(r) for r in a_rows]
    rhs = list(b)
    for i in range(m):
        if rhs[i] < 0:
            rows[i] = [-x for x in rows[i]]
            rhs[i] = -rhs[i]

    # Phase I: artificial variables, maximise -sum(artificials).
    total = n + m
    tab: List[List[Fraction]] = []
    basis: List[int] = []
    for i in range(m):
        row = rows[i] + [Fraction(1) if j == i else Fraction(0) for j in range(m)] + [rhs[i]]
        tab.append(row)
        basis.append(n + i)
    obj = [Fraction(0)] * (total + 1)
    for j in range(n, total):
        obj[j] = Fraction(-1)
    tab.append(obj)
    for i in range(m):  # price out the artificial basis
        tab[-1] = [a + b_ for a, b_ in zip(tab[-1], tab[i])]
    _optimise(tab, basis, total)
    if tab[-1][-1] != 0:
        return LpResult(False, True, None, None)

    # Drive leftover artificials out of the basis where possible.
    for i in range(m):
        if basis[i] >= n:
            col = next((j for j in range(n) if tab[i][j] != 0), None)
            if col is not None:
                _pivot(tab, basis, i, col)

    # Drop rows still basic in an artificial (redundant constraints).
    keep = [i for i in range(m) if basis[i] < n]
    tab = [ [tab[i][j] for j in range(n)] + [tab[i][-1]] for i in keep ]
    basis = [basis[i] for i in keep]

    # Phase II.
    obj2 = list(c) + [Fraction(0)]
    tab.append(obj2)
    for i, bi in enumerate(basis):
        if tab[-1][bi] != 0:
            f = tab[-1][bi]
            tab[-1] = [a - f * b_ for a, b_ in zip(tab[-1], tab[i])]
    bounded = _optimise(tab, basis, n)
    if not bounded:
        return LpResult(True, False, None, None)
    x = [Fraction(0)] * n
    for i, bi in enumerate(basis):
        x[bi] = tab[i][-1]
    value = sum((ci * xi for ci, xi in zip(c, x)), Fraction(0))
    return LpResult(True, True, value, x)
