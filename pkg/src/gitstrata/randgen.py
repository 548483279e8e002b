"""Deterministic random instance generators for property checks.

Everything is driven by a caller-supplied ``random.Random`` so that seeds
pin the exact instance stream.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import List

from .exactgeom import InnerProduct
from .rationals import QVector
from .torusgit import TorusProblem


def rand_fraction(rnd: random.Random, max_abs: int = 5, max_den: int = 5) -> Fraction:
    return Fraction(rnd.randint(-max_abs, max_abs), rnd.randint(1, max_den))


def rand_qvector(rnd: random.Random, d: int, max_abs: int = 5, max_den: int = 5) -> QVector:
    return tuple(rand_fraction(rnd, max_abs, max_den) for _ in range(d))


def rand_points(rnd: random.Random, d: int, count: int,
                max_abs: int = 5, max_den: int = 5) -> List[QVector]:
    return [rand_qvector(rnd, d, max_abs, max_den) for _ in range(count)]


def rand_spd_gram(rnd: random.Random, d: int) -> InnerProduct:
    """A^T A + I for a small random integer matrix A: positive definite."""
    a = [[Fraction(rnd.randint(-2, 2)) for _ in range(d)] for _ in range(d)]
    gram = [[sum(a[k][i] * a[k][j] for k in range(d)) + (1 if i == j else 0)
             for j in range(d)] for i in range(d)]
    return InnerProduct(gram)


def rand_torus_problem(rnd: random.Random, max_dim: int = 3, max_indices: int = 10,
                       allow_twist: bool = True, allow_restriction: bool = True,
                       allow_grading: bool = False,
                       allow_gram: bool = False) -> TorusProblem:
    d = rnd.randint(1, max_dim)
    n = rnd.randint(2, max_indices)
    weights = [rand_qvector(rnd, d, max_abs=3, max_den=2) for _ in range(n)]
    ip = rand_spd_gram(rnd, d) if allow_gram and rnd.random() < 0.5 else None
    twist = rand_qvector(rnd, d, max_abs=2, max_den=3) if allow_twist and rnd.random() < 0.25 else None
    grading = None
    if allow_grading and rnd.random() < 0.3:
        g = rand_qvector(rnd, d, max_abs=2, max_den=1)
        if any(x != 0 for x in g):
            grading = g
    allowed = None
    if allow_restriction and rnd.random() < 0.3:
        # random subset-closed family: close a few random maximal supports
        maximal = []
        for _ in range(rnd.randint(1, 3)):
            size = rnd.randint(1, n)
            maximal.append(frozenset(rnd.sample(range(n), size)))
        fam = set()
        for m in maximal:
            items = sorted(m)
            for mask in range(1, 1 << len(items)):
                fam.add(frozenset(items[i] for i in range(len(items)) if mask >> i & 1))
        allowed = fam
    return TorusProblem.build(weights, ip=ip, allowed=allowed, twist=twist,
                              grading=grading)


def rand_support(rnd: random.Random, n: int) -> frozenset:
    size = rnd.randint(1, n)
    return frozenset(rnd.sample(range(n), size))
