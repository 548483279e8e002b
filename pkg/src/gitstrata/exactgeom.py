"""Exact convex-hull kernel: origin classification and minimum-norm point.

All geometry happens in a rational inner-product space (QVector coordinates,
positive definite Gram matrix).  Two independent routes compute the
minimum-norm point of a finite hull:

* :func:`min_norm_point`: an exact active-set method (Wolfe-style major/minor
  cycles with rational pivoting), the production path;
* :func:`min_norm_oracle`: exhaustive enumeration of affinely independent
  subsets with exact least-squares projections, the verification path.

They must agree coordinatewise on every instance within the oracle's limits.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import linalg, lp
from .errors import DimensionMismatchError, OracleLimitError, SemanticError
from .rationals import QVector, vsub, zero_vector

ORACLE_MAX_POINTS = 12
ORACLE_MAX_DIM = 4


class InnerProduct:
    """A fixed rational inner product: symmetric positive definite Gram matrix."""

    def __init__(self, gram: Sequence[Sequence[Fraction]]):
        g = tuple(tuple(Fraction(x) for x in row) for row in gram)
        d = len(g)
        if any(len(row) != d for row in g):
            raise SemanticError("gram matrix must be square")
        for i in range(d):
            for j in range(i + 1, d):
                if g[i][j] != g[j][i]:
                    raise SemanticError("gram matrix must be symmetric")
        if d and not linalg.is_positive_definite(g):
            raise SemanticError("gram matrix must be positive definite")
        self.gram = g
        self.dim = d
        self._is_identity = all(
            g[i][j] == (1 if i == j else 0) for i in range(d) for j in range(d))

    @classmethod
    def identity(cls, d: int) -> "InnerProduct":
        return cls(tuple(tuple(Fraction(1) if i == j else Fraction(0) for j in range(d))
                         for i in range(d)))

    def pairing(self, u: QVector, v: QVector) -> Fraction:
        if len(u) != self.dim or len(v) != self.dim:
            raise DimensionMismatchError(
                f"vector dimension {len(u)}/{len(v)} does not match inner product dimension {self.dim}")
        if self._is_identity:
            return sum((a * b for a, b in zip(u, v)), Fraction(0))
        total = Fraction(0)
        for i, ui in enumerate(u):
            if ui == 0:
                continue
            row = self.gram[i]
            total += ui * sum((row[j] * v[j] for j in range(self.dim) if v[j] != 0), Fraction(0))
        return total

    def __eq__(self, other) -> bool:
        return isinstance(other, InnerProduct) and self.gram == other.gram

    def __hash__(self) -> int:
        return hash(self.gram)

    def __repr__(self) -> str:
        return f"InnerProduct(dim={self.dim})"


def norm_sq(v: QVector, ip: InnerProduct) -> Fraction:
    """Exact squared norm v^T G v; zero iff v = 0."""
    return ip.pairing(v, v)


class HullPosition(enum.Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


@dataclass(frozen=True)
class MinNormResult:
    """Minimum-norm point of a hull plus a convex-combination witness."""

    point: QVector
    norm_sq: Fraction
    coefficients: Tuple[Fraction, ...]  # barycentric over the input points, >= 0, sum 1


@dataclass(frozen=True)
class HullWitness:
    """Exact classification of a query point against conv(points).

    For INTERIOR/BOUNDARY, ``coefficients`` reconstruct the query as a convex
    combination of the points (all strictly positive in the INTERIOR case).
    For OUTSIDE, ``functional`` strictly separates: <functional, p - query>
    >= margin_norm_sq > 0 for every input point p.
    """

    position: HullPosition
    coefficients: Optional[Tuple[Fraction, ...]] = None
    functional: Optional[QVector] = None
    margin_norm_sq: Optional[Fraction] = None


def _check_points(points: Sequence[QVector], ip: InnerProduct) -> None:
    if not points:
        raise SemanticError("point list must be nonempty")
    for p in points:
        if len(p) != ip.dim:
            raise DimensionMismatchError(
                f"point dimension {len(p)} does not match inner product dimension {ip.dim}")


def _affine_solution(gram_rows: List[List[Fraction]], members: Sequence[int]) -> Optional[List[Fraction]]:
    """Coefficients a (sum 1, unrestricted) of the min-norm point of the
    affine hull of the selected points: KKT system [[Q 1],[1 0]][a;mu]=[0;1]."""
    k = len(members)
    rows: List[List[Fraction]] = []
    for i in members:
        rows.append([gram_rows[i][j] for j in members] + [Fraction(-1)])
    rows.append([Fraction(1)] * k + [Fraction(0)])
    rhs = [Fraction(0)] * k + [Fraction(1)]
    sol = linalg.solve(rows, rhs)
    if sol is None:
        return None
    return sol[:k]


def min_norm_point(points: Sequence[QVector], ip: InnerProduct) -> MinNormResult:
    """Unique point of conv(points) minimising the squared norm, exactly.

    Exact active-set iteration: keep a working set with strictly positive
    convex weights, test global optimality through pairings, augment with the
    most violating point, and walk back into the simplex dropping points whose
    weight would go nonpositive.  Ties break on the smallest index, so the
    run is deterministic.
    """
    _check_points(points, ip)
    n = len(points)
    gram_rows = [[ip.pairing(points[i], points[j]) for j in range(n)] for i in range(n)]

    start = min(range(n), key=lambda i: (gram_rows[i][i], i))
    corral: List[int] = [start]
    weights: Dict[int, Fraction] = {start: Fraction(1)}

    def point_of(w: Dict[int, Fraction]) -> QVector:
        coords = [Fraction(0)] * ip.dim
        for i, wi in w.items():
            for k in range(ip.dim):
                coords[k] += wi * points[i][k]
        return tuple(coords)

    def pairing_with_current(j: int, w: Dict[int, Fraction]) -> Fraction:
        return sum((wi * gram_rows[i][j] for i, wi in w.items()), Fraction(0))

    guard = 0
    while True:
        guard += 1
        if guard > 10000:
            raise SemanticError("min_norm_point failed to converge (internal error)")
        current_sq = sum((wi * pairing_with_current(i, weights) for i, wi in weights.items()),
                         Fraction(0))
        best_j, best_val = None, None
        for j in range(n):
            val = pairing_with_current(j, weights)
            if val < current_sq and (best_val is None or val < best_val):
                best_j, best_val = j, val
        if best_j is None:
            coeffs = tuple(weights.get(i, Fraction(0)) for i in range(n))
            pt = point_of(weights)
            return MinNormResult(point=pt, norm_sq=current_sq, coefficients=coeffs)

        corral.append(best_j)
        weights[best_j] = Fraction(0)
        while True:
            a = _affine_solution(gram_rows, corral)
            if a is None:  # cannot happen: the KKT system is always consistent
                raise SemanticError("degenerate affine system (internal error)")
            target = dict(zip(corral, a))
            if all(x > 0 for x in a):
                weights = target
                break
            theta = min(weights[i] / (weights[i] - target[i])
                        for i in corral if target[i] <= 0 and weights[i] != target[i])
            new_weights = {i: (1 - theta) * weights[i] + theta * target[i] for i in corral}
            corral = [i for i in corral if new_weights[i] > 0]
            weights = {i: new_weights[i] for i in corral}


def min_norm_oracle(points: Sequence[QVector], ip: InnerProduct) -> MinNormResult:
    """Independent verification route: exhaustive face enumeration.

    For every affinely independent subset, project the origin onto its affine
    span by exact least squares and keep the projection when its (then unique)
    barycentric coordinates are all nonnegative; return the feasible projection
    of smallest norm.  Dependent subsets never contribute a better point: the
    optimum is a convex combination of affinely independent points whose span
    the projection is orthogonal to.
    """
    _check_points(points, ip)
    n = len(points)
    if n > ORACLE_MAX_POINTS:
        raise OracleLimitError(f"oracle limited to {ORACLE_MAX_POINTS} points, got {n}")
    if ip.dim > ORACLE_MAX_DIM:
        raise OracleLimitError(f"oracle limited to dimension {ORACLE_MAX_DIM}, got {ip.dim}")
    gram_rows = [[ip.pairing(points[i], points[j]) for j in range(n)] for i in range(n)]

    best: Optional[MinNormResult] = None
    for mask in range(1, 1 << n):
        members = [i for i in range(n) if mask >> i & 1]
        base = points[members[0]]
        diffs = [vsub(points[i], base) for i in members[1:]]
        if linalg.rank(diffs) != len(members) - 1:
            continue  # affinely dependent: spanned faces are covered elsewhere
        a = _affine_solution(gram_rows, members)
        if a is None or any(x < 0 for x in a):
            continue
        coords = [Fraction(0)] * ip.dim
        for idx, i in enumerate(members):
            for k in range(ip.dim):
                coords[k] += a[idx] * points[i][k]
        pt = tuple(coords)
        nsq = norm_sq(pt, ip)
        if best is None or nsq < best.norm_sq:
            coeffs = [Fraction(0)] * n
            for idx, i in enumerate(members):
                coeffs[i] = a[idx]
            best = MinNormResult(point=pt, norm_sq=nsq, coefficients=tuple(coeffs))
    assert best is not None
    return best


def _relint_coefficients(points: Sequence[QVector], ip: InnerProduct) -> Optional[Tuple[Fraction, ...]]:
    """Strictly positive convex combination of the origin, if one exists.

    Writing l_i = m_i + t with m_i, t >= 0 turns "maximise the smallest
    coefficient" into a compact LP with d + 1 rows:
        maximise t  s.t.  sum(m) + n*t = 1,  sum(m_i p_i) + t*sum(p) = 0.
    The optimum is positive exactly when the origin lies in the relative
    interior of the hull (finite point sets: the relative interior is the set
    of all-positive convex combinations).
    """
    n = len(points)
    d = ip.dim
    psum = [sum((p[k] for p in points), Fraction(0)) for k in range(d)]
    rows: List[List[Fraction]] = [[Fraction(1)] * n + [Fraction(n)]]
    rhs: List[Fraction] = [Fraction(1)]
    for k in range(d):
        rows.append([p[k] for p in points] + [psum[k]])
        rhs.append(Fraction(0))
    c = [Fraction(0)] * n + [Fraction(1)]
    res = lp.simplex_max(rows, rhs, c)
    if not res.feasible or res.value is None or res.value <= 0:
        return None
    assert res.solution is not None
    t = res.solution[n]
    return tuple(m + t for m in res.solution[:n])


def hull_position(points: Sequence[QVector], query: QVector, ip: InnerProduct) -> HullWitness:
    """Classify query against conv(points): INTERIOR / BOUNDARY / OUTSIDE.

    INTERIOR follows the full-dimensional convention: the query must be a
    strictly positive convex combination AND the span of the point differences
    must be the whole space.  Lower-dimensional hulls classify at best
    BOUNDARY.  Decisions and certificates are exact.
    """
    _check_points(points, ip)
    if len(query) != ip.dim:
        raise DimensionMismatchError("query dimension mismatch")
    shifted = [vsub(p, query) for p in points]
    res = min_norm_point(shifted, ip)
    if res.norm_sq > 0:
        return HullWitness(position=HullPosition.OUTSIDE,
                           functional=res.point, margin_norm_sq=res.norm_sq)
    base = shifted[0]
    full_dim = linalg.rank([vsub(p, base) for p in shifted]) == ip.dim if ip.dim > 0 else True
    if full_dim:
        relint = _relint_coefficients(shifted, ip)
        if relint is not None:
            return HullWitness(position=HullPosition.INTERIOR, coefficients=relint)
    return HullWitness(position=HullPosition.BOUNDARY, coefficients=res.coefficients)


def contains_origin(points: Sequence[QVector], ip: InnerProduct) -> bool:
    return min_norm_point(points, ip).norm_sq == 0


def origin_position(points: Sequence[QVector], ip: InnerProduct) -> HullWitness:
    return hull_position(points, zero_vector(ip.dim), ip)
