"""Linear torus actions on projective space, combinatorially.

A diagonal torus action on P(V) is encoded by its weight vectors; every
torus-invariant locally closed subset cut out by coordinate vanishing is a
union of *support classes* (the sets of nonvanishing coordinates), so loci
are finite families of index sets and all stability questions reduce to
exact convex geometry on the weights.

Support classes are plain ``frozenset[int]``.  A family of supports is
*closed* when it is closed under taking nonempty subsets (degenerating
coordinates to zero is the only invariant specialisation), and *open* when
its complement inside the allowed family is closed.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from . import linalg
from .exactgeom import HullPosition, HullWitness, InnerProduct, hull_position
from .errors import (CapExceededError, DimensionMismatchError, LambdaTrivialError,
                     ProblemFormatError, SemanticError, SupportNotClosedError)
from .rationals import QVector, format_vector, qvec, vsub, zero_vector

Support = FrozenSet[int]

DEFAULT_INDEX_CAP = 16

_context_tokens: Dict[tuple, int] = {}


def index_cap(override: Optional[int] = None) -> int:
    """Enumeration cap on the number of weight indices (2^cap supports)."""
    if override is not None:
        return override
    env = os.environ.get("GITSTRATA_CAP")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise SemanticError(f"GITSTRATA_CAP must be an integer, got {env!r}") from exc
    return DEFAULT_INDEX_CAP


def support_key(s: Support) -> Tuple[int, ...]:
    return tuple(sorted(s))


def sort_supports(supports: Iterable[Support]) -> List[Support]:
    return sorted(supports, key=support_key)


def format_support(s: Support) -> str:
    return "{" + ",".join(str(i) for i in sorted(s)) + "}"


def format_support_family(supports: Iterable[Support]) -> str:
    return "[" + " ".join(format_support(s) for s in sort_supports(supports)) + "]"


@dataclass(frozen=True)
class TorusProblem:
    """A linear torus action: rank, weights, inner product, allowed supports.

    ``allowed`` defaults to every nonempty subset of the index set.  ``twist``
    is an optional rational character stored as the vector xi with
    <lambda, xi> = chi/c; stability tests translate weights by -xi.
    ``grading`` is an optional central one-parameter subgroup used by the
    refinement recursion.
    """

    dim: int
    weights: Tuple[QVector, ...]
    ip: InnerProduct
    allowed: FrozenSet[Support]
    twist: Optional[QVector] = None
    grading: Optional[QVector] = None

    def __post_init__(self):
        if len(self.weights) < 1:
            raise SemanticError("a torus problem needs at least one weight")
        for w in self.weights:
            if len(w) != self.dim:
                raise DimensionMismatchError("weight dimension does not match problem rank")
        if self.ip.dim != self.dim:
            raise DimensionMismatchError("inner product dimension does not match problem rank")
        if self.twist is not None and len(self.twist) != self.dim:
            raise DimensionMismatchError("twist dimension does not match problem rank")
        if self.grading is not None and len(self.grading) != self.dim:
            raise DimensionMismatchError("grading dimension does not match problem rank")
        if not self.allowed:
            raise SemanticError("allowed support family must be nonempty")
        n = len(self.weights)
        for s in self.allowed:
            if not s or any(i < 0 or i >= n for i in s):
                raise SemanticError("allowed supports must be nonempty subsets of the index range")
        # Small interned token for the weight context: memo keys hash this
        # int instead of re-hashing the full rational tables on every lookup.
        ctx = (self.weights, self.twist, self.ip.gram)
        token = _context_tokens.setdefault(ctx, len(_context_tokens))
        object.__setattr__(self, "context_token", token)

    # -- construction -----------------------------------------------------

    @staticmethod
    def build(weights: Sequence[QVector], ip: Optional[InnerProduct] = None,
              allowed: Optional[Iterable[Iterable[int]]] = None,
              twist: Optional[QVector] = None, grading: Optional[QVector] = None,
              cap: Optional[int] = None) -> "TorusProblem":
        ws = tuple(tuple(w) for w in weights)
        if not ws:
            raise SemanticError("empty weight list")
        d = len(ws[0])
        n = len(ws)
        if n > index_cap(cap):
            raise CapExceededError(
                f"{n} weight indices exceed the enumeration cap {index_cap(cap)}")
        inner = ip if ip is not None else InnerProduct.identity(d)
        if allowed is None:
            fam = frozenset(frozenset(c) for size in range(1, n + 1)
                            for c in itertools.combinations(range(n), size))
        else:
            fam = frozenset(frozenset(s) for s in allowed)
        return TorusProblem(dim=d, weights=ws, ip=inner, allowed=fam,
                            twist=twist, grading=grading)

    # -- basic queries -----------------------------------------------------

    def effective_weight(self, i: int) -> QVector:
        if self.twist is None:
            return self.weights[i]
        return vsub(self.weights[i], self.twist)

    def effective_weights(self, s: Support) -> List[QVector]:
        return [self.effective_weight(i) for i in sorted(s)]

    def occurring_indices(self) -> Tuple[int, ...]:
        seen = set()
        for s in self.allowed:
            seen |= s
        return tuple(sorted(seen))

    def check_support(self, s: Support) -> None:
        if s not in self.allowed:
            raise SemanticError(f"support {format_support(s)} is not allowed for this problem")

    def projective_dim(self) -> int:
        return max(len(s) for s in self.allowed) - 1

    def digest(self) -> str:
        return hashlib.sha256(dumps_problem(self).encode()).hexdigest()


# -- stability ---------------------------------------------------------------

# Witnesses are pure functions of (weights, twist, gram, support); the
# refinement recursion re-tests the same supports across many sub-problems
# with unchanged weights, so memoising pays off.
_witness_cache: Dict[tuple, HullWitness] = {}


def origin_witness(problem: TorusProblem, s: Support) -> HullWitness:
    problem.check_support(s)
    key = (problem.context_token, support_key(s))
    hit = _witness_cache.get(key)
    if hit is not None:
        return hit
    witness = hull_position(problem.effective_weights(s),
                            zero_vector(problem.dim), problem.ip)
    _witness_cache[key] = witness
    return witness


def semistable(problem: TorusProblem, s: Support) -> bool:
    """The origin lies in the hull of the (twisted) weights present."""
    return origin_witness(problem, s).position is not HullPosition.OUTSIDE


def stable(problem: TorusProblem, s: Support) -> bool:
    """The origin lies in the full-dimensional interior of that hull."""
    return origin_witness(problem, s).position is HullPosition.INTERIOR


def stab_dim(problem: TorusProblem, s: Support) -> int:
    """Dimension of the subtorus acting trivially on points of exact support s:
    rank minus the rank of the weight differences."""
    problem.check_support(s)
    idx = sorted(s)
    base = problem.weights[idx[0]]
    diffs = [vsub(problem.weights[i], base) for i in idx[1:]]
    return problem.dim - linalg.rank(diffs)


# -- grading loci -------------------------------------------------------------


def lambda_weight(problem: TorusProblem, lam: QVector, i: int) -> Fraction:
    """Pairing of the one-parameter subgroup with the i-th weight."""
    if len(lam) != problem.dim:
        raise DimensionMismatchError("grading dimension mismatch")
    return problem.ip.pairing(lam, problem.weights[i])


def lambda_weight_levels(problem: TorusProblem, lam: QVector) -> List[Fraction]:
    """Distinct pairing values over the occurring indices, ascending."""
    values = {lambda_weight(problem, lam, i) for i in problem.occurring_indices()}
    return sorted(values)


@dataclass(frozen=True)
class ZMinResult:
    supports: FrozenSet[Support]
    omega_min: Fraction
    lambda_trivial: bool


def z_min(problem: TorusProblem, lam: QVector) -> ZMinResult:
    """Supports entirely at the minimal pairing level.

    When the grading pairs identically on every occurring index the locus is
    the whole space; the result is flagged LAMBDA_TRIVIAL and drives the
    reductive branch of the refinement recursion.
    """
    if all(x == 0 for x in lam):
        raise SemanticError("grading one-parameter subgroup must be nonzero")
    levels = lambda_weight_levels(problem, lam)
    omega_min = levels[0]
    trivial = len(levels) == 1
    members = frozenset(
        s for s in problem.allowed
        if all(lambda_weight(problem, lam, i) == omega_min for i in s))
    return ZMinResult(supports=members, omega_min=omega_min, lambda_trivial=trivial)


@dataclass(frozen=True)
class X0MinResult:
    supports: FrozenSet[Support]
    retraction: Dict[Support, Support]
    omega_min: Fraction


def x0_min(problem: TorusProblem, lam: QVector) -> X0MinResult:
    """Basin of attraction of the minimal fixed locus under t -> 0 limits.

    A support flows into the minimal locus when its smallest pairing equals
    the global minimum; the limit keeps exactly the minimising indices, and
    that retraction target must itself be allowed.
    """
    zres = z_min(problem, lam)
    if zres.lambda_trivial:
        raise LambdaTrivialError("grading acts with a single weight; basin undefined")
    members = {}
    for s in problem.allowed:
        pairings = {i: lambda_weight(problem, lam, i) for i in s}
        smallest = min(pairings.values())
        if smallest != zres.omega_min:
            continue
        target = frozenset(i for i, v in pairings.items() if v == smallest)
        if target not in problem.allowed:
            raise SupportNotClosedError(
                f"SUPPORT_NOT_CLOSED: retraction of {format_support(s)} lands on "
                f"{format_support(target)}, which is not allowed")
        members[s] = target
    return X0MinResult(supports=frozenset(members), retraction=members,
                       omega_min=zres.omega_min)


def min_stable_set(problem: TorusProblem, lam: QVector) -> FrozenSet[Support]:
    """Basin minus the fixed locus: the minimal stable set of the grading.

    A grading with a single pairing level fixes everything, so the set is
    empty in that degenerate case.
    """
    fixed = z_min(problem, lam)
    if fixed.lambda_trivial:
        return frozenset()
    basin = x0_min(problem, lam)
    return basin.supports - fixed.supports


def adapted_window(problem: TorusProblem, lam: QVector) -> Tuple[Fraction, Fraction]:
    """The two smallest distinct pairing levels (omega_0, omega_1); a twist
    chi/c is adapted exactly when omega_0 < chi/c < omega_1."""
    levels = lambda_weight_levels(problem, lam)
    if len(levels) < 2:
        raise LambdaTrivialError("fewer than two distinct pairing levels")
    return levels[0], levels[1]


def is_adapted(problem: TorusProblem, lam: QVector) -> bool:
    if problem.twist is None:
        raise SemanticError("problem carries no twist to test")
    lo, hi = adapted_window(problem, lam)
    value = problem.ip.pairing(lam, problem.twist)
    return lo < value < hi


# -- support family combinatorics ---------------------------------------------


def closure_of(problem: TorusProblem, supports: Iterable[Support]) -> FrozenSet[Support]:
    """All allowed nonempty subsets of the members (Zariski closure)."""
    out = set()
    for s in supports:
        idx = sorted(s)
        for size in range(1, len(idx) + 1):
            for combo in itertools.combinations(idx, size):
                cand = frozenset(combo)
                if cand in problem.allowed:
                    out.add(cand)
    return frozenset(out)


def is_closed_family(problem: TorusProblem, supports: FrozenSet[Support]) -> bool:
    return closure_of(problem, supports) == supports


def is_open_family(problem: TorusProblem, supports: FrozenSet[Support]) -> bool:
    """Open = complement closed = closed under allowed supersets."""
    complement = problem.allowed - supports
    return is_closed_family(problem, frozenset(complement))


def connected_components(members: Iterable[Support]) -> List[FrozenSet[Support]]:
    """Components under chains of sub/superset degenerations inside the family.

    Two supports lie in one component when a chain of comparable pairs (each a
    subset of the other, both in the family) connects them; this matches the
    geometric components of the corresponding union of locally closed strata.
    """
    items = sort_supports(members)
    parent = list(range(len(items)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i: int, j: int) -> None:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)

    for a in range(len(items)):
        for b in range(a + 1, len(items)):
            if items[a] <= items[b] or items[b] <= items[a]:
                union(a, b)
    groups: Dict[int, List[Support]] = {}
    for i, s in enumerate(items):
        groups.setdefault(find(i), []).append(s)
    comps = [frozenset(v) for _, v in sorted(groups.items())]
    return sorted(comps, key=lambda c: support_key(min(c, key=support_key)))


# -- problem files -------------------------------------------------------------


def loads_problem(text: str, cap: Optional[int] = None) -> TorusProblem:
    """Parse the JSON problem grammar (rationals as decimal-free strings)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(f"invalid problem file: {exc}") from exc
    return problem_from_dict(doc, cap=cap)


def problem_from_dict(doc: dict, cap: Optional[int] = None) -> TorusProblem:
    if not isinstance(doc, dict):
        raise ProblemFormatError("problem document must be a JSON object")
    unknown = set(doc) - {"dim", "weights", "gram", "lambda", "twist", "allowed_supports"}
    if unknown:
        raise ProblemFormatError(f"unknown problem fields: {sorted(unknown)}")
    if "dim" not in doc or "weights" not in doc:
        raise ProblemFormatError("problem file needs 'dim' and 'weights'")
    dim = doc["dim"]
    if not isinstance(dim, int) or dim < 0:
        raise ProblemFormatError("'dim' must be a nonnegative integer")
    raw_weights = doc["weights"]
    if not isinstance(raw_weights, list) or not raw_weights:
        raise ProblemFormatError("'weights' must be a nonempty list of vectors")
    weights = []
    for row in raw_weights:
        if not isinstance(row, list) or len(row) != dim:
            raise ProblemFormatError("each weight must be a list of length 'dim'")
        weights.append(qvec(row))
    ip = None
    if "gram" in doc:
        rows = doc["gram"]
        if not isinstance(rows, list) or len(rows) != dim:
            raise ProblemFormatError("'gram' must be a dim x dim matrix")
        try:
            ip = InnerProduct([qvec(r) for r in rows])
        except SemanticError as exc:
            raise ProblemFormatError(str(exc)) from exc
    lam = qvec(doc["lambda"]) if "lambda" in doc else None
    if lam is not None and len(lam) != dim:
        raise ProblemFormatError("'lambda' must have length 'dim'")
    twist = qvec(doc["twist"]) if "twist" in doc else None
    if twist is not None and len(twist) != dim:
        raise ProblemFormatError("'twist' must have length 'dim'")
    allowed = None
    if "allowed_supports" in doc:
        raw = doc["allowed_supports"]
        if not isinstance(raw, list) or not raw:
            raise ProblemFormatError("'allowed_supports' must be a nonempty list of index lists")
        allowed = []
        for entry in raw:
            if (not isinstance(entry, list) or not entry
                    or any(not isinstance(i, int) for i in entry)):
                raise ProblemFormatError("each allowed support must be a nonempty list of integers")
            if any(i < 0 or i >= len(weights) for i in entry):
                raise ProblemFormatError("allowed support index out of range")
            allowed.append(frozenset(entry))
    try:
        return TorusProblem.build(weights, ip=ip, allowed=allowed, twist=twist,
                                  grading=lam, cap=cap)
    except CapExceededError:
        raise
    except SemanticError as exc:
        raise ProblemFormatError(str(exc)) from exc


def problem_to_dict(problem: TorusProblem) -> dict:
    doc: dict = {
        "dim": problem.dim,
        "weights": [format_vector(w) for w in problem.weights],
    }
    if problem.ip != InnerProduct.identity(problem.dim):
        doc["gram"] = [format_vector(row) for row in problem.ip.gram]
    if problem.grading is not None:
        doc["lambda"] = format_vector(problem.grading)
    if problem.twist is not None:
        doc["twist"] = format_vector(problem.twist)
    n = len(problem.weights)
    full = frozenset(frozenset(c) for size in range(1, n + 1)
                     for c in itertools.combinations(range(n), size))
    if problem.allowed != full:
        doc["allowed_supports"] = [list(support_key(s)) for s in sort_supports(problem.allowed)]
    return doc


def dumps_problem(problem: TorusProblem) -> str:
    return json.dumps(problem_to_dict(problem), sort_keys=True, separators=(",", ":"))
