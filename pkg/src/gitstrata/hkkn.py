"""Instability stratification of a torus problem.

Every support class receives an index: the minimum-norm point of the hull of
its (twisted) weights.  Grouping supports by index partitions the allowed
family into strata; the zero index, when present, is exactly the semistable
family.  Indices are partially ordered by squared norm (equal or strictly
larger), and the partition satisfies a closure-order property that
:func:`check_closure_order` verifies exhaustively.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from .exactgeom import min_norm_point
from .errors import SemanticError
from .rationals import QVector, format_rational, is_zero, vsub
from .torusgit import (Support, TorusProblem, format_support, semistable,
                       sort_supports, stab_dim, support_key)


@dataclass(frozen=True)
class StratumIndex:
    beta: QVector
    norm_sq: Fraction

    def sort_key(self):
        return (self.norm_sq, self.beta)

    def is_zero(self) -> bool:
        return self.norm_sq == 0

    def label(self) -> str:
        return "(" + ",".join(format_rational(x) for x in self.beta) + ")"


@dataclass
class HKKNStratification:
    problem: TorusProblem
    index_set: Tuple[StratumIndex, ...]
    strata: Dict[StratumIndex, FrozenSet[Support]]

    def stratum_of(self, s: Support) -> StratumIndex:
        for idx, members in self.strata.items():
            if s in members:
                return idx
        raise SemanticError(f"support {format_support(s)} not stratified")


class IndexCache:
    """Memoises index computations per effective-weight table.

    The refinement recursion revisits the same supports across many
    sub-problems with unchanged weights; caching keeps the overall cost
    linear in the number of distinct supports.
    """

    def __init__(self):
        self._store: Dict[tuple, StratumIndex] = {}

    def key(self, problem: TorusProblem, s: Support) -> tuple:
        return (problem.context_token, support_key(s))

    def get(self, problem: TorusProblem, s: Support) -> Optional[StratumIndex]:
        return self._store.get(self.key(problem, s))

    def put(self, problem: TorusProblem, s: Support, idx: StratumIndex) -> None:
        self._store[self.key(problem, s)] = idx


_global_cache = IndexCache()


def index_of_support(problem: TorusProblem, s: Support,
                     cache: Optional[IndexCache] = _global_cache) -> StratumIndex:
    """Minimum-norm point of the hull of the support's effective weights.

    Zero exactly on semistable supports.
    """
    problem.check_support(s)
    if cache is not None:
        hit = cache.get(problem, s)
        if hit is not None:
            return hit
    res = min_norm_point(problem.effective_weights(s), problem.ip)
    idx = StratumIndex(beta=res.point, norm_sq=res.norm_sq)
    if cache is not None:
        cache.put(problem, s, idx)
    return idx


def stratify(problem: TorusProblem, workers: int = 1,
             cache: Optional[IndexCache] = _global_cache) -> HKKNStratification:
    """Group every allowed support by its index.

    ``workers`` > 1 partitions the enumeration across a thread pool; results
    are merged in canonical support order, so the output is identical for any
    worker count.
    """
    supports = sort_supports(problem.allowed)

    def compute(chunk: Sequence[Support]) -> List[Tuple[Support, StratumIndex]]:
        return [(s, index_of_support(problem, s, cache)) for s in chunk]

    if workers <= 1 or len(supports) < 2:
        pairs = compute(supports)
    else:
        chunks = [supports[i::workers] for i in range(workers)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(compute, chunks))
        pairs = sorted((p for part in parts for p in part),
                       key=lambda kv: support_key(kv[0]))

    strata: Dict[StratumIndex, set] = {}
    for s, idx in pairs:
        strata.setdefault(idx, set()).add(s)
    index_set = tuple(sorted(strata, key=StratumIndex.sort_key))
    return HKKNStratification(problem=problem,
                              index_set=index_set,
                              strata={idx: frozenset(strata[idx]) for idx in index_set})


# -- limit loci of an index -----------------------------------------------------


def p_beta(problem: TorusProblem, beta: QVector, s: Support) -> Support:
    """Limit support under the destabilising one-parameter subgroup: the
    indices pairing exactly to |beta|^2."""
    nsq = problem.ip.pairing(beta, beta)
    return frozenset(i for i in s
                     if problem.ip.pairing(problem.effective_weight(i), beta) == nsq)


def z_beta(problem: TorusProblem, beta: QVector) -> FrozenSet[Support]:
    """Fixed supports: every index pairs exactly to |beta|^2."""
    nsq = problem.ip.pairing(beta, beta)
    return frozenset(
        s for s in problem.allowed
        if all(problem.ip.pairing(problem.effective_weight(i), beta) == nsq for i in s))


def y_beta(problem: TorusProblem, beta: QVector,
           cache: Optional[IndexCache] = _global_cache) -> FrozenSet[Support]:
    """Supports flowing into the semistable part of the fixed locus: the
    minimising indices pair to |beta|^2, the rest strictly above, and the
    limit support has index beta again."""
    nsq = problem.ip.pairing(beta, beta)
    target_index = StratumIndex(beta=beta, norm_sq=nsq)
    members = set()
    for s in problem.allowed:
        pairings = [problem.ip.pairing(problem.effective_weight(i), beta) for i in sorted(s)]
        if any(v < nsq for v in pairings):
            continue
        limit = p_beta(problem, beta, s)
        if not limit or limit not in problem.allowed:
            continue
        if index_of_support(problem, limit, cache) == target_index:
            members.add(s)
    return frozenset(members)


def z_beta_ss(problem: TorusProblem, beta: QVector) -> FrozenSet[Support]:
    """Residually semistable fixed supports: translating the weights by beta
    puts the origin in the hull (the torus shadow of twisting by the index's
    character and restricting to its orthogonal complement)."""
    from .exactgeom import contains_origin
    members = set()
    for s in z_beta(problem, beta):
        shifted = [vsub(problem.effective_weight(i), beta) for i in sorted(s)]
        if contains_origin(shifted, problem.ip):
            members.add(s)
    return frozenset(members)


# -- checks ---------------------------------------------------------------------


@dataclass
class ClosureViolation:
    support: Support
    sub_support: Support
    index: StratumIndex
    sub_index: StratumIndex


def check_closure_order(problem: TorusProblem, strat: HKKNStratification,
                        cache: Optional[IndexCache] = _global_cache
                        ) -> Tuple[bool, List[ClosureViolation]]:
    """Every allowed subset of a stratified support must land in the same
    stratum or one of strictly larger norm."""
    import itertools as _it

    where: Dict[Support, StratumIndex] = {}
    for idx, members in strat.strata.items():
        for s in members:
            where[s] = idx
    violations: List[ClosureViolation] = []
    for idx in strat.index_set:
        for s in sort_supports(strat.strata[idx]):
            items = sorted(s)
            for size in range(1, len(items) + 1):
                for combo in _it.combinations(items, size):
                    sub = frozenset(combo)
                    sub_idx = where.get(sub)
                    if sub_idx is None:
                        continue
                    if sub_idx != idx and sub_idx.norm_sq <= idx.norm_sq:
                        violations.append(ClosureViolation(s, sub, idx, sub_idx))
    return (not violations), violations


def check_dagger(problem: TorusProblem, beta: QVector) -> bool:
    """Stabiliser condition forcing the stratum to split along the fixed locus:
    every residually semistable fixed support is stabilised exactly by the
    line through the destabilising subgroup (dimension 1), or, for the zero
    index, has finite stabiliser (dimension 0)."""
    if is_zero(beta):
        targets = [s for s in problem.allowed if semistable(problem, s)]
        return all(stab_dim(problem, s) == 0 for s in targets)
    return all(stab_dim(problem, s) == 1 for s in z_beta_ss(problem, beta))


# -- poset emission --------------------------------------------------------------


def poset_dot(strat: HKKNStratification) -> str:
    """DOT digraph of the index poset: edges are covering relations of the
    norm order (each index points to every index on the next norm level)."""
    lines = ["digraph hkkn {", "  rankdir=BT;"]
    levels: Dict[Fraction, List[StratumIndex]] = {}
    for idx in strat.index_set:
        levels.setdefault(idx.norm_sq, []).append(idx)
    level_keys = sorted(levels)
    names = {idx: f"b{k}" for k, idx in enumerate(strat.index_set)}
    for idx in strat.index_set:
        label = (f"beta={idx.label()}\\n|beta|^2={format_rational(idx.norm_sq)}"
                 f"\\nsupports={len(strat.strata[idx])}")
        lines.append(f'  {names[idx]} [label="{label}"];')
    for a, b in zip(level_keys, level_keys[1:]):
        for lo in levels[a]:
            for hi in levels[b]:
                lines.append(f"  {names[lo]} -> {names[hi]};")
    lines.append("}")
    return "\n".join(lines) + "\n"
