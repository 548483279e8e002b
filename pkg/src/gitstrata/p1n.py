"""Diagonal special-linear action on n-fold products of the projective line.

A configuration of n ordered points is classified, up to the group action,
by its multiplicity signature: the partition of n recording how the points
coincide.  Refined strata are unions of signature classes, so the whole
stratification is finite combinatorics on partitions.

Component counts come from an exhaustive connectivity oracle on labelled
coincidence patterns (set partitions of the index set): two patterns are
linked when one merges two blocks of the other without changing the stratum
label.  Counts not reported in closed form are flagged as derived.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .errors import OracleLimitError, ProblemFormatError, SemanticError
from .rationals import parse_rational

Partition = Tuple[int, ...]  # parts sorted descending, positive, summing to n

PATTERN_ORACLE_CAP = 12


@dataclass(frozen=True)
class Signature:
    n: int
    mults: Partition

    def __post_init__(self):
        if self.n < 1:
            raise SemanticError("signature needs n >= 1")
        if sum(self.mults) != self.n or any(m < 1 for m in self.mults):
            raise SemanticError("multiplicities must be positive and sum to n")
        if tuple(sorted(self.mults, reverse=True)) != self.mults:
            raise SemanticError("multiplicities must be sorted descending")

    @staticmethod
    def of(n: int, mults: Iterable[int]) -> "Signature":
        return Signature(n=n, mults=tuple(sorted(mults, reverse=True)))

    def max_mult(self) -> int:
        return self.mults[0]


class LabelKind(enum.Enum):
    S0 = "S0"                      # odd n: the (semi)stable stratum
    S0_LT = "S0_lt"                # even n: strictly fewer than half coincide
    S0_HALF_HALF = "S0_half_half"  # even n: two coincidence clusters of half size
    S0_HALF_LT = "S0_half_lt"      # even n: one half-size cluster, rest spread
    TWO_POINT = "two_point"        # supported at two points, multiplicities r, n-r
    COMPLEMENT = "complement"      # exactly r coincide, the rest not all equal
    S_NMINUS2 = "S_nminus2"        # r = n-1 (the two-point/complement split is void)
    S_N = "S_n"                    # total coincidence


@dataclass(frozen=True)
class StratumLabel:
    kind: LabelKind
    r: Optional[int] = None  # set for TWO_POINT / COMPLEMENT only

    def __post_init__(self):
        if self.kind in (LabelKind.TWO_POINT, LabelKind.COMPLEMENT):
            if self.r is None:
                raise SemanticError("two-point/complement labels need r")
        elif self.r is not None:
            raise SemanticError("only two-point/complement labels carry r")


def render_label(label: StratumLabel, n: int) -> str:
    half = n // 2
    if label.kind is LabelKind.S0:
        return "S_0"
    if label.kind is LabelKind.S0_LT:
        return f"S_0^{{<{n}}}"
    if label.kind is LabelKind.S0_HALF_HALF:
        return f"S_0^{{{half},{half}}}"
    if label.kind is LabelKind.S0_HALF_LT:
        return f"S_0^{{{half},<{half}}}"
    if label.kind is LabelKind.TWO_POINT:
        r = label.r
        return f"S_{2 * r - n}^{{{r},{n - r}}}"
    if label.kind is LabelKind.COMPLEMENT:
        r = label.r
        return f"S_{2 * r - n}^{{{r},<{n - r}}}"
    if label.kind is LabelKind.S_NMINUS2:
        return f"S_{n - 2}"
    return f"S_{n}"


# -- classification -------------------------------------------------------------


def signature_of_points(points: Sequence[Tuple[Fraction, Fraction]]) -> Signature:
    """Group homogeneous coordinate pairs by projective equality (cross
    product a*d - b*c = 0) and return the multiplicity partition."""
    if not points:
        raise SemanticError("need at least one point")
    for a, b in points:
        if a == 0 and b == 0:
            raise SemanticError("homogeneous coordinates must not both vanish")
    reps: List[Tuple[Fraction, Fraction]] = []
    counts: List[int] = []
    for a, b in points:
        for k, (c, d) in enumerate(reps):
            if a * d - b * c == 0:
                counts[k] += 1
                break
        else:
            reps.append((a, b))
            counts.append(1)
    return Signature.of(len(points), counts)


def hkkn_index(sig: Signature) -> int:
    """Instability index of the signature: 2r - n when the biggest cluster
    exceeds half the points, zero otherwise."""
    r = sig.max_mult()
    return 2 * r - sig.n if 2 * r > sig.n else 0


def classify(sig: Signature) -> StratumLabel:
    """Refined stratum of a signature; total and single-valued on partitions."""
    n, r = sig.n, sig.max_mult()
    if 2 * r > n:
        if r == n:
            return StratumLabel(LabelKind.S_N)
        if r == n - 1:
            return StratumLabel(LabelKind.S_NMINUS2)
        if sig.mults == tuple(sorted((r, n - r), reverse=True)):
            return StratumLabel(LabelKind.TWO_POINT, r=r)
        return StratumLabel(LabelKind.COMPLEMENT, r=r)
    if n % 2 == 1:
        return StratumLabel(LabelKind.S0)
    if 2 * r < n:
        return StratumLabel(LabelKind.S0_LT)
    if sig.mults == (n // 2, n // 2):
        return StratumLabel(LabelKind.S0_HALF_HALF)
    return StratumLabel(LabelKind.S0_HALF_LT)


def partitions_of(n: int, max_part: Optional[int] = None) -> List[Partition]:
    """All partitions of n (descending parts), lexicographically descending."""
    cap = n if max_part is None else min(max_part, n)
    out: List[Partition] = []

    def rec(remaining: int, bound: int, prefix: List[int]) -> None:
        if remaining == 0:
            out.append(tuple(prefix))
            return
        for part in range(min(bound, remaining), 0, -1):
            prefix.append(part)
            rec(remaining - part, part, prefix)
            prefix.pop()

    rec(n, cap, [])
    return out


def signatures_with_label(n: int, label: StratumLabel) -> FrozenSet[Partition]:
    return frozenset(p for p in partitions_of(n)
                     if classify(Signature(n, p)) == label)


ENUMERATION_CAP = 40


def enumerate_strata(n: int) -> List[StratumLabel]:
    """Exact label list of the refined stratification, in increasing
    instability-norm order (the zero-index block first, then ascending r)."""
    if n < 2:
        raise SemanticError("need n >= 2")
    if n > ENUMERATION_CAP:
        raise OracleLimitError(f"point-line enumeration limited to n <= {ENUMERATION_CAP}")
    labels: List[StratumLabel] = []
    if n % 2 == 1:
        labels.append(StratumLabel(LabelKind.S0))
    else:
        for kind in (LabelKind.S0_LT, LabelKind.S0_HALF_HALF, LabelKind.S0_HALF_LT):
            if signatures_with_label(n, StratumLabel(kind)):
                labels.append(StratumLabel(kind))
    lo = n // 2 + 1
    for r in range(lo, n - 1):
        labels.append(StratumLabel(LabelKind.TWO_POINT, r=r))
        labels.append(StratumLabel(LabelKind.COMPLEMENT, r=r))
    if n - 1 > n / 2:
        labels.append(StratumLabel(LabelKind.S_NMINUS2))
    labels.append(StratumLabel(LabelKind.S_N))
    return labels


# -- connectivity oracle on coincidence patterns ----------------------------------

Pattern = FrozenSet[FrozenSet[int]]


def _patterns_with_shape(elements: Tuple[int, ...], shape: Tuple[int, ...]) -> Iterable[Pattern]:
    """Set partitions of the elements with exactly the given block sizes.

    The smallest remaining element anchors its block, so each partition is
    produced once.
    """
    import itertools

    def rec(remaining: Tuple[int, ...], sizes: Tuple[int, ...]):
        if not remaining:
            yield ()
            return
        anchor, rest = remaining[0], remaining[1:]
        for size in sorted(set(sizes), reverse=True):
            reduced = list(sizes)
            reduced.remove(size)
            for combo in itertools.combinations(rest, size - 1):
                block = frozenset((anchor,) + combo)
                left = tuple(x for x in rest if x not in block)
                for tail in rec(left, tuple(reduced)):
                    yield (block,) + tail

    for blocks in rec(tuple(elements), tuple(shape)):
        yield frozenset(blocks)


def _pattern_signature(n: int, pat: Pattern) -> Partition:
    return tuple(sorted((len(b) for b in pat), reverse=True))


def _merges(pat: Pattern) -> Iterable[Pattern]:
    blocks = sorted(pat, key=lambda b: sorted(b))
    for i in range(len(blocks)):
        for j in range(i + 1, len(blocks)):
            merged = blocks[i] | blocks[j]
            rest = [b for k, b in enumerate(blocks) if k not in (i, j)]
            yield frozenset([merged, *rest])


def _signature_family_components(n: int, sigs: FrozenSet[Partition]) -> int:
    """Connected components of the configurations whose signature lies in the
    family, under label-preserving merges and their reverse deformations."""
    members: List[Pattern] = []
    for shape in sorted(sigs, reverse=True):
        members.extend(_patterns_with_shape(tuple(range(n)), shape))
    index = {pat: k for k, pat in enumerate(members)}
    parent = list(range(len(members)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i: int, j: int) -> None:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)

    for pat in members:
        for merged in _merges(pat):
            if _pattern_signature(n, merged) in sigs:
                union(index[pat], index[merged])
    return len({find(i) for i in range(len(members))})


def label_component_count(n: int, label: StratumLabel) -> int:
    """Derived component count of a refined stratum (pattern connectivity)."""
    if n > PATTERN_ORACLE_CAP:
        raise OracleLimitError(f"pattern oracle limited to n <= {PATTERN_ORACLE_CAP}")
    sigs = signatures_with_label(n, label)
    if not sigs:
        raise SemanticError(f"label {render_label(label, n)} is empty for n={n}")
    return _signature_family_components(n, sigs)


def hkkn_family_component_count(n: int, beta: int) -> int:
    """Component count of a whole instability stratum (index beta = 2r - n).

    The reported value is binomial(n, r); the pattern oracle recomputes it
    independently and the two must agree.
    """
    if n > PATTERN_ORACLE_CAP:
        raise OracleLimitError(f"pattern oracle limited to n <= {PATTERN_ORACLE_CAP}")
    if beta == 0:
        sigs = frozenset(p for p in partitions_of(n) if 2 * p[0] <= n)
        if not sigs:
            raise SemanticError(f"the zero stratum is empty for n={n}")
    else:
        if (beta + n) % 2 != 0:
            raise SemanticError(f"index {beta} has the wrong parity for n={n}")
        r = (beta + n) // 2
        if not (n / 2 < r <= n):
            raise SemanticError(f"index {beta} does not occur for n={n}")
        sigs = frozenset(p for p in partitions_of(n) if p[0] == r)
    return _signature_family_components(n, sigs)


def binomial(n: int, r: int) -> int:
    return math.comb(n, r)


def component_count(n: int, label: StratumLabel) -> Tuple[int, str]:
    """Component count of a refined stratum with its provenance flag.

    Whole instability strata (r = n - 1 and r = n, whose refined labels
    coincide with the full stratum) carry the reported binomial value;
    everything else is derived from the connectivity oracle.
    """
    if label not in enumerate_strata(n):
        raise SemanticError(f"label {render_label(label, n)} is not a stratum for n={n}")
    count = label_component_count(n, label)
    if label.kind is LabelKind.S_NMINUS2:
        assert count == binomial(n, n - 1)
        return count, "paper"
    if label.kind is LabelKind.S_N:
        assert count == 1
        return count, "paper"
    return count, "derived"


# -- input parsing ----------------------------------------------------------------


def parse_partition(n: int, text: str) -> Signature:
    """Parse "4+1+1" into a signature of n; the parts must sum to n."""
    try:
        parts = [int(tok) for tok in text.replace(" ", "").split("+") if tok != ""]
    except ValueError as exc:
        raise ProblemFormatError(f"malformed partition {text!r}") from exc
    if not parts:
        raise ProblemFormatError("empty partition")
    if any(p < 1 for p in parts):
        raise SemanticError("partition parts must be positive")
    if sum(parts) != n:
        raise SemanticError(f"partition sums to {sum(parts)}, expected {n}")
    return Signature.of(n, parts)


def parse_points(text: str) -> List[Tuple[Fraction, Fraction]]:
    """Parse "a/b:c/d,..." homogeneous pairs."""
    points = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        pieces = tok.split(":")
        if len(pieces) != 2:
            raise ProblemFormatError(f"malformed homogeneous pair {tok!r} (expected 'a:c')")
        a, b = parse_rational(pieces[0]), parse_rational(pieces[1])
        points.append((a, b))
    if not points:
        raise ProblemFormatError("empty point list")
    return points
