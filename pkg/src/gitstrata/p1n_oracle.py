"""Ordered point configurations on the projective line as refinement oracles.

Node problems of the recursion are families of signature classes; the group
data (special linear group, its Borel with graded unipotent part, the
diagonal torus) enters through the case answers each node kind supplies.
Stabiliser dimensions in the unipotent direction are trivial except at total
coincidence, where they are constant, so the graded cases never need a
blow-up; the even-half split is the one place a blow-up is required, and its
outcome (the three-way decomposition of the semistable part) is supplied
rather than constructed.

Inner flow-in problems (the parabolic recursion) use opaque tokens as loci;
only node-level strata are emitted, always as whole label classes, which is
what the displayed decompositions of the example list.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import FrozenSet, List, Optional, Sequence, Tuple

from .errors import SemanticError
from .p1n import (LabelKind, Partition, Signature, StratumLabel, classify,
                  hkkn_index, partitions_of, render_label, signatures_with_label)
from .refine import (BlowUpOutcome, DaggerCase, FixedSweep, OpenHkknStratum,
                     StratumComponent)

SigSet = FrozenSet[Partition]

STAB_DIM = {
    LabelKind.S0: 0,
    LabelKind.S0_LT: 0,
    LabelKind.S0_HALF_HALF: 1,
    LabelKind.S0_HALF_LT: 0,
    LabelKind.TWO_POINT: 1,
    LabelKind.COMPLEMENT: 0,
    LabelKind.S_NMINUS2: 1,
    LabelKind.S_N: 2,
}

WITNESS = {
    LabelKind.S0: "stable configurations: classical geometric quotient",
    LabelKind.S0_LT: "stable configurations: classical geometric quotient",
    LabelKind.S0_HALF_HALF: ("balanced two-point configurations: sweep of the "
                             "torus-fixed locus, quotient by the torus normaliser"),
    LabelKind.S0_HALF_LT: ("post-blow-up stable locus: geometric quotient after "
                           "removing the balanced two-point centre"),
    LabelKind.TWO_POINT: ("sweep of the two-point fixed configurations; "
                          "orbit space of the torus normaliser action"),
    LabelKind.COMPLEMENT: ("basin of the flow to the fixed configurations minus "
                           "its sweep; graded-group geometric quotient"),
    LabelKind.S_NMINUS2: ("near-total coincidence: unipotent sweep covers the "
                          "whole stratum, constant one-dimensional stabilisers"),
    LabelKind.S_N: ("total coincidence: a single group orbit family with "
                    "constant two-dimensional stabilisers; quotient is a point"),
}


@dataclass(frozen=True)
class SigLocus:
    label: StratumLabel
    sigs: SigSet


@dataclass(frozen=True)
class FlowToken:
    """Opaque locus of an inner flow-in problem ("sweep", "basin", "whole")."""
    kind: str
    r: int


def _sigs_max_at_least(n: int, r: int) -> SigSet:
    return frozenset(p for p in partitions_of(n) if p[0] >= r)


def _sigs_max_exactly(n: int, r: int) -> SigSet:
    return frozenset(p for p in partitions_of(n) if p[0] == r)


def _merge_closure(sigs: SigSet) -> SigSet:
    out = set(sigs)
    frontier = list(sigs)
    while frontier:
        p = frontier.pop()
        for i in range(len(p)):
            for j in range(i + 1, len(p)):
                merged = tuple(sorted(
                    [p[k] for k in range(len(p)) if k not in (i, j)] + [p[i] + p[j]],
                    reverse=True))
                if merged not in out:
                    out.add(merged)
                    frontier.append(merged)
    return frozenset(out)


def _label_component(n: int, label: StratumLabel) -> StratumComponent:
    sigs = signatures_with_label(n, label)
    if not sigs:
        raise SemanticError(f"label {render_label(label, n)} is empty for n={n}")
    return StratumComponent(
        classes=sigs,
        description=render_label(label, n),
        stab_dim=STAB_DIM[label.kind],
        stab_dims=(STAB_DIM[label.kind],),
        witness=WITNESS[label.kind],
        label=render_label(label, n))


class _P1nNode:
    """Shared plumbing; subclasses answer the case questions."""

    def __init__(self, n: int):
        self.n = n

    # engine hooks that only node kinds with the matching case implement
    def _na(self, what: str):
        raise SemanticError(f"{what} not applicable at {self.describe()} (oracle bug)")

    def classes(self) -> SigSet:
        raise NotImplementedError

    def describe(self) -> str:
        raise NotImplementedError

    def is_base(self) -> bool:
        return False

    def whole_locus(self):
        return SigLocus(label=None, sigs=self.classes())  # type: ignore[arg-type]

    def is_empty_locus(self, locus) -> bool:
        if isinstance(locus, SigLocus):
            return not locus.sigs
        return False

    def is_lambda_nontrivial(self) -> bool:
        return False

    def u_sweep_is_open(self) -> bool:
        self._na("unipotent sweep test")

    def z_min_problem(self):
        self._na("minimal fixed locus problem")

    def case1_sweep_stratum(self, sub_s0):
        self._na("graded sweep stratum")

    def case1_basin_stratum(self, sub_s0):
        self._na("graded basin stratum")

    def stable_nonempty(self) -> bool:
        return False

    def semistable_nonempty(self) -> bool:
        return False

    def stable_locus(self):
        self._na("stable locus")

    def open_hkkn_stratum(self) -> OpenHkknStratum:
        self._na("open unstable stratum")

    def ybar_problem(self, info: OpenHkknStratum):
        self._na("flow-in closure problem")

    def case2bi_stratum(self, info: OpenHkknStratum, sub_s0):
        self._na("flow-in sweep stratum")

    def regraded_problem(self, info: OpenHkknStratum):
        self._na("regraded problem")

    def quotient_group_problem(self, info: OpenHkknStratum):
        self._na("quotient group problem")

    def lift_sublocus(self, sub_s0):
        return sub_s0

    def fixed_sweep(self) -> Optional[FixedSweep]:
        return None

    def unipotent_stab_dims(self, locus) -> tuple:
        self._na("unipotent stabiliser dimensions")

    def blow_up_available(self) -> bool:
        return self.blow_up_outcome() is not None

    def blow_up_outcome(self) -> Optional[BlowUpOutcome]:
        return None

    def stratum_components(self, locus) -> List[StratumComponent]:
        if not isinstance(locus, SigLocus):
            self._na("component emission for an inner locus")
        if locus.label is None:
            dims = tuple(sorted({STAB_DIM[classify(Signature(self.n, p)).kind]
                                 for p in locus.sigs}))
            return [StratumComponent(
                classes=locus.sigs,
                description="S_0",
                stab_dim=dims[0],
                stab_dims=dims,
                witness="semistable configurations: good quotient",
                label="S_0")]
        return [_label_component(self.n, locus.label)]

    def complement_components(self, locus) -> List["_P1nNode"]:
        raise NotImplementedError

    def point_classes(self, locus) -> SigSet:
        if isinstance(locus, SigLocus):
            return locus.sigs
        if isinstance(locus, frozenset):
            return locus
        self._na("point classes of an inner locus")

    def closure_classes(self, classes: SigSet) -> SigSet:
        return _merge_closure(classes)

    def class_hkkn_index(self, cls: Partition) -> int:
        return hkkn_index(Signature(self.n, cls))

    def hkkn_refinement_applies(self) -> bool:
        return True

    def dagger_cases(self) -> Sequence[DaggerCase]:
        self._na("stabiliser-condition cases")


def _locus(n: int, kind: LabelKind, r: Optional[int] = None) -> SigLocus:
    label = StratumLabel(kind, r=r)
    return SigLocus(label=label, sigs=signatures_with_label(n, label))


class RootNode(_P1nNode):
    """All configurations: the reductive entry point of the recursion."""

    def describe(self) -> str:
        return f"ordered {self.n}-point configurations on the projective line"

    def classes(self) -> SigSet:
        return frozenset(partitions_of(self.n))

    def measure(self) -> Tuple[int, ...]:
        return (len(self.classes()), 3)

    def stable_nonempty(self) -> bool:
        return any(2 * p[0] < self.n for p in partitions_of(self.n))

    def semistable_nonempty(self) -> bool:
        return any(2 * p[0] <= self.n for p in partitions_of(self.n))

    def stable_locus(self) -> SigLocus:
        kind = LabelKind.S0 if self.n % 2 == 1 else LabelKind.S0_LT
        return _locus(self.n, kind)

    def semistable_locus(self) -> SigLocus:
        sigs = frozenset(p for p in partitions_of(self.n) if 2 * p[0] <= self.n)
        return SigLocus(label=None, sigs=sigs)

    def fixed_sweep(self) -> Optional[FixedSweep]:
        n = self.n
        if n % 2 == 1:
            return None
        balanced = frozenset({(n // 2, n // 2)})
        ss = frozenset(p for p in partitions_of(n) if 2 * p[0] <= n)
        if ss != balanced:
            return None
        return FixedSweep(
            locus=SigLocus(label=StratumLabel(LabelKind.S0_HALF_HALF), sigs=balanced),
            witness=WITNESS[LabelKind.S0_HALF_HALF],
            subgroup_label="R'=maximal torus")

    def complement_components(self, locus) -> List[_P1nNode]:
        n = self.n
        rest = self.classes() - self.point_classes(locus)
        tail_start = min(p[0] for p in rest)
        if 2 * tail_start > n and rest == _sigs_max_at_least(n, tail_start):
            return [TailNode(n, tail_start)]
        return [EvenSplitNode(n)]

    def dagger_cases(self) -> List[DaggerCase]:
        n = self.n
        out: List[DaggerCase] = []
        ss = frozenset(p for p in partitions_of(n) if 2 * p[0] <= n)
        if ss:
            out.append(DaggerCase(
                index_label="0", holds=n % 2 == 1,
                stratum_classes=ss, sweep_components=(ss,),
                complement_components=()))
        for r in range(n // 2 + 1, n + 1):
            stratum = _sigs_max_exactly(n, r)
            two_point = frozenset({tuple(sorted((r, n - r), reverse=True))}) if r < n \
                else frozenset({(n,)})
            rest = stratum - two_point
            out.append(DaggerCase(
                index_label=str(2 * r - n), holds=r < n,
                stratum_classes=stratum,
                sweep_components=(two_point,),
                complement_components=(rest,) if rest else ()))
        return out


class EvenSplitNode(_P1nNode):
    """Even half: configurations where at least half the points coincide.

    Semistable but nowhere stable; no fixed-locus sweep is open, so the
    stratum needs the blow-up whose stated outcome is the three-way split.
    """

    def describe(self) -> str:
        return f"{self.n}-point configurations with a cluster of at least half the points"

    def classes(self) -> SigSet:
        return _sigs_max_at_least(self.n, self.n // 2)

    def measure(self) -> Tuple[int, ...]:
        return (len(self.classes()), 3)

    def semistable_nonempty(self) -> bool:
        return True

    def fixed_sweep(self) -> Optional[FixedSweep]:
        # the balanced two-point sweep is closed, not open, in the semistable part
        return None

    def blow_up_outcome(self) -> Optional[BlowUpOutcome]:
        return BlowUpOutcome(
            locus=_locus(self.n, LabelKind.S0_HALF_LT),
            witness=WITNESS[LabelKind.S0_HALF_LT],
            note="blow-up along the balanced two-point centre, outcome supplied")

    def complement_components(self, locus) -> List[_P1nNode]:
        return [BalancedAndWorseNode(self.n)]


class BalancedAndWorseNode(_P1nNode):
    """Balanced two-point configurations together with everything less stable."""

    def describe(self) -> str:
        return (f"{self.n}-point configurations: balanced two-point or a cluster "
                f"of more than half")

    def classes(self) -> SigSet:
        n = self.n
        return frozenset({(n // 2, n // 2)}) | _sigs_max_at_least(n, n // 2 + 1)

    def measure(self) -> Tuple[int, ...]:
        return (len(self.classes()), 3)

    def semistable_nonempty(self) -> bool:
        return True

    def fixed_sweep(self) -> Optional[FixedSweep]:
        n = self.n
        balanced = frozenset({(n // 2, n // 2)})
        return FixedSweep(
            locus=SigLocus(label=StratumLabel(LabelKind.S0_HALF_HALF), sigs=balanced),
            witness=WITNESS[LabelKind.S0_HALF_HALF],
            subgroup_label="R'=maximal torus")

    def complement_components(self, locus) -> List[_P1nNode]:
        return [TailNode(self.n, self.n // 2 + 1)]


class TailNode(_P1nNode):
    """Configurations with a cluster of at least r points (r > n/2): entirely
    unstable, the minimal-index stratum {max = r} is open and dense."""

    def __init__(self, n: int, r: int):
        super().__init__(n)
        self.r = r

    def describe(self) -> str:
        return f"{self.n}-point configurations with a cluster of at least {self.r}"

    def classes(self) -> SigSet:
        return _sigs_max_at_least(self.n, self.r)

    def measure(self) -> Tuple[int, ...]:
        return (len(self.classes()), 3)

    def open_hkkn_stratum(self) -> OpenHkknStratum:
        # the flow-in locus pins the cluster at one point; its closure never
        # exhausts the stratum sweep, so the parabolic recursion applies
        return OpenHkknStratum(beta_label=str(2 * self.r - self.n),
                               closure_is_whole=False)

    def ybar_problem(self, info: OpenHkknStratum) -> "_P1nNode":
        return FlowInNode(self.n, self.r, from_mid=False)

    def case2bi_stratum(self, info: OpenHkknStratum, sub_s0) -> SigLocus:
        n, r = self.n, self.r
        if not isinstance(sub_s0, FlowToken):
            self._na("flow-in sweep of a non-token locus")
        if sub_s0.kind == "basin":
            return _locus(n, LabelKind.COMPLEMENT, r=r)
        if sub_s0.kind == "sweep":
            return _locus(n, LabelKind.S_NMINUS2)
        if sub_s0.kind == "whole":
            return _locus(n, LabelKind.S_N)
        self._na(f"flow-in token {sub_s0.kind!r}")

    def complement_components(self, locus) -> List[_P1nNode]:
        n, r = self.n, self.r
        if r == n:
            return []
        if r == n - 1:
            return [TailNode(n, n)]
        return [TwoPointAndWorseNode(n, r)]


class TwoPointAndWorseNode(_P1nNode):
    """The two-point classes of multiplicity (r, n-r) together with every
    configuration having a cluster larger than r."""

    def __init__(self, n: int, r: int):
        super().__init__(n)
        self.r = r

    def describe(self) -> str:
        return (f"{self.n}-point configurations: two-point of type "
                f"({self.r},{self.n - self.r}) or a cluster of more than {self.r}")

    def classes(self) -> SigSet:
        n, r = self.n, self.r
        return frozenset({tuple(sorted((r, n - r), reverse=True))}) | \
            _sigs_max_at_least(n, r + 1)

    def measure(self) -> Tuple[int, ...]:
        return (len(self.classes()), 3)

    def open_hkkn_stratum(self) -> OpenHkknStratum:
        return OpenHkknStratum(beta_label=str(2 * self.r - self.n),
                               closure_is_whole=False)

    def ybar_problem(self, info: OpenHkknStratum) -> "_P1nNode":
        return FlowInNode(self.n, self.r, from_mid=True)

    def case2bi_stratum(self, info: OpenHkknStratum, sub_s0) -> SigLocus:
        if not (isinstance(sub_s0, FlowToken) and sub_s0.kind == "sweep"):
            self._na("unexpected flow-in locus for the two-point stratum")
        return _locus(self.n, LabelKind.TWO_POINT, r=self.r)

    def complement_components(self, locus) -> List[_P1nNode]:
        return [TailNode(self.n, self.r + 1)]


class FlowInNode(_P1nNode):
    """Closure of the flow-in locus: at least r points at the distinguished
    position (plus, from a two-point node, the residue at a common second
    point).  The parabolic group acts with its grading subgroup, so this is
    the graded case; unipotent stabilisers vanish except at total
    coincidence, where their dimension is constant."""

    def __init__(self, n: int, r: int, from_mid: bool):
        super().__init__(n)
        self.r = r
        self.from_mid = from_mid

    def describe(self) -> str:
        where = "two-point flow-in" if self.from_mid else "flow-in"
        return f"{where} closure at cluster size {self.r} of {self.n}"

    def measure(self) -> Tuple[int, ...]:
        if self.from_mid:
            return (2, 2)
        return (len(_sigs_max_at_least(self.n, self.r)), 2)

    def is_base(self) -> bool:
        return self.r == self.n  # a single configuration

    def whole_locus(self) -> FlowToken:
        return FlowToken(kind="whole", r=self.r)

    def is_lambda_nontrivial(self) -> bool:
        return True

    def unipotent_stab_dims(self, locus) -> tuple:
        # one derived-series level; the stabiliser is trivial away from total
        # coincidence and one-dimensional exactly there, constantly
        return (1,) if self.r == self.n else (0,)

    def u_sweep_is_open(self) -> bool:
        # the unipotent sweep of the fixed configurations is open exactly when
        # only one point is free (near-total coincidence) or from a two-point
        # node (one common free position)
        return self.from_mid or self.r == self.n - 1

    def z_min_problem(self) -> "_P1nNode":
        return FixedConfigNode(self.n, self.r)

    def case1_sweep_stratum(self, sub_s0) -> FlowToken:
        return FlowToken(kind="sweep", r=self.r)

    def case1_basin_stratum(self, sub_s0) -> FlowToken:
        return FlowToken(kind="basin", r=self.r)


class FixedConfigNode(_P1nNode):
    """Fixed configurations of the grading subgroup: r points at one pole,
    the rest at the other; zero-dimensional, hence base."""

    def __init__(self, n: int, r: int):
        super().__init__(n)
        self.r = r

    def describe(self) -> str:
        return f"fixed configurations of type ({self.r},{self.n - self.r})"

    def measure(self) -> Tuple[int, ...]:
        return (1, 1)

    def is_base(self) -> bool:
        return True

    def whole_locus(self) -> FlowToken:
        return FlowToken(kind="fixed", r=self.r)


ENUMERATION_CAP = 40  # partitions of n are materialised throughout


def p1n_oracle(n: int) -> RootNode:
    """Oracle instantiation of the n-point example (2 <= n <= cap)."""
    if n < 2:
        raise SemanticError("need n >= 2")
    if n > ENUMERATION_CAP:
        from .errors import OracleLimitError
        raise OracleLimitError(f"point-line enumeration limited to n <= {ENUMERATION_CAP}")
    return RootNode(n)
