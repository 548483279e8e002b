"""Recursive refinement of the instability stratification.

The engine computes, for a problem presented through the
:class:`GitProblemOracle` capability interface, a nonempty invariant open
stratum (seven-case dispatch), then recurses into the connected components
of the closed complement.  Leaves partition the problem, each carrying a
geometric-quotient witness, and the index of a leaf is its path: open-stratum
components sit below everything recursed from the complement, sibling
components are incomparable.

Oracles own all geometry.  Two are provided: torus problems
(:mod:`gitstrata.torus_oracle`) and ordered point configurations on the
projective line (:mod:`gitstrata.p1n_oracle`).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Hashable, List, Optional, Protocol, Sequence, Tuple

from .errors import RecursionLimitError, SemanticError, UnsupportedBlowupError

GammaStep = Tuple[str, int]  # ("open", i) terminal | ("sub", j) descend
GammaPath = Tuple[GammaStep, ...]

# Backstop only: termination is enforced by the strict measure decrease on
# every recursive edge, so the cap merely guards against oracle bugs.  Deep
# complement chains on ten-index problems legitimately pass one hundred
# levels, hence the generous default.
DEFAULT_DEPTH_CAP = 4096
_CASE_CHAIN_CAP = 6


def gamma_label(path: GammaPath) -> str:
    """Nested rendering of an index path, e.g. "(X1,(X2,(0,1)))"."""
    text = None
    for step, k in reversed(path):
        if step == "open":
            text = f"(0,{k})"
        else:
            text = f"(X{k},{text})"
    return text or "()"


def gamma_less(a: GammaPath, b: GammaPath) -> bool:
    """Strict order on leaf indices: open-stratum components precede every
    index recursed from the complement of the same node; siblings from
    distinct components are incomparable."""
    for sa, sb in zip(a, b):
        if sa == sb:
            continue
        return sa[0] == "open" and sb[0] == "sub"
    return False


@dataclass(frozen=True)
class StratumComponent:
    """One emitted leaf payload, supplied by the oracle."""

    classes: FrozenSet[Hashable]          # point classes (supports / signatures)
    description: str
    stab_dim: int                         # generic (minimal) stabiliser dimension
    witness: str
    stab_dims: Tuple[int, ...] = ()       # all values met on the leaf, ascending
    label: Optional[str] = None           # display label (point-line example)
    component_count: Optional[int] = None
    component_provenance: Optional[str] = None

    def stab_dim_constant(self) -> bool:
        return len(self.stab_dims) <= 1


@dataclass(frozen=True)
class OpenHkknStratum:
    """Data of the minimal-norm unstable stratum used by the no-semistable case."""

    beta_label: str
    closure_is_whole: bool
    z_beta_is_whole: bool = False


@dataclass(frozen=True)
class FixedSweep:
    locus: Hashable
    witness: str
    subgroup_label: str


@dataclass(frozen=True)
class BlowUpOutcome:
    locus: Hashable
    witness: str
    note: str


class GitProblemOracle(Protocol):
    """Capability interface the recursion drives.

    Sub-problems returned by ``z_min_problem``, ``ybar_problem``,
    ``quotient_group_problem`` and ``complement_components`` must have
    strictly smaller :meth:`measure` (lexicographic); the engine enforces
    this defensively.
    """

    def describe(self) -> str: ...
    def measure(self) -> Tuple[int, ...]: ...
    def is_base(self) -> bool: ...
    def whole_locus(self) -> Hashable: ...
    def is_empty_locus(self, locus: Hashable) -> bool: ...
    # grading (Case 1)
    def is_lambda_nontrivial(self) -> bool: ...
    def u_sweep_is_open(self) -> bool: ...
    def unipotent_stab_dims(self, locus: Hashable) -> Tuple[int, ...]: ...
    def z_min_problem(self) -> "GitProblemOracle": ...
    def case1_sweep_stratum(self, sub_s0: Hashable) -> Hashable: ...
    def case1_basin_stratum(self, sub_s0: Hashable) -> Hashable: ...
    # reductive (Case 2)
    def stable_nonempty(self) -> bool: ...
    def semistable_nonempty(self) -> bool: ...
    def stable_locus(self) -> Hashable: ...
    def semistable_locus(self) -> Hashable: ...
    def open_hkkn_stratum(self) -> OpenHkknStratum: ...
    def ybar_problem(self, info: OpenHkknStratum) -> "GitProblemOracle": ...
    def case2bi_stratum(self, info: OpenHkknStratum, sub_s0: Hashable) -> Hashable: ...
    def regraded_problem(self, info: OpenHkknStratum) -> "GitProblemOracle": ...
    def quotient_group_problem(self, info: OpenHkknStratum) -> "GitProblemOracle": ...
    def lift_sublocus(self, sub_s0: Hashable) -> Hashable: ...
    def fixed_sweep(self) -> Optional[FixedSweep]: ...
    def blow_up_available(self) -> bool: ...
    def blow_up_outcome(self) -> Optional[BlowUpOutcome]: ...
    # assembly
    def stratum_components(self, locus: Hashable) -> Sequence[StratumComponent]: ...
    def complement_components(self, locus: Hashable) -> Sequence["GitProblemOracle"]: ...
    # verification hooks
    def point_classes(self, locus: Hashable) -> FrozenSet[Hashable]: ...
    def closure_classes(self, locus: Hashable) -> FrozenSet[Hashable]: ...
    def class_hkkn_index(self, cls: Hashable) -> Hashable: ...
    def hkkn_refinement_applies(self) -> bool: ...
    def dagger_cases(self) -> Sequence["DaggerCase"]: ...


@dataclass(frozen=True)
class DaggerCase:
    """Per instability index: does the stabiliser condition hold, and if so
    what split of the stratum does it force."""

    index_label: str
    holds: bool
    stratum_classes: FrozenSet[Hashable]
    sweep_components: Tuple[FrozenSet[Hashable], ...]
    complement_components: Tuple[FrozenSet[Hashable], ...]


@dataclass
class S0Result:
    case_trace: Tuple[str, ...]
    locus: Hashable
    witness: str


@dataclass
class StratLeaf:
    gamma: GammaPath
    case_trace: Tuple[str, ...]
    component: StratumComponent


@dataclass
class FrontierEntry:
    gamma_prefix: GammaPath
    description: str
    classes: FrozenSet[Hashable]
    case_trace: Tuple[str, ...]


@dataclass
class StratTree:
    root: GitProblemOracle
    leaves: List[StratLeaf]
    frontier: List[FrontierEntry]

    @property
    def complete(self) -> bool:
        return not self.frontier


def _check_measure(parent: GitProblemOracle, child: GitProblemOracle) -> None:
    if not tuple(child.measure()) < tuple(parent.measure()):
        raise RecursionLimitError(
            f"recursion measure failed to decrease: {parent.describe()} "
            f"{parent.measure()} -> {child.describe()} {child.measure()}")


def s0(problem: GitProblemOracle, depth: int = 0,
       depth_cap: int = DEFAULT_DEPTH_CAP, good_quotients: bool = False) -> S0Result:
    """Open stratum of the problem: the seven-case dispatch.

    The case chain may regrade once (a dense unstable stratum whose index
    grades the whole space) before settling; recursive sub-computations go
    through :func:`s0` again with the measure check.

    ``good_quotients`` switches on the simplified variant that merges the
    stable and fixed-sweep cases into one: whenever the semistable locus is
    nonempty it becomes the open stratum, with a good (not necessarily
    geometric) quotient.
    """
    if depth > depth_cap:
        raise RecursionLimitError(f"depth cap {depth_cap} exceeded")
    trace: List[str] = []
    current = problem
    for _ in range(_CASE_CHAIN_CAP):
        if current.is_base():
            trace.append("base")
            return S0Result(tuple(trace), current.whole_locus(),
                            "zero-dimensional problem or trivial group: the whole space, "
                            "orbit space is the space itself")
        if current.is_lambda_nontrivial():
            sub = current.z_min_problem()
            _check_measure(current, sub)
            sub_res = s0(sub, depth + 1, depth_cap, good_quotients)
            if current.u_sweep_is_open():
                trace.append("1a")
                locus = current.case1_sweep_stratum(sub_res.locus)
                witness = ("unipotent sweep of the minimal fixed locus over its open "
                           "stratum; quotient agrees with the fixed-locus quotient")
            else:
                locus = current.case1_basin_stratum(sub_res.locus)
                if current.is_empty_locus(locus):
                    # reducible input: nothing flows in over the fixed-locus
                    # open stratum, so that stratum is itself open and the
                    # sweep branch applies to it
                    trace.append("1a")
                    locus = current.case1_sweep_stratum(sub_res.locus)
                    witness = ("no basin above the fixed-locus open stratum: its "
                               "sweep is open; quotient agrees with the "
                               "fixed-locus quotient")
                else:
                    trace.append("1b")
                    witness = ("limit-retraction basin over the fixed-locus open "
                               "stratum, minus the sweep of the fixed locus; "
                               "geometric quotient by the graded group")
            if current.is_empty_locus(locus):
                raise SemanticError(
                    f"empty graded open stratum at {current.describe()} (oracle bug)")
            return S0Result(tuple(trace), locus, witness)
        if good_quotients and current.semistable_nonempty():
            trace.append("2a'")
            return S0Result(tuple(trace), current.semistable_locus(),
                            "semistable locus: good quotient by classical "
                            "reductive theory (geometric only where stabilisers "
                            "are uniform)")
        if current.stable_nonempty():
            trace.append("2a")
            return S0Result(tuple(trace), current.stable_locus(),
                            "stable locus: geometric quotient by classical "
                            "reductive theory")
        if not current.semistable_nonempty():
            trace.append("2b")
            info = current.open_hkkn_stratum()
            if not info.closure_is_whole:
                trace.append("2bi")
                sub = current.ybar_problem(info)
                _check_measure(current, sub)
                sub_res = s0(sub, depth + 1, depth_cap, good_quotients)
                trace.extend(sub_res.case_trace)
                locus = current.case2bi_stratum(info, sub_res.locus)
                return S0Result(tuple(trace), locus,
                                f"group sweep of the open stratum of the closed "
                                f"flow-in locus of index {info.beta_label}; induced "
                                f"geometric quotient")
            trace.append("2bii")
            if not info.z_beta_is_whole:
                current = current.regraded_problem(info)
                continue
            sub = current.quotient_group_problem(info)
            _check_measure(current, sub)
            sub_res = s0(sub, depth + 1, depth_cap, good_quotients)
            trace.extend(sub_res.case_trace)
            return S0Result(tuple(trace), current.lift_sublocus(sub_res.locus),
                            "index acts trivially: quotient-group recursion")
        sweep = current.fixed_sweep()
        if sweep is not None:
            trace.append("2ci")
            return S0Result(tuple(trace), sweep.locus, sweep.witness)
        outcome = current.blow_up_outcome()
        if outcome is not None:
            trace.append("2cii")
            return S0Result(tuple(trace), outcome.locus,
                            f"{outcome.witness} ({outcome.note})")
        raise UnsupportedBlowupError(current.describe(), tuple(trace) + ("2cii",))
    raise RecursionLimitError("case chain failed to settle")


def stratify(problem: GitProblemOracle, depth_cap: int = DEFAULT_DEPTH_CAP,
             good_quotients: bool = False) -> StratTree:
    """Full tree: leaves are the connected components of each node's open
    stratum; unresolved nodes (blow-up needed) land on the frontier.

    ``good_quotients`` selects the simplified variant whose open strata only
    carry good quotients (the semistable locus is never split).
    """
    leaves: List[StratLeaf] = []
    frontier: List[FrontierEntry] = []

    def node(prob: GitProblemOracle, path: GammaPath, depth: int) -> None:
        if depth > depth_cap:
            raise RecursionLimitError(f"depth cap {depth_cap} exceeded")
        try:
            res = s0(prob, depth, depth_cap, good_quotients)
        except UnsupportedBlowupError as exc:
            frontier.append(FrontierEntry(
                gamma_prefix=path, description=prob.describe(),
                classes=prob.point_classes(prob.whole_locus()),
                case_trace=exc.case_trace))
            return
        comps = prob.stratum_components(res.locus)
        if not comps:
            raise SemanticError(f"empty open stratum at {prob.describe()} (oracle bug)")
        for i, comp in enumerate(comps, start=1):
            leaves.append(StratLeaf(gamma=path + (("open", i),),
                                    case_trace=res.case_trace, component=comp))
        for j, sub in enumerate(prob.complement_components(res.locus), start=1):
            _check_measure(prob, sub)
            node(sub, path + (("sub", j),), depth + 1)

    node(problem, (), 0)
    return StratTree(root=problem, leaves=leaves, frontier=frontier)


# -- verification -------------------------------------------------------------


@dataclass
class CheckItem:
    name: str
    ok: bool
    details: List[str] = field(default_factory=list)


@dataclass
class TheoremReport:
    items: List[CheckItem]

    @property
    def ok(self) -> bool:
        return all(item.ok for item in self.items)


def check_refinement_map(tree: StratTree) -> CheckItem:
    """Every leaf sits inside a single instability stratum of the root
    (well-defined leaf-to-stratum map); valid on partial trees too.

    The property is a theorem for reductive (ungraded) root problems only;
    for graded roots the check reports vacuous success.
    """
    root = tree.root
    if not root.hkkn_refinement_applies():
        return CheckItem("refinement_of_instability_stratification", True,
                         ["not asserted for a graded root problem"])
    bad: List[str] = []
    for leaf in tree.leaves:
        indices = {root.class_hkkn_index(c) for c in leaf.component.classes}
        if len(indices) != 1:
            bad.append(f"{gamma_label(leaf.gamma)} meets indices {sorted(map(str, indices))}")
    return CheckItem("refinement_of_instability_stratification", not bad, bad)


def check_theorem(tree: StratTree) -> TheoremReport:
    """Verify the stratification contracts on a complete tree:

    (i) the closure of each leaf is covered by the leaf and strictly larger
    leaves; (ii) each leaf has constant stabiliser dimension and a quotient
    witness; (iv) leaves refine the instability stratification; (v) where the
    stabiliser condition holds for an index, the leaves inside that stratum
    are exactly the components of the fixed-locus sweep and of its complement.
    """
    if not tree.complete:
        raise SemanticError("theorem checks need a complete tree (no frontier)")
    root = tree.root
    items: List[CheckItem] = []

    by_leaf = [(leaf, leaf.component.classes) for leaf in tree.leaves]
    closure_bad: List[str] = []
    for leaf, classes in by_leaf:
        allowed = set(classes)
        for other, other_classes in by_leaf:
            if other is not leaf and gamma_less(leaf.gamma, other.gamma):
                allowed |= other_classes
        extra = root.closure_classes(leaf.component.classes) - allowed
        if extra:
            closure_bad.append(
                f"{gamma_label(leaf.gamma)} closure escapes to {sorted(map(str, extra))[:4]}")
    items.append(CheckItem("closure_order", not closure_bad, closure_bad))

    witness_bad: List[str] = []
    for leaf in tree.leaves:
        if not leaf.component.witness:
            witness_bad.append(f"{gamma_label(leaf.gamma)} missing quotient witness")
        if not leaf.component.stab_dim_constant():
            witness_bad.append(
                f"{gamma_label(leaf.gamma)} has non-constant stabiliser dimensions "
                f"{list(leaf.component.stab_dims)}")
    items.append(CheckItem("geometric_quotient_witnesses", not witness_bad, witness_bad))

    items.append(check_refinement_map(tree))

    dagger_bad: List[str] = []
    dagger_cases = root.dagger_cases() if root.hkkn_refinement_applies() else []
    for case in dagger_cases:
        if not case.holds:
            continue
        expected = {fs for fs in case.sweep_components if fs}
        expected |= {fs for fs in case.complement_components if fs}
        actual = {classes for _, classes in by_leaf if classes <= case.stratum_classes}
        if actual != expected:
            dagger_bad.append(
                f"index {case.index_label}: leaf split does not match the "
                f"fixed-locus sweep decomposition")
    items.append(CheckItem("dagger_splits", not dagger_bad, dagger_bad))

    coverage = set()
    overlap: List[str] = []
    for leaf in tree.leaves:
        if coverage & leaf.component.classes:
            overlap.append(f"{gamma_label(leaf.gamma)} overlaps earlier leaves")
        coverage |= leaf.component.classes
    whole = root.point_classes(root.whole_locus())
    if coverage != whole:
        overlap.append("leaves do not cover the problem")
    items.append(CheckItem("partition", not overlap, overlap))

    return TheoremReport(items)


def tree_dot(tree: StratTree) -> str:
    """DOT rendering: solid tree edges, dashed order edges from each node's
    open-stratum leaves to the leaves below it."""
    lines = ["digraph refine {", "  rankdir=TB;"]
    counter = [0]

    def fresh(prefix: str) -> str:
        counter[0] += 1
        return f"{prefix}{counter[0]}"

    node_names: Dict[GammaPath, str] = {(): "root"}
    lines.append(f'  root [shape=box,label="{tree.root.describe()}"];')
    for leaf in tree.leaves:
        prefix = leaf.gamma[:-1]
        for k in range(len(prefix)):
            sub = prefix[:k + 1]
            if sub not in node_names:
                node_names[sub] = fresh("n")
                lines.append(f'  {node_names[sub]} [shape=box,label="X{sub[-1][1]}"];')
                lines.append(f"  {node_names[sub[:-1]]} -> {node_names[sub]};")
        name = fresh("leaf")
        label = leaf.component.label or leaf.component.description
        case = ",".join(leaf.case_trace)
        lines.append(
            f'  {name} [label="{gamma_label(leaf.gamma)}\\n{label}\\ncase {case}"];')
        lines.append(f"  {node_names[prefix]} -> {name};")
    for entry in tree.frontier:
        prefix = entry.gamma_prefix
        for k in range(len(prefix)):
            sub = prefix[:k + 1]
            if sub not in node_names:
                node_names[sub] = fresh("n")
                lines.append(f'  {node_names[sub]} [shape=box,label="X{sub[-1][1]}"];')
                lines.append(f"  {node_names[sub[:-1]]} -> {node_names[sub]};")
        name = fresh("front")
        lines.append(f'  {name} [shape=octagon,label="unresolved\\n{entry.description}"];')
        lines.append(f"  {node_names[prefix]} -> {name};")
    lines.append("}")
    return "\n".join(lines) + "\n"
