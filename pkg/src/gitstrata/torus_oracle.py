"""Torus problems as refinement-recursion oracles.

Loci are frozensets of support classes, and point classes are the supports
themselves; they survive every sub-problem construction untouched (only the
weight vectors get projected and rebased when the group shrinks), so leaves
of the recursion are directly comparable with the root stratification.

Twists are baked into the weights once, up front: every stability test of
the recursion is a hull test on effective weights, and the instability
indices then satisfy "index zero iff semistable" on the nose.
"""

from __future__ import annotations

from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from . import hkkn, linalg
from .errors import SemanticError
from .exactgeom import InnerProduct
from .rationals import QVector, format_rational, vsub
from .refine import (BlowUpOutcome, DaggerCase, FixedSweep, OpenHkknStratum,
                     StratumComponent)
from .torusgit import (Support, TorusProblem, closure_of, connected_components,
                       format_support_family, semistable, sort_supports,
                       stab_dim, stable, x0_min, z_min)

Locus = FrozenSet[Support]


def bake_twist(problem: TorusProblem) -> TorusProblem:
    """Translate the weights by the twist so downstream tests are untwisted."""
    if problem.twist is None:
        return problem
    weights = tuple(problem.effective_weight(i) for i in range(len(problem.weights)))
    return TorusProblem(dim=problem.dim, weights=weights, ip=problem.ip,
                        allowed=problem.allowed, twist=None, grading=problem.grading)


def _orthocomplement_basis(space: Sequence[QVector], ip: InnerProduct) -> List[QVector]:
    """Canonical basis of the ip-orthogonal complement of span(space)."""
    rows = []
    for v in space:
        rows.append(list(linalg.mat_vec([list(r) for r in ip.gram], list(v))))
    return linalg.nullspace(rows, ip.dim)


def _project_onto_complement(w: QVector, space: Sequence[QVector],
                             ip: InnerProduct) -> QVector:
    """ip-orthogonal projection of w onto the complement of span(space)."""
    basis = [v for v in space]
    if not basis:
        return w
    k = len(basis)
    gram = [[ip.pairing(basis[i], basis[j]) for j in range(k)] for i in range(k)]
    rhs = [ip.pairing(basis[i], w) for i in range(k)]
    coeffs = linalg.solve(gram, rhs)
    assert coeffs is not None
    proj = list(w)
    for c, v in zip(coeffs, basis):
        for t in range(len(proj)):
            proj[t] -= c * v[t]
    return tuple(proj)


def quotient_problem(problem: TorusProblem, space: Sequence[QVector],
                     allowed: Optional[Locus] = None) -> TorusProblem:
    """Quotient the torus by the subtorus spanned by ``space``.

    Weights are ip-projected onto the orthocomplement and rewritten in a
    canonical basis of it, with the induced Gram matrix; the rank drops by
    the dimension of the subtorus, supports keep their index sets.
    """
    independent = [v for v in space]
    if linalg.rank(independent) != len(independent):
        raise SemanticError("quotient space basis must be independent")
    basis = _orthocomplement_basis(independent, problem.ip)
    d_new = len(basis)
    gram_rows = [[problem.ip.pairing(basis[i], basis[j]) for j in range(d_new)]
                 for i in range(d_new)]
    new_ip = InnerProduct(gram_rows)
    basis_cols = [[basis[j][t] for j in range(d_new)] for t in range(problem.dim)]
    new_weights = []
    for w in problem.weights:
        proj = _project_onto_complement(w, independent, problem.ip)
        coords = linalg.solve(basis_cols, list(proj)) if d_new else []
        assert coords is not None
        new_weights.append(tuple(coords))
    fam = problem.allowed if allowed is None else allowed
    return TorusProblem(dim=d_new, weights=tuple(new_weights), ip=new_ip,
                        allowed=frozenset(fam), twist=None, grading=None)


class TorusOracle:
    """GitProblemOracle over a (twist-baked) torus problem."""

    def __init__(self, problem: TorusProblem,
                 index_cache: Optional[hkkn.IndexCache] = None):
        self.problem = bake_twist(problem)
        self.index_cache = index_cache if index_cache is not None else hkkn._global_cache
        self._hkkn: Optional[hkkn.HKKNStratification] = None

    # -- bookkeeping -------------------------------------------------------

    def describe(self) -> str:
        g = ""
        if self.problem.grading is not None:
            g = " graded (" + ",".join(format_rational(x) for x in self.problem.grading) + ")"
        return (f"torus rank {self.problem.dim} on "
                f"{format_support_family(self.problem.allowed)}{g}")

    def measure(self) -> Tuple[int, ...]:
        return (len(self.problem.allowed), self.problem.dim)

    def is_base(self) -> bool:
        return self.problem.projective_dim() == 0 or self.problem.dim == 0

    def whole_locus(self) -> Locus:
        return frozenset(self.problem.allowed)

    def is_empty_locus(self, locus: Locus) -> bool:
        return not locus

    def _spawn(self, problem: TorusProblem) -> "TorusOracle":
        return TorusOracle(problem, self.index_cache)

    def _stratification(self) -> hkkn.HKKNStratification:
        if self._hkkn is None:
            self._hkkn = hkkn.stratify(self.problem, cache=self.index_cache)
        return self._hkkn

    # -- grading (Case 1) ----------------------------------------------------

    def is_lambda_nontrivial(self) -> bool:
        lam = self.problem.grading
        if lam is None or all(x == 0 for x in lam):
            return False
        return not z_min(self.problem, lam).lambda_trivial

    def u_sweep_is_open(self) -> bool:
        # Trivial unipotent radical: the sweep is the minimal fixed locus itself.
        lam = self.problem.grading
        assert lam is not None
        fixed = z_min(self.problem, lam).supports
        complement = self.problem.allowed - fixed
        return closure_of(self.problem, complement) == complement

    def z_min_problem(self) -> "TorusOracle":
        from .errors import SupportNotClosedError
        lam = self.problem.grading
        assert lam is not None
        fixed = z_min(self.problem, lam).supports
        if not fixed:
            raise SupportNotClosedError(
                "SUPPORT_NOT_CLOSED: no allowed support lies entirely on the "
                "minimal pairing level; allowed_supports is not limit-closed")
        sub = quotient_problem(self.problem, [lam], allowed=fixed)
        return self._spawn(sub)

    def case1_sweep_stratum(self, sub_s0: Locus) -> Locus:
        return frozenset(sub_s0)

    def case1_basin_stratum(self, sub_s0: Locus) -> Locus:
        lam = self.problem.grading
        assert lam is not None
        basin = x0_min(self.problem, lam)
        fixed = z_min(self.problem, lam).supports
        return frozenset(s for s in basin.supports - fixed
                         if basin.retraction[s] in sub_s0)

    # -- reductive gates -------------------------------------------------------

    def stable_nonempty(self) -> bool:
        return any(stable(self.problem, s) for s in self.problem.allowed)

    def semistable_nonempty(self) -> bool:
        return any(semistable(self.problem, s) for s in self.problem.allowed)

    def stable_locus(self) -> Locus:
        return frozenset(s for s in self.problem.allowed if stable(self.problem, s))

    def semistable_locus(self) -> Locus:
        return frozenset(s for s in self.problem.allowed if semistable(self.problem, s))

    # -- Case 2(b) --------------------------------------------------------------

    def open_hkkn_stratum(self) -> OpenHkknStratum:
        strat = self._stratification()
        idx = strat.index_set[0]
        if idx.is_zero():
            raise SemanticError("no unstable open stratum: semistable locus nonempty")
        members = strat.strata[idx]
        closure = closure_of(self.problem, members)
        whole = closure == self.problem.allowed
        z_whole = False
        if whole:
            z_whole = hkkn.z_beta(self.problem, idx.beta) == self.problem.allowed
        return OpenHkknStratum(beta_label=idx.label(), closure_is_whole=whole,
                               z_beta_is_whole=z_whole)

    def _open_index(self) -> hkkn.StratumIndex:
        return self._stratification().index_set[0]

    def ybar_problem(self, info: OpenHkknStratum) -> "TorusOracle":
        idx = self._open_index()
        members = self._stratification().strata[idx]
        closure = closure_of(self.problem, members)
        sub = TorusProblem(dim=self.problem.dim, weights=self.problem.weights,
                           ip=self.problem.ip, allowed=closure, twist=None,
                           grading=idx.beta)
        return self._spawn(sub)

    def case2bi_stratum(self, info: OpenHkknStratum, sub_s0: Locus) -> Locus:
        members = self._stratification().strata[self._open_index()]
        out = frozenset(sub_s0) & members
        if not out:
            raise SemanticError("empty sweep of the flow-in open stratum (oracle bug)")
        return out

    def regraded_problem(self, info: OpenHkknStratum) -> "TorusOracle":
        idx = self._open_index()
        sub = TorusProblem(dim=self.problem.dim, weights=self.problem.weights,
                           ip=self.problem.ip, allowed=self.problem.allowed,
                           twist=None, grading=idx.beta)
        return self._spawn(sub)

    def quotient_group_problem(self, info: OpenHkknStratum) -> "TorusOracle":
        idx = self._open_index()
        # Every weight pairs to |beta|^2; translate by beta before quotienting
        # (the torus shadow of twisting by the index's character).
        shifted = tuple(vsub(w, idx.beta) for w in self.problem.weights)
        base = TorusProblem(dim=self.problem.dim, weights=shifted, ip=self.problem.ip,
                            allowed=self.problem.allowed, twist=None, grading=None)
        return self._spawn(quotient_problem(base, [idx.beta]))

    def lift_sublocus(self, sub_s0: Locus) -> Locus:
        return frozenset(sub_s0)

    # -- Case 2(c) ----------------------------------------------------------------

    def _stabiliser_space(self, s: Support) -> Tuple[QVector, ...]:
        idx = sorted(s)
        base = self.problem.weights[idx[0]]
        diffs = [vsub(self.problem.weights[i], base) for i in idx[1:]]
        rows = [linalg.mat_vec([list(r) for r in self.problem.ip.gram], list(d))
                for d in diffs]
        return tuple(linalg.nullspace(rows, self.problem.dim))

    def _candidate_subtori(self, ss: List[Support]) -> List[Tuple[QVector, ...]]:
        """Intersection lattice of stabiliser subtori of semistable supports,
        positive-dimensional members, canonical order (dimension descending,
        then lexicographic on the reduced basis)."""
        def canonical(basis: Sequence[QVector]) -> Tuple[QVector, ...]:
            red, _ = linalg.rref([list(v) for v in basis])
            rows = [tuple(r) for r in red if any(x != 0 for x in r)]
            return tuple(rows)

        seen: Dict[Tuple[QVector, ...], Tuple[QVector, ...]] = {}
        frontier: List[Tuple[QVector, ...]] = []
        for s in ss:
            space = self._stabiliser_space(s)
            if space:
                key = canonical(space)
                if key not in seen:
                    seen[key] = key
                    frontier.append(key)
        # close under pairwise intersection
        changed = True
        while changed:
            changed = False
            keys = sorted(seen)
            for i in range(len(keys)):
                for j in range(i + 1, len(keys)):
                    a, b = keys[i], keys[j]
                    # intersection = nullspace of stacked constraint rows
                    rows_a = [linalg.mat_vec([list(r) for r in self.problem.ip.gram], list(v))
                              for v in self._constraints_of(a)]
                    rows_b = [linalg.mat_vec([list(r) for r in self.problem.ip.gram], list(v))
                              for v in self._constraints_of(b)]
                    inter = linalg.nullspace(rows_a + rows_b, self.problem.dim)
                    if not inter:
                        continue
                    key = canonical(inter)
                    if key not in seen:
                        seen[key] = key
                        changed = True
        cands = [k for k in seen if k]
        cands.sort(key=lambda basis: (-len(basis), basis))
        return cands

    def _constraints_of(self, basis: Tuple[QVector, ...]) -> List[QVector]:
        """Vectors whose ip-pairing kernel is span(basis)."""
        rows = [linalg.mat_vec([list(r) for r in self.problem.ip.gram], list(v))
                for v in basis]
        return [tuple(v) for v in linalg.nullspace(rows, self.problem.dim)]

    def fixed_sweep(self) -> Optional[FixedSweep]:
        """A positive-dimensional subtorus whose semistable fixed locus is
        open in the semistable locus and residually stable throughout; the
        sweep (the torus is abelian: the locus itself) is the open stratum."""
        ss = [s for s in sort_supports(self.problem.allowed) if semistable(self.problem, s)]
        for basis in self._candidate_subtori(ss):
            dim_w = len(basis)
            fixed = [s for s in ss if self._fixes(basis, s)]
            if not fixed:
                continue
            fixed_set = frozenset(fixed)
            others = frozenset(ss) - fixed_set
            open_in_ss = all(not (s < t) for s in fixed_set for t in others)
            if not open_in_ss:
                continue
            if any(stab_dim(self.problem, s) != dim_w for s in fixed):
                continue
            residual = quotient_problem(self.problem, list(basis),
                                        allowed=frozenset(self.problem.allowed))
            z_fixed = [s for s in sort_supports(self.problem.allowed)
                       if self._fixes(basis, s)]
            res_stable = {s for s in z_fixed if stable(residual, s)}
            res_ss = {s for s in z_fixed if semistable(residual, s)}
            if res_stable != res_ss or res_ss != fixed_set:
                continue
            label = "R'=subtorus[" + "; ".join(
                "(" + ",".join(format_rational(x) for x in v) + ")" for v in basis) + "]"
            witness = (f"sweep of the semistable locus fixed by a rank-{dim_w} subtorus; "
                       f"residual semistability coincides with stability, geometric "
                       f"quotient by the residual torus")
            return FixedSweep(locus=fixed_set, witness=witness, subgroup_label=label)
        return None

    def _fixes(self, basis: Tuple[QVector, ...], s: Support) -> bool:
        idx = sorted(s)
        base = self.problem.weights[idx[0]]
        for i in idx[1:]:
            diff = vsub(self.problem.weights[i], base)
            for v in basis:
                if self.problem.ip.pairing(v, diff) != 0:
                    return False
        return True

    def unipotent_stab_dims(self, locus: Locus) -> tuple:
        return ()  # trivial unipotent radical: no derived-series levels

    def blow_up_available(self) -> bool:
        return False  # blow-up spaces are not representable for bare torus problems

    def blow_up_outcome(self) -> Optional[BlowUpOutcome]:
        return None

    # -- assembly --------------------------------------------------------------

    def stratum_components(self, locus: Locus) -> List[StratumComponent]:
        comps = connected_components(locus)
        out = []
        for comp in comps:
            dims = tuple(sorted({stab_dim(self.problem, s) for s in comp}))
            witness = ("constant stabiliser dimension on the component; orbit "
                       "space of the residual torus action")
            if len(dims) > 1:
                witness = (f"stabiliser dimension jumps across the component "
                           f"({list(dims)}); quotient witness not established")
            out.append(StratumComponent(
                classes=frozenset(comp),
                description=format_support_family(comp),
                stab_dim=dims[0],
                stab_dims=dims,
                witness=witness))
        return out

    def complement_components(self, locus: Locus) -> List["TorusOracle"]:
        rest = self.problem.allowed - frozenset(locus)
        if not rest:
            return []
        if closure_of(self.problem, rest) != rest:
            raise SemanticError("complement of the open stratum is not closed (oracle bug)")
        subs = []
        for comp in connected_components(rest):
            sub = TorusProblem(dim=self.problem.dim, weights=self.problem.weights,
                               ip=self.problem.ip, allowed=comp, twist=None,
                               grading=self.problem.grading)
            subs.append(self._spawn(sub))
        return subs

    # -- verification hooks -------------------------------------------------------

    def point_classes(self, locus: Locus) -> FrozenSet[Support]:
        return frozenset(locus)

    def closure_classes(self, classes: FrozenSet[Support]) -> FrozenSet[Support]:
        return closure_of(self.problem, classes)

    def class_hkkn_index(self, cls: Support) -> hkkn.StratumIndex:
        return hkkn.index_of_support(self.problem, cls, self.index_cache)

    def hkkn_refinement_applies(self) -> bool:
        return self.problem.grading is None

    def dagger_cases(self) -> List[DaggerCase]:
        strat = self._stratification()
        out = []
        for idx in strat.index_set:
            holds = hkkn.check_dagger(self.problem, idx.beta)
            if idx.is_zero():
                sweep = frozenset(s for s in self.problem.allowed
                                  if semistable(self.problem, s))
            else:
                sweep = hkkn.z_beta_ss(self.problem, idx.beta)
            stratum = strat.strata[idx]
            sweep_comps = tuple(frozenset(c) for c in connected_components(sweep))
            rest = stratum - sweep
            rest_comps = tuple(frozenset(c) for c in connected_components(rest))
            out.append(DaggerCase(index_label=idx.label(), holds=holds,
                                  stratum_classes=frozenset(stratum),
                                  sweep_components=sweep_comps,
                                  complement_components=rest_comps))
        return out
