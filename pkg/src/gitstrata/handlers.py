"""Command handlers shared by the service endpoints and the CLI.

Each handler takes parsed inputs and returns a plain-dict report (plus DOT
text where applicable).  Exceptions from :mod:`gitstrata.errors` propagate;
the callers translate them into HTTP errors or exit codes.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

from . import hkkn, p1n, refine
from .errors import ProblemFormatError, SemanticError
from .exactgeom import (HullPosition, InnerProduct, min_norm_oracle,
                        min_norm_point)
from .p1n_oracle import p1n_oracle
from .rationals import parse_rational
from .refine import StratTree
from .reports import rat, ratvec
from .torus_oracle import TorusOracle
from .torusgit import (Support, TorusProblem, connected_components,
                       format_support, origin_witness, problem_from_dict,
                       sort_supports, support_key)

P1nSpec = int  # number of points


@dataclass
class LoadedProblem:
    kind: str  # "torus" | "p1n"
    torus: Optional[TorusProblem] = None
    points: Optional[int] = None

    def digest_info(self) -> dict:
        if self.kind == "torus":
            assert self.torus is not None
            return {"kind": "torus", "digest": self.torus.digest(),
                    "indices": len(self.torus.weights), "rank": self.torus.dim}
        return {"kind": "p1n", "points": self.points}


_P1N_RE = re.compile(r"^p1n:(\d+)$")


def load_problem_text(text: str, cap: Optional[int] = None) -> LoadedProblem:
    spec = text.strip()
    m = _P1N_RE.match(spec)
    if m:
        return LoadedProblem(kind="p1n", points=int(m.group(1)))
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(f"invalid problem file: {exc}") from exc
    return load_problem_doc(doc, cap=cap)


def load_problem_doc(doc: Union[dict, str], cap: Optional[int] = None) -> LoadedProblem:
    if isinstance(doc, str):
        return load_problem_text(doc, cap=cap)
    if not isinstance(doc, dict):
        raise ProblemFormatError("problem payload must be an object or a specifier string")
    if set(doc) == {"p1n"}:
        n = doc["p1n"]
        if not isinstance(n, int) or n < 2:
            raise ProblemFormatError("'p1n' must be an integer >= 2")
        return LoadedProblem(kind="p1n", points=n)
    return LoadedProblem(kind="torus", torus=problem_from_dict(doc, cap=cap))


# -- stability verdicts ------------------------------------------------------------


def run_hm(problem: TorusProblem, support: List[int]) -> dict:
    s: Support = frozenset(support)
    if not s:
        raise SemanticError("support must be nonempty")
    if any(i < 0 or i >= len(problem.weights) for i in s):
        raise SemanticError("support index out of range")
    if s not in problem.allowed:
        raise SemanticError(f"support {format_support(s)} is not allowed")
    witness = origin_witness(problem, s)
    idx = sorted(s)
    if witness.position is HullPosition.OUTSIDE:
        assert witness.functional is not None and witness.margin_norm_sq is not None
        pairings = {
            str(i): rat(problem.ip.pairing(witness.functional, problem.effective_weight(i)))
            for i in idx}
        result = {
            "verdict": "unstable",
            "certificate": {
                "type": "separating_functional",
                "functional": ratvec(witness.functional),
                "margin_norm_sq": rat(witness.margin_norm_sq),
                "pairings": pairings,
            },
        }
    else:
        verdict = "stable" if witness.position is HullPosition.INTERIOR else "semistable"
        assert witness.coefficients is not None
        coeffs = {str(i): rat(c) for i, c in zip(idx, witness.coefficients)}
        result = {
            "verdict": verdict,
            "certificate": {"type": "barycentric", "coefficients": coeffs},
        }
    return {
        "command": "hm",
        "problem": {"kind": "torus", "digest": problem.digest()},
        "support": idx,
        "result": result,
    }


# -- instability stratification -----------------------------------------------------


def run_strata(problem: TorusProblem, workers: int = 1) -> Tuple[dict, str]:
    strat = hkkn.stratify(problem, workers=workers)
    ok, violations = hkkn.check_closure_order(problem, strat)
    entries = []
    for idx in strat.index_set:
        members = sort_supports(strat.strata[idx])
        entry: dict = {
            "beta": ratvec(idx.beta),
            "norm_sq": rat(idx.norm_sq),
            "supports": [list(support_key(s)) for s in members],
            "components": len(connected_components(strat.strata[idx])),
            "dagger": hkkn.check_dagger(problem, idx.beta),
        }
        if not idx.is_zero():
            zb = hkkn.z_beta(problem, idx.beta)
            yb = hkkn.y_beta(problem, idx.beta)
            zss = hkkn.z_beta_ss(problem, idx.beta)
            entry["z_beta"] = [list(support_key(s)) for s in sort_supports(zb)]
            entry["z_beta_ss"] = [list(support_key(s)) for s in sort_supports(zss)]
            entry["y_beta"] = [list(support_key(s)) for s in sort_supports(yb)]
            entry["retraction"] = [
                [list(support_key(s)), list(support_key(hkkn.p_beta(problem, idx.beta, s)))]
                for s in sort_supports(yb)]
        entries.append(entry)
    report = {
        "command": "strata",
        "problem": {"kind": "torus", "digest": problem.digest()},
        "result": {
            "indices": entries,
            "closure_order": {
                "ok": ok,
                "violations": [
                    {"support": list(support_key(v.support)),
                     "subset": list(support_key(v.sub_support)),
                     "index_norm_sq": rat(v.index.norm_sq),
                     "subset_norm_sq": rat(v.sub_index.norm_sq)}
                    for v in violations],
            },
            "semistable_present": any(idx.is_zero() for idx in strat.index_set),
        },
    }
    return report, hkkn.poset_dot(strat)


# -- refinement -----------------------------------------------------------------------


def _leaf_payload(tree: StratTree, leaf: refine.StratLeaf) -> dict:
    root = tree.root
    indices = sorted({str(root.class_hkkn_index(c)) for c in leaf.component.classes})
    payload = {
        "gamma": [list(step) for step in leaf.gamma],
        "gamma_label": refine.gamma_label(leaf.gamma),
        "case_trace": list(leaf.case_trace),
        "description": leaf.component.description,
        "stab_dim": leaf.component.stab_dim,
        "stab_dims": list(leaf.component.stab_dims),
        "quotient_witness": leaf.component.witness,
        "hkkn_indices": indices,
    }
    if leaf.component.label is not None:
        payload["label"] = leaf.component.label
    payload["classes"] = _classes_payload(leaf.component.classes)
    return payload


def _classes_payload(classes) -> list:
    out = []
    for c in classes:
        if isinstance(c, frozenset):
            out.append(list(sorted(c)))
        else:
            out.append(list(c))
    return sorted(out)


def run_refine(loaded: LoadedProblem, depth_cap: int = refine.DEFAULT_DEPTH_CAP
               ) -> Tuple[dict, str, bool]:
    """Returns (report, dot, complete)."""
    if loaded.kind == "p1n":
        assert loaded.points is not None
        oracle = p1n_oracle(loaded.points)
    else:
        assert loaded.torus is not None
        oracle = TorusOracle(loaded.torus)
    tree = refine.stratify(oracle, depth_cap=depth_cap)
    leaves = [_leaf_payload(tree, leaf) for leaf in tree.leaves]
    checks: dict = {"refinement_of_instability_stratification": None}
    item = refine.check_refinement_map(tree)
    checks["refinement_of_instability_stratification"] = {
        "ok": item.ok, "details": item.details}
    if tree.complete:
        theorem = refine.check_theorem(tree)
        for it in theorem.items:
            checks[it.name] = {"ok": it.ok, "details": it.details}
    report = {
        "command": "refine",
        "problem": loaded.digest_info(),
        "result": {
            "complete": tree.complete,
            "leaves": leaves,
            "leaf_count": len(leaves),
            "frontier": [
                {"gamma_prefix": [list(step) for step in f.gamma_prefix],
                 "description": f.description,
                 "classes": _classes_payload(f.classes),
                 "case_trace": list(f.case_trace)}
                for f in tree.frontier],
            "checks": checks,
        },
    }
    return report, refine.tree_dot(tree), tree.complete


# -- point-line example ----------------------------------------------------------------


def _parse_label(n: int, text: str) -> Union[p1n.StratumLabel, int]:
    """A rendered refined label, or an integer instability index family."""
    for label in p1n.enumerate_strata(n):
        if p1n.render_label(label, n) == text:
            return label
    m = re.match(r"^S_(-?\d+)$", text)
    if m:
        return int(m.group(1))
    raise SemanticError(f"unknown stratum label {text!r} for n={n}")


def run_p1n_classify(n: int, partition: Optional[str] = None,
                     points: Optional[str] = None) -> dict:
    if (partition is None) == (points is None):
        raise SemanticError("give exactly one of partition or points")
    if partition is not None:
        sig = p1n.parse_partition(n, partition)
        source = {"partition": partition}
    else:
        assert points is not None
        pts = p1n.parse_points(points)
        if len(pts) != n:
            raise SemanticError(f"got {len(pts)} points, expected {n}")
        sig = p1n.signature_of_points(pts)
        source = {"points": points}
    label = p1n.classify(sig)
    return {
        "command": "p1n.classify",
        "problem": {"kind": "p1n", "points": n},
        "input": source,
        "result": {
            "signature": list(sig.mults),
            "label": p1n.render_label(label, n),
            "hkkn_index": p1n.hkkn_index(sig),
        },
    }


def run_p1n_enumerate(n: int) -> dict:
    labels = p1n.enumerate_strata(n)
    return {
        "command": "p1n.enumerate",
        "problem": {"kind": "p1n", "points": n},
        "result": {
            "labels": [p1n.render_label(label, n) for label in labels],
            "count": len(labels),
            "signature_classes": [
                {"label": p1n.render_label(label, n),
                 "signatures": sorted(list(s) for s in p1n.signatures_with_label(n, label))}
                for label in labels],
        },
    }


def run_p1n_components(n: int, label_text: str) -> dict:
    parsed = _parse_label(n, label_text)
    if isinstance(parsed, int):
        count = p1n.hkkn_family_component_count(n, parsed)
        if parsed != 0:
            r = (parsed + n) // 2
            assert count == p1n.binomial(n, r)
            provenance = "paper"
        else:
            provenance = "derived"
        result = {"count": count, "provenance": provenance,
                  "family": "hkkn", "index": parsed}
    else:
        count, provenance = p1n.component_count(n, parsed)
        result = {"count": count, "provenance": provenance,
                  "family": "refined", "label": p1n.render_label(parsed, n)}
    return {
        "command": "p1n.components",
        "problem": {"kind": "p1n", "points": n},
        "input": {"label": label_text},
        "result": result,
    }


# -- randomized property checks ----------------------------------------------------------


def run_check(seed: int, minnorm_trials: int = 100, hm_trials: int = 100,
              closure_trials: int = 20) -> dict:
    """Randomized self-checks: oracle equivalence of the minimum-norm routes,
    certificate soundness of the stability verdicts, and the closure-order
    property of the stratification."""
    from . import randgen
    failures: List[str] = []

    rnd = random.Random(seed)
    for k in range(minnorm_trials):
        d = rnd.randint(1, 4)
        pts = randgen.rand_points(rnd, d, rnd.randint(1, 8))
        ip = InnerProduct.identity(d)
        a = min_norm_point(pts, ip)
        b = min_norm_oracle(pts, ip)
        if a.point != b.point:
            failures.append(f"minnorm trial {k}: {a.point} != {b.point}")

    for k in range(hm_trials):
        problem = randgen.rand_torus_problem(rnd, max_dim=3, max_indices=6)
        s = rnd.choice(sort_supports(problem.allowed))
        rep = run_hm(problem, sorted(s))
        res = rep["result"]
        if res["verdict"] == "unstable":
            pairings = res["certificate"]["pairings"].values()
            if any(parse_rational(v) <= 0 for v in pairings):
                failures.append(f"hm trial {k}: separating functional not strict")
        else:
            coeffs = res["certificate"]["coefficients"]
            if sum(parse_rational(v) for v in coeffs.values()) != 1:
                failures.append(f"hm trial {k}: coefficients do not sum to 1")

    for k in range(closure_trials):
        problem = randgen.rand_torus_problem(rnd, max_dim=3, max_indices=7)
        strat = hkkn.stratify(problem)
        ok, violations = hkkn.check_closure_order(problem, strat)
        if not ok:
            failures.append(f"closure trial {k}: {len(violations)} violations")

    return {
        "command": "check",
        "problem": {"kind": "selfcheck", "seed": seed},
        "result": {
            "ok": not failures,
            "failures": failures,
            "trials": {"minnorm": minnorm_trials, "hm": hm_trials,
                       "closure": closure_trials},
        },
    }
