"""Acceptance suite.

Each criterion is one test that prints a PASS/FAIL line (run with -s to see
them) and enforces its stated tolerance exactly; runtime budgets are asserted
with a wall clock.
"""

import json
import math
import random
import time
from fractions import Fraction as Q

from gitstrata import hkkn, refine
from gitstrata.exactgeom import InnerProduct, min_norm_oracle, min_norm_point
from gitstrata.handlers import (load_problem_text, run_hm, run_p1n_components,
                                run_refine, run_strata)
from gitstrata.randgen import rand_torus_problem
from gitstrata.rationals import parse_rational
from gitstrata.reports import dumps_machine
from gitstrata.torus_oracle import TorusOracle
from gitstrata.torusgit import semistable, sort_supports


def report_line(number, ok, text):
    status = "PASS" if ok else "FAIL"
    print(f"{status} criterion {number}: {text}")
    assert ok, f"criterion {number} failed: {text}"


def display_labels(n):
    """Expected leaf labels, assembled from the displayed decompositions:
    odd n:  S_0 | S_{n-2} | S_n | pairs S_{2r-n}^{r,n-r}, S_{2r-n}^{r,<n-r};
    even n: the S_0 three-way split plus the same unstable chain."""
    labels = set()
    if n % 2 == 1:
        labels.add("S_0")
    else:
        half = n // 2
        labels.add(f"S_0^{{<{n}}}")
        labels.add(f"S_0^{{{half},{half}}}")
        labels.add(f"S_0^{{{half},<{half}}}")
    for r in range(n // 2 + 1, n - 1):
        labels.add(f"S_{2 * r - n}^{{{r},{n - r}}}")
        labels.add(f"S_{2 * r - n}^{{{r},<{n - r}}}")
    labels.add(f"S_{n - 2}")
    labels.add(f"S_{n}")
    return labels


def test_criterion_1_point_line_reproduction():
    worst = 0.0
    for n in range(3, 11):
        start = time.monotonic()
        report, _, complete = run_refine(load_problem_text(f"p1n:{n}"))
        elapsed = time.monotonic() - start
        worst = max(worst, elapsed)
        assert complete
        got = {leaf["label"] for leaf in report["result"]["leaves"]}
        assert got == display_labels(n), (n, got)
        assert elapsed < 1.0, (n, elapsed)
    report_line(1, True,
                f"point-line decompositions reproduced for n=3..10 "
                f"(slowest n took {worst:.3f}s < 1s)")


def test_criterion_2_component_counts():
    start = time.monotonic()
    for n in range(3, 11):
        for r in range(n // 2 + 1, n + 1):
            beta = 2 * r - n
            result = run_p1n_components(n, f"S_{beta}")["result"]
            if result["family"] == "refined":
                # r = n-1 and r = n render as refined labels of the same family
                count = result["count"]
            else:
                count = result["count"]
            assert count == math.comb(n, r), (n, r, count)
    elapsed = time.monotonic() - start
    report_line(2, elapsed < 1.0,
                f"instability-family component counts equal binomial(n,r) for "
                f"n=3..10 ({elapsed:.3f}s < 1s)")


def test_criterion_3_min_norm_oracle_equivalence():
    rnd = random.Random(20260808)
    start = time.monotonic()
    for _ in range(1000):
        d = rnd.randint(1, 4)
        ip = InnerProduct.identity(d)
        pts = [tuple(Q(rnd.randint(-5, 5), rnd.randint(1, 5)) for _ in range(d))
               for _ in range(rnd.randint(1, 8))]
        fast = min_norm_point(pts, ip)
        slow = min_norm_oracle(pts, ip)
        assert fast.point == slow.point
        assert fast.norm_sq == slow.norm_sq
    elapsed = time.monotonic() - start
    report_line(3, elapsed < 60.0,
                f"minimum-norm routes agree on 1000 instances ({elapsed:.1f}s < 60s)")


def test_criterion_4_certificate_soundness():
    rnd = random.Random(424242)
    start = time.monotonic()
    for _ in range(1000):
        problem = rand_torus_problem(rnd, max_dim=3, max_indices=6)
        support = rnd.choice(sort_supports(problem.allowed))
        report = run_hm(problem, sorted(support))
        result = report["result"]
        idx = sorted(support)
        weights = [problem.effective_weight(i) for i in idx]
        if result["verdict"] == "unstable":
            functional = tuple(parse_rational(x)
                               for x in result["certificate"]["functional"])
            for w in weights:
                assert problem.ip.pairing(functional, w) > 0
        else:
            coeffs = [parse_rational(result["certificate"]["coefficients"][str(i)])
                      for i in idx]
            assert sum(coeffs) == 1
            assert all(c >= 0 for c in coeffs)
            acc = [Q(0)] * problem.dim
            for c, w in zip(coeffs, weights):
                for k in range(problem.dim):
                    acc[k] += c * w[k]
            assert all(x == 0 for x in acc)
            if result["verdict"] == "stable":
                assert all(c > 0 for c in coeffs)
    elapsed = time.monotonic() - start
    report_line(4, elapsed < 60.0,
                f"1000 stability certificates reconstruct exactly ({elapsed:.1f}s < 60s)")


def _criterion_5_6_problems():
    rnd = random.Random(565656)
    return [rand_torus_problem(rnd, max_dim=3, max_indices=10) for _ in range(200)]


def test_criterion_5_and_6_closure_order_and_refinement():
    problems = _criterion_5_6_problems()
    start = time.monotonic()
    refinement_ok = True
    for problem in problems:
        strat = hkkn.stratify(problem)
        ok, violations = hkkn.check_closure_order(problem, strat)
        assert ok, violations
        zero = [idx for idx in strat.index_set if idx.is_zero()]
        ss = frozenset(s for s in problem.allowed if semistable(problem, s))
        if zero:
            assert strat.strata[zero[0]] == ss
        else:
            assert not ss
        tree = refine.stratify(TorusOracle(problem))
        if not refine.check_refinement_map(tree).ok:
            refinement_ok = False
    elapsed = time.monotonic() - start
    report_line(5, elapsed < 120.0,
                f"closure order holds with zero violations and the zero stratum "
                f"is the semistable family on 200 problems ({elapsed:.1f}s < 120s)")
    report_line(6, refinement_ok,
                "every refinement leaf lies in a single instability stratum "
                "(same 200-problem run)")


def test_criterion_7_stabiliser_condition_splits():
    for n in range(3, 11):
        report, _, complete = run_refine(load_problem_text(f"p1n:{n}"))
        assert complete
        labels = {leaf["label"] for leaf in report["result"]["leaves"]}
        for r in range(n // 2 + 1, n - 1):
            beta = 2 * r - n
            two_point = f"S_{beta}^{{{r},{n - r}}}"
            complement = f"S_{beta}^{{{r},<{n - r}}}"
            in_family = {lab for lab in labels
                         if lab.startswith(f"S_{beta}^") or lab == f"S_{beta}"}
            assert in_family == {two_point, complement}, (n, r, in_family)
        near_total = {lab for lab in labels
                      if lab == f"S_{n - 2}" or lab.startswith(f"S_{n - 2}^")}
        assert near_total == {f"S_{n - 2}"}, (n, near_total)
    report_line(7, True,
                "stabiliser-condition strata split in exactly two pieces for "
                "n/2 < r < n-1 and stay whole at r = n-1, for n=3..10")


def test_criterion_8_determinism():
    refine_runs = [dumps_machine(run_refine(load_problem_text("p1n:6"))[0])
                   for _ in range(2)]
    assert refine_runs[0] == refine_runs[1]

    problem = load_problem_text(json.dumps({
        "dim": 2,
        "weights": [["1", "0"], ["0", "1"], ["-1", "-1"], ["2", "1"], ["1", "2"]],
    })).torus
    strata_runs = [dumps_machine(run_strata(problem, workers=k)[0])
                   for k in (1, 2, 4, 1)]
    assert len(set(strata_runs)) == 1

    hm_runs = [dumps_machine(run_hm(problem, [0, 1, 2])) for _ in range(2)]
    assert hm_runs[0] == hm_runs[1]

    rnd = random.Random(565656)
    sample = rand_torus_problem(rnd, max_dim=3, max_indices=8)
    refine_pair = [dumps_machine(run_refine(
        load_problem_text(json.dumps(_as_doc(sample))))[0]) for _ in range(2)]
    assert refine_pair[0] == refine_pair[1]

    report_line(8, True,
                "repeated runs and different worker counts emit byte-identical "
                "machine reports")


def _as_doc(problem):
    from gitstrata.torusgit import problem_to_dict
    return problem_to_dict(problem)
