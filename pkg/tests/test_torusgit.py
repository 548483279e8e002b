import random
from fractions import Fraction as Q

import pytest

from conftest import torus
from gitstrata.errors import (LambdaTrivialError, ProblemFormatError,
                              SupportNotClosedError)
from gitstrata.torusgit import (adapted_window, closure_of,
                                connected_components, dumps_problem, is_adapted,
                                lambda_weight, loads_problem, min_stable_set,
                                semistable, stab_dim, stable, x0_min, z_min)


def S(*idx):
    return frozenset(idx)


class TestStability:
    def test_three_weights(self):
        p = torus((-1,), (0,), (1,))
        assert semistable(p, S(0, 2))
        assert semistable(p, S(1, 2))  # zero is a vertex: boundary
        assert not semistable(p, S(2))
        assert stable(p, S(0, 2))
        assert not stable(p, S(0, 1))

    def test_planar_stable(self):
        p = torus((1, 0), (0, 1), (-1, -1))
        assert stable(p, S(0, 1, 2))

    def test_stable_implies_semistable_and_trivial_stabiliser(self):
        rnd = random.Random(5)
        from gitstrata.randgen import rand_torus_problem
        for _ in range(60):
            p = rand_torus_problem(rnd, max_dim=3, max_indices=6)
            for s in p.allowed:
                if stable(p, s):
                    assert semistable(p, s)
                    assert stab_dim(p, s) == 0

    def test_unstable_locus_closed(self):
        # adding weights enlarges the hull: semistability passes to supersets
        rnd = random.Random(6)
        from gitstrata.randgen import rand_torus_problem
        for _ in range(40):
            p = rand_torus_problem(rnd, max_dim=2, max_indices=6,
                                   allow_restriction=False)
            n = len(p.weights)
            for s in p.allowed:
                if semistable(p, s):
                    bigger = s | S(rnd.randrange(n))
                    assert semistable(p, bigger)
                if stable(p, s):
                    bigger = s | S(rnd.randrange(n))
                    assert stable(p, bigger)

    def test_stab_dim_examples(self):
        assert stab_dim(torus((-1,), (1,)), S(0, 1)) == 0
        assert stab_dim(torus((-1,), (1,)), S(0)) == 1  # full torus fixes a coordinate point
        assert stab_dim(torus((1, 0), (2, 0), (0, 1)), S(0, 1)) == 1

    def test_stab_dim_monotone(self):
        p = torus((1, 0), (2, 0), (0, 1))
        chains = [(S(0), S(0, 1)), (S(0, 1), S(0, 1, 2)), (S(2), S(0, 2))]
        for small, big in chains:
            assert stab_dim(p, small) >= stab_dim(p, big)


class TestGradingLoci:
    def test_lambda_weights(self):
        p = torus((-1,), (0,), (1,))
        lam = (Q(1),)
        assert [lambda_weight(p, lam, i) for i in range(3)] == [-1, 0, 1]
        p2 = torus((2, 3))
        assert lambda_weight(p2, (Q(1), Q(1)), 0) == 5

    def test_z_min_unique_level(self):
        p = torus((0,), (1,), (2,))
        res = z_min(p, (Q(1),))
        assert res.supports == {S(0)}
        assert not res.lambda_trivial

    def test_z_min_shared_level(self):
        p = torus((0,), (0,), (1,))
        res = z_min(p, (Q(1),))
        assert res.supports == {S(0), S(1), S(0, 1)}

    def test_z_min_trivial_flag(self):
        p = torus((5,), (5,))
        assert z_min(p, (Q(1),)).lambda_trivial

    def test_x0_min_and_retraction(self):
        p = torus((0,), (1,), (2,))
        res = x0_min(p, (Q(1),))
        assert S(0, 2) in res.supports
        assert res.retraction[S(0, 2)] == S(0)
        assert S(1, 2) not in res.supports
        assert res.retraction[S(0)] == S(0)

    def test_retraction_idempotent_lands_in_z_min(self):
        p = torus((0,), (1,), (2,), (1,))
        res = x0_min(p, (Q(1),))
        fixed = z_min(p, (Q(1),)).supports
        for s, target in res.retraction.items():
            assert target in fixed
            assert res.retraction[target] == target

    def test_x0_min_trivial_raises(self):
        p = torus((5,), (5,))
        with pytest.raises(LambdaTrivialError):
            x0_min(p, (Q(1),))

    def test_support_not_closed_diagnostic(self):
        p = torus((0,), (1,), allowed=[{0, 1}])
        with pytest.raises(SupportNotClosedError):
            x0_min(p, (Q(1),))

    def test_min_stable_set(self):
        p = torus((0,), (1,), (2,))
        mss = min_stable_set(p, (Q(1),))
        assert mss == {s for s in p.allowed if 0 in s and len(s) >= 2}
        p2 = torus((0,), (0,))
        assert min_stable_set(p2, (Q(1),)) == frozenset()
        p3 = torus((0,), (1,))
        assert min_stable_set(p3, (Q(1),)) == {S(0, 1)}

    def test_min_stable_set_identities(self):
        p = torus((0,), (1,), (2,), (2,))
        lam = (Q(1),)
        mss = min_stable_set(p, lam)
        fixed = z_min(p, lam).supports
        basin = x0_min(p, lam).supports
        assert mss & fixed == frozenset()
        assert mss | fixed == basin

    def test_adapted_window(self):
        p = torus((0,), (1,), (2,))
        assert adapted_window(p, (Q(1),)) == (0, 1)
        assert is_adapted(torus((0,), (1,), (2,), twist=(Q(1, 2),)), (Q(1),))
        assert not is_adapted(torus((0,), (1,), (2,), twist=(Q(0),)), (Q(1),))
        with pytest.raises(LambdaTrivialError):
            adapted_window(torus((3,), (3,)), (Q(1),))

    def test_twist_shifts_semistability(self):
        # translating weights by the twist moves the hull test accordingly
        p = torus((1,), (2,), twist=(Q(3, 2),))
        assert semistable(p, S(0, 1))   # shifted hull [-1/2, 1/2] contains 0
        assert not semistable(p, S(0))
        untwisted = torus((1,), (2,))
        assert not semistable(untwisted, S(0, 1))


class TestSupportCombinatorics:
    def test_closure(self):
        p = torus((0,), (1,), (2,))
        cl = closure_of(p, [S(0, 1)])
        assert cl == {S(0), S(1), S(0, 1)}

    def test_components_split_and_join(self):
        comps = connected_components([S(0), S(1)])
        assert len(comps) == 2
        comps2 = connected_components([S(0), S(1), S(0, 1)])
        assert len(comps2) == 1
        comps3 = connected_components([S(0, 1), S(0, 2)])
        assert len(comps3) == 2  # no containment chain between them


class TestProblemFiles:
    def test_round_trip_bit_exact(self):
        text = ('{"dim": 2, "weights": [["1/2", "-1"], ["0", "1"], ["1", "0"]], '
                '"gram": [["2", "0"], ["0", "2"]], "lambda": ["1", "0"], '
                '"twist": ["1/3", "0"], "allowed_supports": [[0], [0, 1], [1]]}')
        p = loads_problem(text)
        dumped = dumps_problem(p)
        p2 = loads_problem(dumped)
        assert p == p2
        assert dumps_problem(p2) == dumped

    def test_defaults_and_minimal_file(self):
        p = loads_problem('{"dim": 1, "weights": [["-1"], ["1"]]}')
        assert len(p.allowed) == 3
        assert p.twist is None and p.grading is None

    def test_malformed_rational(self):
        with pytest.raises(ProblemFormatError):
            loads_problem('{"dim": 1, "weights": [["1/0"]]}')
        with pytest.raises(ProblemFormatError):
            loads_problem('{"dim": 1, "weights": [["0.5"]]}')

    def test_unknown_field(self):
        with pytest.raises(ProblemFormatError):
            loads_problem('{"dim": 1, "weights": [["1"]], "extra": 1}')

    def test_cap(self):
        import json
        doc = {"dim": 1, "weights": [["1"]] * 20, "allowed_supports": [[0], [1]]}
        from gitstrata.errors import CapExceededError
        with pytest.raises(CapExceededError):
            loads_problem(json.dumps(doc))
        p = loads_problem(json.dumps(doc), cap=20)
        assert len(p.weights) == 20
