import random
from fractions import Fraction as Q

from conftest import torus
from gitstrata import hkkn
from gitstrata.exactgeom import min_norm_oracle
from gitstrata.randgen import rand_torus_problem
from gitstrata.torusgit import semistable, sort_supports, stab_dim


def S(*idx):
    return frozenset(idx)


class TestIndexOfSupport:
    def test_origin_in_hull(self, interval):
        idx = hkkn.index_of_support(interval, S(0, 1))
        assert idx.beta == (Q(0),) and idx.norm_sq == 0

    def test_vertex(self, interval):
        idx = hkkn.index_of_support(interval, S(1))
        assert idx.beta == (Q(1),) and idx.norm_sq == 1

    def test_planar_segment_matches_oracle(self):
        p = torus((1, 0), (0, 1))
        idx = hkkn.index_of_support(p, S(0, 1))
        oracle = min_norm_oracle([w for w in p.weights], p.ip)
        assert idx.beta == oracle.point == (Q(1, 2), Q(1, 2))
        assert idx.norm_sq == Q(1, 2)

    def test_zero_iff_semistable(self):
        rnd = random.Random(11)
        for _ in range(40):
            p = rand_torus_problem(rnd, max_dim=3, max_indices=6)
            for s in sort_supports(p.allowed):
                assert (hkkn.index_of_support(p, s).is_zero()) == semistable(p, s)


class TestStratify:
    def test_interval(self, interval):
        strat = hkkn.stratify(interval)
        as_sets = {idx.beta: frozenset(m) for idx, m in strat.strata.items()}
        assert as_sets == {
            (Q(0),): frozenset({S(0, 1)}),
            (Q(-1),): frozenset({S(0)}),
            (Q(1),): frozenset({S(1)}),
        }

    def test_shifted_no_semistable(self, shifted):
        strat = hkkn.stratify(shifted)
        assert not any(idx.is_zero() for idx in strat.index_set)
        as_sets = {idx.beta: frozenset(m) for idx, m in strat.strata.items()}
        assert as_sets == {(Q(1),): frozenset({S(0), S(0, 1)}),
                           (Q(2),): frozenset({S(1)})}

    def test_single_zero_weight(self):
        p = torus((0,))
        strat = hkkn.stratify(p)
        assert len(strat.index_set) == 1
        idx = strat.index_set[0]
        assert idx.is_zero()
        assert semistable(p, S(0)) and stab_dim(p, S(0)) == 1

    def test_partition_property(self):
        rnd = random.Random(21)
        for _ in range(30):
            p = rand_torus_problem(rnd, max_dim=3, max_indices=7)
            strat = hkkn.stratify(p)
            seen = set()
            for members in strat.strata.values():
                assert not (seen & members)
                seen |= members
            assert seen == p.allowed

    def test_index_set_sorted_and_deterministic(self):
        rnd = random.Random(31)
        for _ in range(10):
            p = rand_torus_problem(rnd, max_dim=2, max_indices=6)
            a = hkkn.stratify(p)
            b = hkkn.stratify(p)
            assert a.index_set == b.index_set
            assert a.strata == b.strata
            keys = [idx.sort_key() for idx in a.index_set]
            assert keys == sorted(keys)

    def test_workers_agree(self):
        rnd = random.Random(41)
        p = rand_torus_problem(rnd, max_dim=3, max_indices=8, allow_restriction=False)
        a = hkkn.stratify(p, workers=1)
        b = hkkn.stratify(p, workers=3)
        assert a.index_set == b.index_set and a.strata == b.strata


class TestLimitLoci:
    def test_shifted_example(self, shifted):
        beta = (Q(1),)
        assert hkkn.z_beta(shifted, beta) == {S(0)}
        assert hkkn.y_beta(shifted, beta) == {S(0), S(0, 1)}
        assert hkkn.p_beta(shifted, beta, S(0, 1)) == S(0)

    def test_interval_fixed_side(self, interval):
        beta = (Q(1),)
        assert hkkn.z_beta(interval, beta) == {S(1)}
        assert hkkn.y_beta(interval, beta) == {S(1)}

    def test_retraction_identity_on_fixed(self, shifted):
        beta = (Q(1),)
        for s in hkkn.z_beta(shifted, beta):
            assert hkkn.p_beta(shifted, beta, s) == s

    def test_stratum_pairing_inequality(self):
        # on every unstable stratum the index pairs >= its squared norm,
        # with equality on a nonempty subset
        rnd = random.Random(51)
        for _ in range(25):
            p = rand_torus_problem(rnd, max_dim=3, max_indices=6)
            strat = hkkn.stratify(p)
            for idx, members in strat.strata.items():
                if idx.is_zero():
                    continue
                for s in members:
                    pairings = [p.ip.pairing(p.effective_weight(i), idx.beta)
                                for i in sorted(s)]
                    assert all(v >= idx.norm_sq for v in pairings)
                    assert any(v == idx.norm_sq for v in pairings)

    def test_y_equals_stratum_for_torus(self):
        rnd = random.Random(61)
        for _ in range(25):
            p = rand_torus_problem(rnd, max_dim=2, max_indices=6)
            strat = hkkn.stratify(p)
            for idx, members in strat.strata.items():
                if idx.is_zero():
                    continue
                assert hkkn.y_beta(p, idx.beta) == members

    def test_p_beta_lands_in_z_with_same_index(self):
        rnd = random.Random(71)
        for _ in range(25):
            p = rand_torus_problem(rnd, max_dim=2, max_indices=6,
                                   allow_restriction=False)
            strat = hkkn.stratify(p)
            for idx, members in strat.strata.items():
                if idx.is_zero():
                    continue
                zb = hkkn.z_beta(p, idx.beta)
                for s in members:
                    target = hkkn.p_beta(p, idx.beta, s)
                    assert target in zb
                    assert hkkn.index_of_support(p, target) == idx


class TestClosureOrder:
    def test_examples(self, interval, shifted):
        for p in (interval, shifted):
            strat = hkkn.stratify(p)
            ok, violations = hkkn.check_closure_order(p, strat)
            assert ok and not violations

    def test_corrupted_strata_report_violations(self, shifted):
        strat = hkkn.stratify(shifted)
        # move the open support into the deep stratum: its closure now reaches
        # a strictly shallower stratum, which the order forbids
        low, high = strat.index_set[0], strat.index_set[-1]
        corrupt = dict(strat.strata)
        corrupt[low] = frozenset({S(0)})
        corrupt[high] = frozenset({S(1), S(0, 1)})
        bad = hkkn.HKKNStratification(problem=shifted, index_set=strat.index_set,
                                      strata=corrupt)
        ok, violations = hkkn.check_closure_order(shifted, bad)
        assert not ok and violations

    def test_random_problems_no_violations(self):
        rnd = random.Random(81)
        for _ in range(30):
            p = rand_torus_problem(rnd, max_dim=3, max_indices=7)
            strat = hkkn.stratify(p)
            ok, violations = hkkn.check_closure_order(p, strat)
            assert ok, violations


class TestDagger:
    def test_interval_nonzero_index(self, interval):
        assert hkkn.check_dagger(interval, (Q(1),))

    def test_equal_weights_zero_index_fails(self):
        p = torus((0,), (0,))
        assert not hkkn.check_dagger(p, (Q(0),))

    def test_interval_zero_index(self, interval):
        assert hkkn.check_dagger(interval, (Q(0),))


class TestDot:
    def test_poset_dot_structure(self, shifted):
        strat = hkkn.stratify(shifted)
        dot = hkkn.poset_dot(strat)
        assert dot.startswith("digraph hkkn {")
        assert dot.count("label=") == 2
        assert "b0 -> b1;" in dot


class TestGramIndependenceAndDualRoutes:
    def test_hull_verdicts_independent_of_inner_product(self):
        from gitstrata.exactgeom import InnerProduct, hull_position
        from gitstrata.randgen import rand_points, rand_spd_gram
        rnd = random.Random(777)
        for _ in range(120):
            d = rnd.randint(1, 3)
            pts = rand_points(rnd, d, rnd.randint(1, 6), max_abs=3, max_den=2)
            query = rand_points(rnd, d, 1, max_abs=2, max_den=2)[0]
            base = hull_position(pts, query, InnerProduct.identity(d)).position
            other = hull_position(pts, query, rand_spd_gram(rnd, d)).position
            assert other is base

    def test_residual_semistability_two_routes(self):
        # translated-hull membership must agree with "index of the fixed
        # support equals the index" on every stratum
        rnd = random.Random(778)
        for _ in range(40):
            p = rand_torus_problem(rnd, max_dim=3, max_indices=6, allow_gram=True)
            strat = hkkn.stratify(p)
            for idx in strat.index_set:
                if idx.is_zero():
                    continue
                via_hull = hkkn.z_beta_ss(p, idx.beta)
                via_index = frozenset(s for s in hkkn.z_beta(p, idx.beta)
                                      if hkkn.index_of_support(p, s) == idx)
                assert via_hull == via_index

    def test_closure_order_with_random_grams(self):
        rnd = random.Random(779)
        for _ in range(25):
            p = rand_torus_problem(rnd, max_dim=3, max_indices=6, allow_gram=True)
            strat = hkkn.stratify(p)
            ok, violations = hkkn.check_closure_order(p, strat)
            assert ok, violations

    def test_cold_and_warm_caches_agree(self):
        import gitstrata.torusgit as tg
        from gitstrata.handlers import run_strata
        rnd = random.Random(780)
        p = rand_torus_problem(rnd, max_dim=2, max_indices=6, allow_gram=True)
        warm, _ = run_strata(p)
        hkkn._global_cache._store.clear()
        tg._witness_cache.clear()
        cold, _ = run_strata(p)
        assert warm == cold
