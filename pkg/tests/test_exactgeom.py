import random
from fractions import Fraction as Q

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gitstrata import linalg
from gitstrata.errors import DimensionMismatchError, OracleLimitError, SemanticError
from gitstrata.exactgeom import (HullPosition, InnerProduct, hull_position,
                                 min_norm_oracle, min_norm_point, norm_sq)

I1 = InnerProduct.identity(1)
I2 = InnerProduct.identity(2)


def v(*xs):
    return tuple(Q(x) for x in xs)


def barycentric_solve(points, target):
    """Independent membership check: solve for coefficients directly."""
    d = len(points[0])
    rows = [[p[k] for p in points] for k in range(d)]
    rows.append([Q(1)] * len(points))
    rhs = list(target) + [Q(1)]
    return linalg.solve(rows, rhs)


class TestInnerProduct:
    def test_identity_norms(self):
        assert norm_sq(v(0, 0), I2) == 0
        assert norm_sq(v(1, 1), I2) == 2

    def test_scaled_gram(self):
        ip = InnerProduct([[Q(2), Q(0)], [Q(0), Q(2)]])
        assert norm_sq(v(Q(1, 2), Q(1, 2)), ip) == 1

    def test_rejects_asymmetric(self):
        with pytest.raises(SemanticError):
            InnerProduct([[Q(1), Q(2)], [Q(0), Q(1)]])

    def test_rejects_indefinite(self):
        with pytest.raises(SemanticError):
            InnerProduct([[Q(1), Q(0)], [Q(0), Q(-1)]])
        with pytest.raises(SemanticError):
            InnerProduct([[Q(0), Q(0)], [Q(0), Q(1)]])

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            norm_sq(v(1), I2)


class TestMinNorm:
    def test_interval_through_origin(self):
        assert min_norm_point([v(-1), v(1)], I1).point == v(0)

    def test_interval_off_origin(self):
        res = min_norm_point([v(2), v(3)], I1)
        assert res.point == v(2)
        assert res.norm_sq == 4

    def test_diagonal_segment(self):
        res = min_norm_point([v(1, 0), v(0, 1)], I2)
        assert res.point == v(Q(1, 2), Q(1, 2))
        assert res.norm_sq == Q(1, 2)

    def test_triangle(self):
        res = min_norm_point([v(2, 0), v(0, 2), v(2, 2)], I2)
        assert res.point == v(1, 1)

    def test_coefficients_reconstruct(self):
        pts = [v(2, 0), v(0, 2), v(2, 2)]
        res = min_norm_point(pts, I2)
        acc = [Q(0), Q(0)]
        for c, p in zip(res.coefficients, pts):
            acc[0] += c * p[0]
            acc[1] += c * p[1]
        assert tuple(acc) == res.point
        assert sum(res.coefficients) == 1
        assert all(c >= 0 for c in res.coefficients)

    def test_empty_rejected(self):
        with pytest.raises(SemanticError):
            min_norm_point([], I1)


class TestOracle:
    def test_singleton(self):
        assert min_norm_oracle([v(5)], I1).point == v(5)

    def test_segment(self):
        assert min_norm_oracle([v(1, 0), v(0, 1)], I2).point == v(Q(1, 2), Q(1, 2))

    def test_limits(self):
        with pytest.raises(OracleLimitError):
            min_norm_oracle([v(0, 0, 0, 0, 0)], InnerProduct.identity(5))
        with pytest.raises(OracleLimitError):
            min_norm_oracle([v(1)] * 13, I1)

    def test_agreement_random_identity(self):
        rnd = random.Random(1234)
        for _ in range(300):
            d = rnd.randint(1, 4)
            ip = InnerProduct.identity(d)
            pts = [tuple(Q(rnd.randint(-5, 5), rnd.randint(1, 5)) for _ in range(d))
                   for _ in range(rnd.randint(1, 8))]
            a = min_norm_point(pts, ip)
            b = min_norm_oracle(pts, ip)
            assert a.point == b.point
            assert a.norm_sq == b.norm_sq

    def test_agreement_random_gram(self):
        from gitstrata.randgen import rand_spd_gram
        rnd = random.Random(99)
        for _ in range(100):
            d = rnd.randint(1, 3)
            ip = rand_spd_gram(rnd, d)
            pts = [tuple(Q(rnd.randint(-4, 4), rnd.randint(1, 3)) for _ in range(d))
                   for _ in range(rnd.randint(1, 6))]
            assert min_norm_point(pts, ip).point == min_norm_oracle(pts, ip).point


class TestMinNormProperties:
    @given(st.lists(st.tuples(st.integers(-5, 5), st.integers(-5, 5)),
                    min_size=1, max_size=6))
    @settings(max_examples=60, deadline=None)
    def test_idempotent_under_appending(self, raw):
        pts = [v(a, b) for a, b in raw]
        res = min_norm_point(pts, I2)
        again = min_norm_point(pts + [res.point], I2)
        assert again.point == res.point

    @given(st.lists(st.tuples(st.integers(-5, 5), st.integers(-5, 5)),
                    min_size=1, max_size=6),
           st.integers(1, 7))
    @settings(max_examples=60, deadline=None)
    def test_uniform_gram_scaling(self, raw, scale):
        pts = [v(a, b) for a, b in raw]
        scaled = InnerProduct([[Q(scale), Q(0)], [Q(0), Q(scale)]])
        base = min_norm_point(pts, I2)
        res = min_norm_point(pts, scaled)
        assert res.point == base.point
        assert res.norm_sq == scale * base.norm_sq

    def test_determinism(self):
        pts = [v(3, 1), v(-2, 4), v(1, -5), v(0, 2)]
        runs = [min_norm_point(pts, I2) for _ in range(3)]
        assert all(r == runs[0] for r in runs)


class TestHullPosition:
    def test_symmetric_pair_interior(self):
        assert hull_position([v(-1), v(1)], v(0), I1).position is HullPosition.INTERIOR

    def test_positive_weights_outside(self):
        w = hull_position([v(1), v(2)], v(0), I1)
        assert w.position is HullPosition.OUTSIDE
        assert w.functional == v(1)
        assert w.margin_norm_sq == 1

    def test_vertex_boundary(self):
        assert hull_position([v(0), v(1)], v(0), I1).position is HullPosition.BOUNDARY

    def test_triangle_interior_with_independent_solve(self):
        pts = [v(1, 0), v(0, 1), v(-1, -1)]
        coeffs = barycentric_solve(pts, v(0, 0))
        assert coeffs is not None and all(c > 0 for c in coeffs)
        w = hull_position(pts, v(0, 0), I2)
        assert w.position is HullPosition.INTERIOR
        assert all(c > 0 for c in w.coefficients)

    def test_lower_dimensional_hull_is_boundary(self):
        # segment through the origin inside the plane: membership without interior
        w = hull_position([v(-1, 0), v(1, 0)], v(0, 0), I2)
        assert w.position is HullPosition.BOUNDARY

    def test_interior_certificate_reconstructs(self):
        pts = [v(1, 0), v(0, 1), v(-1, -1), v(2, 2)]
        w = hull_position(pts, v(0, 0), I2)
        assert w.position is HullPosition.INTERIOR
        acc = [Q(0), Q(0)]
        for c, p in zip(w.coefficients, pts):
            acc[0] += c * p[0]
            acc[1] += c * p[1]
        assert tuple(acc) == v(0, 0)
        assert sum(w.coefficients) == 1

    def test_membership_iff_zero_min_norm(self):
        rnd = random.Random(7)
        for _ in range(200):
            d = rnd.randint(1, 3)
            ip = InnerProduct.identity(d)
            pts = [tuple(Q(rnd.randint(-3, 3)) for _ in range(d))
                   for _ in range(rnd.randint(1, 6))]
            w = hull_position(pts, tuple(Q(0) for _ in range(d)), ip)
            member = min_norm_point(pts, ip).norm_sq == 0
            assert (w.position is not HullPosition.OUTSIDE) == member
