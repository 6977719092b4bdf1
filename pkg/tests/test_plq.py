import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import plq_functions
from plqval.errors import DisconnectedDomain, EmptyDomain, InvalidPLQ, NotConvex
from plqval.plq import (
    Interval,
    PLQFunction,
    QuadraticPiece,
    affine,
    from_json,
    from_pieces,
    indicator,
    plq_sum,
    point_indicator,
    pointwise_max,
    pointwise_min,
    quadratic,
    to_json,
    valuation_quadruple,
)


def profile_multiset(u):
    return sorted((round(p.length, 12), 2 * p.a) for p in u.pieces)


class TestEval:
    def test_indicator_inside(self):
        assert indicator(0, 1).eval(0.5) == 0.0

    def test_indicator_outside_is_inf(self):
        v = indicator(0, 1).eval(2)
        assert v == math.inf and math.isinf(v)

    def test_polynomial(self, half_square):
        assert half_square.eval(1.0) == 0.5

    def test_vectorized(self, half_square):
        out = half_square(np.array([-2.0, 0.0, 1.0]))
        assert out[0] == math.inf
        assert list(out[1:]) == [0.0, 0.5]


def test_domains():
    assert tuple(indicator(0, 3).domain) == (0, 3)
    assert tuple(point_indicator(0).domain) == (0, 0)
    assert point_indicator(0).is_point


class TestLipschitz:
    def test_half_square(self, half_square):
        assert half_square.lipschitz_constant() == 1.0

    def test_indicator(self):
        assert indicator(0, 1).lipschitz_constant() == 0.0

    def test_steep_matches_difference_quotient(self):
        u = quadratic(4, 0, 0, 0, 1)
        assert u.lipschitz_constant() == 8.0
        h = 1e-7
        assert abs((u.eval(1) - u.eval(1 - h)) / h - 8.0) < 1e-5


def test_second_derivative_profiles(half_square):
    assert half_square.second_derivative_profile() == [(Interval(-1, 1), 1.0)]
    assert indicator(0, 3).second_derivative_profile() == [(Interval(0, 3), 0.0)]
    assert quadratic(4, 0, 0, 0, 1).second_derivative_profile() == [(Interval(0, 1), 8.0)]


class TestAffineAndTranslate:
    def test_add_affine_indicator(self):
        (p,) = indicator(0, 1).add_affine(3, 1).pieces
        assert (p.left, p.right, p.a, p.b, p.c) == (0, 1, 0, 3, 1)

    def test_add_constant(self, half_square):
        assert half_square.add_affine(0, 5) == quadratic(0.5, 0, 5, -1, 1)

    def test_slopes_after_tilt(self, half_square):
        v = half_square.add_affine(1, 0)
        assert v.right_slope(-1) == 0.0 and v.left_slope(1) == 2.0

    def test_translate_indicator(self):
        assert indicator(0, 1).translate(2) == indicator(2, 3)

    def test_translate_quadratic(self, half_square):
        v = half_square.translate(1)
        assert tuple(v.domain) == (0, 2)
        for x in np.linspace(0, 2, 11):
            assert v.eval(x) == pytest.approx((x - 1) ** 2 / 2, abs=1e-15)

    @given(plq_functions(), st.floats(-5, 5), st.floats(-3, 3), st.floats(-3, 3))
    def test_profile_invariant(self, u, y, p, q0):
        assert profile_multiset(u.translate(y)) == pytest.approx(profile_multiset(u))
        assert profile_multiset(u.add_affine(p, q0)) == profile_multiset(u)


class TestValidation:
    def test_negative_curvature(self):
        with pytest.raises(InvalidPLQ, match="piece 0"):
            PLQFunction([QuadraticPiece(0, 1, -1, 0, 0)])

    def test_gap(self):
        with pytest.raises(InvalidPLQ, match="piece 0: gap"):
            PLQFunction([QuadraticPiece(0, 1, 0, 0, 0), QuadraticPiece(1.5, 2, 0, 0, 0)])

    def test_discontinuity_names_index(self):
        pieces = [QuadraticPiece(0, 1, 0, 0, 0), QuadraticPiece(1, 2, 0, 1, -1),
                  QuadraticPiece(2, 3, 0, 1, 5)]
        with pytest.raises(InvalidPLQ, match="piece 1: discontinuous"):
            PLQFunction(pieces)

    def test_concave_kink(self):
        with pytest.raises(InvalidPLQ, match="slope decreases"):
            PLQFunction([QuadraticPiece(0, 1, 0, 1, 0), QuadraticPiece(1, 2, 0, 0, 1)])

    def test_non_canonical(self):
        with pytest.raises(InvalidPLQ, match="canonical"):
            PLQFunction([QuadraticPiece(0, 1, 0, 0, 0), QuadraticPiece(1, 2, 0, 0, 0)])

    def test_from_pieces_merges(self):
        u = from_pieces([QuadraticPiece(0, 1, 0, 0, 0), QuadraticPiece(1, 2, 0, 0, 0)])
        assert u == indicator(0, 2)

    def test_point_piece_must_be_flat(self):
        with pytest.raises(InvalidPLQ):
            PLQFunction([QuadraticPiece(0, 0, 1, 0, 0)])

    def test_nan(self):
        with pytest.raises(InvalidPLQ, match="non-finite"):
            PLQFunction([QuadraticPiece(0, 1, 0, float("nan"), 0)])

    def test_immutable(self, half_square):
        with pytest.raises(AttributeError):
            half_square._pieces = ()

    def test_json_missing_field(self):
        with pytest.raises(InvalidPLQ, match="piece 0: missing field 'c'"):
            from_json('{"pieces": [{"left": 0, "right": 1, "a": 0, "b": 0}]}')

    def test_json_bad_type(self):
        with pytest.raises(InvalidPLQ, match="not a number"):
            from_json('{"pieces": [{"left": 0, "right": 1, "a": 0, "b": 0, "c": "x"}]}')


class TestLattice:
    def test_max_indicators(self):
        assert pointwise_max(indicator(0, 2), indicator(1, 3)) == indicator(1, 2)

    def test_max_dominating(self, half_square):
        assert pointwise_max(half_square, indicator(-1, 1)) == half_square

    def test_max_crossing(self):
        w = pointwise_max(quadratic(1, 0, 0, -1, 1), affine(1, 0, -1, 1))
        assert w == from_pieces([QuadraticPiece(-1, 0, 1, 0, 0), QuadraticPiece(0, 1, 0, 1, 0)])
        xs = np.linspace(-1, 1, 1001)
        assert np.max(np.abs(w(xs) - np.maximum(xs ** 2, xs))) < 1e-12

    def test_min_indicators(self):
        assert pointwise_min(indicator(0, 2), indicator(1, 3)) == indicator(0, 3)

    def test_min_not_convex(self):
        with pytest.raises(NotConvex):
            pointwise_min(quadratic(1, 0, 0, -1, 1), quadratic(1, 1, 0, -1, 1))

    def test_min_disconnected(self):
        with pytest.raises(DisconnectedDomain):
            pointwise_min(indicator(0, 1), indicator(2, 3))

    def test_max_disjoint(self):
        with pytest.raises(EmptyDomain):
            pointwise_max(indicator(0, 1), indicator(2, 3))

    def test_quadruple(self, half_square):
        assert valuation_quadruple(indicator(0, 2), indicator(1, 3)) == (indicator(0, 3),
                                                                         indicator(1, 2))
        assert valuation_quadruple(half_square, half_square) == (half_square, half_square)

    def test_point_cases(self):
        assert pointwise_max(indicator(0, 1), indicator(1, 2)) == point_indicator(1)
        assert pointwise_min(point_indicator(0.5, 1.0), indicator(0, 1)) == indicator(0, 1)
        with pytest.raises(NotConvex):
            pointwise_min(point_indicator(0.5, -1.0), indicator(0, 1))

    def test_tangent_pair_from_stitch(self):
        from plqval.constructions import StitchParams, stitch
        res = stitch(StitchParams(0, 1, 2, 1, 4))
        x1, y1 = res.xs[0], res.ys[0]
        u = quadratic(*res.r_coefficients(0), -1, x1)
        v = quadratic(*res.s_coefficients(1), x1 - 0.05, y1)
        lo, hi = valuation_quadruple(u, v)
        assert tuple(lo.domain) == (-1, y1) and tuple(hi.domain) == (x1 - 0.05, x1)

    @given(st.lists(st.floats(-5, 5), min_size=4, max_size=4))
    def test_indicator_identities(self, ends):
        a, b, c, d = ends
        A, B = indicator(min(a, b), max(a, b)), indicator(min(c, d), max(c, d))
        inter, union = A.domain.intersect(B.domain), A.domain.hull(B.domain)
        if inter is None:
            with pytest.raises(DisconnectedDomain):
                pointwise_min(A, B)
            return
        assert pointwise_max(A, B) == indicator(inter.lo, inter.hi)
        assert pointwise_min(A, B) == indicator(union.lo, union.hi)

    @given(plq_functions(), plq_functions())
    def test_max_pointwise(self, u, v):
        inter = u.domain.intersect(v.domain)
        if inter is None:
            return
        w = pointwise_max(u, v)
        assert w.domain == inter
        xs = np.linspace(inter.lo, inter.hi, 1000)
        assert np.max(np.abs(w(xs) - np.maximum(u(xs), v(xs)))) <= 1e-9

    @given(plq_functions(), plq_functions())
    def test_min_when_defined(self, u, v):
        try:
            w = pointwise_min(u, v)
        except (NotConvex, DisconnectedDomain):
            return
        assert w.domain == u.domain.hull(v.domain)
        xs = np.linspace(w.domain.lo, w.domain.hi, 500)
        assert np.max(np.abs(w(xs) - np.minimum(u(xs), v(xs)))) <= 1e-9

    @given(plq_functions(), st.floats(0.05, 0.95), st.floats(0.05, 0.95))
    def test_domain_split_pair(self, u, s, t):
        lo, hi = u.domain
        t1, t2 = sorted((lo + s * (hi - lo), lo + t * (hi - lo)))
        mn, mx = valuation_quadruple(u.restrict(lo, t2), u.restrict(t1, hi))
        assert mn.domain == u.domain
        assert tuple(mx.domain) == (t1, t2)


class TestProperties:
    @given(plq_functions())
    def test_json_roundtrip(self, u):
        assert from_json(to_json(u)) == u

    @given(plq_functions(), st.floats(0, 1), st.floats(0, 1))
    def test_midpoint_convexity(self, u, s, t):
        lo, hi = u.domain
        x, y = lo + s * (hi - lo), lo + t * (hi - lo)
        assert u.eval(0.5 * (x + y)) <= 0.5 * (u.eval(x) + u.eval(y)) + 1e-9

    @given(plq_functions(), st.integers(0, 2 ** 32 - 1))
    def test_derivative_consistency(self, u, seed):
        rng = np.random.default_rng(seed)
        h = 1e-6
        for p in u.pieces:
            if p.length < 1e-3:
                continue
            for x in rng.uniform(p.left + 2 * h, p.right - 2 * h, size=5):
                fd = (p.value(x + h) - p.value(x - h)) / (2 * h)
                exact = 2 * p.a * x + p.b
                assert abs(fd - exact) <= 1e-6 * max(1.0, abs(exact))

    @given(plq_functions(), plq_functions())
    def test_sum_pointwise(self, u, w):
        inter = u.domain.intersect(w.domain)
        if inter is None:
            with pytest.raises(EmptyDomain):
                plq_sum(u, w)
            return
        s = plq_sum(u, w)
        xs = np.linspace(inter.lo, inter.hi, 200)
        assert np.allclose(s(xs), u(xs) + w(xs), atol=1e-9)
