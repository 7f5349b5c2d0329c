from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hetprice import aggregators as agg
from hetprice.errors import AggregatorError, NoBracket

from conftest import dyadic


class TestEval:
    def test_mean(self):
        assert agg.arithmetic()((2, 4)) == 3

    @given(dyadic(), st.integers(1, 6))
    def test_idempotent(self, p, n):
        assert agg.arithmetic()([p] * n) == p
        assert agg.weighted_harmonic([1] * n)([p] * n) == p

    def test_harmonic_identical_prices(self):
        assert agg.weighted_harmonic((1, 1), mass=2)((1, 1)) == 1

    def test_harmonic_mass_must_match(self):
        with pytest.raises(AggregatorError):
            agg.weighted_harmonic((1, 1), mass=3)

    def test_weighted_mean(self):
        W = agg.arithmetic((Fraction(1, 4), Fraction(3, 4)))
        assert W((4, 8)) == 7

    def test_bad_weights(self):
        with pytest.raises(AggregatorError):
            agg.arithmetic((Fraction(1, 2), Fraction(1, 4)))

    @given(st.lists(dyadic(), min_size=2, max_size=5), st.integers(0, 4))
    def test_strictly_increasing(self, prices, i):
        i %= len(prices)
        bumped = list(prices)
        bumped[i] += Fraction(1, 8)
        for W in (agg.arithmetic(), agg.weighted_harmonic([1] * len(prices))):
            assert W(bumped) > W(prices)


class TestSolveResidual:
    def test_arithmetic_closed_form(self):
        assert agg.solve_residual(agg.arithmetic(), 2, (1, 1), 2) == 4

    def test_harmonic_closed_form(self):
        W = agg.weighted_harmonic((1, 1), mass=2)
        p = agg.solve_residual(W, 1, (2,), 1)
        assert p == Fraction(2, 3)
        assert W((2, p)) == 1

    def test_arithmetic_infeasible(self):
        with pytest.raises(NoBracket):
            agg.solve_residual(agg.arithmetic(), 1, (3, 3), 2)

    @given(st.lists(dyadic(1, 8), min_size=1, max_size=4), dyadic(16, 64))
    def test_arithmetic_reproduces_target(self, fixed, target):
        # target above every fixed price keeps the residual positive
        p = agg.solve_residual(agg.arithmetic(), target, fixed, len(fixed))
        assert agg.arithmetic()(list(fixed) + [p]) == target

    @given(st.lists(dyadic(8, 64), min_size=1, max_size=4), dyadic(1, 7))
    def test_harmonic_reproduces_target(self, fixed, target):
        # target below every fixed price keeps the residual positive
        W = agg.weighted_harmonic([1] * (len(fixed) + 1))
        p = agg.solve_residual(W, target, fixed, len(fixed))
        assert W(list(fixed) + [p]) == target

    def test_custom_by_bisection(self):
        # geometric-like mean of squares: sqrt((a^2 + b^2) / 2), rational by construction at the root
        def rms(ps):
            s = sum(p * p for p in ps) / len(ps)
            lo, hi = Fraction(0), max(ps)
            for _ in range(80):
                mid = (lo + hi) / 2
                lo, hi = (mid, hi) if mid * mid < s else (lo, mid)
            return hi
        W = agg.custom(rms, agg.DIVERGES_AT_INFINITY, 2)
        p = agg.solve_residual(W, 5, (1,), 1)
        assert abs(W((1, p)) - 5) < Fraction(1, 2**40)


class TestResolve:
    def test_keys(self):
        assert agg.resolve("arithmetic").kind == agg.ARITHMETIC
        assert agg.resolve("harmonic", weights=(1, 2)).mass == 3

    def test_unknown(self):
        with pytest.raises(AggregatorError):
            agg.resolve("median")

    def test_custom_audit_rejects_non_idempotent(self):
        with pytest.raises(AggregatorError):
            agg.custom(lambda ps: 2 * sum(ps), agg.DIVERGES_AT_INFINITY, 2)

    def test_custom_audit_rejects_decreasing(self):
        with pytest.raises(AggregatorError):
            agg.custom(lambda ps: 2 * ps[0] - ps[1], agg.DIVERGES_AT_INFINITY, 2)
