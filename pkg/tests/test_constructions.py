from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hetprice import aggregators as agg
from hetprice import behavioral as bh
from hetprice.constructions import (
    StableScale,
    _pow2_below,
    check_stable_invariance,
    consistency_residual,
    cross_edges,
    pooled_garp,
    prop1_rationalize,
    prop2_disaggregate,
    prop4_stable_prices,
    prop6_au_lambdas,
    scale_transform_verify,
)
from hetprice.dataset import PanelDataset
from hetprice.errors import AggregatorError, PreconditionError
from hetprice.revpref import afriat_construct, check_gapp, check_garp
from hetprice.synth import GeneratorSpec, generate_panel

from conftest import stream


def cd_panel(seed, N=2, T=3, K=3):
    return generate_panel(GeneratorSpec("cobb_douglas", seed=seed, N=N, T=T, K=K))


class TestPow2Below:
    @pytest.mark.parametrize("bound, eps", [(Fraction(1), Fraction(1, 2)), (Fraction(1, 2), Fraction(1, 4)),
                                            (Fraction(3, 10), Fraction(1, 4)), (Fraction(100), Fraction(1, 2))])
    def test_values(self, bound, eps):
        assert _pow2_below(bound) == eps


class TestTwoGoodPrices:
    def test_worked_example(self, worked_panel):
        prices, params = prop1_rationalize(worked_panel, agg.arithmetic())
        assert pooled_garp(worked_panel, prices).satisfied
        assert consistency_residual(worked_panel, prices, agg.arithmetic()) == 0
        assert params.all_bounds_hold()
        # goods beyond the first two keep the index price
        for i in range(2):
            for t in range(4):
                assert prices.p[i][t][2:] == worked_panel.pbar[t][2:]

    def test_single_consumer_pinned(self):
        panel = cd_panel(1, N=1)
        prices, _ = prop1_rationalize(panel, agg.arithmetic())
        assert prices.p[0] == panel.pbar
        assert pooled_garp(panel, prices).satisfied

    def test_single_violating_consumer(self):
        panel = generate_panel(GeneratorSpec("violation", seed=0, N=1, T=2, K=2))
        with pytest.raises(PreconditionError) as info:
            prop1_rationalize(panel, agg.arithmetic())
        assert info.value.witness is not None

    def test_zero_good_one(self):
        panel = PanelDataset(e=[[(0, 1)], [(1, 1)]], pbar=[(1, 1)])
        with pytest.raises(PreconditionError):
            prop1_rationalize(panel, agg.arithmetic())

    def test_mixed_regularity(self, worked_panel):
        h = agg.weighted_harmonic([1, 1])
        with pytest.raises(AggregatorError):
            prop1_rationalize(worked_panel, lambda t, k: h if k == 0 else agg.arithmetic())

    def test_harmonic(self, worked_panel):
        W = agg.weighted_harmonic([1, 1])
        prices, _ = prop1_rationalize(worked_panel, W)
        assert pooled_garp(worked_panel, prices).satisfied
        assert consistency_residual(worked_panel, prices, W) < Fraction(1, 2**60)

    @given(st.integers(0, 10**6), st.integers(1, 4), st.integers(1, 4), st.integers(2, 4))
    def test_adversarial_panels(self, seed, N, T, K):
        panel = generate_panel(GeneratorSpec("adversarial", seed=seed, N=N, T=T, K=K))
        if N == 1 and not check_garp(stream(panel, 0)).satisfied:
            return
        prices, params = prop1_rationalize(panel, agg.arithmetic())
        assert pooled_garp(panel, prices).satisfied
        assert consistency_residual(panel, prices, agg.arithmetic()) == 0


class TestDisaggregation:
    def test_two_consumers(self):
        e = [[(1, 1, 1)], [(1, 1, 1)]]
        result = prop2_disaggregate(e, [(4, 2, 2)])
        assert result.panel.pbar == ((Fraction(1, 2), 1, 1),)
        assert tuple(sum(result.x[i][0][k] for i in range(2)) for k in range(3)) == (4, 2, 2)
        assert pooled_garp(result.panel, result.prices).satisfied

    def test_single_consumer_forced(self):
        result = prop2_disaggregate([[(2, 2, 2)]], [(4, 2, 2)])
        assert result.x[0][0] == (4, 2, 2)

    def test_zero_aggregate(self):
        with pytest.raises(PreconditionError):
            prop2_disaggregate([[(1, 1)]], [(1, 0)])


class TestStableInvariance:
    def test_identity_returns_same_verdict(self):
        panel = cd_panel(2)
        for res in check_stable_invariance(panel, [[1] * 3] * 2):
            assert res.scaled is res.index

    @given(st.integers(0, 10**6), st.data())
    def test_random_scales(self, seed, data):
        panel = generate_panel(GeneratorSpec("adversarial", seed=seed, N=2, T=3, K=3))
        choices = st.sampled_from([Fraction(1, 3), Fraction(1, 2), Fraction(2), Fraction(5)])
        lam = [[data.draw(choices) for _ in range(3)] for _ in range(2)]
        for res in check_stable_invariance(panel, lam):
            assert res.edges_identical and res.verdicts_match

    def test_violator_stays_violating(self):
        panel = generate_panel(GeneratorSpec("violation", seed=3, N=1, T=2, K=2))
        (res,) = check_stable_invariance(panel, [[Fraction(1, 3), 5]])
        assert not res.scaled.satisfied and not res.index.satisfied


class TestStableScaling:
    def test_two_cobb_douglas_consumers(self):
        panel = generate_panel(GeneratorSpec("cobb_douglas", seed=4, N=2, T=3, K=3,
                                             exponents=((Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)),
                                                        (Fraction(1, 5), Fraction(2, 5), Fraction(2, 5)))))
        scale, prices, params = prop4_stable_prices(panel, range(3), agg.arithmetic())
        assert sum(scale.lam) / 2 == 1
        verdict = pooled_garp(panel, prices)
        assert verdict.satisfied
        assert cross_edges(verdict.graph.weak, 2, 3, upward=True) == 0
        base = afriat_construct(prices.pooled_observations(panel))
        assert scale_transform_verify(panel, scale, base)

    def test_single_consumer(self):
        panel = cd_panel(5, N=1)
        scale, prices, _ = prop4_stable_prices(panel, [0], agg.arithmetic())
        assert scale.lam == (1,)
        assert prices.p[0] == panel.pbar

    def test_violating_consumer(self):
        panel = generate_panel(GeneratorSpec("violation", seed=2, N=2, T=3, K=2, violator=1))
        with pytest.raises(PreconditionError) as info:
            prop4_stable_prices(panel, [0], agg.arithmetic())
        assert info.value.consumer == 1
        assert check_garp(stream(panel, 1)).witness == info.value.witness

    def test_harmonic_normalization(self):
        panel = cd_panel(6, N=3)
        W = agg.weighted_harmonic([1, 1, 1])
        scale, prices, _ = prop4_stable_prices(panel, [1], W)
        assert W(scale.lam) == 1
        assert pooled_garp(panel, prices).satisfied

    def test_unit_scales_reduce_to_afriat(self):
        panel = cd_panel(7, N=1)
        scale = StableScale(lam=[1], R=[0])
        base = afriat_construct(stream(panel, 0))
        assert scale_transform_verify(panel, scale, base)

    def test_wrong_scales_detected(self):
        panel = cd_panel(8, N=3)
        scale, prices, _ = prop4_stable_prices(panel, range(3), agg.arithmetic())
        base = afriat_construct(prices.pooled_observations(panel))
        swapped = StableScale(lam=tuple(reversed(scale.lam)), R=scale.R)
        assert not scale_transform_verify(panel, swapped, base)


class TestPerceivedPrices:
    @pytest.mark.parametrize("phi", [bh.misperception(), bh.reference("max1")], ids=lambda p: p.key)
    def test_pooled_gapp(self, phi):
        panel = cd_panel(9, N=3)
        scale, systems, params = prop6_au_lambdas(panel, phi, agg.arithmetic())
        assert sum(scale.lam) == 3
        pts = [(panel.bundle(i, t), systems[i][t]) for i in range(3) for t in range(panel.T)]
        verdict = check_gapp(pts)
        assert verdict.satisfied
        assert cross_edges(verdict.graph.weak, 3, panel.T, upward=False) == 0
        assert params.all_bounds_hold()

    def test_single_consumer(self):
        panel = cd_panel(10, N=1)
        scale, systems, _ = prop6_au_lambdas(panel, bh.misperception(), agg.arithmetic())
        assert scale.lam == (1,)
        x = panel.bundle(0, 0)
        assert systems[0][0](x) == panel.m(0, 0)

    def test_gapp_violation_rejected(self):
        panel = PanelDataset(e=[[(1, 3), (3, 1)], [(2, 2), (2, 2)]], pbar=[(1, 2), (2, 1)])
        with pytest.raises(PreconditionError) as info:
            prop6_au_lambdas(panel, bh.misperception(), agg.arithmetic())
        assert info.value.witness is not None
