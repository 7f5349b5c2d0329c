from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hetprice import synth
from hetprice.errors import DomainError, SchemaError
from hetprice.revpref import check_garp

from conftest import stream


def is_dyadic(q: Fraction) -> bool:
    d = q.denominator
    return d & (d - 1) == 0


class TestGeneratePanel:
    def test_equal_split(self):
        half = (Fraction(1, 2), Fraction(1, 2))
        panel = synth.generate_panel(synth.GeneratorSpec("cobb_douglas", seed=0, N=2, T=3, K=2,
                                                         exponents=(half, half)))
        for i in range(2):
            for t in range(3):
                a, b = panel.e[i][t]
                assert a == b

    def test_deterministic(self):
        spec = synth.GeneratorSpec("adversarial", seed=42, N=3, T=3, K=3)
        assert synth.generate_panel(spec) == synth.generate_panel(spec)

    @given(st.sampled_from([synth.COBB_DOUGLAS, synth.LEONTIEF]), st.integers(0, 10**6),
           st.integers(1, 4), st.integers(1, 5), st.integers(1, 4))
    def test_utility_families_pass_garp(self, family, seed, N, T, K):
        panel = synth.generate_panel(synth.GeneratorSpec(family, seed=seed, N=N, T=T, K=K))
        for i in range(N):
            assert check_garp(stream(panel, i)).satisfied

    @given(st.integers(0, 10**6), st.integers(1, 3), st.integers(2, 4), st.integers(2, 4))
    def test_violation_template(self, seed, N, T, K):
        spec = synth.GeneratorSpec("violation", seed=seed, N=N, T=T, K=K, violator=0)
        panel = synth.generate_panel(spec)
        v = check_garp(stream(panel, 0))
        assert not v.satisfied
        assert len(set(v.witness)) == 2
        for i in range(1, N):
            assert check_garp(stream(panel, i)).satisfied

    @given(st.sampled_from(synth.FAMILIES), st.integers(0, 10**6))
    def test_dyadic_numbers(self, family, seed):
        panel = synth.generate_panel(synth.GeneratorSpec(family, seed=seed, N=2, T=3, K=3))
        for row in panel.pbar:
            assert all(is_dyadic(v) for v in row)
        if family == synth.LEONTIEF:
            return  # expenditures divide by the bundle cost
        for i in range(2):
            for t in range(3):
                assert all(is_dyadic(v) for v in panel.e[i][t])

    def test_adversarial_first_goods_positive(self):
        for seed in range(20):
            panel = synth.generate_panel(synth.GeneratorSpec("adversarial", seed=seed, N=2, T=3, K=4))
            assert all(panel.e[i][t][k] > 0 for i in range(2) for t in range(3) for k in (0, 1))


class TestSpec:
    def test_unknown_family(self):
        with pytest.raises(DomainError):
            synth.GeneratorSpec("lognormal")

    def test_bad_exponents(self):
        with pytest.raises(DomainError):
            synth.GeneratorSpec("cobb_douglas", K=2, exponents=((Fraction(1, 2), Fraction(1, 3)),))

    def test_from_json(self):
        spec = synth.spec_from_json('{"family": "leontief", "seed": 3, "N": 2}')
        assert spec.family == "leontief" and spec.N == 2

    def test_from_json_bad_field(self):
        with pytest.raises(SchemaError):
            synth.spec_from_json('{"family": "leontief", "colour": 3}')


class TestCrossSection:
    def test_common_income_shuffles(self):
        panel = synth.generate_panel(synth.GeneratorSpec("cobb_douglas", seed=0, N=3, T=2, K=2, common_income=True))
        cs = synth.to_cross_section(panel, seed=1)
        for t in range(2):
            assert sorted(cs.points[t]) == sorted(panel.e[i][t] for i in range(3))

    def test_unequal_incomes(self):
        panel = synth.generate_panel(synth.GeneratorSpec("adversarial", seed=0, N=2, T=2, K=2))
        with pytest.raises(DomainError):
            synth.to_cross_section(panel)
