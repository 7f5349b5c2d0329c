from __future__ import annotations

import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hetprice.dataset import (
    CrossSection,
    PanelDataset,
    dump_cross_section,
    dump_panel,
    implied_bundle,
    load_cross_section,
    load_disaggregation,
    load_panel,
    load_panel_csv,
    to_money,
)
from hetprice.errors import DomainError, SchemaError
from hetprice import fixtures

from conftest import DATA, dyadic


class TestToMoney:
    def test_decimal_string(self):
        assert to_money("0.1") == Fraction(1, 10)

    def test_rational_string(self):
        assert to_money("7/3") == Fraction(7, 3)

    def test_float_rejected(self):
        with pytest.raises(TypeError):
            to_money(0.1)

    def test_json_number_parsed_exactly(self):
        panel = load_panel('{"goods": 1, "consumers": 1, "observations": [{"pbar": [0.1], "expenditures": [[0.3]]}]}')
        assert panel.pbar[0][0] == Fraction(1, 10)
        assert panel.e[0][0][0] == Fraction(3, 10)


class TestImpliedBundle:
    def test_worked_example_row(self):
        assert implied_bundle((10, 1, 1, 1), (2, 1, 1, 1)) == (5, 1, 1, 1)

    def test_zero_expenditure(self):
        assert implied_bundle((0, 0), (3, 7)) == (0, 0)

    def test_componentwise(self):
        assert implied_bundle((1, 3), (1, 2)) == (1, Fraction(3, 2))

    @given(st.lists(st.tuples(dyadic(0), dyadic(1)), min_size=1, max_size=5))
    def test_budget_identity(self, pairs):
        e = [a for a, _ in pairs]
        p = [b for _, b in pairs]
        x = implied_bundle(e, p)
        assert sum(pi * xi for pi, xi in zip(p, x)) == sum(e)


class TestLoadPanel:
    def test_worked_example_document(self):
        with open(DATA / "worked_example.json") as fh:
            panel = load_panel(fh.read())
        assert (panel.N, panel.T, panel.K) == (2, 4, 4)
        assert panel.e[0][0] == (10, 1, 1, 1)
        assert panel.pbar[0] == (2, 1, 1, 1)

    def test_zero_index_price(self):
        doc = {"goods": 2, "consumers": 1, "observations": [{"pbar": ["1", "0"], "expenditures": [["1", "1"]]}]}
        with pytest.raises(DomainError):
            load_panel(doc)

    def test_minimal_panel(self):
        panel = load_panel({"goods": 1, "consumers": 1, "observations": [{"pbar": ["1"], "expenditures": [["2"]]}]})
        assert (panel.N, panel.T) == (1, 1)
        assert panel.m(0, 0) == 2

    def test_shape_mismatch(self):
        doc = {"goods": 2, "consumers": 2, "observations": [{"pbar": ["1", "1"], "expenditures": [["1", "1"]]}]}
        with pytest.raises(SchemaError):
            load_panel(doc)

    def test_round_trip(self, worked_panel):
        again = load_panel(json.dumps(dump_panel(worked_panel)))
        assert again == worked_panel

    @given(st.integers(1, 3), st.integers(1, 3), st.integers(1, 3), st.data())
    def test_round_trip_property(self, N, T, K, data):
        vec = lambda lo: st.tuples(*[dyadic(lo, 64, 16) for _ in range(K)])  # noqa: E731
        panel = PanelDataset(
            e=[[data.draw(vec(1)) for _ in range(T)] for _ in range(N)],
            pbar=[data.draw(vec(1)) for _ in range(T)],
        )
        assert load_panel(json.dumps(dump_panel(panel))) == panel

    def test_csv(self):
        panel = load_panel_csv("i,t,e_1,e_2\n1,1,1,2\n1,2,3,4\n", "t,p_1,p_2\n1,1,1\n2,2,0.5\n")
        assert panel.e[0][1] == (3, 4)
        assert panel.pbar[1] == (2, Fraction(1, 2))

    def test_csv_incomplete(self):
        with pytest.raises(SchemaError):
            load_panel_csv("i,t,e_1\n1,1,1\n", "t,p_1\n1,1\n2,1\n")


class TestLoadCrossSection:
    def test_unsortable_instance(self):
        with open(DATA / "crossing_unsortable.json") as fh:
            cs = load_cross_section(fh.read())
        assert (cs.T, cs.N) == (2, 2)
        assert cs == fixtures.crossing_unsortable()

    def test_wrong_total(self):
        doc = {"goods": 2, "observations": [{"pbar": [1, 1], "m": 3, "points": [[1, 1]]}]}
        with pytest.raises(DomainError):
            load_cross_section(doc)

    def test_single_point(self):
        cs = load_cross_section({"goods": 2, "observations": [{"pbar": [1, 1], "m": 2, "points": [[1, 1]]}]})
        assert (cs.T, cs.N) == (1, 1)

    def test_round_trip(self):
        cs = fixtures.crossing_sortable()
        assert load_cross_section(dump_cross_section(cs)) == cs

    def test_weights_must_sum_to_one(self):
        with pytest.raises(DomainError):
            CrossSection(pbar=[(1, 1)], m=[2], points=[[(1, 1), (2, 0)]], weights=[(Fraction(1, 3), Fraction(1, 3))])


class TestLoadDisaggregation:
    def test_example(self):
        with open(DATA / "disaggregation_example.json") as fh:
            e, xbar = load_disaggregation(fh.read())
        assert xbar == ((4, 2, 2),)
        assert e[0][0] == (2, 2, 2)
