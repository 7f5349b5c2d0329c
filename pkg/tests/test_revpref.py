from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given

from hetprice import fixtures
from hetprice._closure import BACKENDS, path
from hetprice.dataset import dot
from hetprice.errors import NonPositivePrice
from hetprice.revpref import (
    Observation,
    PriceSystem,
    afriat_audit,
    afriat_construct,
    check_gapp,
    check_garp,
    direct_relations,
    evaluate_afriat,
    verify_witness,
)
from hetprice.synth import GeneratorSpec, generate_panel

from conftest import observation_lists, stream
from oracles import brute_force_garp


class TestObservation:
    def test_nonpositive_price(self):
        with pytest.raises(NonPositivePrice):
            Observation(x=(1, 1), p=(1, 0))

    def test_length_mismatch(self):
        with pytest.raises(Exception):
            Observation(x=(1,), p=(1, 1))


class TestDirectRelations:
    def test_single_observation(self):
        g = direct_relations([((1, 2), (1, 1))])
        assert g.weak.tolist() == [[True]]
        assert g.strict.tolist() == [[False]]

    def test_warp_pair_costs(self):
        g = direct_relations(fixtures.warp_pair())
        assert g.cost[0][1] == Fraction(7, 2)
        assert g.cost[1][0] == Fraction(7, 2)
        assert g.strict[0, 1] and g.strict[1, 0]

    def test_worked_example_consumer_graph(self, worked_panel):
        # own cost 2*5 + 3 = 13; any other bundle costs 2*1 + 5 + 1 + 1 = 9
        g = direct_relations(stream(worked_panel, 0))
        expected = [[13 if t == s else 9 for s in range(4)] for t in range(4)]
        assert [[int(c) for c in row] for row in g.cost] == expected
        assert g.weak.all()
        assert (g.strict == ~np.eye(4, dtype=bool)).all()


class TestCheckGarp:
    def test_single_observation(self):
        assert check_garp([((1, 1), (1, 1))]).satisfied

    def test_warp_pair(self):
        v = check_garp(fixtures.warp_pair())
        assert not v.satisfied
        assert v.witness == [0, 1, 0]

    def test_cobb_douglas_streams(self):
        for seed in range(10):
            panel = generate_panel(GeneratorSpec("cobb_douglas", seed=seed, N=2, T=4, K=3))
            for i in range(panel.N):
                assert check_garp(stream(panel, i)).satisfied

    def test_worked_example_consumer_violates(self, worked_panel):
        v = check_garp(stream(worked_panel, 0))
        assert not v.satisfied
        assert verify_witness(v.graph, v.witness)

    @given(observation_lists())
    def test_agrees_with_brute_force(self, pairs):
        assert check_garp(pairs).satisfied == brute_force_garp(pairs)

    @given(observation_lists())
    def test_witness_replays(self, pairs):
        v = check_garp(pairs)
        if not v.satisfied:
            assert verify_witness(v.graph, v.witness)

    @given(observation_lists())
    def test_invariant_to_price_rescaling(self, pairs):
        # multiplying one observation's prices by a constant leaves its relations unchanged
        scaled = [(x, tuple(3 * v for v in p)) if n == 0 else (x, p) for n, (x, p) in enumerate(pairs)]
        assert check_garp(scaled).satisfied == check_garp(pairs).satisfied


class TestClosureBackends:
    @pytest.mark.parametrize("n", [1, 5, 17, 40])
    def test_backends_agree(self, n):
        rng = np.random.default_rng(n)
        adj = rng.random((n, n)) < 0.15
        results = [BACKENDS[name](adj) for name in sorted(BACKENDS)]
        reach0, _ = results[0]
        for reach, nxt in results:
            assert np.array_equal(reach, reach0)
            for i, j in zip(*np.nonzero(reach)):
                walk = path(nxt, int(i), int(j))
                assert all(adj[a, b] for a, b in zip(walk, walk[1:]))

    def test_reach_matches_matrix_powers(self):
        rng = np.random.default_rng(3)
        adj = rng.random((12, 12)) < 0.2
        reach = adj.copy()
        for _ in range(12):
            reach = reach | ((reach.astype(int) @ adj.astype(int)) > 0)
        for name in BACKENDS:
            assert np.array_equal(BACKENDS[name](adj)[0], reach)


class TestCheckGapp:
    def test_single(self):
        assert check_gapp([((1, 1), PriceSystem.linear((1, 2)))]).satisfied

    def test_mutual_strict_price_preference(self):
        pts = [(o.x, PriceSystem.linear(o.p)) for o in fixtures.warp_pair()]
        v = check_gapp(pts)
        assert v.graph.cost[0][0] == 4 and v.graph.cost[1][0] == Fraction(7, 2)
        assert not v.satisfied

    def test_system_memoizes(self):
        calls = []
        f = PriceSystem(evaluator=lambda x: calls.append(x) or dot((1, 1), x))
        f((1, 2))
        f((1, 2))
        assert len(calls) == 1


class TestAfriat:
    def test_single_observation(self):
        sol = afriat_construct([((1, 1), (1, 1))])
        assert sol.levels == (0,)
        assert sol.multipliers == (1,)

    def test_no_cross_edges(self):
        obs = [((1, 1), (1, 1)), ((10, 10), (1, 1))]
        sol = afriat_construct(obs)
        assert afriat_audit(sol, obs)

    def test_rejects_violation(self):
        with pytest.raises(Exception):
            afriat_construct(fixtures.warp_pair())

    def test_cobb_douglas_rationalized(self):
        panel = generate_panel(GeneratorSpec("cobb_douglas", seed=5, N=1, T=4, K=3))
        obs = stream(panel, 0)
        sol = afriat_construct(obs)
        for t, (x, p) in enumerate(obs):
            assert evaluate_afriat(sol, obs, x) == sol.levels[t]

    def test_single_affine_piece(self):
        x, p = (1, 2), (3, 1)
        sol = afriat_construct([(x, p)])
        assert evaluate_afriat(sol, [(x, p)], (2, 4)) == sol.levels[0] + sol.multipliers[0] * dot(p, x)

    @given(observation_lists(max_n=5))
    def test_inequalities_hold_independently(self, pairs):
        if not check_garp(pairs).satisfied:
            return
        sol = afriat_construct(pairs)
        assert all(lam > 0 for lam in sol.multipliers)
        for t, (xt, pt) in enumerate(pairs):
            for s, (xs, _) in enumerate(pairs):
                gap = Fraction(dot(pt, xs)) - dot(pt, xt)
                assert sol.levels[s] <= sol.levels[t] + sol.multipliers[t] * gap

    @given(observation_lists(max_n=4))
    def test_budget_points_not_better(self, pairs):
        if not check_garp(pairs).satisfied:
            return
        sol = afriat_construct(pairs)
        for t, (xt, pt) in enumerate(pairs):
            m = dot(pt, xt)
            for k in range(len(pt)):
                corner = tuple(m / pt[k] if j == k else 0 for j in range(len(pt)))
                assert evaluate_afriat(sol, pairs, corner) <= sol.levels[t]


class TestBackendSelection:
    def test_environment_forces_pure_python(self):
        import os
        import subprocess
        import sys

        env = dict(os.environ, HETPRICE_PURE="1")
        out = subprocess.run([sys.executable, "-c", "import hetprice; print(hetprice.BACKEND)"],
                             env=env, capture_output=True, text=True, check=True)
        assert out.stdout.strip() == "python"
