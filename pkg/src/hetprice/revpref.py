"""Revealed-preference engine: direct relations, GARP and GAPP verdicts, Afriat utilities.

All comparisons are exact.  The transitive closure runs on a boolean matrix
through :mod:`hetprice._closure` (compiled when available).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Sequence

import numpy as np

from . import _closure
from .dataset import dot, fmt, to_vector
from .errors import ConstructionFailed, DomainError, EvaluatorDomainError, GarpViolation, NonPositivePrice


@dataclass(frozen=True)
class Observation:
    """A bundle ``x`` bought at linear prices ``p``."""

    x: tuple
    p: tuple

    def __post_init__(self):
        x, p = to_vector(self.x), to_vector(self.p)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "p", p)
        if len(x) != len(p):
            raise DomainError("bundle and price vector differ in length")
        if any(v <= 0 for v in p):
            raise NonPositivePrice("prices must be strictly positive")
        if any(v < 0 for v in x):
            raise DomainError("bundle quantities must be nonnegative")


def observations(pairs) -> list[Observation]:
    """Coerce ``(x, p)`` pairs into observations (pass-through for Observation)."""
    return [o if isinstance(o, Observation) else Observation(*o) for o in pairs]


@dataclass(frozen=True, eq=False)
class RevealedPreferenceGraph:
    """Direct relations over ``n`` nodes.

    ``cost[t][s]`` is the number the relation was read from: ``p^t . x^s``
    for GARP, ``f^t(x^s)`` for GAPP.
    """

    weak: np.ndarray
    strict: np.ndarray
    cost: tuple

    @property
    def n(self) -> int:
        return self.weak.shape[0]

    def same_edges(self, other: "RevealedPreferenceGraph") -> bool:
        return bool(np.array_equal(self.weak, other.weak) and np.array_equal(self.strict, other.strict))


@dataclass(frozen=True, eq=False)
class GarpVerdict:
    satisfied: bool
    witness: list[int] | None
    graph: RevealedPreferenceGraph

    def to_json(self) -> dict:
        return {
            "satisfied": self.satisfied,
            "witness": self.witness,
            "cost_matrix": [[fmt(c) for c in row] for row in self.graph.cost],
        }


def verify_witness(graph: RevealedPreferenceGraph, witness: Sequence[int]) -> bool:
    """True when ``witness`` is a closed walk of weak edges containing a strict edge."""
    if len(witness) < 2 or witness[0] != witness[-1]:
        return False
    steps = list(zip(witness[:-1], witness[1:]))
    return all(graph.weak[a, b] for a, b in steps) and any(graph.strict[a, b] for a, b in steps)


def _verdict(weak: np.ndarray, strict: np.ndarray, cost) -> GarpVerdict:
    graph = RevealedPreferenceGraph(weak=weak, strict=strict, cost=cost)
    if weak.shape[0] == 0:
        return GarpVerdict(True, None, graph)
    reach, nxt = _closure.warshall(weak)
    bad = np.argwhere(reach & strict.T)
    if len(bad) == 0:
        return GarpVerdict(True, None, graph)
    t, s = (int(v) for v in bad[0])
    # t reaches s through weak edges and s is strictly preferred to t
    witness = _closure.path(nxt, t, s) + [t]
    return GarpVerdict(False, witness, graph)


def cost_matrix(obs: Sequence[Observation]) -> tuple:
    return tuple(tuple(dot(a.p, b.x) for b in obs) for a in obs)


def direct_relations(obs) -> RevealedPreferenceGraph:
    """``weak[t, s]`` iff ``p^t.x^t >= p^t.x^s``; ``strict`` with ``>``."""
    obs = observations(obs)
    cost = cost_matrix(obs)
    n = len(obs)
    weak = np.zeros((n, n), dtype=bool)
    strict = np.zeros((n, n), dtype=bool)
    for t in range(n):
        own = cost[t][t]
        for s in range(n):
            weak[t, s] = own >= cost[t][s]
            strict[t, s] = own > cost[t][s]
    return RevealedPreferenceGraph(weak=weak, strict=strict, cost=cost)


def check_garp(obs) -> GarpVerdict:
    g = direct_relations(obs)
    return _verdict(g.weak, g.strict, g.cost)


# --- price systems and GAPP -----------------------------------------------------


@dataclass(frozen=True, eq=False)
class PriceSystem:
    """Total-cost function over bundles.

    ``tag`` is ``"linear"`` (``params["p"]``) or ``"behavioral"``
    (``params`` holds phi, pbar and the perceived prices).  Evaluations are
    memoized per bundle.
    """

    evaluator: Callable[[tuple], Any]
    tag: str = "linear"
    params: dict = field(default_factory=dict)
    _memo: dict = field(default_factory=dict, init=False, repr=False)

    @classmethod
    def linear(cls, p) -> "PriceSystem":
        p = to_vector(p)
        if any(v <= 0 for v in p):
            raise NonPositivePrice("linear price system needs positive prices")
        return cls(evaluator=lambda x: dot(p, x), tag="linear", params={"p": p})

    def __call__(self, x) -> Fraction:
        x = tuple(x)
        try:
            return self._memo[x]
        except KeyError:
            pass
        try:
            v = self.evaluator(x)
        except (DomainError, ZeroDivisionError, ValueError) as exc:
            raise EvaluatorDomainError(f"price system undefined at {x}: {exc}") from exc
        if not isinstance(v, Fraction):
            v = Fraction(v)
        self._memo[x] = v
        return v


def price_preference_relations(points) -> RevealedPreferenceGraph:
    """``weak[t, s]`` iff ``f^t(x^s) <= f^s(x^s)``; ``strict`` with ``<``."""
    xs = [tuple(to_vector(x)) for x, _ in points]
    fs = [f for _, f in points]
    n = len(points)
    F = tuple(tuple(fs[t](xs[s]) for s in range(n)) for t in range(n))
    weak = np.zeros((n, n), dtype=bool)
    strict = np.zeros((n, n), dtype=bool)
    for t in range(n):
        for s in range(n):
            weak[t, s] = F[t][s] <= F[s][s]
            strict[t, s] = F[t][s] < F[s][s]
    return RevealedPreferenceGraph(weak=weak, strict=strict, cost=F)


def check_gapp(points) -> GarpVerdict:
    """GAPP over ``(bundle, PriceSystem)`` pairs; the witness is a price-preference cycle."""
    g = price_preference_relations(points)
    return _verdict(g.weak, g.strict, g.cost)


# --- Afriat -------------------------------------------------------------------


@dataclass(frozen=True)
class AfriatSolution:
    """Utility levels and positive multipliers satisfying every Afriat inequality."""

    levels: tuple
    multipliers: tuple

    def to_json(self) -> dict:
        return {"levels": [fmt(v) for v in self.levels], "multipliers": [fmt(v) for v in self.multipliers]}


def afriat_audit(sol: AfriatSolution, obs) -> bool:
    """Exact check of ``U^s <= U^t + lam^t p^t.(x^s - x^t)`` for all pairs."""
    obs = observations(obs)
    cost = cost_matrix(obs)
    U, lam = sol.levels, sol.multipliers
    if any(v <= 0 for v in lam):
        return False
    n = len(obs)
    return all(U[s] <= U[t] + lam[t] * (cost[t][s] - cost[t][t]) for t in range(n) for s in range(n))


def _components(reach: np.ndarray) -> list[int]:
    n = reach.shape[0]
    comp = [-1] * n
    c = 0
    for i in range(n):
        if comp[i] >= 0:
            continue
        for j in range(i, n):
            if j == i or (reach[i, j] and reach[j, i]):
                comp[j] = c
        c += 1
    return comp


def _depths(comp: list[int], weak: np.ndarray) -> list[int]:
    """Longest-path depth of each component in the condensation of ``weak``."""
    nc = max(comp) + 1
    succ = [set() for _ in range(nc)]
    indeg = [0] * nc
    n = len(comp)
    for a in range(n):
        for b in range(n):
            ca, cb = comp[a], comp[b]
            if ca != cb and weak[a, b] and cb not in succ[ca]:
                succ[ca].add(cb)
                indeg[cb] += 1
    depth = [0] * nc
    ready = [c for c in range(nc) if indeg[c] == 0]
    while ready:
        c = ready.pop()
        for d in sorted(succ[c]):
            depth[d] = max(depth[d], depth[c] + 1)
            indeg[d] -= 1
            if indeg[d] == 0:
                ready.append(d)
    return depth


def afriat_construct(obs) -> AfriatSolution:
    """Afriat numbers for a GARP-consistent dataset.

    Observations are grouped into strongly connected components of the weak
    relation and ranked by depth in the condensation.  Component at depth
    ``d`` gets multiplier ``base**d`` where ``base`` exceeds ``n * A / a``
    (``A`` the largest strict cost saving, ``a`` the smallest cost excess), so
    every cycle in the constraint graph has nonnegative weight.  Levels are
    then shortest-path distances, computed exactly.
    """
    obs = observations(obs)
    n = len(obs)
    verdict = check_garp(obs)
    if not verdict.satisfied:
        raise GarpViolation(verdict.witness)
    cost = verdict.graph.cost
    a = [[cost[t][s] - cost[t][t] for s in range(n)] for t in range(n)]
    neg = [-a[t][s] for t in range(n) for s in range(n) if a[t][s] < 0]
    pos = [a[t][s] for t in range(n) for s in range(n) if a[t][s] > 0]
    if neg:
        base = Fraction(int(n * max(neg) / min(pos)) + 1)
        reach, _ = _closure.warshall(verdict.graph.weak)
        comp = _components(reach)
        depth = _depths(comp, verdict.graph.weak)
        lam = tuple(base ** depth[comp[t]] for t in range(n))
    else:
        lam = tuple(Fraction(1) for _ in range(n))

    U = [Fraction(0)] * n
    for _ in range(n + 1):
        changed = False
        for t in range(n):
            for s in range(n):
                cand = U[t] + lam[t] * a[t][s]
                if cand < U[s]:
                    U[s] = cand
                    changed = True
        if not changed:
            break
    else:
        raise ConstructionFailed("negative cycle in Afriat constraint graph")
    sol = AfriatSolution(levels=tuple(U), multipliers=lam)
    if not afriat_audit(sol, obs):
        raise ConstructionFailed("Afriat audit failed")
    return sol


def afriat_pieces(sol: AfriatSolution, obs) -> list[tuple[Fraction, tuple]]:
    """Affine pieces ``(c, g)`` with ``u(x) = min c + g.x``."""
    obs = observations(obs)
    return [
        (U - lam * dot(o.p, o.x), tuple(lam * v for v in o.p))
        for U, lam, o in zip(sol.levels, sol.multipliers, obs)
    ]


def evaluate_pieces(pieces, x) -> Fraction:
    return min(c + dot(g, x) for c, g in pieces)


def evaluate_afriat(sol: AfriatSolution, obs, x) -> Fraction:
    """``min_t U^t + lam^t p^t.(x - x^t)``: the piecewise-linear concave utility."""
    return evaluate_pieces(afriat_pieces(sol, obs), to_vector(x))
