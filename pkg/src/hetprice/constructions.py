"""Constructive rationalizations by heterogeneous prices.

Each construction picks its free parameters (``epsilon``, seed prices,
scale multipliers) from explicit, data-driven bounds, records those bounds in
a :class:`ConstructionParams`, then audits its own output exactly.  A failed
audit triggers a geometric retry; exhausting the retries raises
:class:`ConstructionFailed`, which signals a bug rather than a data property.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import aggregators as agg
from .aggregators import AggregatorSpec
from .behavioral import BehavioralExpenditure, eval_phi, make_price_systems
from .dataset import HeterogeneousPrices, PanelDataset, dot, fmt, implied_bundle, to_vector
from .errors import (
    AggregatorError,
    ConstructionFailed,
    DomainError,
    PreconditionError,
    RegularityError,
)
from .revpref import (
    AfriatSolution,
    GarpVerdict,
    PriceSystem,
    check_gapp,
    check_garp,
    afriat_pieces,
    evaluate_pieces,
    price_preference_relations,
)

MAX_EPS_RETRIES = 60
MAX_BOOSTS = 10
MAX_EXPANSION = 10
GRID_POINTS = 64


@dataclass(frozen=True)
class BoundEntry:
    """One strict inequality ``lhs < rhs`` a parameter was chosen to satisfy."""

    label: str
    lhs: Fraction
    rhs: Fraction

    def holds(self) -> bool:
        return self.lhs < self.rhs

    def to_json(self) -> dict:
        return {"label": self.label, "lhs": fmt(self.lhs), "rhs": fmt(self.rhs), "holds": self.holds()}


@dataclass(frozen=True)
class ConstructionParams:
    epsilon: Fraction | None = None
    p1_seed: Fraction | None = None
    p2_seed: Fraction | None = None
    alpha: tuple | None = None
    regularity: str | int | None = None
    bound_log: tuple = ()
    retries: int = 0

    def all_bounds_hold(self) -> bool:
        return all(b.holds() for b in self.bound_log)

    def to_json(self) -> dict:
        def opt(v):
            return None if v is None else fmt(v)

        return {
            "epsilon": opt(self.epsilon),
            "p1_seed": opt(self.p1_seed),
            "p2_seed": opt(self.p2_seed),
            "alpha": None if self.alpha is None else [fmt(a) for a in self.alpha],
            "regularity": self.regularity,
            "retries": self.retries,
            "bound_log": [b.to_json() for b in self.bound_log],
        }


@dataclass(frozen=True)
class StableScale:
    """Per-consumer multipliers ``lam[i]`` applied to the goods in ``R`` (0-based)."""

    lam: tuple
    R: tuple

    def __post_init__(self):
        lam = to_vector(self.lam)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "R", tuple(sorted(set(int(k) for k in self.R))))
        if any(v <= 0 for v in lam):
            raise DomainError("scale multipliers must be strictly positive")
        if not self.R:
            raise DomainError("scale set R must be nonempty")

    @property
    def beta(self) -> tuple:
        return tuple(1 / v for v in self.lam)

    def matrix(self, K: int) -> tuple:
        """Good-specific view ``lam[i][k]`` (1 outside R)."""
        if max(self.R) >= K:
            raise DomainError(f"scale set {self.R} exceeds {K} goods")
        return tuple(tuple(l if k in self.R else Fraction(1) for k in range(K)) for l in self.lam)

    def prices(self, panel: PanelDataset) -> HeterogeneousPrices:
        lam = self.matrix(panel.K)
        p = [[tuple(lam[i][k] * panel.pbar[t][k] for k in range(panel.K)) for t in range(panel.T)]
             for i in range(panel.N)]
        return HeterogeneousPrices(p=p, stable_scales=lam)

    def to_json(self) -> dict:
        return {"lambda": [fmt(v) for v in self.lam], "R": [k + 1 for k in self.R],
                "beta": [fmt(v) for v in self.beta]}


def _pow2_below(bound: Fraction) -> Fraction:
    """Largest ``2**-k`` (k >= 1) strictly below ``bound``."""
    eps = Fraction(1, 2)
    while eps >= bound:
        eps /= 2
    return eps


def _cells(W) -> Callable[[int, int], AggregatorSpec]:
    if isinstance(W, AggregatorSpec):
        return lambda t, k: W
    if callable(W):
        return W
    raise AggregatorError("W must be an AggregatorSpec or a callable (t, k) -> AggregatorSpec")


def pooled_garp(panel: PanelDataset, prices: HeterogeneousPrices) -> GarpVerdict:
    return check_garp(prices.pooled_observations(panel))


def consistency_residual(panel: PanelDataset, prices: HeterogeneousPrices, W) -> Fraction:
    """Largest relative gap ``|W^t_k(p^{.,t}_k) - pbar^t_k| / pbar^t_k`` over all cells."""
    cell = _cells(W)
    worst = Fraction(0)
    for t in range(panel.T):
        for k in range(panel.K):
            v = cell(t, k)([prices.p[i][t][k] for i in range(panel.N)])
            worst = max(worst, abs(v - panel.pbar[t][k]) / panel.pbar[t][k])
    return worst


# --- heterogeneity in two goods ----------------------------------------------------


def _single_consumer(panel: PanelDataset) -> tuple[HeterogeneousPrices, ConstructionParams]:
    prices = HeterogeneousPrices(p=[list(panel.pbar)])
    verdict = pooled_garp(panel, prices)
    if not verdict.satisfied:
        # W(p) = p pins a lone consumer to the index, so nothing is left to adjust
        raise PreconditionError("a single consumer is pinned to the index prices and violates GARP",
                                consumer=0, witness=verdict.witness)
    return prices, ConstructionParams(regularity="pinned")


def prop1_rationalize(panel: PanelDataset, W) -> tuple[HeterogeneousPrices, ConstructionParams]:
    """Heterogeneous prices in goods 1 and 2 that aggregate to the index and rationalize the panel.

    Goods beyond the first two keep the index price.  Good-1 prices fall
    geometrically along the lexicographic order on (consumer, observation) for
    every consumer but the last, whose good-1 price solves the aggregation
    equation.  The last consumer's good-2 price falls geometrically in t and
    the others share the residual good-2 price.  With ``epsilon`` small enough
    no observation can afford a lexicographically later bundle, so every
    revealed-preference edge points backwards and GARP holds.

    Args:
        panel: the data; every ``e[i][t][0]`` and ``e[i][t][1]`` must be positive.
        W: an AggregatorSpec used for every cell, or ``W(t, k) -> AggregatorSpec``.
    """
    N, T, K = panel.N, panel.T, panel.K
    if K < 2:
        raise PreconditionError("need at least two goods")
    for i in range(N):
        for t in range(T):
            for k in (0, 1):
                if panel.e[i][t][k] <= 0:
                    raise PreconditionError(f"expenditure on good {k + 1} must be positive at consumer {i + 1}, "
                                            f"observation {t + 1}", consumer=i)
    cell = _cells(W)
    cases = {cell(t, k).regularity for t in range(T) for k in (0, 1)}
    if len(cases) != 1:
        raise AggregatorError("all aggregators for goods 1 and 2 must share one regularity case")
    case = cases.pop()
    if N == 1:
        return _single_consumer(panel)

    e, pbar, m = panel.e, panel.pbar, panel.m
    last = N - 1
    bounds: list[tuple[str, Fraction]] = []
    chain1 = [e[j][s][0] / m(i, t) for j in range(last) for s in range(T) for i in range(last) for t in range(T)]
    bounds.append(("good-1 chain: eps < min e[j,s,1] / m[i,t] over consumers before the last", min(chain1)))
    chain2 = [e[last][s][1] / m(last, t) for s in range(T) for t in range(T)]
    bounds.append(("good-2 chain: eps < min e[N,s,2] / m[N,t]", min(chain2)))
    if case == agg.DIVERGES_AT_INFINITY:
        p1 = min(pbar[t][0] for t in range(T))
        p2 = min(pbar[t][1] for t in range(T))
        cross = [pbar[t][1] * e[last][s][1] / (p2 * m(i, t)) for i in range(last) for t in range(T) for s in range(T)]
        bounds.append(("cross: eps < min pbar[t,2] e[N,s,2] / (p2 m[i,t])", min(cross)))
    else:
        cross = [pbar[t][0] * e[last][s][0] / (pbar[s][0] * m(i, t))
                 for i in range(last) for t in range(T) for s in range(T)]
        bounds.append(("cross: eps < min pbar[t,1] e[N,s,1] / (pbar[s,1] m[i,t])", min(cross)))
    eps_bound = min(b for _, b in bounds)
    eps = _pow2_below(min(eps_bound, Fraction(1)))

    for retry in range(MAX_EPS_RETRIES + 1):
        if case == agg.VANISHES_AT_ZERO:
            p1 = max(pbar[t][0] / eps ** (i * T + t + 1) for i in range(last) for t in range(T))
            p2 = max(pbar[t][1] / eps ** (t + 1) for t in range(T))
        p = [[list(pbar[t]) for t in range(T)] for _ in range(N)]
        for t in range(T):
            for i in range(last):
                p[i][t][0] = p1 * eps ** (i * T + t)
            p[last][t][0] = agg.solve_residual(cell(t, 0), pbar[t][0], [p[i][t][0] for i in range(last)], last)
            p[last][t][1] = eps ** (t + 1) * p2
            shared = _solve_shared(cell(t, 1), pbar[t][1], p[last][t][1], N)
            for i in range(last):
                p[i][t][1] = shared
        prices = HeterogeneousPrices(p=p)
        if pooled_garp(panel, prices).satisfied:
            log = [BoundEntry(label, eps, b) for label, b in bounds]
            log.append(BoundEntry("eps < 1", eps, Fraction(1)))
            params = ConstructionParams(epsilon=eps, p1_seed=p1, p2_seed=p2, regularity=case,
                                        bound_log=tuple(log), retries=retry)
            return prices, params
        eps /= 2
    raise ConstructionFailed(f"pooled GARP still fails after {MAX_EPS_RETRIES} epsilon halvings")


def _solve_shared(W: AggregatorSpec, target: Fraction, pinned: Fraction, N: int) -> Fraction:
    """Common price ``q`` with ``W(q, ..., q, pinned) = target``."""
    if W.kind == agg.ARITHMETIC and W.weights is None:
        q = (N * target - pinned) / (N - 1)
        if q <= 0:
            raise agg.NoBracket(f"shared residual requires q = {q} <= 0")
        return q
    if W.kind == agg.WEIGHTED_HARMONIC:
        shared_mass = sum(W.weights[:-1])
        slack = W.mass / target - W.weights[-1] / pinned
        if shared_mass == 0:
            if slack == 0:
                return target
            raise agg.NoBracket("shared coordinates carry zero weight and the target is not met")
        if slack <= 0:
            raise agg.NoBracket(f"shared harmonic residual needs slack {slack} > 0")
        return shared_mass / slack
    if W.kind == agg.ARITHMETIC:
        shared_w = sum(W.weights[:-1])
        q = (target - W.weights[-1] * pinned) / shared_w
        if q <= 0:
            raise agg.NoBracket(f"shared residual requires q = {q} <= 0")
        return q
    return _bisect_shared(W, target, pinned, N)


def _bisect_shared(W: AggregatorSpec, target: Fraction, pinned: Fraction, N: int) -> Fraction:
    def f(q):
        return W([q] * (N - 1) + [pinned])

    tol = agg.RESIDUAL_TOL * target
    hi = target
    for _ in range(agg.MAX_BRACKET_STEPS):
        if f(hi) >= target:
            break
        hi *= 2
    else:
        raise agg.NoBracket("upper bracket expansion failed")
    lo = target
    for _ in range(agg.MAX_BRACKET_STEPS):
        if f(lo) <= target:
            break
        lo /= 2
    else:
        raise agg.NoBracket("lower bracket expansion failed")
    for _ in range(agg.MAX_BISECTIONS):
        mid = (lo + hi) / 2
        v = f(mid)
        if abs(v - target) <= tol:
            return mid
        if v < target:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


# --- disaggregation -------------------------------------------------------------------


@dataclass(frozen=True)
class Disaggregation:
    """Individual demands ``x[i][t][k]`` summing to the aggregate demands."""

    x: tuple
    prices: HeterogeneousPrices
    panel: PanelDataset
    params: ConstructionParams


def prop2_disaggregate(e, xbar) -> Disaggregation:
    """Split aggregate demands ``xbar[t]`` into individual demands consistent with expenditures ``e[i][t]``.

    The index price is ``pbar[t][k] = M / xbar[t][k]`` with ``M`` the total
    spent on good k; aggregation is expenditure-weighted harmonic, so the
    implied demands add up to ``xbar`` exactly.
    """
    e = tuple(tuple(to_vector(row) for row in cons) for cons in e)
    xbar = tuple(to_vector(row) for row in xbar)
    N, T = len(e), len(xbar)
    K = len(xbar[0]) if xbar else 0
    for t, row in enumerate(xbar):
        for k, v in enumerate(row):
            if v <= 0:
                raise PreconditionError(f"aggregate demand must be positive (observation {t + 1}, good {k + 1})")
    mass = [[sum(e[i][t][k] for i in range(N)) for k in range(K)] for t in range(T)]
    for t in range(T):
        for k in range(K):
            if mass[t][k] <= 0:
                raise PreconditionError(f"nobody buys good {k + 1} at observation {t + 1}, so its index is undefined")
    pbar = [[mass[t][k] / xbar[t][k] for k in range(K)] for t in range(T)]
    panel = PanelDataset(e=e, pbar=pbar)
    specs = {(t, k): agg.weighted_harmonic([e[i][t][k] for i in range(N)]) for t in range(T) for k in range(K)}
    prices, params = prop1_rationalize(panel, lambda t, k: specs[(t, k)])
    x = tuple(tuple(implied_bundle(e[i][t], prices.p[i][t]) for t in range(T)) for i in range(N))
    return Disaggregation(x=x, prices=prices, panel=panel, params=params)


# --- stable scaling ------------------------------------------------------------------------


@dataclass(frozen=True)
class InvarianceResult:
    consumer: int
    scaled: GarpVerdict
    index: GarpVerdict
    edges_identical: bool

    @property
    def verdicts_match(self) -> bool:
        return self.scaled.satisfied == self.index.satisfied


def check_stable_invariance(panel: PanelDataset, scales) -> list[InvarianceResult]:
    """Compare each consumer's revealed preferences at scaled prices and at the index.

    ``scales`` is a StableScale or a good-specific matrix ``lam[i][k]``.
    Scaling good k by a constant multiplies both sides of every cost
    comparison's good-k term consistently, so the two graphs must coincide.
    """
    lam = scales.matrix(panel.K) if isinstance(scales, StableScale) else tuple(to_vector(r) for r in scales)
    if len(lam) != panel.N or any(len(r) != panel.K for r in lam):
        raise DomainError("scale matrix must be N x K")
    if any(v <= 0 for r in lam for v in r):
        raise DomainError("scale multipliers must be strictly positive")
    out = []
    for i in range(panel.N):
        index_obs = [(panel.bundle(i, t), panel.pbar[t]) for t in range(panel.T)]
        index = check_garp(index_obs)
        if all(v == 1 for v in lam[i]):
            out.append(InvarianceResult(i, index, index, True))
            continue
        scaled_obs = []
        for t in range(panel.T):
            p = tuple(lam[i][k] * panel.pbar[t][k] for k in range(panel.K))
            scaled_obs.append((implied_bundle(panel.e[i][t], p), p))
        scaled = check_garp(scaled_obs)
        res = InvarianceResult(i, scaled, index, scaled.graph.same_edges(index.graph))
        if not (res.edges_identical and res.verdicts_match):
            raise ConstructionFailed(f"stable scaling changed consumer {i + 1}'s revealed preferences")
        out.append(res)
    return out


def _index_garp(panel: PanelDataset) -> None:
    for i in range(panel.N):
        v = check_garp([(panel.bundle(i, t), panel.pbar[t]) for t in range(panel.T)])
        if not v.satisfied:
            raise PreconditionError(f"consumer {i + 1} violates GARP at the index prices", consumer=i,
                                    witness=v.witness)


def cross_edges(weak: np.ndarray, N: int, T: int, upward: bool = True) -> int:
    """Count weak edges between consumers' blocks in the pooled ``(i, t)`` order.

    ``upward`` counts edges from a lower-indexed consumer to a higher one,
    otherwise from higher to lower.
    """
    count = 0
    for a in range(N * T):
        for b in range(N * T):
            ca, cb = a // T, b // T
            if weak[a, b] and ((ca < cb) if upward else (ca > cb)):
                count += 1
    return count


def prop4_stable_prices(panel: PanelDataset, R: Sequence[int], W: AggregatorSpec
                        ) -> tuple[StableScale, HeterogeneousPrices, ConstructionParams]:
    """Stable multipliers on the goods in ``R`` that aggregate to one and rationalize the pooled data.

    ``lam[i] = beta * eps**(i+1)`` with ``beta = 1 / W(eps, eps**2, ...)``.
    Consumer j then finds every bundle of a later consumer i at least
    ``eps**(j-i)`` times dearer on R, which breaks all cross-consumer cycles.
    """
    if not W.homogeneous_degree_one:
        raise AggregatorError("stable scaling needs a degree-one homogeneous aggregator")
    R = tuple(sorted(set(int(k) for k in R)))
    N, T, K = panel.N, panel.T, panel.K
    if not R or min(R) < 0 or max(R) >= K:
        raise DomainError(f"scale set must be a nonempty subset of goods 1..{K}")
    eR = [[sum(panel.e[i][t][k] for k in R) for t in range(T)] for i in range(N)]
    for i in range(N):
        for t in range(T):
            if eR[i][t] <= 0:
                raise PreconditionError(f"no expenditure on the scaled goods at consumer {i + 1}, "
                                        f"observation {t + 1}", consumer=i)
    _index_garp(panel)

    ratios = [
        sum(panel.pbar[s][k] * panel.e[i][t][k] / panel.pbar[t][k] for k in R) / panel.m(j, s)
        for i in range(N) for j in range(i) for s in range(T) for t in range(T)
    ]
    label = "eps < min over i>j of sum_R pbar[s,k] e[i,t,k] / pbar[t,k] / m[j,s]"
    eps = _pow2_below(min(ratios + [Fraction(1)]))
    for retry in range(MAX_EPS_RETRIES + 1):
        powers = [eps ** (i + 1) for i in range(N)]
        beta = 1 / W(powers)
        scale = StableScale(lam=[beta * v for v in powers], R=R)
        prices = scale.prices(panel)
        verdict = pooled_garp(panel, prices)
        if verdict.satisfied and cross_edges(verdict.graph.weak, N, T, upward=True) == 0:
            log = [BoundEntry("eps < 1", eps, Fraction(1))]
            if ratios:
                log.append(BoundEntry(label, eps, min(ratios)))
            return scale, prices, ConstructionParams(epsilon=eps, bound_log=tuple(log), retries=retry)
        eps /= 2
    raise ConstructionFailed(f"pooled GARP still fails after {MAX_EPS_RETRIES} epsilon halvings")


def _budget_vertices(pbar: tuple, m: Fraction) -> list[tuple]:
    K = len(pbar)
    return [tuple(Fraction(0) for _ in range(K))] + [
        tuple(m / pbar[k] if j == k else Fraction(0) for j in range(K)) for k in range(K)
    ]


def _sample_weights(n_vertices: int, rng: random.Random, n_random: int) -> np.ndarray:
    """Integer convex weights over the budget vertices, one row per sample point.

    Rows cover the vertices, all pairwise midpoints and ``n_random`` random
    interior points; a row ``w`` stands for ``sum_v w_v v / sum(w)``.
    """
    rows = [[int(a == v) for v in range(n_vertices)] for a in range(n_vertices)]
    for a in range(n_vertices):
        for b in range(a + 1, n_vertices):
            rows.append([int(v in (a, b)) for v in range(n_vertices)])
    for _ in range(n_random):
        w = [rng.randint(0, 64) for _ in range(n_vertices)]
        rows.append(w if any(w) else [1] + [0] * (n_vertices - 1))
    return np.array(rows, dtype=object)


def scale_transform_verify(panel: PanelDataset, scales: StableScale, base: AfriatSolution,
                           seed: int = 0, n_random: int = 100) -> bool:
    """Check that the R-scale transforms of ``base`` rationalize each consumer at the index prices.

    For consumer i with ``beta = 1 / lam[i]``, the utility
    ``x -> base(beta x_R, x_-R)`` must rank the observed index-price bundle
    above every sampled point of its index budget set.  Samples are convex
    combinations of the budget vertices and each utility piece is affine, so
    piece values are tabulated at the vertices once and every sample is
    checked with exact integer arithmetic.
    """
    prices = scales.prices(panel)
    pieces = afriat_pieces(base, prices.pooled_observations(panel))
    beta = scales.beta
    R = set(scales.R)
    rng = random.Random(seed)

    def transform(i, x):
        return tuple(beta[i] * v if k in R else v for k, v in enumerate(x))

    for i in range(panel.N):
        for t in range(panel.T):
            chosen = evaluate_pieces(pieces, transform(i, panel.bundle(i, t)))
            vertices = [transform(i, v) for v in _budget_vertices(panel.pbar[t], panel.m(i, t))]
            # table[v][l] = piece l at vertex v, minus the chosen level
            table = [[c + dot(g, v) - chosen for c, g in pieces] for v in vertices]
            den = math.lcm(*(q.denominator for row in table for q in row))
            A = np.array([[int(q * den) for q in row] for row in table], dtype=object)
            W = _sample_weights(len(vertices), rng, n_random)
            # a sample beats the chosen bundle iff every piece is positive there
            if ((W @ A) > 0).all(axis=1).any():
                return False
    return True


# --- augmented utility ------------------------------------------------------------------


def _index_gapp(panel: PanelDataset) -> None:
    for i in range(panel.N):
        pts = [(panel.bundle(i, t), PriceSystem.linear(panel.pbar[t])) for t in range(panel.T)]
        v = check_gapp(pts)
        if not v.satisfied:
            raise PreconditionError(f"consumer {i + 1} violates GAPP at the index prices", consumer=i,
                                    witness=v.witness)


def _grid(lo: Fraction, hi: Fraction, n: int) -> list[Fraction]:
    if lo == hi:
        return [lo]
    return [lo + (hi - lo) * Fraction(k, n - 1) for k in range(n)]


def _threshold(phi: BehavioralExpenditure, pairs, values) -> Fraction:
    """Threshold beyond which ``phi(a, x)`` beats ``phi(b, y)`` for every ``a`` in
    ``values`` and every pair ``(b, y)``.

    Case 1 returns ``M`` with the property for all sampled ``x > M``; case 2
    returns ``m`` for sampled ``x < m``.  Each candidate is probed at several
    points past it; failing within 2**10-fold expansion raises RegularityError.
    """
    target = max(eval_phi(phi, b, y) for b, y in pairs)
    lo, hi = min(min(values), min(y for _, y in pairs)), max(max(values), max(y for _, y in pairs))
    for k in range(MAX_EXPANSION + 1):
        if phi.regularity_case == 1:
            cand = hi * 2**k
            probes = [cand * 2**r for r in range(4)] + [cand * (1 + Fraction(1, 2**20))]
        else:
            cand = lo / 2**k
            probes = [cand / 2**r for r in range(4)] + [cand * (1 - Fraction(1, 2**20))]
        if all(eval_phi(phi, a, x) > target for a in values for x in probes):
            return cand
    raise RegularityError(f"no threshold found within 2**{MAX_EXPANSION}-fold expansion; "
                          f"declared case {phi.regularity_case} does not fit phi")


def prop6_au_lambdas(panel: PanelDataset, phi: BehavioralExpenditure, W: AggregatorSpec
                     ) -> tuple[StableScale, list[list[PriceSystem]], ConstructionParams]:
    """Perceived-price multipliers making the pooled behavioral systems satisfy GAPP.

    ``lam[i] = alpha_1 * ... * alpha_i``.  Each ``alpha_j`` (j >= 2) is chosen
    so that consumer j's systems price every earlier consumer's bundle above
    that consumer's own expenditure, using a threshold of phi found on a
    finite grid.  ``alpha_1`` normalizes ``W(lam) = 1``; since it feeds back
    into the thresholds it is found by fixed-point iteration, and the result
    is audited exactly.
    """
    if not W.homogeneous_degree_one:
        raise AggregatorError("perceived-price scaling needs a degree-one homogeneous aggregator")
    _index_gapp(panel)
    N, T = panel.N, panel.T
    X = [[panel.bundle(i, t) for t in range(T)] for i in range(N)]
    C = [[[dot(panel.pbar[s], X[i][t]) for t in range(T)] for i in range(N)] for s in range(T)]
    base_values = sorted({C[s][i][t] for s in range(T) for i in range(N) for t in range(T)})
    grow = phi.regularity_case == 1

    def own(lam, i, t):
        return eval_phi(phi, C[t][i][t], lam[i] * C[t][i][t])

    def margin(lam, j):
        """``min f^{j,s}(x^{i,t}) - f^{i,t}(x^{i,t})`` over earlier consumers i."""
        return min(eval_phi(phi, C[s][i][t], lam[j] * C[s][i][t]) - own(lam, i, t)
                   for i in range(j) for s in range(T) for t in range(T))

    c = Fraction(1)
    boost = Fraction(1)
    for _round in range(MAX_BOOSTS + 1):
        for _fixed_point in range(8):
            rel = [Fraction(1)]
            alphas = [Fraction(1)]
            for j in range(1, N):
                lam_prev = [c * r for r in rel]
                grid = sorted(set(base_values) | set(_grid(base_values[0], base_values[-1], GRID_POINTS)))
                pairs = {(C[t][i][t], lam_prev[i] * C[t][i][t]) for i in range(j) for t in range(T)}
                thr = _threshold(phi, pairs, grid)
                reach = [C[s][i][t] for i in range(j) for s in range(T) for t in range(T)]
                alpha = Fraction(2) if grow else Fraction(1, 2)
                if grow:
                    while c * rel[-1] * alpha * min(reach) <= thr:
                        alpha *= 2
                else:
                    while c * rel[-1] * alpha * max(reach) >= thr:
                        alpha /= 2
                alpha = alpha * boost if grow else alpha / boost
                trial = lam_prev + [c * rel[-1] * alpha]
                for _ in range(MAX_BOOSTS):
                    if margin(trial, j) > 0:
                        break
                    alpha = alpha * 2 if grow else alpha / 2
                    trial[-1] = c * rel[-1] * alpha
                alphas.append(alpha)
                rel.append(rel[-1] * alpha)
            c_new = 1 / W(rel)
            lam = [c_new * r for r in rel]
            if c_new == c or all(margin(lam, j) > 0 for j in range(1, N)):
                break
            c = c_new
        alphas[0] = c_new
        systems = make_price_systems(panel, lam, phi)
        pts = [(X[i][t], systems[i][t]) for i in range(N) for t in range(T)]
        rel_graph = price_preference_relations(pts)
        margins = {j: margin(lam, j) for j in range(1, N)}
        if all(v > 0 for v in margins.values()) and cross_edges(rel_graph.weak, N, T, upward=False) == 0:
            verdict = check_gapp(pts)
            if verdict.satisfied:
                log = [BoundEntry(f"consumer {j + 1}: f^(j,s)(x^(i,t)) - f^(i,t)(x^(i,t)) > 0 for i < j",
                                  Fraction(0), margins[j]) for j in range(1, N)]
                scale = StableScale(lam=lam, R=range(panel.K))
                params = ConstructionParams(alpha=tuple(alphas), regularity=phi.regularity_case,
                                            bound_log=tuple(log), retries=_round)
                return scale, systems, params
        boost *= 2
    raise ConstructionFailed("pooled GAPP audit failed after every boost; normalization may be infeasible "
                             "for this phi and aggregator")
