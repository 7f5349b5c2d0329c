"""Cross-sectional rationalizability: sorting searches, random-price certificates, budget patches.

A cross section lists, for each observation, the multiset of expenditure
points chosen by N anonymous consumers.  Random-utility rationalizability asks
for a sorting of points into consumer streams such that every stream obeys
GARP at the index prices.  By the stable-scaling results, such a sorting
exists iff a single utility with consumer-specific stable price multipliers
explains the data, and :func:`rpm_check` builds that certificate.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from . import aggregators as agg
from .aggregators import AggregatorSpec
from .behavioral import BehavioralExpenditure
from .constructions import ConstructionParams, StableScale, prop4_stable_prices, prop6_au_lambdas
from .dataset import CrossSection, HeterogeneousPrices, PanelDataset, SortingFunction, dot, fmt, to_vector
from .errors import (
    ConstructionFailed,
    DomainError,
    NotRumRationalizable,
    SearchBudgetExceeded,
    UnsupportedDimension,
    UnsupportedShape,
)
from .revpref import (
    AfriatSolution,
    PriceSystem,
    RevealedPreferenceGraph,
    _verdict,
    afriat_construct,
    check_garp,
    direct_relations,
    price_preference_relations,
)

DEFAULT_BUDGET = 10**8
CERTIFICATE_MAX_N = 4
CERTIFICATE_MAX_SORTINGS = 10**4

Relation = Callable[[list], RevealedPreferenceGraph]


def _gapp_linear(obs) -> RevealedPreferenceGraph:
    return price_preference_relations([(x, PriceSystem.linear(p)) for x, p in obs])


@dataclass(frozen=True)
class RumVerdict:
    """``rationalizable`` with the lexicographically smallest sorting, or a refutation.

    ``refutation`` lists every sorting (first observation fixed to the
    identity) with a failing consumer stream and its witness cycle, when the
    instance is small enough to enumerate; otherwise it is None and
    ``nodes`` records the exhausted search.
    """

    rationalizable: bool
    sorting: SortingFunction | None
    refutation: tuple | None
    nodes: int

    def to_json(self) -> dict:
        return {
            "rationalizable": self.rationalizable,
            "sorting": None if self.sorting is None else [list(r) for r in self.sorting.sigma],
            "refutation": None if self.refutation is None else [dict(r) for r in self.refutation],
            "nodes": self.nodes,
        }


@dataclass(frozen=True, eq=False)
class RpmCertificate:
    """Common utility plus stable multipliers with probability weights."""

    scales: StableScale
    weights: tuple
    utility: AfriatSolution | None
    prices: HeterogeneousPrices | None
    params: ConstructionParams

    @property
    def mean_scale(self) -> Fraction:
        return sum(w * l for w, l in zip(self.weights, self.scales.lam))

    def to_json(self) -> dict:
        return {
            "scales": self.scales.to_json(),
            "weights": [fmt(w) for w in self.weights],
            "mean_scale": fmt(self.mean_scale),
            "utility": None if self.utility is None else self.utility.to_json(),
            "params": self.params.to_json(),
        }


def _stream(cs: CrossSection, bundles, sigma, i: int, upto: int) -> list:
    return [(bundles[s][sigma[s][i]], cs.pbar[s]) for s in range(upto)]


def _two_cycle(relation: Relation, a, b) -> bool:
    g = relation([a, b])
    return bool((g.weak[0, 1] and g.strict[1, 0]) or (g.weak[1, 0] and g.strict[0, 1]))


def _search(cs: CrossSection, relation: Relation, budget: int) -> tuple[SortingFunction | None, int]:
    """Backtracking over per-observation assignments; first observation is the identity."""
    N, T = cs.N, cs.T
    bundles = [[cs.bundle(t, n) for n in range(N)] for t in range(T)]
    obs = [[(bundles[t][n], cs.pbar[t]) for n in range(N)] for t in range(T)]
    conflict = {}
    for s in range(T):
        for t in range(s + 1, T):
            for a in range(N):
                for b in range(N):
                    conflict[(s, a, t, b)] = _two_cycle(relation, obs[s][a], obs[t][b])
    consumer_weight = [cs.weight(0, i) for i in range(N)]
    sigma = [list(range(N))] + [[-1] * N for _ in range(T - 1)]
    used = [[False] * N for _ in range(T)]
    nodes = 0

    def dfs(t: int, i: int) -> bool:
        nonlocal nodes
        if t == T:
            return True
        if i == N:
            return dfs(t + 1, 0)
        tried = set()
        for b in range(N):
            if used[t][b] or cs.weight(t, b) != consumer_weight[i]:
                continue
            key = cs.points[t][b]
            if key in tried:
                # an identical unused point was already explored from this node
                continue
            tried.add(key)
            nodes += 1
            if nodes > budget:
                raise SearchBudgetExceeded(nodes)
            if any(conflict[(s, sigma[s][i], t, b)] for s in range(t)):
                continue
            if t >= 2:
                stream = [obs[s][sigma[s][i]] for s in range(t)] + [obs[t][b]]
                g = relation(stream)
                if not _verdict(g.weak, g.strict, g.cost).satisfied:
                    continue
            sigma[t][i] = b
            used[t][b] = True
            if dfs(t, i + 1):
                return True
            used[t][b] = False
            sigma[t][i] = -1
        return False

    found = dfs(1, 0) if T > 1 else True
    return (SortingFunction(sigma) if found else None), nodes


def _refutation(cs: CrossSection, relation: Relation) -> tuple | None:
    N, T = cs.N, cs.T
    if N > CERTIFICATE_MAX_N or math.factorial(N) ** (T - 1) > CERTIFICATE_MAX_SORTINGS:
        return None
    bundles = [[cs.bundle(t, n) for n in range(N)] for t in range(T)]
    consumer_weight = [cs.weight(0, i) for i in range(N)]
    out = []
    for tail in itertools.product(itertools.permutations(range(N)), repeat=T - 1):
        sigma = (tuple(range(N)),) + tail
        if any(cs.weight(t, sigma[t][i]) != consumer_weight[i] for t in range(T) for i in range(N)):
            continue
        for i in range(N):
            g = relation(_stream(cs, bundles, sigma, i, T))
            v = _verdict(g.weak, g.strict, g.cost)
            if not v.satisfied:
                out.append({"sorting": [list(r) for r in sigma], "consumer": i, "witness": v.witness})
                break
        else:
            raise ConstructionFailed("exhaustive search missed a rationalizing sorting")
    return tuple(out)


def _check(cs: CrossSection, relation: Relation, budget: int) -> RumVerdict:
    sorting, nodes = _search(cs, relation, budget)
    if sorting is not None:
        return RumVerdict(True, sorting, None, nodes)
    return RumVerdict(False, None, _refutation(cs, relation), nodes)


def rum_check(cs: CrossSection, budget: int = DEFAULT_BUDGET) -> RumVerdict:
    """Search for a sorting whose consumer streams all satisfy GARP at the index prices.

    The search is exhaustive, so a negative verdict is a proof.  Points with
    identical vectors are interchangeable and explored once per node.  When
    the cross section carries weights, a sorting must keep each consumer's
    weight constant across observations.

    Raises:
        SearchBudgetExceeded: more than ``budget`` nodes were expanded.
    """
    return _check(cs, direct_relations, budget)


def _consumer_weights(cs: CrossSection) -> tuple:
    return tuple(cs.weight(0, i) for i in range(cs.N))


def _weighted(W: AggregatorSpec, weights: tuple) -> AggregatorSpec:
    if W.kind == agg.ARITHMETIC and len(set(weights)) > 1:
        return agg.arithmetic(weights)
    return W


def rpm_check(cs: CrossSection, R: Sequence[int], W: AggregatorSpec,
              budget: int = DEFAULT_BUDGET) -> tuple[RumVerdict, RpmCertificate | None]:
    """Random-utility search followed by the stable-price construction on the sorted panel.

    Arithmetic aggregation becomes the weighted mean under the consumers'
    weights, so the certificate's multipliers average to one.
    """
    verdict = rum_check(cs, budget)
    if not verdict.rationalizable:
        return verdict, None
    panel = verdict.sorting.apply(cs)
    weights = _consumer_weights(cs)
    scale, prices, params = prop4_stable_prices(panel, R, _weighted(W, weights))
    utility = afriat_construct(prices.pooled_observations(panel))
    return verdict, RpmCertificate(scale, weights, utility, prices, params)


def rpm_from_rum_discrete(cs: CrossSection, R: Sequence[int], W: AggregatorSpec | None = None,
                          budget: int = DEFAULT_BUDGET) -> RpmCertificate:
    """Random-price certificate with ``sum_i w_i lam_i = 1`` for a rationalizable discrete cross section."""
    W = W or agg.arithmetic()
    if W.kind != agg.ARITHMETIC:
        raise agg.AggregatorError("consistency in expectation needs arithmetic aggregation of the multipliers")
    verdict, cert = rpm_check(cs, R, W, budget)
    if cert is None:
        raise NotRumRationalizable("no sorting makes every consumer stream satisfy GARP")
    return cert


def au_rum_check(cs: CrossSection, phi: BehavioralExpenditure, W: AggregatorSpec,
                 budget: int = DEFAULT_BUDGET) -> tuple[RumVerdict, RpmCertificate | None]:
    """Sorting search with per-stream GAPP, then perceived-price multipliers for the sorted panel."""
    verdict = _check(cs, _gapp_linear, budget)
    if not verdict.rationalizable:
        return verdict, None
    panel = verdict.sorting.apply(cs)
    weights = _consumer_weights(cs)
    scale, _systems, params = prop6_au_lambdas(panel, phi, _weighted(W, weights))
    return verdict, RpmCertificate(scale, weights, None, None, params)


# --- patches ------------------------------------------------------------------------


@dataclass(frozen=True)
class Patch:
    """Cell of the budget union with a fixed sign against every budget plane.

    ``on`` lists the budgets (0-based) the patch lies on.
    """

    signs: tuple
    representative: tuple
    on: tuple


@dataclass(frozen=True)
class PatchDecomposition:
    patches: tuple
    pi: tuple | None  # pi[l][t]

    def to_json(self) -> dict:
        sym = {-1: "-", 0: "0", 1: "+"}
        return {
            "patches": [{"signs": "".join(sym[s] for s in p.signs),
                         "representative": [fmt(v) for v in p.representative],
                         "on": list(p.on)} for p in self.patches],
            "pi": None if self.pi is None else [[fmt(v) for v in row] for row in self.pi],
        }


def _sign(v: Fraction) -> int:
    return (v > 0) - (v < 0)


def _signs(budgets, x) -> tuple:
    return tuple(_sign(dot(p, x) - m) for p, m in budgets)


def _check_distinct(budgets) -> None:
    for a in range(len(budgets)):
        for b in range(a + 1, len(budgets)):
            (p, m), (q, n) = budgets[a], budgets[b]
            r = n / m
            if all(qk == r * pk for pk, qk in zip(p, q)):
                raise DomainError("budgets coincide as hyperplanes", (a, b))


def _solve(A: list[list[Fraction]], rhs: list[Fraction]) -> tuple | None:
    """Exact Gaussian elimination; None when singular."""
    n = len(A)
    M = [list(row) + [r] for row, r in zip(A, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            return None
        M[col], M[piv] = M[piv], M[col]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col] / M[col][col]
                M[r] = [a - f * b for a, b in zip(M[r], M[col])]
    return tuple(M[i][n] / M[i][i] for i in range(n))


def _vertices(budgets, t: int, K: int) -> list[tuple]:
    p, m = budgets[t]
    planes = [(list(q), n) for s, (q, n) in enumerate(budgets) if s != t]
    planes += [([Fraction(int(j == k)) for j in range(K)], Fraction(0)) for k in range(K)]
    found = []
    for combo in itertools.combinations(planes, K - 1):
        x = _solve([list(p)] + [c[0] for c in combo], [m] + [c[1] for c in combo])
        if x is not None and all(v >= 0 for v in x) and x not in found:
            found.append(x)
    return found


def compute_patches(budgets: Sequence[tuple], points: CrossSection | None = None) -> PatchDecomposition:
    """Sign-vector cells of the union of budget planes.

    With ``points`` each data point is classified by its signs against every
    budget and ``pi[l][t]`` sums the weights of budget t's points in patch l.
    Without points the cells are enumerated geometrically for up to four
    goods: arrangement vertices on each budget face, then centroids of every
    vertex subset of size at most K, which hit the relative interior of every
    cell.
    """
    budgets = [(to_vector(p), Fraction(m)) for p, m in budgets]
    if not budgets:
        raise DomainError("need at least one budget")
    K = len(budgets[0][0])
    _check_distinct(budgets)
    T = len(budgets)
    if points is not None:
        if points.T != T:
            raise DomainError("points must have one observation per budget")
        order: dict[tuple, int] = {}
        reps, mass = [], []
        for t in range(T):
            for n in range(points.N):
                x = points.bundle(t, n)
                sv = _signs(budgets, x)
                if sv not in order:
                    order[sv] = len(order)
                    reps.append(x)
                    mass.append([Fraction(0)] * T)
                mass[order[sv]][t] += points.weight(t, n)
        patches = tuple(Patch(sv, reps[l], tuple(s for s in range(T) if sv[s] == 0)) for sv, l in order.items())
        return PatchDecomposition(patches, tuple(tuple(r) for r in mass))
    if K > 4:
        raise UnsupportedDimension(f"geometric patch enumeration supports K <= 4, got {K}")
    found: dict[tuple, tuple] = {}
    for t in range(T):
        verts = _vertices(budgets, t, K)
        for size in range(1, K + 1):
            for subset in itertools.combinations(verts, size):
                c = tuple(sum(v[k] for v in subset) / size for k in range(K))
                sv = _signs(budgets, c)
                found.setdefault(sv, c)
    patches = tuple(Patch(sv, rep, tuple(s for s in range(T) if sv[s] == 0)) for sv, rep in sorted(found.items()))
    return PatchDecomposition(patches, None)


# --- single-good heterogeneity ------------------------------------------------------------


@dataclass(frozen=True)
class OneGoodRefutation:
    """``refuted`` is True (proved), False (prices found) or None (unknown)."""

    refuted: bool | None
    method: str
    trace: dict

    def to_json(self) -> dict:
        return {"refuted": self.refuted, "method": self.method, "trace": self.trace}


def _band(panel: PanelDataset, i: int, t: int, u: int, g: int) -> tuple[Fraction, Fraction] | None:
    """Ratios ``rho = p[t]_g / p[u]_g`` at which observations t and u are mutually strictly preferred."""
    e, pbar = panel.e[i], panel.pbar

    def upper(a, b):
        rest = sum(pbar[a][k] * e[b][k] / pbar[b][k] for k in range(panel.K) if k != g)
        slack = panel.m(i, a) - rest
        if e[b][g] == 0:
            return math.inf if slack > 0 else None
        return slack / e[b][g] if slack > 0 else None

    hi, back = upper(t, u), upper(u, t)
    if hi is None or back is None:
        return None
    lo = Fraction(0) if back == math.inf else 1 / back
    return (lo, hi) if lo < hi else None


def _high_ratio(pbar, t: int, u: int, g: int, w: Fraction) -> tuple[Fraction, Fraction]:
    """Ratio range when one agent pays at least the index at both observations.

    With weighted mean ``w p_i + (1 - w) p_j = pbar`` and ``p_j > 0``, a
    high price lies in ``[pbar, pbar / w)``.
    """
    return pbar[t][g] * w / pbar[u][g], pbar[t][g] / (w * pbar[u][g])


def _interval_argument(panel: PanelDataset, g: int, weights: tuple) -> dict | None:
    T = panel.T
    for triple in itertools.combinations(range(T), 3):
        cases = []
        for high in itertools.product(range(2), repeat=3):
            hit = None
            for (a, ta), (b, tb) in itertools.combinations(enumerate(triple), 2):
                if high[a] != high[b]:
                    continue
                i = high[a]
                band = _band(panel, i, ta, tb, g)
                if band is None:
                    continue
                lo, hi = _high_ratio(panel.pbar, ta, tb, g, weights[i])
                if band[0] <= lo and hi <= band[1]:
                    hit = {"agent": i, "pair": [ta, tb], "ratio_interval": [fmt(lo), fmt(hi)],
                           "violation_band": [fmt(band[0]), fmt(band[1])]}
                    break
            if hit is None:
                break
            cases.append({"high_agent": {str(t): h for t, h in zip(triple, high)}, **hit})
        else:
            return {"observations": list(triple), "cases": cases}
    return None


def _grid_search(panel: PanelDataset, g: int, W: AggregatorSpec, resolution: Fraction,
                 cap: int) -> tuple[bool | None, dict]:
    T = panel.T
    steps = int(2 / resolution) - 1
    per_obs = max(2, min(steps, int(cap ** (1 / T))))
    options = []
    for t in range(T):
        opts = []
        for j in range(1, per_obs + 1):
            r1 = panel.pbar[t][g] * Fraction(2 * j, per_obs + 1)
            try:
                r2 = agg.solve_residual(W, panel.pbar[t][g], [r1], 1)
            except agg.NoBracket:
                continue
            opts.append((r1, r2))
        options.append(opts)
    trace = {"points_per_observation": per_obs, "resolution": fmt(Fraction(2, per_obs + 1))}
    for combo in itertools.product(*options):
        ok = True
        for i in range(2):
            obs = []
            for t in range(T):
                p = list(panel.pbar[t])
                p[g] = combo[t][i]
                obs.append(([ek / pk for ek, pk in zip(panel.e[i][t], p)], p))
            if not check_garp(obs).satisfied:
                ok = False
                break
        if ok:
            trace["prices"] = [[fmt(r) for r in c] for c in combo]
            return False, trace
    return None, trace


def check_one_good_refutation(panel: PanelDataset, good: int = 0, W: AggregatorSpec | None = None,
                              resolution: Fraction = Fraction(1, 2**10), grid_cap: int = 10**5
                              ) -> OneGoodRefutation:
    """Can two consumers be rationalized when prices differ across them only in ``good`` (0-based)?

    Interval argument (arithmetic aggregation): for each pair of observations
    and agent, the cost comparisons give an open band of price ratios in
    which the two observations are strictly preferred to each other.  At
    every observation some agent pays at least the index price; among any
    three observations one agent is high at two of them, which confines
    that agent's ratio to a known interval.  If, for some triple and every
    assignment of high agents, that interval sits inside the band, GARP must
    fail.  Otherwise a grid over price splits either finds rationalizing
    prices or reports unknown.
    """
    W = W or agg.arithmetic()
    if panel.N != 2:
        raise UnsupportedShape(f"one-good refutation handles two consumers, got {panel.N}")
    if not 0 <= good < panel.K:
        raise DomainError(f"good index {good} out of range")
    index_ok = all(
        check_garp([(panel.bundle(i, t), panel.pbar[t]) for t in range(panel.T)]).satisfied for i in range(2)
    )
    if index_ok:
        return OneGoodRefutation(False, "index-prices", {"note": "both agents satisfy GARP at the index prices"})
    if W.kind == agg.ARITHMETIC:
        weights = W.weights or (Fraction(1, 2), Fraction(1, 2))
        trace = _interval_argument(panel, good, weights)
        if trace is not None:
            return OneGoodRefutation(True, "interval", trace)
    refuted, trace = _grid_search(panel, good, W, resolution, grid_cap)
    return OneGoodRefutation(refuted, "grid", trace)
