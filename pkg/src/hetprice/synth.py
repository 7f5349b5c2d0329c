"""Seeded generators for panels with known revealed-preference properties.

All sampled numbers are dyadic rationals, so downstream comparisons stay exact.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .dataset import CrossSection, PanelDataset
from .errors import DomainError, SchemaError

COBB_DOUGLAS = "cobb_douglas"
LEONTIEF = "leontief"
VIOLATION = "violation"
ADVERSARIAL = "adversarial"
FAMILIES = (COBB_DOUGLAS, LEONTIEF, VIOLATION, ADVERSARIAL)
TEMPLATES = ("warp-2cycle",)


@dataclass(frozen=True)
class GeneratorSpec:
    """What to generate.

    ``exponents`` (Cobb-Douglas) or ``weights`` (Leontief) fix the consumers'
    parameters; when absent they are drawn from the seed.  ``violator`` is
    the consumer (0-based) receiving the violation template.  With
    ``common_income`` every consumer has the same total at each observation,
    which lets the panel be read as a cross section.
    """

    family: str
    seed: int = 0
    N: int = 2
    T: int = 3
    K: int = 2
    exponents: tuple | None = None
    weights: tuple | None = None
    template: str = "warp-2cycle"
    violator: int | None = None
    common_income: bool = False

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if min(self.N, self.T, self.K) < 1:
            raise DomainError("N, T and K must be positive")
        if self.family == VIOLATION:
            if self.template not in TEMPLATES:
                raise DomainError(f"unknown violation template {self.template!r}")
            if self.T < 2 or self.K < 2:
                raise DomainError("violation templates need T >= 2 and K >= 2")
        if self.exponents is not None:
            for row in self.exponents:
                if any(Fraction(a) <= 0 for a in row) or sum(Fraction(a) for a in row) != 1:
                    raise DomainError("Cobb-Douglas exponents must be positive and sum to 1")


def spec_from_json(source: str | Mapping) -> GeneratorSpec:
    doc = json.loads(source) if isinstance(source, str) else source
    try:
        return GeneratorSpec(**doc)
    except TypeError as exc:
        raise SchemaError(f"bad generator spec: {exc}") from exc


def _dyadic_price(rng: random.Random) -> Fraction:
    # mantissa in [1, 2) times 2**e for e in -2..1: roughly log-uniform on [1/4, 4)
    return Fraction(rng.randint(16, 31), 16) * Fraction(2) ** rng.randint(-2, 1)


def _income(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(8, 64), 8)


def _shares(rng: random.Random, K: int) -> tuple:
    # K positive parts of 2**n, so every share is dyadic
    whole = 32 if K <= 32 else 1 << (K - 1).bit_length()
    cuts = sorted(rng.sample(range(1, whole), K - 1))
    bounds = [0] + cuts + [whole]
    return tuple(Fraction(b - a, whole) for a, b in zip(bounds, bounds[1:]))


def _incomes(spec: GeneratorSpec, rng: random.Random) -> list[list[Fraction]]:
    if spec.common_income:
        row = [_income(rng) for _ in range(spec.T)]
        return [list(row) for _ in range(spec.N)]
    return [[_income(rng) for _ in range(spec.T)] for _ in range(spec.N)]


def _dyadic_between(lo: Fraction, hi: Fraction) -> Fraction:
    """A dyadic rational strictly inside ``(lo, hi)``."""
    k = 0
    while Fraction(1, 2**k) >= hi - lo:
        k += 1
    return Fraction(math.floor(lo * 2**k) + 1, 2**k)


def _warp_pair(p1: tuple, p2: tuple) -> tuple[tuple, tuple, tuple]:
    """Expenditures at p1 and p2 forming a strict two-cycle, plus possibly adjusted p2.

    Totals are whatever the template bundles cost, so everything stays dyadic.
    """
    K = len(p1)
    p2 = list(p2)
    pair = None
    for a in range(K):
        for b in range(K):
            if a != b and p1[a] / p1[b] < p2[a] / p2[b]:
                pair = (a, b)
                break
        if pair:
            break
    if pair is None:
        p2[0] *= 2
        pair = (0, 1)
    a, b = pair
    # x1 = c u_b + 1, x2 = u_a + 1 with p1_a/p1_b < c < p2_a/p2_b
    c = _dyadic_between(p1[a] / p1[b], p2[a] / p2[b])
    x1 = [Fraction(1)] * K
    x1[b] += c
    x2 = [Fraction(1)] * K
    x2[a] += 1
    e1 = tuple(p * x for p, x in zip(p1, x1))
    e2 = tuple(p * x for p, x in zip(p2, x2))
    return e1, e2, tuple(p2)


def generate_panel(spec: GeneratorSpec) -> PanelDataset:
    """Deterministic panel for ``spec``.

    Cobb-Douglas consumers spend fixed shares of income; Leontief consumers
    buy in fixed proportions.  Both are utility maximizers, so every
    consumer stream satisfies GARP.  The violation family starts from a
    Cobb-Douglas panel and overwrites the first two observations of one
    consumer with a strict two-cycle.  The adversarial family draws
    arbitrary expenditures, positive on goods 1 and 2.
    """
    rng = random.Random(spec.seed)
    N, T, K = spec.N, spec.T, spec.K
    pbar = [tuple(_dyadic_price(rng) for _ in range(K)) for _ in range(T)]
    m = _incomes(spec, rng)
    e = [[None] * T for _ in range(N)]
    if spec.family == VIOLATION:
        v = N - 1 if spec.violator is None else spec.violator
        if not 0 <= v < N:
            raise DomainError(f"violator {v} out of range")
        e1, e2, pbar[1] = _warp_pair(pbar[0], pbar[1])
        for i in range(N) if spec.common_income else (v,):
            m[i][0], m[i][1] = sum(e1), sum(e2)
    if spec.family in (COBB_DOUGLAS, VIOLATION):
        alphas = [tuple(Fraction(a) for a in r) for r in spec.exponents] if spec.exponents else \
            [_shares(rng, K) for _ in range(N)]
        for i in range(N):
            for t in range(T):
                e[i][t] = tuple(a * m[i][t] for a in alphas[i])
    elif spec.family == LEONTIEF:
        ws = [tuple(Fraction(v) for v in r) for r in spec.weights] if spec.weights else \
            [tuple(Fraction(rng.randint(1, 8)) for _ in range(K)) for _ in range(N)]
        for i in range(N):
            for t in range(T):
                cost = sum(p * w for p, w in zip(pbar[t], ws[i]))
                e[i][t] = tuple(p * w * m[i][t] / cost for p, w in zip(pbar[t], ws[i]))
    else:
        for i in range(N):
            for t in range(T):
                row = [Fraction(rng.randint(1, 32), 8) for _ in range(K)]
                for k in range(2, K):
                    if rng.random() < 0.25:
                        row[k] = Fraction(0)
                e[i][t] = tuple(row)
    if spec.family == VIOLATION:
        e[v][0], e[v][1] = e1, e2
    return PanelDataset(e=e, pbar=pbar)


def to_cross_section(panel: PanelDataset, seed: int = 0) -> CrossSection:
    """Forget consumer identities: shuffle each observation's points.

    Requires equal totals across consumers at each observation.
    """
    rng = random.Random(seed)
    points, m = [], []
    for t in range(panel.T):
        totals = {panel.m(i, t) for i in range(panel.N)}
        if len(totals) != 1:
            raise DomainError("consumers' totals differ; not a cross section", (t,))
        row = [panel.e[i][t] for i in range(panel.N)]
        rng.shuffle(row)
        points.append(row)
        m.append(totals.pop())
    return CrossSection(pbar=panel.pbar, m=m, points=points)
