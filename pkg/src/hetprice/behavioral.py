"""Behavioral expenditure functions and the price systems they induce.

``phi(e, e')`` maps the true cost ``e`` of a bundle and its perceived (or
reference) cost ``e'`` to the expenditure the consumer acts on.
"""

from __future__ import annotations

import importlib
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .dataset import PanelDataset, dot, to_money
from .errors import DomainError, RegularityError
from .revpref import PriceSystem

MISPERCEPTION = "misperception"
REFERENCE = "reference"
CUSTOM = "custom"


def _max1(r: Fraction) -> Fraction:
    return max(r, Fraction(1))


def _identity(r: Fraction) -> Fraction:
    return r


def _inv_max1(r: Fraction) -> Fraction:
    return max(1 / r, Fraction(1))


# name -> (f, regularity case); f(r) -> inf as r -> inf gives case 2, as r -> 0 gives case 1
REFERENCE_FUNCTIONS: dict[str, tuple[Callable, int]] = {
    "max1": (_max1, 2),
    "linear": (_identity, 2),
    "invmax1": (_inv_max1, 1),
}


@dataclass(frozen=True, eq=False)
class BehavioralExpenditure:
    kind: str
    regularity_case: int
    f: Callable | None = None
    func: Callable | None = None
    name: str = ""

    def __post_init__(self):
        if self.regularity_case not in (1, 2):
            raise RegularityError("regularity case must be 1 or 2")
        if self.kind == REFERENCE and self.f(Fraction(1)) != 1:
            raise DomainError("reference function must satisfy f(1) = 1")

    def __call__(self, e, eprime) -> Fraction:
        return eval_phi(self, e, eprime)

    @property
    def key(self) -> str:
        return self.name or self.kind


def misperception() -> BehavioralExpenditure:
    """``phi(e, e') = e'``: the consumer acts on perceived cost only."""
    return BehavioralExpenditure(kind=MISPERCEPTION, regularity_case=1, name=MISPERCEPTION)


def reference(f: Callable | str, regularity_case: int | None = None) -> BehavioralExpenditure:
    """``phi(e, e') = e * f(e / e')`` with ``f(1) = 1``."""
    if isinstance(f, str):
        try:
            fn, case = REFERENCE_FUNCTIONS[f]
        except KeyError:
            raise DomainError(f"unknown reference function {f!r}") from None
        return BehavioralExpenditure(kind=REFERENCE, regularity_case=regularity_case or case, f=fn,
                                     name=f"reference:{f}")
    if regularity_case is None:
        raise RegularityError("custom reference functions must declare their regularity case")
    return BehavioralExpenditure(kind=REFERENCE, regularity_case=regularity_case, f=f, name="reference:custom")


def custom(func: Callable, regularity_case: int, name: str = CUSTOM) -> BehavioralExpenditure:
    """Wrap ``func(e, e')``; property (a) is checked by sampling."""
    phi = BehavioralExpenditure(kind=CUSTOM, regularity_case=regularity_case, func=func, name=name)
    grid = [Fraction(1, 4), Fraction(1, 2), Fraction(1), Fraction(2), Fraction(5)]
    for alpha in grid:
        vals = [eval_phi(phi, e, alpha * e) for e in grid]
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise RegularityError(f"{name}: phi(e, {alpha}e) is not strictly increasing in e")
    return phi


def eval_phi(phi: BehavioralExpenditure, e, eprime) -> Fraction:
    e, eprime = to_money(e), to_money(eprime)
    if e <= 0 or eprime <= 0:
        raise DomainError(f"phi needs positive arguments, got ({e}, {eprime})")
    if phi.kind == MISPERCEPTION:
        return eprime
    if phi.kind == REFERENCE:
        v = e * phi.f(e / eprime)
    else:
        v = phi.func(e, eprime)
    return v if isinstance(v, Fraction) else Fraction(v)


def behavioral_system(phi: BehavioralExpenditure, pbar, lam) -> PriceSystem:
    """``f(x) = phi(pbar.x, lam * pbar.x)``."""
    lam = to_money(lam)
    pbar = tuple(pbar)

    def evaluator(x):
        e = dot(pbar, x)
        return eval_phi(phi, e, lam * e)

    return PriceSystem(evaluator=evaluator, tag="behavioral", params={"phi": phi.key, "pbar": pbar, "lam": lam})


def make_price_systems(panel: PanelDataset, scales, phi: BehavioralExpenditure) -> list[list[PriceSystem]]:
    """Systems ``f^{i,t}`` for every consumer and observation; ``scales`` is a
    StableScale or a plain sequence of per-consumer multipliers."""
    lam = getattr(scales, "lam", scales)
    if len(lam) != panel.N:
        raise DomainError(f"need {panel.N} multipliers, got {len(lam)}")
    if any(to_money(v) <= 0 for v in lam):
        raise DomainError("multipliers must be strictly positive")
    return [[behavioral_system(phi, panel.pbar[t], lam[i]) for t in range(panel.T)] for i in range(panel.N)]


def resolve(key: str) -> BehavioralExpenditure:
    """``"misperception"``, ``"reference:<name>"`` or plugin ``"module:attr"``."""
    if key == MISPERCEPTION:
        return misperception()
    if key.startswith("reference:"):
        return reference(key.split(":", 1)[1])
    if ":" in key:
        mod, _, attr = key.partition(":")
        try:
            obj = getattr(importlib.import_module(mod), attr)
        except (ImportError, AttributeError) as exc:
            raise DomainError(f"cannot load phi plugin {key!r}: {exc}") from exc
        return obj if isinstance(obj, BehavioralExpenditure) else obj()
    raise DomainError(f"unknown phi key {key!r}")
