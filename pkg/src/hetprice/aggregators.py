"""Price aggregators: evaluation, regularity metadata and residual-price solves.

An aggregator maps the N consumers' prices of one good to an index.  It
must be strictly increasing, continuous and idempotent (``W(p,...,p) = p``).
Built-ins are exact on rationals; custom callables are sampled once at
configuration time and solved by bracketed bisection.
"""

from __future__ import annotations

import importlib
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .dataset import to_money, to_vector
from .errors import AggregatorError, NoBracket, NonPositivePrice

ARITHMETIC = "arithmetic"
WEIGHTED_HARMONIC = "weighted_harmonic"
CUSTOM = "custom"

# regularity cases for one coordinate tending to its limit
DIVERGES_AT_INFINITY = "diverges_at_infinity"
VANISHES_AT_ZERO = "vanishes_at_zero"
REGULARITY_CASES = (DIVERGES_AT_INFINITY, VANISHES_AT_ZERO)

RESIDUAL_TOL = Fraction(1, 2**60)
MAX_BRACKET_STEPS = 200
MAX_BISECTIONS = 400


@dataclass(frozen=True, eq=False)
class AggregatorSpec:
    kind: str
    regularity: str
    homogeneous_degree_one: bool = True
    weights: tuple | None = None
    mass: Fraction | None = None
    func: Callable | None = None
    name: str = ""

    def __post_init__(self):
        if self.regularity not in REGULARITY_CASES:
            raise AggregatorError(f"regularity must be one of {REGULARITY_CASES}, got {self.regularity!r}")

    def __call__(self, prices) -> Fraction:
        return eval_aggregator(self, prices)

    @property
    def key(self) -> str:
        return self.name or self.kind


def arithmetic(weights: Sequence | None = None) -> AggregatorSpec:
    """Plain mean, or the weighted mean ``sum w_i p_i`` when ``weights`` (summing to 1) are given."""
    if weights is not None:
        weights = to_vector(weights)
        if any(w <= 0 for w in weights) or sum(weights) != 1:
            raise AggregatorError("arithmetic weights must be positive and sum to 1")
    return AggregatorSpec(kind=ARITHMETIC, regularity=DIVERGES_AT_INFINITY, weights=weights, name="arithmetic")


def weighted_harmonic(e: Sequence, mass=None) -> AggregatorSpec:
    """``M / sum_i e_i / p_i`` with ``M = sum_i e_i``.

    Diverging one price sends the index to a finite limit, while shrinking
    one price sends it to zero, so this kind vanishes at zero.
    """
    e = to_vector(e)
    if any(v < 0 for v in e) or sum(e) <= 0:
        raise AggregatorError("harmonic weights must be nonnegative with positive total")
    total = sum(e)
    if mass is not None and to_money(mass) != total:
        raise AggregatorError(f"mass {mass} must equal the weight total {total} for W(p,...,p)=p")
    return AggregatorSpec(kind=WEIGHTED_HARMONIC, regularity=VANISHES_AT_ZERO, weights=e, mass=total, name="harmonic")


def custom(func: Callable, regularity: str, arity: int, homogeneous_degree_one: bool = False,
           name: str = "custom") -> AggregatorSpec:
    """Wrap a user callable ``func(prices) -> number``.

    The declared regularity is trusted.  Idempotence and strict increase are
    checked on a small grid; failures raise :class:`AggregatorError`.
    """
    spec = AggregatorSpec(kind=CUSTOM, regularity=regularity, homogeneous_degree_one=homogeneous_degree_one,
                          func=func, name=name)
    _sample_audit(spec, arity)
    return spec


def _sample_audit(spec: AggregatorSpec, arity: int) -> None:
    grid = [Fraction(1, 2), Fraction(1), Fraction(3)]
    tol = Fraction(1, 2**40)
    for p in grid:
        v = eval_aggregator(spec, [p] * arity)
        if abs(v - p) > tol * p:
            raise AggregatorError(f"{spec.name}: W(p,...,p) = {v} != p = {p}")
    for point in itertools.islice(itertools.product(grid, repeat=arity), 64):
        base = eval_aggregator(spec, point)
        for i in range(arity):
            bumped = list(point)
            bumped[i] = bumped[i] * Fraction(5, 4)
            if eval_aggregator(spec, bumped) <= base:
                raise AggregatorError(f"{spec.name}: not strictly increasing in coordinate {i}")


def eval_aggregator(W: AggregatorSpec, prices) -> Fraction:
    prices = to_vector(prices)
    if any(p <= 0 for p in prices):
        raise NonPositivePrice("aggregated prices must be strictly positive")
    if W.kind == ARITHMETIC:
        if W.weights is None:
            return sum(prices) / len(prices)
        _arity(W, prices)
        return sum(w * p for w, p in zip(W.weights, prices))
    if W.kind == WEIGHTED_HARMONIC:
        _arity(W, prices)
        return W.mass / sum(e / p for e, p in zip(W.weights, prices))
    v = W.func(prices)
    return v if isinstance(v, Fraction) else Fraction(v)


def _arity(W: AggregatorSpec, prices) -> None:
    if len(prices) != len(W.weights):
        raise AggregatorError(f"{W.key} expects {len(W.weights)} prices, got {len(prices)}")


def _fill(fixed: Sequence[Fraction], free_index: int, value: Fraction) -> list[Fraction]:
    out = list(fixed)
    out.insert(free_index, value)
    return out


def solve_residual(W: AggregatorSpec, target, fixed, free_index: int) -> Fraction:
    """Price for coordinate ``free_index`` making ``W`` hit ``target`` given the other prices.

    Exact closed forms for the built-ins; bisection on an expanding bracket
    (doubling/halving up to 200 steps) for custom kinds, accurate to
    ``2**-60 * target``.
    """
    target = to_money(target)
    fixed = to_vector(fixed)
    if target <= 0 or any(p <= 0 for p in fixed):
        raise NonPositivePrice("target and fixed prices must be strictly positive")
    n = len(fixed) + 1
    if not 0 <= free_index < n:
        raise IndexError(free_index)
    if W.kind == ARITHMETIC:
        if W.weights is None:
            p = n * target - sum(fixed)
        else:
            others = [w for j, w in enumerate(W.weights) if j != free_index]
            p = (target - sum(w * q for w, q in zip(others, fixed))) / W.weights[free_index]
        if p <= 0:
            raise NoBracket(f"arithmetic residual requires p = {p} <= 0")
        return p
    if W.kind == WEIGHTED_HARMONIC:
        others = [e for j, e in enumerate(W.weights) if j != free_index]
        slack = W.mass / target - sum(e / q for e, q in zip(others, fixed))
        e_free = W.weights[free_index]
        if e_free == 0:
            if slack == 0:
                return target
            raise NoBracket("free coordinate has zero weight and the target is not met")
        if slack <= 0:
            raise NoBracket(f"harmonic residual needs e/p = {slack} <= 0")
        return e_free / slack
    return _bisect(W, target, fixed, free_index)


def _bisect(W: AggregatorSpec, target: Fraction, fixed, free_index: int) -> Fraction:
    def f(p):
        return eval_aggregator(W, _fill(fixed, free_index, p))

    tol = RESIDUAL_TOL * target
    hi = target
    for _ in range(MAX_BRACKET_STEPS):
        if f(hi) >= target:
            break
        hi *= 2
    else:
        raise NoBracket("upper bracket expansion failed")
    lo = target
    for _ in range(MAX_BRACKET_STEPS):
        if f(lo) <= target:
            break
        lo /= 2
    else:
        raise NoBracket("lower bracket expansion failed")
    best, best_err = lo, abs(f(lo) - target)
    for _ in range(MAX_BISECTIONS):
        mid = (lo + hi) / 2
        v = f(mid)
        err = abs(v - target)
        if err < best_err:
            best, best_err = mid, err
        if err <= tol:
            return mid
        if v < target:
            lo = mid
        else:
            hi = mid
    return best


def resolve(key: str, weights: Sequence | None = None) -> AggregatorSpec:
    """Aggregator from a configuration key.

    ``"arithmetic"``, ``"harmonic"`` (needs ``weights``) or a plugin
    ``"package.module:attr"`` naming an AggregatorSpec or a factory
    ``attr(weights) -> AggregatorSpec``.
    """
    if key == "arithmetic":
        return arithmetic()
    if key == "harmonic":
        if weights is None:
            raise AggregatorError("harmonic aggregator needs expenditure weights")
        return weighted_harmonic(weights)
    if ":" in key:
        mod, _, attr = key.partition(":")
        try:
            obj = getattr(importlib.import_module(mod), attr)
        except (ImportError, AttributeError) as exc:
            raise AggregatorError(f"cannot load aggregator plugin {key!r}: {exc}") from exc
        spec = obj if isinstance(obj, AggregatorSpec) else obj(weights)
        if not isinstance(spec, AggregatorSpec):
            raise AggregatorError(f"plugin {key!r} did not produce an AggregatorSpec")
        return spec
    raise AggregatorError(f"unknown aggregator key {key!r}")
