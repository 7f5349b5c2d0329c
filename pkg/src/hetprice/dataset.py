"""Data model: panels, cross sections, bundles and price systems over exact rationals.

Every number that enters a revealed-preference comparison is a
:class:`fractions.Fraction`.  Input decimals (JSON strings or JSON numbers) are
parsed without passing through binary floating point, so weak-versus-strict
inequalities are decided exactly.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from numbers import Rational
from typing import Any, Iterable, Mapping, Sequence

from .errors import DomainError, NonPositivePrice, SchemaError

Money = Fraction
Vector = tuple  # tuple[Fraction, ...]
Bundle = tuple  # tuple[Fraction, ...], nonnegative quantities


def to_money(value: Any) -> Fraction:
    """Convert ``value`` to an exact rational.

    Accepts ints, Fractions, Decimals and strings such as ``"12.5"``, ``"1e-3"``
    or ``"7/2"``.  Python floats are rejected: pass decimal strings instead.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not monetary values")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Decimal):
        if not value.is_finite():
            raise DomainError(f"non-finite value {value}")
        return Fraction(value)
    if isinstance(value, Rational):
        return Fraction(value.numerator, value.denominator)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"not a finite decimal or ratio: {value!r}") from exc
    if isinstance(value, float):
        raise TypeError(f"float {value!r} rejected; pass a decimal string for exact parsing")
    raise TypeError(f"cannot interpret {type(value).__name__} as money")


def to_vector(values: Iterable[Any]) -> tuple:
    return tuple(to_money(v) for v in values)


def dot(p: Sequence[Fraction], x: Sequence[Fraction]) -> Fraction:
    return sum((a * b for a, b in zip(p, x)), Fraction(0))


def fmt(q: Fraction) -> str:
    """Serialize a rational losslessly (``"7/2"``, ``"3"``)."""
    return str(q)


def implied_bundle(e: Sequence[Any], p: Sequence[Any]) -> tuple:
    """Quantities bought when spending ``e_k`` on good ``k`` at price ``p_k``."""
    e = to_vector(e)
    p = to_vector(p)
    if len(e) != len(p):
        raise SchemaError(f"expenditure has {len(e)} goods, prices have {len(p)}")
    for k, pk in enumerate(p):
        if pk <= 0:
            raise NonPositivePrice("price must be strictly positive", (k,))
    return tuple(ek / pk for ek, pk in zip(e, p))


def _check_positive_vector(vec: Sequence[Fraction], what: str, where: tuple) -> None:
    for k, v in enumerate(vec):
        if v <= 0:
            raise DomainError(f"{what} must be strictly positive", where + (k,))


@dataclass(frozen=True)
class PanelDataset:
    """Expenditures ``e[i][t][k]`` of N consumers over T observations and K goods,
    together with the observed price indices ``pbar[t][k]``.

    Total expenditure ``m(i, t)`` is derived, never stored.
    """

    e: tuple
    pbar: tuple

    def __post_init__(self):
        e = tuple(tuple(to_vector(row) for row in cons) for cons in self.e)
        pbar = tuple(to_vector(row) for row in self.pbar)
        object.__setattr__(self, "e", e)
        object.__setattr__(self, "pbar", pbar)
        if not e or not pbar:
            raise SchemaError("panel needs at least one consumer and one observation")
        T, K = len(pbar), len(pbar[0])
        if K == 0:
            raise SchemaError("panel needs at least one good")
        for t, row in enumerate(pbar):
            if len(row) != K:
                raise SchemaError(f"price index row {t} has {len(row)} goods, expected {K}")
            _check_positive_vector(row, "price index", (t,))
        for i, cons in enumerate(e):
            if len(cons) != T:
                raise SchemaError(f"consumer {i} has {len(cons)} observations, expected {T}")
            for t, row in enumerate(cons):
                if len(row) != K:
                    raise SchemaError(f"expenditure ({i},{t}) has {len(row)} goods, expected {K}")
                for k, v in enumerate(row):
                    if v < 0:
                        raise DomainError("expenditure must be nonnegative", (i, t, k))
                if sum(row) <= 0:
                    raise DomainError("total expenditure must be strictly positive", (i, t))

    @property
    def N(self) -> int:
        return len(self.e)

    @property
    def T(self) -> int:
        return len(self.pbar)

    @property
    def K(self) -> int:
        return len(self.pbar[0])

    def m(self, i: int, t: int) -> Fraction:
        return sum(self.e[i][t], Fraction(0))

    def bundle(self, i: int, t: int) -> tuple:
        """Implied bundle at the index prices."""
        return implied_bundle(self.e[i][t], self.pbar[t])

    def consumer(self, i: int) -> "PanelDataset":
        return PanelDataset(e=(self.e[i],), pbar=self.pbar)


@dataclass(frozen=True)
class HeterogeneousPrices:
    """Idiosyncratic prices ``p[i][t][k]``; ``stable_scales[i][k]`` when the
    prices are a fixed multiple of the index."""

    p: tuple
    stable_scales: tuple | None = None

    def __post_init__(self):
        p = tuple(tuple(to_vector(row) for row in cons) for cons in self.p)
        object.__setattr__(self, "p", p)
        for i, cons in enumerate(p):
            for t, row in enumerate(cons):
                _check_positive_vector(row, "idiosyncratic price", (i, t))
        if self.stable_scales is not None:
            lam = tuple(to_vector(row) for row in self.stable_scales)
            object.__setattr__(self, "stable_scales", lam)
            for i, row in enumerate(lam):
                _check_positive_vector(row, "stable scale", (i,))

    def check_against(self, panel: PanelDataset) -> None:
        """Raise DomainError unless shapes match ``panel`` and stable scales reproduce ``p`` exactly."""
        if len(self.p) != panel.N or any(len(c) != panel.T for c in self.p):
            raise SchemaError("price array shape does not match the panel")
        if self.stable_scales is None:
            return
        for i in range(panel.N):
            for t in range(panel.T):
                for k in range(panel.K):
                    if self.p[i][t][k] != self.stable_scales[i][k] * panel.pbar[t][k]:
                        raise DomainError("price is not the stable multiple of the index", (i, t, k))

    def pooled_observations(self, panel: PanelDataset) -> list[tuple[tuple, tuple]]:
        """``(x(e^{i,t}, p^{i,t}), p^{i,t})`` in lexicographic ``(i, t)`` order."""
        out = []
        for i in range(panel.N):
            for t in range(panel.T):
                p = self.p[i][t]
                out.append((implied_bundle(panel.e[i][t], p), p))
        return out


@dataclass(frozen=True)
class CrossSection:
    """Repeated cross sections: at observation ``t`` the price index
    ``pbar[t]``, the common total ``m[t]`` and N expenditure points."""

    pbar: tuple
    m: tuple
    points: tuple
    weights: tuple | None = None

    def __post_init__(self):
        pbar = tuple(to_vector(r) for r in self.pbar)
        m = to_vector(self.m)
        pts = tuple(tuple(to_vector(e) for e in obs) for obs in self.points)
        object.__setattr__(self, "pbar", pbar)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "points", pts)
        if not pbar:
            raise SchemaError("cross section needs at least one observation")
        if len(m) != len(pbar) or len(pts) != len(pbar):
            raise SchemaError("pbar, m and points must have one entry per observation")
        K = len(pbar[0])
        N = len(pts[0])
        if N == 0:
            raise SchemaError("each observation needs at least one point")
        for t in range(len(pbar)):
            if len(pbar[t]) != K:
                raise SchemaError(f"price index row {t} has wrong length")
            _check_positive_vector(pbar[t], "price index", (t,))
            if m[t] <= 0:
                raise DomainError("total expenditure must be positive", (t,))
            if len(pts[t]) != N:
                raise SchemaError(f"observation {t} has {len(pts[t])} points, expected {N}")
            for n, e in enumerate(pts[t]):
                if len(e) != K:
                    raise SchemaError(f"point ({t},{n}) has wrong length")
                if any(v < 0 for v in e):
                    raise DomainError("expenditure must be nonnegative", (t, n))
                if sum(e) != m[t]:
                    raise DomainError(f"point total {sum(e)} differs from m={m[t]}", (t, n))
        if self.weights is not None:
            w = tuple(to_vector(r) for r in self.weights)
            object.__setattr__(self, "weights", w)
            if len(w) != len(pbar) or any(len(r) != N for r in w):
                raise SchemaError("weights must match the points' shape")
            for t, r in enumerate(w):
                if any(v <= 0 for v in r) or sum(r) != 1:
                    raise DomainError("weights must be positive and sum to 1", (t,))

    @property
    def T(self) -> int:
        return len(self.pbar)

    @property
    def N(self) -> int:
        return len(self.points[0])

    @property
    def K(self) -> int:
        return len(self.pbar[0])

    def weight(self, t: int, n: int) -> Fraction:
        if self.weights is None:
            return Fraction(1, self.N)
        return self.weights[t][n]

    def bundle(self, t: int, n: int) -> tuple:
        return implied_bundle(self.points[t][n], self.pbar[t])


@dataclass(frozen=True)
class SortingFunction:
    """``sigma[t][i]`` is the index (within ``E^t``) of the point assigned to consumer ``i``."""

    sigma: tuple

    def __post_init__(self):
        sigma = tuple(tuple(int(v) for v in row) for row in self.sigma)
        object.__setattr__(self, "sigma", sigma)
        for t, row in enumerate(sigma):
            if sorted(row) != list(range(len(row))):
                raise DomainError("sorting is not a bijection", (t,))

    def apply(self, cs: CrossSection) -> PanelDataset:
        e = [[cs.points[t][self.sigma[t][i]] for t in range(cs.T)] for i in range(cs.N)]
        return PanelDataset(e=e, pbar=cs.pbar)


# --- documents -----------------------------------------------------------------


def _parse_document(source: str | bytes | Mapping) -> Mapping:
    if isinstance(source, Mapping):
        return source
    try:
        return json.loads(source, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc


def _money_list(values: Any, where: str) -> tuple:
    if not isinstance(values, (list, tuple)):
        raise SchemaError(f"{where}: expected a list of numbers")
    return to_vector(values)


def load_panel(source: str | bytes | Mapping) -> PanelDataset:
    """Parse a panel document::

        {"goods": K, "consumers": N,
         "observations": [{"pbar": [...], "expenditures": [[...] x N]} x T]}
    """
    doc = _parse_document(source)
    try:
        K = int(doc["goods"])
        N = int(doc["consumers"])
        obs = doc["observations"]
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"panel document missing field: {exc}") from exc
    if not isinstance(obs, list) or not obs:
        raise SchemaError("observations must be a nonempty list")
    pbar, by_obs = [], []
    for t, o in enumerate(obs):
        row = _money_list(o.get("pbar"), f"observation {t} pbar")
        if len(row) != K:
            raise SchemaError(f"observation {t}: pbar has {len(row)} entries, goods={K}")
        exps = o.get("expenditures")
        if not isinstance(exps, list) or len(exps) != N:
            raise SchemaError(f"observation {t}: expected {N} expenditure vectors")
        vecs = []
        for i, v in enumerate(exps):
            vec = _money_list(v, f"observation {t} consumer {i}")
            if len(vec) != K:
                raise SchemaError(f"observation {t} consumer {i}: {len(vec)} entries, goods={K}")
            vecs.append(vec)
        pbar.append(row)
        by_obs.append(vecs)
    e = [[by_obs[t][i] for t in range(len(obs))] for i in range(N)]
    return PanelDataset(e=e, pbar=pbar)


def dump_panel(panel: PanelDataset) -> dict:
    return {
        "goods": panel.K,
        "consumers": panel.N,
        "observations": [
            {
                "pbar": [fmt(v) for v in panel.pbar[t]],
                "expenditures": [[fmt(v) for v in panel.e[i][t]] for i in range(panel.N)],
            }
            for t in range(panel.T)
        ],
    }


def load_cross_section(source: str | bytes | Mapping) -> CrossSection:
    """Parse a cross-section document::

        {"goods": K, "observations": [{"pbar": [...], "m": dec, "points": [[...] x N],
                                       "weights": [...] (optional)} x T]}
    """
    doc = _parse_document(source)
    try:
        K = int(doc["goods"])
        obs = doc["observations"]
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"cross-section document missing field: {exc}") from exc
    if not isinstance(obs, list) or not obs:
        raise SchemaError("observations must be a nonempty list")
    pbar, m, pts, weights = [], [], [], []
    for t, o in enumerate(obs):
        row = _money_list(o.get("pbar"), f"observation {t} pbar")
        if len(row) != K:
            raise SchemaError(f"observation {t}: pbar has {len(row)} entries, goods={K}")
        if "m" not in o:
            raise SchemaError(f"observation {t}: missing m")
        points = o.get("points")
        if not isinstance(points, list):
            raise SchemaError(f"observation {t}: points must be a list")
        vecs = [_money_list(v, f"observation {t} point {n}") for n, v in enumerate(points)]
        pbar.append(row)
        m.append(to_money(o["m"]))
        pts.append(vecs)
        if "weights" in o:
            weights.append(_money_list(o["weights"], f"observation {t} weights"))
    if weights and len(weights) != len(obs):
        raise SchemaError("weights must be given for every observation or none")
    return CrossSection(pbar=pbar, m=m, points=pts, weights=weights or None)


def dump_cross_section(cs: CrossSection) -> dict:
    out = []
    for t in range(cs.T):
        o = {
            "pbar": [fmt(v) for v in cs.pbar[t]],
            "m": fmt(cs.m[t]),
            "points": [[fmt(v) for v in e] for e in cs.points[t]],
        }
        if cs.weights is not None:
            o["weights"] = [fmt(v) for v in cs.weights[t]]
        out.append(o)
    return {"goods": cs.K, "observations": out}


def load_panel_csv(expenditures: str, prices: str) -> PanelDataset:
    """Build a panel from CSV text.

    ``expenditures`` has one row per (i, t) with header ``i,t,e_1..e_K``;
    ``prices`` has rows ``t,p_1..p_K``.  Indices are 1-based.
    """
    price_rows = list(csv.DictReader(io.StringIO(prices)))
    exp_rows = list(csv.DictReader(io.StringIO(expenditures)))
    if not price_rows or not exp_rows:
        raise SchemaError("empty CSV input")
    pcols = [c for c in price_rows[0] if c != "t"]
    ecols = [c for c in exp_rows[0] if c not in ("i", "t")]
    if len(pcols) != len(ecols):
        raise SchemaError("price and expenditure files disagree on the number of goods")
    try:
        pbar_by_t = {int(r["t"]): to_vector(r[c] for c in pcols) for r in price_rows}
        cells = {(int(r["i"]), int(r["t"])): to_vector(r[c] for c in ecols) for r in exp_rows}
    except (KeyError, ValueError) as exc:
        raise SchemaError(f"bad CSV row: {exc}") from exc
    T = len(pbar_by_t)
    N = max(i for i, _ in cells)
    if sorted(pbar_by_t) != list(range(1, T + 1)):
        raise SchemaError("price file must list t = 1..T exactly once")
    missing = [(i, t) for i in range(1, N + 1) for t in range(1, T + 1) if (i, t) not in cells]
    if missing or len(cells) != N * T:
        raise SchemaError(f"expenditure file incomplete, missing {missing[:3]}")
    e = [[cells[(i, t)] for t in range(1, T + 1)] for i in range(1, N + 1)]
    return PanelDataset(e=e, pbar=[pbar_by_t[t] for t in range(1, T + 1)])


def load_disaggregation(source: str | bytes | Mapping) -> tuple[tuple, tuple]:
    """Parse expenditures plus aggregate demands::

        {"goods": K, "consumers": N,
         "observations": [{"xbar": [...], "expenditures": [[...] x N]} x T]}

    Returns ``(e[i][t][k], xbar[t][k])``.
    """
    doc = _parse_document(source)
    try:
        K = int(doc["goods"])
        N = int(doc["consumers"])
        obs = doc["observations"]
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"disaggregation document missing field: {exc}") from exc
    xbar, by_obs = [], []
    for t, o in enumerate(obs):
        row = _money_list(o.get("xbar"), f"observation {t} xbar")
        exps = o.get("expenditures")
        if len(row) != K or not isinstance(exps, list) or len(exps) != N:
            raise SchemaError(f"observation {t}: shape mismatch")
        vecs = [_money_list(v, f"observation {t} consumer {i}") for i, v in enumerate(exps)]
        if any(len(v) != K for v in vecs):
            raise SchemaError(f"observation {t}: expenditure length mismatch")
        xbar.append(row)
        by_obs.append(vecs)
    e = tuple(tuple(by_obs[t][i] for t in range(len(obs))) for i in range(N))
    return e, tuple(xbar)
