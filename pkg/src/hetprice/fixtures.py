"""Small hand-checkable datasets used by tests, the CLI and the documentation."""

from __future__ import annotations

from fractions import Fraction

from .dataset import CrossSection, PanelDataset
from .revpref import Observation


def worked_example_panel() -> PanelDataset:
    """Two identical agents, four goods: at observation t they spend 10 on good t
    and 1 on every other good, and good t costs 2 while the rest cost 1."""
    e, pbar = [], []
    for t in range(4):
        e.append(tuple(10 if k == t else 1 for k in range(4)))
        pbar.append(tuple(2 if k == t else 1 for k in range(4)))
    return PanelDataset(e=[e, e], pbar=pbar)


def warp_pair() -> list[Observation]:
    """Two observations, each strictly cheaper at the other's prices."""
    return [
        Observation(x=(1, Fraction(3, 2)), p=(1, 2)),
        Observation(x=(Fraction(3, 2), 1), p=(2, 1)),
    ]


def crossing_unsortable() -> CrossSection:
    """Two crossing budgets where every sorting pairs two mutually cheaper points."""
    return CrossSection(
        pbar=[(1, 2), (2, 1)],
        m=[4, 4],
        points=[[(1, 3), (1, 3)], [(3, 1), (3, 1)]],
    )


def crossing_sortable() -> CrossSection:
    """Same budgets; the cross matching separates the conflicting points."""
    return CrossSection(
        pbar=[(1, 2), (2, 1)],
        m=[4, 4],
        points=[[(1, 3), (4, 0)], [(3, 1), (0, 4)]],
    )


def crossing_budgets() -> list[tuple]:
    return [((1, 2), 4), ((2, 1), 4)]


def parallel_budgets() -> list[tuple]:
    return [((1, 1), 1), ((1, 1), 2)]


def crossing_cross_section() -> CrossSection:
    """Points on both crossing budgets covering all five patches: each line's two
    ends and the shared intersection point (4/3, 4/3)."""
    third = Fraction(1, 3)
    return CrossSection(
        pbar=[(1, 2), (2, 1)],
        m=[4, 4],
        points=[[(0, 4), (Fraction(4, 3), Fraction(8, 3)), (4, 0)],
                [(4, 0), (0, 4), (Fraction(8, 3), Fraction(4, 3))]],
        weights=[(third, third, third), (third, third, third)],
    )
