from __future__ import annotations

from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import settings
from hypothesis import strategies as st

from hetprice import fixtures

DATA = Path(__file__).resolve().parent.parent / "data"

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def dyadic(lo: int = 1, hi: int = 32, den: int = 8):
    return st.integers(lo, hi).map(lambda n: Fraction(n, den))


@st.composite
def observation_lists(draw, max_n: int = 6, max_k: int = 3):
    """Small lists of (bundle, price) pairs with dyadic entries."""
    n = draw(st.integers(1, max_n))
    k = draw(st.integers(1, max_k))
    vec = lambda lo: st.tuples(*[dyadic(lo) for _ in range(k)])  # noqa: E731
    return [(draw(vec(0)), draw(vec(1))) for _ in range(n)]


def stream(panel, i):
    return [(panel.bundle(i, t), panel.pbar[t]) for t in range(panel.T)]


@pytest.fixture
def worked_panel():
    return fixtures.worked_example_panel()
