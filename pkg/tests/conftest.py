from __future__ import annotations

import random

import mpmath as mp
import pytest

from core.eisenstein import SeriesParams
from core.quadfield import Lattice, Level, OrderSpec, QuadInt


@pytest.fixture(autouse=True)
def precision():
    """Every test runs at 128 bits unless it raises the precision itself."""

    with mp.workprec(128):
        yield 128


@pytest.fixture
def order8() -> OrderSpec:
    return OrderSpec(-8)


@pytest.fixture
def order7() -> OrderSpec:
    return OrderSpec(-7)


@pytest.fixture
def lattice8(order8: OrderSpec) -> Lattice:
    return Lattice(order8)


@pytest.fixture
def lattice7(order7: OrderSpec) -> Lattice:
    return Lattice(order7)


@pytest.fixture
def params(precision: int) -> SeriesParams:
    return SeriesParams(precision=precision)


@pytest.fixture
def level(order8: OrderSpec) -> Level:
    # N = sqrt(-2) is w itself in the basis 1, w of Z[sqrt(-2)]
    return Level(QuadInt(0, 1, order8))


@pytest.fixture
def rng() -> random.Random:
    return random.Random(7)
