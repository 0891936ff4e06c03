from __future__ import annotations

from fractions import Fraction

import mpmath as mp
import pytest

from core.dedekind import (
    DedekindInput,
    ZeroModulusError,
    d_smoothed,
    d_sum,
    d_sum_level,
    d_sum_pq,
    error_budget,
)
from core.eisenstein import SeriesParams
from core.quadfield import Lattice, Level, OrderSpec, QuadFrac, QuadInt

TOLERANCE = mp.mpf("1e-25")


def test_trivial_modulus_gives_zero(lattice8: Lattice, params: SeriesParams) -> None:
    order = lattice8.order
    assert d_sum(QuadInt(2, 1, order), order.one(), lattice8, params) == 0


def test_parity_and_periodicity_in_a(lattice8: Lattice, params: SeriesParams) -> None:
    order = lattice8.order
    a, c = QuadInt(1, 1, order), QuadInt(3, 1, order)
    base = d_sum(a, c, lattice8, params)
    assert abs(d_sum(-a, c, lattice8, params) + base) < TOLERANCE
    assert abs(d_sum(a + c * QuadInt(2, -1, order), c, lattice8, params) - base) < TOLERANCE


def test_parity_on_a_second_order(lattice7: Lattice, params: SeriesParams) -> None:
    order = lattice7.order
    a, c = QuadInt(2, 0, order), QuadInt(1, 2, order)
    assert abs(d_sum(-a, c, lattice7, params) + d_sum(a, c, lattice7, params)) < TOLERANCE


def test_pq_specialisation_and_periodicity(lattice8: Lattice, params: SeriesParams) -> None:
    order = lattice8.order
    a, c = QuadInt(1, 1, order), QuadInt(3, 1, order)
    zero = order.zero()
    assert d_sum_pq(a, c, zero, zero, lattice8, params) == d_sum(a, c, lattice8, params)
    p = QuadFrac(Fraction(1, 3), Fraction(2, 3), order)
    q = QuadFrac(Fraction(1, 2), Fraction(0), order)
    shifted = p + QuadInt(1, -2, order)
    left = d_sum_pq(a, c, shifted, q, lattice8, params)
    right = d_sum_pq(a, c, p, q, lattice8, params)
    assert abs(left - right) < TOLERANCE


def test_smoothed_sum_is_a_difference(lattice8: Lattice, params: SeriesParams, level: Level) -> None:
    order = lattice8.order
    a, c = QuadInt(1, 1, order), QuadInt(3, 1, order)
    assert d_smoothed(a, order.one(), level, lattice8, params) == 0
    expected = d_sum(level.generator * a, c, lattice8, params) - d_sum(a, c, lattice8, params)
    assert d_smoothed(a, c, level, lattice8, params) == expected


def test_level_modulus_matches_distribution_relation(
    lattice8: Lattice, params: SeriesParams, level: Level
) -> None:
    order = lattice8.order
    a = QuadInt(1, 1, order)
    c = level.generator * QuadInt(1, 1, order)
    p = QuadFrac(Fraction(1, 2), Fraction(1, 2), order)
    q = QuadFrac(Fraction(0), Fraction(1, 3), order)
    for pair in ((None, None), (p, q)):
        divided = d_sum_level(a, c, level, lattice8, params, p=pair[0], q=pair[1])
        multiplied = d_sum_pq(level.generator * a, c, pair[0], pair[1], lattice8, params)
        assert abs(divided - multiplied) < TOLERANCE


def test_level_modulus_requires_divisibility(lattice8: Lattice, params: SeriesParams, level: Level) -> None:
    order = lattice8.order
    with pytest.raises(ValueError):
        d_sum_level(order.one(), QuadInt(3, 0, order), level, lattice8, params)


def test_zero_modulus_rejected(lattice8: Lattice, params: SeriesParams) -> None:
    order = lattice8.order
    with pytest.raises(ZeroModulusError):
        d_sum(order.one(), order.zero(), lattice8, params)
    with pytest.raises(ZeroModulusError):
        DedekindInput(order.one(), order.zero())


def test_input_record_reduces_torsion_points(lattice8: Lattice, params: SeriesParams) -> None:
    order = lattice8.order
    a, c = QuadInt(1, 1, order), QuadInt(3, 1, order)
    p = QuadFrac(Fraction(4, 3), Fraction(-1, 3), order)
    request = DedekindInput(a, c, p=p)
    assert request.p == QuadFrac(Fraction(1, 3), Fraction(2, 3), order)
    assert request.q is not None and request.q.is_zero()
    assert abs(request.evaluate(lattice8, params) - d_sum_pq(a, c, p, None, lattice8, params)) < TOLERANCE


def test_error_budget_grows_with_the_modulus(order8: OrderSpec) -> None:
    small = error_budget(QuadInt(1, 1, order8))
    large = error_budget(QuadInt(7, 5, order8))
    assert 0 < small < large
