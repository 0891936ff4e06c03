from __future__ import annotations

import mpmath as mp
import pytest

from core.bessel import SERIES_SWITCHOVER, bessel_k1


def test_k1_at_one() -> None:
    assert abs(bessel_k1(1) - mp.mpf("0.60190723019723457473754000153561733926158688996811")) < mp.mpf(10) ** -35


def test_k1_against_integral_representation() -> None:
    # K_1(t) = int_0^inf exp(-t cosh u) cosh u du
    for t in (mp.mpf("0.3"), mp.mpf("2.5"), mp.mpf(9)):
        oracle = mp.quad(lambda u: mp.exp(-t * mp.cosh(u)) * mp.cosh(u), [0, 2, 8, mp.inf])
        assert abs(bessel_k1(t) - oracle) / oracle < mp.mpf(10) ** -25


@pytest.mark.parametrize("t", ["0.001", "0.5", "1.999", "2", "2.001", "7.5", "40", "300"])
def test_both_regimes_match_mpmath(t: str) -> None:
    value = mp.mpf(t)
    reference = mp.besselk(1, value)
    assert abs(bessel_k1(value) - reference) / reference < mp.mpf(10) ** -33


def test_small_argument_limit() -> None:
    t = mp.mpf("1e-6")
    assert abs(t * bessel_k1(t) - 1) < mp.mpf("1e-5")


def test_monotone_decreasing() -> None:
    grid = [mp.mpf(k) / 8 for k in range(1, 160)]
    assert SERIES_SWITCHOVER * 8 < len(grid)
    values = [bessel_k1(t) for t in grid]
    assert all(left > right for left, right in zip(values, values[1:]))


@pytest.mark.parametrize("t", [0, -1])
def test_non_positive_arguments_rejected(t: int) -> None:
    with pytest.raises(ValueError):
        bessel_k1(t)
