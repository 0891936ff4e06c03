from __future__ import annotations

import random

import mpmath as mp
import pytest

from core.eisenstein import PrecisionExhaustedError, SeriesParams, lattice_series
from core.harmonic import (
    HConvention,
    Point3,
    h_n_value,
    h_value,
    harmonic_lift,
    hyperbolic_laplacian,
    moebius,
    scale_point,
)
from core.quadfield import Lattice, Level, Mat2, QuadInt, random_sl2


def _close(left: Point3, right: Point3, tolerance: str = "1e-30") -> bool:
    return abs(left.z - right.z) < mp.mpf(tolerance) and abs(left.v - right.v) < mp.mpf(tolerance)


def test_points_need_positive_height() -> None:
    with pytest.raises(ValueError):
        Point3.of(0, 0)
    with pytest.raises(ValueError):
        Point3.of(1, "-0.5")


def test_moebius_identity_and_composition(lattice8: Lattice, rng: random.Random) -> None:
    u = Point3.of(mp.mpc("0.2", "-0.1"), "0.7")
    assert _close(moebius(Mat2.identity(lattice8.order), u), u)
    for _ in range(10):
        a = random_sl2(lattice8.order, 20, rng=rng)
        b = random_sl2(lattice8.order, 20, rng=rng)
        assert _close(moebius(a @ b, u), moebius(a, moebius(b, u)), "1e-25")


def test_moebius_inversion(lattice8: Lattice) -> None:
    order = lattice8.order
    inversion = Mat2(order.zero(), -order.one(), order.one(), order.zero())
    moved = moebius(inversion, Point3.of(0, 2))
    assert abs(moved.z) < mp.mpf("1e-35")
    assert abs(moved.v - mp.mpf("0.5")) < mp.mpf("1e-35")


def test_scale_point(level: Level) -> None:
    u = Point3.of(mp.mpc(1, 1), 1)
    scaled = scale_point(level.generator, u)
    assert abs(scaled.v - mp.sqrt(2)) < mp.mpf("1e-35")
    assert abs(scaled.z - mp.mpc(0, mp.sqrt(2)) * mp.mpc(1, 1)) < mp.mpf("1e-35")


def test_convention_names_round_trip() -> None:
    candidates = HConvention.candidates()
    assert len({c.name for c in candidates}) == 4
    for candidate in candidates:
        assert HConvention.parse(candidate.name) == candidate


@pytest.mark.parametrize("convention", HConvention.candidates(), ids=lambda c: c.name)
def test_h_is_odd(lattice8: Lattice, params: SeriesParams, convention: HConvention) -> None:
    u = Point3.of(mp.mpc("0.31", "0.17"), "0.9")
    total = h_value(u.reflect(), lattice8, params, convention) + h_value(u, lattice8, params, convention)
    assert abs(total) < mp.mpf("1e-15")


@pytest.mark.parametrize("convention", HConvention.candidates(), ids=lambda c: c.name)
def test_translations_shift_h_by_the_linear_term(
    lattice7: Lattice, params: SeriesParams, convention: HConvention
) -> None:
    lift = harmonic_lift(lattice7, params, convention)
    b = QuadInt(1, 1, lattice7.order).to_complex()
    u = Point3.of(mp.mpc("-0.2", "0.05"), "1.1")
    expected = lattice_series(lattice7, params).e2zero * (b - mp.conj(b))
    assert abs(lift.value(u.shifted(dz=b)) - lift.value(u) - expected) < mp.mpf("1e-20")


def test_h_is_harmonic(lattice8: Lattice, params: SeriesParams) -> None:
    lift = harmonic_lift(lattice8, params)
    u = Point3.of(mp.mpc("0.13", "-0.27"), "1.2")
    coarse = abs(hyperbolic_laplacian(lift.value, u, mp.mpf("1e-3")))
    fine = abs(hyperbolic_laplacian(lift.value, u, mp.mpf("5e-4")))
    assert fine < mp.mpf("1e-4")
    assert abs(coarse / fine - 4) < mp.mpf("0.5")


def test_laplacian_of_simple_functions() -> None:
    u = Point3.of(mp.mpc("0.4", "0.3"), "1.5")
    harmonic = hyperbolic_laplacian(lambda p: mp.mpc(p.v**2), u, mp.mpf("1e-3"))
    assert abs(harmonic) < mp.mpf("1e-25")
    cubic = hyperbolic_laplacian(lambda p: mp.mpc(p.v**3), u, mp.mpf("1e-3"))
    assert abs(cubic - 3 * u.v**3) < mp.mpf("1e-5")


def test_h_n_is_a_difference(lattice8: Lattice, params: SeriesParams, level: Level) -> None:
    u = Point3.of(mp.mpc("0.1", "0.2"), "0.8")
    expected = h_value(scale_point(level.generator, u), lattice8, params) - h_value(u, lattice8, params)
    assert h_n_value(u, level, lattice8, params) == expected


def test_small_height_reports_required_radius(lattice8: Lattice, params: SeriesParams) -> None:
    with pytest.raises(PrecisionExhaustedError) as excinfo:
        h_value(Point3.of(0, "0.01"), lattice8, params)
    assert excinfo.value.required_radius > 100
