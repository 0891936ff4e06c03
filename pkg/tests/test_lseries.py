from __future__ import annotations

import random
from fractions import Fraction

import mpmath as mp
import pytest

from core.eisenstein import LatticeSeries, SeriesParams, lattice_series
from core.lseries import (
    ConvergenceRegionError,
    GeodesicError,
    GeodesicPath,
    ShiftConditionError,
    beta_factor,
    fixed_points,
    geodesic_data,
    in_window,
    integral_check,
    l_closed_s1,
    l_direct,
    orbit_element,
    orbit_reps,
    q_form,
    random_admissible,
)
from core.quadfield import Lattice, Level, Mat2, OrderSpec, QuadFrac, QuadInt


@pytest.fixture
def loxodromic(order8: OrderSpec) -> Mat2:
    # (1, 1; w, 1 + w) with w = sqrt(-2) lies in Gamma0(sqrt(-2))
    return Mat2.from_ints(order8, 1, 1, (0, 1), (1, 1))


def test_fixed_points_are_fixed(loxodromic: Mat2) -> None:
    a, b, c, d = (entry.to_complex() for entry in loxodromic.entries())
    for alpha in fixed_points(loxodromic):
        assert abs((a * alpha + b) / (c * alpha + d) - alpha) < mp.mpf("1e-30")


def test_unit_and_orientation(loxodromic: Mat2, level: Level) -> None:
    data = geodesic_data(loxodromic, level)
    eps_p = loxodromic.c.to_complex() * data.alpha_p + loxodromic.d.to_complex()
    assert abs(data.eps * eps_p - 1) < mp.mpf("1e-30")
    assert data.theta == (1 if abs(data.eps) > 1 else -1)
    assert data.window > 1
    inverse = geodesic_data(loxodromic.inverse(), level)
    assert inverse.theta == -data.theta


def test_degenerate_matrices_are_rejected(order8: OrderSpec, level: Level) -> None:
    with pytest.raises(GeodesicError):
        geodesic_data(Mat2.from_ints(order8, 1, 1, 0, 1))
    with pytest.raises(GeodesicError):
        geodesic_data(Mat2.from_ints(order8, 0, -1, 1, 0))
    with pytest.raises(GeodesicError):
        geodesic_data(Mat2.from_ints(order8, 1, 1, 1, 2), level)


def test_smeared_matrix_scales_the_orbit_by_the_unit(loxodromic: Mat2, level: Level) -> None:
    data = geodesic_data(loxodromic, level)
    m, n = mp.mpc("0.7", "-1.1"), mp.mpc("2", "0.5")
    moved = orbit_element(m, n, 1, data)
    assert abs(moved[0] * data.beta + moved[1] - data.eps * (m * data.beta + n)) < mp.mpf("1e-30")
    assert abs(q_form(*moved, data) - q_form(m, n, data)) < mp.mpf("1e-30")
    back = orbit_element(*moved, -1, data)
    assert abs(back[0] - m) < mp.mpf("1e-30") and abs(back[1] - n) < mp.mpf("1e-30")


def test_window_test() -> None:
    assert in_window(mp.mpc(2), mp.mpc(1), mp.mpf(4))
    assert not in_window(mp.mpc(1), mp.mpc(2), mp.mpf(4))
    assert not in_window(mp.mpc(1), mp.mpc(0), mp.mpf(4))
    assert in_window(mp.mpc(9), mp.mpc(1), mp.mpf(4), start=4)
    assert not in_window(mp.mpc(2), mp.mpc(1), mp.mpf(4), start=4)


def test_orbit_representatives(loxodromic: Mat2, level: Level, lattice8: Lattice) -> None:
    data = geodesic_data(loxodromic, level)
    orbit = orbit_reps(data, None, None, 50, lattice8)
    assert len(orbit) > 0
    for m, n, mu, mu_p in orbit.reps:
        assert (m, n) != (0, 0)
        assert 0 < abs(mu * mu_p) <= 50
        assert in_window(mu, mu_p, data.window)
    assert len(orbit_reps(data, None, None, 100, lattice8)) >= len(orbit)


def test_one_step_of_the_unit_leaves_the_window(loxodromic: Mat2, level: Level, lattice8: Lattice) -> None:
    data = geodesic_data(loxodromic, level)
    for m, n, mu, mu_p in orbit_reps(data, None, None, 50, lattice8).reps:
        for k in (1, -1):
            moved = orbit_element(m, n, k, data)
            moved_mu = moved[0] * data.beta + moved[1]
            moved_mu_p = moved[0] * data.beta_p + moved[1]
            assert abs(moved_mu - data.eps**k * mu) < mp.mpf("1e-20") * max(abs(mu), 1)
            assert not in_window(moved_mu, moved_mu_p, data.window)


def test_quadratic_form_on_the_second_coordinate(loxodromic: Mat2, level: Level) -> None:
    data = geodesic_data(loxodromic, level)
    for n in (mp.mpc(3), mp.mpc("1.5", "-2")):
        assert abs(q_form(0, n, data) - n**2) < mp.mpf("1e-30")


def test_shift_conditions_are_enforced(loxodromic: Mat2, level: Level, lattice8: Lattice) -> None:
    data = geodesic_data(loxodromic, level)
    p = QuadFrac(Fraction(1, 3), Fraction(0), lattice8.order)
    with pytest.raises(ShiftConditionError):
        orbit_reps(data, p, None, 50, lattice8)


def test_direct_sum_converges(loxodromic: Mat2, level: Level, lattice8: Lattice) -> None:
    data = geodesic_data(loxodromic, level)
    coarse = l_direct(data, 3, lattice8, bound=100)
    fine = l_direct(data, 3, lattice8, bound=400)
    assert fine.count >= coarse.count
    assert abs(fine.value - coarse.value) <= mp.mpf("1e-3") * abs(fine.value)
    with pytest.raises(ConvergenceRegionError):
        l_direct(data, 1, lattice8)


@pytest.mark.parametrize("start", ["window", "sqrt", "inverse"])
def test_direct_sum_does_not_depend_on_the_window(
    loxodromic: Mat2, level: Level, lattice8: Lattice, start: str
) -> None:
    data = geodesic_data(loxodromic, level)
    shifted_start = {"window": data.window, "sqrt": mp.sqrt(data.window), "inverse": 1 / data.window}[start]
    plain = l_direct(data, 2, lattice8, bound=100)
    shifted = l_direct(data, 2, lattice8, bound=100, window_start=shifted_start)
    assert shifted.count == plain.count
    assert abs(shifted.value - plain.value) < mp.mpf("1e-20") * abs(plain.value)


def test_direct_sum_is_invariant_under_the_involution(loxodromic: Mat2, level: Level, lattice8: Lattice) -> None:
    # x A x^-1 fixes -alpha, -alpha' and (m, n) -> (-m, n) matches the two orbit sets
    data = geodesic_data(loxodromic, level)
    flipped = geodesic_data(loxodromic.conjugate_by_x(), level)
    assert abs(flipped.window - data.window) < mp.mpf("1e-25")
    value = l_direct(data, 2, lattice8, bound=100)
    flipped_value = l_direct(flipped, 2, lattice8, bound=100)
    assert flipped_value.count == value.count
    assert abs(flipped_value.value - value.value) < mp.mpf("1e-20") * abs(value.value)


def test_closed_form_at_one_matches_phi_n(lattice8: Lattice, params: SeriesParams, level: Level) -> None:
    rng = random.Random(5)
    for _ in range(3):
        data = random_admissible(level, 12, rng=rng)
        assert not data.matrix.c.is_zero()
        closed = l_closed_s1(data, lattice8, params)
        assert closed.residual < mp.mpf("1e-15")
        assert closed.residual <= closed.error_budget
        assert abs(closed.phi_value - closed.phi_reference) == closed.residual


def test_closed_form_detects_a_broken_distribution_relation(
    lattice8: Lattice, params: SeriesParams, level: Level, monkeypatch: pytest.MonkeyPatch
) -> None:
    rng = random.Random(11)
    data = random_admissible(level, 12, rng=rng)
    while data.matrix.c.norm() <= 2:
        data = random_admissible(level, 12, rng=rng)
    assert l_closed_s1(data, lattice8, params).residual < mp.mpf("1e-15")
    original = LatticeSeries.e1
    monkeypatch.setattr(LatticeSeries, "e1", lambda self, x: original(self, x) + mp.mpf("0.1"))
    assert l_closed_s1(data, lattice8, params).residual > mp.mpf("1e-6")


def test_single_factor_display_differs_by_the_conjugate_ratio(
    lattice8: Lattice, params: SeriesParams, level: Level
) -> None:
    n = level.generator.to_complex()
    e2zero = lattice_series(lattice8, params).e2zero
    data = random_admissible(level, 12, seed=6)
    closed = l_closed_s1(data, lattice8, params)
    a, _, c, d = data.matrix.entries()
    tau = ((a + d) / c).to_complex()
    factor = data.theta * (data.alpha - data.alpha_p)
    gap = factor * (closed.l_value - closed.single_factor)
    assert abs(gap - mp.conj(tau) * e2zero * (1 - mp.conj(n) / n)) < mp.mpf("1e-15")


def test_single_factor_display_holds_for_a_real_level(lattice8: Lattice, params: SeriesParams) -> None:
    real_level = Level(QuadInt(3, 0, lattice8.order))
    data = random_admissible(real_level, 20, seed=2)
    closed = l_closed_s1(data, lattice8, params)
    assert abs(closed.l_value - closed.single_factor) < mp.mpf("1e-15") * max(abs(closed.l_value), 1)
    assert closed.residual < mp.mpf("1e-15")


def test_closed_form_needs_a_level(loxodromic: Mat2, lattice8: Lattice, params: SeriesParams) -> None:
    with pytest.raises(GeodesicError):
        l_closed_s1(geodesic_data(loxodromic), lattice8, params)


def test_beta_factor() -> None:
    assert abs(beta_factor(mp.mpf(0)) - mp.mpf("0.5")) < mp.mpf("1e-30")
    s = mp.mpf(2)
    direct = mp.quad(lambda t: (t / (t**2 + 1)) ** (s + 2) / t, [0, 1, mp.inf])
    assert abs(beta_factor(s) - direct) < mp.mpf("1e-25")


def test_geodesic_path_is_carried_by_the_smeared_matrix(loxodromic: Mat2, level: Level) -> None:
    data = geodesic_data(loxodromic, level)
    path = GeodesicPath(data)
    top = path.point(mp.mpf(1))
    assert abs(top.z - (data.beta + data.beta_p) / 2) < mp.mpf("1e-30")
    assert abs(top.v - abs(data.beta - data.beta_p) / 2) < mp.mpf("1e-30")
    for t in ("0.5", "1", "3"):
        assert path.endpoint_residual(mp.mpf(t)) < mp.mpf("1e-25")


def test_smeared_path_is_the_scaled_base_geodesic(loxodromic: Mat2, level: Level) -> None:
    # N acts on (z, v) as (N z, |N| v)
    data = geodesic_data(loxodromic, level)
    path = GeodesicPath(data)
    n = data.n_value
    for t in ("0.25", "1", "4"):
        scaled, base = path.point(mp.mpf(t)), path.base_point(mp.mpf(t))
        assert abs(scaled.z - n * base.z) < mp.mpf("1e-30")
        assert abs(scaled.v - abs(n) * base.v) < mp.mpf("1e-30")


def test_random_admissible_is_seed_stable(level: Level) -> None:
    assert random_admissible(level, 30, seed=9).matrix == random_admissible(level, 30, seed=9).matrix


@pytest.mark.slow
def test_path_integral_matches_the_beta_closed_form(loxodromic: Mat2, level: Level, lattice8: Lattice) -> None:
    check = integral_check(geodesic_data(loxodromic, level), 2, lattice8)
    assert check.representatives > 0
    assert check.residual < mp.mpf("1e-4")


@pytest.mark.slow
def test_path_integral_without_a_level(loxodromic: Mat2, lattice8: Lattice) -> None:
    data = geodesic_data(loxodromic)
    assert data.n_value == 1
    check = integral_check(data, 2, lattice8)
    assert check.representatives > 0
    assert check.residual < mp.mpf("1e-4")
