from __future__ import annotations

import random
from fractions import Fraction

import mpmath as mp
import pytest

from core.cocycle import (
    Branch,
    check_cocycle,
    check_cocycle_n,
    check_transformation,
    homomorphism_residual,
    imaginary_part,
    phi,
    phi_n,
    phi_n_single_factor,
    phi_pq,
    pin_convention,
    row_actions_agree,
)
from core.eisenstein import SeriesParams, lattice_series
from core.harmonic import Point3
from core.quadfield import (
    Lattice,
    Level,
    Mat2,
    NotInLevelError,
    QuadFrac,
    QuadInt,
    random_gamma0,
    random_sl2,
    random_torsion_point,
    residues,
)

TOLERANCE = mp.mpf("1e-20")
HEIGHT = 10
SAMPLES = 3


def _level_pair(level: Level, rng: random.Random) -> tuple[QuadFrac, QuadFrac]:
    shifted = level.generator - 1
    reps = residues(shifted)
    return level.order.zero().to_frac(), (reps[rng.randrange(len(reps))] / shifted).reduce()


def test_phi_on_translations(lattice8: Lattice, params: SeriesParams) -> None:
    order = lattice8.order
    assert phi(Mat2.identity(order), lattice8, params).value == 0
    assert phi(Mat2.from_ints(order, 1, 1, 0, 1), lattice8, params).value == 0
    shear = phi(Mat2.from_ints(order, 1, (0, 1), 0, 1), lattice8, params)
    omega = order.omega()
    assert shear.branch is Branch.C_ZERO
    expected = lattice_series(lattice8, params).e2zero * (omega - mp.conj(omega))
    assert abs(shear.value - expected) < TOLERANCE
    assert abs(shear.value) > 1


def test_phi_rejects_matrices_outside_sl2(lattice8: Lattice, params: SeriesParams) -> None:
    with pytest.raises(ValueError):
        phi(Mat2.from_ints(lattice8.order, 2, 0, 0, 1), lattice8, params)


def test_imaginary_part_is_twice_the_imaginary_component() -> None:
    assert imaginary_part(mp.mpc(3, 2)) == mp.mpc(0, 4)


def test_phi_pq_at_zero_is_phi(lattice8: Lattice, params: SeriesParams, rng: random.Random) -> None:
    zero = lattice8.order.zero()
    for _ in range(SAMPLES):
        matrix = random_sl2(lattice8.order, HEIGHT, rng=rng)
        plain = phi(matrix, lattice8, params)
        torsion = phi_pq(matrix, zero, zero, lattice8, params)
        assert abs(plain.value - torsion.value) < TOLERANCE
        assert plain.error_budget < TOLERANCE


def test_phi_pq_of_identity_vanishes(lattice8: Lattice, params: SeriesParams, rng: random.Random) -> None:
    p = random_torsion_point(lattice8.order, 3, rng)
    q = random_torsion_point(lattice8.order, 3, rng)
    assert phi_pq(Mat2.identity(lattice8.order), p, q, lattice8, params).value == 0


@pytest.mark.parametrize("disc_fixture", ["lattice8", "lattice7"])
def test_cocycle_relation(
    disc_fixture: str, params: SeriesParams, rng: random.Random, request: pytest.FixtureRequest
) -> None:
    lattice: Lattice = request.getfixturevalue(disc_fixture)
    order = lattice.order
    identity = Mat2.identity(order)
    assert check_cocycle(identity, identity, lattice, params) == 0
    for _ in range(SAMPLES):
        a = random_sl2(order, HEIGHT, rng=rng)
        b = random_sl2(order, HEIGHT, rng=rng)
        p = random_torsion_point(order, 3, rng)
        q = random_torsion_point(order, 3, rng)
        assert check_cocycle(a, b, lattice, params, p=p, q=q) < TOLERANCE


def test_phi_is_a_homomorphism(lattice8: Lattice, params: SeriesParams, rng: random.Random) -> None:
    for _ in range(SAMPLES):
        a = random_sl2(lattice8.order, HEIGHT, rng=rng)
        b = random_sl2(lattice8.order, HEIGHT, rng=rng)
        assert homomorphism_residual(a, b, lattice8, params) < TOLERANCE


def test_phi_n_examples(lattice8: Lattice, params: SeriesParams, level: Level) -> None:
    order = lattice8.order
    assert phi_n(Mat2.identity(order), level, lattice8, params).value == 0
    b, d = QuadInt(1, 1, order), -order.one()
    matrix = Mat2(-order.one(), b, order.zero(), d)
    value = phi_n(matrix, level, lattice8, params).value
    n = level.generator.to_complex()
    expected = lattice_series(lattice8, params).e2zero * imaginary_part((n - 1) * (b / d).to_complex())
    assert abs(value - expected) < TOLERANCE


def test_phi_n_requires_gamma0(lattice8: Lattice, params: SeriesParams, level: Level) -> None:
    with pytest.raises(NotInLevelError):
        phi_n(Mat2.from_ints(lattice8.order, 0, -1, 1, 0), level, lattice8, params)


def test_phi_n_explicit_and_literal_forms_agree(
    lattice8: Lattice, params: SeriesParams, level: Level, rng: random.Random
) -> None:
    for _ in range(SAMPLES):
        matrix = random_gamma0(level, HEIGHT, rng=rng)
        p = random_torsion_point(lattice8.order, 3, rng)
        q = random_torsion_point(lattice8.order, 3, rng)
        value = phi_n(matrix, level, lattice8, params, p=p, q=q)
        assert value.cross_check is not None
        assert value.cross_check <= value.error_budget


def test_single_factor_form_matches_where_row_actions_agree(
    lattice8: Lattice, params: SeriesParams, rng: random.Random
) -> None:
    # N = 3 is real, and q in (1/2) L keeps (p, q) A_N = (p, q) A
    order = lattice8.order
    real_level = Level(QuadInt(3, 0, order))
    for _ in range(SAMPLES):
        matrix = random_gamma0(real_level, 2 * HEIGHT, rng=rng)
        p, q = _level_pair(real_level, rng)
        assert row_actions_agree(matrix, real_level, p, q)
        explicit = phi_n(matrix, real_level, lattice8, params, p=p, q=q).value
        folded = phi_n_single_factor(matrix, real_level, lattice8, params, p=p, q=q)
        assert abs(explicit - folded) < TOLERANCE


def test_phi_n_is_a_homomorphism(
    lattice8: Lattice, params: SeriesParams, level: Level, rng: random.Random
) -> None:
    for _ in range(SAMPLES):
        a = random_gamma0(level, HEIGHT, rng=rng)
        b = random_gamma0(level, HEIGHT, rng=rng)
        assert homomorphism_residual(a, b, lattice8, params, level=level) < TOLERANCE


def test_phi_n_cocycle_relation(
    lattice8: Lattice, params: SeriesParams, level: Level, rng: random.Random
) -> None:
    for _ in range(SAMPLES):
        a = random_gamma0(level, HEIGHT, rng=rng)
        b = random_gamma0(level, HEIGHT, rng=rng)
        p, q = _level_pair(level, rng)
        assert row_actions_agree(a, level, p, q)
        assert check_cocycle_n(a, b, level, lattice8, params, p=p, q=q) < TOLERANCE
        generic_p = random_torsion_point(lattice8.order, 3, rng)
        generic_q = QuadFrac(Fraction(1, 3), Fraction(1, 3), lattice8.order)
        assert check_cocycle_n(a, b, level, lattice8, params, p=generic_p, q=generic_q) < TOLERANCE


@pytest.mark.slow
def test_homomorphisms_hold_for_taller_matrices(
    lattice8: Lattice, params: SeriesParams, level: Level, rng: random.Random
) -> None:
    for _ in range(5):
        a = random_sl2(lattice8.order, 30, rng=rng)
        b = random_sl2(lattice8.order, 30, rng=rng)
        assert homomorphism_residual(a, b, lattice8, params) < TOLERANCE
        an = random_gamma0(level, 30, rng=rng)
        bn = random_gamma0(level, 30, rng=rng)
        assert homomorphism_residual(an, bn, lattice8, params, level=level) < TOLERANCE

@pytest.mark.slow
def test_transformation_law_links_both_pipelines(
    lattice8: Lattice, params: SeriesParams, level: Level, rng: random.Random
) -> None:
    convention = pin_convention(lattice8, params)
    points = [
        Point3.of(0, 1),
        Point3.of(QuadFrac(Fraction(3, 10), Fraction(1, 10), lattice8.order), "0.8"),
    ]
    identity = Mat2.identity(lattice8.order)
    assert check_transformation(identity, points[0], lattice8, params, convention=convention) < TOLERANCE
    for _ in range(3):
        matrix = random_sl2(lattice8.order, 20, rng=rng)
        smeared = random_gamma0(level, 20, rng=rng)
        for u in points:
            assert check_transformation(matrix, u, lattice8, params, convention=convention) < mp.mpf("1e-9")
            residual = check_transformation(smeared, u, lattice8, params, level=level, convention=convention)
            assert residual < mp.mpf("1e-9")
