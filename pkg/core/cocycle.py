"""The cocycles ``Phi``, ``Phi(.)(p, q)`` and their level-``N`` differences."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

import mpmath as mp

from core.dedekind import d_smoothed, d_sum, d_sum_pq, error_budget
from core.eisenstein import LatticeSeries, SeriesParams, complex_to_json, lattice_series
from core.harmonic import ConventionError, HConvention, Point3, harmonic_lift, moebius
from core.quadfield import Lattice, Level, Mat2, NotInLevelError, QuadFrac, QuadInt, as_frac, smear

logger = logging.getLogger(__name__)


class CocycleConsistencyError(ArithmeticError):
    """Raised when the literal and explicit evaluations of ``Phi_N`` disagree."""


class Branch(str, Enum):
    C_NONZERO = "c!=0"
    C_ZERO = "c=0"


@dataclass
class CocycleValue:
    value: mp.mpc
    error_budget: mp.mpf
    branch: Branch
    matrix: Mat2
    level: Level | None = None
    p: QuadFrac | None = None
    q: QuadFrac | None = None
    cross_check: mp.mpf | None = None

    def to_json(self) -> dict[str, object]:
        payload: dict[str, object] = {
            "value": complex_to_json(self.value),
            "error_budget": mp.nstr(self.error_budget, 6),
            "branch": self.branch.value,
            "matrix": str(self.matrix),
        }
        if self.level is not None:
            payload["N"] = str(self.level)
        if self.p is not None and self.q is not None:
            payload["p"] = self.p.to_json()
            payload["q"] = self.q.to_json()
        if self.cross_check is not None:
            payload["cross_check"] = mp.nstr(self.cross_check, 6)
        return payload


def imaginary_part(z: mp.mpc) -> mp.mpc:
    """``I(z) = z - conj(z)``."""

    return z - mp.conj(z)


def _reduced_pair(
    p: QuadFrac | QuadInt | None, q: QuadFrac | QuadInt | None, matrix: Mat2
) -> tuple[QuadFrac, QuadFrac]:
    zero = matrix.order.zero().to_frac()
    p = as_frac(p) if p is not None else zero
    q = as_frac(q) if q is not None else zero
    return p.reduce(), q.reduce()


def _e0_e2(series: LatticeSeries, p: QuadFrac, q: QuadFrac) -> mp.mpc:
    """``E_0(p) E_2(q)``; zero unless ``p`` is in ``L``."""

    e0 = series.e0(p)
    return e0 * series.e2(q) if e0 else mp.mpc(0)


def _budget(matrix: Mat2, series: LatticeSeries) -> mp.mpf:
    scale = max(mp.mpf(1), abs(series.e2zero))
    if matrix.c.is_zero():
        return 16 * series.params.error * scale * (1 + mp.sqrt(matrix.b.norm()))
    ratio = mp.sqrt(max(matrix.a.norm(), matrix.d.norm(), 1)) / mp.sqrt(matrix.c.norm())
    return error_budget(matrix.c, series.params) * scale + 16 * series.params.error * scale * (1 + ratio)


def _require_sl2(matrix: Mat2) -> None:
    if not matrix.is_sl2():
        raise ValueError(f"{matrix} is not in SL2 of the order")


def phi(matrix: Mat2, lattice: Lattice, params: SeriesParams | None = None) -> CocycleValue:
    """``Phi(A) = E_2(0) I((a+d)/c) - D(a, c)``, or ``E_2(0) I(b/d)`` when ``c = 0``."""

    _require_sl2(matrix)
    series = lattice_series(lattice, params)
    a, b, c, d = matrix.entries()
    if c.is_zero():
        value = series.e2zero * imaginary_part((b / d).to_complex())
        return CocycleValue(value, _budget(matrix, series), Branch.C_ZERO, matrix)
    value = series.e2zero * imaginary_part(((a + d) / c).to_complex()) - d_sum(a, c, lattice, params)
    return CocycleValue(value, _budget(matrix, series), Branch.C_NONZERO, matrix)


def _phi_pq_value(matrix: Mat2, p: QuadFrac, q: QuadFrac, series: LatticeSeries) -> mp.mpc:
    a, b, c, d = matrix.entries()
    if c.is_zero():
        ratio = (b / d).to_complex()
        return -mp.conj(ratio) * series.e(p) - ratio * _e0_e2(series, p, q)
    p_star, q_star = matrix.act_row(p, q)
    a_c = (a / c).to_complex()
    d_c = (d / c).to_complex()
    return (
        -mp.conj(a_c) * series.e(p)
        - mp.conj(d_c) * series.e(p_star)
        - a_c * _e0_e2(series, p, q)
        - d_c * _e0_e2(series, p_star, q_star)
        - d_sum_pq(a, c, p, q, series.lattice, series.params)
    )


def phi_pq(
    matrix: Mat2,
    p: QuadFrac | QuadInt | None,
    q: QuadFrac | QuadInt | None,
    lattice: Lattice,
    params: SeriesParams | None = None,
) -> CocycleValue:
    """``Phi(A)(p, q)`` with ``(p*, q*) = (p, q) A`` reduced modulo ``L^2``."""

    _require_sl2(matrix)
    series = lattice_series(lattice, params)
    p, q = _reduced_pair(p, q, matrix)
    branch = Branch.C_ZERO if matrix.c.is_zero() else Branch.C_NONZERO
    value = _phi_pq_value(matrix, p, q, series)
    return CocycleValue(value, _budget(matrix, series), branch, matrix, p=p, q=q)


def _phi_n_explicit(matrix: Mat2, level: Level, p: QuadFrac, q: QuadFrac, series: LatticeSeries) -> mp.mpc:
    n = level.generator.to_complex()
    a, b, c, d = matrix.entries()
    if c.is_zero():
        ratio = (b / d).to_complex()
        return -mp.conj((n - 1) * ratio) * series.e(p) - (n - 1) * ratio * _e0_e2(series, p, q)
    p_star, q_star = matrix.act_row(p, q)
    p_star_n, q_star_n = smear(matrix, level).act_row(p, q)
    a_c = (a / c).to_complex()
    d_c = (d / c).to_complex()
    return (
        -mp.conj((n - 1) * a_c) * series.e(p)
        - (mp.conj(n * d_c) * series.e(p_star_n) - mp.conj(d_c) * series.e(p_star))
        - (n - 1) * a_c * _e0_e2(series, p, q)
        - (n * d_c * _e0_e2(series, p_star_n, q_star_n) - d_c * _e0_e2(series, p_star, q_star))
        - d_smoothed(a, c, level, series.lattice, series.params, p=p, q=q)
    )


def phi_n(
    matrix: Mat2,
    level: Level,
    lattice: Lattice,
    params: SeriesParams | None = None,
    *,
    p: QuadFrac | QuadInt | None = None,
    q: QuadFrac | QuadInt | None = None,
    cross_check: bool = True,
) -> CocycleValue:
    """``Phi_N(A)(p, q) = Phi(A_N)(p, q) - Phi(A)(p, q)`` on ``Gamma0(N)``.

    The explicit ``D^N`` form is returned. With ``cross_check`` the literal
    difference is evaluated as well and a mismatch beyond the error budget
    raises :class:`CocycleConsistencyError`.
    """

    if not matrix.in_gamma0(level):
        raise NotInLevelError(f"{matrix} is not in Gamma0({level})")
    series = lattice_series(lattice, params)
    p, q = _reduced_pair(p, q, matrix)
    smeared = smear(matrix, level)
    value = _phi_n_explicit(matrix, level, p, q, series)
    budget = _budget(smeared, series) + _budget(matrix, series)
    branch = Branch.C_ZERO if matrix.c.is_zero() else Branch.C_NONZERO
    result = CocycleValue(value, budget, branch, matrix, level=level, p=p, q=q)
    if cross_check:
        literal = _phi_pq_value(smeared, p, q, series) - _phi_pq_value(matrix, p, q, series)
        result.cross_check = abs(literal - value)
        if result.cross_check > budget:
            raise CocycleConsistencyError(
                f"Phi_N mismatch for {matrix}: literal and explicit forms differ by "
                f"{mp.nstr(result.cross_check, 5)} (budget {mp.nstr(budget, 5)})"
            )
    return result


def phi_n_single_factor(
    matrix: Mat2,
    level: Level,
    lattice: Lattice,
    params: SeriesParams | None = None,
    *,
    p: QuadFrac | QuadInt | None = None,
    q: QuadFrac | QuadInt | None = None,
) -> mp.mpc:
    """``Phi_N`` written with a single ``(N-1)`` factor on every term.

    It uses ``p*`` from ``(p, q) A_N`` only, so it matches :func:`phi_n` when
    ``(p, q) A_N = (p, q) A`` modulo ``L^2`` and ``N`` is real.
    """

    series = lattice_series(lattice, params)
    p, q = _reduced_pair(p, q, matrix)
    n = level.generator.to_complex()
    a, b, c, d = matrix.entries()
    if c.is_zero():
        ratio = (b / d).to_complex()
        return -(n - 1) * mp.conj(ratio) * series.e(p) - (n - 1) * ratio * _e0_e2(series, p, q)
    p_star, q_star = smear(matrix, level).act_row(p, q)
    a_c = (a / c).to_complex()
    d_c = (d / c).to_complex()
    return (
        -(n - 1) * mp.conj(a_c) * series.e(p)
        - (n - 1) * mp.conj(d_c) * series.e(p_star)
        - (n - 1) * a_c * _e0_e2(series, p, q)
        - (n - 1) * d_c * _e0_e2(series, p_star, q_star)
        - d_smoothed(a, c, level, lattice, params, p=p, q=q)
    )


def check_cocycle(
    first: Mat2,
    second: Mat2,
    lattice: Lattice,
    params: SeriesParams | None = None,
    *,
    p: QuadFrac | QuadInt | None = None,
    q: QuadFrac | QuadInt | None = None,
) -> mp.mpf:
    """``|Phi(AB)(p,q) - Phi(A)(p,q) - Phi(B)((p,q)A)|``."""

    p, q = _reduced_pair(p, q, first)
    moved = first.act_row(p, q)
    product = phi_pq(first @ second, p, q, lattice, params).value
    left = phi_pq(first, p, q, lattice, params).value
    right = phi_pq(second, *moved, lattice, params).value
    return abs(product - left - right)


def row_actions_agree(matrix: Mat2, level: Level, p: QuadFrac, q: QuadFrac) -> bool:
    """``(p, q) A_N = (p, q) A`` modulo ``L^2``."""

    return smear(matrix, level).act_row(p, q) == matrix.act_row(p, q)


def check_cocycle_n(
    first: Mat2,
    second: Mat2,
    level: Level,
    lattice: Lattice,
    params: SeriesParams | None = None,
    *,
    p: QuadFrac | QuadInt | None = None,
    q: QuadFrac | QuadInt | None = None,
) -> mp.mpf:
    """``|Phi_N(AB)(p,q) - Phi_N(A)(p,q) - Phi_N(B)((p,q)A)|``.

    Only meaningful where ``(p, q) A_N = (p, q) A`` modulo ``L^2``; elsewhere the
    twisted form ``Phi(B_N)((p,q)A_N) - Phi(B)((p,q)A)`` replaces the last term.
    """

    p, q = _reduced_pair(p, q, first)
    product = phi_n(first @ second, level, lattice, params, p=p, q=q, cross_check=False).value
    left = phi_n(first, level, lattice, params, p=p, q=q, cross_check=False).value
    if row_actions_agree(first, level, p, q):
        moved = first.act_row(p, q)
        right = phi_n(second, level, lattice, params, p=moved[0], q=moved[1], cross_check=False)
        return abs(product - left - right.value)
    logger.debug("row actions of %s differ at (%s, %s); using the twisted relation", first, p, q)
    series = lattice_series(lattice, params)
    moved_n = smear(first, level).act_row(p, q)
    moved = first.act_row(p, q)
    twisted = _phi_pq_value(smear(second, level), *moved_n, series) - _phi_pq_value(second, *moved, series)
    return abs(product - left - twisted)


def homomorphism_residual(
    first: Mat2,
    second: Mat2,
    lattice: Lattice,
    params: SeriesParams | None = None,
    level: Level | None = None,
) -> mp.mpf:
    """``|phi(AB) - phi(A) - phi(B)|`` for ``Phi`` or, with a level, ``Phi_N``."""

    if level is None:
        values = [phi(m, lattice, params).value for m in (first @ second, first, second)]
    else:
        values = [phi_n(m, level, lattice, params).value for m in (first @ second, first, second)]
    return abs(values[0] - values[1] - values[2])


def check_transformation(
    matrix: Mat2,
    u: Point3,
    lattice: Lattice,
    params: SeriesParams | None = None,
    *,
    level: Level | None = None,
    convention: HConvention | None = None,
) -> mp.mpf:
    """``|Phi(A) - (H(Au) - H(u))|``, or the ``Phi_N`` / ``H_N`` version with a level."""

    lift = harmonic_lift(lattice, params, convention)
    moved = moebius(matrix, u)
    if level is None:
        expected = phi(matrix, lattice, params).value
        actual = lift.value(moved) - lift.value(u)
    else:
        expected = phi_n(matrix, level, lattice, params).value
        actual = lift.value_n(moved, level) - lift.value_n(u, level)
    return abs(expected - actual)


def _pinning_matrices(lattice: Lattice) -> list[Mat2]:
    order = lattice.order
    w = order.element(0, 1)
    one, zero = order.one(), order.zero()
    return [Mat2(w, -one, one, zero), Mat2(one + w, w, one, one)]


def pin_convention(
    lattice: Lattice,
    params: SeriesParams | None = None,
    tolerance: float = 1e-9,
    matrices: Iterable[Mat2] | None = None,
) -> HConvention:
    """Choose the character convention of ``H`` that satisfies ``Phi(A) = H(Au) - H(u)``.

    Each candidate is checked with matrices having ``c != 0`` at two points; the
    first whose worst residual is under ``tolerance`` wins.
    """

    checks = [m for m in (matrices or _pinning_matrices(lattice)) if m.is_sl2()]
    points = [Point3.of(mp.mpc(0.1, 0.05), 1.1), Point3.of(mp.mpc(-0.2, 0.3), 0.9)]
    residuals: dict[str, float] = {}
    for candidate in HConvention.candidates():
        worst = max(
            check_transformation(m, u, lattice, params, convention=candidate)
            for m in checks
            for u in points
        )
        residuals[candidate.name] = float(worst)
        logger.debug("H convention %s: worst transformation residual %s", candidate.name, mp.nstr(worst, 5))
        if worst < tolerance:
            logger.info("Pinned H convention %s for %s", candidate.name, lattice.order)
            return candidate
    raise ConventionError(
        f"no character convention satisfies the transformation law for {lattice.order}", residuals
    )
