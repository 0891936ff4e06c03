"""Hecke operators ``T_p`` and the involution ``T_x`` on homomorphisms ``Gamma -> C``."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import mpmath as mp

from core.eisenstein import complex_to_json
from core.quadfield import Level, Mat2, QuadInt, is_prime_element, residues

logger = logging.getLogger(__name__)

Homomorphism = Callable[[Mat2], mp.mpc]


class HeckeError(ValueError):
    """Raised for unusable primes or when coset matching fails."""


@dataclass(frozen=True)
class CosetReps:
    p: QuadInt
    reps: tuple[Mat2, ...]
    level: Level | None = None

    @property
    def count(self) -> int:
        return len(self.reps)


@dataclass
class HeckeResult:
    p: QuadInt
    applied: mp.mpc
    eigenvalue: int
    expected: mp.mpc
    residual: mp.mpf

    def to_json(self) -> dict[str, object]:
        return {
            "p": str(self.p),
            "applied": complex_to_json(self.applied),
            "eigenvalue": self.eigenvalue,
            "expected": complex_to_json(self.expected),
            "residual": mp.nstr(self.residual, 6),
        }


def _divisible_by(matrix: Mat2, p: QuadInt) -> bool:
    return all(p.divides(entry) for entry in matrix.entries())


def _quotient(left: Mat2, right: Mat2, p: QuadInt) -> Mat2 | None:
    """``left right^-1`` when it is integral (``right`` has determinant ``p``)."""

    product = left @ right.adjugate()
    if not _divisible_by(product, p):
        return None
    return Mat2(*(entry.exact_div(p) for entry in product.entries()))


def coset_reps(p: QuadInt, level: Level | None = None) -> CosetReps:
    """``{(1, j; 0, p) : j in O/pO} + {(p, 0; 0, 1)}``, checked pairwise inequivalent."""

    if not is_prime_element(p):
        raise HeckeError(f"{p} does not generate a prime ideal")
    if level is not None and p.divides(level.generator):
        raise HeckeError(f"{p} divides the level {level}")
    order = p.order
    if order.disc % p.norm() == 0:
        logger.warning("Hecke prime %s is ramified in %s", p, order)
    one, zero = order.one(), order.zero()
    reps = [Mat2(one, j, zero, p) for j in residues(p)]
    reps.append(Mat2(p, zero, zero, one))
    for i, left in enumerate(reps):
        for right in reps[i + 1 :]:
            if _quotient(left, right, p) is not None:
                raise HeckeError(f"coset representatives {left} and {right} are equivalent")
    if len(reps) != p.norm() + 1:
        raise HeckeError(f"expected {p.norm() + 1} representatives, built {len(reps)}")
    return CosetReps(p, tuple(reps), level)


def _matching_cosets(moved: Mat2, cosets: CosetReps) -> list[tuple[int, Mat2]]:
    matches = []
    for j, right in enumerate(cosets.reps):
        candidate = _quotient(moved, right, cosets.p)
        if candidate is None or not candidate.is_sl2():
            continue
        if cosets.level is not None and not candidate.in_gamma0(cosets.level):
            continue
        matches.append((j, candidate))
    return matches


def hecke_apply(phi: Homomorphism, matrix: Mat2, cosets: CosetReps) -> mp.mpc:
    """``(T_p phi)(A) = sum_i phi(g_i A g_sigma(i)^-1)``.

    Every ``g_i A`` must lie in exactly one right coset, and ``sigma`` must be a
    permutation; anything else raises :class:`HeckeError`.
    """

    used: set[int] = set()
    terms = []
    for left in cosets.reps:
        matches = _matching_cosets(left @ matrix, cosets)
        if not matches:
            raise HeckeError(f"no coset matches {left} * {matrix}")
        if len(matches) > 1:
            indices = ", ".join(str(j) for j, _ in matches)
            raise HeckeError(f"{left} * {matrix} matches several cosets ({indices})")
        j, quotient = matches[0]
        if j in used:
            raise HeckeError(f"coset matching for {matrix} is not a permutation")
        used.add(j)
        terms.append(phi(quotient))
    return mp.fsum(terms)


def involution_apply(phi: Homomorphism, matrix: Mat2) -> mp.mpc:
    """``phi(x A x^-1)`` for ``x = diag(1, -1)``."""

    return phi(matrix.conjugate_by_x())


def hecke_eigen_check(phi: Homomorphism, matrix: Mat2, cosets: CosetReps) -> HeckeResult:
    eigenvalue = cosets.p.trace()
    applied = hecke_apply(phi, matrix, cosets)
    expected = eigenvalue * phi(matrix)
    return HeckeResult(cosets.p, applied, eigenvalue, expected, abs(applied - expected))
