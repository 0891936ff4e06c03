"""Integer-relation recognition of cocycle values as algebraic integers.

Complex values are folded into one real vector ``Re + rho Im`` with an
irrational ``rho`` before running PSLQ; a relation found there is accepted
only when it also holds for the real and imaginary parts separately.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import mpmath as mp

from core.eisenstein import complex_to_json, weierstrass_invariants
from core.quadfield import Lattice

logger = logging.getLogger(__name__)

MIN_DIGITS = 60
DEFAULT_MAX_COEFF = 2**40


class RecognitionStatus(str, Enum):
    FOUND = "found"
    NO_RELATION = "no-relation"
    INCONCLUSIVE = "inconclusive"


@dataclass
class AlgebraicWitness:
    status: RecognitionStatus
    coefficients: list[int] = field(default_factory=list)
    labels: list[str] = field(default_factory=list)
    residual: mp.mpf | None = None
    height: int = 0
    denominator: int = 1
    message: str = ""

    @property
    def integral(self) -> bool:
        return self.status is RecognitionStatus.FOUND and self.denominator == 1

    def to_json(self) -> dict[str, object]:
        return {
            "status": self.status.value,
            "coefficients": self.coefficients,
            "labels": self.labels,
            "residual": mp.nstr(self.residual, 5) if self.residual is not None else None,
            "height": self.height,
            "denominator": self.denominator,
            "integral": self.integral,
            "message": self.message,
        }


@dataclass
class FieldSpec:
    """``F = Q(g2, g3, sqrt D)`` for a rescaled lattice ``s^(-1/2) L``.

    ``value_scale`` converts a cocycle value of ``L`` to the rescaled lattice
    (values have weight two, so they are multiplied by ``value_scale``). With
    ``normalized`` set, ``g2`` and ``g3`` are rational integers and the
    recognition basis is the integral basis ``1, w`` of ``O_K``.
    """

    disc: int
    g2: mp.mpc
    g3: mp.mpc
    omega: mp.mpc
    value_scale: mp.mpc
    normalized: bool
    degree: int = 1

    @classmethod
    def from_lattice(cls, lattice: Lattice, *, normalize: bool = True, degree: int = 1) -> FieldSpec:
        g2, g3 = weierstrass_invariants(lattice)
        omega = lattice.order.omega()
        if not normalize:
            return cls(lattice.order.disc, g2, g3, omega, mp.mpc(1), False, degree)
        # g2 = g3 = r = 27 j / (j - 1728) after scaling by g3/g2; clear the denominator of r
        shape = g2**3 / g3**2
        rational = _rational(mp.re(shape))
        if rational is None or abs(mp.im(shape)) > mp.mp.eps ** mp.mpf(0.5):
            logger.warning("j-invariant of %s is not recognised as rational; normalisation skipped", lattice.order)
            return cls(lattice.order.disc, g2, g3, omega, mp.mpc(1), False, degree)
        den = rational.denominator
        lam2 = g3 / g2 / den
        scale = lam2
        g2n = g2 / lam2**2
        g3n = g3 / lam2**3
        logger.debug("normalised invariants g2=%s g3=%s", mp.nstr(g2n, 12), mp.nstr(g3n, 12))
        return cls(lattice.order.disc, g2n, g3n, omega, 1 / scale, True, 0)

    def basis(self) -> tuple[list[mp.mpc], list[str]]:
        values: list[mp.mpc] = []
        labels: list[str] = []
        gens = [(mp.mpc(1), "1"), (self.omega, "w")]
        for i in range(self.degree + 1):
            for j in range(self.degree + 1 - i):
                for value, label in gens:
                    monomial = self.g2**i * self.g3**j * value
                    name = "*".join(part for part in (f"g2^{i}" if i else "", f"g3^{j}" if j else "", label) if part)
                    values.append(monomial)
                    labels.append(name)
        return values, labels

    def to_json(self) -> dict[str, object]:
        return {
            "disc": self.disc,
            "g2": complex_to_json(self.g2, 30),
            "g3": complex_to_json(self.g3, 30),
            "normalized": self.normalized,
            "degree": self.degree,
        }


def _rational(value: mp.mpf, max_den: int = 10**8) -> Fraction | None:
    relation = mp.pslq([value, 1], maxcoeff=max_den, maxsteps=10**4)
    if relation is None or relation[0] == 0:
        return None
    return Fraction(-relation[1], relation[0])


def recognize_integrality(
    value: mp.mpc,
    field: FieldSpec,
    *,
    scaled: bool = False,
    max_coeff: int = DEFAULT_MAX_COEFF,
    tolerance: mp.mpf | None = None,
) -> AlgebraicWitness:
    """Find integers ``k0 value = sum k_i b_i`` over the recognition basis ``b_i``.

    ``scaled`` marks values that already belong to the rescaled lattice; other
    values are multiplied by ``field.value_scale`` first. The witness is
    integral when ``|k0| = 1``.
    """

    digits = mp.mp.dps
    if digits < MIN_DIGITS:
        return AlgebraicWitness(
            RecognitionStatus.INCONCLUSIVE,
            message=f"working precision {digits} digits is below the {MIN_DIGITS} needed",
        )
    target = mp.mpc(value) if scaled else mp.mpc(value) * field.value_scale
    tolerance = tolerance if tolerance is not None else mp.mpf(10) ** (-(digits * 2 // 3))
    if abs(target) < tolerance:
        return AlgebraicWitness(RecognitionStatus.FOUND, [1], ["value"], abs(target), 0)
    basis, labels = field.basis()
    rho = mp.sqrt(2) / mp.pi
    fold = lambda z: mp.re(z) + rho * mp.im(z)  # noqa: E731
    vector = [fold(target)] + [fold(b) for b in basis]
    relation = mp.pslq(vector, tol=tolerance, maxcoeff=max_coeff, maxsteps=10**6)
    if relation is None or relation[0] == 0:
        status = RecognitionStatus.NO_RELATION
        message = f"no relation with coefficients below {max_coeff} at {digits} digits"
        if digits < 2 * MIN_DIGITS:
            status = RecognitionStatus.INCONCLUSIVE
            message += "; retry at higher precision"
        logger.warning("recognition of %s: %s", mp.nstr(target, 15), message)
        return AlgebraicWitness(status, message=message)
    k0, rest = relation[0], relation[1:]
    combination = mp.fsum(k * b for k, b in zip(rest, basis))
    residual = abs(k0 * target + combination)
    if residual > tolerance * max(1, abs(target)) * abs(k0):
        message = f"folded relation fails on the complex value (residual {mp.nstr(residual, 5)})"
        logger.warning("recognition of %s: %s", mp.nstr(target, 15), message)
        return AlgebraicWitness(RecognitionStatus.NO_RELATION, residual=residual, message=message)
    sign = -1 if k0 > 0 else 1
    coefficients = [sign * k for k in rest]
    return AlgebraicWitness(
        RecognitionStatus.FOUND,
        coefficients=coefficients,
        labels=labels,
        residual=residual,
        height=max(abs(k) for k in relation),
        denominator=abs(k0),
    )
