"""The harmonic lift ``H`` on hyperbolic 3-space and the Moebius action.

``H(u) = E_2(0)(z - conj z) - (4 pi / D(L)) v sum' conj(m) n / |mn| K_1(4 pi |mn| v) e(mnz)``
with ``m`` in ``L``, ``n`` in the trace dual ``L' = (1/sqrt D) O``. The double
sum only depends on ``k = m n``; writing ``n = n0 / sqrt D`` it is regrouped by
``K = m n0`` in ``O`` so that each Bessel value is computed once per norm.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import mpmath as mp

from core.bessel import bessel_k1
from core.eisenstein import PrecisionExhaustedError, SAFETY_FACTOR, SeriesParams, lattice_series
from core.quadfield import Lattice, Level, Mat2, QuadFrac, QuadInt

logger = logging.getLogger(__name__)

DEFAULT_V_FLOOR = 0.05


class ConventionError(RuntimeError):
    """Raised when no character convention satisfies the transformation law."""

    def __init__(self, message: str, residuals: dict[str, float]) -> None:
        super().__init__(message)
        self.residuals = residuals


@dataclass(frozen=True)
class Point3:
    """``u = z + j v`` in the upper half space."""

    z: mp.mpc
    v: mp.mpf

    def __post_init__(self) -> None:
        if self.v <= 0:
            raise ValueError(f"points of H^3 need v > 0, got {self.v}")

    @classmethod
    def of(cls, z: complex | mp.mpc | QuadFrac | QuadInt, v: float | str | mp.mpf) -> Point3:
        if isinstance(z, (QuadFrac, QuadInt)):
            z = z.to_complex()
        return cls(mp.mpc(z), mp.mpf(v))

    def reflect(self) -> Point3:
        """``-z + j v``."""

        return Point3(-self.z, self.v)

    def shifted(self, dz: mp.mpc = mp.mpc(0), dv: mp.mpf = mp.mpf(0)) -> Point3:
        return Point3(self.z + dz, self.v + dv)

    def __str__(self) -> str:
        return f"{mp.nstr(self.z, 8)} + j*{mp.nstr(self.v, 8)}"


def moebius(matrix: Mat2, u: Point3) -> Point3:
    """``A u = (a u + b)(c u + d)^-1`` in quaternionic coordinates."""

    a, b, c, d = (entry.to_complex() for entry in matrix.entries())
    cz_d = c * u.z + d
    denom = abs(cz_d) ** 2 + abs(c) ** 2 * u.v**2
    z = ((a * u.z + b) * mp.conj(cz_d) + a * mp.conj(c) * u.v**2) / denom
    return Point3(z, u.v / denom)


def scale_point(n: QuadInt, u: Point3) -> Point3:
    """``N u = N z + j |N| v``."""

    value = n.to_complex()
    return Point3(value * u.z, abs(value) * u.v)


@dataclass(frozen=True)
class HConvention:
    """Normalisation of the additive character ``e(k z) = exp(sign 2 pi i Tr(k' z))``.

    ``k' = conj(k)`` when ``conjugate`` is set. Harmonicity and periodicity
    hold for all four variants; only the transformation law tells them apart.
    """

    sign: int = 1
    conjugate: bool = False

    @property
    def name(self) -> str:
        return ("+" if self.sign > 0 else "-") + ("conj" if self.conjugate else "")

    @classmethod
    def parse(cls, name: str) -> HConvention:
        return cls(sign=-1 if name.startswith("-") else 1, conjugate=name.endswith("conj"))

    @classmethod
    def candidates(cls) -> tuple[HConvention, ...]:
        return cls(1, False), cls(-1, False), cls(1, True), cls(-1, True)


class HarmonicLift:
    """Evaluates ``H`` for one lattice; coefficient tables are built per radius and cached."""

    def __init__(
        self,
        lattice: Lattice,
        params: SeriesParams | None = None,
        convention: HConvention | None = None,
        v_floor: float = DEFAULT_V_FLOOR,
    ) -> None:
        self.lattice = lattice
        self.params = params or SeriesParams.ambient()
        self.convention = convention or HConvention()
        self.v_floor = mp.mpf(v_floor)
        order = lattice.order
        self.sqrt_disc = order.sqrt_disc().to_complex()
        self.abs_sqrt_disc = mp.sqrt(abs(order.disc))
        self._lock = threading.Lock()
        self._tables: dict[int, list[tuple[mp.mpc, int, mp.mpc]]] = {}

    def required_radius(self, v: mp.mpf) -> mp.mpf:
        """Largest ``|K|`` whose Bessel factor exceeds ``error / SAFETY_FACTOR``."""

        decay = 4 * mp.pi * v / self.abs_sqrt_disc
        return (mp.log(SAFETY_FACTOR) - mp.log(self.params.error)) / decay + 1

    def _coefficients(self, radius: int) -> list[tuple[mp.mpc, int, mp.mpc]]:
        """``(K, norm(K), K c(K))`` with ``c(K) = sum_{m | K} conj(m)/m`` for ``0 < |K| <= radius``."""

        with self._lock:
            cached = self._tables.get(radius)
        if cached is not None:
            return cached
        order = self.lattice.order
        sums: dict[tuple[int, int], QuadFrac] = {}
        for mi, mj in self.lattice.points(radius):
            if (mi, mj) == (0, 0):
                continue
            m = QuadInt(mi, mj, order)
            ratio = m.conj() / m
            reach = radius / mp.sqrt(m.norm())
            for ni, nj in self.lattice.points(reach):
                if (ni, nj) == (0, 0):
                    continue
                k = m * QuadInt(ni, nj, order)
                key = (k.x, k.y)
                sums[key] = sums[key] + ratio if key in sums else ratio
        table = []
        for (x, y), total in sorted(sums.items()):
            k = QuadInt(x, y, order)
            weighted = (total * k).to_complex()
            table.append((k.to_complex(), k.norm(), weighted))
        logger.debug("H coefficient table: radius=%d, %d distinct products", radius, len(table))
        with self._lock:
            self._tables.setdefault(radius, table)
        return table

    def _character(self, k: mp.mpc, z: mp.mpc) -> mp.mpc:
        if self.convention.conjugate:
            k = mp.conj(k)
        return mp.expjpi(self.convention.sign * 4 * mp.re(k * z))

    def fourier_part(self, u: Point3) -> mp.mpc:
        """``sum' conj(m) n / |mn| K_1(4 pi |mn| v) e(mnz)`` over ``m`` in ``L``, ``n`` in ``L'``."""

        if u.v < self.v_floor:
            radius = self.required_radius(u.v)
            raise PrecisionExhaustedError(
                f"v={mp.nstr(u.v, 6)} is below the floor {mp.nstr(self.v_floor, 6)}; "
                f"the Bessel sum would need |K| up to {mp.nstr(radius, 6)}",
                float(radius),
            )
        radius = int(mp.ceil(self.required_radius(u.v)))
        if radius > self.params.max_radius:
            raise PrecisionExhaustedError(
                f"Bessel sum radius {radius} exceeds the configured maximum", float(radius)
            )
        terms = []
        scale = self.abs_sqrt_disc / self.sqrt_disc
        bessel: dict[int, mp.mpf] = {}
        for k, norm, weighted in self._coefficients(radius):
            abs_k = mp.sqrt(norm)
            if norm not in bessel:
                bessel[norm] = bessel_k1(4 * mp.pi * abs_k * u.v / self.abs_sqrt_disc)
            terms.append(weighted / abs_k * bessel[norm] * self._character(k / self.sqrt_disc, u.z))
        return scale * mp.fsum(terms)

    def value(self, u: Point3) -> mp.mpc:
        e2zero = lattice_series(self.lattice, self.params).e2zero
        linear = e2zero * (u.z - mp.conj(u.z))
        return linear - 4 * mp.pi / self.lattice.pairing * u.v * self.fourier_part(u)

    def value_n(self, u: Point3, level: Level) -> mp.mpc:
        return self.value(scale_point(level.generator, u)) - self.value(u)


@lru_cache(maxsize=16)
def _lift(lattice: Lattice, params: SeriesParams, convention: HConvention, prec: int) -> HarmonicLift:
    return HarmonicLift(lattice, params, convention)


def harmonic_lift(
    lattice: Lattice,
    params: SeriesParams | None = None,
    convention: HConvention | None = None,
) -> HarmonicLift:
    """Shared :class:`HarmonicLift` so coefficient tables survive between calls."""

    return _lift(lattice, params or SeriesParams.ambient(), convention or HConvention(), mp.mp.prec)


def h_value(
    u: Point3,
    lattice: Lattice,
    params: SeriesParams | None = None,
    convention: HConvention | None = None,
) -> mp.mpc:
    return harmonic_lift(lattice, params, convention).value(u)


def h_n_value(
    u: Point3,
    level: Level,
    lattice: Lattice,
    params: SeriesParams | None = None,
    convention: HConvention | None = None,
) -> mp.mpc:
    """``H_N(u) = H(N u) - H(u)``."""

    return harmonic_lift(lattice, params, convention).value_n(u, level)


def hyperbolic_laplacian(f: Callable[[Point3], mp.mpc], u: Point3, h: float | mp.mpf) -> mp.mpc:
    """Central-difference ``v^2 (f_xx + f_yy + f_vv) - v f_v`` at ``u``."""

    h = mp.mpf(h)
    centre = f(u)
    second = mp.mpc(0)
    for dz in (mp.mpc(h, 0), mp.mpc(0, h)):
        second += f(u.shifted(dz=dz)) - 2 * centre + f(u.shifted(dz=-dz))
    up = f(u.shifted(dv=h))
    down = f(u.shifted(dv=-h))
    second += up - 2 * centre + down
    first_v = (up - down) / (2 * h)
    return u.v**2 * second / h**2 - u.v * first_v
